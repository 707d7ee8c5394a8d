//! Closed-form Hausdorff dimensions of limsup sets of shrinking rectangles
//! on a missing-digit carpet, plus the variational (sup over the spectrum)
//! oracle that cross-validates the case analysis.

use serde::Serialize;

use crate::carpet::{Degeneracy, DigitPattern, WeightVector};
use crate::multifractal::{kappa_theta, SpectrumCurve, Q_MAX};
use crate::{Error, Result};

/// Approximation rate pair `(tau1, tau2)` with `tau = tau2 / tau1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub tau1: f64,
    pub tau2: f64,
}

impl Rates {
    pub fn new(tau1: f64, tau2: f64) -> Result<Self> {
        if !(tau1.is_finite() && tau2.is_finite()) || tau1 <= 0.0 || tau1 > tau2 {
            return Err(Error::RatesOutOfRange {
                requirement: "0 < tau1 <= tau2",
                tau1,
                tau2,
            });
        }
        Ok(Rates { tau1, tau2 })
    }

    pub fn tau(&self) -> f64 {
        self.tau2 / self.tau1
    }

    /// Validity for the random covering theorem: `1/s0 <= tau1 <= tau2`.
    pub fn check_covering(&self, s0: f64) -> Result<()> {
        if self.tau1 < 1.0 / s0 - 1e-12 {
            return Err(Error::RatesOutOfRange {
                requirement: "1/s0 <= tau1 <= tau2",
                tau1: self.tau1,
                tau2: self.tau2,
            });
        }
        Ok(())
    }

    /// Validity for the shrinking-target theorem: `1 <= tau1 <= tau2`.
    pub fn check_target(&self) -> Result<()> {
        if self.tau1 < 1.0 - 1e-12 {
            return Err(Error::RatesOutOfRange {
                requirement: "1 <= tau1 <= tau2",
                tau1: self.tau1,
                tau2: self.tau2,
            });
        }
        Ok(())
    }
}

/// Which branch of the three-case covering formula produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// `tau1 = tau2`: balls, dimension `1/tau1`.
    EqualRates,
    /// Carpet on a single horizontal line.
    HorizontalLine,
    /// Carpet on a single vertical line.
    VerticalLine,
    /// Uniform fibers: explicit min formula, no spectrum machinery.
    UniformFibers,
    /// `1/tau1 <= s0 - kappa_1`.
    Case1,
    /// Interior case, via the root `beta` of `v_tau = 1/tau1`.
    Case2,
    /// `1/tau1 >= v_tau(kappa_2)`.
    Case3,
}

/// Carpet-level context shared by the covering formulas: the similarity
/// dimension and the spectrum of the vertical projection.
#[derive(Debug, Clone)]
pub struct CarpetSpectrum {
    s0: f64,
    curve: SpectrumCurve,
    degeneracy: Degeneracy,
    uniform_fibers: bool,
}

impl CarpetSpectrum {
    pub fn new(pattern: &DigitPattern) -> Self {
        CarpetSpectrum {
            s0: pattern.similarity_dimension(),
            curve: SpectrumCurve::new(pattern.row_weights()),
            degeneracy: pattern.degeneracy(),
            uniform_fibers: pattern.is_uniform_fibers(),
        }
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn curve(&self) -> &SpectrumCurve {
        &self.curve
    }

    /// `kappa_1 = dim_H pi_2 mu_0`, the entropy dimension of the projection.
    pub fn kappa1(&self) -> f64 {
        self.curve.entropy_dimension()
    }

    pub fn kappa2(&self) -> f64 {
        self.curve.kappa(2.0)
    }

    /// `v_tau(alpha) = s0 + (tau - 2) alpha - (tau - 1) D(alpha)`.
    pub fn v_tau(&self, rates: &Rates, alpha: f64) -> Result<f64> {
        let tau = rates.tau();
        let d = self.curve.spectrum_at_alpha(alpha)?;
        Ok(self.s0 + (tau - 2.0) * alpha - (tau - 1.0) * d)
    }

    /// `s_alpha`: the per-alpha candidate dimension of the variational form.
    pub fn s_alpha(&self, rates: &Rates, alpha: f64) -> Result<f64> {
        let d = self.curve.spectrum_at_alpha(alpha)?;
        let gap = rates.tau2 - rates.tau1;
        let first = (1.0 - gap * (alpha - d)) / rates.tau1;
        let second = (1.0 + gap * (self.s0 - 2.0 * alpha + d)) / rates.tau2;
        Ok(first.min(second))
    }

    /// The root `beta` of `v_tau(alpha) = 1/tau1` on the monotone branch
    /// `alpha <= kappa_{(tau-2)/(tau-1)}`, or `None` when `1/tau1` falls
    /// outside the branch's value range.
    ///
    /// The branch is parametrized by `q in [q*, Q_MAX]` with
    /// `q* = (tau-2)/(tau-1)`; `alpha = kappa_q` decreases in `q`, so
    /// `v_tau(kappa_q)` increases in `q` and plain bisection applies.
    pub fn beta_solution(&self, rates: &Rates) -> Result<Option<f64>> {
        Ok(self.beta_pair(rates)?.map(|(beta, _)| beta))
    }

    /// Same as [`beta_solution`](Self::beta_solution), but also returns
    /// `D(beta) = theta_q` from the Legendre parametrization.
    pub fn beta_pair(&self, rates: &Rates) -> Result<Option<(f64, f64)>> {
        let tau = rates.tau();
        if (tau - 1.0).abs() < 1e-15 {
            return Err(Error::TauDegenerate);
        }
        if self.curve.is_degenerate() {
            return Err(Error::DegenerateSpectrum);
        }
        let target = 1.0 / rates.tau1;
        let q_star = (tau - 2.0) / (tau - 1.0);
        let v_at = |q: f64| -> f64 {
            let (k, th) = kappa_theta(self.curve.weights(), q);
            self.s0 + (tau - 2.0) * k - (tau - 1.0) * th
        };
        let v_lo = v_at(q_star);
        let v_hi = v_at(Q_MAX);
        if target < v_lo - 1e-12 || target > v_hi + 1e-12 {
            return Ok(None);
        }
        let mut lo = q_star;
        let mut hi = Q_MAX;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if v_at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        let q = 0.5 * (lo + hi);
        let (beta, theta) = kappa_theta(self.curve.weights(), q);
        Ok(Some((beta, theta)))
    }
}

/// Result of the closed-form covering dimension with its case diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverDimension {
    pub dimension: f64,
    pub case: CaseTag,
    pub beta: Option<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
    pub s0: f64,
}

/// `v_tau(alpha) = s0 + (tau - 2) alpha - (tau - 1) D(alpha)` for a pattern.
pub fn v_tau(pattern: &DigitPattern, rates: &Rates, alpha: f64) -> Result<f64> {
    CarpetSpectrum::new(pattern).v_tau(rates, alpha)
}

/// `s_alpha` for a pattern; see [`CarpetSpectrum::s_alpha`].
pub fn s_alpha(pattern: &DigitPattern, rates: &Rates, alpha: f64) -> Result<f64> {
    CarpetSpectrum::new(pattern).s_alpha(rates, alpha)
}

/// Root of `v_tau = 1/tau1`; see [`CarpetSpectrum::beta_solution`].
pub fn beta_solution(pattern: &DigitPattern, rates: &Rates) -> Result<Option<f64>> {
    CarpetSpectrum::new(pattern).beta_solution(rates)
}

/// Almost-sure Hausdorff dimension of the limsup of shrinking rectangles
/// `X_n + (-n^{-tau1}, n^{-tau1}) x (-n^{-tau2}, n^{-tau2})` with centers
/// drawn from the natural measure, by the three-case closed form.
pub fn random_cover_dimension(pattern: &DigitPattern, rates: &Rates) -> Result<CoverDimension> {
    let ctx = CarpetSpectrum::new(pattern);
    let s0 = ctx.s0();
    rates.check_covering(s0)?;
    let kappa1 = ctx.kappa1();
    let kappa2 = ctx.kappa2();
    let inv_tau1 = 1.0 / rates.tau1;

    let mut out = CoverDimension {
        dimension: inv_tau1,
        case: CaseTag::EqualRates,
        beta: None,
        kappa1,
        kappa2,
        s0,
    };

    // Degenerate carpets bypass the spectrum machinery entirely.
    match ctx.degeneracy {
        Degeneracy::HorizontalLine => {
            out.case = CaseTag::HorizontalLine;
            return Ok(out);
        }
        Degeneracy::VerticalLine => {
            out.dimension = 1.0 / rates.tau2;
            out.case = CaseTag::VerticalLine;
            return Ok(out);
        }
        Degeneracy::None => {}
    }

    if (rates.tau2 - rates.tau1).abs() < 1e-15 {
        return Ok(out);
    }

    if ctx.uniform_fibers {
        let second = (1.0 + (rates.tau2 - rates.tau1) * (s0 - kappa1)) / rates.tau2;
        out.dimension = inv_tau1.min(second);
        out.case = CaseTag::UniformFibers;
        return Ok(out);
    }

    let v_k2 = ctx.v_tau(rates, kappa2)?;
    // Half-open comparisons with tolerance; the value is continuous across
    // the thresholds so the tag itself is the only tolerance-sensitive part.
    if inv_tau1 <= s0 - kappa1 + 1e-9 {
        out.case = CaseTag::Case1;
        Ok(out)
    } else if inv_tau1 <= v_k2 + 1e-9 {
        let (beta, d_beta) = ctx
            .beta_pair(rates)?
            .expect("1/tau1 within the branch range in Case 2");
        out.dimension = inv_tau1 - (rates.tau() - 1.0) * (beta - d_beta);
        out.case = CaseTag::Case2;
        out.beta = Some(beta);
        Ok(out)
    } else {
        let d_k2 = ctx.curve.spectrum_at_alpha(kappa2)?;
        out.dimension = (1.0 + (rates.tau2 - rates.tau1) * (s0 - 2.0 * kappa2 + d_k2)) / rates.tau2;
        out.case = CaseTag::Case3;
        Ok(out)
    }
}

/// Independent oracle for [`random_cover_dimension`]: maximizes `s_alpha`
/// over a uniform alpha grid, then refines by golden section around the best
/// grid point. The two agree because the variational and case-analysis forms
/// of the theorem are equal.
pub fn random_cover_dimension_sup(
    pattern: &DigitPattern,
    rates: &Rates,
    gridsize: usize,
) -> Result<f64> {
    assert!(gridsize >= 2);
    let ctx = CarpetSpectrum::new(pattern);
    rates.check_covering(ctx.s0())?;
    match ctx.degeneracy {
        Degeneracy::HorizontalLine => return Ok(1.0 / rates.tau1),
        Degeneracy::VerticalLine => return Ok(1.0 / rates.tau2),
        Degeneracy::None => {}
    }
    let (a_min, a_max) = (ctx.curve.alpha_min(), ctx.curve.alpha_max());
    if ctx.curve.is_degenerate() {
        return ctx.s_alpha(rates, a_min);
    }
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..gridsize {
        let a = a_min + (a_max - a_min) * i as f64 / (gridsize - 1) as f64;
        let s = ctx.s_alpha(rates, a)?;
        // Ties resolve toward smaller alpha.
        if s > best {
            best = s;
            best_i = i;
        }
    }
    // Golden-section refinement on the bracketing interval; guards against
    // the max sitting between grid points near the spectrum endpoints where
    // the slope of D diverges.
    let step = (a_max - a_min) / (gridsize - 1) as f64;
    let mut lo = (a_min + (best_i as f64 - 1.0) * step).max(a_min);
    let mut hi = (a_min + (best_i as f64 + 1.0) * step).min(a_max);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = ctx.s_alpha(rates, x1)?;
    let mut f2 = ctx.s_alpha(rates, x2)?;
    while hi - lo > 1e-10 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = ctx.s_alpha(rates, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = ctx.s_alpha(rates, x2)?;
        }
    }
    Ok(best.max(f1).max(f2))
}

/// The almost-sure local dimension of the y-projection along a point whose
/// row digit frequencies are `freq`: `alpha_nu = -sum freq_i log_b p_i`.
pub fn alpha_of_row_frequencies(pattern: &DigitPattern, freq: &WeightVector) -> Result<f64> {
    let row = pattern.row_weights();
    let logb = (pattern.base() as f64).ln();
    let mut alpha = 0.0;
    for (i, f) in freq.supported() {
        let p = row.weight(i);
        if p <= 0.0 {
            return Err(Error::UnsupportedRow(f, i));
        }
        alpha -= f * p.ln() / logb;
    }
    Ok(alpha)
}

/// Shrinking-target dimension
/// `min{ dim_mu / tau1, (dim_mu + (tau2 - tau1)(s0 - alpha_nu)) / tau2 }`.
pub fn shrinking_target_dimension(
    dim_mu: f64,
    s0: f64,
    alpha_nu: f64,
    rates: &Rates,
) -> Result<f64> {
    rates.check_target()?;
    let first = dim_mu / rates.tau1;
    let second = (dim_mu + (rates.tau2 - rates.tau1) * (s0 - alpha_nu)) / rates.tau2;
    Ok(first.min(second))
}

/// General approximation rates along the two axes, recorded as exponents:
/// `a_n = log psi(n) / (-n log b)` and `c_n = log theta(n) / (-n log b)`.
#[derive(Debug, Clone)]
pub struct RateSequences {
    a: Vec<f64>,
    c: Vec<f64>,
}

impl RateSequences {
    pub fn new(a: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != c.len() {
            return Err(Error::EmptyHorizon);
        }
        for &x in a.iter().chain(c.iter()) {
            if x.is_nan() || x < 1.0 {
                return Err(Error::RatesOutOfRange {
                    requirement: "all rate exponents >= 1",
                    tau1: x,
                    tau2: x,
                });
            }
        }
        Ok(RateSequences { a, c })
    }

    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

/// Finite-horizon dimension for general per-generation rates: the max over
/// the horizon of the two-branch min, with the partition of indices driven
/// by which axis shrinks slower.
///
/// Index `n` falls in the first family when `a_n <= c_n` (the x-axis
/// rectangle side is the wider one), where the `alpha_nu` branch applies;
/// otherwise the roles of the axes, and of `alpha_nu`/`beta_nu`, swap.
/// `swap_partition` inverts the convention. Returns the value and the
/// achieving index so stabilization can be checked.
pub fn general_rate_dimension(
    seqs: &RateSequences,
    s0: f64,
    alpha_nu: f64,
    beta_nu: f64,
    swap_partition: bool,
) -> Result<(f64, usize)> {
    if seqs.horizon() == 0 {
        return Err(Error::EmptyHorizon);
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_n = 0;
    for n in 0..seqs.horizon() {
        let (a, c) = (seqs.a[n], seqs.c[n]);
        let first_family = if swap_partition { a > c } else { a <= c };
        let val = if first_family {
            (s0 / a).min((s0 + (c - a) * (s0 - alpha_nu)) / c)
        } else {
            (s0 / c).min((s0 + (a - c) * (s0 - beta_nu)) / a)
        };
        if val > best {
            best = val;
            best_n = n;
        }
    }
    Ok((best, best_n))
}

/// Dimension of the limsup under digit-frequency constraints: the Bernoulli
/// measure with cell weights `p` has `dim mu = -sum p_k log_b p_k`, then the
/// shrinking-target formula applies.
pub fn digit_frequency_dimension(
    pattern: &DigitPattern,
    cell_weights: &[((u8, u8), f64)],
    rates: &Rates,
    alpha_nu: f64,
) -> Result<f64> {
    let logb = (pattern.base() as f64).ln();
    let mut sum = 0.0;
    let mut dim_mu = 0.0;
    for &((i, j), p) in cell_weights {
        if !pattern.contains((i, j)) {
            return Err(Error::WeightOffPattern(i as usize, j as usize));
        }
        if p < 0.0 {
            return Err(Error::InvalidWeights(f64::NAN));
        }
        sum += p;
        if p > 0.0 {
            dim_mu -= p * p.ln() / logb;
        }
    }
    if (sum - 1.0).abs() > crate::carpet::WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(sum - 1.0));
    }
    shrinking_target_dimension(dim_mu, pattern.similarity_dimension(), alpha_nu, rates)
}
