//! Multifractal formalism for a self-similar measure on `[0,1]` with `b`
//! equal contraction ratios `1/b` and weights `(p_0 .. p_{b-1})`.
//!
//! The Legendre pair is `kappa_q` (typical local dimension under the Gibbs
//! tilt `p_{i,q}`) and `theta_q` (its dimension); the spectrum `D(alpha)` is
//! recovered by inverting the strictly decreasing map `q -> kappa_q`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::carpet::WeightVector;
use crate::{Error, Result};

/// Half-width of the default q-grid. Weights here are rationals with small
/// denominators, so `kappa_q` is within 1e-10 of its limit at `|q| = 40`.
pub const Q_MAX: f64 = 40.0;

/// Bisection tolerance on `kappa` when solving `kappa_q = alpha`.
const KAPPA_TOL: f64 = 1e-12;
const MAX_BISECT: usize = 200;

/// `T(q) = -log_b sum_{i in supp} p_i^q`, the Lq scaling exponent.
///
/// With all ratios equal to `1/b` this solves `sum_i b^{T(q)} p_i^q = 1`.
pub fn lq_exponent(w: &WeightVector, q: f64) -> f64 {
    let logb = (w.len() as f64).ln();
    -log_sum_exp(w.supported().map(|(_, p)| q * p.ln())) / logb
}

/// Gibbs reweighting `p_{i,q} = p_i^q / sum_j p_j^q`, restricted to the
/// support. Computed in log-space so large `|q|` stays finite.
pub fn tilted_weights(w: &WeightVector, q: f64) -> WeightVector {
    let logs: Vec<(usize, f64)> = w.supported().map(|(i, p)| (i, q * p.ln())).collect();
    let lse = log_sum_exp(logs.iter().map(|&(_, l)| l));
    let mut out = vec![0.0; w.len()];
    for &(i, l) in &logs {
        out[i] = (l - lse).exp();
    }
    // Renormalize away the last ulps so the result is again a valid vector.
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    WeightVector::from_weights(out).expect("tilted weights sum to 1 by construction")
}

/// The Legendre pair at `q`:
/// `kappa_q = -sum p_{i,q} log_b p_i` and `theta_q = -sum p_{i,q} log_b p_{i,q}`.
pub fn kappa_theta(w: &WeightVector, q: f64) -> (f64, f64) {
    let logb = (w.len() as f64).ln();
    let logs: Vec<f64> = w.supported().map(|(_, p)| q * p.ln()).collect();
    let lse = log_sum_exp(logs.iter().copied());
    let mut kappa = 0.0;
    let mut theta = 0.0;
    for ((_, p), l) in w.supported().zip(logs.iter()) {
        let tilted = (l - lse).exp();
        if tilted > 0.0 {
            kappa -= tilted * p.ln() / logb;
            theta -= tilted * (l - lse) / logb;
        }
    }
    (kappa, theta)
}

/// One grid record of the Legendre parametrization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumPoint {
    pub q: f64,
    pub t: f64,
    pub kappa: f64,
    pub theta: f64,
}

/// The `q`-parametrized Legendre curve of a projected measure, plus
/// spectrum-interval metadata and the `D(alpha)` query.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    weights: WeightVector,
    points: Vec<SpectrumPoint>,
    alpha_min: f64,
    alpha_max: f64,
}

impl SpectrumCurve {
    /// Builds the curve on the default 81-point grid over `[-Q_MAX, Q_MAX]`.
    pub fn new(weights: WeightVector) -> Self {
        Self::with_grid(weights, 81)
    }

    pub fn with_grid(weights: WeightVector, grid_points: usize) -> Self {
        let n = grid_points.max(2);
        let qgrid: Vec<f64> = (0..n)
            .map(|i| -Q_MAX + 2.0 * Q_MAX * i as f64 / (n - 1) as f64)
            .collect();
        let logb = (weights.len() as f64).ln();
        let points = qgrid
            .iter()
            .map(|&q| {
                let (kappa, theta) = kappa_theta(&weights, q);
                SpectrumPoint {
                    q,
                    t: lq_exponent(&weights, q),
                    kappa,
                    theta,
                }
            })
            .collect();
        let alpha_min = -weights.max_weight().ln() / logb;
        let alpha_max = -weights.min_positive_weight().ln() / logb;
        SpectrumCurve {
            weights,
            points,
            alpha_min,
            alpha_max,
        }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    /// True iff the measure is Ahlfors-regular (all positive weights equal),
    /// collapsing the spectrum to a single point.
    pub fn is_degenerate(&self) -> bool {
        self.alpha_max - self.alpha_min < 1e-14
    }

    /// Entropy dimension `kappa_1 = dim_H` of the measure.
    pub fn entropy_dimension(&self) -> f64 {
        self.weights.entropy(self.weights.len() as u32)
    }

    /// `kappa_q` for an arbitrary `q` (not restricted to the grid).
    pub fn kappa(&self, q: f64) -> f64 {
        kappa_theta(&self.weights, q).0
    }

    /// `D(alpha)`: dimension of the level set of local dimension `alpha`.
    ///
    /// Solves `kappa_q = alpha` by bisection on `q` over `[-Q_MAX, Q_MAX]`
    /// (`kappa` is strictly decreasing) and returns `theta_q`. Past the grid
    /// ends the value is interpolated to the exact endpoint value
    /// `log_b(multiplicity of the extremal weight)`.
    pub fn spectrum_at_alpha(&self, alpha: f64) -> Result<f64> {
        if alpha < self.alpha_min - 1e-9 || alpha > self.alpha_max + 1e-9 {
            return Err(Error::AlphaOutOfRange {
                alpha,
                min: self.alpha_min,
                max: self.alpha_max,
            });
        }
        let logb = (self.weights.len() as f64).ln();
        if self.weights.support_size() == 1 {
            // Dirac mass: the spectrum is the single point (0, 0).
            return Ok(0.0);
        }
        if self.is_degenerate() {
            // Ahlfors-regular: single point (alpha*, alpha*).
            return Ok(self.alpha_min);
        }
        let (k_hi_q, th_hi_q) = kappa_theta(&self.weights, Q_MAX);
        if alpha <= k_hi_q {
            // Between kappa(Q_MAX) and alpha_min: pin to the endpoint value
            // log_b(multiplicity of the max weight), interpolating linearly.
            let mult = self.extreme_multiplicity(true);
            let d_end = (mult as f64).ln() / logb;
            return Ok(interp(alpha, self.alpha_min, d_end, k_hi_q, th_hi_q));
        }
        let (k_lo_q, th_lo_q) = kappa_theta(&self.weights, -Q_MAX);
        if alpha >= k_lo_q {
            let mult = self.extreme_multiplicity(false);
            let d_end = (mult as f64).ln() / logb;
            return Ok(interp(alpha, self.alpha_max, d_end, k_lo_q, th_lo_q));
        }
        let (_, theta) = self.solve_q(alpha);
        Ok(theta)
    }

    /// Bisection for `q` with `kappa_q = alpha`; returns `(q, theta_q)`.
    /// Caller must ensure `alpha` lies strictly inside `[kappa(Q_MAX), kappa(-Q_MAX)]`.
    fn solve_q(&self, alpha: f64) -> (f64, f64) {
        let mut lo = -Q_MAX; // kappa(lo) >= alpha
        let mut hi = Q_MAX; // kappa(hi) <= alpha
        let mut mid = 0.0;
        for _ in 0..MAX_BISECT {
            mid = 0.5 * (lo + hi);
            let (k, _) = kappa_theta(&self.weights, mid);
            if (k - alpha).abs() <= KAPPA_TOL {
                break;
            }
            if k > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (_, theta) = kappa_theta(&self.weights, mid);
        (mid, theta)
    }

    /// Number of support weights equal to the max (true) or min (false).
    fn extreme_multiplicity(&self, max: bool) -> usize {
        let target = if max {
            self.weights.max_weight()
        } else {
            self.weights.min_positive_weight()
        };
        self.weights
            .supported()
            .filter(|&(_, w)| (w - target).abs() < 1e-14)
            .count()
    }
}

fn interp(alpha: f64, a_end: f64, d_end: f64, a_in: f64, d_in: f64) -> f64 {
    if (a_in - a_end).abs() < 1e-300 {
        return d_end;
    }
    let t = (alpha - a_end) / (a_in - a_end);
    d_end + t * (d_in - d_end)
}

/// Natural-log count of generation-`n` b-adic intervals `I` whose measure
/// satisfies `b^{-n(alpha+eps)} <= mu(I) <= b^{-n(alpha-eps)}`.
///
/// Exact combinatorial enumeration over digit-type compositions of the
/// support; multinomial coefficients evaluated via `ln_gamma`. Empty
/// selection yields `-inf`.
pub fn packing_count(w: &WeightVector, n: u64, alpha: f64, eps: f64) -> f64 {
    assert!(n >= 1, "need at least one digit");
    assert!(eps > 0.0, "need a positive window");
    let logb = (w.len() as f64).ln();
    let log_ps: Vec<f64> = w.supported().map(|(_, p)| p.ln()).collect();
    let mut terms: Vec<f64> = Vec::new();
    let mut counts = vec![0u64; log_ps.len()];
    enumerate_compositions(n, 0, &mut counts, &mut |counts| {
        // Type exponent of the interval: -sum k_i log_b p_i / n.
        let log_measure: f64 = counts
            .iter()
            .zip(log_ps.iter())
            .map(|(&k, &lp)| k as f64 * lp)
            .sum();
        let a = -log_measure / (n as f64 * logb);
        if a >= alpha - eps - 1e-12 && a <= alpha + eps + 1e-12 {
            let ln_multinomial = ln_gamma(n as f64 + 1.0)
                - counts
                    .iter()
                    .map(|&k| ln_gamma(k as f64 + 1.0))
                    .sum::<f64>();
            terms.push(ln_multinomial);
        }
    });
    log_sum_exp(terms.into_iter())
}

fn enumerate_compositions(
    remaining: u64,
    idx: usize,
    counts: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]),
) {
    if idx + 1 == counts.len() {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[idx] = k;
        enumerate_compositions(remaining - k, idx + 1, counts, visit);
    }
}

/// `log(sum exp(x_i))`, stable; empty input gives `-inf`.
pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn w23() -> WeightVector {
        WeightVector::from_counts(&[2, 1]).unwrap()
    }

    #[test]
    fn lq_exponent_basics() {
        let uni = WeightVector::from_counts(&[1, 1, 1]).unwrap();
        for q in [-3.0, 0.0, 1.0, 2.5, 7.0] {
            assert_relative_eq!(lq_exponent(&uni, q), q - 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(lq_exponent(&w23(), 1.0), 0.0, epsilon = 1e-12);
        // w = (3/4, 0, 1/4), b = 3, q = 2: -log_3(9/16 + 1/16).
        let w = WeightVector::from_counts(&[3, 0, 1]).unwrap();
        let expected = -(10.0f64 / 16.0).ln() / 3.0f64.ln();
        assert_relative_eq!(lq_exponent(&w, 2.0), expected, epsilon = 1e-12);
    }

    #[test]
    fn tilted_weight_cases() {
        let w = w23();
        let t1 = tilted_weights(&w, 1.0);
        assert_relative_eq!(t1.weight(0), 2.0 / 3.0, epsilon = 1e-12);
        let t0 = tilted_weights(&w, 0.0);
        assert_relative_eq!(t0.weight(0), 0.5, epsilon = 1e-12);
        // Large q concentrates on the max-weight index.
        let t40 = tilted_weights(&w, 40.0);
        assert!(t40.weight(0) > 1.0 - 1e-10);
        // Zero-weight entries stay at zero.
        let w = WeightVector::from_counts(&[3, 0, 1]).unwrap();
        assert_eq!(tilted_weights(&w, 5.0).weight(1), 0.0);
    }

    #[test]
    fn kappa_theta_cases() {
        let w = w23();
        let (k1, t1) = kappa_theta(&w, 1.0);
        let entropy = w.entropy(2);
        assert_relative_eq!(k1, entropy, epsilon = 1e-12);
        assert_relative_eq!(t1, entropy, epsilon = 1e-12);

        // q = 2 on (2/3, 1/3): tilt is (4/5, 1/5).
        let (k2, t2) = kappa_theta(&w, 2.0);
        let l2 = 2.0f64.ln();
        let expect_k = -(0.8 * (2.0f64 / 3.0).ln() + 0.2 * (1.0f64 / 3.0).ln()) / l2;
        let expect_t = -(0.8 * 0.8f64.ln() + 0.2 * 0.2f64.ln()) / l2;
        assert_relative_eq!(k2, expect_k, epsilon = 1e-12);
        assert_relative_eq!(t2, expect_t, epsilon = 1e-12);

        // Uniform on support: kappa = theta = log_b(support size) for all q.
        let w = WeightVector::from_counts(&[1, 0, 1]).unwrap();
        for q in [-10.0, 0.0, 3.0] {
            let (k, t) = kappa_theta(&w, q);
            assert_relative_eq!(k, 2.0f64.ln() / 3.0f64.ln(), epsilon = 1e-12);
            assert_relative_eq!(t, 2.0f64.ln() / 3.0f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_at_alpha_cases() {
        let curve = SpectrumCurve::new(w23());
        let k1 = curve.entropy_dimension();
        assert_relative_eq!(curve.spectrum_at_alpha(k1).unwrap(), k1, epsilon = 1e-9);

        let (k2, t2) = kappa_theta(curve.weights(), 2.0);
        assert_relative_eq!(curve.spectrum_at_alpha(k2).unwrap(), t2, epsilon = 1e-9);

        // Endpoints: log_b(multiplicity) = 0 for simple extremes.
        assert_relative_eq!(
            curve.spectrum_at_alpha(curve.alpha_min()).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert!(curve.spectrum_at_alpha(curve.alpha_max() + 1.0).is_err());

        // Ahlfors-regular: sole spectrum point (alpha*, alpha*).
        let uni = SpectrumCurve::new(WeightVector::from_counts(&[1, 1, 0]).unwrap());
        let astar = uni.alpha_min();
        assert_relative_eq!(uni.spectrum_at_alpha(astar).unwrap(), astar, epsilon = 1e-12);

        // Dirac: single point (0, 0).
        let dirac = SpectrumCurve::new(WeightVector::from_counts(&[5, 0]).unwrap());
        assert_relative_eq!(dirac.spectrum_at_alpha(0.0).unwrap(), 0.0);
    }

    #[test]
    fn packing_count_cases() {
        // Uniform: every interval qualifies, count = m^n.
        let uni = WeightVector::from_counts(&[1, 1, 1]).unwrap();
        let alpha = 1.0; // log_3(3)
        let c = packing_count(&uni, 10, alpha, 0.1);
        assert_relative_eq!(c, 10.0 * 3.0f64.ln(), epsilon = 1e-9);

        // Window covering the whole spectrum: count = m^n.
        let w = w23();
        let curve = SpectrumCurve::new(w.clone());
        let wide = curve.alpha_max() - curve.alpha_min() + 0.5;
        let mid = 0.5 * (curve.alpha_min() + curve.alpha_max());
        assert_relative_eq!(
            packing_count(&w, 20, mid, wide),
            20.0 * 2.0f64.ln(),
            epsilon = 1e-9
        );

        // Thmlargedev slack at n = 60, eps = 0.05 around the entropy dim.
        let n = 60;
        let k1 = curve.entropy_dimension();
        let d = curve.spectrum_at_alpha(k1).unwrap();
        let normalized = packing_count(&w, n, k1, 0.05) / (n as f64 * 2.0f64.ln());
        assert!(normalized >= d - 0.08 && normalized <= d + 0.01,
            "normalized count {normalized} vs D {d}");
    }

    #[test]
    fn packing_count_empty_window() {
        let w = w23();
        // alpha far below alpha_min with a tiny window selects nothing.
        assert_eq!(packing_count(&w, 5, 0.01, 1e-6), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn legendre_identity(counts in proptest::collection::vec(0u64..9, 2..5), q in -40.0f64..40.0) {
            prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 1);
            let w = WeightVector::from_counts(&counts).unwrap();
            let t = lq_exponent(&w, q);
            let (k, th) = kappa_theta(&w, q);
            prop_assert!((th - (q * k - t)).abs() < 1e-10);
        }

        #[test]
        fn kappa_monotone_and_bounded(counts in proptest::collection::vec(0u64..9, 2..5), q in -39.0f64..39.0) {
            prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 2);
            let w = WeightVector::from_counts(&counts).unwrap();
            let curve = SpectrumCurve::new(w.clone());
            let (k_a, _) = kappa_theta(&w, q);
            let (k_b, _) = kappa_theta(&w, q + 1.0);
            if curve.is_degenerate() {
                prop_assert!((k_a - k_b).abs() < 1e-12);
            } else if q.abs() <= 10.0 {
                // Strict decrease where the tilt is numerically resolvable.
                prop_assert!(k_b < k_a);
            } else {
                // Saturated tails: allow roundoff-level reversals.
                prop_assert!(k_b <= k_a + 1e-12);
            }
            prop_assert!(k_a >= curve.alpha_min() - 1e-12);
            prop_assert!(k_a <= curve.alpha_max() + 1e-12);
        }

        #[test]
        fn spectrum_below_diagonal(counts in proptest::collection::vec(1u64..9, 2..4), i in 1usize..999) {
            let w = WeightVector::from_counts(&counts).unwrap();
            let curve = SpectrumCurve::new(w);
            let a = curve.alpha_min()
                + (curve.alpha_max() - curve.alpha_min()) * i as f64 / 1000.0;
            let d = curve.spectrum_at_alpha(a).unwrap();
            prop_assert!(d <= a + 1e-9);
        }
    }

    #[test]
    fn spectrum_concavity_and_max() {
        let curve = SpectrumCurve::new(w23());
        let n = 1000;
        let mut vals = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let a = curve.alpha_min()
                + (curve.alpha_max() - curve.alpha_min()) * i as f64 / n as f64;
            vals.push(curve.spectrum_at_alpha(a).unwrap());
        }
        for win in vals.windows(3) {
            let second_diff = win[2] - 2.0 * win[1] + win[0];
            assert!(second_diff <= 1e-8, "second difference {second_diff}");
        }
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let expect = (curve.weights().support_size() as f64).ln()
            / (curve.weights().len() as f64).ln();
        assert!((max - expect).abs() < 1e-6);
    }
}
