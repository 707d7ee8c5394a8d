//! Hausdorff contents of stripes and b-adic rectangles intersected with the
//! carpet, in the b-adic-restricted gauge (covers by b-adic cubes only).
//!
//! In that gauge the content of a full carpet copy at generation `g` is
//! exactly `b^{-g s}` for `0 < s <= s0`, so every estimate below is exact
//! with no comparison constants. The closed-form stripe content is the
//! min-over-truncation-depth expression; the covering oracle realizes the
//! cover infimum by dynamic programming and sandwiches the formula between
//! `formula/(n+1)` and `formula`.

use serde::{Deserialize, Serialize};

use crate::carpet::DigitPattern;
use crate::{Error, Result};

/// A finite base-`b` digit string coding one coordinate of a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSequence {
    base: u32,
    digits: Vec<u8>,
}

impl DigitSequence {
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self> {
        if base < 2 {
            return Err(Error::BaseTooSmall(base));
        }
        for &d in &digits {
            if d as u32 >= base {
                return Err(Error::InvalidDigit(d, base));
            }
        }
        Ok(DigitSequence { base, digits })
    }

    /// Parses a string of single digits, e.g. `"0121"` in base 3.
    pub fn parse(base: u32, text: &str) -> Result<Self> {
        let digits = text
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8).ok_or(Error::InvalidDigit(0, base)))
            .collect::<Result<Vec<u8>>>()?;
        DigitSequence::new(base, digits)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The suffix from position `from` on, as a new sequence.
    pub fn suffix(&self, from: usize) -> DigitSequence {
        DigitSequence {
            base: self.base,
            digits: self.digits[from.min(self.digits.len())..].to_vec(),
        }
    }
}

/// Stripe or rectangle regions accepted by the covering oracle.
#[derive(Debug, Clone)]
pub enum Region<'a> {
    /// `[0,1] x I` for the b-adic interval `I` coded by the digits.
    Stripe(&'a DigitSequence),
    /// `I_n x I_m` with `n = xdigits.len() <= m = ydigits.len()`; the
    /// rectangle is anchored at a carpet point, so each `(x_k, y_k)` must be
    /// a pattern cell.
    Rectangle {
        xdigits: &'a DigitSequence,
        ydigits: &'a DigitSequence,
    },
}

/// Closed-form stripe content, returned as `(log_b value, argmin k)`.
///
/// The content of `Str(I) ∩ K` for `I` of generation `n` is
/// `min_{0<=k<=n} b^{-k(s-s0)} prod_{i<k} p_{y_i}`; the minimizing `k` is
/// the truncation depth at which covering by generation-`k` cubes is
/// cheapest.
pub fn stripe_content_log(
    pattern: &DigitPattern,
    s: f64,
    ydigits: &DigitSequence,
) -> Result<(f64, usize)> {
    let s0 = pattern.similarity_dimension();
    check_s(s, s0)?;
    check_base(pattern, ydigits)?;
    let row = pattern.row_weights();
    let logb = (pattern.base() as f64).ln();
    let mut log_measure = 0.0; // log_b of the measure of the depth-k interval
    let mut best = 0.0;
    let mut best_k = 0usize;
    for (k, &d) in ydigits.digits().iter().enumerate() {
        let p = row.weight(d as usize);
        if p <= 0.0 {
            return Err(Error::RowNotInCarpet(d));
        }
        log_measure += p.ln() / logb;
        let value = -((k + 1) as f64) * (s - s0) + log_measure;
        if value < best {
            best = value;
            best_k = k + 1;
        }
    }
    Ok((best, best_k))
}

/// Linear-scale wrapper around [`stripe_content_log`].
pub fn stripe_content(pattern: &DigitPattern, s: f64, ydigits: &DigitSequence) -> Result<f64> {
    let (log_val, _) = stripe_content_log(pattern, s, ydigits)?;
    Ok((pattern.base() as f64).powf(log_val))
}

/// Content of the b-adic rectangle `I_n x I_m` anchored at a carpet point,
/// as `log_b`: `-n s` plus the stripe content of the y-digit suffix past
/// depth `n`, by the zoom identity for the generation-`n` cube.
pub fn rectangle_content_log(
    pattern: &DigitPattern,
    s: f64,
    xdigits: &DigitSequence,
    ydigits: &DigitSequence,
) -> Result<f64> {
    let s0 = pattern.similarity_dimension();
    check_s(s, s0)?;
    check_base(pattern, xdigits)?;
    check_base(pattern, ydigits)?;
    let n = xdigits.len();
    if ydigits.len() < n {
        return Err(Error::LengthMismatch {
            xlen: n,
            ylen: ydigits.len(),
        });
    }
    for (&i, &j) in xdigits.digits().iter().zip(ydigits.digits()) {
        if !pattern.contains((i, j)) {
            return Err(Error::PointOffCarpet(i, j));
        }
    }
    let (stripe_log, _) = stripe_content_log(pattern, s, &ydigits.suffix(n))?;
    Ok(-(n as f64) * s + stripe_log)
}

/// Linear-scale wrapper around [`rectangle_content_log`].
pub fn rectangle_content(
    pattern: &DigitPattern,
    s: f64,
    xdigits: &DigitSequence,
    ydigits: &DigitSequence,
) -> Result<f64> {
    Ok((pattern.base() as f64).powf(rectangle_content_log(pattern, s, xdigits, ydigits)?))
}

/// Almost-sure exponent of the content of the shrinking rectangle
/// `x + (-r^tau1, r^tau1) x (-r^tau2, r^tau2)` in `r`:
/// `max{ s tau1, s tau2 - (tau2 - tau1)(s0 - alpha_nu) }`.
pub fn typical_content_exponent(
    pattern: &DigitPattern,
    s: f64,
    rates: &crate::dim_formulas::Rates,
    alpha_nu: f64,
) -> f64 {
    let s0 = pattern.similarity_dimension();
    (s * rates.tau1).max(s * rates.tau2 - (rates.tau2 - rates.tau1) * (s0 - alpha_nu))
}

/// Exact minimum of `sum |cube|^s` over all covers of `region ∩ K` by
/// b-adic cubes of generation at most `max_gen`.
///
/// Regions are digit-suffix-homogeneous, so per generation all subtrees
/// intersecting the region share one subproblem and the tree collapses to a
/// linear chain: `cost(g) = min(b^{-g s}, (#children in the constrained
/// row) * cost(g+1))`.
pub fn exact_content_oracle(
    pattern: &DigitPattern,
    s: f64,
    region: &Region,
    max_gen: usize,
) -> Result<f64> {
    let s0 = pattern.similarity_dimension();
    check_s(s, s0)?;
    let (xdigits, ydigits) = region_digits(pattern, region)?;
    if ydigits.len() > max_gen {
        return Err(Error::BudgetExceeded {
            requested: ydigits.len(),
            max_gen,
        });
    }
    let b = pattern.base() as f64;
    let row_counts = pattern.row_counts();
    // cost of a full carpet copy at generation g (suffix consumed): the
    // single cube, since s <= s0 makes every further split non-decreasing.
    let full_cost = |g: usize| b.powf(-(g as f64) * s);
    // Backward over the constrained chain.
    let n = ydigits.len();
    let mut cost = full_cost(n);
    for g in (0..n).rev() {
        let children = if g < xdigits.len() {
            // Rectangle prefix: one child cell (x_g, y_g), already validated.
            1.0
        } else {
            row_counts[ydigits.digits()[g] as usize] as f64
        };
        cost = full_cost(g).min(children * cost);
    }
    Ok(cost)
}

/// Slow cross-check of [`exact_content_oracle`]: explicit recursion over
/// every b-adic cube intersecting the region, no subtree collapsing.
/// Exponential in the region generation; intended for generations <= ~10.
pub fn exact_content_oracle_enumerated(
    pattern: &DigitPattern,
    s: f64,
    region: &Region,
    max_gen: usize,
) -> Result<f64> {
    let s0 = pattern.similarity_dimension();
    check_s(s, s0)?;
    let (xdigits, ydigits) = region_digits(pattern, region)?;
    if ydigits.len() > max_gen {
        return Err(Error::BudgetExceeded {
            requested: ydigits.len(),
            max_gen,
        });
    }
    let b = pattern.base() as f64;
    let cells: Vec<(u8, u8)> = pattern.cells().collect();

    fn descend(
        cells: &[(u8, u8)],
        xdigits: &[u8],
        ydigits: &[u8],
        b: f64,
        s: f64,
        g: usize,
    ) -> f64 {
        let own = b.powf(-(g as f64) * s);
        if g >= ydigits.len() {
            return own;
        }
        let sum: f64 = cells
            .iter()
            .filter(|&&(i, j)| {
                j == ydigits[g] && (g >= xdigits.len() || i == xdigits[g])
            })
            .map(|_| descend(cells, xdigits, ydigits, b, s, g + 1))
            .sum();
        own.min(sum)
    }

    Ok(descend(
        &cells,
        xdigits.digits(),
        ydigits.digits(),
        b,
        s,
        0,
    ))
}

fn region_digits<'a>(
    pattern: &DigitPattern,
    region: &'a Region,
) -> Result<(DigitSequence, &'a DigitSequence)> {
    match region {
        Region::Stripe(y) => {
            check_base(pattern, y)?;
            Ok((DigitSequence::new(pattern.base(), vec![])?, y))
        }
        Region::Rectangle { xdigits, ydigits } => {
            check_base(pattern, xdigits)?;
            check_base(pattern, ydigits)?;
            if ydigits.len() < xdigits.len() {
                return Err(Error::LengthMismatch {
                    xlen: xdigits.len(),
                    ylen: ydigits.len(),
                });
            }
            for (&i, &j) in xdigits.digits().iter().zip(ydigits.digits()) {
                if !pattern.contains((i, j)) {
                    return Err(Error::PointOffCarpet(i, j));
                }
            }
            Ok(((*xdigits).clone(), ydigits))
        }
    }
}

fn check_s(s: f64, s0: f64) -> Result<()> {
    if s <= 0.0 || s > s0 + 1e-12 {
        return Err(Error::SOutOfRange(s, s0));
    }
    Ok(())
}

fn check_base(pattern: &DigitPattern, seq: &DigitSequence) -> Result<()> {
    if seq.base() != pattern.base() {
        return Err(Error::BaseTooSmall(seq.base()));
    }
    for &d in seq.digits() {
        if d as u32 >= pattern.base() {
            return Err(Error::InvalidDigit(d, pattern.base()));
        }
    }
    Ok(())
}
