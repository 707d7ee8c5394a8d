//! Monte Carlo estimation of the critical exponent of the rectangle content
//! series, the empirical counterpart of the closed-form covering dimension.
//!
//! For each sample index `n` the process places a shrinking rectangle of
//! half-widths `(n^-tau1, n^-tau2)` at a point drawn from the natural
//! measure (i.i.d. mode) or along a digit-shift orbit, replaces it by the
//! enclosing b-adic rectangle `I_m x I_{floor(m tau)}`, and evaluates its
//! content at exponent `s`. The dimension is the `s` at which the content
//! series switches between divergence and convergence, detected as the zero
//! of the fitted slope of dyadic block log-sums.
//!
//! Box counting is deliberately not used here: the limsup set is dense in
//! the carpet, so box counts see `dim K` rather than the Hausdorff
//! dimension of the limsup set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::carpet::DigitPattern;
use crate::content::DigitSequence;
use crate::dim_formulas::Rates;
use crate::{Error, Result};

/// Chunk size of the fixed-shape pairwise sum; per-chunk sums are serial and
/// chunks are combined in index order, so results do not depend on the
/// number of worker threads.
const SUM_CHUNK: usize = 1 << 12;

/// Number of top dyadic blocks entering the least-squares slope fit.
const FIT_BLOCKS: usize = 8;
/// Leading dyadic blocks discarded as burn-in.
const BURN_IN_BLOCKS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Iid,
    Orbit,
}

/// Deterministic sample stream: i.i.d. points of the natural measure, or the
/// digit-shift orbit of one such point.
///
/// I.i.d. samples use counter-based RNG streams keyed by `(seed, n)`, so the
/// `n`-th sample is reproducible regardless of generation order.
pub struct SampleSource {
    mode: SampleMode,
    seed: u64,
    cells: Vec<(u8, u8)>,
    orbit_stream: Vec<(u8, u8)>,
    orbit_rng: Option<ChaCha8Rng>,
}

impl SampleSource {
    pub fn new(pattern: &DigitPattern, mode: SampleMode, seed: u64) -> Self {
        SampleSource {
            mode,
            seed,
            cells: pattern.cells().collect(),
            orbit_stream: Vec::new(),
            orbit_rng: None,
        }
    }

    /// Orbit source with a user-supplied base-point digit stream; the stream
    /// is extended randomly if a sample needs more digits than provided.
    pub fn with_orbit_stream(pattern: &DigitPattern, seed: u64, stream: Vec<(u8, u8)>) -> Self {
        SampleSource {
            mode: SampleMode::Orbit,
            seed,
            cells: pattern.cells().collect(),
            orbit_stream: stream,
            orbit_rng: None,
        }
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream_rng(&self, n: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(n);
        rng
    }

    fn extend_orbit(&mut self, len: usize) {
        if self.orbit_stream.len() >= len {
            return;
        }
        if self.orbit_rng.is_none() {
            let mut rng = self.stream_rng(0);
            // Skip any user-supplied prefix so extension is append-only.
            for _ in 0..self.orbit_stream.len() {
                rng.gen_range(0..self.cells.len());
            }
            self.orbit_rng = Some(rng);
        }
        let rng = self.orbit_rng.as_mut().expect("initialized above");
        while self.orbit_stream.len() < len {
            let cell = self.cells[rng.gen_range(0..self.cells.len())];
            self.orbit_stream.push(cell);
        }
    }

    /// Cell digits of the `n`-th sample point to the given depth.
    fn sample_cells(&mut self, n: u64, depth: usize) -> Vec<(u8, u8)> {
        match self.mode {
            SampleMode::Iid => {
                let mut rng = self.stream_rng(n.wrapping_add(1));
                (0..depth)
                    .map(|_| self.cells[rng.gen_range(0..self.cells.len())])
                    .collect()
            }
            SampleMode::Orbit => {
                self.extend_orbit(n as usize + depth);
                self.orbit_stream[n as usize..n as usize + depth].to_vec()
            }
        }
    }
}

/// Digit strings (x, y) of the `n`-th sample point, to the given depth.
pub fn sample_point(
    pattern: &DigitPattern,
    source: &mut SampleSource,
    n: u64,
    depth: usize,
) -> (DigitSequence, DigitSequence) {
    let cells = source.sample_cells(n, depth);
    let xs: Vec<u8> = cells.iter().map(|&(i, _)| i).collect();
    let ys: Vec<u8> = cells.iter().map(|&(_, j)| j).collect();
    (
        DigitSequence::new(pattern.base(), xs).expect("sampled digits are in range"),
        DigitSequence::new(pattern.base(), ys).expect("sampled digits are in range"),
    )
}

/// B-adic generation of the `n`-th rectangle along x: `ceil(tau1 log_b n)`.
fn x_generation(n: u64, rates: &Rates, base: u32) -> usize {
    let logb = (base as f64).ln();
    ((rates.tau1 * (n as f64).ln() / logb).ceil() as usize).max(1)
}

/// Content of the b-adic rectangle enclosing the `n`-th sample rectangle.
///
/// The off-grid rectangle is covered by at most 3 b-adic rectangles of the
/// same shape, so replacing it by the enclosing one shifts contents by a
/// bounded factor that cannot move log-slopes.
pub fn rectangle_content_at(
    pattern: &DigitPattern,
    s: f64,
    rates: &Rates,
    source: &mut SampleSource,
    n: u64,
) -> Result<f64> {
    assert!(n >= 2);
    let m = x_generation(n, rates, pattern.base());
    let ylen = (m as f64 * rates.tau()).floor() as usize;
    let depth = ylen.max(m);
    let (x, y) = sample_point(pattern, source, n, depth);
    let x = DigitSequence::new(pattern.base(), x.digits()[..m].to_vec())?;
    let y = DigitSequence::new(pattern.base(), y.digits()[..ylen].to_vec())?;
    crate::content::rectangle_content(pattern, s, &x, &y)
}

/// Per-sample data sufficient to evaluate the content at any `s`: the x
/// generation `m` and the y digits between depth `m` and `floor(m tau)`.
struct SampleProfiles {
    ms: Vec<u32>,
    offsets: Vec<usize>,
    suffix_digits: Vec<u8>,
    first_n: u64,
}

impl SampleProfiles {
    fn build(pattern: &DigitPattern, rates: &Rates, source: &mut SampleSource, max_n: u64) -> Self {
        let first_n = 2;
        let count = (max_n + 1 - first_n) as usize;
        let mut ms = Vec::with_capacity(count);
        let mut offsets = Vec::with_capacity(count + 1);
        let mut suffix_digits = Vec::new();
        offsets.push(0);
        for n in first_n..=max_n {
            let m = x_generation(n, rates, pattern.base());
            let ylen = (m as f64 * rates.tau()).floor() as usize;
            let cells = source.sample_cells(n, ylen.max(m));
            ms.push(m as u32);
            for &(_, j) in &cells[m.min(ylen)..ylen] {
                suffix_digits.push(j);
            }
            offsets.push(suffix_digits.len());
        }
        SampleProfiles {
            ms,
            offsets,
            suffix_digits,
            first_n,
        }
    }

    fn len(&self) -> usize {
        self.ms.len()
    }

    /// `log_b` content of sample `idx` at exponent `s`.
    fn content_log(&self, idx: usize, s: f64, s0: f64, log_row: &[f64]) -> f64 {
        let m = self.ms[idx] as f64;
        let digits = &self.suffix_digits[self.offsets[idx]..self.offsets[idx + 1]];
        let mut running = 0.0;
        let mut best = 0.0;
        for (k, &d) in digits.iter().enumerate() {
            running += log_row[d as usize];
            let v = -((k + 1) as f64) * (s - s0) + running;
            if v < best {
                best = v;
            }
        }
        -m * s + best
    }
}

/// Dyadic block log-sums of the content series at one exponent `s`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSums {
    pub s: f64,
    /// `(k, log2 sum_{2^k <= n < 2^{k+1}} content_n)` per dyadic block.
    pub blocks: Vec<(u32, f64)>,
    /// Least-squares slope of `log2(block sum)` against `k` over the top
    /// [`FIT_BLOCKS`] blocks past the burn-in.
    pub slope: f64,
}

/// Result of the critical-exponent search.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalExponent {
    pub s_star: f64,
    /// Bisection trace `(s, slope)`, in evaluation order.
    pub trace: Vec<(f64, f64)>,
    /// Block sums at the returned `s_star`.
    pub blocks: BlockSums,
}

fn block_sums(
    profiles: &SampleProfiles,
    s: f64,
    s0: f64,
    log_row: &[f64],
    base: f64,
) -> BlockSums {
    // Per block, fixed-shape pairwise reduction: chunks relative to the
    // block start are summed serially (possibly on different workers) and
    // combined in index order, so the result is independent of thread count.
    // Only complete dyadic blocks enter the fit: a partial tail block has a
    // deflated sum and would bias the slope.
    let last_n = profiles.first_n + profiles.len() as u64 - 1;
    let max_k = (last_n + 1).ilog2() - 1;
    let blocks: Vec<(u32, f64)> = (1..=max_k)
        .map(|k| {
            let n_start = (1u64 << k).max(profiles.first_n);
            let n_end = 1u64 << (k + 1);
            let i_start = (n_start - profiles.first_n) as usize;
            let i_end = (n_end - profiles.first_n) as usize;
            let chunk_sums: Vec<f64> = (i_start..i_end)
                .collect::<Vec<usize>>()
                .par_chunks(SUM_CHUNK)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|&idx| base.powf(profiles.content_log(idx, s, s0, log_row)))
                        .sum()
                })
                .collect();
            (k, chunk_sums.iter().sum::<f64>())
        })
        .filter(|&(_, v)| v > 0.0)
        .map(|(k, v)| (k, v.log2()))
        .collect();
    let slope = fit_slope(&blocks);
    BlockSums { s, blocks, slope }
}

fn fit_slope(blocks: &[(u32, f64)]) -> f64 {
    let usable: Vec<&(u32, f64)> = blocks
        .iter()
        .filter(|&&(k, _)| k as usize >= BURN_IN_BLOCKS)
        .collect();
    let fit = if usable.len() > FIT_BLOCKS {
        &usable[usable.len() - FIT_BLOCKS..]
    } else {
        &usable[..]
    };
    let n = fit.len() as f64;
    let mean_x = fit.iter().map(|&&(k, _)| k as f64).sum::<f64>() / n;
    let mean_y = fit.iter().map(|&&(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &&(k, y) in fit {
        num += (k as f64 - mean_x) * (y - mean_y);
        den += (k as f64 - mean_x) * (k as f64 - mean_x);
    }
    num / den
}

/// Estimates the critical exponent `s*` at which the content series
/// transitions from divergence (positive block slope) to convergence,
/// by bisection on `s` over `s_bracket`. `s*` estimates the Hausdorff
/// dimension of the limsup set.
pub fn estimate_critical_exponent(
    pattern: &DigitPattern,
    rates: &Rates,
    source: &mut SampleSource,
    max_n: u64,
    s_bracket: (f64, f64),
) -> Result<CriticalExponent> {
    assert!(max_n >= 1 << 10, "need at least 2^10 samples");
    let s0 = pattern.similarity_dimension();
    let (mut lo, mut hi) = s_bracket;
    if !(lo > 0.0 && hi <= s0 + 1e-9 && lo < hi) {
        return Err(Error::SOutOfRange(lo, s0));
    }
    let base = pattern.base() as f64;
    let logb = base.ln();
    let row = pattern.row_weights();
    let log_row: Vec<f64> = row
        .weights()
        .iter()
        .map(|&p| if p > 0.0 { p.ln() / logb } else { f64::NEG_INFINITY })
        .collect();
    let profiles = SampleProfiles::build(pattern, rates, source, max_n);

    let mut trace = Vec::new();
    let slope_lo = block_sums(&profiles, lo, s0, &log_row, base).slope;
    let slope_hi = block_sums(&profiles, hi, s0, &log_row, base).slope;
    trace.push((lo, slope_lo));
    trace.push((hi, slope_hi));
    // Slope decreases in s: divergence at small s, convergence at large s.
    if slope_lo <= 0.0 || slope_hi >= 0.0 {
        return Err(Error::BracketNotStraddling(lo, hi));
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let b = block_sums(&profiles, mid, s0, &log_row, base);
        trace.push((mid, b.slope));
        if b.slope > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let s_star = 0.5 * (lo + hi);
    let blocks = block_sums(&profiles, s_star, s0, &log_row, base);
    Ok(CriticalExponent {
        s_star,
        trace,
        blocks,
    })
}
