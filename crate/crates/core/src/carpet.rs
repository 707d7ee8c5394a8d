//! Base-`b` missing-digit patterns and their basic geometric quantities.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the sum of a real-valued weight vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A base-`b` pattern of allowed subdivision cells `(i, j)`, `0 <= i, j < b`.
///
/// The first coordinate is the column (x digit), the second the row (y digit).
/// Cells are kept as a sorted set, so the canonical textual form is the
/// lexicographic one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitPattern {
    base: u32,
    cells: BTreeSet<(u8, u8)>,
}

/// Whether the carpet collapses onto a single horizontal or vertical line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    None,
    HorizontalLine,
    VerticalLine,
}

impl DigitPattern {
    /// Validates and builds a pattern. Duplicate cells are merged silently.
    pub fn new<I>(base: u32, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        if base < 2 {
            return Err(Error::BaseTooSmall(base));
        }
        let mut set = BTreeSet::new();
        for (i, j) in cells {
            if i < 0 || j < 0 || i >= base as i64 || j >= base as i64 {
                return Err(Error::OutOfRangeCell(i, j, base));
            }
            set.insert((i as u8, j as u8));
        }
        if set.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(DigitPattern { base, cells: set })
    }

    /// Full `b x b` square (nothing missing).
    pub fn full_square(base: u32) -> Self {
        let cells = (0..base as i64).flat_map(|i| (0..base as i64).map(move |j| (i, j)));
        DigitPattern::new(base, cells).expect("full square is always valid")
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn cells(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.cells.iter().copied()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, cell: (u8, u8)) -> bool {
        self.cells.contains(&cell)
    }

    /// Similarity dimension `s0 = log_b |A|`; equals `dim_H K` under the OSC.
    pub fn similarity_dimension(&self) -> f64 {
        (self.cells.len() as f64).ln() / (self.base as f64).ln()
    }

    /// Number of cells in row `j` (y digit `j`), for `0 <= j < b`.
    pub fn row_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.base as usize];
        for &(_, j) in &self.cells {
            counts[j as usize] += 1;
        }
        counts
    }

    /// Number of cells in column `i`, for `0 <= i < b`.
    pub fn column_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.base as usize];
        for &(i, _) in &self.cells {
            counts[i as usize] += 1;
        }
        counts
    }

    /// Weight vector of the projection of the natural measure on the y-axis:
    /// weight of row `i` is `#(cells in row i) / |A|`.
    pub fn row_weights(&self) -> WeightVector {
        WeightVector::from_counts(&self.row_counts())
            .expect("a nonempty pattern has nonempty row support")
    }

    /// Column analogue of [`row_weights`](Self::row_weights).
    pub fn column_weights(&self) -> WeightVector {
        WeightVector::from_counts(&self.column_counts())
            .expect("a nonempty pattern has nonempty column support")
    }

    /// True iff every occupied row carries the same number of cells, which
    /// is exactly when the projected measure is Ahlfors-regular. Covers the
    /// product case `A = A1 x A2`.
    pub fn is_uniform_fibers(&self) -> bool {
        let mut occupied = self.row_counts().into_iter().filter(|&c| c > 0);
        let first = occupied.next().expect("pattern is nonempty");
        occupied.all(|c| c == first)
    }

    pub fn degeneracy(&self) -> Degeneracy {
        let rows: BTreeSet<u8> = self.cells.iter().map(|&(_, j)| j).collect();
        let cols: BTreeSet<u8> = self.cells.iter().map(|&(i, _)| i).collect();
        // A single cell is both; report the horizontal collapse first.
        if rows.len() == 1 {
            Degeneracy::HorizontalLine
        } else if cols.len() == 1 {
            Degeneracy::VerticalLine
        } else {
            Degeneracy::None
        }
    }
}

/// A probability vector over `b` symbols, possibly with zero entries.
///
/// Built from integer counts whenever possible so the sum invariant holds
/// exactly; real-valued constructors check the sum to [`WEIGHT_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    support: Vec<usize>,
}

impl WeightVector {
    /// Exact construction from integer counts; weight `i` is `c_i / sum`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptySupport);
        }
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let support = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect();
        Ok(WeightVector { weights, support })
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidWeights(f64::NAN));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(sum - 1.0));
        }
        let support: Vec<usize> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(WeightVector { weights, support })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Iterator over `(index, weight)` pairs restricted to the support.
    pub fn supported(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().map(move |&i| (i, self.weights[i]))
    }

    pub fn max_weight(&self) -> f64 {
        self.supported().map(|(_, w)| w).fold(0.0, f64::max)
    }

    pub fn min_positive_weight(&self) -> f64 {
        self.supported().map(|(_, w)| w).fold(f64::INFINITY, f64::min)
    }

    /// Shannon entropy in base `b`: `-sum p_i log_b p_i` over the support.
    pub fn entropy(&self, base: u32) -> f64 {
        let logb = (base as f64).ln();
        -self.supported().map(|(_, w)| w * w.ln()).sum::<f64>() / logb
    }
}
