//! Exact complex-multiplication accounting for the post-Gram detection
//! pipeline, plus the closed-form prediction for the Gauss-Seidel path.
//!
//! Counting conventions, applied uniformly by every instrumented kernel:
//! a division by a precomputed reciprocal counts as one multiplication and
//! computing the reciprocal itself counts as one; a real-by-complex scaling
//! counts as one; squared magnitudes, the final sigma^2 scaling inside the
//! NPI variance, and the LLR arithmetic after (mu, nu^2) are not tallied.
//! The Gram matrix and the matched filter are outside the tally entirely:
//! every detector needs them, so the comparison starts after them.

use serde::Serialize;

/// Tally of complex multiplications attributed to one detection pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    /// One-time setup: diagonal reciprocals, initial solution, factorizations.
    pub init: u64,
    /// Iterative estimate work (GS sweeps, Neumann series terms, solves).
    pub sweeps: u64,
    /// Channel-gain and NPI-variance computation.
    pub llr_stats: u64,
}

impl OpCount {
    pub fn complex_mults(&self) -> u64 {
        self.init + self.sweeps + self.llr_stats
    }
}

impl std::ops::AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.init += rhs.init;
        self.sweeps += rhs.sweeps;
        self.llr_stats += rhs.llr_stats;
    }
}

/// Closed-form complex-multiplication count for the Gauss-Seidel pipeline
/// with diagonal-approximate init and approximated LLR statistics:
/// (i + 1) K^2 + 4K.
pub fn predict_gs(k: usize, i: usize) -> u64 {
    predict_gs_breakdown(k, i).complex_mults()
}

/// The same prediction split into the three parts of the accounting:
/// init 2K, sweeps iK^2, LLR statistics K^2 + 2K.
pub fn predict_gs_breakdown(k: usize, i: usize) -> OpCount {
    assert!(k >= 1 && i >= 1, "predict_gs requires K >= 1 and i >= 1");
    let (k, i) = (k as u64, i as u64);
    OpCount { init: 2 * k, sweeps: i * k * k, llr_stats: k * k + 2 * k }
}
