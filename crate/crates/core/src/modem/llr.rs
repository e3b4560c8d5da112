//! Max-log LLR soft demapping from a post-detection symbol estimate and its
//! SINR statistics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modem::constellation::Constellation;

/// Clamp magnitude applied to every LLR; keeps near-noiseless frames finite
/// while staying far above any decision-relevant value.
pub const LLR_CLAMP: f64 = 64.0;

/// Per-bit max-log LLRs for one user's symbol estimate.
///
/// With z = s_hat / mu and gamma = mu^2 / nu2, each bit gets
/// L_b = gamma * (min over bit-1 symbols |z - q|^2 - min over bit-0 symbols
/// |z - q|^2), so L > 0 favors bit 0: an estimate sitting on an all-zeros
/// symbol makes every L_b positive. Values are clamped to +-LLR_CLAMP.
pub fn maxlog_llr(
    s_hat: Complex64,
    mu: f64,
    nu2: f64,
    c: &Constellation,
) -> Result<Vec<f64>> {
    if !(nu2 > 0.0) {
        return Err(Error::InvalidInput(format!("NPI variance must be positive, got {nu2}")));
    }
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("channel gain must be nonzero, got {mu}")));
    }
    let z = s_hat / mu;
    let gamma = mu * mu / nu2;
    let bps = c.bits_per_symbol();

    // distances to all points once, then per-bit partition minima
    let d2: Vec<f64> = c.points().iter().map(|q| (z - q).norm_sqr()).collect();
    let mut out = Vec::with_capacity(bps);
    for b in 0..bps {
        let mut min0 = f64::INFINITY;
        let mut min1 = f64::INFINITY;
        for (i, &d) in d2.iter().enumerate() {
            if c.label_bit(c.label_of(i), b) == 0 {
                min0 = min0.min(d);
            } else {
                min1 = min1.min(d);
            }
        }
        out.push((gamma * (min1 - min0)).clamp(-LLR_CLAMP, LLR_CLAMP));
    }
    Ok(out)
}

/// Per-user LLR streams accumulated over the symbols of one frame.
#[derive(Debug, Clone)]
pub struct LlrFrame {
    users: usize,
    clamp_magnitude: f64,
    streams: Vec<Vec<f64>>,
}

impl LlrFrame {
    pub fn new(users: usize) -> Self {
        Self { users, clamp_magnitude: LLR_CLAMP, streams: vec![Vec::new(); users] }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn clamp_magnitude(&self) -> f64 {
        self.clamp_magnitude
    }

    pub fn push_symbol(&mut self, user: usize, llrs: &[f64]) {
        debug_assert!(llrs.iter().all(|l| l.is_finite() && l.abs() <= self.clamp_magnitude));
        self.streams[user].extend_from_slice(llrs);
    }

    pub fn user_stream(&self, user: usize) -> &[f64] {
        &self.streams[user]
    }
}
