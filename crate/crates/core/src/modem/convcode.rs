//! Rate-1/2 convolutional coding with the industry-standard [133, 171]
//! octal generators and soft-input Viterbi decoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Code parameters. The rate is fixed at 1/2; frames are terminated with
/// `constraint_length - 1` zero tail bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecSpec {
    /// Generator polynomials as octal-style words, first output listed first.
    #[serde(default = "default_polys")]
    pub polynomials: (u32, u32),
    #[serde(default = "default_constraint")]
    pub constraint_length: usize,
    /// Zero-tail termination flag.
    #[serde(default = "default_true")]
    pub terminated: bool,
}

fn default_polys() -> (u32, u32) {
    (0o133, 0o171)
}

fn default_constraint() -> usize {
    7
}

fn default_true() -> bool {
    true
}

impl Default for CodecSpec {
    fn default() -> Self {
        Self { polynomials: default_polys(), constraint_length: default_constraint(), terminated: true }
    }
}

impl CodecSpec {
    pub fn validate(&self) -> Result<()> {
        if self.constraint_length != 7 {
            return Err(Error::InvalidInput(format!(
                "constraint length is fixed at 7, got {}",
                self.constraint_length
            )));
        }
        let mask = (1u32 << self.constraint_length) - 1;
        if self.polynomials.0 == 0 || self.polynomials.1 == 0 {
            return Err(Error::InvalidInput("generator polynomials must be nonzero".into()));
        }
        if self.polynomials.0 & !mask != 0 || self.polynomials.1 & !mask != 0 {
            return Err(Error::InvalidInput("generator polynomials exceed the constraint length".into()));
        }
        Ok(())
    }

    pub fn tail_bits(&self) -> usize {
        self.constraint_length - 1
    }

    /// Coded length for a given number of information bits.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.tail_bits())
    }

    fn n_states(&self) -> usize {
        1 << (self.constraint_length - 1)
    }
}

#[inline]
fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Encodes an information bit sequence, appending the zero tail. Output is
/// interleaved per input bit: first the [133] stream bit, then [171].
pub fn conv_encode(info_bits: &[u8], spec: &CodecSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    if info_bits.is_empty() {
        return Err(Error::InvalidInput("empty information sequence".into()));
    }
    let kc = spec.constraint_length;
    let mut out = Vec::with_capacity(spec.coded_len(info_bits.len()));
    let mut state = 0u32; // previous kc-1 inputs, newest at the top bit
    let tail = std::iter::repeat(&0u8).take(spec.tail_bits());
    for &b in info_bits.iter().chain(tail) {
        debug_assert!(b <= 1, "bits must be 0/1");
        let val = ((b as u32) << (kc - 1)) | state;
        out.push(parity(val & spec.polynomials.0));
        out.push(parity(val & spec.polynomials.1));
        state = val >> 1;
    }
    Ok(out)
}

/// Soft-input Viterbi decoding over the full trellis.
///
/// LLRs follow the convention L > 0 favors bit 0; the branch metric adds
/// +L/2 for a hypothesized coded 0 and -L/2 for a coded 1, and the
/// maximum-metric path through the 2^(K-1)-state trellis is selected.
/// Metric ties keep the lower-indexed predecessor state. The zero tail is
/// stripped from the returned bits.
pub fn viterbi_soft_decode(llrs: &[f64], spec: &CodecSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    let tail = spec.tail_bits();
    if llrs.len() % 2 != 0 || llrs.len() / 2 <= tail {
        return Err(Error::InvalidInput(format!(
            "LLR count {} does not match 2 x (info + {tail})",
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let n_states = spec.n_states();
    let kc = spec.constraint_length;

    // Precompute per-(state, input) transitions.
    let mut next_state = vec![0usize; n_states * 2];
    let mut out_bits = vec![(0u8, 0u8); n_states * 2];
    for s in 0..n_states {
        for u in 0..2usize {
            let val = ((u as u32) << (kc - 1)) | s as u32;
            next_state[s * 2 + u] = (val >> 1) as usize;
            out_bits[s * 2 + u] = (parity(val & spec.polynomials.0), parity(val & spec.polynomials.1));
        }
    }

    let mut metric = vec![f64::NEG_INFINITY; n_states];
    metric[0] = 0.0;
    let mut next_metric = vec![f64::NEG_INFINITY; n_states];
    // back-pointer: predecessor state in the low bits, input bit on top
    let mut bp = vec![0u8; steps * n_states];

    for t in 0..steps {
        let l0 = llrs[2 * t];
        let l1 = llrs[2 * t + 1];
        next_metric.fill(f64::NEG_INFINITY);
        for s in 0..n_states {
            let pm = metric[s];
            if pm == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..2usize {
                let (c0, c1) = out_bits[s * 2 + u];
                let bm = (if c0 == 0 { l0 } else { -l0 }) / 2.0
                    + (if c1 == 0 { l1 } else { -l1 }) / 2.0;
                let ns = next_state[s * 2 + u];
                let cand = pm + bm;
                // strict > with ascending s keeps the lower predecessor on ties
                if cand > next_metric[ns] {
                    next_metric[ns] = cand;
                    bp[t * n_states + ns] = (s as u8) | ((u as u8) << 7);
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    // Zero-tail termination pins the final state to 0.
    let mut state = 0usize;
    let mut bits_rev = Vec::with_capacity(steps);
    for t in (0..steps).rev() {
        let entry = bp[t * n_states + state];
        bits_rev.push(entry >> 7);
        state = (entry & 0x7f) as usize;
    }
    bits_rev.reverse();
    bits_rev.truncate(steps - tail);
    Ok(bits_rev)
}
