//! Energy-normalized square QAM constellations with per-axis reflected
//! Gray labeling.
//!
//! Labels are read MSB-first: the first half of a symbol's bits selects the
//! in-phase amplitude, the second half the quadrature amplitude. Bit 0 of
//! every axis label maps to the positive outermost amplitude, so the QPSK
//! label 00 is (1 + i) / sqrt(2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Modulation order selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn order(&self) -> usize {
        match self {
            Modulation::Qpsk => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
        }
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::square(self.order())
    }
}

/// A Gray-labeled, unit-mean-energy constellation.
#[derive(Debug, Clone)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<u8>,
    point_of_label: Vec<usize>,
}

fn gray(idx: usize) -> usize {
    idx ^ (idx >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut idx = g;
    while g > 0 {
        g >>= 1;
        idx ^= g;
    }
    idx
}

impl Constellation {
    pub fn qpsk() -> Self {
        Self::square(4)
    }

    pub fn qam16() -> Self {
        Self::square(16)
    }

    pub fn qam64() -> Self {
        Self::square(64)
    }

    /// Builds the square constellation of the given order (4, 16 or 64).
    pub fn square(order: usize) -> Self {
        assert!(
            matches!(order, 4 | 16 | 64),
            "supported constellation orders are 4, 16, 64"
        );
        let bits_per_symbol = order.trailing_zeros() as usize;
        let bits_axis = bits_per_symbol / 2;
        let levels = 1usize << bits_axis;
        // mean energy of levels {±1, ±3, ..., ±(L-1)} on both axes
        let scale = (2.0 * ((levels * levels - 1) as f64) / 3.0).sqrt();
        let amp = |idx: usize| (levels as f64 - 1.0 - 2.0 * idx as f64) / scale;

        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for i_idx in 0..levels {
            for q_idx in 0..levels {
                points.push(Complex64::new(amp(i_idx), amp(q_idx)));
                labels.push(((gray(i_idx) << bits_axis) | gray(q_idx)) as u8);
            }
        }
        let mut point_of_label = vec![0usize; order];
        for (p, &l) in labels.iter().enumerate() {
            point_of_label[l as usize] = p;
        }
        Self { order, bits_per_symbol, points, labels, point_of_label }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    #[inline]
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn label_of(&self, point_idx: usize) -> u8 {
        self.labels[point_idx]
    }

    /// Value of bit `b` (MSB-first) in a label.
    #[inline]
    pub fn label_bit(&self, label: u8, b: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    /// Maps a coded bit sequence (values 0/1, MSB-first per symbol) to
    /// constellation symbols.
    pub fn map_symbols(&self, coded_bits: &[u8]) -> Result<Vec<Complex64>> {
        if coded_bits.is_empty() || coded_bits.len() % self.bits_per_symbol != 0 {
            return Err(Error::InvalidInput(format!(
                "bit count {} is not a positive multiple of {}",
                coded_bits.len(),
                self.bits_per_symbol
            )));
        }
        Ok(coded_bits
            .chunks(self.bits_per_symbol)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[self.point_of_label[label]]
            })
            .collect())
    }

    /// Nearest-point hard decision, returning label bits MSB-first.
    pub fn hard_demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for s in symbols {
            let idx = self.nearest_point(*s);
            let label = self.labels[idx];
            for b in 0..self.bits_per_symbol {
                bits.push(self.label_bit(label, b));
            }
        }
        bits
    }

    pub fn nearest_point(&self, z: Complex64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = (z - q).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Partitions the constellation by the value of bit `b`: returns the
    /// symbols whose bit b is 0 and those whose bit b is 1.
    pub fn bit_partition_sets(&self, b: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        if b >= self.bits_per_symbol {
            return Err(Error::InvalidInput(format!(
                "bit index {b} out of range for {} bits/symbol",
                self.bits_per_symbol
            )));
        }
        let mut zero = Vec::with_capacity(self.order / 2);
        let mut one = Vec::with_capacity(self.order / 2);
        for (i, &p) in self.points.iter().enumerate() {
            if self.label_bit(self.labels[i], b) == 0 {
                zero.push(p);
            } else {
                one.push(p);
            }
        }
        Ok((zero, one))
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }
}
