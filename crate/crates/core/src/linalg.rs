//! Dense complex linear algebra shared by all detectors: Gram computation,
//! regularization, D/L/Lᴴ splitting, Cholesky factorization and solves,
//! triangular substitution, diagonal inversion.
//!
//! Everything here is a pure function of its inputs; matrices are plain
//! row-major buffers. No pivoting and no refinement: the MMSE filtering
//! matrix these kernels see is Hermitian positive definite by construction
//! and well conditioned for the system sizes of interest.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative bound on the imaginary residue tolerated on a Hermitian diagonal.
const DIAG_IMAG_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn hermitian_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.cols {
                    acc += self.get(r, k) * other.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length must match cols");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (h, x) in self.row(r).iter().zip(v) {
                acc += h * x;
            }
            out[r] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Additive split W = D + L + Lᴴ of a Hermitian positive definite matrix.
///
/// The diagonal is kept as real values (the Hermitian diagonal is
/// analytically real; any round-off residue is rejected), `lower` is the
/// strictly lower triangle with zeros elsewhere.
#[derive(Debug, Clone)]
pub struct MatrixSplit {
    pub diag: Vec<f64>,
    pub lower: ComplexMatrix,
}

impl MatrixSplit {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Entry of the original W at (m, k), reconstructed from the split.
    #[inline]
    pub fn w_entry(&self, m: usize, k: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match m.cmp(&k) {
            Equal => Complex64::new(self.diag[m], 0.0),
            Greater => self.lower.get(m, k),
            Less => self.lower.get(k, m).conj(),
        }
    }

    /// Recombines diag + lower + lowerᴴ into a full matrix.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.dim();
        ComplexMatrix::from_fn(k, k, |m, n| self.w_entry(m, n))
    }
}

/// Gram matrix G = HᴴH.
///
/// The result is exactly Hermitian: entries are computed for m <= k only and
/// mirrored by conjugation, and the diagonal is accumulated as real values.
pub fn gram(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = (h.rows(), h.cols());
    if n < k {
        return Err(Error::InvalidInput(format!(
            "gram requires N >= K, got {n} x {k}"
        )));
    }
    let mut g = ComplexMatrix::zeros(k, k);
    for m in 0..k {
        let mut d = 0.0;
        for r in 0..n {
            d += h.get(r, m).norm_sqr();
        }
        g.set(m, m, Complex64::new(d, 0.0));
        for c in (m + 1)..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..n {
                acc += h.get(r, m).conj() * h.get(r, c);
            }
            g.set(m, c, acc);
            g.set(c, m, acc.conj());
        }
    }
    Ok(g)
}

/// MMSE filtering matrix W = G + sigma2 * I.
pub fn regularize(g: &ComplexMatrix, sigma2: f64) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::InvalidInput("regularize requires a square matrix".into()));
    }
    if sigma2 < 0.0 || !sigma2.is_finite() {
        return Err(Error::InvalidInput(format!("sigma2 must be >= 0, got {sigma2}")));
    }
    let mut w = g.clone();
    for i in 0..g.rows() {
        let d = g.get(i, i);
        w.set(i, i, Complex64::new(d.re + sigma2, d.im));
    }
    Ok(w)
}

/// Splits a Hermitian positive definite W into real diagonal and strictly
/// lower triangle. The diagonal must be (numerically) real and positive.
pub fn split_dlu(w: &ComplexMatrix) -> Result<MatrixSplit> {
    if !w.is_square() {
        return Err(Error::InvalidInput("split_dlu requires a square matrix".into()));
    }
    let k = w.rows();
    let mut diag = Vec::with_capacity(k);
    for m in 0..k {
        let d = w.get(m, m);
        if d.im.abs() > DIAG_IMAG_TOL * d.re.abs().max(1.0) {
            return Err(Error::Numerical {
                what: format!("diagonal entry {m} has imaginary residue {}", d.im),
                seed: None,
            });
        }
        if !(d.re > 0.0) {
            return Err(Error::NotPositiveDefinite(m));
        }
        diag.push(d.re);
    }
    let mut lower = ComplexMatrix::zeros(k, k);
    for m in 1..k {
        for c in 0..m {
            lower.set(m, c, w.get(m, c));
        }
    }
    Ok(MatrixSplit { diag, lower })
}

/// Lower Cholesky factor L with W = L Lᴴ (no pivoting).
pub fn cholesky_factor(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    cholesky_factor_counted(w, &mut 0)
}

/// Cholesky factor with a complex-multiplication tally (divisions by a
/// precomputed reciprocal count as one multiplication; square roots are not
/// multiplications and are not tallied).
pub(crate) fn cholesky_factor_counted(w: &ComplexMatrix, ops: &mut u64) -> Result<ComplexMatrix> {
    if !w.is_square() {
        return Err(Error::InvalidInput("cholesky requires a square matrix".into()));
    }
    let n = w.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = w.get(j, j).re;
        for p in 0..j {
            d -= l.get(j, p).norm_sqr();
            *ops += 1;
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite(j));
        }
        let ljj = d.sqrt();
        l.set(j, j, Complex64::new(ljj, 0.0));
        let inv = 1.0 / ljj;
        *ops += 1; // reciprocal of the pivot
        for i in (j + 1)..n {
            let mut acc = w.get(i, j);
            for p in 0..j {
                acc -= l.get(i, p) * l.get(j, p).conj();
                *ops += 1;
            }
            l.set(i, j, acc * inv);
            *ops += 1;
        }
    }
    Ok(l)
}

/// Solves W x = b for Hermitian positive definite W via L Lᴴ.
pub fn cholesky_solve(w: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let l = cholesky_factor(w)?;
    Ok(cholesky_solve_factored(&l, b, &mut 0))
}

/// Two triangular solves against a precomputed lower factor.
pub(crate) fn cholesky_solve_factored(
    l: &ComplexMatrix,
    b: &[Complex64],
    ops: &mut u64,
) -> Vec<Complex64> {
    let n = l.rows();
    assert_eq!(b.len(), n, "rhs length must match factor dimension");
    // L y = b
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = b[i];
        for p in 0..i {
            acc -= l.get(i, p) * y[p];
            *ops += 1;
        }
        y[i] = acc / l.get(i, i).re;
        *ops += 1;
    }
    // Lᴴ x = y
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for p in (i + 1)..n {
            acc -= l.get(p, i).conj() * x[p];
            *ops += 1;
        }
        x[i] = acc / l.get(i, i).re;
        *ops += 1;
    }
    x
}

/// Explicit inverse of a Hermitian positive definite matrix, column by
/// column through the Cholesky factor.
pub fn cholesky_inverse(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    cholesky_inverse_counted(w, &mut 0)
}

pub(crate) fn cholesky_inverse_counted(w: &ComplexMatrix, ops: &mut u64) -> Result<ComplexMatrix> {
    let n = w.rows();
    let l = cholesky_factor_counted(w, ops)?;
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = Complex64::new(1.0, 0.0);
        let x = cholesky_solve_factored(&l, &e, ops);
        e[c] = Complex64::new(0.0, 0.0);
        for r in 0..n {
            inv.set(r, c, x[r]);
        }
    }
    Ok(inv)
}

/// Solves (D + L) x = b by forward substitution.
pub fn forward_substitute(split: &MatrixSplit, b: &[Complex64]) -> Result<Vec<Complex64>> {
    forward_substitute_counted(split, b, &mut 0)
}

pub(crate) fn forward_substitute_counted(
    split: &MatrixSplit,
    b: &[Complex64],
    ops: &mut u64,
) -> Result<Vec<Complex64>> {
    let k = split.dim();
    if b.len() != k {
        return Err(Error::InvalidInput(format!(
            "rhs length {} does not match split dimension {k}",
            b.len()
        )));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for m in 0..k {
        if split.diag[m] == 0.0 {
            return Err(Error::SingularDiagonal(m));
        }
        let mut acc = b[m];
        for c in 0..m {
            acc -= split.lower.get(m, c) * x[c];
            *ops += 1;
        }
        x[m] = acc / split.diag[m];
        *ops += 1;
    }
    Ok(x)
}

/// Entry-wise reciprocal of a real diagonal.
pub fn diag_inverse(diag: &[f64]) -> Result<Vec<f64>> {
    diag_inverse_counted(diag, &mut 0)
}

pub(crate) fn diag_inverse_counted(diag: &[f64], ops: &mut u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(diag.len());
    for (i, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::SingularDiagonal(i));
        }
        out.push(1.0 / d);
        *ops += 1;
    }
    Ok(out)
}

/// Relative two-norm distance between vectors, ||a - b|| / ||b||.
pub fn rel_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        })
    }

    fn random_hpd(rng: &mut ChaCha8Rng, k: usize) -> ComplexMatrix {
        let h = random_matrix(rng, 2 * k, k);
        regularize(&gram(&h).unwrap(), 0.1).unwrap()
    }

    /// Naive triple-loop HᴴH, independent of `gram`'s mirrored evaluation.
    fn naive_gram(h: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(h.cols(), h.cols(), |m, k| {
            (0..h.rows()).map(|r| h.get(r, m).conj() * h.get(r, k)).sum()
        })
    }

    /// Gaussian elimination with partial pivoting; the independent solve oracle.
    fn gauss_solve(a: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
        let n = a.rows();
        let mut m = a.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                m.get(i, col).norm().partial_cmp(&m.get(j, col).norm()).unwrap()
            }).unwrap();
            if piv != col {
                for c2 in 0..n {
                    let t = m.get(col, c2);
                    m.set(col, c2, m.get(piv, c2));
                    m.set(piv, c2, t);
                }
                rhs.swap(col, piv);
            }
            let p = m.get(col, col);
            for r in (col + 1)..n {
                let f = m.get(r, col) / p;
                for c2 in col..n {
                    let v = m.get(r, c2) - f * m.get(col, c2);
                    m.set(r, c2, v);
                }
                let nb = rhs[r] - f * rhs[col];
                rhs[r] = nb;
            }
        }
        let mut x = vec![c(0.0, 0.0); n];
        for r in (0..n).rev() {
            let mut acc = rhs[r];
            for c2 in (r + 1)..n {
                acc -= m.get(r, c2) * x[c2];
            }
            x[r] = acc / m.get(r, r);
        }
        x
    }

    #[test]
    fn gram_identity() {
        let g = gram(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(g, ComplexMatrix::identity(2));
    }

    #[test]
    fn gram_hand_computed_2x2() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(1.0, 0.0)],
        ]);
        let g = gram(&h).unwrap();
        let expect = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 2.0)],
            vec![c(0.0, -2.0), c(2.0, 0.0)],
        ]);
        for m in 0..2 {
            for k in 0..2 {
                assert!((g.get(m, k) - expect.get(m, k)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn gram_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 8, 2);
        let g = gram(&h).unwrap();
        let o = naive_gram(&h);
        for m in 0..2 {
            for k in 0..2 {
                let denom = o.get(m, k).norm().max(1.0);
                assert!((g.get(m, k) - o.get(m, k)).norm() / denom < 1e-12);
            }
        }
    }

    #[test]
    fn gram_is_exactly_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_matrix(&mut rng, 24, 7);
        let g = gram(&h).unwrap();
        for m in 0..7 {
            assert_eq!(g.get(m, m).im, 0.0);
            for k in 0..7 {
                assert_eq!(g.get(m, k), g.get(k, m).conj());
            }
        }
    }

    #[test]
    fn gram_rejects_wide_matrix() {
        let h = ComplexMatrix::zeros(2, 3);
        assert!(matches!(gram(&h), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn regularize_zero_gram() {
        let g = ComplexMatrix::zeros(2, 2);
        let w = regularize(&g, 1.0).unwrap();
        assert_eq!(w, ComplexMatrix::identity(2));
    }

    #[test]
    fn regularize_diagonal_case() {
        let w = regularize(&ComplexMatrix::identity(2), 0.5).unwrap();
        for i in 0..2 {
            assert_eq!(w.get(i, i), c(1.5, 0.0));
        }
    }

    #[test]
    fn regularize_rejects_negative_sigma2() {
        let g = ComplexMatrix::identity(2);
        assert!(matches!(regularize(&g, -0.1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn regularized_gram_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_matrix(&mut rng, 12, 4);
        let w = regularize(&gram(&h).unwrap(), 0.1).unwrap();
        assert!(cholesky_factor(&w).is_ok());
    }

    #[test]
    fn split_hand_example() {
        let w = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0)],
        ]);
        let s = split_dlu(&w).unwrap();
        assert_eq!(s.diag, vec![2.0, 3.0]);
        assert_eq!(s.lower.get(1, 0), c(1.0, 0.0));
        assert_eq!(s.lower.get(0, 1), c(0.0, 0.0));
        assert_eq!(s.lower.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn split_of_diagonal_matrix_has_zero_lower() {
        let w = regularize(&ComplexMatrix::zeros(3, 3), 2.0).unwrap();
        let s = split_dlu(&w).unwrap();
        assert_eq!(s.lower.frobenius_norm(), 0.0);
    }

    #[test]
    fn split_reconstruction_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_hpd(&mut rng, 16);
        let s = split_dlu(&w).unwrap();
        assert_eq!(s.reconstruct(), w);
    }

    #[test]
    fn split_rejects_non_square() {
        assert!(split_dlu(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn cholesky_identity_solve() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let x = cholesky_solve(&ComplexMatrix::identity(2), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn cholesky_diagonal_solve() {
        let w = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(4.0, 0.0)],
        ]);
        let x = cholesky_solve(&w, &[c(2.0, 0.0), c(8.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cholesky_matches_elimination_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_hpd(&mut rng, 16);
        let b: Vec<Complex64> =
            (0..16).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let x = cholesky_solve(&w, &b).unwrap();
        let o = gauss_solve(&w, &b);
        assert!(rel_error(&x, &o) < 1e-8);
        // residual contract
        let r = w.mul_vec(&x);
        let res: f64 = r.iter().zip(&b).map(|(a, bb)| (a - bb).norm_sqr()).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res / bn < 1e-10);
    }

    #[test]
    fn cholesky_reports_non_positive_pivot() {
        let w = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(matches!(cholesky_factor(&w), Err(Error::NotPositiveDefinite(1))));
    }

    #[test]
    fn cholesky_never_fails_on_regularized_gram() {
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_matrix(&mut rng, 16, 4);
            let w = regularize(&gram(&h).unwrap(), 0.5).unwrap();
            assert!(cholesky_factor(&w).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn forward_substitute_identity_diag() {
        let s = MatrixSplit { diag: vec![1.0, 1.0], lower: ComplexMatrix::zeros(2, 2) };
        let x = forward_substitute(&s, &[c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert_eq!(x, vec![c(3.0, 0.0), c(4.0, 0.0)]);
    }

    #[test]
    fn forward_substitute_hand_elimination() {
        let mut lower = ComplexMatrix::zeros(2, 2);
        lower.set(1, 0, c(1.0, 0.0));
        let s = MatrixSplit { diag: vec![2.0, 2.0], lower };
        let x = forward_substitute(&s, &[c(2.0, 0.0), c(5.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn forward_substitute_residual_and_op_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = 16;
        let w = random_hpd(&mut rng, k);
        let s = split_dlu(&w).unwrap();
        let b: Vec<Complex64> =
            (0..k).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let mut ops = 0u64;
        let x = forward_substitute_counted(&s, &b, &mut ops).unwrap();
        // exactly K(K-1)/2 off-diagonal multiplications plus K divisions
        assert_eq!(ops, (k * (k - 1) / 2 + k) as u64);
        // residual of the triangular system
        let mut res = 0.0f64;
        for m in 0..k {
            let mut acc = Complex64::new(s.diag[m], 0.0) * x[m];
            for c2 in 0..m {
                acc += s.lower.get(m, c2) * x[c2];
            }
            res += (acc - b[m]).norm_sqr();
        }
        let bn: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        assert!(res.sqrt() / bn.sqrt() < 1e-10);
    }

    #[test]
    fn forward_substitute_rejects_zero_diagonal() {
        let s = MatrixSplit { diag: vec![1.0, 0.0], lower: ComplexMatrix::zeros(2, 2) };
        assert!(matches!(
            forward_substitute(&s, &[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::SingularDiagonal(1))
        ));
    }

    #[test]
    fn diag_inverse_basics() {
        assert_eq!(diag_inverse(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(diag_inverse(&[2.0, 4.0]).unwrap(), vec![0.5, 0.25]);
        assert!(matches!(diag_inverse(&[1.0, 0.0]), Err(Error::SingularDiagonal(1))));
    }

    #[test]
    fn diag_inverse_reciprocal_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d: Vec<f64> = (0..32).map(|_| rng.gen::<f64>() + 0.1).collect();
        let inv = diag_inverse(&d).unwrap();
        for (a, b) in d.iter().zip(&inv) {
            assert!((a * b - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn triangular_solvers_agree_with_elimination_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [2usize, 5, 16] {
            let w = random_hpd(&mut rng, k);
            let s = split_dlu(&w).unwrap();
            let b: Vec<Complex64> =
                (0..k).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            // (D + L) as a full matrix for the oracle
            let dl = ComplexMatrix::from_fn(k, k, |m, n| {
                if m == n {
                    c(s.diag[m], 0.0)
                } else if m > n {
                    s.lower.get(m, n)
                } else {
                    c(0.0, 0.0)
                }
            });
            let x = forward_substitute(&s, &b).unwrap();
            let o = gauss_solve(&dl, &b);
            assert!(rel_error(&x, &o) < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn cholesky_inverse_matches_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = random_hpd(&mut rng, 8);
        let inv = cholesky_inverse(&w).unwrap();
        let prod = w.mul(&inv);
        let eye = ComplexMatrix::identity(8);
        let mut err = 0.0f64;
        for m in 0..8 {
            for k in 0..8 {
                err = err.max((prod.get(m, k) - eye.get(m, k)).norm());
            }
        }
        assert!(err < 1e-10);
    }
}
