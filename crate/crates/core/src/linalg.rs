//! Dense complex linear algebra for the small Hermitian matrices that show up
//! everywhere in the model (N×N channel covariances, L×L LSFD statistics).
//!
//! Storage is row-major. Nothing here tries to be clever about cache blocking;
//! the largest matrices are on the order of 100×100.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex column vector.
pub type CVector = Vec<Complex64>;

/// `xᴴ y`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Squared Euclidean norm.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(s, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Diagonal matrix from real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        m
    }

    /// `x yᴴ`.
    pub fn outer(x: &[Complex64], y: &[Complex64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn add_to_diagonal(&mut self, s: f64) {
        assert!(self.is_square());
        for i in 0..self.rows {
            self[(i, i)] += s;
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sqr(&self.data).sqrt()
    }

    /// `‖A − Aᴴ‖_F ≤ tol·‖A‖_F`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let mut diff = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                diff += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        diff.sqrt() <= tol * self.frobenius_norm()
    }

    /// Replaces `A` with `(A + Aᴴ)/2`, removing round-off asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> CVector {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic/bilinear form `xᴴ A y`.
    pub fn bilinear(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        dot(x, &self.mul_vec(y))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

/// `tr(AB) = Σ_ij A_ij B_ji`, without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.cols != b.rows || a.rows != b.cols {
        return Err(Error::Dimension(format!(
            "trace of {}x{} times {}x{} is undefined",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows {
        for j in 0..a.cols {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// Lower-triangular Cholesky factor `A = L Lᴴ` of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct HermitianCholesky {
    l: ComplexMatrix,
}

impl HermitianCholesky {
    /// Factorizes `a`, reading only its lower triangle.
    ///
    /// Fails if a pivot is not strictly positive relative to its own diagonal
    /// entry, which means the input is not positive definite to working
    /// precision. The test is invariant under diagonal scaling, so matrices whose
    /// diagonal spans many orders of magnitude are accepted.
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "cholesky of non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            let floor = d.abs() * 1e-14;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > floor) || !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    pub fn solve(&self, b: &[Complex64]) -> CVector {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        // L y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        // Lᴴ x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(b.rows, n);
        let mut out = ComplexMatrix::zeros(n, b.cols);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// Hermitian inverse, symmetrized to kill round-off skew.
    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_matrix(&ComplexMatrix::identity(self.dim()))
            .hermitian_part()
    }
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hermitian_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<CVector> {
    if a.rows != b.len() {
        return Err(Error::Dimension(format!(
            "{}x{} system with rhs of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    Ok(HermitianCholesky::factor(a)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, m: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, m, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_pd(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = random_matrix(n, n, rng);
        let mut a = &g * &g.adjoint();
        a.add_to_diagonal(0.1);
        a
    }

    fn random_vec(n: usize, rng: &mut impl Rng) -> CVector {
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn det3(m: &ComplexMatrix) -> Complex64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    /// Cramer's rule: independent of any factorization.
    fn cramer3(m: &ComplexMatrix, b: &[Complex64]) -> CVector {
        let d = det3(m);
        (0..3)
            .map(|col| {
                let mc =
                    ComplexMatrix::from_fn(3, 3, |i, j| if j == col { b[i] } else { m[(i, j)] });
                det3(&mc) / d
            })
            .collect()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let x = hermitian_solve(&ComplexMatrix::identity(2), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn scaled_identity_solve() {
        let x = hermitian_solve(
            &ComplexMatrix::scaled_identity(2, 2.0),
            &[c(2.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_matches_cramer_on_3x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_pd(3, &mut rng);
            let b = random_vec(3, &mut rng);
            let x = hermitian_solve(&a, &b).unwrap();
            let x_ref = cramer3(&a, &b);
            for (u, v) in x.iter().zip(&x_ref) {
                assert!((u - v).norm() <= 1e-10 * (1.0 + v.norm()), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn solve_round_trip_up_to_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [1, 2, 5, 16, 33, 64] {
            let a = random_pd(n, &mut rng);
            let b = random_vec(n, &mut rng);
            let x = hermitian_solve(&a, &b).unwrap();
            let r: CVector = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
            assert!(norm_sqr(&r).sqrt() <= 1e-8 * norm_sqr(&b).sqrt(), "n={n}");
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_pd(8, &mut rng);
        let inv = HermitianCholesky::factor(&a).unwrap().inverse();
        let e = &(&a * &inv) - &ComplexMatrix::identity(8);
        assert!(e.frobenius_norm() < 1e-8);
        assert!(inv.is_hermitian(1e-12));
    }

    #[test]
    fn non_pd_input_is_rejected() {
        let mut a = ComplexMatrix::identity(3);
        a[(2, 2)] = c(-1.0, 0.0);
        assert!(matches!(
            HermitianCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { pivot: 2, .. })
        ));
        let z = ComplexMatrix::zeros(2, 2);
        assert!(HermitianCholesky::factor(&z).is_err());
    }

    #[test]
    fn trace_product_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let b = random_matrix(4, 4, &mut rng);
        let t = trace_product(&ComplexMatrix::identity(4), &b).unwrap();
        assert!((t - b.trace()).norm() < 1e-15);

        let a = random_matrix(4, 4, &mut rng);
        let naive = (&a * &b).trace();
        assert!((trace_product(&a, &b).unwrap() - naive).norm() <= 1e-12 * (1.0 + naive.norm()));

        let p = random_pd(4, &mut rng);
        let q = random_pd(4, &mut rng);
        let t = trace_product(&p, &q).unwrap();
        assert!(t.re >= 0.0);
        assert!(t.im.abs() <= 1e-12 * t.re);

        let r = random_matrix(3, 4, &mut rng);
        assert!(trace_product(&r, &r).is_err());
        assert!(trace_product(&r, &r.adjoint()).is_ok());
    }

    #[test]
    fn mismatched_dimensions_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(hermitian_solve(&ComplexMatrix::identity(2), &[c(1.0, 0.0)]).is_err());
        assert!(ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0); 3]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn trace_product_adjoint_symmetry(seed in any::<u64>(), n in 1usize..7) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_matrix(n, n, &mut rng);
                let b = random_matrix(n, n, &mut rng);
                let lhs = trace_product(&a, &b).unwrap();
                let rhs = trace_product(&b.adjoint(), &a.adjoint()).unwrap().conj();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }

            #[test]
            fn solve_then_multiply_round_trips(seed in any::<u64>(), n in 1usize..12) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_pd(n, &mut rng);
                let b = random_vec(n, &mut rng);
                let x = hermitian_solve(&a, &b).unwrap();
                let ax = a.mul_vec(&x);
                let err: f64 = ax.iter().zip(&b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(err <= 1e-8 * norm_sqr(&b).sqrt());
            }
        }
    }
}
