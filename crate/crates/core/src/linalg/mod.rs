//! Dense complex linear algebra on row-major matrices.
//!
//! The systems in this crate stay small (a few hundred dimensions at the very
//! most), so everything is stored dense and row-major with no blocking. The
//! eigensolver lives in [`eig`] and is the only nontrivial algorithm here; the
//! rest is the usual bookkeeping for bipartite systems: Kronecker products,
//! partial traces and partial transposes.

mod eig;

pub use eig::{helstrom, hermitian_eig, inv_sqrt_psd, jordan_decompose, positive_part, trace_norm};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dimensions of a bipartite system `A ⊗ B`. Index `(a, b)` of the joint
/// space is flattened as `a * dim_b + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        BipartiteShape { dim_a, dim_b }
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }
}

/// Which tensor factor of a [`BipartiteShape`] an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, serde::Serialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length mismatch");
        assert!(rows > 0 && cols > 0, "zero-dimensional matrix");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix::new(rows, cols, data)
    }

    /// Build from rows of `(re, im)` pairs; handy in tests and constructors.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::new(r, c, rows.concat())
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|z| z.conj()).collect())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn scale_c(&self, s: Complex64) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation `|M[r,c] - conj(M[c,r])|` from hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..=r {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†)/2`.
    pub fn hermitize(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[r] = acc;
        }
        out
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows);
        for r in 0..self.rows {
            self[(r, j)] = v[r];
        }
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Matrix) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Partial trace over one factor of a bipartite system.
    pub fn partial_trace(&self, shape: BipartiteShape, side: Side) -> Result<Matrix> {
        self.check_bipartite(shape)?;
        let (da, db) = (shape.dim_a, shape.dim_b);
        match side {
            Side::B => {
                let mut out = Matrix::zeros(da, da);
                for a in 0..da {
                    for a2 in 0..da {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for b in 0..db {
                            acc += self[(a * db + b, a2 * db + b)];
                        }
                        out[(a, a2)] = acc;
                    }
                }
                Ok(out)
            }
            Side::A => {
                let mut out = Matrix::zeros(db, db);
                for b in 0..db {
                    for b2 in 0..db {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for a in 0..da {
                            acc += self[(a * db + b, a * db + b2)];
                        }
                        out[(b, b2)] = acc;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Partial transpose on one factor of a bipartite system.
    pub fn partial_transpose(&self, shape: BipartiteShape, side: Side) -> Result<Matrix> {
        self.check_bipartite(shape)?;
        let (da, db) = (shape.dim_a, shape.dim_b);
        let mut out = Matrix::zeros(self.rows, self.cols);
        for a in 0..da {
            for b in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        let (r, c) = (a * db + b, a2 * db + b2);
                        let (sr, sc) = match side {
                            Side::A => (a2 * db + b, a * db + b2),
                            Side::B => (a * db + b2, a2 * db + b),
                        };
                        out[(r, c)] = self[(sr, sc)];
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_bipartite(&self, shape: BipartiteShape) -> Result<()> {
        if !self.is_square() || self.rows != shape.total() {
            return Err(Error::BadShape(format!(
                "matrix is {}x{}, bipartite shape wants {}x{}",
                self.rows,
                self.cols,
                shape.total(),
                shape.total()
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl std::ops::Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl std::ops::Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let av = a[(ar, ac)];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = av * b[(br, bc)];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// vector helpers

pub fn basis_state(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// `Σ conj(a_i) b_i`.
pub fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnormalize(v: &[Complex64]) -> Vec<Complex64> {
    let n = vnorm(v);
    assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter().map(|z| z / n).collect()
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Rank-one projector `v v†`.
pub fn outer(v: &[Complex64]) -> Matrix {
    let n = v.len();
    Matrix::from_fn(n, n, |r, c| v[r] * v[c].conj())
}

/// The maximally entangled unit vector `(1/√d) Σ |jj⟩` on `C^d ⊗ C^d`.
pub fn maximally_entangled(d: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        v[j * d + j] = Complex64::new(amp, 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_and_dagger() {
        let a = Matrix::from_rows(&[vec![c(1.0, 1.0), c(0.0, 2.0)], vec![c(3.0, 0.0), c(0.0, 0.0)]]);
        let prod = &a * &a.dagger();
        // (A A†) is Hermitian with the row norms on the diagonal.
        assert_abs_diff_eq!(prod[(0, 0)].re, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prod[(1, 1)].re, 9.0, epsilon = 1e-12);
        assert!(prod.hermiticity_deviation() < 1e-12);
    }

    #[test]
    fn kron_of_identities() {
        let k = kron(&Matrix::identity(2), &Matrix::identity(3));
        assert_eq!(k, Matrix::identity(6));
    }

    #[test]
    fn partial_trace_of_maximally_entangled_state_is_maximally_mixed() {
        for d in [2usize, 3, 5] {
            let rho = outer(&maximally_entangled(d));
            let shape = BipartiteShape::new(d, d);
            for side in [Side::A, Side::B] {
                let red = rho.partial_trace(shape, side).unwrap();
                let target = Matrix::identity(d).scale(1.0 / d as f64);
                assert!((&red - &target).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_consistent_with_kron() {
        let a = Matrix::from_rows(&[vec![c(0.7, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.0)]]);
        let b = Matrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.0, 0.1), c(0.0, 0.0)],
            vec![c(0.0, -0.1), c(0.2, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)],
        ]);
        let joint = kron(&a, &b);
        let shape = BipartiteShape::new(2, 3);
        let ra = joint.partial_trace(shape, Side::B).unwrap();
        let rb = joint.partial_trace(shape, Side::A).unwrap();
        assert!((&ra - &a.scale(b.trace().re)).max_abs() < 1e-12);
        assert!((&rb - &b.scale(a.trace().re)).max_abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution_and_preserves_trace() {
        let shape = BipartiteShape::new(2, 2);
        let rho = outer(&maximally_entangled(2));
        for side in [Side::A, Side::B] {
            let pt = rho.partial_transpose(shape, side).unwrap();
            assert_abs_diff_eq!(pt.trace().re, rho.trace().re, epsilon = 1e-14);
            let back = pt.partial_transpose(shape, side).unwrap();
            assert!((&back - &rho).max_abs() < 1e-14);
        }
    }

    #[test]
    fn partial_transpose_on_both_sides_is_full_transpose() {
        let shape = BipartiteShape::new(2, 3);
        let m = Matrix::from_fn(6, 6, |r, col| c((r * 7 + col) as f64, (r as f64) - (col as f64)));
        let both = m
            .partial_transpose(shape, Side::A)
            .unwrap()
            .partial_transpose(shape, Side::B)
            .unwrap();
        assert!((&both - &m.transpose()).max_abs() < 1e-14);
    }

    #[test]
    fn bad_shape_is_rejected() {
        let m = Matrix::identity(5);
        let err = m.partial_trace(BipartiteShape::new(2, 2), Side::A).unwrap_err();
        assert!(err.to_string().starts_with("bad_shape"));
    }

    #[test]
    fn vector_helpers() {
        let v = vec![c(3.0, 0.0), c(0.0, 4.0)];
        assert_abs_diff_eq!(vnorm(&v), 5.0, epsilon = 1e-14);
        let u = vnormalize(&v);
        assert_abs_diff_eq!(vnorm(&u), 1.0, epsilon = 1e-14);
        let p = outer(&u);
        assert_abs_diff_eq!(p.trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vdot(&u, &u).re, 1.0, epsilon = 1e-14);
    }
}
