//! Hermitian eigendecomposition without external dependencies.
//!
//! The solver follows the classic dense path: a complex Householder reduction
//! to Hermitian tridiagonal form, a diagonal phase similarity that makes the
//! off-diagonal real and non-negative, and an implicit QL iteration with
//! Wilkinson shifts on the resulting real tridiagonal matrix. Rotations are
//! accumulated into the complex eigenvector matrix as they are produced.
//!
//! Matrices here stay below a few hundred rows, where this is both fast and
//! numerically boring; the iteration budget of 30 sweeps per eigenvalue is
//! the usual one and is never approached in practice.

use super::Matrix;
use crate::error::{Error, Result};
use crate::tol;
use num_complex::Complex64;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 30;

/// Eigenvalues (sorted descending) and a unitary matrix of eigenvectors
/// (column `j` belongs to eigenvalue `j`) of a Hermitian matrix.
pub fn hermitian_eig(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::BadShape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let dev = m.hermiticity_deviation();
    if dev > tol::EXACT * (1.0 + m.max_abs()) {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let n = m.rows;
    // Work on the exactly Hermitian average so roundoff in the input cannot
    // leak into the reduction.
    let mut a = m.hermitize();
    let mut q = Matrix::identity(n);

    householder_tridiagonalize(&mut a, &mut q);
    let (mut d, mut e) = realify_tridiagonal(&a, &mut q);
    ql_implicit(&mut d, &mut e, &mut q)?;

    sort_descending(&mut d, &mut q);
    Ok((d, q))
}

/// Reduce the Hermitian matrix `a` to tridiagonal form by Householder
/// reflections, accumulating the similarity into `q` (so `a_in = q a_out q†`
/// on the tridiagonal part).
fn householder_tridiagonalize(a: &mut Matrix, q: &mut Matrix) {
    let n = a.rows;
    if n < 3 {
        return;
    }
    let scale = a.max_abs().max(1.0);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n - 2 {
        // Column k below the diagonal: x = a[k+1.., k].
        let mut xnorm2 = 0.0;
        let mut tail2 = 0.0;
        for i in k + 1..n {
            let s = a[(i, k)].norm_sqr();
            xnorm2 += s;
            if i > k + 1 {
                tail2 += s;
            }
        }
        if tail2.sqrt() <= f64::EPSILON * scale {
            continue; // already tridiagonal in this column
        }

        let alpha = a[(k + 1, k)];
        let anorm = xnorm2.sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // The sign choice avoids cancellation in v[k+1] = alpha - beta.
        let beta = -phase * anorm;

        v[k + 1] = alpha - beta;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm = v[k + 1..n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= f64::EPSILON * scale {
            continue;
        }
        for z in &mut v[k + 1..n] {
            *z /= vnorm;
        }

        // Rank-two update of the trailing block: with P = 1 - 2vv†,
        // P A P = A - 2vw† - 2wv† where p = Av, kappa = v†p, w = p - kappa v.
        for i in k + 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                acc += a[(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let mut kappa = Complex64::new(0.0, 0.0);
        for i in k + 1..n {
            kappa += v[i].conj() * p[i];
        }
        for i in k + 1..n {
            p[i] -= kappa * v[i]; // now p holds w
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[(i, j)] -= upd * 2.0;
            }
        }

        // The reflector maps column k exactly onto beta e1.
        a[(k + 1, k)] = beta;
        a[(k, k + 1)] = beta.conj();
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
            a[(k, i)] = Complex64::new(0.0, 0.0);
        }

        // q ← q (1 - 2vv†)
        for r in 0..n {
            let mut t = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                t += q[(r, j)] * v[j];
            }
            t *= 2.0;
            for j in k + 1..n {
                let sub = t * v[j].conj();
                q[(r, j)] -= sub;
            }
        }

        for z in &mut v[k + 1..n] {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Absorb the phases of the (complex) sub-diagonal into `q`, leaving a real
/// non-negative sub-diagonal. Returns the diagonal and sub-diagonal; the
/// sub-diagonal is padded with a trailing zero so `e.len() == d.len()`.
fn realify_tridiagonal(a: &Matrix, q: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        d[i] = a[(i, i)].re;
    }
    let mut z = Complex64::new(1.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        let f = a[(k + 1, k)];
        let r = f.norm();
        e[k] = r;
        if r > 0.0 {
            z *= f / r;
        }
        // Column k+1 of q picks up the accumulated phase.
        for row in 0..n {
            let scaled = q[(row, k + 1)] * z;
            q[(row, k + 1)] = scaled;
        }
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix,
/// rotations applied to the columns of the complex matrix `q`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], q: &mut Matrix) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Look for a negligible sub-diagonal element to split at.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::EigFail);
            }

            // Wilkinson shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;

            let mut i = m as isize - 1;
            let mut underflow = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    // Recover from underflow: skip the rest of the sweep.
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;

                for row in 0..q.rows {
                    let fq = q[(row, iu + 1)];
                    q[(row, iu + 1)] = q[(row, iu)] * s + fq * c;
                    q[(row, iu)] = q[(row, iu)] * c - fq * s;
                }
                i -= 1;
            }
            if underflow && i >= l as isize {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_descending(d: &mut Vec<f64>, q: &mut Matrix) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let sorted_d: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut sorted_q = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted_q[(row, new_col)] = q[(row, old_col)];
        }
    }
    *d = sorted_d;
    *q = sorted_q;
}

/// Trace norm `Σ |λ_i|` of a Hermitian matrix.
pub fn trace_norm(m: &Matrix) -> Result<f64> {
    let (vals, _) = hermitian_eig(m)?;
    Ok(vals.iter().map(|x| x.abs()).sum())
}

/// Jordan decomposition `M = M₊ - M₋` of a Hermitian matrix into orthogonal
/// positive-semidefinite parts.
pub fn jordan_decompose(m: &Matrix) -> Result<(Matrix, Matrix)> {
    let (vals, vecs) = hermitian_eig(m)?;
    let n = m.rows;
    let mut plus = Matrix::zeros(n, n);
    let mut minus = Matrix::zeros(n, n);
    for (j, &lambda) in vals.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let col = vecs.col(j);
        let proj = super::outer(&col);
        if lambda > 0.0 {
            plus = &plus + &proj.scale(lambda);
        } else {
            minus = &minus + &proj.scale(-lambda);
        }
    }
    Ok((plus, minus))
}

/// Positive part `M₊` of a Hermitian matrix.
pub fn positive_part(m: &Matrix) -> Result<Matrix> {
    Ok(jordan_decompose(m)?.0)
}

/// Inverse square root `M^{-1/2}` of a strictly positive definite matrix.
/// Fails with `bad_param` when the smallest eigenvalue is too close to zero
/// relative to the largest, since the result would be dominated by noise.
pub fn inv_sqrt_psd(m: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = hermitian_eig(m)?;
    let n = m.rows;
    let top = vals[0].max(0.0);
    let bottom = vals[n - 1];
    if bottom <= 1e-12 * (1.0 + top) {
        return Err(Error::BadParam(format!(
            "inverse square root needs a positive definite matrix; \
             smallest eigenvalue {bottom:.3e} against largest {top:.3e}"
        )));
    }
    let mut out = Matrix::zeros(n, n);
    for (j, &lambda) in vals.iter().enumerate() {
        let col = vecs.col(j);
        out = &out + &super::outer(&col).scale(1.0 / lambda.sqrt());
    }
    Ok(out)
}

/// Optimal two-outcome (Helstrom) measurement data for a Hermitian operator:
/// returns `(‖M‖₁, D)` where `D = P₊ - P₋` is the difference of the projectors
/// onto the positive and non-positive eigenspaces, so that `⟨D, M⟩ = ‖M‖₁`.
pub fn helstrom(m: &Matrix) -> Result<(f64, Matrix)> {
    let (vals, vecs) = hermitian_eig(m)?;
    let n = m.rows;
    let mut dmat = Matrix::zeros(n, n);
    let mut value = 0.0;
    for (j, &lambda) in vals.iter().enumerate() {
        value += lambda.abs();
        let sign = if lambda > 0.0 { 1.0 } else { -1.0 };
        let col = vecs.col(j);
        dmat = &dmat + &super::outer(&col).scale(sign);
    }
    Ok((value, dmat))
}
