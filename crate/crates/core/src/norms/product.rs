//! Product measurements and the bound they imply on the SEP norm.
//!
//! A binary measurement built from products cannot beat the ancilla-free
//! bias by more than the output dimension allows: for any product
//! measurement `{Q_j ⊗ R_j}` and any input ρ on `X ⊗ Z`,
//!
//! ```text
//! Σ_j |⟨Q_j ⊗ R_j, ((Φ0-Φ1) ⊗ 1)(ρ)⟩| ≤ (dim(Y)/2) · ‖Φ0-Φ1‖NE
//! ```
//!
//! which is where the SEP upper bound `(dim(Y)/2)·NE` in
//! [`super::sep_upper_bound_thm1`] comes from. This module holds the
//! measurement type, a checker that verifies the inequality together with
//! the per-term facts its proof runs through, and a sampler that turns
//! random product measurements into certified SEP lower bounds.

use super::{Direction, NormEstimate, NormKind};
use crate::channels::ChannelPair;
use crate::error::{Error, Result};
use crate::haar::HaarSampler;
use crate::linalg::{hermitian_eig, inv_sqrt_psd, kron, BipartiteShape, Matrix, Side};

/// How far completeness and trace checks may drift before a measurement is
/// rejected.
const MEASUREMENT_SLACK: f64 = 1e-8;

/// A binary-ready product measurement on `Y ⊗ Z`: a list of terms
/// `(Q_j, R_j)` with each `Q_j` a density matrix on `Y`, each `R_j` PSD on
/// `Z`, and `Σ_j Q_j ⊗ R_j = 1`. Any outcome grouping of the terms into two
/// sets yields a legitimate separable binary measurement.
#[derive(Clone, Debug)]
pub struct ProductMeasurement {
    pub terms: Vec<(Matrix, Matrix)>,
}

fn min_eigenvalue(m: &Matrix) -> Result<f64> {
    let (vals, _) = hermitian_eig(m)?;
    Ok(vals[m.rows - 1])
}

impl ProductMeasurement {
    pub fn dim_y(&self) -> usize {
        self.terms.first().map_or(0, |(q, _)| q.rows)
    }

    pub fn dim_z(&self) -> usize {
        self.terms.first().map_or(0, |(_, r)| r.rows)
    }

    /// The one-term measurement `{(1/dim(Y))·1_Y, dim(Y)·1_Z}`. Useless for
    /// discrimination (its bias on any traceless operator is zero) but a
    /// handy fixed point for checks.
    pub fn trivial(dim_y: usize, dim_z: usize) -> ProductMeasurement {
        ProductMeasurement {
            terms: vec![(
                Matrix::identity(dim_y).scale(1.0 / dim_y as f64),
                Matrix::identity(dim_z).scale(dim_y as f64),
            )],
        }
    }

    /// Pair up two local POVMs `{A_i}` on `Y` and `{B_k}` on `Z` into the
    /// product measurement `{(A_i/Tr A_i, Tr A_i · B_k)}_{i,k}`, normalising
    /// each `Q` to unit trace. Zero-weight effects are dropped.
    pub fn from_local_povms(alice: &[Matrix], bob: &[Matrix]) -> Result<ProductMeasurement> {
        for (label, povm) in [("first", alice), ("second", bob)] {
            if povm.is_empty() {
                return Err(Error::BadMeasurement(format!("{label} local POVM is empty")));
            }
            let dim = povm[0].rows;
            let mut sum = Matrix::zeros(dim, dim);
            for effect in povm {
                sum = &sum + effect;
            }
            let dev = (&sum - &Matrix::identity(dim)).max_abs();
            if dev > MEASUREMENT_SLACK {
                return Err(Error::BadMeasurement(format!(
                    "{label} local POVM sums to identity only within {dev:.3e}"
                )));
            }
        }
        let mut terms = Vec::with_capacity(alice.len() * bob.len());
        for a in alice {
            let weight = a.trace().re;
            if weight <= 1e-12 {
                continue;
            }
            for b in bob {
                terms.push((a.scale(1.0 / weight), b.scale(weight)));
            }
        }
        let m = ProductMeasurement { terms };
        m.validate()?;
        Ok(m)
    }

    /// A random product measurement: two local POVMs of `n_a` and `n_b`
    /// rank-one effects each, drawn from Gaussian vectors and normalised by
    /// `S^{-1/2} · S^{-1/2}`.
    pub fn random(
        dim_y: usize,
        dim_z: usize,
        n_a: usize,
        n_b: usize,
        sampler: &mut HaarSampler,
    ) -> Result<ProductMeasurement> {
        let alice = random_povm(dim_y, n_a, sampler)?;
        let bob = random_povm(dim_z, n_b, sampler)?;
        ProductMeasurement::from_local_povms(&alice, &bob)
    }

    /// Check every structural invariant: shapes, Hermiticity, positivity,
    /// unit traces of the `Q_j`, completeness `Σ Q_j ⊗ R_j = 1`, and the
    /// marginal identity `Σ R_j = dim(Y)·1_Z` that completeness forces once
    /// the `Q_j` carry unit trace.
    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::BadMeasurement("a product measurement needs at least one term".into()));
        }
        let dy = self.dim_y();
        let dz = self.dim_z();
        let mut sum = Matrix::zeros(dy * dz, dy * dz);
        let mut r_sum = Matrix::zeros(dz, dz);
        for (j, (q, r)) in self.terms.iter().enumerate() {
            if !q.is_square() || q.rows != dy || !r.is_square() || r.rows != dz {
                return Err(Error::BadMeasurement(format!(
                    "term {j} has shape ({}x{}, {}x{}), expected ({dy}x{dy}, {dz}x{dz})",
                    q.rows, q.cols, r.rows, r.cols
                )));
            }
            for (side, m) in [("Q", q), ("R", r)] {
                let dev = m.hermiticity_deviation();
                if dev > MEASUREMENT_SLACK {
                    return Err(Error::BadMeasurement(format!(
                        "{side}_{j} is not Hermitian (deviation {dev:.3e})"
                    )));
                }
                let lo = min_eigenvalue(&m.hermitize())?;
                if lo < -MEASUREMENT_SLACK * (1.0 + m.max_abs()) {
                    return Err(Error::BadMeasurement(format!(
                        "{side}_{j} has negative eigenvalue {lo:.3e}"
                    )));
                }
            }
            let tr = q.trace().re;
            if (tr - 1.0).abs() > MEASUREMENT_SLACK {
                return Err(Error::BadMeasurement(format!(
                    "Q_{j} must have unit trace, got {tr}"
                )));
            }
            sum = &sum + &kron(q, r);
            r_sum = &r_sum + r;
        }
        let dev = (&sum - &Matrix::identity(dy * dz)).max_abs();
        if dev > MEASUREMENT_SLACK {
            return Err(Error::BadMeasurement(format!(
                "terms sum to identity only within {dev:.3e}"
            )));
        }
        let marginal_dev = (&r_sum - &Matrix::identity(dz).scale(dy as f64)).max_abs();
        if marginal_dev > MEASUREMENT_SLACK {
            return Err(Error::BadMeasurement(format!(
                "Σ R_j deviates from dim(Y)·1 by {marginal_dev:.3e}"
            )));
        }
        Ok(())
    }
}

/// A random POVM of `n` rank-one effects on dimension `dim`: Gaussian
/// vectors `v_i`, `S = Σ v_i v_i†`, effects `S^{-1/2} v_i v_i† S^{-1/2}`.
/// Retries a handful of times in the (measure-zero) event that `S` is
/// numerically singular.
fn random_povm(dim: usize, n: usize, sampler: &mut HaarSampler) -> Result<Vec<Matrix>> {
    if n < dim {
        return Err(Error::BadParam(format!(
            "a rank-one POVM on dimension {dim} needs at least {dim} effects, got {n}"
        )));
    }
    for _ in 0..10 {
        let columns: Vec<Matrix> = (0..n).map(|_| sampler.ginibre(dim, 1)).collect();
        let mut s = Matrix::zeros(dim, dim);
        for v in &columns {
            s = &s + &(v * &v.dagger());
        }
        let w = match inv_sqrt_psd(&s.hermitize()) {
            Ok(w) => w,
            Err(Error::BadParam(_)) => continue,
            Err(e) => return Err(e),
        };
        return Ok(columns
            .iter()
            .map(|v| {
                let wv = &w * v;
                (&wv * &wv.dagger()).hermitize()
            })
            .collect());
    }
    Err(Error::BadParam(
        "random POVM normalisation stayed singular across retries".into(),
    ))
}

fn split_input_dims(pair: &ChannelPair, rho: &Matrix) -> Result<usize> {
    let dx = pair.dim_in();
    if !rho.is_square() || rho.rows % dx != 0 || rho.rows == 0 {
        return Err(Error::BadShape(format!(
            "input state is {}x{}, expected a square matrix on X ⊗ Z with dim(X) = {dx}",
            rho.rows, rho.cols
        )));
    }
    Ok(rho.rows / dx)
}

/// Verify the product-measurement bound on a concrete instance and return
/// `(lhs, rhs)`: the summed absolute biases of the measurement terms and the
/// bound `(dim(Y)/2)·NE`. Beyond the headline inequality this re-derives
/// each step the bound rests on, per term `j` with `X_j = Tr_Z[(1⊗R_j)ρ]`:
/// the reduction `⟨Q_j⊗R_j, ((Φ0-Φ1)⊗1)(ρ)⟩ = ⟨Q_j, (Φ0-Φ1)(X_j)⟩`, the
/// tracelessness of `(Φ0-Φ1)(X_j)`, and the per-term inequality
/// `|⟨Q_j, (Φ0-Φ1)(X_j)⟩| ≤ ½·NE·Tr(X_j)`. Any failure is reported as a
/// chain violation, since it would mean an inconsistency between the
/// measurement arithmetic and the NE estimate.
pub fn thm1_product_bound_check(
    pair: &ChannelPair,
    rho: &Matrix,
    m: &ProductMeasurement,
    ne: &NormEstimate,
) -> Result<(f64, f64)> {
    if ne.norm != NormKind::Ne {
        return Err(Error::BadParam(format!(
            "the product-measurement bound starts from an NE estimate, got {}",
            ne.norm.label()
        )));
    }
    if ne.direction == Direction::Lower {
        return Err(Error::NeedUpper(
            "the product-measurement bound needs an exact or upper NE estimate".into(),
        ));
    }
    m.validate()?;
    let dx = pair.dim_in();
    let dy = pair.dim_out();
    let dz = split_input_dims(pair, rho)?;
    if m.dim_y() != dy || m.dim_z() != dz {
        return Err(Error::BadMeasurement(format!(
            "measurement lives on {}x{}, instance needs {dy}x{dz}",
            m.dim_y(),
            m.dim_z()
        )));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > MEASUREMENT_SLACK || rho.hermiticity_deviation() > MEASUREMENT_SLACK {
        return Err(Error::BadParam(
            "the input must be a unit-trace Hermitian state".into(),
        ));
    }

    let out = pair.diff_apply_extended(rho, dz)?;
    let input_shape = BipartiteShape::new(dx, dz);
    let id_x = Matrix::identity(dx);
    let mut lhs = 0.0;
    for (j, (q, r)) in m.terms.iter().enumerate() {
        let term = kron(q, r).hs_inner(&out).re;

        let xj = (&kron(&id_x, r) * rho).partial_trace(input_shape, Side::B)?;
        let weight = xj.trace().re;
        let image = pair.diff_apply(&xj.hermitize())?;
        let reduced = q.hs_inner(&image).re;
        if (term - reduced).abs() > 1e-9 * (1.0 + term.abs()) {
            return Err(Error::ChainViolation(format!(
                "term {j}: joint bias {term:.12} disagrees with reduced bias {reduced:.12}"
            )));
        }
        let leak = image.trace().norm();
        if leak > 1e-9 * (1.0 + image.max_abs()) {
            return Err(Error::ChainViolation(format!(
                "term {j}: channel difference output has trace {leak:.3e}, expected 0"
            )));
        }
        if reduced.abs() > 0.5 * ne.value * weight + 1e-9 {
            return Err(Error::ChainViolation(format!(
                "term {j}: bias {:.12} exceeds ½·NE·Tr(X_j) = {:.12}",
                reduced.abs(),
                0.5 * ne.value * weight
            )));
        }
        lhs += term.abs();
    }
    let rhs = 0.5 * dy as f64 * ne.value;
    if lhs > rhs + 1e-7 {
        return Err(Error::ChainViolation(format!(
            "product-measurement bias {lhs:.12} exceeds the bound {rhs:.12}"
        )));
    }
    Ok((lhs, rhs))
}

/// Certified SEP lower bound: sample random product measurements, evaluate
/// the summed absolute bias of each on `((Φ0-Φ1) ⊗ 1)(ρ)`, and keep the
/// best. Grouping the terms by bias sign realises that value as a separable
/// binary measurement, so this is a true lower bound on the SEP norm (if a
/// weak one — random products are rarely competitive).
pub fn sep_lower_product(
    pair: &ChannelPair,
    rho: &Matrix,
    measurements: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let dy = pair.dim_out();
    let dz = split_input_dims(pair, rho)?;
    let out = pair.diff_apply_extended(rho, dz)?;
    let mut sampler = HaarSampler::new(seed, dy * dz);
    let mut best = 0.0_f64;
    for _ in 0..measurements.max(1) {
        let m = ProductMeasurement::random(dy, dz, 2 * dy, 2 * dz, &mut sampler)?;
        let value: f64 =
            m.terms.iter().map(|(q, r)| kron(q, r).hs_inner(&out).re.abs()).sum();
        best = best.max(value);
    }
    Ok(NormEstimate {
        norm: NormKind::Sep,
        value: best,
        direction: Direction::Lower,
        method: "product-measurement".into(),
        restarts: measurements.max(1),
        iterations: 0,
        residual: 0.0,
        witness: None,
    })
}
