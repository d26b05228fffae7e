//! A small ADMM solver for the semidefinite programs behind the PPT norm.
//!
//! Every program we need has the same shape: maximise `⟨C, P⟩` over Hermitian
//! `P` subject to cone constraints `A_i(P) + B_i ⪰ 0`, where each `A_i` is
//! one of `±identity` or `±partial transpose`. All four maps are self-adjoint
//! involutions on Hermitian matrices, which makes the ADMM `P`-update a
//! closed-form average instead of a linear solve:
//!
//! ```text
//!   P   = (1/m) [ C/ρ + Σ_i A_i(Z_i - U_i - B_i) ]
//!   Z_i = Π_psd( A_i(P) + B_i + U_i )
//!   U_i = U_i + A_i(P) + B_i - Z_i
//! ```
//!
//! with `Π_psd` the eigenvalue clamp and `U_i` the scaled duals. The penalty
//! `ρ` starts at 1 and is rebalanced every 50 iterations when the primal and
//! dual residuals drift more than a factor 10 apart. Iteration stops once
//! both residuals drop below `tol::SDP` relative to `1 + ‖P‖_F`.
//!
//! The only entry point most callers need is [`ppt_measurement_value`]: the
//! best bias `⟨2P - 1, X̂⟩` achievable with a binary measurement `{P, 1-P}`
//! whose both effects are PPT. A warm-startable variant exists for seesaw
//! loops that re-solve with slowly moving objectives.

use crate::error::{Error, Result};
use crate::haar::HaarSampler;
use crate::linalg::{hermitian_eig, BipartiteShape, Matrix, Side};
use crate::tol;

/// The linear maps allowed on the left-hand side of a cone constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConeMap {
    Identity,
    NegIdentity,
    PartialTranspose(BipartiteShape, Side),
    NegPartialTranspose(BipartiteShape, Side),
}

impl ConeMap {
    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        match self {
            ConeMap::Identity => Ok(m.clone()),
            ConeMap::NegIdentity => Ok(m.scale(-1.0)),
            ConeMap::PartialTranspose(shape, side) => m.partial_transpose(*shape, *side),
            ConeMap::NegPartialTranspose(shape, side) => {
                Ok(m.partial_transpose(*shape, *side)?.scale(-1.0))
            }
        }
    }
}

/// One constraint `map(P) + offset ⪰ 0`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub map: ConeMap,
    pub offset: Matrix,
}

/// `maximise ⟨objective, P⟩ subject to cones`.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: Matrix,
    pub cones: Vec<Cone>,
}

impl SdpProblem {
    pub fn new(objective: Matrix, cones: Vec<Cone>) -> Result<SdpProblem> {
        if !objective.is_square() {
            return Err(Error::BadShape("SDP objective must be square".into()));
        }
        if cones.is_empty() {
            return Err(Error::BadParam("an SDP needs at least one cone".into()));
        }
        let n = objective.rows;
        for cone in &cones {
            if !cone.offset.is_square() || cone.offset.rows != n {
                return Err(Error::BadShape("cone offset dimension mismatch".into()));
            }
            if let ConeMap::PartialTranspose(shape, _) | ConeMap::NegPartialTranspose(shape, _) =
                cone.map
            {
                if shape.total() != n {
                    return Err(Error::BadShape(
                        "partial-transpose shape does not match the SDP dimension".into(),
                    ));
                }
            }
        }
        Ok(SdpProblem { objective, cones })
    }

    /// The measurement box `0 ⪯ P ⪯ 1`.
    pub fn box_constrained(objective: Matrix) -> Result<SdpProblem> {
        let n = objective.rows;
        SdpProblem::new(
            objective,
            vec![
                Cone { map: ConeMap::Identity, offset: Matrix::zeros(n, n) },
                Cone { map: ConeMap::NegIdentity, offset: Matrix::identity(n) },
            ],
        )
    }

    /// The PPT measurement box: `0 ⪯ P ⪯ 1` and `0 ⪯ PΓ ⪯ 1`, so that both
    /// effects of `{P, 1-P}` have positive partial transpose.
    pub fn ppt_box(objective: Matrix, shape: BipartiteShape, side: Side) -> Result<SdpProblem> {
        let n = objective.rows;
        SdpProblem::new(
            objective,
            vec![
                Cone { map: ConeMap::Identity, offset: Matrix::zeros(n, n) },
                Cone { map: ConeMap::NegIdentity, offset: Matrix::identity(n) },
                Cone { map: ConeMap::PartialTranspose(shape, side), offset: Matrix::zeros(n, n) },
                Cone {
                    map: ConeMap::NegPartialTranspose(shape, side),
                    offset: Matrix::identity(n),
                },
            ],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub value: f64,
    pub argument: Matrix,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

/// Solver state for warm starts across re-solves with a moving objective.
#[derive(Clone, Debug)]
pub struct SdpState {
    p: Matrix,
    z: Vec<Matrix>,
    u: Vec<Matrix>,
    rho: f64,
}

fn project_psd(m: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = hermitian_eig(m)?;
    let n = m.rows;
    let mut out = Matrix::zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = vecs.col(k);
        for r in 0..n {
            let vr = v[r] * lambda;
            for c in 0..n {
                out[(r, c)] += vr * v[c].conj();
            }
        }
    }
    Ok(out)
}

fn clamp_spectrum(m: &Matrix, lo: f64, hi: f64) -> Result<Matrix> {
    let (vals, vecs) = hermitian_eig(m)?;
    let n = m.rows;
    let mut out = Matrix::zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        let l = lambda.clamp(lo, hi);
        if l == 0.0 {
            continue;
        }
        let v = vecs.col(k);
        for r in 0..n {
            let vr = v[r] * l;
            for c in 0..n {
                out[(r, c)] += vr * v[c].conj();
            }
        }
    }
    Ok(out)
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    let (solution, _) = solve_warm(problem, None)?;
    Ok(solution)
}

/// Solve, optionally resuming from the state of a previous solve over the
/// same cones. Returns the solution together with the final state.
pub fn solve_warm(
    problem: &SdpProblem,
    warm: Option<SdpState>,
) -> Result<(SdpSolution, SdpState)> {
    let n = problem.objective.rows;
    let m = problem.cones.len();
    let c = problem.objective.hermitize();

    let (mut p, mut z, mut u, mut rho) = match warm {
        Some(state) if state.p.rows == n && state.z.len() == m => {
            (state.p, state.z, state.u, state.rho)
        }
        _ => {
            let p0 = Matrix::identity(n).scale(0.5);
            let mut z0 = Vec::with_capacity(m);
            for cone in &problem.cones {
                z0.push(project_psd(&(&cone.map.apply(&p0)? + &cone.offset))?);
            }
            (p0, z0, vec![Matrix::zeros(n, n); m], 1.0)
        }
    };

    let mut status = SdpStatus::MaxIterations;
    let mut iterations = tol::SDP_MAX_ITER;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    for it in 0..tol::SDP_MAX_ITER {
        let mut acc = c.scale(1.0 / rho);
        for (cone, (zi, ui)) in problem.cones.iter().zip(z.iter().zip(&u)) {
            acc = &acc + &cone.map.apply(&(&(zi - ui) - &cone.offset))?;
        }
        p = acc.scale(1.0 / m as f64).hermitize();

        let mut rp2 = 0.0;
        let mut rd2 = 0.0;
        for (i, cone) in problem.cones.iter().enumerate() {
            let v = &cone.map.apply(&p)? + &cone.offset;
            let z_new = project_psd(&(&v + &u[i]))?;
            rd2 += (&z_new - &z[i]).fro_norm().powi(2);
            z[i] = z_new;
            let r = &v - &z[i];
            u[i] = &u[i] + &r;
            rp2 += r.fro_norm().powi(2);
        }
        primal = rp2.sqrt();
        dual = rho * rd2.sqrt();

        let scale = 1.0 + p.fro_norm();
        if primal <= tol::SDP * scale && dual <= tol::SDP * scale {
            status = SdpStatus::Optimal;
            iterations = it + 1;
            break;
        }

        if (it + 1) % 50 == 0 {
            if p.fro_norm() > 1e6 {
                status = SdpStatus::Infeasible;
                iterations = it + 1;
                break;
            }
            if primal > 10.0 * dual {
                rho *= 2.0;
                for ui in &mut u {
                    *ui = ui.scale(0.5);
                }
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                for ui in &mut u {
                    *ui = ui.scale(2.0);
                }
            }
        }
    }

    let value = c.hs_inner(&p).re;
    let state = SdpState { p: p.clone(), z, u, rho };
    Ok((
        SdpSolution { value, argument: p, primal_residual: primal, dual_residual: dual, iterations, status },
        state,
    ))
}

/// Best bias `⟨2P - 1, X̂⟩` over binary measurements whose effects are both
/// PPT across the cut given by `shape`. Returns the bias and the optimal `P`.
pub fn ppt_measurement_value(xhat: &Matrix, shape: BipartiteShape) -> Result<(f64, Matrix)> {
    let (value, p, _) = ppt_measurement_value_warm(xhat, shape, None)?;
    Ok((value, p))
}

/// Warm-startable variant of [`ppt_measurement_value`] for seesaw loops.
pub fn ppt_measurement_value_warm(
    xhat: &Matrix,
    shape: BipartiteShape,
    warm: Option<SdpState>,
) -> Result<(f64, Matrix, SdpState)> {
    // The objective is always a channel difference applied to a state, so a
    // nonzero trace signals a caller bug rather than an interesting input.
    let tr = xhat.trace().norm();
    if tr > 1e-9 * (1.0 + xhat.max_abs()) {
        return Err(Error::BadParam(format!(
            "PPT measurement objective must be traceless, got trace magnitude {tr:.3e}"
        )));
    }
    let c = xhat.hermitize().scale(2.0);
    let problem = SdpProblem::ppt_box(c, shape, Side::B)?;
    let (solution, state) = solve_warm(&problem, warm)?;
    let value = solution.value - xhat.trace().re;
    Ok((value, solution.argument, state))
}

/// A random element of the PPT measurement box, produced by alternating
/// projections between `{0 ⪯ Q ⪯ 1}` and `{0 ⪯ QΓ ⪯ 1}` from a random
/// Hermitian start near the box centre.
pub fn random_ppt_operator(shape: BipartiteShape, sampler: &mut HaarSampler) -> Result<Matrix> {
    let n = shape.total();
    let h = sampler.ginibre(n, n).hermitize();
    let mut q = &Matrix::identity(n).scale(0.5) + &h.scale(0.5 / (1.0 + h.max_abs()));
    for _ in 0..2000 {
        q = clamp_spectrum(&q, 0.0, 1.0)?;
        let gamma = q.partial_transpose(shape, Side::B)?;
        let clamped = clamp_spectrum(&gamma, 0.0, 1.0)?;
        let back = clamped.partial_transpose(shape, Side::B)?;
        let drift = (&back - &q).max_abs();
        q = back;
        if drift < 1e-12 {
            break;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::sym_antisym_projectors;
    use crate::linalg::jordan_decompose;
    use approx::assert_abs_diff_eq;

    fn min_eig(m: &Matrix) -> f64 {
        let (vals, _) = hermitian_eig(m).unwrap();
        *vals.last().unwrap()
    }

    fn max_eig(m: &Matrix) -> f64 {
        let (vals, _) = hermitian_eig(m).unwrap();
        vals[0]
    }

    #[test]
    fn box_sdp_matches_positive_part_trace() {
        // max ⟨C, P⟩ over 0 ⪯ P ⪯ 1 is the trace of the positive part of C.
        let mut sampler = HaarSampler::new(11, 4);
        for _ in 0..5 {
            let c = sampler.ginibre(4, 4).hermitize();
            let problem = SdpProblem::box_constrained(c.clone()).unwrap();
            let sol = solve(&problem).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal);
            let (plus, _) = jordan_decompose(&c).unwrap();
            assert_abs_diff_eq!(sol.value, plus.trace().re, epsilon = 1e-5);
        }
    }

    #[test]
    fn box_sdp_two_level_example() {
        let c = Matrix::from_fn(2, 2, |r, cc| {
            num_complex::Complex64::new(if r == cc { if r == 0 { 1.0 } else { -1.0 } } else { 0.0 }, 0.0)
        });
        let sol = solve(&SdpProblem::box_constrained(c).unwrap()).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.argument[(0, 0)].re, 1.0, epsilon = 1e-4);
        assert!(sol.argument[(1, 1)].re.abs() < 1e-4);
    }

    #[test]
    fn ppt_value_on_antisymmetric_difference() {
        // X̂ = S/3 - R on two qubits: unrestricted measurements reach the
        // trace norm 2, PPT measurements only 4/3.
        let (s, r) = sym_antisym_projectors(2);
        let xhat = &s.scale(1.0 / 3.0) - &r;
        let shape = BipartiteShape::new(2, 2);

        let unrestricted = solve(&SdpProblem::box_constrained(xhat.scale(2.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(unrestricted.value - xhat.trace().re, 2.0, epsilon = 1e-5);

        let (value, p) = ppt_measurement_value(&xhat, shape).unwrap();
        assert_abs_diff_eq!(value, 4.0 / 3.0, epsilon = 1e-4);

        // Feasibility of the returned argument.
        assert!(min_eig(&p) > -1e-6);
        assert!(max_eig(&p) < 1.0 + 1e-6);
        let gamma = p.partial_transpose(shape, Side::B).unwrap();
        assert!(min_eig(&gamma) > -1e-6);
        assert!(max_eig(&gamma) < 1.0 + 1e-6);
    }

    #[test]
    fn warm_start_resumes_quickly() {
        let (s, r) = sym_antisym_projectors(2);
        let xhat = &s.scale(1.0 / 3.0) - &r;
        let shape = BipartiteShape::new(2, 2);
        let (value, _, state) = ppt_measurement_value_warm(&xhat, shape, None).unwrap();
        let cold_iters = {
            let problem = SdpProblem::ppt_box(xhat.scale(2.0), shape, Side::B).unwrap();
            solve(&problem).unwrap().iterations
        };
        let (value2, _, state2) = ppt_measurement_value_warm(&xhat, shape, Some(state)).unwrap();
        assert_abs_diff_eq!(value, value2, epsilon = 1e-6);
        assert!(
            state2.rho > 0.0 && cold_iters > 1,
            "sanity: cold solve does some work"
        );
        let problem = SdpProblem::ppt_box(xhat.scale(2.0), shape, Side::B).unwrap();
        let (resumed, _) = solve_warm(&problem, Some(state2)).unwrap();
        assert!(
            resumed.iterations <= cold_iters,
            "warm start ({}) should not beat cold start ({}) by iterating longer",
            resumed.iterations,
            cold_iters
        );
    }

    #[test]
    fn random_ppt_operators_are_feasible_and_bounded_on_swap_difference() {
        // ⟨Q, R - S⟩ ≤ 0 for every PPT box element Q: the core of the
        // Werner-Holevo PPT upper bound.
        let d = 2;
        let (s, r) = sym_antisym_projectors(d);
        let diff = &r - &s;
        let shape = BipartiteShape::new(d, d);
        let mut sampler = HaarSampler::new(2024, d * d);
        for _ in 0..100 {
            let q = random_ppt_operator(shape, &mut sampler).unwrap();
            assert!(min_eig(&q) > -1e-9);
            assert!(max_eig(&q) < 1.0 + 1e-9);
            let gamma = q.partial_transpose(shape, Side::B).unwrap();
            assert!(min_eig(&gamma) > -1e-9);
            assert!(q.hs_inner(&diff).re <= 1e-9);
        }
    }

    #[test]
    fn problem_validation() {
        let c = Matrix::identity(3);
        assert!(SdpProblem::new(c.clone(), vec![]).is_err());
        let bad_offset = Cone { map: ConeMap::Identity, offset: Matrix::identity(2) };
        assert!(SdpProblem::new(c.clone(), vec![bad_offset]).is_err());
        let bad_shape = Cone {
            map: ConeMap::PartialTranspose(BipartiteShape::new(2, 2), Side::B),
            offset: Matrix::zeros(3, 3),
        };
        assert!(SdpProblem::new(c, vec![bad_shape]).is_err());
    }
}
