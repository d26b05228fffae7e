//! Exact simulation of finite LOCC discrimination protocols.
//!
//! A protocol is a finite tree: internal nodes measure one party's share with
//! an instrument (each outcome is a list of Kraus operators, possibly
//! rectangular), leaves guess which channel was applied. The two parties are
//! the holder of the channel output and the holder of the untouched ancilla;
//! classical communication is implicit in the tree structure, since every
//! outcome selects the subtree both parties follow next.
//!
//! [`evaluate`] walks the tree with a pair of conditional states and returns
//! the exact success probability `p = Σ_a ½ Tr(ρ_a restricted to branches
//! guessing a)`; branches of negligible weight are pruned. Because every
//! branch applies only local operators, the induced global POVM element of a
//! guess is a sum of product operators — [`induced_povm`] returns it, which
//! both cross-checks the evaluator and certifies that the tree is a valid
//! measurement. A protocol run with success `p` certifies `4p - 2` as a lower
//! bound on the LOCC distinguishability norm ([`locc_lower_bound`]).
//!
//! Protocol constructors:
//!
//! * [`walgate_protocol`] — perfect one-way discrimination of any two
//!   orthogonal pure states. The first party measures in a basis that makes
//!   the overlap operator `M = Tr_B |ψ0⟩⟨ψ1|` have zero diagonal (such a
//!   basis exists because `Tr M = ⟨ψ1|ψ0⟩ = 0`; [`zero_diagonal_basis`]
//!   constructs it from a chain of 2×2 rotations), leaving the second party
//!   with orthogonal conditionals.
//! * [`flagged_protocol`] — read the flag, then run Walgate on the per-flag
//!   pure conditionals.
//! * [`random_binary_protocol`] — the three-message protocol for binary
//!   channels: read the flag `j`, undo the basis change by applying the
//!   entrywise conjugate of `U_j` on the ancilla half of a maximally
//!   entangled input, measure both halves, and compare bits. Succeeds with
//!   certainty for any choice of unitaries.

use crate::channels::ChannelPair;
use crate::error::{Error, Result};
use crate::linalg::{kron, maximally_entangled, outer, vdot, vnorm, vnormalize, BipartiteShape, Matrix};
use crate::tol;
use num_complex::Complex64;

/// Which share a measurement acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    /// The channel-output system (first tensor factor).
    Output,
    /// The reference system the input was entangled with (second factor).
    Ancilla,
}

/// One measurement outcome: its Kraus operators and the subtree to follow.
/// All Kraus operators of one outcome must share their target dimension;
/// different outcomes may collapse to differently sized spaces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub kraus: Vec<Matrix>,
    pub next: ProtocolNode,
}

#[derive(Clone, Debug)]
pub enum ProtocolNode {
    Measure { party: Party, outcomes: Vec<Outcome> },
    Decide { guess: usize },
}

/// A protocol together with the bipartite shape of the states it expects.
#[derive(Clone, Debug)]
pub struct ProtocolTree {
    pub root: ProtocolNode,
    pub shape: BipartiteShape,
}

/// Certified lower bound on the LOCC norm from a protocol succeeding with
/// probability `p`: the bias `4p - 2`.
pub fn locc_lower_bound(p: f64) -> f64 {
    4.0 * p - 2.0
}

fn check_instrument(outcomes: &[Outcome], dim: usize) -> Result<()> {
    let mut sum = Matrix::zeros(dim, dim);
    for oc in outcomes {
        for k in &oc.kraus {
            if k.cols != dim {
                return Err(Error::BadShape(format!(
                    "Kraus operator acts on dimension {}, party holds {dim}",
                    k.cols
                )));
            }
            sum = &sum + &(&k.dagger() * k);
        }
    }
    let dev = (&sum - &Matrix::identity(dim)).max_abs();
    if dev > tol::DECOMP {
        return Err(Error::NotInstrument { deviation: dev });
    }
    Ok(())
}

fn outcome_target_dim(oc: &Outcome) -> Result<usize> {
    let rows = oc.kraus[0].rows;
    if oc.kraus.iter().any(|k| k.rows != rows) {
        return Err(Error::BadShape(
            "Kraus operators of one outcome must share their target dimension".into(),
        ));
    }
    Ok(rows)
}

fn branch_states(
    rho0: &Matrix,
    rho1: &Matrix,
    oc: &Outcome,
    party: Party,
    da: usize,
    db: usize,
) -> Result<(Matrix, Matrix, usize, usize)> {
    let rows = outcome_target_dim(oc)?;
    let (na, nb) = match party {
        Party::Output => (rows, db),
        Party::Ancilla => (da, rows),
    };
    let n = na * nb;
    let mut out0 = Matrix::zeros(n, n);
    let mut out1 = Matrix::zeros(n, n);
    for k in &oc.kraus {
        let op = match party {
            Party::Output => kron(k, &Matrix::identity(db)),
            Party::Ancilla => kron(&Matrix::identity(da), k),
        };
        let opd = op.dagger();
        out0 = &out0 + &(&(&op * rho0) * &opd);
        out1 = &out1 + &(&(&op * rho1) * &opd);
    }
    Ok((out0, out1, na, nb))
}

fn walk(node: &ProtocolNode, rho0: Matrix, rho1: Matrix, da: usize, db: usize) -> Result<f64> {
    match node {
        ProtocolNode::Decide { guess } => {
            let rho = match guess {
                0 => &rho0,
                1 => &rho1,
                g => return Err(Error::BadParam(format!("decision guess must be 0 or 1, got {g}"))),
            };
            Ok(0.5 * rho.trace().re)
        }
        ProtocolNode::Measure { party, outcomes } => {
            let dim = match party {
                Party::Output => da,
                Party::Ancilla => db,
            };
            check_instrument(outcomes, dim)?;
            let mut p = 0.0;
            for oc in outcomes {
                if oc.kraus.is_empty() {
                    continue;
                }
                let (b0, b1, na, nb) = branch_states(&rho0, &rho1, oc, *party, da, db)?;
                if 0.5 * (b0.trace().re + b1.trace().re) < tol::PRUNE {
                    continue;
                }
                p += walk(&oc.next, b0, b1, na, nb)?;
            }
            Ok(p)
        }
    }
}

/// Exact success probability of a protocol on the conditional states
/// `ρ_a = (Φ_a ⊗ 1)(input)`, each occurring with probability 1/2.
pub fn evaluate(tree: &ProtocolTree, rho0: &Matrix, rho1: &Matrix) -> Result<f64> {
    let n = tree.shape.total();
    if rho0.rows != n || !rho0.is_square() || rho1.rows != n || !rho1.is_square() {
        return Err(Error::BadShape(format!(
            "conditional states must be {n}x{n} for this protocol"
        )));
    }
    walk(&tree.root, rho0.clone(), rho1.clone(), tree.shape.dim_a, tree.shape.dim_b)
}

/// Number of root-to-leaf transcripts (decision leaves) in a protocol tree.
pub fn transcript_count(node: &ProtocolNode) -> usize {
    match node {
        ProtocolNode::Decide { .. } => 1,
        ProtocolNode::Measure { outcomes, .. } => {
            outcomes.iter().map(|oc| transcript_count(&oc.next)).sum()
        }
    }
}

fn gram(ops: &[Matrix]) -> Matrix {
    let n = ops[0].cols;
    let mut g = Matrix::zeros(n, n);
    for m in ops {
        g = &g + &(&m.dagger() * m);
    }
    g
}

fn collect_povm(
    node: &ProtocolNode,
    a_ops: &[Matrix],
    b_ops: &[Matrix],
    da: usize,
    db: usize,
    povm: &mut [Matrix; 2],
) -> Result<()> {
    match node {
        ProtocolNode::Decide { guess } => {
            if *guess > 1 {
                return Err(Error::BadParam(format!(
                    "decision guess must be 0 or 1, got {guess}"
                )));
            }
            povm[*guess] = &povm[*guess] + &kron(&gram(a_ops), &gram(b_ops));
            Ok(())
        }
        ProtocolNode::Measure { party, outcomes } => {
            let dim = match party {
                Party::Output => da,
                Party::Ancilla => db,
            };
            check_instrument(outcomes, dim)?;
            for oc in outcomes {
                if oc.kraus.is_empty() {
                    continue;
                }
                let rows = outcome_target_dim(oc)?;
                match party {
                    Party::Output => {
                        let next: Vec<Matrix> = a_ops
                            .iter()
                            .flat_map(|a| oc.kraus.iter().map(move |k| k * a))
                            .collect();
                        collect_povm(&oc.next, &next, b_ops, rows, db, povm)?;
                    }
                    Party::Ancilla => {
                        let next: Vec<Matrix> = b_ops
                            .iter()
                            .flat_map(|b| oc.kraus.iter().map(move |k| k * b))
                            .collect();
                        collect_povm(&oc.next, a_ops, &next, da, rows, povm)?;
                    }
                }
            }
            Ok(())
        }
    }
}

/// The two-outcome POVM `{P0, P1}` a protocol induces on the initial joint
/// space. Because all operations are local, each element is a sum of product
/// operators. Checks that the elements add to the identity.
pub fn induced_povm(tree: &ProtocolTree) -> Result<(Matrix, Matrix)> {
    let (da, db) = (tree.shape.dim_a, tree.shape.dim_b);
    let n = da * db;
    let mut povm = [Matrix::zeros(n, n), Matrix::zeros(n, n)];
    collect_povm(
        &tree.root,
        &[Matrix::identity(da)],
        &[Matrix::identity(db)],
        da,
        db,
        &mut povm,
    )?;
    let dev = (&(&povm[0] + &povm[1]) - &Matrix::identity(n)).max_abs();
    if dev > 1e-8 {
        return Err(Error::NotInstrument { deviation: dev });
    }
    let [p0, p1] = povm;
    Ok((p0, p1))
}

// ---------------------------------------------------------------------------
// zero-diagonal bases and the Walgate construction

fn rotate(a: &mut Matrix, v: &mut Matrix, i: usize, j: usize, x: [Complex64; 2], y: [Complex64; 2]) {
    let n = a.rows;
    for r in 0..n {
        let ti = a[(r, i)];
        let tj = a[(r, j)];
        a[(r, i)] = ti * x[0] + tj * x[1];
        a[(r, j)] = ti * y[0] + tj * y[1];
    }
    for c in 0..n {
        let ti = a[(i, c)];
        let tj = a[(j, c)];
        a[(i, c)] = x[0].conj() * ti + x[1].conj() * tj;
        a[(j, c)] = y[0].conj() * ti + y[1].conj() * tj;
    }
    for r in 0..n {
        let ti = v[(r, i)];
        let tj = v[(r, j)];
        v[(r, i)] = ti * x[0] + tj * x[1];
        v[(r, j)] = ti * y[0] + tj * y[1];
    }
}

/// Stable root pair of `a τ² + b τ + c = 0` with real coefficients and
/// positive discriminant, via the q-formula.
fn quadratic_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let q = -(b + b.signum() * disc.sqrt()) / 2.0;
    (q / a, c / q)
}

/// Largest and smallest of `f(k)` over the active indices, with their
/// positions.
fn arg_extrema(active: &[usize], f: impl Fn(usize) -> f64) -> ((usize, f64), (usize, f64)) {
    let mut max = (active[0], f64::NEG_INFINITY);
    let mut min = (active[0], f64::INFINITY);
    for &k in active {
        let v = f(k);
        if v > max.1 {
            max = (k, v);
        }
        if v < min.1 {
            min = (k, v);
        }
    }
    (max, min)
}

/// A unitary `V` such that `V† T V` has zero diagonal, for traceless `T`.
///
/// Works by 2×2 rotations on the active indices: first make the active
/// diagonal real (mixing an entry of positive imaginary part with one of
/// negative), then zero one entry exactly by mixing a positive diagonal
/// entry with a negative one — the trace condition guarantees such a
/// straddling pair exists — and retire it. Runs in `O(n)` rotations.
pub fn zero_diagonal_basis(t: &Matrix) -> Result<Matrix> {
    if !t.is_square() {
        return Err(Error::BadShape("zero-diagonal basis needs a square matrix".into()));
    }
    let n = t.rows;
    let scale = 1.0 + t.max_abs();
    let tr = t.trace().norm();
    if tr > tol::DECOMP * scale {
        return Err(Error::NotTraceless { magnitude: tr });
    }
    let mut a = t.clone();
    let mut v = Matrix::identity(n);
    let eps = 1e-13 * scale;
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 1 {
        // Make the active diagonal real. Each pass realifies at least one
        // more entry, so this terminates well before the iteration cap.
        for _ in 0..4 * n {
            let ((i, mx), (j, mn)) = arg_extrema(&active, |k| a[(k, k)].im);
            if mx <= eps || mn >= -eps {
                break;
            }
            let cross = (a[(i, j)] + a[(j, i)]).im;
            let (r1, r2) = quadratic_roots(mn, cross, mx);
            let tau = if r1.abs() <= r2.abs() { r1 } else { r2 };
            let c = 1.0 / (1.0 + tau * tau).sqrt();
            let s = tau * c;
            let (cc, ss) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
            rotate(&mut a, &mut v, i, j, [cc, ss], [-ss, cc]);
        }

        // Zero one diagonal entry by mixing a positive one with a negative.
        let ((i, mx), (j, mn)) = arg_extrema(&active, |k| a[(k, k)].re);
        if mx <= eps || mn >= -eps {
            // No straddling pair left: all remaining entries are zero (up to
            // eps), or the trace budget is exhausted by rounding. The final
            // residual check below decides which.
            break;
        }
        let p = a[(i, j)];
        let q = a[(j, i)];
        let phi = (-(p + q).im).atan2((p - q).re);
        let ephi = Complex64::from_polar(1.0, phi);
        let gamma = (ephi * p + ephi.conj() * q).re;
        let (r1, r2) = quadratic_roots(mn, gamma, mx);
        let tau = if r1 >= 0.0 { r1 } else { r2 };
        let c = 1.0 / (1.0 + tau * tau).sqrt();
        let s = tau * c;
        let x = [Complex64::new(c, 0.0), ephi * s];
        let y = [Complex64::new(-s, 0.0), ephi * c];
        rotate(&mut a, &mut v, i, j, x, y);
        active.retain(|&k| k != i);
    }

    let worst = (0..n).map(|k| a[(k, k)].norm()).fold(0.0, f64::max);
    if worst > 1e-8 * scale {
        return Err(Error::EigFail);
    }
    Ok(v)
}

fn conditional(psi: &[Complex64], e: &[Complex64], da: usize, db: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); db];
    for ai in 0..da {
        let ev = e[ai].conj();
        for b in 0..db {
            out[b] += ev * psi[ai * db + b];
        }
    }
    out
}

/// Negligible amplitude for a branch of a pure-state protocol.
const DEAD_BRANCH: f64 = 1e-9;

/// Perfect one-way protocol for two orthogonal pure states on `A ⊗ B`:
/// the first party measures in a basis in which `Tr_B |ψ0⟩⟨ψ1|` has zero
/// diagonal, the second distinguishes the resulting orthogonal conditionals.
pub fn walgate_protocol(
    psi0: &[Complex64],
    psi1: &[Complex64],
    shape: BipartiteShape,
) -> Result<ProtocolTree> {
    let (da, db) = (shape.dim_a, shape.dim_b);
    if psi0.len() != shape.total() || psi1.len() != shape.total() {
        return Err(Error::BadShape("state length does not match the declared shape".into()));
    }
    for psi in [psi0, psi1] {
        if (vnorm(psi) - 1.0).abs() > tol::DECOMP {
            return Err(Error::BadParam("protocol states must be normalised".into()));
        }
    }
    let overlap = vdot(psi0, psi1).norm();
    if overlap > tol::DECOMP {
        return Err(Error::NotOrthogonal { magnitude: overlap });
    }

    // M[r, c] = Σ_b ψ0[(r,b)] conj(ψ1[(c,b)]); Tr M = ⟨ψ1|ψ0⟩ = 0.
    let m = Matrix::from_fn(da, da, |r, c| {
        (0..db).map(|b| psi0[r * db + b] * psi1[c * db + b].conj()).sum()
    });
    let v = zero_diagonal_basis(&m)?;

    let mut outcomes = Vec::with_capacity(da);
    for k in 0..da {
        let e = v.col(k);
        let ka = Matrix::from_fn(1, da, |_, c| e[c].conj());
        let b0 = conditional(psi0, &e, da, db);
        let b1 = conditional(psi1, &e, da, db);
        let (n0, n1) = (vnorm(&b0), vnorm(&b1));
        let next = if n0 <= DEAD_BRANCH && n1 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 0 }
        } else if n0 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 1 }
        } else if n1 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 0 }
        } else {
            // ⟨b1|b0⟩ = (V† M V)[k,k] = 0, so projecting on b0 is decisive.
            let bh0 = vnormalize(&b0);
            let k0 = Matrix::from_fn(1, db, |_, c| bh0[c].conj());
            let complement = &Matrix::identity(db) - &outer(&bh0);
            ProtocolNode::Measure {
                party: Party::Ancilla,
                outcomes: vec![
                    Outcome { kraus: vec![k0], next: ProtocolNode::Decide { guess: 0 } },
                    Outcome { kraus: vec![complement], next: ProtocolNode::Decide { guess: 1 } },
                ],
            }
        };
        outcomes.push(Outcome { kraus: vec![ka], next });
    }
    Ok(ProtocolTree { root: ProtocolNode::Measure { party: Party::Output, outcomes }, shape })
}

fn apply_block(a: &Matrix, psi: &[Complex64], dz: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.rows * dz];
    for r in 0..a.rows {
        for c in 0..a.cols {
            let av = a[(r, c)];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for z in 0..dz {
                out[r * dz + z] += av * psi[c * dz + z];
            }
        }
    }
    out
}

/// Perfect protocol for flagged channel pairs on a pure input `ψ` on
/// `X ⊗ Z`: read the flag, then discriminate the pure per-flag conditionals
/// `(A_{a,j} ⊗ 1)ψ` with the Walgate construction. Fails with
/// `not_perfectly_discriminable` when some flag leaves overlapping
/// conditionals.
pub fn flagged_protocol(
    pair: &ChannelPair,
    input: &[Complex64],
    dim_z: usize,
) -> Result<ProtocolTree> {
    let (a0, a1) = pair.flagged_blocks().ok_or_else(|| {
        Error::BadFamily("flag-first protocol needs a flagged family".into())
    })?;
    if input.len() != pair.dim_in() * dim_z {
        return Err(Error::BadShape("input state does not match the channel input".into()));
    }
    if (vnorm(input) - 1.0).abs() > tol::DECOMP {
        return Err(Error::BadParam("input state must be normalised".into()));
    }
    let n = a0.len();
    let block = a0[0].rows;
    let mut outcomes = Vec::with_capacity(n);
    for j in 0..n {
        let psi0 = apply_block(&a0[j], input, dim_z);
        let psi1 = apply_block(&a1[j], input, dim_z);
        let (n0, n1) = (vnorm(&psi0), vnorm(&psi1));
        let next = if n0 <= DEAD_BRANCH && n1 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 0 }
        } else if n0 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 1 }
        } else if n1 <= DEAD_BRANCH {
            ProtocolNode::Decide { guess: 0 }
        } else {
            let overlap = vdot(&psi1, &psi0).norm() / (n0 * n1);
            if overlap > tol::DECOMP {
                return Err(Error::NotPerfectlyDiscriminable(format!(
                    "flag {j} leaves conditionals with overlap {overlap:.3e}"
                )));
            }
            let h0: Vec<Complex64> = psi0.iter().map(|z| z / n0).collect();
            let h1: Vec<Complex64> = psi1.iter().map(|z| z / n1).collect();
            walgate_protocol(&h0, &h1, BipartiteShape::new(block, dim_z))?.root
        };
        // Flag projector as a rectangular contraction onto block j.
        let mut kf = Matrix::zeros(block, n * block);
        for r in 0..block {
            kf[(r, j * block + r)] = Complex64::new(1.0, 0.0);
        }
        outcomes.push(Outcome { kraus: vec![kf], next });
    }
    Ok(ProtocolTree {
        root: ProtocolNode::Measure { party: Party::Output, outcomes },
        shape: BipartiteShape::new(n * block, dim_z),
    })
}

/// The three-message protocol for binary channel pairs fed half of a
/// maximally entangled state. Read the flag `j`; the ancilla party applies
/// the entrywise conjugate of `U_j` (undoing the transpose the entangled
/// input imprinted) and measures in the computational basis, reporting which
/// half of the basis it saw; the output party measures the outcome qubit and
/// guesses 0 exactly when the bits agree. Succeeds with certainty for any
/// unitaries.
pub fn random_binary_protocol(pair: &ChannelPair) -> Result<ProtocolTree> {
    let unitaries = pair.binary_unitaries().ok_or_else(|| {
        Error::BadFamily("binary protocol needs a random-binary or qubit-example family".into())
    })?;
    let d = pair.dim_in();
    let n = unitaries.len();
    let mut flag_outcomes = Vec::with_capacity(n);
    for (j, u) in unitaries.iter().enumerate() {
        let uc = u.conj();
        let mut bit_outcomes = Vec::with_capacity(2);
        for cbit in 0..2 {
            let range = if cbit == 0 { 0..d / 2 } else { d / 2..d };
            let kraus: Vec<Matrix> = range
                .map(|m| Matrix::from_fn(1, d, |_, c| uc[(m, c)]))
                .collect();
            let mut qubit_outcomes = Vec::with_capacity(2);
            for b in 0..2 {
                let kb = Matrix::from_fn(1, 2, |_, c| {
                    Complex64::new(if c == b { 1.0 } else { 0.0 }, 0.0)
                });
                qubit_outcomes.push(Outcome {
                    kraus: vec![kb],
                    next: ProtocolNode::Decide { guess: usize::from(b != cbit) },
                });
            }
            bit_outcomes.push(Outcome {
                kraus,
                next: ProtocolNode::Measure { party: Party::Output, outcomes: qubit_outcomes },
            });
        }
        let mut kf = Matrix::zeros(2, 2 * n);
        kf[(0, 2 * j)] = Complex64::new(1.0, 0.0);
        kf[(1, 2 * j + 1)] = Complex64::new(1.0, 0.0);
        flag_outcomes.push(Outcome {
            kraus: vec![kf],
            next: ProtocolNode::Measure { party: Party::Ancilla, outcomes: bit_outcomes },
        });
    }
    Ok(ProtocolTree {
        root: ProtocolNode::Measure { party: Party::Output, outcomes: flag_outcomes },
        shape: BipartiteShape::new(2 * n, d),
    })
}

// ---------------------------------------------------------------------------
// discrimination instances

/// A channel pair together with a pure input on `X ⊗ Z`.
#[derive(Clone, Debug)]
pub struct DiscriminationInstance {
    pub pair: ChannelPair,
    pub input: Vec<Complex64>,
    pub dim_z: usize,
}

impl DiscriminationInstance {
    pub fn new(pair: ChannelPair, input: Vec<Complex64>, dim_z: usize) -> Result<Self> {
        if input.len() != pair.dim_in() * dim_z {
            return Err(Error::BadShape(format!(
                "input has length {}, expected {}",
                input.len(),
                pair.dim_in() * dim_z
            )));
        }
        if (vnorm(&input) - 1.0).abs() > tol::DECOMP {
            return Err(Error::BadParam("instance input must be normalised".into()));
        }
        Ok(DiscriminationInstance { pair, input, dim_z })
    }

    /// The standard instance: half of a maximally entangled state through
    /// the channel.
    pub fn maximally_entangled(pair: ChannelPair) -> Result<Self> {
        let d = pair.dim_in();
        DiscriminationInstance::new(pair, maximally_entangled(d), d)
    }

    /// `ρ_a = (Φ_a ⊗ 1)(|ψ⟩⟨ψ|)`.
    pub fn conditional_states(&self) -> Result<(Matrix, Matrix)> {
        let rho = outer(&self.input);
        Ok((
            self.pair.phi0.apply_extended(&rho, self.dim_z)?,
            self.pair.phi1.apply_extended(&rho, self.dim_z)?,
        ))
    }

    pub fn success_probability(&self, tree: &ProtocolTree) -> Result<f64> {
        if tree.shape.dim_a != self.pair.dim_out() || tree.shape.dim_b != self.dim_z {
            return Err(Error::BadShape("protocol shape does not match the instance".into()));
        }
        let (rho0, rho1) = self.conditional_states()?;
        evaluate(tree, &rho0, &rho1)
    }
}
