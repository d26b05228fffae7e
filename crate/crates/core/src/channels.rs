//! Channels, channel pairs and the standard discrimination families.
//!
//! A [`Channel`] is a completely positive trace-preserving map given by Kraus
//! operators. Discrimination instances are [`ChannelPair`]s tagged with the
//! [`Family`] they were constructed from; the tag is what lets the norm and
//! protocol layers pick specialised objectives, analytic values and perfect
//! discriminators where they exist.
//!
//! Conventions used throughout:
//!
//! * Flagged outputs are ordered flag-first: the output space of a flagged
//!   channel is `C^n ⊗ X'` and basis index `(j, y)` flattens to `j*dim + y`.
//! * Choi matrices live on `Y ⊗ X` (output factor first):
//!   `J(Φ) = Σ_{jk} Φ(|j⟩⟨k|) ⊗ |j⟩⟨k|`.
//! * Differences `Φ0 - Φ1` are handled as signed Kraus lists —
//!   the `diff_*` methods on [`ChannelPair`] — rather than a dedicated map
//!   type.
//!
//! Channel-spec files are JSON documents
//! `{"dimIn": n, "dimOut": m, "kraus": [[[[re, im], ...], ...], ...]}`;
//! a pair file carries two of them along with the family tag, so a pair
//! written to disk reconstructs bit-for-bit.

use crate::error::{Error, Result};
use crate::haar::HaarSampler;
use crate::linalg::{inv_sqrt_psd, BipartiteShape, Matrix};
use crate::tol;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Eigenvalues of a Choi matrix below this are treated as zero when
/// extracting Kraus operators.
const KRAUS_CUTOFF: f64 = 1e-12;

/// A completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<Matrix>,
    pub dim_in: usize,
    pub dim_out: usize,
}

/// Choi matrix of a map from `X` to `Y`, stored on `Y ⊗ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub matrix: Matrix,
    /// `dim_a` is the output dimension, `dim_b` the input dimension.
    pub shape: BipartiteShape,
}

impl Channel {
    /// Build a channel from Kraus operators, checking trace preservation
    /// `Σ K† K = 1`.
    pub fn new(kraus: Vec<Matrix>) -> Result<Channel> {
        if kraus.is_empty() {
            return Err(Error::BadParam("a channel needs at least one Kraus operator".into()));
        }
        let dim_in = kraus[0].cols;
        let dim_out = kraus[0].rows;
        for k in &kraus {
            if k.cols != dim_in || k.rows != dim_out {
                return Err(Error::BadShape(
                    "Kraus operators must share their dimensions".into(),
                ));
            }
        }
        let mut sum = Matrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = &sum + &(&k.dagger() * k);
        }
        let dev = (&sum - &Matrix::identity(dim_in)).max_abs();
        if dev > tol::DECOMP {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(Channel { kraus, dim_in, dim_out })
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    fn terms(&self) -> Vec<(f64, &Matrix)> {
        self.kraus.iter().map(|k| (1.0, k)).collect()
    }

    /// `Φ(ρ) = Σ K ρ K†`.
    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        kraus_apply_extended(&self.terms(), rho, 1, self.dim_in, self.dim_out)
    }

    /// `(Φ ⊗ 1_Z)(ρ)` for `ρ` on `X ⊗ Z`.
    pub fn apply_extended(&self, rho: &Matrix, dim_z: usize) -> Result<Matrix> {
        kraus_apply_extended(&self.terms(), rho, dim_z, self.dim_in, self.dim_out)
    }

    /// Adjoint map `Φ*(M) = Σ K† M K` (Heisenberg picture).
    pub fn adjoint_apply(&self, m: &Matrix) -> Result<Matrix> {
        kraus_adjoint_extended(&self.terms(), m, 1, self.dim_in, self.dim_out)
    }

    /// `(Φ* ⊗ 1_Z)(M)` for `M` on `Y ⊗ Z`.
    pub fn adjoint_apply_extended(&self, m: &Matrix, dim_z: usize) -> Result<Matrix> {
        kraus_adjoint_extended(&self.terms(), m, dim_z, self.dim_in, self.dim_out)
    }

    pub fn choi(&self) -> ChoiMatrix {
        kraus_choi(&self.terms(), self.dim_in, self.dim_out)
    }
}

fn check_extended_shape(rho: &Matrix, dim: usize, what: &str) -> Result<()> {
    if !rho.is_square() || rho.rows != dim {
        return Err(Error::BadShape(format!(
            "{what} is {}x{}, expected {dim}x{dim}",
            rho.rows, rho.cols
        )));
    }
    Ok(())
}

fn kraus_apply_extended(
    terms: &[(f64, &Matrix)],
    rho: &Matrix,
    dz: usize,
    dx: usize,
    dy: usize,
) -> Result<Matrix> {
    let din = dx * dz;
    let dout = dy * dz;
    check_extended_shape(rho, din, "input operator")?;
    let mut out = Matrix::zeros(dout, dout);
    for (sign, k) in terms {
        // tmp = (K ⊗ 1) ρ
        let mut tmp = Matrix::zeros(dout, din);
        for y in 0..dy {
            for x in 0..dx {
                let kv = k[(y, x)];
                if kv.norm_sqr() == 0.0 {
                    continue;
                }
                for z in 0..dz {
                    let rt = y * dz + z;
                    let rs = x * dz + z;
                    for c in 0..din {
                        tmp[(rt, c)] += kv * rho[(rs, c)];
                    }
                }
            }
        }
        // out += sign · tmp (K ⊗ 1)†
        for y in 0..dy {
            for x in 0..dx {
                let kv = k[(y, x)].conj() * *sign;
                if kv.norm_sqr() == 0.0 {
                    continue;
                }
                for z in 0..dz {
                    let ct = y * dz + z;
                    let cs = x * dz + z;
                    for r in 0..dout {
                        out[(r, ct)] += tmp[(r, cs)] * kv;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn kraus_adjoint_extended(
    terms: &[(f64, &Matrix)],
    m: &Matrix,
    dz: usize,
    dx: usize,
    dy: usize,
) -> Result<Matrix> {
    let din = dx * dz;
    let dout = dy * dz;
    check_extended_shape(m, dout, "measurement operator")?;
    let mut out = Matrix::zeros(din, din);
    for (sign, k) in terms {
        // tmp = (K† ⊗ 1) M
        let mut tmp = Matrix::zeros(din, dout);
        for y in 0..dy {
            for x in 0..dx {
                let kv = k[(y, x)].conj();
                if kv.norm_sqr() == 0.0 {
                    continue;
                }
                for z in 0..dz {
                    let rt = x * dz + z;
                    let rs = y * dz + z;
                    for c in 0..dout {
                        tmp[(rt, c)] += kv * m[(rs, c)];
                    }
                }
            }
        }
        // out += sign · tmp (K ⊗ 1)
        for y in 0..dy {
            for x in 0..dx {
                let kv = k[(y, x)] * *sign;
                if kv.norm_sqr() == 0.0 {
                    continue;
                }
                for z in 0..dz {
                    let ct = x * dz + z;
                    let cs = y * dz + z;
                    for r in 0..din {
                        out[(r, ct)] += tmp[(r, cs)] * kv;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn kraus_choi(terms: &[(f64, &Matrix)], dx: usize, dy: usize) -> ChoiMatrix {
    let dim = dx * dy;
    let mut j = Matrix::zeros(dim, dim);
    for (sign, k) in terms {
        // vec(K) on Y ⊗ X: component (y, x) is K[y, x].
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for y in 0..dy {
            for x in 0..dx {
                v[y * dx + x] = k[(y, x)];
            }
        }
        for r in 0..dim {
            if v[r].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..dim {
                j[(r, c)] += v[r] * v[c].conj() * *sign;
            }
        }
    }
    ChoiMatrix { matrix: j, shape: BipartiteShape::new(dy, dx) }
}

/// Extract Kraus operators from a Choi matrix by eigendecomposition, keeping
/// eigenvalues above `1e-12`.
pub fn kraus_from_choi(choi: &ChoiMatrix) -> Result<Vec<Matrix>> {
    let (dy, dx) = (choi.shape.dim_a, choi.shape.dim_b);
    if choi.matrix.rows != dy * dx {
        return Err(Error::BadShape("Choi matrix does not match its declared shape".into()));
    }
    let (vals, vecs) = crate::linalg::hermitian_eig(&choi.matrix)?;
    let scale = 1.0 + choi.matrix.max_abs();
    let mut kraus = Vec::new();
    for (i, &lambda) in vals.iter().enumerate() {
        if lambda < -tol::DECOMP * scale {
            return Err(Error::BadParam(format!(
                "Choi matrix is not positive semidefinite (eigenvalue {lambda:.3e})"
            )));
        }
        if lambda <= KRAUS_CUTOFF {
            continue;
        }
        let w = vecs.col(i);
        let amp = lambda.sqrt();
        kraus.push(Matrix::from_fn(dy, dx, |y, x| w[y * dx + x] * amp));
    }
    if kraus.is_empty() {
        return Err(Error::BadParam("Choi matrix has no support above the cutoff".into()));
    }
    Ok(kraus)
}

// ---------------------------------------------------------------------------
// families

/// The construction a [`ChannelPair`] came from. The tag gates which
/// specialised objectives, analytic values and protocols apply.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    WernerHolevo { d: usize },
    Flagged { n_flags: usize },
    WeylFlagged { d: usize },
    RandomBinary { d: usize, unitaries: Vec<Matrix> },
    QubitExample { variant: usize },
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::WernerHolevo { .. } => "werner-holevo",
            Family::Flagged { .. } => "flagged",
            Family::WeylFlagged { .. } => "weyl-flagged",
            Family::RandomBinary { .. } => "random-binary",
            Family::QubitExample { .. } => "qubit-example",
            Family::Custom => "custom",
        }
    }
}

/// A discrimination instance: two channels with the same input and output
/// spaces, each applied with probability 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPair {
    pub phi0: Channel,
    pub phi1: Channel,
    pub family: Family,
}

impl ChannelPair {
    pub fn new(phi0: Channel, phi1: Channel, family: Family) -> Result<ChannelPair> {
        if phi0.dim_in != phi1.dim_in || phi0.dim_out != phi1.dim_out {
            return Err(Error::BadShape(
                "the two channels of a pair must share input and output dimensions".into(),
            ));
        }
        Ok(ChannelPair { phi0, phi1, family })
    }

    pub fn dim_in(&self) -> usize {
        self.phi0.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.phi0.dim_out
    }

    fn diff_terms(&self) -> Vec<(f64, &Matrix)> {
        self.phi0
            .kraus
            .iter()
            .map(|k| (1.0, k))
            .chain(self.phi1.kraus.iter().map(|k| (-1.0, k)))
            .collect()
    }

    /// `(Φ0 - Φ1)(ρ)`.
    pub fn diff_apply(&self, rho: &Matrix) -> Result<Matrix> {
        kraus_apply_extended(&self.diff_terms(), rho, 1, self.dim_in(), self.dim_out())
    }

    /// `((Φ0 - Φ1) ⊗ 1_Z)(ρ)`.
    pub fn diff_apply_extended(&self, rho: &Matrix, dim_z: usize) -> Result<Matrix> {
        kraus_apply_extended(&self.diff_terms(), rho, dim_z, self.dim_in(), self.dim_out())
    }

    /// Adjoint of the difference map.
    pub fn diff_adjoint_apply(&self, m: &Matrix) -> Result<Matrix> {
        kraus_adjoint_extended(&self.diff_terms(), m, 1, self.dim_in(), self.dim_out())
    }

    pub fn diff_adjoint_apply_extended(&self, m: &Matrix, dim_z: usize) -> Result<Matrix> {
        kraus_adjoint_extended(&self.diff_terms(), m, dim_z, self.dim_in(), self.dim_out())
    }

    pub fn diff_choi(&self) -> ChoiMatrix {
        kraus_choi(&self.diff_terms(), self.dim_in(), self.dim_out())
    }

    /// For flagged families, the per-flag operator lists `(A_{0,j}, A_{1,j})`
    /// recovered from the block structure of the Kraus operators.
    pub fn flagged_blocks(&self) -> Option<(Vec<Matrix>, Vec<Matrix>)> {
        let n = match &self.family {
            Family::Flagged { n_flags } => *n_flags,
            Family::WeylFlagged { d } => d * d - 1,
            _ => return None,
        };
        let block = self.dim_out() / n;
        let slice = |ch: &Channel| -> Vec<Matrix> {
            ch.kraus
                .iter()
                .enumerate()
                .map(|(j, k)| {
                    Matrix::from_fn(block, ch.dim_in, |r, c| k[(j * block + r, c)])
                })
                .collect()
        };
        Some((slice(&self.phi0), slice(&self.phi1)))
    }

    /// For binary families, the unitary list defining the instance.
    pub fn binary_unitaries(&self) -> Option<Vec<Matrix>> {
        match &self.family {
            Family::RandomBinary { unitaries, .. } => Some(unitaries.clone()),
            Family::QubitExample { variant } => Some(qubit_example_unitaries(*variant)),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// constructors

/// The `d² - 1` non-identity Weyl (generalised Pauli) operators `X^a Z^b`,
/// ordered lexicographically in `(a, b)` with `(0,0)` skipped.
pub fn weyl_operators(d: usize) -> Vec<Matrix> {
    assert!(d >= 2, "weyl operators need d >= 2");
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut ops = Vec::with_capacity(d * d - 1);
    for a in 0..d {
        for b in 0..d {
            if a == 0 && b == 0 {
                continue;
            }
            let mut w = Matrix::zeros(d, d);
            for j in 0..d {
                let phase = omega * (b * j) as f64;
                w[((j + a) % d, j)] = Complex64::new(phase.cos(), phase.sin());
            }
            ops.push(w);
        }
    }
    ops
}

fn embed_flag_kraus(n_flags: usize, j: usize, a: &Matrix) -> Matrix {
    let mut k = Matrix::zeros(n_flags * a.rows, a.cols);
    for r in 0..a.rows {
        for c in 0..a.cols {
            k[(j * a.rows + r, c)] = a[(r, c)];
        }
    }
    k
}

/// Channel pair whose outputs carry a classical flag recording which Kraus
/// branch fired: `Φ_a(ρ) = Σ_j |j⟩⟨j| ⊗ A_{a,j} ρ A_{a,j}†`.
pub fn flagged_channels(a0: &[Matrix], a1: &[Matrix]) -> Result<ChannelPair> {
    if a0.is_empty() || a0.len() != a1.len() {
        return Err(Error::BadParam(
            "flagged channels need equal-length non-empty operator lists".into(),
        ));
    }
    let (rows, cols) = (a0[0].rows, a0[0].cols);
    for a in a0.iter().chain(a1.iter()) {
        if a.rows != rows || a.cols != cols {
            return Err(Error::BadShape("flag operators must share their dimensions".into()));
        }
    }
    let n = a0.len();
    let build = |list: &[Matrix]| -> Result<Channel> {
        Channel::new(
            list.iter()
                .enumerate()
                .map(|(j, a)| embed_flag_kraus(n, j, a))
                .collect(),
        )
    };
    ChannelPair::new(build(a0)?, build(a1)?, Family::Flagged { n_flags: n })
}

/// The flagged Weyl instance: `n = d² - 1` flags with `A_{0,j} = 1/√n` and
/// `A_{1,j} = W_j/√n`. Per-flag orthogonality makes it perfectly LOCC
/// discriminable even though single-copy strategies without entanglement do
/// badly as `d` grows.
pub fn weyl_flagged(d: usize) -> Result<ChannelPair> {
    if d < 2 {
        return Err(Error::BadParam(format!("weyl instance needs d >= 2, got {d}")));
    }
    let n = d * d - 1;
    let amp = 1.0 / (n as f64).sqrt();
    let a0: Vec<Matrix> = (0..n).map(|_| Matrix::identity(d).scale(amp)).collect();
    let a1: Vec<Matrix> = weyl_operators(d).iter().map(|w| w.scale(amp)).collect();
    let mut pair = flagged_channels(&a0, &a1)?;
    pair.family = Family::WeylFlagged { d };
    Ok(pair)
}

fn check_unitary(u: &Matrix, d: usize) -> Result<()> {
    if u.rows != d || u.cols != d {
        return Err(Error::BadShape(format!(
            "unitary is {}x{}, expected {d}x{d}",
            u.rows, u.cols
        )));
    }
    let dev = (&(&u.dagger() * u) - &Matrix::identity(d)).max_abs();
    if dev > tol::DECOMP {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

fn binary_pair_kraus(d: usize, unitaries: &[Matrix], swap: bool) -> Result<Channel> {
    let n = unitaries.len();
    let amp = 1.0 / (n as f64).sqrt();
    let mut kraus = Vec::with_capacity(n * d);
    for (j, u) in unitaries.iter().enumerate() {
        for m in 0..d {
            // One Kraus operator per (flag, measured index): it sends the
            // amplitude row m of U_j to the output qubit level 0 or 1
            // depending on which half of the basis m falls in.
            let mut bit = if m < d / 2 { 0 } else { 1 };
            if swap {
                bit = 1 - bit;
            }
            let mut k = Matrix::zeros(2 * n, d);
            for c in 0..d {
                k[(2 * j + bit, c)] = u[(m, c)] * amp;
            }
            kraus.push(k);
        }
    }
    Channel::new(kraus)
}

/// Random binary channels: measure `U_j ρ U_j†` against the first or second
/// half of the basis and record a one-bit outcome next to the flag `j`.
/// `Φ0` reports the outcome faithfully, `Φ1` flips it.
pub fn random_binary_channels(d: usize, unitaries: &[Matrix]) -> Result<ChannelPair> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::BadParam(format!(
            "random binary channels need an even dimension >= 2, got {d}"
        )));
    }
    if unitaries.is_empty() {
        return Err(Error::BadParam("need at least one unitary".into()));
    }
    for u in unitaries {
        check_unitary(u, d)?;
    }
    let phi0 = binary_pair_kraus(d, unitaries, false)?;
    let phi1 = binary_pair_kraus(d, unitaries, true)?;
    ChannelPair::new(
        phi0,
        phi1,
        Family::RandomBinary { d, unitaries: unitaries.to_vec() },
    )
}

/// The unitaries of the two hand-picked qubit instances: `1` and
/// `(σx+σz)/√2` for the two-unitary variant, plus `(σy+σz)/√2` for the
/// three-unitary variant.
pub fn qubit_example_unitaries(variant: usize) -> Vec<Matrix> {
    let s = 1.0 / 2f64.sqrt();
    let u2 = Matrix::from_rows(&[
        vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
    ]);
    let u3 = Matrix::from_rows(&[
        vec![Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
        vec![Complex64::new(0.0, s), Complex64::new(-s, 0.0)],
    ]);
    let mut us = vec![Matrix::identity(2), u2];
    if variant == 3 {
        us.push(u3);
    }
    us
}

/// The qubit random-binary instances with two or three fixed unitaries.
pub fn qubit_example(variant: usize) -> Result<ChannelPair> {
    if variant != 2 && variant != 3 {
        return Err(Error::BadParam(format!(
            "qubit example comes in variants 2 and 3, got {variant}"
        )));
    }
    let mut pair = random_binary_channels(2, &qubit_example_unitaries(variant))?;
    pair.family = Family::QubitExample { variant };
    Ok(pair)
}

/// Projectors onto the symmetric and antisymmetric subspaces of `C^d ⊗ C^d`:
/// `S = (1 + F)/2`, `R = (1 - F)/2` with `F` the swap.
pub fn sym_antisym_projectors(d: usize) -> (Matrix, Matrix) {
    let dim = d * d;
    let mut swap = Matrix::zeros(dim, dim);
    for i in 0..d {
        for j in 0..d {
            swap[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
        }
    }
    let id = Matrix::identity(dim);
    let s = (&id + &swap).scale(0.5);
    let r = (&id - &swap).scale(0.5);
    (s, r)
}

/// The Werner-Holevo pair `Φ0(X) = (Tr(X)1 + Xᵀ)/(d+1)`,
/// `Φ1(X) = (Tr(X)1 - Xᵀ)/(d-1)`, built by extracting Kraus operators from
/// the (anti)symmetric-projector Choi matrices `2S/(d+1)` and `2R/(d-1)`.
pub fn werner_holevo(d: usize) -> Result<ChannelPair> {
    if d < 2 {
        return Err(Error::BadParam(format!("werner-holevo needs d >= 2, got {d}")));
    }
    let (s, r) = sym_antisym_projectors(d);
    let shape = BipartiteShape::new(d, d);
    let j0 = ChoiMatrix { matrix: s.scale(2.0 / (d as f64 + 1.0)), shape };
    let j1 = ChoiMatrix { matrix: r.scale(2.0 / (d as f64 - 1.0)), shape };
    let phi0 = Channel::new(kraus_from_choi(&j0)?)?;
    let phi1 = Channel::new(kraus_from_choi(&j1)?)?;
    ChannelPair::new(phi0, phi1, Family::WernerHolevo { d })
}

/// A Haar-flavoured random channel: draw `n_kraus` Ginibre blocks `G_i` and
/// normalise them into Kraus operators `K_i = G_i S^{-1/2}` with
/// `S = Σ G_i† G_i`, which makes `Σ K_i† K_i = 1` exactly.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    sampler: &mut HaarSampler,
) -> Result<Channel> {
    if dim_in == 0 || dim_out == 0 || n_kraus == 0 {
        return Err(Error::BadParam(
            "random channel needs positive dimensions and at least one Kraus operator".into(),
        ));
    }
    let blocks: Vec<Matrix> = (0..n_kraus).map(|_| sampler.ginibre(dim_out, dim_in)).collect();
    let mut s = Matrix::zeros(dim_in, dim_in);
    for g in &blocks {
        s = &s + &(&g.dagger() * g);
    }
    let w = inv_sqrt_psd(&s.hermitize())?;
    Channel::new(blocks.iter().map(|g| g * &w).collect())
}

// ---------------------------------------------------------------------------
// channel-spec files

#[derive(Serialize, Deserialize)]
struct ChannelDto {
    #[serde(rename = "dimIn")]
    dim_in: usize,
    #[serde(rename = "dimOut")]
    dim_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize, Default)]
struct ParamsDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitaries: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

#[derive(Serialize, Deserialize)]
struct PairDto {
    family: String,
    #[serde(default)]
    params: ParamsDto,
    phi0: ChannelDto,
    phi1: ChannelDto,
}

fn matrix_to_dto(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows)
        .map(|r| (0..m.cols).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_dto(rows: &[Vec<[f64; 2]>]) -> Result<Matrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::BadShape("empty matrix in spec file".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::BadShape("ragged matrix in spec file".into()));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

fn channel_to_dto(ch: &Channel) -> ChannelDto {
    ChannelDto {
        dim_in: ch.dim_in,
        dim_out: ch.dim_out,
        kraus: ch.kraus.iter().map(matrix_to_dto).collect(),
    }
}

fn channel_from_dto(dto: &ChannelDto) -> Result<Channel> {
    let kraus = dto
        .kraus
        .iter()
        .map(|k| matrix_from_dto(k))
        .collect::<Result<Vec<_>>>()?;
    let ch = Channel::new(kraus)?;
    if ch.dim_in != dto.dim_in || ch.dim_out != dto.dim_out {
        return Err(Error::BadShape(format!(
            "spec file declares {}->{} but Kraus operators are {}->{}",
            dto.dim_in, dto.dim_out, ch.dim_in, ch.dim_out
        )));
    }
    Ok(ch)
}

pub fn channel_to_json(ch: &Channel) -> String {
    serde_json::to_string_pretty(&channel_to_dto(ch)).expect("channel serialization")
}

pub fn channel_from_json(text: &str) -> Result<Channel> {
    let dto: ChannelDto = serde_json::from_str(text)?;
    channel_from_dto(&dto)
}

pub fn pair_to_json(pair: &ChannelPair) -> String {
    let params = match &pair.family {
        Family::WernerHolevo { d } | Family::WeylFlagged { d } => {
            ParamsDto { d: Some(*d), ..Default::default() }
        }
        Family::Flagged { n_flags } => ParamsDto { n: Some(*n_flags), ..Default::default() },
        Family::RandomBinary { d, unitaries } => ParamsDto {
            d: Some(*d),
            unitaries: Some(unitaries.iter().map(matrix_to_dto).collect()),
            ..Default::default()
        },
        Family::QubitExample { variant } => ParamsDto { n: Some(*variant), ..Default::default() },
        Family::Custom => ParamsDto::default(),
    };
    let dto = PairDto {
        family: pair.family.name().to_string(),
        params,
        phi0: channel_to_dto(&pair.phi0),
        phi1: channel_to_dto(&pair.phi1),
    };
    serde_json::to_string_pretty(&dto).expect("pair serialization")
}

pub fn pair_from_json(text: &str) -> Result<ChannelPair> {
    let dto: PairDto = serde_json::from_str(text)?;
    let phi0 = channel_from_dto(&dto.phi0)?;
    let phi1 = channel_from_dto(&dto.phi1)?;
    let family = match dto.family.as_str() {
        "werner-holevo" => Family::WernerHolevo {
            d: dto.params.d.unwrap_or(phi0.dim_in),
        },
        "flagged" => {
            let n = dto
                .params
                .n
                .ok_or_else(|| Error::BadParam("flagged pair spec needs params.n".into()))?;
            Family::Flagged { n_flags: n }
        }
        "weyl-flagged" => Family::WeylFlagged {
            d: dto.params.d.unwrap_or(phi0.dim_in),
        },
        "random-binary" => {
            let mats = dto.params.unitaries.as_ref().ok_or_else(|| {
                Error::BadParam("random-binary pair spec needs params.unitaries".into())
            })?;
            let d = dto.params.d.unwrap_or(phi0.dim_in);
            let unitaries = mats
                .iter()
                .map(|m| matrix_from_dto(m))
                .collect::<Result<Vec<_>>>()?;
            for u in &unitaries {
                check_unitary(u, d)?;
            }
            Family::RandomBinary { d, unitaries }
        }
        "qubit-example" => {
            let variant = dto
                .params
                .n
                .ok_or_else(|| Error::BadParam("qubit-example pair spec needs params.n".into()))?;
            if variant != 2 && variant != 3 {
                return Err(Error::BadParam(format!(
                    "qubit example comes in variants 2 and 3, got {variant}"
                )));
            }
            Family::QubitExample { variant }
        }
        "custom" => Family::Custom,
        other => return Err(Error::BadFamily(format!("unknown family '{other}'"))),
    };
    ChannelPair::new(phi0, phi1, family)
}

pub fn write_pair_spec(pair: &ChannelPair, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, pair_to_json(pair))?;
    Ok(())
}

pub fn read_pair_spec(path: &std::path::Path) -> Result<ChannelPair> {
    let text = std::fs::read_to_string(path)?;
    pair_from_json(&text)
}
