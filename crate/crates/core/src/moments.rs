//! Moment matrices of Gaussian-evolved Fock states.
//!
//! `σ^(t)` holds `⟨a_{i1}..a_{it} a†_{j1}..a†_{jt}⟩` (ladder basis, `n^t × n^t`), and `Λ^(t)`
//! holds `⟨r_{i1}..r_{it} r_{j1}..r_{jt}⟩` (quadrature basis, `(2n)^t × (2n)^t`). Composite
//! indices are row-major: `(i, j) ↦ i * d + j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ComplexMatrixJson;
use crate::linalg::{self, CMat, RMat, C64, I, ONE, ZERO};
use crate::symplectic::{PassiveUnitary, SymplecticMatrix};

/// Longest ladder word accepted by [`fock_expectation`].
pub const MAX_WORD: usize = 8;

/// Occupation numbers of a Fock state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockVector(Vec<u32>);

impl FockVector {
    pub fn new(occ: Vec<u32>) -> Self {
        Self(occ)
    }

    pub fn vacuum(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn constant(n: usize, b: u32) -> Self {
        Self(vec![b; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn f_max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn l1(&self) -> u64 {
        self.0.iter().map(|&v| v as u64).sum()
    }

    pub fn sorted(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_unstable();
        Self(v)
    }

    /// Comma-separated encoding, e.g. `1,1,2`.
    pub fn encode(&self) -> String {
        self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl std::str::FromStr for FockVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Invalid(format!("bad occupation {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// A single `a_m` or `a†_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn a(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn ad(mode: usize) -> Self {
        Self { mode, dagger: true }
    }
}

/// `⟨f| op_1 op_2 … op_k |f⟩`, computed exactly by acting on occupation integers.
pub fn fock_expectation(f: &FockVector, word: &[LadderOp]) -> Result<C64> {
    if word.len() > MAX_WORD {
        return Err(Error::WordTooLong(word.len()));
    }
    Ok(C64::new(diagonal_word_value(f.occupations(), word), 0.0))
}

fn diagonal_word_value(occ: &[u32], word: &[LadderOp]) -> f64 {
    let mut state: Vec<i64> = occ.iter().map(|&v| v as i64).collect();
    let mut amp = 1.0;
    for op in word.iter().rev() {
        let k = &mut state[op.mode];
        if op.dagger {
            *k += 1;
            amp *= (*k as f64).sqrt();
        } else {
            if *k == 0 {
                return 0.0;
            }
            amp *= (*k as f64).sqrt();
            *k -= 1;
        }
    }
    if state.iter().zip(occ).all(|(&a, &b)| a == b as i64) {
        amp
    } else {
        0.0
    }
}

/// Expands a product of quadratures `r_{i1} … r_{ik}` into ladder words.
///
/// Uses `x = (a + a†)/√2` and `p = i(a† − a)/√2`; quadrature index `i < n` is `x_i`, and
/// `n + i` is `p_i`.
pub fn quadrature_expansion(n: usize, indices: &[usize]) -> Vec<(C64, Vec<LadderOp>)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut terms: Vec<(C64, Vec<LadderOp>)> = vec![(ONE, Vec::with_capacity(indices.len()))];
    for &r in indices {
        let (mode, coeff_a, coeff_ad) = if r < n {
            (r, C64::new(h, 0.0), C64::new(h, 0.0))
        } else {
            (r - n, C64::new(0.0, -h), C64::new(0.0, h))
        };
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (c, w) in &terms {
            let mut wa = w.clone();
            wa.push(LadderOp::a(mode));
            next.push((c * coeff_a, wa));
            let mut wd = w.clone();
            wd.push(LadderOp::ad(mode));
            next.push((c * coeff_ad, wd));
        }
        terms = next;
    }
    terms
}

/// `⟨f| r_{i1} … r_{ik} |f⟩` via the ladder kernel.
pub fn fock_quadrature_expectation(f: &FockVector, indices: &[usize]) -> Result<C64> {
    if indices.len() > MAX_WORD {
        return Err(Error::WordTooLong(indices.len()));
    }
    let n = f.n();
    let mut acc = ZERO;
    for (c, w) in quadrature_expansion(n, indices) {
        let v = diagonal_word_value(f.occupations(), &w);
        if v != 0.0 {
            acc += c * v;
        }
    }
    Ok(acc)
}

/// Common access for σ and Λ moment matrices.
pub trait Moment: Sized + Clone {
    fn degree(&self) -> usize;
    fn n(&self) -> usize;
    fn entries(&self) -> &CMat;
    fn with_entries(&self, entries: CMat) -> Self;
    /// Whether the moment matrix is Hermitian (as opposed to SWAP-conjugate Hermitian).
    fn hermitian_symmetry(&self) -> bool;
}

/// Ladder-basis moment matrix `σ^(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMoment {
    pub t: usize,
    pub n: usize,
    pub entries: CMat,
}

/// Quadrature-basis moment matrix `Λ^(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMoment {
    pub t: usize,
    pub n: usize,
    pub entries: CMat,
}

impl Moment for SigmaMoment {
    fn degree(&self) -> usize {
        self.t
    }
    fn n(&self) -> usize {
        self.n
    }
    fn entries(&self) -> &CMat {
        &self.entries
    }
    fn with_entries(&self, entries: CMat) -> Self {
        Self { t: self.t, n: self.n, entries }
    }
    fn hermitian_symmetry(&self) -> bool {
        true
    }
}

impl Moment for LambdaMoment {
    fn degree(&self) -> usize {
        self.t
    }
    fn n(&self) -> usize {
        self.n
    }
    fn entries(&self) -> &CMat {
        &self.entries
    }
    fn with_entries(&self, entries: CMat) -> Self {
        Self { t: self.t, n: self.n, entries }
    }
    // Λ^(2)_{ij;kl} = conj Λ^(2)_{lk;ji}, so only Λ^(1) is Hermitian.
    fn hermitian_symmetry(&self) -> bool {
        self.t == 1
    }
}

impl LambdaMoment {
    /// The covariance matrix `Re Λ^(1)`.
    pub fn covariance(&self) -> RMat {
        linalg::real_part(&self.entries)
    }
}

fn check_degree(t: usize) -> Result<()> {
    if t == 1 || t == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree(t))
    }
}

/// `σ₀^(t)` of the Fock state `|f⟩`: `I + diag(f)` for `t = 1`, and
/// `(σ₀^(1))^{⊗2}(I + SWAP) − Σ_i f_i(f_i+1)|ii⟩⟨ii|` for `t = 2`.
pub fn sigma_fock(f: &FockVector, t: usize) -> Result<SigmaMoment> {
    check_degree(t)?;
    let n = f.n();
    let occ = f.occupations();
    let entries = if t == 1 {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, occ.iter().map(|&v| C64::new(1.0 + v as f64, 0.0))))
    } else {
        let mut m = CMat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let w = (1.0 + occ[i] as f64) * (1.0 + occ[j] as f64);
                m[(i * n + j, i * n + j)] += w;
                m[(i * n + j, j * n + i)] += w;
            }
            let fi = occ[i] as f64;
            m[(i * n + i, i * n + i)] -= fi * (fi + 1.0);
        }
        m
    };
    Ok(SigmaMoment { t, n, entries })
}

/// `Λ₀^(t)` of `|f⟩`, entry by entry from the ladder kernel.
pub fn lambda_fock(f: &FockVector, t: usize) -> Result<LambdaMoment> {
    check_degree(t)?;
    let n = f.n();
    let d = 2 * n;
    let entries = if t == 1 {
        CMat::from_fn(d, d, |i, j| fock_quadrature_expectation(f, &[i, j]).expect("word within limit"))
    } else {
        CMat::from_fn(d * d, d * d, |row, col| {
            let idx = [row / d, row % d, col / d, col % d];
            fock_quadrature_expectation(f, &idx).expect("word within limit")
        })
    };
    Ok(LambdaMoment { t, n, entries })
}

/// `W^{⊗t} σ (W†)^{⊗t}`.
pub fn transform_sigma(w: &PassiveUnitary, sigma: &SigmaMoment) -> Result<SigmaMoment> {
    if w.n() != sigma.n {
        return Err(Error::DimensionMismatch { expected: sigma.n, got: w.n() });
    }
    let op = tensor_power_c(w.matrix(), sigma.t);
    Ok(sigma.with_entries(&op * &sigma.entries * op.adjoint()))
}

/// `S^{⊗t} Λ (Sᵀ)^{⊗t}`.
pub fn transform_lambda(s: &SymplecticMatrix, lam: &LambdaMoment) -> Result<LambdaMoment> {
    if s.n() != lam.n {
        return Err(Error::DimensionMismatch { expected: lam.n, got: s.n() });
    }
    let op = linalg::to_complex(&tensor_power_r(s.matrix(), lam.t));
    Ok(lam.with_entries(&op * &lam.entries * op.transpose()))
}

/// Conjugation by a general real matrix, used to undo the active part during learning.
pub(crate) fn conjugate_lambda(m: &RMat, lam: &LambdaMoment) -> LambdaMoment {
    let op = linalg::to_complex(&tensor_power_r(m, lam.t));
    lam.with_entries(&op * &lam.entries * op.transpose())
}

pub(crate) fn tensor_power_c(m: &CMat, t: usize) -> CMat {
    if t == 1 {
        m.clone()
    } else {
        linalg::kron_c(m, m)
    }
}

pub(crate) fn tensor_power_r(m: &RMat, t: usize) -> RMat {
    if t == 1 {
        m.clone()
    } else {
        linalg::kron_r(m, m)
    }
}

/// Converts `(Λ^(1), Λ^(2))` to `(σ^(1), σ^(2))` using `a = (x + ip)/√2`.
pub fn lambda_to_sigma(lam1: &LambdaMoment, lam2: &LambdaMoment) -> Result<(SigmaMoment, SigmaMoment)> {
    if lam1.t != 1 {
        return Err(Error::DegreeMismatch { expected: 1, got: lam1.t });
    }
    if lam2.t != 2 {
        return Err(Error::DegreeMismatch { expected: 2, got: lam2.t });
    }
    if lam1.n != lam2.n {
        return Err(Error::DimensionMismatch { expected: lam1.n, got: lam2.n });
    }
    let n = lam1.n;
    let l1 = &lam1.entries;
    let s1 = CMat::from_fn(n, n, |i, j| {
        (l1[(i, j)] + l1[(n + i, n + j)] + I * l1[(n + i, j)] - I * l1[(i, n + j)]) * 0.5
    });
    let d = 2 * n;
    let l2 = &lam2.entries;
    let phase = [ONE, I];
    let s2 = CMat::from_fn(n * n, n * n, |row, col| {
        let (i, j, k, l) = (row / n, row % n, col / n, col % n);
        let mut acc = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for dd in 0..2 {
                        let coeff = phase[a] * phase[b] * phase[c].conj() * phase[dd].conj();
                        let r = (i + n * a) * d + (j + n * b);
                        let cc = (k + n * c) * d + (l + n * dd);
                        acc += coeff * l2[(r, cc)];
                    }
                }
            }
        }
        acc * 0.25
    });
    Ok((SigmaMoment { t: 1, n, entries: s1 }, SigmaMoment { t: 2, n, entries: s2 }))
}

/// Moments `(Λ^(1), Λ^(2))` of `U_S|f⟩`.
pub fn lambda_state(s: &SymplecticMatrix, f: &FockVector) -> Result<(LambdaMoment, LambdaMoment)> {
    Ok((transform_lambda(s, &lambda_fock(f, 1)?)?, transform_lambda(s, &lambda_fock(f, 2)?)?))
}

/// Moments `(σ^(1), σ^(2))` of `U_W|f⟩`.
pub fn sigma_state(w: &PassiveUnitary, f: &FockVector) -> Result<(SigmaMoment, SigmaMoment)> {
    Ok((transform_sigma(w, &sigma_fock(f, 1)?)?, transform_sigma(w, &sigma_fock(f, 2)?)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    UniformEntry,
    #[default]
    GaussianEntry,
    AdversarialEigvec,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-entry" | "uniform" => Ok(Self::UniformEntry),
            "gaussian-entry" | "gaussian" => Ok(Self::GaussianEntry),
            "adversarial-eigvec" | "adversarial" => Ok(Self::AdversarialEigvec),
            other => Err(Error::Invalid(format!("unknown noise model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub model: NoiseModel,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(epsilon: f64, seed: u64) -> Self {
        Self { epsilon, model: NoiseModel::GaussianEntry, seed }
    }
}

/// Returns `m + ε E` with `‖E‖ = 1` (operator norm), `E` respecting the symmetry of `m`.
pub fn add_noise<M: Moment>(m: &M, spec: &NoiseSpec) -> M {
    if spec.epsilon == 0.0 {
        return m.clone();
    }
    let e = unit_perturbation(m, spec);
    m.with_entries(m.entries() + e * C64::new(spec.epsilon, 0.0))
}

/// The unit-norm perturbation that [`add_noise`] would apply.
pub fn unit_perturbation<M: Moment>(m: &M, spec: &NoiseSpec) -> CMat {
    let x = m.entries();
    let dim = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let raw = match spec.model {
        NoiseModel::GaussianEntry => CMat::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        }),
        NoiseModel::UniformEntry => {
            CMat::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        }
        NoiseModel::AdversarialEigvec => {
            let svd = x.clone().svd(true, true);
            let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
            let k = svd.singular_values.imax();
            u.column(k) * vt.row(k)
        }
    };
    let sym = symmetrize(&raw, m.hermitian_symmetry());
    let norm = linalg::op_norm(&sym);
    sym / C64::new(norm, 0.0)
}

fn symmetrize(e: &CMat, hermitian: bool) -> CMat {
    if hermitian {
        linalg::hermitize(e)
    } else {
        let d = (e.nrows() as f64).sqrt().round() as usize;
        let swap = linalg::swap_matrix(d);
        (e + &swap * e.adjoint() * &swap) * C64::new(0.5, 0.0)
    }
}

/// File representation of a moment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFile {
    pub kind: MomentKind,
    pub t: usize,
    pub n: usize,
    pub entries: Vec<Vec<crate::io::ComplexJson>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Sigma,
    Lambda,
}

impl MomentFile {
    pub fn from_sigma(s: &SigmaMoment) -> Self {
        Self { kind: MomentKind::Sigma, t: s.t, n: s.n, entries: ComplexMatrixJson::from_matrix(s.n, &s.entries).entries }
    }

    pub fn from_lambda(l: &LambdaMoment) -> Self {
        Self { kind: MomentKind::Lambda, t: l.t, n: l.n, entries: ComplexMatrixJson::from_matrix(l.n, &l.entries).entries }
    }

    fn matrix(&self, base: usize) -> Result<CMat> {
        let m = ComplexMatrixJson { n: self.n, entries: self.entries.clone() }.to_matrix()?;
        let dim = base.pow(self.t as u32);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
        Ok(m)
    }

    pub fn to_sigma(&self) -> Result<SigmaMoment> {
        if self.kind != MomentKind::Sigma {
            return Err(Error::Invalid("expected a sigma moment file".into()));
        }
        Ok(SigmaMoment { t: self.t, n: self.n, entries: self.matrix(self.n)? })
    }

    pub fn to_lambda(&self) -> Result<LambdaMoment> {
        if self.kind != MomentKind::Lambda {
            return Err(Error::Invalid("expected a lambda moment file".into()));
        }
        Ok(LambdaMoment { t: self.t, n: self.n, entries: self.matrix(2 * self.n)? })
    }
}
