//! Symplectic-group linear algebra.
//!
//! Quadratures are ordered `r = (x_1..x_n, p_1..p_n)` and the symplectic form is
//! `Ω = [[0, I], [-I, 0]]`. With `x = (a + a†)/√2` the vacuum covariance is `I/2`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::io::{ComplexMatrixJson, RealMatrixJson};
use crate::linalg::{self, CMat, RMat, C64};

/// Scale-relative tolerance for structural predicates (unitarity, symplecticity, symmetry).
pub fn tau_sym(norm: f64) -> f64 {
    1e-9 * (1.0 + norm)
}

/// Scale-relative tolerance for reconstructions from decompositions.
pub fn tau_rec(norm: f64) -> f64 {
    1e-8 * (1.0 + norm)
}

/// The canonical symplectic form on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub n: usize,
    pub omega: RMat,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        Self { n, omega: omega(n) }
    }
}

pub fn omega(n: usize) -> RMat {
    let mut w = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    w
}

/// Frobenius norm of `M Ω Mᵀ − Ω`.
pub fn symplectic_defect(m: &RMat) -> f64 {
    let n = m.nrows() / 2;
    let w = omega(n);
    (m * &w * m.transpose() - w).norm()
}

pub fn orthogonality_defect(m: &RMat) -> f64 {
    let k = m.ncols();
    (m.transpose() * m - RMat::identity(k, k)).norm()
}

pub fn is_symplectic(m: &RMat, tol: f64) -> bool {
    m.is_square() && m.nrows().is_multiple_of(2) && symplectic_defect(m) <= tol
}

pub fn is_orthogonal_symplectic(m: &RMat, tol: f64) -> bool {
    is_symplectic(m, tol) && orthogonality_defect(m) <= tol
}

/// A real `2n × 2n` matrix satisfying `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n: usize,
    entries: RMat,
    s_max: f64,
}

impl SymplecticMatrix {
    /// Validates the symplectic condition to `τ_sym`.
    pub fn new(entries: RMat) -> Result<Self> {
        if !entries.is_square() || !entries.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: 2 * (entries.nrows() / 2), got: entries.ncols() });
        }
        let norm = linalg::op_norm_r(&entries);
        let defect = symplectic_defect(&entries);
        if defect > tau_sym(norm * norm) {
            return Err(Error::NotSymplectic(defect));
        }
        Ok(Self::from_trusted(entries))
    }

    pub(crate) fn from_trusted(entries: RMat) -> Self {
        let n = entries.nrows() / 2;
        let top = entries.clone().singular_values().max();
        Self { n, entries, s_max: top.ln().max(0.0) }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, entries: RMat::identity(2 * n, 2 * n), s_max: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RMat {
        &self.entries
    }

    pub fn into_matrix(self) -> RMat {
        self.entries
    }

    /// Maximum squeezing: the log of the largest singular value.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// `S⁻¹ = Ωᵀ Sᵀ Ω`, exact for symplectic matrices.
    pub fn inverse(&self) -> Self {
        let w = omega(self.n);
        Self::from_trusted(w.transpose() * self.entries.transpose() * w)
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Self {
        Self::from_trusted(&self.entries * &other.entries)
    }

    pub fn to_json(&self) -> RealMatrixJson {
        RealMatrixJson::from_matrix(self.n, &self.entries)
    }

    pub fn from_json(j: &RealMatrixJson) -> Result<Self> {
        Self::new(j.to_matrix()?)
    }
}

/// An `n × n` unitary specifying a passive (number-conserving) Gaussian unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveUnitary {
    n: usize,
    entries: CMat,
}

impl PassiveUnitary {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let defect = linalg::unitarity_defect(&entries);
        if defect > tau_sym(1.0) {
            return Err(Error::NonUnitaryInput(defect));
        }
        Ok(Self { n: entries.nrows(), entries })
    }

    pub(crate) fn from_trusted(entries: CMat) -> Self {
        Self { n: entries.nrows(), entries }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, entries: CMat::identity(n, n) }
    }

    /// Phase-and-permutation matrix with `X[perm[j], j] = e^{i phases[j]}`.
    pub fn monomial(perm: &[usize], phases: &[f64]) -> Self {
        let n = perm.len();
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            m[(perm[j], j)] = C64::from_polar(1.0, phases[j]);
        }
        Self { n, entries: m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, entries: self.entries.adjoint() }
    }

    pub fn compose(&self, other: &PassiveUnitary) -> Self {
        Self { n: self.n, entries: &self.entries * &other.entries }
    }

    pub fn to_json(&self) -> ComplexMatrixJson {
        ComplexMatrixJson::from_matrix(self.n, &self.entries)
    }

    pub fn from_json(j: &ComplexMatrixJson) -> Result<Self> {
        Self::new(j.to_matrix()?)
    }
}

/// The isomorphism `U(n) → Sp(2n) ∩ O(2n)`, `W ↦ [[Re W, −Im W], [Im W, Re W]]`.
pub fn passive_embed(w: &PassiveUnitary) -> SymplecticMatrix {
    let n = w.n;
    let m = w.matrix();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, n + j)] = -z.im;
            out[(n + i, j)] = z.im;
            out[(n + i, n + j)] = z.re;
        }
    }
    SymplecticMatrix { n, entries: out, s_max: 0.0 }
}

/// Inverse of [`passive_embed`] for an orthogonal symplectic matrix.
pub fn passive_unembed(o: &RMat) -> PassiveUnitary {
    let n = o.nrows() / 2;
    PassiveUnitary::from_trusted(CMat::from_fn(n, n, |i, j| C64::new(o[(i, j)], o[(n + i, j)])))
}

/// Haar-random unitary from a caller-provided RNG.
pub fn random_passive_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PassiveUnitary {
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_iterator(n, (0..n).map(|k| {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        }
    }));
    PassiveUnitary::from_trusted(q * CMat::from_diagonal(&phases))
}

/// Haar-random unitary, deterministic in `seed`.
pub fn random_passive(n: usize, seed: u64) -> PassiveUnitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_passive_with(n, &mut rng)
}

pub fn random_symplectic_with<R: Rng + ?Sized>(n: usize, s_max: f64, rng: &mut R) -> SymplecticMatrix {
    let u1 = random_passive_with(n, rng);
    let u2 = random_passive_with(n, rng);
    let s: Vec<f64> = (0..n).map(|_| if s_max > 0.0 { rng.random_range(-s_max..=s_max) } else { 0.0 }).collect();
    let d = squeeze_diag(&s);
    let m = passive_embed(&u1).entries * d * passive_embed(&u2).entries;
    SymplecticMatrix::from_trusted(m)
}

/// `ρ(U₁) · diag(e^s, e^{-s}) · ρ(U₂)` with Haar `U₁, U₂` and `s_i ~ U[-s_max, s_max]`.
pub fn random_symplectic(n: usize, s_max: f64, seed: u64) -> SymplecticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(n, s_max, &mut rng)
}

/// `diag(e^{s_1}..e^{s_n}, e^{-s_1}..e^{-s_n})`.
pub fn squeeze_diag(s: &[f64]) -> RMat {
    let n = s.len();
    RMat::from_diagonal(&DVector::from_iterator(
        2 * n,
        s.iter().map(|v| v.exp()).chain(s.iter().map(|v| (-v).exp())),
    ))
}

#[derive(Debug, Clone)]
pub struct WilliamsonResult {
    /// Symplectic eigenvalues, ascending.
    pub nu: Vec<f64>,
    /// `M = R diag(ν, ν) Rᵀ`.
    pub r: SymplecticMatrix,
}

/// Williamson normal form of a real symmetric positive-definite matrix.
pub fn williamson(m: &RMat) -> Result<WilliamsonResult> {
    if !m.is_square() || !m.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: 2 * (m.nrows() / 2), got: m.ncols() });
    }
    let n = m.nrows() / 2;
    let norm = linalg::op_norm_r(m);
    let asym = (m - m.transpose()).norm();
    if asym > tau_sym(norm) {
        return Err(Error::NotSymmetric(asym));
    }
    let ms = (m + m.transpose()) * 0.5;
    let (vals, _) = linalg::eigh_r(&ms);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(vals[0]));
    }
    let (half, _) = linalg::sqrt_and_inv_sqrt(&ms);
    let w = omega(n);
    let a = &half * &w * &half;
    // iA is Hermitian with eigenvalues ±ν; the upper half carries the pairing.
    let h = linalg::to_complex(&a) * linalg::I;
    let (ev, vecs) = linalg::eigh(&h);
    let nu: Vec<f64> = ev[n..].to_vec();
    let mut k = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        let u = vecs.column(n + j);
        for r in 0..2 * n {
            k[(r, j)] = std::f64::consts::SQRT_2 * u[r].im;
            k[(r, n + j)] = std::f64::consts::SQRT_2 * u[r].re;
        }
    }
    let d_inv_half = RMat::from_diagonal(&DVector::from_iterator(
        2 * n,
        nu.iter().chain(nu.iter()).map(|v| 1.0 / v.sqrt()),
    ));
    let mut r = &half * k * d_inv_half;
    let rn = linalg::op_norm_r(&r);
    if symplectic_defect(&r) > tau_sym(rn * rn) {
        r = symplectic_newton_step(&r);
    }
    Ok(WilliamsonResult { nu, r: SymplecticMatrix::from_trusted(r) })
}

/// One Newton step towards the symplectic group: `R ← R (3I − R⁻ˢR)/2` with `R⁻ˢ = Ωᵀ Rᵀ Ω`.
fn symplectic_newton_step(r: &RMat) -> RMat {
    let n2 = r.nrows();
    let w = omega(n2 / 2);
    let sinv = w.transpose() * r.transpose() * &w;
    r * (RMat::identity(n2, n2) * 3.0 - sinv * r) * 0.5
}

#[derive(Debug, Clone)]
pub struct EulerResult {
    pub o: SymplecticMatrix,
    pub v: SymplecticMatrix,
    /// Squeezing parameters, descending; the middle factor is `diag(e^s, e^{-s})`.
    pub squeezings: Vec<f64>,
}

impl EulerResult {
    pub fn recompose(&self) -> RMat {
        self.o.matrix() * squeeze_diag(&self.squeezings) * self.v.matrix()
    }
}

/// Relative threshold below which a squeezing is treated as part of the unsqueezed cluster.
const UNSQUEEZED_LOG_TOL: f64 = 1e-7;

/// Euler (Bloch-Messiah) decomposition `S = O · diag(e^s, e^{-s}) · V`.
pub fn euler(s: &SymplecticMatrix) -> Result<EulerResult> {
    let m = s.matrix();
    let norm = linalg::op_norm_r(m);
    let defect = symplectic_defect(m);
    if defect > tau_sym(norm * norm) {
        return Err(Error::NotSymplectic(defect));
    }
    let n = s.n();
    let w = omega(n);
    let gram = m * m.transpose();
    let (vals, vecs) = linalg::eigh_r(&gram);
    let logs: Vec<f64> = vals.iter().map(|v| 0.5 * v.max(f64::MIN_POSITIVE).ln()).collect();
    let up = logs.iter().filter(|&&l| l >= UNSQUEEZED_LOG_TOL).count();
    let down = logs.iter().filter(|&&l| l <= -UNSQUEEZED_LOG_TOL).count();
    let squeezed = up.min(down);

    let mut x = RMat::zeros(2 * n, n);
    // Squeezed directions, largest first.
    for j in 0..squeezed {
        x.set_column(j, &vecs.column(2 * n - 1 - j));
    }
    // The unsqueezed cluster is Ω-invariant; pick an isotropic orthonormal half of it.
    let cluster: Vec<usize> = (squeezed..2 * n - squeezed).collect();
    if !cluster.is_empty() {
        let y = RMat::from_fn(2 * n, cluster.len(), |r, c| vecs[(r, cluster[c])]);
        let frame = isotropic_frame(&y, &w);
        for (j, col) in frame.column_iter().enumerate() {
            x.set_column(squeezed + j, &col);
        }
    }
    let mut o = RMat::zeros(2 * n, 2 * n);
    o.view_mut((0, 0), (2 * n, n)).copy_from(&x);
    o.view_mut((0, n), (2 * n, n)).copy_from(&(w.transpose() * &x));

    let squeezings: Vec<f64> = (0..n)
        .map(|j| {
            let col = x.column(j);
            0.5 * (col.transpose() * &gram * col)[(0, 0)].ln()
        })
        .collect();
    let v = squeeze_diag(&squeezings.iter().map(|v| -v).collect::<Vec<_>>()) * o.transpose() * m;
    Ok(EulerResult {
        o: SymplecticMatrix::from_trusted(o),
        v: SymplecticMatrix::from_trusted(v),
        squeezings,
    })
}

/// Given an orthonormal basis `y` of an Ω-invariant subspace, returns an orthonormal
/// isotropic half-basis `X` (so that `[X | ΩᵀX]` spans the subspace).
fn isotropic_frame(y: &RMat, w: &RMat) -> RMat {
    let c = y.ncols();
    let a = y.transpose() * w * y;
    let h = linalg::to_complex(&a) * linalg::I;
    let (_, vecs) = linalg::eigh(&h);
    let half = c / 2;
    let mut coords = RMat::zeros(c, half);
    for j in 0..half {
        let u = vecs.column(c - half + j);
        for r in 0..c {
            coords[(r, j)] = std::f64::consts::SQRT_2 * u[r].re;
        }
    }
    y * coords
}

/// The orthogonal symplectic part `O·V` of the Euler decomposition.
pub fn nearest_orthogonal_symplectic(s: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let e = euler(s)?;
    Ok(e.o.compose(&e.v))
}
