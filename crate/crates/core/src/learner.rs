//! Learning the Gaussian unitary and occupations behind `U|f⟩` from its moment matrices.
//!
//! * [`find_v`]: passive unitary, all modes carrying the same occupation `b`.
//! * [`find_v_fock`]: passive unitary, arbitrary occupations.
//! * [`find_q`]: arbitrary Gaussian unitary via the Williamson decomposition of the covariance.
//!
//! The answer is only ever determined up to per-mode phases and permutations of modes with
//! equal occupation; [`align_unitary`] and [`align_symplectic`] quotient that freedom out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ComplexMatrixJson, RealMatrixJson};
use crate::linalg::{self, CMat, CVec, RMat, C64, ZERO};
use crate::moments::{self, FockVector, LambdaMoment, SigmaMoment};
use crate::symplectic::{self, PassiveUnitary, SymplecticMatrix};

/// Absolute Schmidt-coefficient floor for harvesting a candidate column.
pub const TAU_SCHMIDT: f64 = 1e-6;
/// Residual threshold for accepting a candidate column as new.
pub const TAU_RANK: f64 = 0.5;
/// Distance from a half-integer below which occupation rounding is refused.
pub const TAU_ROUND: f64 = 1e-9;
/// Slack below ½ tolerated in the smallest symplectic eigenvalue.
pub const TAU_MOM: f64 = 0.05;

/// Minimum tensor-power quality `⟨w, T(w)⟩` for a refined column (an exact column scores 1,
/// an equal mixture of two columns scores ½).
const MIN_COLUMN_QUALITY: f64 = 0.75;
const REFINE_ITERS: usize = 60;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagnostics {
    /// Occupation shared by the block.
    pub b: u32,
    pub start: usize,
    pub len: usize,
    /// Gap between the `len`-th and `(len+1)`-th largest eigenvalue of `A`.
    pub eigenvalue_gap: f64,
    /// Schmidt coefficients of each top eigenvector consulted.
    pub schmidt_spectra: Vec<Vec<f64>>,
    /// `‖V_assembled − V_polar‖` for the block.
    pub polar_correction_norm: f64,
    /// Number of eigenvectors consulted beyond the first `len`.
    pub extra_eigenvectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassiveDiagnostics {
    /// Eigenvalues of `σ^(1) − I`, ascending.
    pub occupation_eigenvalues: Vec<f64>,
    /// Largest distance of an occupation eigenvalue from its rounded value.
    pub rounding_residual: f64,
    pub blocks: Vec<BlockDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct LearnResultPassive {
    pub v: PassiveUnitary,
    /// Recovered occupations, ascending.
    pub g: FockVector,
    /// Half-open index ranges of equal occupation, tiling `0..n`.
    pub block_partition: Vec<(usize, usize)>,
    pub diagnostics: PassiveDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveDiagnostics {
    /// Symplectic eigenvalues of the covariance, ascending.
    pub nu: Vec<f64>,
    /// `|ν_i − ½ − g_i|`.
    pub nu_residuals: Vec<f64>,
    pub passive: PassiveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct LearnResultActive {
    pub q: SymplecticMatrix,
    pub g: FockVector,
    /// Williamson factor of the covariance.
    pub r: SymplecticMatrix,
    pub diagnostics: ActiveDiagnostics,
}

fn hermitian_tol(m: &CMat) -> f64 {
    1e-8 * (1.0 + m.norm())
}

fn check_hermitian(m: &CMat) -> Result<()> {
    let d = linalg::hermitian_defect(m);
    if d > hermitian_tol(m) {
        Err(Error::NonHermitianInput(d))
    } else {
        Ok(())
    }
}

/// Constant-occupation passive learner: `V` with `U_V|b…b⟩ ≈ U_W|b…b⟩`.
pub fn find_v(sigma2: &SigmaMoment, b: u32) -> Result<PassiveUnitary> {
    find_v_detailed(sigma2, b).map(|(v, _)| v)
}

/// [`find_v`] with per-block diagnostics.
pub fn find_v_detailed(sigma2: &SigmaMoment, b: u32) -> Result<(PassiveUnitary, BlockDiagnostics)> {
    if sigma2.t != 2 {
        return Err(Error::DegreeMismatch { expected: 2, got: sigma2.t });
    }
    let n = sigma2.n;
    if sigma2.entries.nrows() != n * n || sigma2.entries.ncols() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: sigma2.entries.nrows() });
    }
    check_hermitian(&sigma2.entries)?;
    let mut diag = BlockDiagnostics { b, len: n, ..Default::default() };
    if b == 0 {
        return Ok((PassiveUnitary::identity(n), diag));
    }
    let bf = b as f64;
    let swap = linalg::swap_matrix(n);
    let ident = CMat::identity(n * n, n * n);
    let a = ((ident + swap) * C64::new((bf + 1.0).powi(2), 0.0) - &sigma2.entries) / C64::new(bf * (bf + 1.0), 0.0);
    let a = linalg::hermitize(&a);
    let (vals, vecs) = linalg::eigh(&a);
    let dim = n * n;
    diag.eigenvalue_gap = if dim > n { vals[dim - n] - vals[dim - n - 1] } else { vals[0] };

    let mut columns: Vec<CVec> = Vec::with_capacity(n);
    let mut fallback: Vec<CVec> = Vec::new();
    let mut consulted = 0;
    for k in 0..(2 * n).min(dim) {
        if columns.len() == n {
            break;
        }
        if k >= n {
            diag.extra_eigenvectors += 1;
        }
        consulted += 1;
        let e = vecs.column(dim - 1 - k);
        // Reshape with the first tensor factor as the row index.
        let m = CMat::from_fn(n, n, |p, q| e[p * n + q]);
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        diag.schmidt_spectra.push(svd.singular_values.iter().copied().collect());
        for (j, &coef) in svd.singular_values.iter().enumerate() {
            if columns.len() == n {
                break;
            }
            if coef <= TAU_SCHMIDT {
                continue;
            }
            let (w, quality) = refine_column(&a, n, u.column(j).into_owned());
            if independent_residual(&columns, &w) <= TAU_RANK {
                continue;
            }
            if quality >= MIN_COLUMN_QUALITY {
                columns.push(w);
            } else {
                fallback.push(w);
            }
        }
    }
    // Poorly converged candidates only count when nothing better is available.
    for w in fallback {
        if columns.len() == n {
            break;
        }
        if independent_residual(&columns, &w) > TAU_RANK {
            columns.push(w);
        }
    }
    log::debug!("find_v: n={n} b={b} consulted {consulted} eigenvectors, harvested {}", columns.len());
    if columns.len() < n {
        return Err(Error::InsufficientColumns { found: columns.len(), needed: n });
    }
    let assembled = CMat::from_columns(&columns);
    let v = linalg::nearest_unitary(&assembled);
    diag.polar_correction_norm = linalg::op_norm(&(&assembled - &v));
    Ok((PassiveUnitary::from_trusted(v), diag))
}

/// Norm of `w` after projecting out the span of the accepted columns.
fn independent_residual(columns: &[CVec], w: &CVec) -> f64 {
    let mut r = w.clone();
    for c in columns {
        let proj = c.dotc(&r);
        r -= c * proj;
    }
    r.norm()
}

/// Tensor-power iteration `w ← T(w)/‖T(w)‖`, `T(w)_p = Σ A_{pq;rs} w̄_q w_r w_s`.
///
/// For `A = Σ_i |w_i w_i⟩⟨w_i w_i|` this maps `Σ c_i w_i` to `Σ |c_i|² c̄_i w_i`, so a seed near
/// one column converges to it cubically even when Schmidt coefficients are nearly degenerate.
/// Returns the refined unit vector and its quality `Re⟨w, T(w)⟩`.
fn refine_column(a: &CMat, n: usize, seed: CVec) -> (CVec, f64) {
    let mut w = seed.clone() / C64::new(seed.norm(), 0.0);
    let mut quality = apply_tensor(a, n, &w).0;
    for _ in 0..REFINE_ITERS {
        let (_, t) = apply_tensor(a, n, &w);
        let norm = t.norm();
        if norm == 0.0 {
            break;
        }
        let mut next = t / C64::new(norm, 0.0);
        // Keep the phase continuous with the previous iterate.
        let ov = w.dotc(&next);
        if ov.norm() > 0.0 {
            next *= (ov / ov.norm()).conj();
        }
        let change = (&next - &w).norm();
        w = next;
        if change < 1e-15 {
            break;
        }
    }
    quality = quality.max(apply_tensor(a, n, &w).0);
    (w, quality)
}

fn apply_tensor(a: &CMat, n: usize, w: &CVec) -> (f64, CVec) {
    let ww = CVec::from_fn(n * n, |k, _| w[k / n] * w[k % n]);
    let y = a * ww;
    let t = CVec::from_fn(n, |p, _| (0..n).fold(ZERO, |acc, q| acc + y[p * n + q] * w[q].conj()));
    (w.dotc(&t).re, t)
}

/// Makes the largest-magnitude entry of each column real and positive.
fn fix_column_phases(u: &mut CMat) {
    for mut col in u.column_iter_mut() {
        let mut best = 0;
        for k in 1..col.len() {
            if col[k].norm() > col[best].norm() * (1.0 + 1e-12) {
                best = k;
            }
        }
        let z = col[best];
        if z.norm() > 0.0 {
            let ph = z.conj() / z.norm();
            col *= ph;
        }
    }
}

fn round_occupation(x: f64) -> Result<u32> {
    let frac = x - x.floor();
    if (frac - 0.5).abs() < TAU_ROUND {
        return Err(Error::RoundingAmbiguous(x));
    }
    let r = x.round() as i64;
    if r < 0 {
        return Err(Error::NegativeOccupation(r));
    }
    Ok(r as u32)
}

/// General-occupation passive learner.
pub fn find_v_fock(sigma1: &SigmaMoment, sigma2: &SigmaMoment) -> Result<LearnResultPassive> {
    if sigma1.t != 1 {
        return Err(Error::DegreeMismatch { expected: 1, got: sigma1.t });
    }
    if sigma2.t != 2 {
        return Err(Error::DegreeMismatch { expected: 2, got: sigma2.t });
    }
    let n = sigma1.n;
    if sigma2.n != n || sigma1.entries.nrows() != n || sigma2.entries.nrows() != n * n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma2.n });
    }
    check_hermitian(&sigma1.entries)?;
    check_hermitian(&sigma2.entries)?;

    let p = &sigma1.entries - CMat::identity(n, n);
    let (vals, mut u) = linalg::eigh(&p);
    fix_column_phases(&mut u);
    let g = vals.iter().map(|&x| round_occupation(x)).collect::<Result<Vec<u32>>>()?;
    let rounding_residual = vals.iter().zip(&g).map(|(x, &k)| (x - k as f64).abs()).fold(0.0, f64::max);

    let mut partition = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || g[i] != g[start] {
            partition.push((start, i));
            start = i;
        }
    }

    let uu = linalg::kron_c(&u, &u);
    let tilde = uu.adjoint() * &sigma2.entries * &uu;
    let mut blocks = Vec::with_capacity(partition.len());
    let mut diags = Vec::with_capacity(partition.len());
    for &(s, e) in &partition {
        let l = e - s;
        let sub = CMat::from_fn(l * l, l * l, |r, c| {
            let (i, j, k, m) = (s + r / l, s + r % l, s + c / l, s + c % l);
            tilde[(i * n + j, k * n + m)]
        });
        let block_sigma = SigmaMoment { t: 2, n: l, entries: linalg::hermitize(&sub) };
        let (x, mut d) = find_v_detailed(&block_sigma, g[s])?;
        d.start = s;
        blocks.push(x.matrix().clone());
        diags.push(d);
    }
    let x = linalg::block_diag(&blocks);
    let v = PassiveUnitary::from_trusted(&u * x);
    Ok(LearnResultPassive {
        v,
        g: FockVector::new(g),
        block_partition: partition,
        diagnostics: PassiveDiagnostics { occupation_eigenvalues: vals, rounding_residual, blocks: diags },
    })
}

/// Arbitrary-Gaussian learner from quadrature moments.
pub fn find_q(lambda1: &LambdaMoment, lambda2: &LambdaMoment) -> Result<LearnResultActive> {
    if lambda1.t != 1 {
        return Err(Error::DegreeMismatch { expected: 1, got: lambda1.t });
    }
    if lambda2.t != 2 {
        return Err(Error::DegreeMismatch { expected: 2, got: lambda2.t });
    }
    if lambda1.n != lambda2.n {
        return Err(Error::DimensionMismatch { expected: lambda1.n, got: lambda2.n });
    }
    let cov = lambda1.covariance();
    let cov = (&cov + cov.transpose()) * 0.5;
    let wl = symplectic::williamson(&cov)?;
    let nu_min = wl.nu.iter().copied().fold(f64::INFINITY, f64::min);
    if nu_min < 0.5 - TAU_MOM {
        return Err(Error::NotACovariance(nu_min));
    }
    let r_inv = wl.r.inverse().into_matrix();
    let t1 = moments::conjugate_lambda(&r_inv, lambda1);
    let t2 = moments::conjugate_lambda(&r_inv, lambda2);
    let (s1, s2) = moments::lambda_to_sigma(&t1, &t2)?;
    let s1 = s1.with_hermitized();
    let s2 = s2.with_hermitized();
    let passive = find_v_fock(&s1, &s2)?;
    let q = SymplecticMatrix::new(wl.r.matrix() * symplectic::passive_embed(&passive.v).matrix())?;
    let mut nu = wl.nu.clone();
    nu.sort_by(f64::total_cmp);
    let nu_residuals = nu.iter().zip(passive.g.occupations()).map(|(v, &k)| (v - 0.5 - k as f64).abs()).collect();
    Ok(LearnResultActive {
        q,
        g: passive.g.clone(),
        r: wl.r,
        diagnostics: ActiveDiagnostics { nu, nu_residuals, passive: passive.diagnostics },
    })
}

trait Hermitized {
    fn with_hermitized(self) -> Self;
}

impl Hermitized for SigmaMoment {
    fn with_hermitized(self) -> Self {
        let e = linalg::hermitize(&self.entries);
        SigmaMoment { entries: e, ..self }
    }
}

/// Diagonal phases and mode permutation aligning a learned transformation with the truth.
///
/// Column `j` of the learned matrix is matched with column `perm[j]` of the reference, with
/// phase `e^{i phases[j]}`; `residual` is the operator-norm distance after alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub phases: Vec<f64>,
    pub perm: Vec<usize>,
    pub residual: f64,
}

/// Largest number of admissible permutations searched exhaustively.
const EXHAUSTIVE_LIMIT: usize = 5040;

fn blocks_of(g: &FockVector) -> Vec<(usize, usize)> {
    let occ = g.occupations();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=occ.len() {
        if i == occ.len() || occ[i] != occ[start] {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Best alignment over permutations within equal-occupation blocks of `g`.
///
/// `score` is the overlap matrix `C_{ij}` (reference column `i`, learned column `j`), and
/// `residual` evaluates a candidate `(perm, phases)`.
fn align_generic(score: &CMat, g: &FockVector, residual: impl Fn(&[usize], &[f64]) -> f64) -> AlignmentReport {
    let n = score.nrows();
    let blocks = blocks_of(g);
    let count = blocks.iter().try_fold(1usize, |acc, &(s, e)| {
        let f: usize = (1..=(e - s)).try_fold(1usize, |a, k| a.checked_mul(k))?;
        acc.checked_mul(f)
    });
    let phases_for = |perm: &[usize]| -> Vec<f64> { (0..n).map(|j| score[(perm[j], j)].arg()).collect() };
    let mut best: Option<AlignmentReport> = None;
    let mut consider = |perm: Vec<usize>| {
        let phases = phases_for(&perm);
        let r = residual(&perm, &phases);
        if best.as_ref().is_none_or(|b| r < b.residual) {
            best = Some(AlignmentReport { phases, perm, residual: r });
        }
    };
    match count {
        Some(c) if c <= EXHAUSTIVE_LIMIT => {
            // Cartesian product of per-block permutations.
            let mut per_block: Vec<Vec<Vec<usize>>> = Vec::new();
            for &(s, e) in &blocks {
                let mut perms = Vec::new();
                linalg::for_each_permutation(e - s, |p| perms.push(p.iter().map(|&k| k + s).collect()));
                per_block.push(perms);
            }
            let mut idx = vec![0usize; per_block.len()];
            loop {
                let mut perm = vec![0; n];
                for (b, &(s, _)) in blocks.iter().enumerate() {
                    for (k, &v) in per_block[b][idx[b]].iter().enumerate() {
                        perm[s + k] = v;
                    }
                }
                consider(perm);
                let mut b = 0;
                loop {
                    if b == idx.len() {
                        return best.expect("at least one permutation");
                    }
                    idx[b] += 1;
                    if idx[b] < per_block[b].len() {
                        break;
                    }
                    idx[b] = 0;
                    b += 1;
                }
            }
        }
        _ => {
            let mut perm = vec![0; n];
            for &(s, e) in &blocks {
                let l = e - s;
                let cost = RMat::from_fn(l, l, |j, i| -score[(s + i, s + j)].norm());
                for (j, i) in linalg::min_cost_assignment(&cost).into_iter().enumerate() {
                    perm[s + j] = s + i;
                }
            }
            consider(perm);
            best.expect("one candidate")
        }
    }
}

/// Aligns learned `V` with reference `W`: minimises `‖V − WΦP‖` over admissible `Φ, P`.
///
/// Column `i` of `W` must carry occupation `g_i` (`g` ascending), matching the learner output.
/// Modes with `g_i = 0` are special when there are several of them: any unitary mixing them
/// fixes the state, so that block of `W` is first rotated onto `V` by the unitary Procrustes
/// solution and only then aligned by `ΦP`.
pub fn align_unitary(v: &PassiveUnitary, w: &PassiveUnitary, g: &FockVector) -> Result<AlignmentReport> {
    let n = v.n();
    if w.n() != n || g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: if w.n() != n { w.n() } else { g.n() } });
    }
    let w = vacuum_rotated(v, w, g);
    let score = w.matrix().adjoint() * v.matrix();
    Ok(align_generic(&score, g, |perm, phases| {
        let x = PassiveUnitary::monomial(perm, phases);
        linalg::op_norm(&(v.matrix() - w.matrix() * x.matrix()))
    }))
}

fn vacuum_rotated(v: &PassiveUnitary, w: &PassiveUnitary, g: &FockVector) -> PassiveUnitary {
    let Some(&(s, e)) = blocks_of(g).iter().find(|&&(s, _)| g.occupations()[s] == 0) else {
        return w.clone();
    };
    if e - s < 2 {
        return w.clone();
    }
    let wb = w.matrix().columns(s, e - s).into_owned();
    let vb = v.matrix().columns(s, e - s).into_owned();
    let y = linalg::nearest_unitary(&(wb.adjoint() * vb));
    let mut m = w.matrix().clone();
    m.columns_mut(s, e - s).copy_from(&(wb * y));
    PassiveUnitary::from_trusted(m)
}

/// Aligns learned `Q` with reference `S` using the 2×2 mode blocks of `S⁻¹Q`.
pub fn align_symplectic(q: &SymplecticMatrix, s: &SymplecticMatrix, g: &FockVector) -> Result<AlignmentReport> {
    let n = q.n();
    if s.n() != n || g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: if s.n() != n { s.n() } else { g.n() } });
    }
    let m = s.inverse().matrix() * q.matrix();
    let score = CMat::from_fn(n, n, |i, j| {
        let (b11, b12, b21, b22) = (m[(i, j)], m[(i, n + j)], m[(n + i, j)], m[(n + i, n + j)]);
        C64::new(0.5 * (b11 + b22), 0.5 * (b21 - b12))
    });
    Ok(align_generic(&score, g, |perm, phases| {
        let x = symplectic::passive_embed(&PassiveUnitary::monomial(perm, phases));
        linalg::op_norm_r(&(q.matrix() - s.matrix() * x.matrix()))
    }))
}

/// Reorders the columns of `w` so that occupations are ascending (stable), returning the
/// sorted occupations alongside.
pub fn sort_by_occupation(w: &PassiveUnitary, f: &FockVector) -> (PassiveUnitary, FockVector) {
    let order = occupation_order(f);
    let m = CMat::from_fn(w.n(), w.n(), |r, c| w.matrix()[(r, order[c])]);
    (PassiveUnitary::from_trusted(m), f.sorted())
}

/// Symplectic analogue of [`sort_by_occupation`]: permutes modes of `S` (columns `j`, `n+j`).
pub fn sort_symplectic_by_occupation(s: &SymplecticMatrix, f: &FockVector) -> (SymplecticMatrix, FockVector) {
    let order = occupation_order(f);
    let n = s.n();
    let m = RMat::from_fn(2 * n, 2 * n, |r, c| {
        let src = if c < n { order[c] } else { n + order[c - n] };
        s.matrix()[(r, src)]
    });
    (SymplecticMatrix::from_trusted(m), f.sorted())
}

fn occupation_order(f: &FockVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.n()).collect();
    order.sort_by_key(|&i| f.occupations()[i]);
    order
}

/// Constant-occupation residual bound `4√5 ε n / (b(b+1))` (infinite for `b = 0`).
pub fn constant_occupation_bound(epsilon: f64, n: usize, b: u32) -> f64 {
    if b == 0 {
        return f64::INFINITY;
    }
    let bf = b as f64;
    4.0 * 5f64.sqrt() * epsilon * n as f64 / (bf * (bf + 1.0))
}

/// Fidelity lower bound `1 − x/(1 − x)`, `x = 4√5 ε n²/(b+1)`, when `ε ≤ (b+1)/(4√5 n²)`.
pub fn constant_occupation_fidelity_bound(epsilon: f64, n: usize, b: u32) -> Option<f64> {
    let bf = b as f64;
    let n2 = (n * n) as f64;
    if b == 0 || epsilon > (bf + 1.0) / (4.0 * 5f64.sqrt() * n2) {
        return None;
    }
    let x = 4.0 * 5f64.sqrt() * epsilon * n2 / (bf + 1.0);
    if x >= 1.0 {
        return None;
    }
    Some(1.0 - x / (1.0 - x))
}

/// General-occupation residual bound `ε₁(32√5 n²(3f²+5f+2) + 4n) + 2√5 ε₂ n`.
pub fn general_occupation_bound(eps1: f64, eps2: f64, n: usize, f_max: u32) -> f64 {
    let nf = n as f64;
    let f = f_max as f64;
    let r5 = 5f64.sqrt();
    eps1 * (32.0 * r5 * nf * nf * (3.0 * f * f + 5.0 * f + 2.0) + 4.0 * nf) + 2.0 * r5 * eps2 * nf
}

/// `Q^{⊗t} Λ₀^{(t)}(g) (Qᵀ)^{⊗t}` for `t = 1, 2`: the moments the learned state would have.
pub fn reconstruct_lambda(q: &SymplecticMatrix, g: &FockVector) -> Result<(LambdaMoment, LambdaMoment)> {
    moments::lambda_state(q, g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassiveResultJson {
    #[serde(rename = "V")]
    pub v: ComplexMatrixJson,
    pub g: Vec<u32>,
    pub diagnostics: PassiveDiagnosticsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassiveDiagnosticsJson {
    pub block_partition: Vec<[usize; 2]>,
    #[serde(flatten)]
    pub inner: PassiveDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActiveResultJson {
    #[serde(rename = "Q")]
    pub q: RealMatrixJson,
    pub g: Vec<u32>,
    #[serde(rename = "R")]
    pub r: RealMatrixJson,
    pub diagnostics: ActiveDiagnostics,
}

impl LearnResultPassive {
    pub fn to_json(&self) -> PassiveResultJson {
        PassiveResultJson {
            v: self.v.to_json(),
            g: self.g.occupations().to_vec(),
            diagnostics: PassiveDiagnosticsJson {
                block_partition: self.block_partition.iter().map(|&(s, e)| [s, e]).collect(),
                inner: self.diagnostics.clone(),
            },
        }
    }
}

impl LearnResultActive {
    pub fn to_json(&self) -> ActiveResultJson {
        ActiveResultJson {
            q: self.q.to_json(),
            g: self.g.occupations().to_vec(),
            r: self.r.to_json(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}
