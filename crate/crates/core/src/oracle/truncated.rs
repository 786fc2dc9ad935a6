//! Brute-force simulator on the Fock space truncated to `d` levels per mode.
//!
//! Basis index of `|m_0 … m_{n−1}⟩` is `Σ_k m_k d^{n−1−k}` (mode 0 most significant).
//! Gaussian unitaries are assembled from their Euler factors: passive factors are exponentials
//! of the number-conserving generator `Σ H_ij a_i† a_j` on whole photon-number sectors, and
//! squeezers are `exp((s/2)(a†² − a²))` per mode.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::moments::{FockVector, LadderOp, LambdaMoment, SigmaMoment};
use crate::symplectic::{self, PassiveUnitary, SymplecticMatrix};

/// Largest tolerated probability mass on the top two levels of any mode.
pub const LEAK_TOL: f64 = 1e-8;

/// Extra levels used when exponentiating a single-mode squeezer before restricting to `d`.
const SQUEEZE_PAD: usize = 60;

/// A normalised pure state on `n` modes, `cutoff` levels each.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    n: usize,
    cutoff: usize,
    amplitudes: CVec,
}

/// A ladder or quadrature word for [`moment_bruteforce`].
#[derive(Debug, Clone, PartialEq)]
pub enum Word {
    Ladder(Vec<LadderOp>),
    /// Quadrature indices into `r = (x_1..x_n, p_1..p_n)`.
    Quadrature(Vec<usize>),
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Ladder(LadderOp),
    Quad(usize),
}

impl TruncatedState {
    pub fn fock(f: &FockVector, cutoff: usize) -> Result<Self> {
        Self::superposition(&[(f.clone(), ONE)], cutoff)
    }

    /// Normalised `Σ_k c_k |f_k⟩`.
    pub fn superposition(terms: &[(FockVector, C64)], cutoff: usize) -> Result<Self> {
        let n = terms.first().map(|(f, _)| f.n()).ok_or_else(|| Error::Invalid("empty superposition".into()))?;
        let dim = checked_dim(n, cutoff)?;
        let mut amps = CVec::zeros(dim);
        for (f, c) in terms {
            if f.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: f.n() });
            }
            if f.f_max() as usize >= cutoff {
                return Err(Error::CutoffTooSmall(1.0));
            }
            amps[encode(f.occupations(), cutoff)] += c;
        }
        Self::from_amplitudes(n, cutoff, amps)
    }

    /// Wraps and normalises a raw amplitude vector.
    pub fn from_amplitudes(n: usize, cutoff: usize, amplitudes: CVec) -> Result<Self> {
        let dim = checked_dim(n, cutoff)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::Invalid("zero state vector".into()));
        }
        Ok(Self { n, cutoff, amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Largest probability mass any single mode carries on its top two levels.
    pub fn leakage(&self) -> f64 {
        top_mass(&self.amplitudes, self.n, self.cutoff, 2)
    }

    pub fn inner(&self, other: &TruncatedState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Applies a single ladder operator and renormalises (e.g. photon subtraction).
    pub fn apply_and_normalize(&self, op: LadderOp) -> Result<Self> {
        let v = apply_op(&self.amplitudes, self.n, self.cutoff, Op::Ladder(op));
        Self::from_amplitudes(self.n, self.cutoff, v)
    }

    /// `U_S |ψ⟩`; fails if the result leaks beyond the tolerance.
    pub fn evolve(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: s.n() });
        }
        let evo = GaussianEvolution::new(s, self.cutoff)?;
        let out = evo.apply(&self.amplitudes);
        let state = Self { n: self.n, cutoff: self.cutoff, amplitudes: out };
        let leak = state.leakage();
        if leak > LEAK_TOL {
            return Err(Error::CutoffTooSmall(leak));
        }
        Ok(state)
    }
}

fn checked_dim(n: usize, cutoff: usize) -> Result<usize> {
    if n == 0 || cutoff == 0 {
        return Err(Error::Invalid("need at least one mode and one level".into()));
    }
    cutoff
        .checked_pow(n as u32)
        .filter(|&d| d <= 1 << 22)
        .ok_or(Error::TooLarge(n))
}

fn encode(occ: &[u32], d: usize) -> usize {
    occ.iter().fold(0, |acc, &m| acc * d + m as usize)
}

fn decode(mut idx: usize, n: usize, d: usize, out: &mut [usize]) {
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
}

fn top_mass(v: &CVec, n: usize, d: usize, levels: usize) -> f64 {
    let mut per_mode = vec![0.0; n];
    let mut occ = vec![0; n];
    let floor = d.saturating_sub(levels);
    for (idx, a) in v.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        decode(idx, n, d, &mut occ);
        for k in 0..n {
            if occ[k] >= floor {
                per_mode[k] += p;
            }
        }
    }
    per_mode.into_iter().fold(0.0, f64::max)
}

fn apply_op(v: &CVec, n: usize, d: usize, op: Op) -> CVec {
    match op {
        Op::Ladder(l) => apply_ladder(v, n, d, l),
        Op::Quad(r) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mode = r % n;
            let a = apply_ladder(v, n, d, LadderOp::a(mode));
            let ad = apply_ladder(v, n, d, LadderOp::ad(mode));
            if r < n {
                (a + ad) * C64::new(h, 0.0)
            } else {
                (ad - a) * C64::new(0.0, h)
            }
        }
    }
}

/// Ladder action; creation on the top level is dropped (truncation).
fn apply_ladder(v: &CVec, n: usize, d: usize, op: LadderOp) -> CVec {
    let stride = d.pow((n - 1 - op.mode) as u32);
    let mut out = CVec::zeros(v.len());
    for (idx, &amp) in v.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        let m = (idx / stride) % d;
        if op.dagger {
            if m + 1 < d {
                out[idx + stride] += amp * ((m + 1) as f64).sqrt();
            }
        } else if m > 0 {
            out[idx - stride] += amp * (m as f64).sqrt();
        }
    }
    out
}

/// `⟨ψ| w_1 … w_k |ψ⟩`, evaluated as `(w_h† … w_1†ψ)† (w_{h+1} … w_k ψ)` with `h = ⌊k/2⌋` so
/// that each side raises any mode by at most `⌈k/2⌉` levels.
pub fn moment_bruteforce(state: &TruncatedState, word: &Word) -> Result<C64> {
    let ops: Vec<Op> = match word {
        Word::Ladder(w) => w.iter().map(|&l| Op::Ladder(l)).collect(),
        Word::Quadrature(q) => q.iter().map(|&r| Op::Quad(r)).collect(),
    };
    for op in &ops {
        let bad = match *op {
            Op::Ladder(l) => l.mode >= state.n,
            Op::Quad(r) => r >= 2 * state.n,
        };
        if bad {
            return Err(Error::Invalid("operator index out of range".into()));
        }
    }
    let k = ops.len();
    if k > crate::moments::MAX_WORD {
        return Err(Error::WordTooLong(k));
    }
    guard_leak(state, k)?;
    let h = k / 2;
    let (n, d) = (state.n, state.cutoff);
    let mut left = state.amplitudes.clone();
    for &op in &ops[..h] {
        left = apply_op(&left, n, d, adjoint(op));
    }
    let mut right = state.amplitudes.clone();
    for &op in ops[h..].iter().rev() {
        right = apply_op(&right, n, d, op);
    }
    Ok(left.dotc(&right))
}

fn adjoint(op: Op) -> Op {
    match op {
        Op::Ladder(l) => Op::Ladder(LadderOp { mode: l.mode, dagger: !l.dagger }),
        q => q,
    }
}

/// Degree-`k` moments weight level `m` by roughly `m^{k/2}`, so the tolerated top mass
/// shrinks by `d^{⌈k/2⌉}`.
fn guard_leak(state: &TruncatedState, word_len: usize) -> Result<()> {
    let levels = word_len.div_ceil(2).max(2);
    let leak = top_mass(&state.amplitudes, state.n, state.cutoff, levels);
    let weight = (state.cutoff as f64).powi(word_len.div_ceil(2) as i32);
    if leak * weight > LEAK_TOL {
        Err(Error::CutoffTooSmall(leak * weight))
    } else {
        Ok(())
    }
}

/// Full quadrature moment tensor `⟨r_{i_1} … r_{i_t}⟩`, flat row-major over `(2n)^t`.
pub fn quadrature_tensor(state: &TruncatedState, t: usize) -> Result<Vec<C64>> {
    if t > crate::moments::MAX_WORD {
        return Err(Error::WordTooLong(t));
    }
    guard_leak(state, t)?;
    let (n, d) = (state.n, state.cutoff);
    let q = 2 * n;
    let h = t / 2;
    // left[idx] = r_{i_h} … r_{i_1} ψ ; right[idx] = r_{i_{h+1}} … r_{i_t} ψ.
    let left = products(&state.amplitudes, n, d, h, true);
    let right = products(&state.amplitudes, n, d, t - h, false);
    let mut out = Vec::with_capacity(q.pow(t as u32));
    for l in &left {
        for r in &right {
            out.push(l.dotc(r));
        }
    }
    Ok(out)
}

/// Vectors `r_{j_1} … r_{j_len} ψ` for every tuple `j`, row-major. With `first_index_first`,
/// the tuple's first index is applied first; otherwise its last index is.
fn products(psi: &CVec, n: usize, d: usize, len: usize, first_index_first: bool) -> Vec<CVec> {
    let q = 2 * n;
    let mut level = vec![psi.clone()];
    for _ in 0..len {
        let next = if first_index_first {
            // Appending an index on the right means applying it last.
            level.iter().flat_map(|v| (0..q).map(move |r| apply_op(v, n, d, Op::Quad(r)))).collect()
        } else {
            // Prepending an index on the left means applying it last.
            (0..q).flat_map(|r| level.iter().map(move |v| apply_op(v, n, d, Op::Quad(r)))).collect()
        };
        level = next;
    }
    level
}

/// `Λ^(t)` of a truncated state (`t ∈ {1, 2}`).
pub fn lambda_bruteforce(state: &TruncatedState, t: usize) -> Result<LambdaMoment> {
    if t != 1 && t != 2 {
        return Err(Error::UnsupportedDegree(t));
    }
    let flat = quadrature_tensor(state, 2 * t)?;
    let dim = (2 * state.n).pow(t as u32);
    Ok(LambdaMoment { t, n: state.n, entries: CMat::from_row_slice(dim, dim, &flat) })
}

/// `σ^(t)` of a truncated state (`t ∈ {1, 2}`), entry by entry.
pub fn sigma_bruteforce(state: &TruncatedState, t: usize) -> Result<SigmaMoment> {
    if t != 1 && t != 2 {
        return Err(Error::UnsupportedDegree(t));
    }
    let n = state.n;
    let dim = n.pow(t as u32);
    let mut entries = CMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let word: Vec<LadderOp> = if t == 1 {
                vec![LadderOp::a(r), LadderOp::ad(c)]
            } else {
                vec![LadderOp::a(r / n), LadderOp::a(r % n), LadderOp::ad(c / n), LadderOp::ad(c % n)]
            };
            entries[(r, c)] = moment_bruteforce(state, &Word::Ladder(word))?;
        }
    }
    Ok(SigmaMoment { t, n, entries })
}

/// Exact action of a passive unitary, one photon-number sector at a time.
struct PassiveAction {
    /// Per sector: truncated-space indices of its basis states (`None` when outside the
    /// truncation) and the sector unitary.
    sectors: Vec<(Vec<Option<usize>>, CMat)>,
    identity: bool,
}

impl PassiveAction {
    fn new(w: &PassiveUnitary, d: usize) -> Self {
        let n = w.n();
        let m = w.matrix();
        if (m - CMat::identity(n, n)).norm() == 0.0 {
            return Self { sectors: Vec::new(), identity: true };
        }
        let h = unitary_log(m);
        let max_total = n * (d - 1);
        let mut sectors = Vec::with_capacity(max_total + 1);
        for total in 0..=max_total {
            let basis = compositions(total, n);
            let lookup: HashMap<&[usize], usize> = basis.iter().enumerate().map(|(k, b)| (b.as_slice(), k)).collect();
            let dim = basis.len();
            let mut g = CMat::zeros(dim, dim);
            let mut tmp = vec![0usize; n];
            for (col, occ) in basis.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        let hij = h[(i, j)];
                        if hij == ZERO || occ[j] == 0 {
                            continue;
                        }
                        tmp.copy_from_slice(occ);
                        let coeff = if i == j {
                            occ[i] as f64
                        } else {
                            tmp[j] -= 1;
                            tmp[i] += 1;
                            ((occ[j] * (occ[i] + 1)) as f64).sqrt()
                        };
                        let row = lookup[tmp.as_slice()];
                        g[(row, col)] += hij * coeff;
                    }
                }
            }
            let (vals, vecs) = linalg::eigh(&g);
            let phases = CVec::from_iterator(dim, vals.iter().map(|&l| C64::from_polar(1.0, l)));
            let u = &vecs * CMat::from_diagonal(&phases) * vecs.adjoint();
            let idx = basis
                .iter()
                .map(|occ| {
                    if occ.iter().all(|&v| v < d) {
                        Some(occ.iter().fold(0, |acc, &v| acc * d + v))
                    } else {
                        None
                    }
                })
                .collect();
            sectors.push((idx, u));
        }
        Self { sectors, identity: false }
    }

    fn apply(&self, v: &CVec) -> CVec {
        if self.identity {
            return v.clone();
        }
        let mut out = CVec::zeros(v.len());
        for (idx, u) in &self.sectors {
            let local = CVec::from_iterator(idx.len(), idx.iter().map(|k| k.map_or(ZERO, |k| v[k])));
            if local.iter().all(|z| *z == ZERO) {
                continue;
            }
            let mapped = u * local;
            for (k, z) in idx.iter().zip(mapped.iter()) {
                if let Some(k) = k {
                    out[*k] += z;
                }
            }
        }
        out
    }
}

/// Hermitian `H` with `e^{iH} = W`, via the complex Schur form (diagonal for unitary `W`).
fn unitary_log(w: &CMat) -> CMat {
    let (q, t) = nalgebra::Schur::new(w.clone()).unpack();
    let n = w.nrows();
    let angles = CVec::from_iterator(n, (0..n).map(|k| C64::new(t[(k, k)].arg(), 0.0)));
    linalg::hermitize(&(&q * CMat::from_diagonal(&angles) * q.adjoint()))
}

/// All occupation vectors of `n` modes with the given total, in lexicographic order.
fn compositions(total: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// `exp((s/2)(a†² − a²))` on one mode, exponentiated with padding and restricted to `d` levels.
fn single_mode_squeezer(s: f64, d: usize) -> CMat {
    if s == 0.0 {
        return CMat::identity(d, d);
    }
    let big = d + SQUEEZE_PAD;
    // i·K is Hermitian for the anti-Hermitian generator K.
    let mut hk = CMat::zeros(big, big);
    for m in 0..big.saturating_sub(2) {
        let c = 0.5 * s * (((m + 1) * (m + 2)) as f64).sqrt();
        // K|m⟩ has (s/2)√((m+1)(m+2)) on |m+2⟩ and the negative transpose above.
        hk[(m + 2, m)] = C64::new(0.0, c);
        hk[(m, m + 2)] = C64::new(0.0, -c);
    }
    let (vals, vecs) = linalg::eigh(&hk);
    let phases = CVec::from_iterator(big, vals.iter().map(|&l| C64::from_polar(1.0, -l)));
    let u = &vecs * CMat::from_diagonal(&phases) * vecs.adjoint();
    u.view((0, 0), (d, d)).into_owned()
}

fn apply_single_mode(v: &CVec, n: usize, d: usize, mode: usize, m: &CMat) -> CVec {
    let stride = d.pow((n - 1 - mode) as u32);
    let block = stride * d;
    let mut out = CVec::zeros(v.len());
    let mut buf = CVec::zeros(d);
    for base in (0..v.len()).step_by(block) {
        for inner in 0..stride {
            for k in 0..d {
                buf[k] = v[base + inner + k * stride];
            }
            let res = m * &buf;
            for k in 0..d {
                out[base + inner + k * stride] = res[k];
            }
        }
    }
    out
}

/// `U_S` on the truncated space as a product `U_O · U_D · U_V` of Euler factors.
pub struct GaussianEvolution {
    n: usize,
    cutoff: usize,
    first: PassiveAction,
    squeezers: Vec<CMat>,
    last: PassiveAction,
}

impl GaussianEvolution {
    pub fn new(s: &SymplecticMatrix, cutoff: usize) -> Result<Self> {
        let n = s.n();
        checked_dim(n, cutoff)?;
        let m = s.matrix();
        if symplectic::is_orthogonal_symplectic(m, symplectic::tau_sym(1.0)) {
            let w = symplectic::passive_unembed(m);
            return Ok(Self {
                n,
                cutoff,
                first: PassiveAction::new(&w, cutoff),
                squeezers: Vec::new(),
                last: PassiveAction { sectors: Vec::new(), identity: true },
            });
        }
        let e = symplectic::euler(s)?;
        Ok(Self {
            n,
            cutoff,
            first: PassiveAction::new(&symplectic::passive_unembed(e.v.matrix()), cutoff),
            squeezers: e.squeezings.iter().map(|&sq| single_mode_squeezer(sq, cutoff)).collect(),
            last: PassiveAction::new(&symplectic::passive_unembed(e.o.matrix()), cutoff),
        })
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = self.first.apply(v);
        for (k, sq) in self.squeezers.iter().enumerate() {
            out = apply_single_mode(&out, self.n, self.cutoff, k, sq);
        }
        self.last.apply(&out)
    }
}

/// The `d^n × d^n` matrix of `U_S` on the truncated space.
///
/// Every column whose input has at most `d − 6` photons in total must keep its top-two-level
/// mass below [`LEAK_TOL`]; otherwise the cutoff is reported as too small.
pub fn gaussian_unitary_truncated(s: &SymplecticMatrix, cutoff: usize) -> Result<CMat> {
    let n = s.n();
    let dim = checked_dim(n, cutoff)?;
    let evo = GaussianEvolution::new(s, cutoff)?;
    let mut u = CMat::zeros(dim, dim);
    let mut occ = vec![0; n];
    let mut worst: f64 = 0.0;
    for col in 0..dim {
        let mut e = CVec::zeros(dim);
        e[col] = ONE;
        let c = evo.apply(&e);
        decode(col, n, cutoff, &mut occ);
        if occ.iter().sum::<usize>() + 6 <= cutoff || col == 0 {
            worst = worst.max(top_mass(&c, n, cutoff, 2));
        }
        u.set_column(col, &c);
    }
    if worst > LEAK_TOL {
        return Err(Error::CutoffTooSmall(worst));
    }
    Ok(u)
}
