//! Symplectic invariants of quadrature moment tensors.
//!
//! For a tuple of degrees `s`, `Γ^(s) = ⊗_i Σ^(s_i)` transforms as `S^{⊗|s|}Γ^(s)` under a
//! Gaussian unitary. Two families of functions of `Γ` are invariant:
//!
//! * contractions `⟨θ^{⊗|s|/2}| W_π |Γ^(s)⟩` with `θ_ij = Ω_ij`, and
//! * spectra of `(iΩ)^{⊗|s|/2} W_π Γ̄^(s)`, with `Γ̄` the square reshape of `Γ`.
//!
//! Any differing invariant proves two states are not related by a Gaussian unitary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ComplexJson;
use crate::linalg::{self, CMat, C64, I, ZERO};
use crate::moments::{self, FockVector};
use crate::oracle::truncated::{quadrature_tensor, TruncatedState};
use crate::symplectic::{self, SymplecticMatrix};

/// Relative tolerance for declaring two invariant values different.
pub const TAU_WIT: f64 = 1e-6;
/// Absolute floor under [`TAU_WIT`].
pub const TAU_WIT_ABS: f64 = 1e-9;
/// Largest first-moment norm accepted (the tensors are used as central moments).
pub const FIRST_MOMENT_TOL: f64 = 1e-10;
/// Largest total degree `|s|` supported.
pub const MAX_TOTAL_DEGREE: usize = 8;
/// Largest reshaped matrix dimension for spectra.
pub const MAX_SPECTRUM_DIM: usize = 4096;

/// `Σ^(t)_{i_1…i_t} = ⟨r_{i_1} … r_{i_t}⟩`, flat row-major over `(2n)^t` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensor {
    pub t: usize,
    pub n: usize,
    pub entries: Vec<C64>,
}

impl MomentTensor {
    pub fn new(t: usize, n: usize, entries: Vec<C64>) -> Result<Self> {
        let len = (2 * n).pow(t as u32);
        if entries.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite tensor entry".into()));
        }
        Ok(Self { t, n, entries })
    }

    /// Exact moments of the Fock state `|f⟩` from the ladder kernel.
    pub fn fock(f: &FockVector, t: usize) -> Result<Self> {
        let q = 2 * f.n();
        let mut idx = vec![0; t];
        let mut entries = Vec::with_capacity(q.pow(t as u32));
        for flat in 0..q.pow(t as u32) {
            unflatten(flat, q, &mut idx);
            entries.push(moments::fock_quadrature_expectation(f, &idx)?);
        }
        Self::new(t, f.n(), entries)
    }

    /// Moments of a truncated state, by brute force.
    pub fn from_state(state: &TruncatedState, t: usize) -> Result<Self> {
        Self::new(t, state.n(), quadrature_tensor(state, t)?)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        let q = 2 * self.n;
        self.entries[idx.iter().fold(0, |acc, &i| acc * q + i)]
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `S^{⊗t} Σ`, applied one tensor axis at a time.
    pub fn transform(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: s.n() });
        }
        let q = 2 * self.n;
        let m = s.matrix();
        let mut cur = self.entries.clone();
        for axis in 0..self.t {
            let stride = q.pow((self.t - 1 - axis) as u32);
            let mut next = vec![ZERO; cur.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                let i = (flat / stride) % q;
                let base = flat - i * stride;
                let mut acc = ZERO;
                for j in 0..q {
                    acc += cur[base + j * stride] * m[(i, j)];
                }
                *out = acc;
            }
            cur = next;
        }
        Self::new(self.t, self.n, cur)
    }
}

fn unflatten(mut flat: usize, q: usize, out: &mut [usize]) {
    for k in (0..out.len()).rev() {
        out[k] = flat % q;
        flat /= q;
    }
}

/// Moment tensors of degrees `1..=max_degree` for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub n: usize,
    pub tensors: Vec<MomentTensor>,
}

impl MomentSet {
    pub fn new(tensors: Vec<MomentTensor>) -> Result<Self> {
        let n = tensors.first().map(|t| t.n).ok_or_else(|| Error::IncompleteMoments("no tensors".into()))?;
        for (k, t) in tensors.iter().enumerate() {
            if t.t != k + 1 {
                return Err(Error::IncompleteMoments(format!("expected degree {}, found {}", k + 1, t.t)));
            }
            if t.n != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.n });
            }
        }
        Ok(Self { n, tensors })
    }

    pub fn fock(f: &FockVector, max_degree: usize) -> Result<Self> {
        Self::new((1..=max_degree).map(|t| MomentTensor::fock(f, t)).collect::<Result<_>>()?)
    }

    pub fn from_state(state: &TruncatedState, max_degree: usize) -> Result<Self> {
        Self::new((1..=max_degree).map(|t| MomentTensor::from_state(state, t)).collect::<Result<_>>()?)
    }

    pub fn max_degree(&self) -> usize {
        self.tensors.len()
    }

    pub fn get(&self, t: usize) -> Result<&MomentTensor> {
        if t == 0 {
            return Err(Error::UnsupportedDegree(0));
        }
        self.tensors.get(t - 1).ok_or(Error::MissingMoment(t))
    }

    pub fn transform(&self, s: &SymplecticMatrix) -> Result<Self> {
        Self::new(self.tensors.iter().map(|t| t.transform(s)).collect::<Result<_>>()?)
    }

    fn check_central(&self) -> Result<()> {
        if let Some(first) = self.tensors.first() {
            let nrm = first.norm();
            if nrm > FIRST_MOMENT_TOL {
                return Err(Error::NonzeroFirstMoment(nrm));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantKind {
    Contraction,
    Spectrum,
}

/// Defining data of one invariant: degrees `s`, permutation `pi` (0-based) and kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantSpec {
    pub s: Vec<usize>,
    pub pi: Vec<usize>,
    pub kind: InvariantKind,
}

impl InvariantSpec {
    pub fn total_degree(&self) -> usize {
        self.s.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(ComplexJson),
    Spectrum(Vec<ComplexJson>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantValue {
    pub spec: InvariantSpec,
    pub value: InvariantData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvariantData {
    Scalar(C64),
    /// Sorted lexicographically by `(Re, Im)`.
    Spectrum(Vec<C64>),
}

impl InvariantData {
    pub fn to_json(&self) -> Value {
        let cj = |z: &C64| ComplexJson { re: z.re, im: z.im };
        match self {
            Self::Scalar(z) => Value::Scalar(cj(z)),
            Self::Spectrum(v) => Value::Spectrum(v.iter().map(cj).collect()),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            Self::Scalar(z) => z.norm(),
            Self::Spectrum(v) => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

/// `Γ^(s) = Σ^(s_1) ⊗ … ⊗ Σ^(s_k)`.
pub fn gamma_tensor(moments: &[MomentTensor], s: &[usize]) -> Result<MomentTensor> {
    let total: usize = s.iter().sum();
    if total % 2 == 1 {
        return Err(Error::OddTotalDegree(total));
    }
    if total > MAX_TOTAL_DEGREE {
        return Err(Error::UnsupportedDegree(total));
    }
    let n = moments.first().map(|m| m.n).ok_or(Error::MissingMoment(s.first().copied().unwrap_or(0)))?;
    let mut entries = vec![C64::new(1.0, 0.0)];
    for &si in s {
        let m = moments.iter().find(|m| m.t == si).ok_or(Error::MissingMoment(si))?;
        if m.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.n });
        }
        let mut next = Vec::with_capacity(entries.len() * m.entries.len());
        for a in &entries {
            for b in &m.entries {
                next.push(a * b);
            }
        }
        entries = next;
    }
    MomentTensor::new(total, n, entries)
}

fn check_permutation(pi: &[usize], len: usize) -> Result<()> {
    if pi.len() != len {
        return Err(Error::DegreeMismatch { expected: len, got: pi.len() });
    }
    let mut seen = vec![false; len];
    for &p in pi {
        if p >= len || seen[p] {
            return Err(Error::Invalid(format!("{pi:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `⟨θ^{⊗t/2}| W_π |Γ⟩ = Σ_I Γ_I Π_a Ω_{i_{π(2a)}, i_{π(2a+1)}}` (0-based), summed over the
/// `(2n)^{t/2}` nonzero products of `Ω` entries only.
pub fn theta_contraction(gamma: &MomentTensor, pi: &[usize]) -> Result<C64> {
    let t = gamma.t;
    if t % 2 == 1 {
        return Err(Error::DegreeMismatch { expected: t + 1, got: t });
    }
    check_permutation(pi, t)?;
    let n = gamma.n;
    let q = 2 * n;
    let pairs = t / 2;
    let mut idx = vec![0usize; t];
    let mut total = ZERO;
    let mut choice = vec![0usize; pairs];
    loop {
        let mut sign = 1.0;
        for a in 0..pairs {
            let c = choice[a];
            let (k, flip) = (c % n, c >= n);
            let (p, r) = (pi[2 * a], pi[2 * a + 1]);
            if flip {
                idx[p] = k + n;
                idx[r] = k;
                sign = -sign;
            } else {
                idx[p] = k;
                idx[r] = k + n;
            }
        }
        total += gamma.get(&idx) * sign;
        // Odometer over pair choices.
        let mut a = 0;
        loop {
            if a == pairs {
                return Ok(total);
            }
            choice[a] += 1;
            if choice[a] < q {
                break;
            }
            choice[a] = 0;
            a += 1;
        }
    }
}

/// The square reshape `Γ̄`: first `t/2` indices label rows.
pub fn reshape_square(gamma: &MomentTensor) -> Result<CMat> {
    if gamma.t % 2 == 1 {
        return Err(Error::DegreeMismatch { expected: gamma.t + 1, got: gamma.t });
    }
    let dim = (2 * gamma.n).pow((gamma.t / 2) as u32);
    if dim > MAX_SPECTRUM_DIM {
        return Err(Error::TooLarge(dim));
    }
    Ok(CMat::from_row_slice(dim, dim, &gamma.entries))
}

/// `(iΩ)^{⊗m} W_π Γ̄` with `m = t/2` and `π ∈ S_m`.
pub fn twisted_matrix(gamma: &MomentTensor, pi: &[usize]) -> Result<CMat> {
    let g = reshape_square(gamma)?;
    let m = gamma.t / 2;
    check_permutation(pi, m)?;
    let q = 2 * gamma.n;
    let dim = g.nrows();
    let mut wg = CMat::zeros(dim, dim);
    let mut i = vec![0usize; m];
    for row in 0..dim {
        unflatten(row, q, &mut i);
        // W_π|i_1…i_m⟩ = |i_{π(1)}…i_{π(m)}⟩.
        let target = pi.iter().fold(0, |acc, &p| acc * q + i[p]);
        wg.set_row(target, &g.row(row));
    }
    let iomega = linalg::to_complex(&symplectic::omega(gamma.n)) * I;
    let mut k = CMat::identity(1, 1);
    for _ in 0..m {
        k = linalg::kron_c(&k, &iomega);
    }
    Ok(k * wg)
}

/// Eigenvalues of [`twisted_matrix`], sorted by `(Re, Im)`.
pub fn eigen_invariants(gamma: &MomentTensor, pi: &[usize]) -> Result<Vec<C64>> {
    let m = twisted_matrix(gamma, pi)?;
    let mut ev = linalg::eigenvalues(&m);
    sort_canonical(&mut ev);
    Ok(ev)
}

fn sort_canonical(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Bottleneck distance between two multisets under `|z|_∞ = max(|Re z|, |Im z|)`.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let dist = |x: C64, y: C64| (x.re - y.re).abs().max((x.im - y.im).abs());
    let mut cand: Vec<f64> = a.iter().flat_map(|&x| b.iter().map(move |&y| dist(x, y))).collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let feasible = |thr: f64| perfect_matching(n, |i, j| dist(a[i], b[j]) <= thr);
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

/// Kuhn's augmenting-path bipartite matching.
fn perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| edge(i, j)).collect()).collect();
    let mut match_b: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], match_b: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if match_b[j].is_none_or(|k| augment(k, adj, seen, match_b)) {
                match_b[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &adj, &mut seen, &mut match_b) {
            return false;
        }
    }
    true
}

/// Compositions of `total` into positive parts no larger than `max_part`.
fn compositions(total: usize, max_part: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=total.min(max_part) {
        for mut rest in compositions(total - first, max_part) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Perfect matchings of `0..t`, each as pairs `(low, high)` sorted by `low`.
fn matchings(t: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free[0];
        for k in 1..free.len() {
            let b = free[k];
            let rest: Vec<usize> = free[1..].iter().copied().filter(|&x| x != b).collect();
            cur.push((a, b));
            rec(&rest, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let free: Vec<usize> = (0..t).collect();
    rec(&free, &mut Vec::new(), &mut out);
    out
}

fn canonical_matching(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_unstable();
    v
}

/// Position relabellings induced by permuting equal-degree factor blocks of `Γ^(s)`.
fn block_symmetries(s: &[usize]) -> Vec<Vec<usize>> {
    let k = s.len();
    let offsets: Vec<usize> = s.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x;
        Some(o)
    })
    .collect();
    let total: usize = s.iter().sum();
    let mut out = Vec::new();
    linalg::for_each_permutation(k, |p| {
        if (0..k).all(|i| s[p[i]] == s[i]) {
            // Block i moves to the slot of block p[i].
            let mut map = vec![0; total];
            for i in 0..k {
                for d in 0..s[i] {
                    map[offsets[i] + d] = offsets[p[i]] + d;
                }
            }
            out.push(map);
        }
    });
    out
}

/// Canonical invariant specs with `|s| ≤ budget` and every part at most `max_degree`.
///
/// Contractions use non-decreasing `s` (factor order only relabels positions) and one
/// perfect matching per orbit of pair swaps, pair orientation and equal-block exchanges;
/// those symmetries change a contraction at most by a sign. Spectra use every ordered `s`
/// and every `π ∈ S_{|s|/2}`.
pub fn enumerate_specs(budget: usize, max_degree: usize) -> Vec<InvariantSpec> {
    let mut out = Vec::new();
    for total in (2..=budget.min(MAX_TOTAL_DEGREE)).step_by(2) {
        let comps = compositions(total, max_degree);
        for s in comps.iter().filter(|s| s.windows(2).all(|w| w[0] <= w[1])) {
            let syms = block_symmetries(s);
            for m in matchings(total) {
                let key = canonical_matching(&m);
                let is_min = syms.iter().all(|map| {
                    let image: Vec<(usize, usize)> = m.iter().map(|&(a, b)| (map[a], map[b])).collect();
                    canonical_matching(&image) >= key
                });
                if is_min {
                    let pi = key.iter().flat_map(|&(a, b)| [a, b]).collect();
                    out.push(InvariantSpec { s: s.clone(), pi, kind: InvariantKind::Contraction });
                }
            }
        }
        for s in &comps {
            linalg::for_each_permutation(total / 2, |p| {
                out.push(InvariantSpec { s: s.clone(), pi: p.to_vec(), kind: InvariantKind::Spectrum });
            });
        }
    }
    out
}

/// Evaluates one invariant on a moment set.
pub fn evaluate(set: &MomentSet, spec: &InvariantSpec) -> Result<InvariantValue> {
    let gamma = gamma_tensor(&set.tensors, &spec.s)?;
    let value = match spec.kind {
        InvariantKind::Contraction => InvariantData::Scalar(theta_contraction(&gamma, &spec.pi)?),
        InvariantKind::Spectrum => InvariantData::Spectrum(eigen_invariants(&gamma, &spec.pi)?),
    };
    Ok(InvariantValue { spec: spec.clone(), value })
}

/// All canonical invariants with `|s| ≤ budget`.
pub fn invariant_table(set: &MomentSet, budget: usize) -> Result<Vec<InvariantValue>> {
    set.check_central()?;
    enumerate_specs(budget, set.max_degree()).iter().map(|spec| evaluate(set, spec)).collect()
}

/// `‖Γ^(s)‖_F`, which is also the Frobenius norm of every twisted matrix built from it.
pub fn gamma_norm(set: &MomentSet, s: &[usize]) -> Result<f64> {
    s.iter().try_fold(1.0, |acc, &t| Ok(acc * set.get(t)?.norm()))
}

/// Absolute gap between two values of the same invariant and whether it exceeds the
/// witness tolerance.
///
/// `scale` is the magnitude of the underlying moment data (see [`gamma_norm`]). Defective
/// twisted matrices move their eigenvalues by about `√ε` times their norm, so the
/// tolerance cannot be relative to the eigenvalues alone.
pub fn compare_values(a: &InvariantData, b: &InvariantData, scale: f64) -> (f64, bool) {
    let gap = match (a, b) {
        (InvariantData::Scalar(x), InvariantData::Scalar(y)) => (x - y).norm(),
        (InvariantData::Spectrum(x), InvariantData::Spectrum(y)) => multiset_distance(x, y),
        _ => f64::INFINITY,
    };
    let thr = (TAU_WIT * a.scale().max(b.scale()).max(scale)).max(TAU_WIT_ABS);
    (gap, gap > thr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub spec: InvariantSpec,
    pub value_a: InvariantData,
    pub value_b: InvariantData,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    pub spec: InvariantSpec,
    #[serde(rename = "valueA")]
    pub value_a: Value,
    #[serde(rename = "valueB")]
    pub value_b: Value,
    pub gap: f64,
}

impl Witness {
    pub fn to_json(&self) -> WitnessJson {
        WitnessJson { spec: self.spec.clone(), value_a: self.value_a.to_json(), value_b: self.value_b.to_json(), gap: self.gap }
    }
}

fn check_pair(a: &MomentSet, b: &MomentSet, budget: usize) -> Result<usize> {
    let needed = 4.min(budget.max(1));
    for set in [a, b] {
        if set.max_degree() < needed {
            return Err(Error::IncompleteMoments(format!("degrees up to {needed} required, got {}", set.max_degree())));
        }
        set.check_central()?;
    }
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: b.n });
    }
    Ok(a.max_degree().min(b.max_degree()))
}

/// Every canonical invariant with `|s| ≤ budget` on which the two states differ.
pub fn all_witnesses(a: &MomentSet, b: &MomentSet, budget: usize) -> Result<Vec<Witness>> {
    let max_degree = check_pair(a, b, budget)?;
    let mut out = Vec::new();
    for spec in enumerate_specs(budget, max_degree) {
        let va = evaluate(a, &spec)?.value;
        let vb = evaluate(b, &spec)?.value;
        let scale = gamma_norm(a, &spec.s)?.max(gamma_norm(b, &spec.s)?);
        let (gap, differs) = compare_values(&va, &vb, scale);
        if differs {
            out.push(Witness { spec, value_a: va, value_b: vb, gap });
        }
    }
    Ok(out)
}

/// The first invariant (in enumeration order) separating the two states, if any.
///
/// `None` means no witness up to the budget; it does not prove convertibility.
pub fn convertibility_witness(a: &MomentSet, b: &MomentSet, budget: usize) -> Result<Option<Witness>> {
    let max_degree = check_pair(a, b, budget)?;
    for spec in enumerate_specs(budget, max_degree) {
        let va = evaluate(a, &spec)?.value;
        let vb = evaluate(b, &spec)?.value;
        let scale = gamma_norm(a, &spec.s)?.max(gamma_norm(b, &spec.s)?);
        let (gap, differs) = compare_values(&va, &vb, scale);
        if differs {
            return Ok(Some(Witness { spec, value_a: va, value_b: vb, gap }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_symplectic;

    fn fv(v: &[u32]) -> FockVector {
        FockVector::new(v.to_vec())
    }

    #[test]
    fn gamma_of_a_single_factor_is_the_factor() {
        let set = MomentSet::fock(&fv(&[1, 0]), 2).unwrap();
        let g = gamma_tensor(&set.tensors, &[2]).unwrap();
        assert_eq!(&g, set.get(2).unwrap());
        assert_eq!(gamma_tensor(&set.tensors, &[1, 2]), Err(Error::OddTotalDegree(3)));
        assert_eq!(gamma_tensor(&set.tensors, &[4]), Err(Error::MissingMoment(4)));
    }

    #[test]
    fn gamma_product_entries() {
        let set = MomentSet::fock(&fv(&[2]), 2).unwrap();
        let g = gamma_tensor(&set.tensors, &[2, 2]).unwrap();
        let s2 = set.get(2).unwrap();
        for idx in [[0, 1, 1, 0], [1, 1, 0, 1], [0, 0, 0, 0]] {
            assert_eq!(g.get(&idx), s2.get(&idx[..2]) * s2.get(&idx[2..]));
        }
        let g13 = gamma_tensor(&MomentSet::fock(&fv(&[2]), 3).unwrap().tensors, &[1, 3]).unwrap();
        assert!(g13.norm() == 0.0);
    }

    #[test]
    fn vacuum_contraction_is_i() {
        let set = MomentSet::fock(&fv(&[0]), 2).unwrap();
        let v = theta_contraction(set.get(2).unwrap(), &[0, 1]).unwrap();
        assert!((v - I).norm() < 1e-15);
    }

    #[test]
    fn vacuum_spectrum_is_zero_and_one() {
        let set = MomentSet::fock(&fv(&[0]), 2).unwrap();
        let ev = eigen_invariants(set.get(2).unwrap(), &[0]).unwrap();
        assert!(ev[0].norm() < 1e-14 && (ev[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn covariance_spectrum_gives_symplectic_eigenvalues() {
        let f = fv(&[2, 0, 1]);
        let cov = moments::lambda_fock(&f, 1).unwrap().covariance();
        let tensor = MomentTensor::new(2, 3, cov.transpose().iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap();
        let ev = eigen_invariants(&tensor, &[0]).unwrap();
        let mut pos: Vec<f64> = ev.iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
        pos.sort_by(f64::total_cmp);
        for (p, e) in pos.iter().zip([0.5, 1.5, 2.5]) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_matches_trace_form() {
        let s = random_symplectic(2, 0.4, 3);
        let set = MomentSet::fock(&fv(&[1, 2]), 2).unwrap().transform(&s).unwrap();
        let sig = reshape_square(set.get(2).unwrap()).unwrap();
        let omega = linalg::to_complex(&symplectic::omega(2));
        let trace = (omega.transpose() * sig).trace();
        let v = theta_contraction(set.get(2).unwrap(), &[0, 1]).unwrap();
        assert!((v - trace).norm() < 1e-12);
    }

    #[test]
    fn invariants_survive_symplectic_maps() {
        let set = MomentSet::fock(&fv(&[1, 0]), 4).unwrap();
        let moved = set.transform(&random_symplectic(2, 0.5, 8)).unwrap();
        for spec in enumerate_specs(4, 4) {
            let a = evaluate(&set, &spec).unwrap().value;
            let b = evaluate(&moved, &spec).unwrap().value;
            let scale = gamma_norm(&set, &spec.s).unwrap();
            let (gap, differs) = compare_values(&a, &b, scale);
            assert!(!differs, "{spec:?}: {gap}");
        }
    }

    #[test]
    fn dedup_keeps_one_matching_per_orbit() {
        let specs = enumerate_specs(4, 4);
        let contractions: Vec<_> = specs.iter().filter(|s| s.kind == InvariantKind::Contraction).collect();
        // The block swap fixes all three matchings of s=(2,2) but identifies {02|13} and
        // {03|12} for s=(1,1,2).
        let count = |s: &[usize]| contractions.iter().filter(|c| c.s == s).count();
        assert_eq!(count(&[2]), 1);
        assert_eq!(count(&[4]), 3);
        assert_eq!(count(&[2, 2]), 3);
        assert_eq!(count(&[1, 1, 2]), 2);
    }

    #[test]
    fn bottleneck_distance() {
        let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let b = [C64::new(1.0, 0.1), C64::new(0.0, -0.05)];
        assert!((multiset_distance(&a, &b) - 0.1).abs() < 1e-15);
        assert_eq!(multiset_distance(&a, &b[..1]), f64::INFINITY);
    }

    #[test]
    fn identical_states_have_no_witness() {
        let set = MomentSet::fock(&fv(&[1, 1]), 4).unwrap();
        assert!(convertibility_witness(&set, &set, 4).unwrap().is_none());
    }

    #[test]
    fn different_fock_states_are_separated() {
        let a = MomentSet::fock(&fv(&[1, 0]), 4).unwrap();
        let b = MomentSet::fock(&fv(&[2, 0]), 4).unwrap();
        let w = convertibility_witness(&a, &b, 4).unwrap().expect("witness");
        assert_eq!(w.spec.s, vec![2]);
    }

    #[test]
    fn incomplete_moments_are_reported() {
        let a = MomentSet::fock(&fv(&[1]), 2).unwrap();
        assert!(matches!(convertibility_witness(&a, &a, 4), Err(Error::IncompleteMoments(_))));
    }

    #[test]
    fn displaced_states_are_refused() {
        let st = TruncatedState::superposition(&[(fv(&[0]), C64::new(1.0, 0.0)), (fv(&[1]), C64::new(1.0, 0.0))], 8).unwrap();
        let set = MomentSet::from_state(&st, 2).unwrap();
        assert!(matches!(invariant_table(&set, 2), Err(Error::NonzeroFirstMoment(_))));
    }

    pub(crate) fn two_mode_pair() -> (TruncatedState, TruncatedState) {
        let c = |x: f64| C64::new(x, 0.0);
        let a = TruncatedState::superposition(
            &[(fv(&[2, 2]), c(1.0)), (fv(&[1, 0]), c(3f64.sqrt())), (fv(&[0, 1]), c(2f64.sqrt()))],
            7,
        )
        .unwrap();
        let b = TruncatedState::superposition(&[(fv(&[2, 2]), c(1.0)), (fv(&[1, 0]), c(1.0)), (fv(&[0, 1]), c(2.0))], 7)
            .unwrap();
        (a, b)
    }

    #[test]
    fn two_mode_pair_shares_covariance_but_not_fourth_moments() {
        let (a, b) = two_mode_pair();
        let sa = MomentSet::from_state(&a, 4).unwrap();
        let sb = MomentSet::from_state(&b, 4).unwrap();
        let nu = |set: &MomentSet| {
            let g = reshape_square(set.get(2).unwrap()).unwrap();
            symplectic::williamson(&linalg::real_part(&linalg::hermitize(&g))).unwrap().nu
        };
        let (na, nb) = (nu(&sa), nu(&sb));
        for (x, y) in na.iter().zip(nb.iter()) {
            assert!((x - y).abs() < 1e-9, "{na:?} {nb:?}");
        }
        let ws = all_witnesses(&sa, &sb, 4).unwrap();
        assert!(ws.iter().all(|w| w.spec.total_degree() == 4));
        assert!(ws.iter().any(|w| w.spec.s == [4] && w.spec.kind == InvariantKind::Spectrum && w.gap > 1e-3));
        assert!(convertibility_witness(&sa, &sb, 4).unwrap().is_some());
    }

    #[test]
    fn photon_subtracted_squeezed_vacuum_matches_single_photon() {
        let sq = SymplecticMatrix::new(symplectic::squeeze_diag(&[0.3])).unwrap();
        let xi = TruncatedState::fock(&fv(&[0]), 48).unwrap().evolve(&sq).unwrap();
        let sub = xi.apply_and_normalize(crate::moments::LadderOp::a(0)).unwrap();
        let a = MomentSet::fock(&fv(&[1]), 4).unwrap();
        let b = MomentSet::from_state(&sub, 4).unwrap();
        assert!(convertibility_witness(&a, &b, 4).unwrap().is_none());
    }
}
