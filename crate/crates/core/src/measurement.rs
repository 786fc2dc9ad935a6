//! Finite-sample estimation of the ladder moments from photon-number correlators.
//!
//! A known passive probe `U` is applied before measuring the Hermitian observables
//! `a_i a_j a_i† a_j†` (and `a_i a_i†` for the second moments). Each outcome is a known
//! real-linear functional of the unknown moment matrix, so enough probes give an
//! overdetermined system that is solved by least squares.
//!
//! Shot noise is additive Gaussian with standard deviation `scale/√shots`, where `scale` is
//! the magnitude bound used in the concentration argument: `(L+1)(L+2)` for passive states
//! with `L = ‖f‖₁`, and `e^{4s}(f_max+1)²` for active ones (halved exponents for `σ^(1)`).

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::moments::{self, FockVector, SigmaMoment};
use crate::symplectic::{self, PassiveUnitary, SymplecticMatrix};

/// Ratio below which a singular value of the equilibrated system counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// The Gaussian part of a probed state.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Passive(PassiveUnitary),
    Active(SymplecticMatrix),
}

impl Transform {
    pub fn n(&self) -> usize {
        match self {
            Self::Passive(w) => w.n(),
            Self::Active(s) => s.n(),
        }
    }
}

/// `U|f⟩` for a Gaussian unitary `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbedState {
    pub transform: Transform,
    pub f: FockVector,
}

impl ProbedState {
    pub fn new(transform: Transform, f: FockVector) -> Result<Self> {
        if transform.n() != f.n() {
            return Err(Error::DimensionMismatch { expected: transform.n(), got: f.n() });
        }
        Ok(Self { transform, f })
    }

    /// Exact `(σ^(1), σ^(2))`.
    pub fn sigma(&self) -> Result<(SigmaMoment, SigmaMoment)> {
        match &self.transform {
            Transform::Passive(w) => moments::sigma_state(w, &self.f),
            Transform::Active(s) => {
                let (l1, l2) = moments::lambda_state(s, &self.f)?;
                moments::lambda_to_sigma(&l1, &l2)
            }
        }
    }

    /// Magnitude bound behind the per-observable noise level for `σ^(order)`.
    pub fn noise_scale(&self, order: usize) -> f64 {
        let k = order as i32;
        match &self.transform {
            Transform::Passive(_) => {
                let l = self.f.l1() as f64;
                if order == 1 {
                    l + 1.0
                } else {
                    (l + 1.0) * (l + 2.0)
                }
            }
            Transform::Active(s) => (2.0 * k as f64 * s.s_max()).exp() * (self.f.f_max() as f64 + 1.0).powi(k),
        }
    }
}

/// One noisy correlator estimate.
///
/// For `σ^(2)` data this estimates `σ^(2)(U^(k))_{ij;ij}` with `i ≤ j`; for `σ^(1)` data
/// `i = j` and it estimates `σ^(1)(U^(k))_{ii}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSample {
    pub probe_index: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub shots: u64,
}

/// `count` Haar-random probes, deterministic in `seed`.
pub fn random_probes(n: usize, count: usize, seed: u64) -> Vec<PassiveUnitary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| symplectic::random_passive_with(n, &mut rng)).collect()
}

/// Default probe count `3n²`.
pub fn default_probe_count(n: usize) -> usize {
    3 * n * n
}

fn cells(n: usize, probes: usize, order: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for k in 0..probes {
        for i in 0..n {
            if order == 1 {
                out.push((k, i, i));
            } else {
                for j in i..n {
                    out.push((k, i, j));
                }
            }
        }
    }
    out
}

fn draw_noise(seed: u64, order: usize, k: usize, i: usize, j: usize, n: usize, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((order as u64) << 60) | ((k * n * n + i * n + j) as u64));
    let z: f64 = StandardNormal.sample(&mut rng);
    std * z
}

fn simulate(
    exact: &SigmaMoment,
    probes: &[PassiveUnitary],
    shots: u64,
    std: f64,
    seed: u64,
) -> Result<Vec<CorrelatorSample>> {
    if shots == 0 {
        return Err(Error::PreconditionViolated("shots must be at least 1".into()));
    }
    let n = exact.n;
    let order = exact.t;
    let conj: Vec<SigmaMoment> = probes.iter().map(|u| moments::transform_sigma(u, exact)).collect::<Result<_>>()?;
    Ok(cells(n, probes.len(), order)
        .into_par_iter()
        .map(|(k, i, j)| {
            let idx = if order == 1 { i } else { i * n + j };
            let exact_value = conj[k].entries[(idx, idx)].re;
            let value = exact_value + draw_noise(seed, order, k, i, j, n, std);
            CorrelatorSample { probe_index: k, i, j, value, shots }
        })
        .collect())
}

/// Noisy `σ^(2)(U^(k))_{ij;ij}` for every probe and pair `i ≤ j`, with the state's noise scale.
pub fn simulate_correlators(
    state: &ProbedState,
    probes: &[PassiveUnitary],
    shots: u64,
    seed: u64,
) -> Result<Vec<CorrelatorSample>> {
    let std = state.noise_scale(2) / (shots as f64).sqrt();
    simulate_correlators_with_std(state, probes, shots, std, seed)
}

/// As [`simulate_correlators`] with an explicit noise standard deviation (0 = infinite shots).
pub fn simulate_correlators_with_std(
    state: &ProbedState,
    probes: &[PassiveUnitary],
    shots: u64,
    std: f64,
    seed: u64,
) -> Result<Vec<CorrelatorSample>> {
    simulate(&state.sigma()?.1, probes, shots, std, seed)
}

/// Noisy `σ^(1)(U^(k))_{ii}` for every probe and mode.
pub fn simulate_number_means(
    state: &ProbedState,
    probes: &[PassiveUnitary],
    shots: u64,
    seed: u64,
) -> Result<Vec<CorrelatorSample>> {
    let std = state.noise_scale(1) / (shots as f64).sqrt();
    simulate_number_means_with_std(state, probes, shots, std, seed)
}

pub fn simulate_number_means_with_std(
    state: &ProbedState,
    probes: &[PassiveUnitary],
    shots: u64,
    std: f64,
    seed: u64,
) -> Result<Vec<CorrelatorSample>> {
    simulate(&state.sigma()?.0, probes, shots, std, seed)
}

/// Orthonormal basis of the symmetric subspace of `C^n ⊗ C^n`, as pairs `(a, b)`, `a ≤ b`.
fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect()
}

/// Coefficients of `y† H y` in the real parameters of a Hermitian `H`: diagonal entries
/// first, then `(Re H_pq, Im H_pq)` for `p < q`.
fn hermitian_row(y: &[C64]) -> Vec<f64> {
    let m = y.len();
    let mut row = Vec::with_capacity(m * m);
    row.extend(y.iter().map(|z| z.norm_sqr()));
    for p in 0..m {
        for q in p + 1..m {
            let c = y[p].conj() * y[q];
            row.push(2.0 * c.re);
            row.push(-2.0 * c.im);
        }
    }
    row
}

fn hermitian_from_params(x: &[f64], m: usize) -> CMat {
    let mut h = CMat::zeros(m, m);
    for p in 0..m {
        h[(p, p)] = C64::new(x[p], 0.0);
    }
    let mut k = m;
    for p in 0..m {
        for q in p + 1..m {
            let z = C64::new(x[k], x[k + 1]);
            h[(p, q)] = z;
            h[(q, p)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Equilibrated least squares with a rank check.
fn solve_least_squares(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let unknowns = rows.first().map_or(0, |r| r.len());
    if rows.len() < unknowns {
        return Err(Error::RankDeficient { rank: rows.len(), unknowns });
    }
    let mut a = DMatrix::from_fn(rows.len(), unknowns, |r, c| rows[r][c]);
    let scales: Vec<f64> = (0..unknowns)
        .map(|c| {
            let nrm = a.column(c).norm();
            if nrm > 0.0 { 1.0 / nrm } else { 1.0 }
        })
        .collect();
    for (c, s) in scales.iter().enumerate() {
        a.column_mut(c).scale_mut(*s);
    }
    let b = DVector::from_vec(rhs);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < unknowns {
        return Err(Error::RankDeficient { rank, unknowns });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(x.iter().zip(&scales).map(|(v, s)| v * s).collect())
}

fn check_samples(samples: &[CorrelatorSample], probes: &[PassiveUnitary], n: usize) -> Result<()> {
    for s in samples {
        if s.probe_index >= probes.len() || s.i >= n || s.j >= n {
            return Err(Error::Invalid(format!("sample {s:?} out of range")));
        }
    }
    Ok(())
}

/// Recovers `σ^(2)` from correlator samples taken under the given probes.
pub fn recover_sigma2(samples: &[CorrelatorSample], probes: &[PassiveUnitary]) -> Result<SigmaMoment> {
    let n = probes.first().ok_or(Error::RankDeficient { rank: 0, unknowns: 1 })?.n();
    check_samples(samples, probes, n)?;
    let pairs = sym_pairs(n);
    let m = pairs.len();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for s in samples {
        let u = probes[s.probe_index].matrix();
        // y = E†(U⊗U)†|ij⟩ in the symmetric basis.
        let v = |a: usize, b: usize| (u[(s.i, a)] * u[(s.j, b)]).conj();
        let y: Vec<C64> = pairs
            .iter()
            .map(|&(a, b)| if a == b { v(a, a) } else { (v(a, b) + v(b, a)) * r2 })
            .collect();
        rows.push(hermitian_row(&y));
        rhs.push(s.value);
    }
    let h = hermitian_from_params(&solve_least_squares(rows, rhs)?, m);
    // σ = E H E†.
    let mut e = CMat::zeros(n * n, m);
    for (p, &(a, b)) in pairs.iter().enumerate() {
        if a == b {
            e[(a * n + a, p)] = C64::new(1.0, 0.0);
        } else {
            e[(a * n + b, p)] = C64::new(r2, 0.0);
            e[(b * n + a, p)] = C64::new(r2, 0.0);
        }
    }
    let sigma = &e * h * e.adjoint();
    Ok(SigmaMoment { t: 2, n, entries: crate::linalg::hermitize(&sigma) })
}

/// Recovers `σ^(1)` from single-mode samples taken under the given probes.
pub fn recover_sigma1(samples: &[CorrelatorSample], probes: &[PassiveUnitary]) -> Result<SigmaMoment> {
    let n = probes.first().ok_or(Error::RankDeficient { rank: 0, unknowns: 1 })?.n();
    check_samples(samples, probes, n)?;
    let mut rows = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for s in samples {
        let u = probes[s.probe_index].matrix();
        let y: Vec<C64> = (0..n).map(|a| u[(s.i, a)].conj()).collect();
        rows.push(hermitian_row(&y));
        rhs.push(s.value);
    }
    let h = hermitian_from_params(&solve_least_squares(rows, rhs)?, n);
    Ok(SigmaMoment { t: 1, n, entries: h })
}

/// Writes samples as CSV (`probe_index,i,j,value,shots`) after a schema comment.
pub fn write_samples_csv<W: Write>(out: W, samples: &[CorrelatorSample]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# schema=1").map_err(|e| Error::Invalid(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["probe_index", "i", "j", "value", "shots"]).map_err(|e| Error::Invalid(e.to_string()))?;
    for s in samples {
        w.write_record([
            s.probe_index.to_string(),
            s.i.to_string(),
            s.j.to_string(),
            format!("{:.16e}", s.value),
            s.shots.to_string(),
        ])
        .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Invalid(e.to_string()))
}

/// Per-observable sample counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBudget {
    pub n1: BigUint,
    pub n2: BigUint,
    pub alpha: u32,
    pub beta: u32,
    pub c1: u64,
    pub c2: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetInputs {
    pub mode: String,
    pub n: u64,
    pub f_max: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub alpha: u32,
    pub beta: u32,
    pub c1: u64,
    pub c2: u64,
}

/// Budget JSON; the counts are decimal strings since they overflow every float format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetJson {
    #[serde(rename = "N1")]
    pub n1: String,
    #[serde(rename = "N2")]
    pub n2: String,
    pub inputs: BudgetInputs,
}

fn positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        Err(Error::PreconditionViolated(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn pow(base: u64, exp: u32) -> BigUint {
    BigUint::from(base).pow(exp)
}

/// `⌈p·e^x⌉` for `x ≥ 0`, with `e^x` carried as a 53-bit mantissa times a power of two.
/// Exact when `x = 0`; otherwise the relative error is about `2⁻⁵²`.
fn mul_exp_ceil(p: &BigUint, x: f64) -> BigUint {
    if x == 0.0 {
        return p.clone();
    }
    let y = x / std::f64::consts::LN_2;
    let k = y.floor();
    let mantissa = ((y - k).exp2() * 2f64.powi(52)).round() as u64;
    let prod = p * BigUint::from(mantissa);
    let shift = k as i64 - 52;
    if shift >= 0 {
        prod << shift as u64
    } else {
        let s = (-shift) as u64;
        let one = BigUint::from(1u8);
        (prod + ((&one << s) - &one)) >> s
    }
}

/// `N1 = c1·n^{9+2α} f_max⁶ ‖f‖₁`, `N2 = c2·n^{9+2α} f_max² ‖f‖₁²`.
pub fn sample_budget_passive(n: u64, f_max: u64, l1: u64, alpha: u32, c1: u64, c2: u64) -> Result<SampleBudget> {
    for (name, v) in [("n", n), ("f_max", f_max), ("l1", l1), ("c1", c1), ("c2", c2)] {
        positive(name, v)?;
    }
    let base = pow(n, 9 + 2 * alpha);
    Ok(SampleBudget {
        n1: BigUint::from(c1) * &base * pow(f_max, 6) * BigUint::from(l1),
        n2: BigUint::from(c2) * &base * pow(f_max, 2) * pow(l1, 2),
        alpha,
        beta: 0,
        c1,
        c2,
    })
}

/// `N1 = ⌈c1·n^{76+16α+β} f_max^{98} e^{120s}⌉`, `N2 = ⌈c2·n^{12+2α+β} f_max^{11} e^{24s}⌉`.
pub fn sample_budget_active(
    n: u64,
    f_max: u64,
    s: f64,
    alpha: u32,
    beta: u32,
    c1: u64,
    c2: u64,
) -> Result<SampleBudget> {
    for (name, v) in [("n", n), ("f_max", f_max), ("c1", c1), ("c2", c2)] {
        positive(name, v)?;
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::PreconditionViolated("s must be finite and nonnegative".into()));
    }
    let n1 = BigUint::from(c1) * pow(n, 76 + 16 * alpha + beta) * pow(f_max, 98);
    let n2 = BigUint::from(c2) * pow(n, 12 + 2 * alpha + beta) * pow(f_max, 11);
    Ok(SampleBudget { n1: mul_exp_ceil(&n1, 120.0 * s), n2: mul_exp_ceil(&n2, 24.0 * s), alpha, beta, c1, c2 })
}

impl SampleBudget {
    pub fn to_json(&self, inputs: BudgetInputs) -> BudgetJson {
        BudgetJson { n1: self.n1.to_string(), n2: self.n2.to_string(), inputs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;

    fn passive(n: usize, f: &[u32], seed: u64) -> ProbedState {
        ProbedState::new(Transform::Passive(symplectic::random_passive(n, seed)), FockVector::new(f.to_vec())).unwrap()
    }

    #[test]
    fn single_photon_identity_probe_gives_six() {
        let st = ProbedState::new(Transform::Passive(PassiveUnitary::identity(1)), FockVector::new(vec![1])).unwrap();
        let probes = vec![PassiveUnitary::identity(1)];
        let s = simulate_correlators_with_std(&st, &probes, 1, 0.0, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].value - 6.0).abs() < 1e-12);
        let rec = recover_sigma2(&s, &probes).unwrap();
        assert!((rec.entries[(0, 0)].re - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_recovery_is_exact() {
        let st = passive(2, &[1, 0], 3);
        let probes = random_probes(2, default_probe_count(2), 11);
        let (s1, s2) = st.sigma().unwrap();
        let rec2 = recover_sigma2(&simulate_correlators_with_std(&st, &probes, 1, 0.0, 0).unwrap(), &probes).unwrap();
        assert!(op_norm(&(&rec2.entries - &s2.entries)) < 1e-10 * op_norm(&s2.entries));
        let rec1 = recover_sigma1(&simulate_number_means_with_std(&st, &probes, 1, 0.0, 0).unwrap(), &probes).unwrap();
        assert!(op_norm(&(&rec1.entries - &s1.entries)) < 1e-10 * op_norm(&s1.entries));
    }

    #[test]
    fn active_states_recover_too() {
        let st = ProbedState::new(
            Transform::Active(symplectic::random_symplectic(3, 0.5, 4)),
            FockVector::new(vec![0, 1, 2]),
        )
        .unwrap();
        let probes = random_probes(3, default_probe_count(3), 5);
        let s2 = st.sigma().unwrap().1;
        let rec = recover_sigma2(&simulate_correlators_with_std(&st, &probes, 1, 0.0, 0).unwrap(), &probes).unwrap();
        assert!(op_norm(&(&rec.entries - &s2.entries)) < 1e-9 * op_norm(&s2.entries));
    }

    #[test]
    fn too_few_probes_is_rank_deficient() {
        let st = passive(3, &[1, 1, 0], 1);
        let probes = random_probes(3, 2, 5);
        let s = simulate_correlators_with_std(&st, &probes, 1, 0.0, 0).unwrap();
        assert!(matches!(recover_sigma2(&s, &probes), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn noise_std_matches_its_calibration() {
        let st = passive(2, &[1, 1], 2);
        let probes = random_probes(2, 1, 3);
        let shots = 10_000;
        let expected = st.noise_scale(2) / (shots as f64).sqrt();
        let exact = simulate_correlators_with_std(&st, &probes, shots, 0.0, 0).unwrap()[0].value;
        let draws: Vec<f64> = (0..1000)
            .map(|seed| simulate_correlators(&st, &probes, shots, seed).unwrap()[0].value - exact)
            .collect();
        let var = draws.iter().map(|d| d * d).sum::<f64>() / draws.len() as f64;
        assert!((var.sqrt() / expected - 1.0).abs() < 0.1);
    }

    #[test]
    fn simulation_is_deterministic() {
        let st = passive(3, &[2, 0, 1], 9);
        let probes = random_probes(3, 27, 1);
        let a = simulate_correlators(&st, &probes, 100, 42).unwrap();
        let b = simulate_correlators(&st, &probes, 100, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_grows_linearly_with_noise() {
        let st = passive(2, &[1, 0], 3);
        let probes = random_probes(2, 12, 2);
        let s2 = st.sigma().unwrap().1;
        let pts: Vec<(f64, f64)> = [1e-4, 2e-4, 5e-4, 1e-3]
            .iter()
            .map(|&std| {
                let s = simulate_correlators_with_std(&st, &probes, 1, std, 8).unwrap();
                (std, op_norm(&(&recover_sigma2(&s, &probes).unwrap().entries - &s2.entries)))
            })
            .collect();
        let k = pts[0].1 / pts[0].0;
        for (std, err) in pts {
            assert!((err / std / k - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn passive_budget_anchor() {
        let b = sample_budget_passive(2, 1, 2, 1, 1, 1).unwrap();
        assert_eq!(b.n1, BigUint::from(4096u32));
        assert_eq!(b.n2, BigUint::from(8192u32));
        let a0 = sample_budget_passive(3, 2, 4, 0, 1, 1).unwrap();
        let a1 = sample_budget_passive(3, 2, 4, 1, 1, 1).unwrap();
        assert_eq!(&a0.n1 * 9u32, a1.n1);
        let f1 = sample_budget_passive(3, 1, 4, 0, 1, 1).unwrap();
        assert_eq!(&f1.n1 * 64u32, a0.n1);
        assert!(sample_budget_passive(0, 1, 1, 0, 1, 1).is_err());
    }

    #[test]
    fn active_budget_anchor() {
        let b = sample_budget_active(1, 1, 0.0, 0, 0, 1, 1).unwrap();
        assert_eq!((b.n1, b.n2), (BigUint::from(1u8), BigUint::from(1u8)));
        let b = sample_budget_active(2, 1, 0.0, 0, 0, 1, 1).unwrap();
        assert_eq!(b.n1, BigUint::from(1u8) << 76u32);
        assert_eq!(b.n2, BigUint::from(1u8) << 12u32);
        let lo = sample_budget_active(2, 2, 0.1, 1, 1, 1, 1).unwrap();
        let hi = sample_budget_active(2, 2, 0.2, 1, 1, 1, 1).unwrap();
        assert!(hi.n1 > lo.n1 && hi.n2 > lo.n2);
    }

    #[test]
    fn exponential_factor_is_accurate() {
        let p = BigUint::from(1000u32);
        // ln 3 itself is rounded, so the ceiling may land one above.
        let r = mul_exp_ceil(&p, 3f64.ln());
        assert!(r == BigUint::from(3000u32) || r == BigUint::from(3001u32));
        let big = mul_exp_ceil(&BigUint::from(1u8), 100.0);
        let digits = big.to_string();
        assert_eq!(&digits[..10], "2688117141");
    }

    #[test]
    fn csv_has_schema_line() {
        let st = passive(1, &[1], 0);
        let probes = random_probes(1, 2, 0);
        let s = simulate_correlators(&st, &probes, 10, 0).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# schema=1\nprobe_index,i,j,value,shots\n0,0,0,"));
    }
}
