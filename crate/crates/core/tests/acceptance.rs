//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`; the process exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bosonic_moments::invariants::{self, InvariantData, InvariantKind, MomentSet};
use bosonic_moments::learner::{self, align_unitary, find_q, find_v, find_v_fock, sort_by_occupation};
use bosonic_moments::linalg::{op_norm, op_norm_r, C64};
use bosonic_moments::measurement::{self, ProbedState, Transform};
use bosonic_moments::moments::{
    add_noise, lambda_fock, lambda_state, lambda_to_sigma, sigma_fock, sigma_state,
    transform_sigma, FockVector, LadderOp, NoiseSpec,
};
use bosonic_moments::oracle::{
    lambda_bruteforce, passive_fidelity, perm_perturbation_check, permanent, permanent_naive, sigma_bruteforce,
    TruncatedState,
};
use bosonic_moments::symplectic::{
    euler, nearest_orthogonal_symplectic, random_passive, random_symplectic, squeeze_diag, williamson,
    SymplecticMatrix,
};
use nalgebra::DMatrix;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// All non-decreasing occupation vectors of length `n` with entries in `0..=f_max`.
fn multisets(n: usize, f_max: u32) -> Vec<FockVector> {
    fn rec(n: usize, lo: u32, hi: u32, cur: &mut Vec<u32>, out: &mut Vec<FockVector>) {
        if cur.len() == n {
            out.push(FockVector::new(cur.clone()));
            return;
        }
        for v in lo..=hi {
            cur.push(v);
            rec(n, v, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, f_max, &mut Vec::new(), &mut out);
    out
}

fn random_f(rng: &mut ChaCha8Rng, n: usize, f_max: u32) -> FockVector {
    FockVector::new((0..n).map(|_| rng.random_range(0..=f_max)).collect())
}

fn rel_err(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    op_norm(&(a - b)) / op_norm(b)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let m = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / m, ry.iter().sum::<f64>() / m);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn criterion_1() -> Outcome {
    let cases: Vec<(FockVector, u64)> =
        (2..=6).flat_map(|n| multisets(n, 3)).flat_map(|f| (0..50u64).map(move |s| (f.clone(), s))).collect();
    let results: Vec<(bool, f64)> = cases
        .par_iter()
        .map(|(f, seed)| {
            let n = f.n();
            let w = random_passive(n, seed * 7919 + n as u64);
            let (s1, s2) = sigma_state(&w, f).unwrap();
            match find_v_fock(&s1, &s2) {
                Ok(r) => {
                    let fid = passive_fidelity(&w, f, &r.v, &r.g).unwrap_or(0.0);
                    (r.g == f.sorted(), fid)
                }
                Err(_) => (false, 0.0),
            }
        })
        .collect();
    let g_fail = results.iter().filter(|r| !r.0).count();
    let worst = results.iter().map(|r| r.1).fold(1.0, f64::min);
    outcome(
        g_fail == 0 && worst >= 1.0 - 1e-8,
        format!("{} trials, g mismatches {g_fail}, worst fidelity 1-{:.2e}", results.len(), 1.0 - worst),
    )
}

fn criterion_2() -> Outcome {
    let mut cases = Vec::new();
    for &(n, b) in &[(2usize, 1u32), (3, 1), (3, 2), (4, 1)] {
        for &eps in &[1e-5, 1e-4, 1e-3] {
            for seed in 0..20u64 {
                cases.push((n, b, eps, seed));
            }
        }
    }
    let rows: Vec<(f64, f64, bool, bool)> = cases
        .par_iter()
        .map(|&(n, b, eps, seed)| {
            let f = FockVector::constant(n, b);
            let w = random_passive(n, 1000 + seed);
            let s2 = transform_sigma(&w, &sigma_fock(&f, 2).unwrap()).unwrap();
            let noisy = add_noise(&s2, &NoiseSpec::gaussian(eps, 50_000 + seed));
            let v = find_v(&noisy, b).unwrap();
            let r = align_unitary(&v, &w, &f).unwrap().residual;
            let bound = learner::constant_occupation_bound(eps, n, b);
            let fid_ok = match learner::constant_occupation_fidelity_bound(eps, n, b) {
                Some(fb) => passive_fidelity(&w, &f, &v, &f).unwrap() >= fb,
                None => true,
            };
            let applicable = learner::constant_occupation_fidelity_bound(eps, n, b).is_some();
            (r, bound, fid_ok, applicable)
        })
        .collect();
    let res_ok = rows.iter().filter(|r| r.0 < r.1).count();
    let fid_ok = rows.iter().filter(|r| r.2).count();
    let applicable = rows.iter().filter(|r| r.3).count();
    let worst = rows.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
    outcome(
        res_ok == rows.len() && fid_ok == rows.len(),
        format!(
            "residual < bound in {res_ok}/{} (worst ratio {worst:.3}); fidelity bound holds in {fid_ok}/{} ({applicable} applicable)",
            rows.len(),
            rows.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut cases = Vec::new();
    for n in 2..=4usize {
        for &e1 in &[1e-6, 1e-5] {
            for &e2 in &[1e-6, 1e-5] {
                for seed in 0..20u64 {
                    cases.push((n, e1, e2, seed));
                }
            }
        }
    }
    let rows: Vec<Option<f64>> = cases
        .par_iter()
        .map(|&(n, e1, e2, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + n as u64);
            let f = random_f(&mut rng, n, 2);
            let w = random_passive(n, 2000 + seed);
            let (s1, s2) = sigma_state(&w, &f).unwrap();
            let s1 = add_noise(&s1, &NoiseSpec::gaussian(e1, 3 * seed));
            let s2 = add_noise(&s2, &NoiseSpec::gaussian(e2, 3 * seed + 1));
            let r = find_v_fock(&s1, &s2).ok()?;
            let (ws, gs) = sort_by_occupation(&w, &f);
            if r.g != gs {
                return None;
            }
            let res = align_unitary(&r.v, &ws, &gs).ok()?.residual;
            Some(res / learner::general_occupation_bound(e1, e2, n, f.f_max().max(1)))
        })
        .collect();
    let ok = rows.iter().filter(|r| matches!(r, Some(x) if *x <= 1.0)).count();
    let worst = rows.iter().map(|r| r.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    outcome(ok == rows.len(), format!("bound holds in {ok}/{} (worst residual/bound {worst:.2e})", rows.len()))
}

fn criterion_4() -> Outcome {
    let mut cases = Vec::new();
    for n in 2..=3usize {
        for &sm in &[0.5, 1.0, 1.5] {
            for seed in 0..20u64 {
                cases.push((n, sm, seed));
            }
        }
    }
    let rows: Vec<(bool, f64)> = cases
        .par_iter()
        .map(|&(n, sm, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 13 + n as u64);
            let f = random_f(&mut rng, n, 2);
            let s = random_symplectic(n, sm, 3000 + seed);
            let (l1, l2) = lambda_state(&s, &f).unwrap();
            match find_q(&l1, &l2) {
                Ok(r) => {
                    let (r1, r2) = learner::reconstruct_lambda(&r.q, &r.g).unwrap();
                    (r.g == f.sorted(), rel_err(&r1.entries, &l1.entries).max(rel_err(&r2.entries, &l2.entries)))
                }
                Err(_) => (false, f64::INFINITY),
            }
        })
        .collect();
    let g_ok = rows.iter().filter(|r| r.0).count();
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);

    // Error against injected ε₁ over a decade, one fixed noise direction per trial.
    let eps: Vec<f64> = (0..8).map(|k| 1e-6 * 10f64.powf(k as f64 / 7.0)).collect();
    let rhos: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let n = 2 + (seed % 2) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 900);
            let f = random_f(&mut rng, n, 2);
            let s = random_symplectic(n, 0.5, 4000 + seed);
            let (l1, l2) = lambda_state(&s, &f).unwrap();
            let errs: Vec<f64> = eps
                .iter()
                .map(|&e| {
                    let m1 = add_noise(&l1, &NoiseSpec::gaussian(e, 10_000 + seed));
                    match find_q(&m1, &l2) {
                        Ok(r) => {
                            let (r1, r2) = learner::reconstruct_lambda(&r.q, &r.g).unwrap();
                            rel_err(&r1.entries, &l1.entries).max(rel_err(&r2.entries, &l2.entries))
                        }
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect();
            spearman(&eps, &errs)
        })
        .collect();
    let min_rho = rhos.iter().copied().fold(1.0, f64::min);
    let mean_rho = rhos.iter().sum::<f64>() / rhos.len() as f64;
    outcome(
        g_ok == rows.len() && worst <= 1e-6 && min_rho > 0.9,
        format!(
            "g correct {g_ok}/{}, worst reconstruction {worst:.2e}; Spearman over ε₁ min {min_rho:.3} mean {mean_rho:.3}",
            rows.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut holds = 0;
    let mut worst_margin = f64::INFINITY;
    for draw in 0..500u64 {
        let b: u32 = rng.random_range(1..=8);
        let n = rng.random_range(1..=(8 / b as usize));
        let eps = rng.random_range(0.0..1.0) / (b as f64 * n as f64);
        let c = perm_perturbation_check(b, n, eps, draw).unwrap();
        holds += c.holds as usize;
        worst_margin = worst_margin.min(c.lhs - c.rhs);
    }
    let mut worst_diff: f64 = 0.0;
    for dim in 1..=6 {
        for _ in 0..20 {
            let m = DMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            worst_diff = worst_diff.max((permanent(&m).unwrap() - permanent_naive(&m)).norm());
        }
    }
    outcome(
        holds == 500 && worst_diff <= 1e-10,
        format!("inequality holds {holds}/500 (min margin {worst_margin:.2e}); Ryser vs naive max diff {worst_diff:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut msgs = Vec::new();
    let mut pass = true;

    // ν invariance under conjugation.
    let mut worst_inv: f64 = 0.0;
    for k in 0..100u64 {
        let n = rng.random_range(1..=4);
        let nu: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let base = random_symplectic(n, 0.5, 7000 + k);
        let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2 * n,
            nu.iter().chain(nu.iter()).copied(),
        ));
        let m = base.matrix() * d * base.matrix().transpose();
        let s = random_symplectic(n, 0.5, 8000 + k);
        let m2 = s.matrix() * &m * s.matrix().transpose();
        let a = williamson(&m).unwrap().nu;
        let b = williamson(&m2).unwrap().nu;
        let scale = a.iter().copied().fold(1.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            worst_inv = worst_inv.max((x - y).abs() / scale);
        }
    }
    pass &= worst_inv <= 1e-8;
    msgs.push(format!("ν invariance {worst_inv:.1e}"));

    // ν = ½ + f for transformed Fock states.
    let mut worst_nu: f64 = 0.0;
    for k in 0..100u64 {
        let n = rng.random_range(1..=4);
        let f = random_f(&mut rng, n, 3);
        let s = random_symplectic(n, 1.0, 9000 + k);
        let (l1, _) = lambda_state(&s, &f).unwrap();
        let nu = williamson(&l1.covariance()).unwrap().nu;
        let want = f.sorted();
        for (x, &g) in nu.iter().zip(want.occupations()) {
            worst_nu = worst_nu.max((x - 0.5 - g as f64).abs());
        }
    }
    pass &= worst_nu <= 1e-8;
    msgs.push(format!("ν=½+f {worst_nu:.1e}"));

    // ‖S‖ = ‖S⁻¹‖ and Euler reconstruction.
    let mut worst_norm: f64 = 0.0;
    let mut worst_euler: f64 = 0.0;
    for k in 0..100u64 {
        let n = rng.random_range(1..=4);
        let s = random_symplectic(n, 1.5, 10_000 + k);
        let a = op_norm_r(s.matrix());
        worst_norm = worst_norm.max((a - op_norm_r(s.inverse().matrix())).abs() / a);
        let e = euler(&s).unwrap();
        worst_euler = worst_euler.max(op_norm_r(&(e.recompose() - s.matrix())) / a);
    }
    pass &= worst_norm <= 1e-10 && worst_euler <= 1e-9;
    msgs.push(format!("‖S‖ vs ‖S⁻¹‖ {worst_norm:.1e}, Euler {worst_euler:.1e}"));

    // Distance to the orthogonal part.
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for k in 0..100u64 {
        let n = rng.random_range(1..=4);
        let s = random_symplectic(n, 0.5, 11_000 + k);
        let ov = nearest_orthogonal_symplectic(&s).unwrap();
        let lhs = op_norm_r(&(s.matrix() - ov.matrix()));
        let gram = s.matrix().transpose() * s.matrix() - nalgebra::DMatrix::<f64>::identity(2 * n, 2 * n);
        let rhs = op_norm_r(&gram).sqrt();
        if lhs > rhs {
            violations += 1;
        }
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    pass &= violations == 0;
    msgs.push(format!("‖S−OV‖ ≤ √‖SᵀS−I‖ violations {violations}/100 (worst ratio {worst_ratio:.3})"));
    outcome(pass, msgs.join("; "))
}

fn two_mode_pair() -> (TruncatedState, TruncatedState) {
    let c = |x: f64| C64::new(x, 0.0);
    let fv = |v: &[u32]| FockVector::new(v.to_vec());
    let a = TruncatedState::superposition(
        &[(fv(&[2, 2]), c(1.0)), (fv(&[1, 0]), c(3f64.sqrt())), (fv(&[0, 1]), c(2f64.sqrt()))],
        8,
    )
    .unwrap();
    let b = TruncatedState::superposition(&[(fv(&[2, 2]), c(1.0)), (fv(&[1, 0]), c(1.0)), (fv(&[0, 1]), c(2.0))], 8)
        .unwrap();
    (a, b)
}

fn relative_gap(a: &InvariantData, b: &InvariantData) -> f64 {
    match (a, b) {
        (InvariantData::Scalar(x), InvariantData::Scalar(y)) => {
            (x - y).norm() / x.norm().max(y.norm()).max(1e-9)
        }
        (InvariantData::Spectrum(x), InvariantData::Spectrum(y)) => {
            let scale = x.iter().chain(y).map(|z| z.norm()).fold(1e-9, f64::max);
            invariants::multiset_distance(x, y) / scale
        }
        _ => f64::INFINITY,
    }
}

fn criterion_7() -> Outcome {
    let (pa, pb) = two_mode_pair();
    let mut states: Vec<MomentSet> = vec![
        MomentSet::fock(&FockVector::new(vec![1]), 4).unwrap(),
        MomentSet::fock(&FockVector::new(vec![2]), 4).unwrap(),
        MomentSet::fock(&FockVector::new(vec![1, 0]), 4).unwrap(),
        MomentSet::fock(&FockVector::new(vec![2, 1]), 4).unwrap(),
    ];
    states.push(MomentSet::from_state(&pa, 4).unwrap());
    states.push(MomentSet::from_state(&pb, 4).unwrap());
    let worst: f64 = states
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            let specs = invariants::enumerate_specs(4, 4);
            let base: Vec<InvariantData> =
                specs.iter().map(|s| invariants::evaluate(set, s).unwrap().value).collect();
            let mut worst: f64 = 0.0;
            for k in 0..100u64 {
                let s = random_symplectic(set.n, 0.5, 12_000 + 100 * i as u64 + k);
                let moved = set.transform(&s).unwrap();
                for (spec, v0) in specs.iter().zip(&base) {
                    let v1 = invariants::evaluate(&moved, spec).unwrap().value;
                    worst = worst.max(relative_gap(v0, &v1));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let sa = MomentSet::from_state(&pa, 4).unwrap();
    let sb = MomentSet::from_state(&pb, 4).unwrap();
    let nu = |set: &MomentSet| {
        let g = invariants::reshape_square(set.get(2).unwrap()).unwrap();
        let cov = g.map(|z| z.re);
        williamson(&((&cov + cov.transpose()) * 0.5)).unwrap().nu
    };
    let (na, nb) = (nu(&sa), nu(&sb));
    let nu_gap = na.iter().zip(&nb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let witness = invariants::convertibility_witness(&sa, &sb, 4).unwrap();
    let best = invariants::all_witnesses(&sa, &sb, 4).unwrap().into_iter().map(|w| w.gap).fold(0.0, f64::max);
    let witness_desc = witness
        .as_ref()
        .map(|w| format!("s={:?} {:?} gap {:.3e}", w.spec.s, w.spec.kind, w.gap))
        .unwrap_or_else(|| "none".into());

    let sq = SymplecticMatrix::new(squeeze_diag(&[0.3])).unwrap();
    let xi = TruncatedState::fock(&FockVector::new(vec![0]), 48).unwrap().evolve(&sq).unwrap();
    let sub = xi.apply_and_normalize(LadderOp::a(0)).unwrap();
    let one = MomentSet::fock(&FockVector::new(vec![1]), 4).unwrap();
    let subm = MomentSet::from_state(&sub, 4).unwrap();
    let none = invariants::convertibility_witness(&one, &subm, 4).unwrap().is_none();
    let worst_sub = invariants::enumerate_specs(4, 4)
        .iter()
        .map(|s| {
            relative_gap(
                &invariants::evaluate(&one, s).unwrap().value,
                &invariants::evaluate(&subm, s).unwrap().value,
            )
        })
        .fold(0.0, f64::max);

    let pass = worst <= 1e-7
        && nu_gap <= 1e-9
        && witness.as_ref().is_some_and(|w| w.spec.kind == InvariantKind::Spectrum || w.gap > 1e-3)
        && best > 1e-3
        && none
        && worst_sub <= 1e-6;
    outcome(
        pass,
        format!(
            "invariance worst rel {worst:.1e}; pair ν gap {nu_gap:.1e}, first witness {witness_desc}, largest gap {best:.3e}; |1⟩ vs a|ξ⟩ witness-free {none} (worst rel {worst_sub:.1e})"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut msgs = Vec::new();
    let mut pass = true;

    // Zero-noise inversion.
    let mut worst_inv: f64 = 0.0;
    for (k, n) in [1usize, 2, 3, 4].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(80 + k as u64);
        let f = random_f(&mut rng, n, 2);
        for transform in [
            Transform::Passive(random_passive(n, k as u64)),
            Transform::Active(random_symplectic(n, 0.5, k as u64)),
        ] {
            let st = ProbedState::new(transform, f.clone()).unwrap();
            let probes = measurement::random_probes(n, measurement::default_probe_count(n), 99 + k as u64);
            let (s1, s2) = st.sigma().unwrap();
            let c2 = measurement::simulate_correlators_with_std(&st, &probes, 1, 0.0, 0).unwrap();
            let c1 = measurement::simulate_number_means_with_std(&st, &probes, 1, 0.0, 0).unwrap();
            let r2 = measurement::recover_sigma2(&c2, &probes).unwrap();
            let r1 = measurement::recover_sigma1(&c1, &probes).unwrap();
            worst_inv = worst_inv.max(rel_err(&r2.entries, &s2.entries)).max(rel_err(&r1.entries, &s1.entries));
        }
    }
    pass &= worst_inv <= 1e-10;
    msgs.push(format!("zero-noise inversion {worst_inv:.1e}"));

    // End-to-end with measured ε₁, ε₂.
    let shots = 1_000_000_000_000u64;
    let e2e: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let n = 2 + (seed % 2) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 300);
            let f = random_f(&mut rng, n, 2);
            let w = random_passive(n, 5000 + seed);
            let st = ProbedState::new(Transform::Passive(w.clone()), f.clone()).unwrap();
            let probes = measurement::random_probes(n, measurement::default_probe_count(n), 6000 + seed);
            let (s1, s2) = st.sigma().unwrap();
            let c1 = measurement::simulate_number_means(&st, &probes, shots, seed).unwrap();
            let c2 = measurement::simulate_correlators(&st, &probes, shots, seed).unwrap();
            let m1 = measurement::recover_sigma1(&c1, &probes).unwrap();
            let m2 = measurement::recover_sigma2(&c2, &probes).unwrap();
            let e1 = op_norm(&(&m1.entries - &s1.entries));
            let e2 = op_norm(&(&m2.entries - &s2.entries));
            let bound = learner::general_occupation_bound(e1, e2, n, f.f_max().max(1));
            match find_v_fock(&m1, &m2) {
                Ok(r) => {
                    let (ws, gs) = sort_by_occupation(&w, &f);
                    if r.g != gs {
                        return (f64::INFINITY, bound);
                    }
                    (align_unitary(&r.v, &ws, &gs).unwrap().residual, bound)
                }
                Err(_) => (f64::INFINITY, bound),
            }
        })
        .collect();
    let ok = e2e.iter().filter(|(r, b)| r <= b).count();
    let worst_ratio = e2e.iter().map(|(r, b)| r / b).fold(0.0, f64::max);
    pass &= ok == e2e.len();
    msgs.push(format!("end-to-end bound holds {ok}/{} (worst ratio {worst_ratio:.2e})", e2e.len()));

    // 1/√shots scaling of the 90th-percentile error.
    let st = ProbedState::new(Transform::Passive(random_passive(2, 8)), FockVector::new(vec![1, 2])).unwrap();
    let probes = measurement::random_probes(2, 12, 8);
    let s2 = st.sigma().unwrap().1;
    let levels = [10_000u64, 100_000, 1_000_000, 10_000_000, 100_000_000];
    let q90: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(li, &shots)| {
            let mut errs: Vec<f64> = (0..400u64)
                .into_par_iter()
                .map(|t| {
                    let c = measurement::simulate_correlators(&st, &probes, shots, 1_000_000 * li as u64 + t).unwrap();
                    op_norm(&(&measurement::recover_sigma2(&c, &probes).unwrap().entries - &s2.entries))
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            errs[(0.9 * errs.len() as f64) as usize]
        })
        .collect();
    let scaled: Vec<f64> = q90.iter().zip(&levels).map(|(e, &s)| e * (s as f64).sqrt()).collect();
    let ref_v = scaled[0];
    let worst_dev = scaled.iter().map(|v| (v / ref_v - 1.0).abs()).fold(0.0, f64::max);
    pass &= worst_dev <= 0.15;
    msgs.push(format!("√shots·q90 spread {worst_dev:.3} over 10⁴..10⁸ shots"));
    outcome(pass, msgs.join("; "))
}

fn criterion_9() -> Outcome {
    let cases: Vec<(usize, u64, bool)> =
        (1..=2).flat_map(|n| (0..20u64).flat_map(move |s| [(n, s, false), (n, s, true)])).collect();
    let worst: f64 = cases
        .par_iter()
        .map(|&(n, seed, active)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 17 + n as u64);
            let f = random_f(&mut rng, n, 2);
            let s = if active {
                random_symplectic(n, 0.5, 13_000 + seed)
            } else {
                bosonic_moments::symplectic::passive_embed(&random_passive(n, 14_000 + seed))
            };
            let cutoff = if active { 48 } else { 8 };
            let st = TruncatedState::fock(&f, cutoff).unwrap().evolve(&s).unwrap();
            let (k1, k2) = lambda_state(&s, &f).unwrap();
            let (ks1, ks2) = lambda_to_sigma(&k1, &k2).unwrap();
            let b1 = lambda_bruteforce(&st, 1).unwrap();
            let b2 = lambda_bruteforce(&st, 2).unwrap();
            let bs1 = sigma_bruteforce(&st, 1).unwrap();
            let bs2 = sigma_bruteforce(&st, 2).unwrap();
            let d = |a: &DMatrix<C64>, b: &DMatrix<C64>| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut worst = d(&k1.entries, &b1.entries).max(d(&k2.entries, &b2.entries));
            worst = worst.max(d(&ks1.entries, &bs1.entries)).max(d(&ks2.entries, &bs2.entries));
            if !active {
                let w = bosonic_moments::symplectic::passive_unembed(s.matrix());
                let (p1, p2) = sigma_state(&w, &f).unwrap();
                worst = worst.max(d(&p1.entries, &bs1.entries)).max(d(&p2.entries, &bs2.entries));
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let fock_ok = lambda_fock(&FockVector::new(vec![1, 2]), 2).is_ok();
    outcome(worst <= 1e-8 && fock_ok, format!("{} states, worst entry difference {worst:.1e}", cases.len()))
}

fn criterion_10() -> Outcome {
    let big = |s: &str| s.parse::<BigUint>().unwrap();
    // (n, f_max, l1, α, c1, c2) → (N1, N2), computed by hand.
    let passive = [
        ((2, 1, 2, 1, 1, 1), ("4096", "8192")),
        ((1, 1, 1, 0, 1, 1), ("1", "1")),
        ((3, 2, 4, 0, 1, 1), ("5038848", "1259712")),
        ((2, 3, 5, 2, 2, 3), ("59719680", "5529600")),
        ((10, 1, 10, 0, 1, 1), ("10000000000", "100000000000")),
    ];
    // (n, f_max, α, β, c1, c2) with s = 0 → (N1, N2).
    let active = [
        ((1, 1, 0, 0, 1, 1), ("1", "1")),
        ((2, 1, 0, 0, 1, 1), ("75557863725914323419136", "4096")),
        ((2, 2, 1, 1, 1, 1), ("3138550867693340381917894711603833208051177722232017256448", "67108864")),
        ((3, 1, 0, 2, 5, 7), ("82116016341303290731157339003546276445", "33480783")),
        ((1, 2, 0, 0, 1, 1), ("316912650057057350374175801344", "2048")),
    ];
    let mut ok = 0;
    let mut bad = Vec::new();
    for (k, ((n, fm, l1, a, c1, c2), (e1, e2))) in passive.iter().enumerate() {
        let b = measurement::sample_budget_passive(*n, *fm, *l1, *a, *c1, *c2).unwrap();
        if b.n1 == big(e1) && b.n2 == big(e2) {
            ok += 1;
        } else {
            bad.push(format!("passive#{k}"));
        }
    }
    for (k, ((n, fm, a, be, c1, c2), (e1, e2))) in active.iter().enumerate() {
        let b = measurement::sample_budget_active(*n, *fm, 0.0, *a, *be, *c1, *c2).unwrap();
        if b.n1 == big(e1) && b.n2 == big(e2) {
            ok += 1;
        } else {
            bad.push(format!("active#{k}"));
        }
    }
    outcome(ok == 10, format!("{ok}/10 exact{}", if bad.is_empty() { String::new() } else { format!(", mismatches {bad:?}") }))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact-moment passive recovery", criterion_1),
        ("constant-occupation bound compliance", criterion_2),
        ("general-occupation bound compliance", criterion_3),
        ("active-case consistency", criterion_4),
        ("permanent perturbation inequality", criterion_5),
        ("Williamson/symplectic suite", criterion_6),
        ("invariant suite", criterion_7),
        ("measurement pipeline", criterion_8),
        ("dual-oracle agreement", criterion_9),
        ("budget calculators", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !res.pass as usize;
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            k + 1,
            if res.pass { "PASS" } else { "FAIL" },
            res.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
