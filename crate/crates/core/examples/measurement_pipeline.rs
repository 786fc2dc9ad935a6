//! Estimate σ^(1), σ^(2) from simulated photon counts behind random probes, then learn.

use bosonic_moments::learner;
use bosonic_moments::measurement::{self, ProbedState, Transform};
use bosonic_moments::moments::FockVector;
use bosonic_moments::symplectic::random_passive;

fn main() -> bosonic_moments::Result<()> {
    let f = FockVector::new(vec![0, 1, 2]);
    let w = random_passive(f.n(), 17);
    let state = ProbedState::new(Transform::Passive(w.clone()), f.clone())?;
    let probes = measurement::random_probes(f.n(), measurement::default_probe_count(f.n()), 3);

    for shots in [10_000u64, 1_000_000, 100_000_000] {
        let c2 = measurement::simulate_correlators(&state, &probes, shots, 1)?;
        let c1 = measurement::simulate_number_means(&state, &probes, shots, 2)?;
        let s2 = measurement::recover_sigma2(&c2, &probes)?;
        let s1 = measurement::recover_sigma1(&c1, &probes)?;
        let (t1, t2) = state.sigma()?;
        let err = (&s2.entries - &t2.entries).norm().max((&s1.entries - &t1.entries).norm());
        let learned = learner::find_v_fock(&s1, &s2);
        let summary = match learned {
            Ok(r) if r.g == f.sorted() => {
                let (ws, _) = learner::sort_by_occupation(&w, &f);
                format!("residual {:.2e}", learner::align_unitary(&r.v, &ws, &r.g)?.residual)
            }
            Ok(r) => format!("wrong occupations {}", r.g.encode()),
            Err(e) => format!("learner failed: {e}"),
        };
        println!("shots={shots:>9}: moment error {err:.2e}, {summary}");
    }

    let c2 = measurement::simulate_correlators(&state, &probes[..2], 1000, 1)?;
    measurement::write_samples_csv(std::io::stdout().lock(), &c2[..3])?;
    Ok(())
}
