//! Fock-state overlaps through matrix permanents.

use bosonic_moments::learner;
use bosonic_moments::moments::{self, FockVector, NoiseSpec};
use bosonic_moments::oracle;
use bosonic_moments::symplectic::random_passive;

fn main() -> bosonic_moments::Result<()> {
    let u = random_passive(5, 1);
    println!("per(U) Ryser = {:.6}", oracle::permanent(u.matrix())?);
    println!("per(U) naive = {:.6}", oracle::permanent_naive(u.matrix()));

    let f = FockVector::new(vec![2, 1, 0, 1]);
    let w = random_passive(f.n(), 9);
    let (s1, s2) = moments::sigma_state(&w, &f)?;
    for eps in [0.0, 1e-4, 1e-3] {
        let res = learner::find_v_fock(
            &moments::add_noise(&s1, &NoiseSpec::gaussian(eps, 4)),
            &moments::add_noise(&s2, &NoiseSpec::gaussian(eps, 5)),
        )?;
        let fid = oracle::passive_fidelity(&w, &f, &res.v, &res.g)?;
        println!("eps={eps:.0e}: 1 − |⟨ψ|ψ̂⟩| = {:.3e}", 1.0 - fid);
    }
    Ok(())
}
