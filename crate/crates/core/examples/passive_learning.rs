//! Learn a hidden beamsplitter network from noisy second moments of `U_W|f⟩`.

use bosonic_moments::learner;
use bosonic_moments::moments::{self, FockVector, NoiseSpec};
use bosonic_moments::symplectic::random_passive;

fn main() -> bosonic_moments::Result<()> {
    let f = FockVector::new(vec![0, 1, 1, 3]);
    let w = random_passive(f.n(), 2024);
    let (s1, s2) = moments::sigma_state(&w, &f)?;

    for eps in [0.0, 1e-6, 1e-4] {
        let m1 = moments::add_noise(&s1, &NoiseSpec::gaussian(eps, 1));
        let m2 = moments::add_noise(&s2, &NoiseSpec::gaussian(eps, 2));
        let res = learner::find_v_fock(&m1, &m2)?;
        let (w_sorted, _) = learner::sort_by_occupation(&w, &f);
        let align = learner::align_unitary(&res.v, &w_sorted, &res.g)?;
        let bound = learner::general_occupation_bound(eps, eps, f.n(), f.f_max());
        println!(
            "eps={eps:.0e}  g={}  residual={:.3e}  bound={bound:.3e}",
            res.g.encode(),
            align.residual
        );
    }

    // Constant occupations only need σ^(2) and an a priori b.
    let b = 2;
    let f = FockVector::constant(3, b);
    let w = random_passive(3, 7);
    let (_, s2) = moments::sigma_state(&w, &f)?;
    let v = learner::find_v(&moments::add_noise(&s2, &NoiseSpec::gaussian(1e-5, 3)), b)?;
    let align = learner::align_unitary(&v, &w, &f)?;
    println!(
        "constant b={b}: residual={:.3e}  bound={:.3e}",
        align.residual,
        learner::constant_occupation_bound(1e-5, 3, b)
    );
    Ok(())
}
