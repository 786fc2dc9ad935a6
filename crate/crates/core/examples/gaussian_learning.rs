//! Recover a squeezing network from the quadrature moments of `U_S|f⟩`.

use bosonic_moments::learner;
use bosonic_moments::moments::{self, FockVector};
use bosonic_moments::symplectic::{self, random_symplectic};

fn main() -> bosonic_moments::Result<()> {
    let f = FockVector::new(vec![1, 0, 2]);
    let s = random_symplectic(f.n(), 0.7, 11);
    let (l1, l2) = moments::lambda_state(&s, &f)?;

    let res = learner::find_q(&l1, &l2)?;
    let (s_sorted, _) = learner::sort_symplectic_by_occupation(&s, &f);
    let align = learner::align_symplectic(&res.q, &s_sorted, &res.g)?;
    let (r1, r2) = learner::reconstruct_lambda(&res.q, &res.g)?;
    let recon = (r1.entries - &l1.entries).norm().max((r2.entries - &l2.entries).norm());

    println!("g = {}", res.g.encode());
    println!("symplectic defect of Q = {:.2e}", symplectic::symplectic_defect(res.q.matrix()));
    println!("aligned residual = {:.2e}", align.residual);
    println!("moment reconstruction error = {recon:.2e}");
    Ok(())
}
