//! Williamson and Euler decompositions of a random symplectic matrix.

use bosonic_moments::moments::{self, FockVector};
use bosonic_moments::symplectic::{self, random_symplectic};

fn main() -> bosonic_moments::Result<()> {
    let s = random_symplectic(3, 0.9, 5);

    let e = symplectic::euler(&s)?;
    println!("squeezings: {:?}", e.squeezings);
    println!("‖S − O D V‖ = {:.2e}", (e.recompose() - s.matrix()).norm());

    let nearest = symplectic::nearest_orthogonal_symplectic(&s)?;
    println!("distance to nearest passive map = {:.3}", (nearest.matrix() - s.matrix()).norm());

    // The symplectic spectrum of the covariance of U_S|f⟩ is f + ½.
    let f = FockVector::new(vec![0, 2, 1]);
    let (lam, _) = moments::lambda_state(&s, &f)?;
    let w = symplectic::williamson(&lam.covariance())?;
    println!("symplectic eigenvalues: {:?}", w.nu);
    Ok(())
}
