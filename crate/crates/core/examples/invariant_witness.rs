//! Moment invariants that tell two states apart under every Gaussian unitary.

use bosonic_moments::invariants::{self, InvariantData, MomentSet};
use bosonic_moments::moments::{FockVector, LadderOp};
use num_complex::Complex64 as C64;
use bosonic_moments::oracle::TruncatedState;
use bosonic_moments::symplectic::{squeeze_diag, SymplecticMatrix};

fn pair_state(c10: f64, c01: f64) -> bosonic_moments::Result<TruncatedState> {
    let terms = [
        (FockVector::new(vec![2, 2]), C64::new(1.0, 0.0)),
        (FockVector::new(vec![1, 0]), C64::new(c10, 0.0)),
        (FockVector::new(vec![0, 1]), C64::new(c01, 0.0)),
    ];
    TruncatedState::superposition(&terms, 7)
}

fn main() -> bosonic_moments::Result<()> {
    // Same covariance spectrum, different fourth moments.
    let a = MomentSet::from_state(&pair_state(3f64.sqrt(), 2f64.sqrt())?, 4)?;
    let b = MomentSet::from_state(&pair_state(1.0, 2.0)?, 4)?;
    match invariants::convertibility_witness(&a, &b, 4)? {
        Some(w) => println!("witness {:?} s={:?} gap={:.3}", w.spec.kind, w.spec.s, w.gap),
        None => println!("no witness up to degree 4"),
    }

    // Photon subtraction from squeezed vacuum looks like |1⟩ to every invariant.
    let squeeze = SymplecticMatrix::new(squeeze_diag(&[0.3]))?;
    let sub = TruncatedState::fock(&FockVector::vacuum(1), 48)?.evolve(&squeeze)?.apply_and_normalize(LadderOp::a(0))?;
    let one = MomentSet::fock(&FockVector::new(vec![1]), 4)?;
    let witness = invariants::convertibility_witness(&one, &MomentSet::from_state(&sub, 4)?, 4)?;
    println!("|1⟩ vs a|ξ⟩: {}", if witness.is_some() { "separated" } else { "no witness" });

    for v in invariants::invariant_table(&one, 2)? {
        if let InvariantData::Spectrum(ev) = &v.value {
            println!("|1⟩ spectrum {:?}: {:?}", v.spec.s, ev.iter().map(|z| z.re).collect::<Vec<_>>());
        }
    }
    Ok(())
}
