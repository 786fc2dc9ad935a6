//! Matrix permanents and the Fock-state transition amplitudes they generate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::moments::FockVector;
use crate::symplectic::PassiveUnitary;

/// Largest dimension accepted by [`permanent`].
pub const MAX_PERMANENT_DIM: usize = 24;
/// Largest photon number accepted by [`passive_fock_overlap`].
pub const MAX_PHOTONS: u64 = 20;

/// Ryser's formula with Gray-code subset iteration, `O(2^m · m)`.
pub fn permanent(m: &CMat) -> Result<C64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    if n > MAX_PERMANENT_DIM {
        return Err(Error::TooLarge(n));
    }
    if n == 0 {
        return Ok(ONE);
    }
    let mut row_sums = vec![ZERO; n];
    let mut in_set = vec![false; n];
    let mut total = ZERO;
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        if in_set[j] {
            in_set[j] = false;
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, j)];
            }
        } else {
            in_set[j] = true;
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, s| acc * s);
        if size.is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(if n.is_multiple_of(2) { total } else { -total })
}

/// Leibniz expansion over all permutations, `O(m · m!)`. Reference implementation only.
pub fn permanent_naive(m: &CMat) -> C64 {
    let n = m.nrows();
    let mut total = ZERO;
    linalg::for_each_permutation(n, |p| {
        total += p.iter().enumerate().fold(ONE, |acc, (i, &j)| acc * m[(i, j)]);
    });
    total
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// `W_{f,g}`: row `i` of `W` repeated `f_i` times and column `j` repeated `g_j` times.
pub fn repeated_submatrix(w: &CMat, f: &FockVector, g: &FockVector) -> CMat {
    let rows: Vec<usize> = f.occupations().iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
    let cols: Vec<usize> = g.occupations().iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize)).collect();
    CMat::from_fn(rows.len(), cols.len(), |r, c| w[(rows[r], cols[c])])
}

/// `⟨f|U_W|g⟩ = perm(W_{f,g}) / √(Π f_i! Π g_j!)`.
pub fn passive_fock_overlap(w: &PassiveUnitary, f: &FockVector, g: &FockVector) -> Result<C64> {
    if f.n() != w.n() || g.n() != w.n() {
        return Err(Error::DimensionMismatch { expected: w.n(), got: if f.n() != w.n() { f.n() } else { g.n() } });
    }
    if f.l1() != g.l1() {
        return Err(Error::PhotonNumberMismatch(f.l1(), g.l1()));
    }
    if f.l1() > MAX_PHOTONS {
        return Err(Error::TooManyPhotons(f.l1()));
    }
    let sub = repeated_submatrix(w.matrix(), f, g);
    let norm: f64 = f.occupations().iter().chain(g.occupations()).map(|&k| factorial(k)).product();
    Ok(permanent(&sub)? / norm.sqrt())
}

/// `|⟨f|U_W† U_V|g⟩|`, the overlap between the true and the learned state.
pub fn passive_fidelity(w: &PassiveUnitary, f: &FockVector, v: &PassiveUnitary, g: &FockVector) -> Result<f64> {
    let rel = w.adjoint().compose(v);
    Ok(passive_fock_overlap(&rel, f, g)?.norm())
}

/// Both sides of the permanent perturbation inequality for one random draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Draws `E` with entries uniform in `[−1, 1]` and compares `perm(I + εE)/(b!)^n` with
/// `1 − εbn/(1 − εbn)`, where `I` is the `b × b` grid of `n × n` identity blocks.
pub fn perm_perturbation_check(b: u32, n: usize, epsilon: f64, seed: u64) -> Result<PermCheck> {
    let m = b as usize * n;
    if b == 0 || n == 0 {
        return Err(Error::PreconditionViolated("b and n must be positive".into()));
    }
    if m > 8 {
        return Err(Error::PreconditionViolated(format!("b·n = {m} exceeds 8")));
    }
    let x = epsilon * m as f64;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::PreconditionViolated(format!("need 0 ≤ ε < 1/(bn), got ε = {epsilon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMat::from_fn(m, m, |i, j| {
        let block = if i % n == j % n { 1.0 } else { 0.0 };
        let e: f64 = rng.random_range(-1.0..=1.0);
        C64::new(block + epsilon * e, 0.0)
    });
    let lhs = permanent(&a)?.re / factorial(b).powi(n as i32);
    let rhs = 1.0 - x / (1.0 - x);
    Ok(PermCheck { lhs, rhs, holds: lhs >= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::symplectic::random_passive;

    #[test]
    fn small_permanents() {
        assert_eq!(permanent(&CMat::identity(2, 2)).unwrap(), ONE);
        assert_eq!(permanent(&CMat::from_element(2, 2, ONE)).unwrap(), C64::new(2.0, 0.0));
        assert_eq!(permanent(&CMat::zeros(0, 0)).unwrap(), ONE);
        // perm of the all-ones 4×4 matrix is 4!.
        assert!((permanent(&CMat::from_element(4, 4, ONE)).unwrap().re - 24.0).abs() < 1e-12);
    }

    #[test]
    fn ryser_matches_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = CMat::from_fn(5, 5, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = permanent(&m).unwrap();
        let b = permanent_naive(&m);
        assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
    }

    #[test]
    fn oversized_input_is_rejected() {
        assert_eq!(permanent(&CMat::zeros(25, 25)), Err(Error::TooLarge(25)));
    }

    #[test]
    fn overlap_basics() {
        let id = PassiveUnitary::identity(3);
        let f = FockVector::new(vec![1, 0, 2]);
        assert!((passive_fock_overlap(&id, &f, &f).unwrap() - ONE).norm() < 1e-14);
        let g = FockVector::new(vec![0, 1, 2]);
        assert!(passive_fock_overlap(&id, &f, &g).unwrap().norm() < 1e-14);
        let h = FockVector::new(vec![0, 0, 1]);
        assert_eq!(passive_fock_overlap(&id, &f, &h), Err(Error::PhotonNumberMismatch(3, 1)));
    }

    #[test]
    fn hong_ou_mandel_dip() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bs = PassiveUnitary::new(CMat::from_row_slice(2, 2, &[ONE * s, I * s, I * s, ONE * s])).unwrap();
        let f = FockVector::new(vec![1, 1]);
        assert!(passive_fock_overlap(&bs, &f, &f).unwrap().norm() < 1e-15);
    }

    #[test]
    fn overlaps_form_a_unitary_on_each_photon_sector() {
        let w = random_passive(2, 5);
        // Two photons in two modes: three basis states.
        let basis: Vec<FockVector> = [[2, 0], [1, 1], [0, 2]].iter().map(|v| FockVector::new(v.to_vec())).collect();
        let u = CMat::from_fn(3, 3, |r, c| passive_fock_overlap(&w, &basis[r], &basis[c]).unwrap());
        assert!(linalg::unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn perturbation_check_anchor_values() {
        let c = perm_perturbation_check(2, 2, 0.0, 1).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-14 && c.rhs == 1.0 && c.holds);
        let c = perm_perturbation_check(1, 2, 0.1, 3).unwrap();
        assert!((c.rhs - 0.75).abs() < 1e-15);
        assert!(c.holds);
        assert!(perm_perturbation_check(3, 3, 0.01, 0).is_err());
        assert!(perm_perturbation_check(2, 2, 0.25, 0).is_err());
    }
}
