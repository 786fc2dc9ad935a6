//! Independent ground truth: permanents and a truncated Fock-space simulator.

pub mod permanent;
pub mod truncated;

pub use permanent::{passive_fidelity, passive_fock_overlap, perm_perturbation_check, permanent, permanent_naive, PermCheck};
pub use truncated::{
    gaussian_unitary_truncated, lambda_bruteforce, moment_bruteforce, quadrature_tensor, sigma_bruteforce, TruncatedState, Word,
    LEAK_TOL,
};
