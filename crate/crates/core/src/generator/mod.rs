//! Generator decomposition `L^N = L₀ + A₊ + A₋` on truncated Fock space, the resolvent
//! hierarchy `H_j`, diagonal observables, the operator `𝒮` and the replacement sum.

mod observables;
mod ops;
mod replace;
mod resolvent;
mod sop;
mod variance;

pub use observables::{h1_norm, hminus1_norm, observables_f, observables_f_upto};
pub use ops::{apply_aminus, apply_aplus, apply_l0, half_energy};
pub use replace::{replacement_integral, replacement_sum};
pub use resolvent::{
    apply_hj, diagonal_resolvent, gaussian_test_function, resolvent_pairing, solve_resolvent,
    solve_truncated_generator, truncated_residual, ResolventConfig, SourceKernel, SourceVariant,
};
pub use sop::{apply_s, decompose_pairing, off_diagonal_constants, s_half_norm, sigma, sigma_momenta, PairingParts};
pub use variance::{variance_kernel_f2211, variance_kernel_f22};
