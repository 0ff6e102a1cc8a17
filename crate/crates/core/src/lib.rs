//! Fourier-space numerics for the weakly coupled anisotropic KPZ equation in its
//! stochastic Burgers form on the two-dimensional torus.
//!
//! * [`lattice`]: momenta, cutoff lattice, interaction kernel, couplings, logarithmic profile.
//! * [`recursions`]: the scalar recursions `G_j`, `G⁺`, `S_n` and closed-form predictions.
//! * [`fock`]: chaos kernels, Fock inner product, Wick products, Malliavin derivatives.
//! * [`generator`]: generator pieces `L₀`, `A₊`, `A₋`, the hierarchy `H_j`, observables.
//! * [`sim`]: pseudo-spectral Monte Carlo integrator and bulk-diffusion estimators.

pub mod error;
pub mod fock;
pub mod generator;
pub mod lattice;
pub mod recursions;
pub mod sim;
pub mod util;

pub use error::{Error, Result};
