//! Truncated Fock space: kernels, inner products, Wick calculus and white-noise sampling.

mod eval;
mod kernel;
mod noise;
mod wick;

pub use eval::{
    apply_number_operator, energy_density, evaluate_chaos, evaluate_kernel, malliavin_derivative, malliavin_gradient,
    wick_monomial, MAX_EVAL_ORDER,
};
pub use kernel::{
    factorial, fock_inner, fock_inner_complex, random_kernel, ChaosKernel, FockVector, Support, MAX_ENTRIES,
};
pub use noise::{sample_noise, ModeStreams, NoiseRealization};
pub use wick::{
    enumerate_feynman, enumerate_pairings, pairing_count, wick_product_pair, FeynmanGraph, PairingGraph, Vertex,
};
