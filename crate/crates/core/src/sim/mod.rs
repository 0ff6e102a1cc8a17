//! Pseudo-spectral Monte Carlo for the Fourier-mode SDE system and its estimators.

pub mod estimators;
pub mod integrator;
pub mod nonlin;
pub mod state;

pub use estimators::{
    estimate_dbulk, ito_trick_probe, modal_second_moments, qv_statistics, zero_mode_integrals, DbulkEstimate,
    ItoTrickReport, ModalMoment, QvStatistics, MAX_PATH_ORDER,
};
pub use integrator::{run_replicas, step, Integrator, NoiseIncrement, NonlinearityMode, SimConfig};
pub use nonlin::{
    default_grid_side, min_grid_side, nonlinearity_direct, nonlinearity_transform, Nonlinearity, TransformWorkspace,
};
pub use state::{init_stationary, SpectralState};
