//! The density/momentum SPDE solver: regularised square root, exact
//! damped-wave propagator, Q-Wiener noise sampling, exponential-Euler
//! stepping, exit monitoring, and the noise-norm probes.

pub mod convergence;
pub mod noise;
pub mod probes;
pub mod propagator;
pub mod regularisation;
pub mod stepping;

pub use convergence::{
    choose_horizon, convergence_experiment, replica_seed, smoothed_cosine_initial,
    ConvergenceAggregate, ConvergenceOutcome, ConvergenceRow, ConvergenceSetup,
};
pub use noise::{sample_noise_increment, sample_noise_increment_with, NoiseIncrement};
pub use probes::{noise_hs_norm, noise_lipschitz_probe};
pub use propagator::{mode_energy, mode_propagate, propagator_apply};
pub use regularisation::RegularisationSpec;
pub use stepping::{
    interaction_drift, monitor_exit, solve_noise_free, suggest_resolution, ExitStatus, RidkSolver,
    SolverConfig, SpectralPair,
};
