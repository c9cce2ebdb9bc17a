//! Sector-restricted Metropolis sampling, local energies, stochastic
//! reconfiguration and the sequential growth driver.

mod driver;
mod estimator;
mod sampler;
mod sr;

pub use driver::{
    energy_statistics, fit_slope, optimize, sequential_growth, EnergyStatistics, Estimator, GrowthConfig, GrowthStep,
    RunResult, StatisticsPoint, StepRecord, VmcConfig,
};
pub use estimator::{local_energy, local_energy_cached};
pub use sampler::{
    derive_seed, exact_batch, metropolis_sample, metropolis_sample_variational, propose_move, random_start,
    sample_configs, stream_rng, Move, MoveMix, SampleBatch, SamplerConfig,
};
pub use sr::{sr_increment, sr_matrices, sr_step, SrConfig, SrSolver, DIRECT_SOLVE_LIMIT};
