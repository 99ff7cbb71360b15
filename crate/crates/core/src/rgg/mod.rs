//! Random geometric graphs under the step kernel, a spectral Gram-matrix estimator,
//! and loss sweeps around the `d ~ n h(p)` threshold.

mod graph;
mod spectral;
mod sweep;

pub use graph::{
    bernoulli_code_length, calibrate_threshold, generate_graph, graph_from_latents, Adjacency, GraphSample,
    DEFAULT_CALIBRATION_SAMPLES, MAX_VERTICES,
};
pub use spectral::{
    calibrate_spectral, rank_candidates, spectral_estimate, spectral_estimate_checked, spectral_projection,
    SpectralCalibration, SpectralCoefficients,
};
pub use sweep::{grid, phase_sweep, Estimator, ExperimentRecord, GridPoint, SweepOptions, SweepOutput, SweepSummary};
