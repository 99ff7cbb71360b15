//! Numerical oracles that certify or sandwich the closed-form results.

mod blahut;
mod entropy_mc;
mod quantize;
mod suites;

pub use blahut::{
    blahut_arimoto, blahut_arimoto_at_distortion, blahut_arimoto_traced, gaussian_grid, rd_curve, DiscreteRDProblem,
    RDCurvePoint,
};
pub use entropy_mc::{mc_differential_entropy_wishart, wishart_log_density, EntropyEstimate, CHUNK, MIN_SAMPLES};
pub use quantize::{quantization_upper_bound, UniformQuantizer, CLIP_SIGMAS};
pub use suites::{
    lemma31_pair, moment_checks, moment_targets, verify_inequality_suite, SuiteCheck, SuiteReport,
    DEFAULT_MOMENT_PARAMS, INEQUALITY_TOLERANCE, LEMMA31_MAX_DIM, MOMENT_SIGMAS, RECURSION_TOLERANCE, SPECFUN_GRID,
    SUITE_NAMES,
};
