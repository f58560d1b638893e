//! Numerical laboratory for hyperinvariant tensor networks.
//!
//! The crate builds the parameterized constituent tensors of a hyMERA
//! network, verifies the multitensor constraints, assembles descending and
//! ascending superoperators from causal-cone presets, extracts CFT scaling
//! dimensions from their spectra, and drives the randomized envelope study
//! over the {Y,Q,R} / {Y,Q,T} / {Y,Q,S} decompositions of the {5,4} tiling.

pub mod channel;
pub mod decomposition;
pub mod families;
pub mod kac;
pub mod perfect;
pub mod schema;
pub mod tensor;
pub mod tiling;
pub mod trials;

pub use channel::{
    average_descending, average_superoperator, build_ascending, build_descending, central_charge,
    correlation_exponent, fixed_point, scaling_spectrum, ConeSchema, ScalingSpectrum,
    Superoperator,
};
pub use decomposition::{bind_preset, load_decomposition, load_grammar, Decomposition};
pub use families::{
    build_q, build_r, build_s, build_t, build_y, classify, ConstraintReport, Family, ParameterSet,
};
pub use kac::{kac_dimension, KacTable, Rational};
pub use perfect::{ame_4_3, perfect_check, push_operator, PerfectCheckResult};
pub use schema::{
    compose, isometry_defect, nontrivial_spectrum_check, normalize_composite, ContractionSchema,
};
pub use tensor::{contract, eigendecompose, matricize, unitarity_defect, MatrixView, Tensor};
pub use tiling::{deflate, inflate, renormalize_couplings, BoundaryWord, InflationGrammar};
pub use trials::{run_trials, run_trials_parallel, summarize, EnvelopeSummary, TrialConfig};
