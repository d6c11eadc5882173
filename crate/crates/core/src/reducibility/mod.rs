//! Reducibility: condition generation, sampled residual checks, exact
//! classification, and agreement between the two.

mod classify;
mod crossval;
mod residual;
mod sampling;
mod structure;

pub use classify::{
    classify, emit_reduction, identical_derivative_pairs, Classification, ReducedForm, SlopeBlock,
};
pub use crossval::{
    cross_validate, generate_instance, sampled_pairs, AgreementReport, CrossValidationConfig,
    Disagreement, GeneratedInstance, GeneratorConfig, Planted,
};
pub use residual::{factored_residual, residual, residual_exact, Residual, RESIDUAL_TAU};
pub use sampling::{
    check_structure, check_triple, substream, ResidualReport, SampleBox, SamplerConfig,
    TripleReport, DEFAULT_SAMPLES, DEFAULT_TOL,
};
pub use structure::{conditions_for, ConditionTriple, Node, ReducibilityStructure};
