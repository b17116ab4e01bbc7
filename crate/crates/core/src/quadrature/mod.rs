//! Integration over sublevel sets of the potential and over their boundaries.

mod gauss;
mod integrate;
mod lemmas;
mod region;
mod stokes;

pub use gauss::GaussLegendre;
pub use integrate::{
    boundary_sums, integrate_boundary, integrate_region, volume_sums, BoundaryIntegrand, Flux,
    IntegralResult, Measure, Scalar, VolumeIntegrand, DEFAULT_Q,
};
pub use lemmas::{
    decay_probe, measure_hypotheses, verify_lemma, verify_lemmas, DecayPoint, Hypotheses,
    LemmaConfig, LemmaId, LemmaOutcome, ABSOLUTE_TOLERANCE, HYPOTHESIS_TOLERANCE,
    RELATIVE_TOLERANCE, TAIL_TOLERANCE,
};
pub use region::{Face, Patch, Region, RegionKind, REGULARITY_FLOOR};
pub use stokes::{stokes_residual, PolynomialField, StokesResult};
