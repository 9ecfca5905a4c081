use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis label has an empty internal field")]
    EmptyInternalLabel,

    #[error("a state needs at least one particle")]
    NoParticles,

    #[error("configuration has {found} labels but the state has {expected} particles")]
    ConfigurationLength { expected: usize, found: usize },

    #[error("particle count mismatch: {left} vs {right}")]
    ParticleCountMismatch { left: usize, right: usize },

    #[error("particle index {index} out of range for a {count}-particle state")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("exchange needs two distinct particle indices, got {0} twice")]
    SameParticle(usize),

    /// Raised when a state (or a symmetrization result) has no weight left,
    /// e.g. two fermions asked to occupy the same one-particle state.
    #[error("state has zero norm")]
    ZeroNormState,

    #[error("state is not normalized (norm squared = {0})")]
    NotNormalized(f64),

    #[error("state does not separate into internal and location parts (Schmidt rank {rank})")]
    NotSeparable { rank: usize },

    #[error("basis label `{0}` carries no location")]
    MissingLocation(String),

    #[error("state lies outside the span of the declared clone inputs (residual norm {residual:e})")]
    OutsideSpan { residual: f64 },

    #[error("declared clone inputs are not mutually orthogonal (overlap {overlap:e})")]
    NonOrthogonalInputs { overlap: f64 },

    #[error("labels must differ, both are `{0}`")]
    IdenticalLabels(String),

    #[error("`{0}` is reserved for the blank state")]
    BlankLabel(String),

    #[error("amplitudes are not normalized: |a|^2 + |b|^2 = {0}")]
    AmplitudesNotNormalized(f64),

    #[error("no particle in the state carries location `{0}`")]
    LocationAbsent(String),

    #[error("more than one particle carries location `{0}` in the same configuration")]
    AmbiguousLocation(String),

    #[error("grid geometries differ")]
    GeometryMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wavefunction is not normalized on its grid (integral {0})")]
    WaveNotNormalized(f64),

    #[error("wavefunctions are not orthogonal (|overlap| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("wavefunction supports overlap (shared weight {overlap:e})")]
    SupportsOverlap { overlap: f64 },

    #[error("region {start}..{end} does not hold the support of exactly one wavefunction")]
    RegionStraddles { start: usize, end: usize },

    #[error("region {start}..{end} is empty or exceeds the {points}-point grid")]
    RegionOutOfRange { start: usize, end: usize, points: usize },

    #[error("degenerate interval [{left}, {right}]")]
    DegenerateInterval { left: f64, right: f64 },

    #[error("particle selector must be 1 or 2, got {0}")]
    InvalidParticle(usize),

    #[error("quantum number must be at least 1")]
    InvalidQuantumNumber,
}

pub type Result<T> = std::result::Result<T, Error>;
