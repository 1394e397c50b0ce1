use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid side must be a power of two and at least 4, got {0}")]
    BadGridSide(usize),

    #[error("grid half-width must exceed 1 so the unit disk is strictly interior, got {0}")]
    BadHalfWidth(f64),

    #[error("non-finite sample at node ({row},{col}), z = {z}, inside the unit disk")]
    NonFiniteSample { row: usize, col: usize, z: Complex64 },

    #[error("field support touches the outer {0}-cell frame; the periodized transform would alias")]
    SupportTouchesBoundary(usize),

    #[error("grids disagree: {0}x{0} (hw {1}) vs {2}x{2} (hw {3})")]
    GridMismatch(usize, f64, usize, f64),

    #[error("radius {0} outside the admissible range (0, 1]")]
    BadRadius(f64),

    #[error("circle mean needs at least 16 samples, got {0}")]
    TooFewCircleSamples(usize),

    #[error("circle mean at z0 = {z0}, r = {r}: {bad} of {total} samples non-finite (> 1%)")]
    CircleMeanNonFinite { z0: Complex64, r: f64, bad: usize, total: usize },

    #[error("coefficient bound violated at z = {z}: |mu| + |nu| = {sum} > q(z) = {q}")]
    CoefficientBound { z: Complex64, sum: f64, q: f64 },

    #[error("dilatation undefined: |mu| + |nu| = {0} exceeds 1")]
    DilatationRange(f64),

    #[error("fixed-point contraction requires q_max < 1, got q_max = {0}")]
    ContractionViolated(f64),

    #[error("invalid parameter `{key}`: {message}")]
    InvalidParam { key: &'static str, message: String },

    #[error("circle mean of Q vanished at r = {0}; divergence integrand undefined")]
    ZeroCircleMean(f64),

    #[error("ring test: I(eps, eps0) = {0} must be positive and finite")]
    DegenerateRingIntegral(f64),

    #[error("map not injective near w = {0}: disjoint cells both contain a preimage")]
    NotInjective(Complex64),

    #[error("inverse map covers {covered_pct:.2}% of disk nodes; need at least {needed_pct:.0}%")]
    InverseCoverage { covered_pct: f64, needed_pct: f64 },

    #[error("solution is not a homeomorphism candidate: degenerate fraction {0:.4} >= 0.005")]
    DegenerateSolution(f64),

    #[error("field file corrupt: {0}")]
    Format(String),

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
