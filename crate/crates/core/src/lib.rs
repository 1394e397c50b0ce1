//! Numerical toolkit for planar Beltrami equations with two characteristics,
//!
//! ```text
//!     f_zbar = mu(z, f) * f_z + nu(z, f) * conj(f_z),        z in the unit disk,
//! ```
//!
//! where the measurable coefficients may degenerate (|mu| + |nu| -> 1) near
//! interior sets. The crate provides:
//!
//! * a square periodized grid enclosing the unit disk with Wirtinger
//!   derivatives, disk integration, and circle means ([`grid`]);
//! * FFT-based Beurling and Cauchy transforms ([`spectral`]);
//! * coefficient oracles, truncation to bounded-dilatation levels, and the
//!   Neumann-series fixed-point solver with an outer freezing loop for
//!   quasilinear coefficients plus a truncation ladder ([`coeff`], [`solver`]);
//! * integral condition checkers: finite mean oscillation, divergence-type
//!   radial integrals, annular ring tests, and L^p integrability
//!   ([`conditions`]);
//! * post-solve diagnostics: dilatation fields, geometric map inversion,
//!   inverse inner dilatation integrals, log-Hoelder modulus probes
//!   ([`diagnostics`]);
//! * a closed-form radial stretch family used as ground truth throughout the
//!   test suite ([`examples`]);
//! * binary/CSV field serialization and a plain-text run manifest ([`io`]).

pub mod coeff;
pub mod conditions;
pub mod diagnostics;
mod error;
pub mod examples;
pub mod grid;
pub mod io;
pub mod solver;
pub mod spectral;
pub mod util;

pub use coeff::{
    freeze, q0_of, truncate, BoundFn, CoeffFn, Frozen, GateFn, Oracle, BOUND_SLACK, W_CLAMP,
};
pub use conditions::{
    check_conditions, dilatation_k, divergence_integral, fmo_test, geometric_scales,
    q_integrability, ring_integral_test, ConditionReport, DivergenceResult, FmoResult, Psi,
    QIntegrability, RadialProfile, RingResult, Verdict,
};
pub use diagnostics::{
    derivative_l1_convergence, dilatation_report, dilatation_report_from_field,
    inverse_dilatation_integral, invert_field, invert_mapping, log_holder_check,
    log_holder_field, DilatationReport, HolderReport, InverseMap,
};
pub use error::{Error, Result};
pub use examples::{
    ex1_dilatation, ex1_f, ex1_fk, ex1_gk, ex1_mu, ex1_q, ex2_coefficients, example1_oracle,
    example2_oracle, kmu_gate, polar_identity_check, Dilatation, ExampleParams, PolarCheck,
};
pub use grid::{circle_mean, ComplexField, GridSpec, PolarPoint, RealField, Sampled};
pub use io::Manifest;
pub use solver::{
    run_ladder, solve_linear, solve_quasilinear, LadderRun, MappingSolution, Normalization,
    SolveStatus, SolverOptions, INNER_TOL_FACTOR,
};
pub use spectral::{SpectralWorkspace, SUPPORT_FRAME};

/// Complex scalar used across the crate.
pub type C64 = num_complex::Complex64;
