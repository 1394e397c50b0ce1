//! Command-line grammar. Flags that have config-file counterparts are
//! `Option`s here so the merge in [`crate::config`] can tell "explicitly
//! given" from "defaulted"; resolved defaults live in
//! [`crate::config::Settings`].

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "beltrami",
    version,
    about = "Planar Beltrami-equation laboratory: solve, ladder, check, diagnose, example",
    long_about = "Solves degenerate quasilinear Beltrami equations with two \
characteristics on the unit disk, audits majorant conditions, and re-checks \
saved runs. Artifacts are deterministic: manifests never carry timing data, \
so byte-identical reruns are expected regardless of BELTRAMI_THREADS."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one equation; write f, omega, fz, fzbar, mu, nu and a manifest.
    ///
    /// Exits 2 (with partial artifacts) if the iteration stops before the
    /// tolerances are met.
    Solve(SolveArgs),
    /// Solve a strictly increasing ladder of truncation levels with warm
    /// starts; write per-level convergence data and the finest-level fields.
    ///
    /// Exits 2 if some level's solve fails to converge; a final
    /// between-level gap above tolerance is reported in the manifest but is
    /// not an error.
    Ladder(LadderArgs),
    /// Evaluate pointwise-majorant conditions (oscillation decay, divergence
    /// integral, ring inequality, integrability) at a basepoint.
    ///
    /// Exits 4 if any verdict fails; `inconclusive` is informational.
    Check(CheckArgs),
    /// Re-audit a saved `solve` run: recompute its residuals from the stored
    /// fields (they must reproduce the manifest bit-for-bit), re-derive
    /// dilatation and polar-form statistics, optionally invert the map.
    ///
    /// Exits 4 if a recomputed value fails to match the stored one.
    Diagnose(DiagnoseArgs),
    /// Emit closed-form reference fields of the benchmark family, or sample
    /// its truncated coefficients into a reusable coefficient table.
    Example(ExampleArgs),
}

/// Flags shared by artifact-producing commands. Every field mirrors a
/// config-file key; command-line values override file values.
#[derive(Args, Debug, Clone)]
pub struct CommonOpts {
    /// Output directory for artifacts (created if missing; guarded by a
    /// .beltrami.lock file while the run is active).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// key=value defaults file ('#' comments allowed). Known keys: n_side,
    /// half_width, tol, max_iter, outer_max, out, csv. Flags override file
    /// values; unknown keys are rejected.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Grid nodes per side (power of two).
    #[arg(long, value_name = "N")]
    pub n_side: Option<usize>,

    /// Half-width L of the computational square [-L, L]^2; needs L > 1 so
    /// the unit disk sits strictly inside.
    #[arg(long, value_name = "L")]
    pub half_width: Option<f64>,

    /// Convergence threshold for both the L2 successive difference and the
    /// sup-norm algebraic residual.
    #[arg(long, value_name = "TOL")]
    pub tol: Option<f64>,

    /// Inner (Neumann) iteration cap per linear solve.
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,

    /// Outer (coefficient-freezing) iteration cap.
    #[arg(long, value_name = "N")]
    pub outer_max: Option<usize>,

    /// Also write CSV versions of every field artifact.
    #[arg(long)]
    pub csv: bool,
}

/// Coefficient-source selection, shared by `solve` and `ladder`. Exactly
/// one source must be chosen; the constant flags jointly form one source.
#[derive(Args, Debug, Clone)]
pub struct OracleOpts {
    /// Benchmark family 1: annulus-supported single characteristic,
    /// degenerate on the unit circle.
    #[arg(long)]
    pub example1: bool,

    /// Benchmark family 2: the same modulus split evenly across both
    /// characteristics (mu = nu).
    #[arg(long)]
    pub example2: bool,

    /// Constant first characteristic, as RE or RE,IM.
    #[arg(long, value_name = "RE[,IM]")]
    pub constant_mu: Option<String>,

    /// Constant second characteristic, as RE or RE,IM.
    #[arg(long, value_name = "RE[,IM]")]
    pub constant_nu: Option<String>,

    /// Coefficient table file (BCOF) sampled on a (z, |w|) lattice.
    #[arg(long, value_name = "PATH")]
    pub coeff_file: Option<PathBuf>,

    /// Family parameter alpha, in (0, 2/p).
    #[arg(long, default_value_t = 1.0, value_name = "A")]
    pub alpha: f64,

    /// Family exponent class p (>= 1); constrains alpha < 2/p.
    #[arg(long = "family-p", default_value_t = 1.0, value_name = "P")]
    pub family_p: f64,

    /// Truncation level for the benchmark families (> 1/alpha). Required
    /// with --example1/--example2 under `solve`; `ladder` takes --levels
    /// instead.
    #[arg(long, value_name = "K")]
    pub k: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub oracle: OracleOpts,
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub oracle: OracleOpts,

    /// Comma-separated, strictly increasing truncation levels.
    #[arg(long, value_name = "K1,K2,...", default_value = "2,4,8,16")]
    pub levels: String,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Check the benchmark family's integrable dilatation majorant
    /// Q(y) = (|y|^alpha + 1) / (alpha |y|^alpha). Its pointwise conditions
    /// legitimately fail at the degeneracy point (the family is covered by
    /// the integral-bound route instead), so expect exit 4 at --z0 0.
    #[arg(long)]
    pub example1: bool,

    /// Constant majorant Q = VALUE.
    #[arg(long, value_name = "VALUE")]
    pub constant_q: Option<f64>,

    /// Power majorant Q(y) = |y - z0|^-BETA.
    #[arg(long, value_name = "BETA")]
    pub power: Option<f64>,

    /// Logarithmic majorant Q(y) = log(e / |y - z0|), clamped below at 1.
    #[arg(long)]
    pub log: bool,

    /// Family parameter alpha for --example1.
    #[arg(long, default_value_t = 1.0, value_name = "A")]
    pub alpha: f64,

    /// Basepoint, as RE or RE,IM; must lie strictly inside the unit disk.
    #[arg(long, default_value = "0", value_name = "RE[,IM]")]
    pub z0: String,

    /// Largest tested scale; needs 0 < delta < dist(z0, boundary).
    #[arg(long, default_value_t = 0.5, value_name = "D")]
    pub delta: f64,

    /// Outer ring radius; needs eps0_prime <= eps0 < dist(z0, boundary).
    #[arg(long, default_value_t = 0.25, value_name = "E")]
    pub eps0: f64,

    /// Smallest admissible inner ring radius.
    #[arg(long = "eps0-prime", default_value_t = 0.0025, value_name = "E'")]
    pub eps0_prime: f64,

    /// Ring inequality constant c > 0.
    #[arg(long = "ring-c", default_value_t = 1.0, value_name = "C")]
    pub ring_c: f64,

    /// Ring inequality exponent p in (0, 2].
    #[arg(long = "ring-p", default_value_t = 1.0, value_name = "P")]
    pub ring_p: f64,

    /// Radii sampled for the profile trace.
    #[arg(long = "n-radii", default_value_t = 16, value_name = "N")]
    pub n_radii: usize,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Run directory produced by `solve` (reads the manifest and the six
    /// field dumps; writes diagnose.txt alongside them).
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,

    /// Inner-distortion exponent in [1, 2].
    #[arg(long = "p-exp", default_value_t = 1.5, value_name = "P")]
    pub p_exp: f64,

    /// Also invert the map on an image-plane grid and integrate the inner
    /// distortion of the inverse over the unit disk.
    #[arg(long)]
    pub invert: bool,

    /// Image-plane grid side for --invert.
    #[arg(long = "invert-n", default_value_t = 128, value_name = "N")]
    pub invert_n: usize,
}

/// Closed-form reference fields available from `example`.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefField {
    /// Untruncated limit map (radial ramp, collapses the inner disk).
    F,
    /// Level-k truncated map (linear ramp inside the truncation radius).
    Fk,
    /// Inverse of the level-k truncated map, as an image-plane field.
    Gk,
    /// First characteristic at a fixed |w|, as a z-plane field.
    Mu,
    /// Pointwise coefficient bound q(z), stored in the real part.
    Q,
}

#[derive(Args, Debug)]
pub struct ExampleArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Which closed-form reference field to emit.
    #[arg(long, value_enum, value_name = "FIELD")]
    pub what: Option<RefField>,

    /// |w| at which to sample the coefficient for --what mu.
    #[arg(long = "at-w", default_value_t = 1.0, value_name = "T")]
    pub at_w: f64,

    /// Family parameter alpha, in (0, 2/p).
    #[arg(long, default_value_t = 1.0, value_name = "A")]
    pub alpha: f64,

    /// Family exponent class p (>= 1).
    #[arg(long = "family-p", default_value_t = 1.0, value_name = "P")]
    pub family_p: f64,

    /// Truncation level (> 1/alpha); required by fk, gk, q, and
    /// --emit-coeff. `f` and `mu` describe the untruncated family.
    #[arg(long, value_name = "K")]
    pub k: Option<f64>,

    /// Sample the level-k gated coefficients into a BCOF table at PATH
    /// (usable later via solve --coeff-file).
    #[arg(long = "emit-coeff", value_name = "PATH")]
    pub emit_coeff: Option<PathBuf>,

    /// z-lattice nodes per side for --emit-coeff.
    #[arg(long = "coeff-nz", default_value_t = 129, value_name = "N")]
    pub coeff_nz: u32,

    /// |w| knots for --emit-coeff.
    #[arg(long = "coeff-nw", default_value_t = 17, value_name = "N")]
    pub coeff_nw: u32,

    /// z-lattice half-extent for --emit-coeff (coefficients vanish outside
    /// the unit disk, so 1.0 covers the support exactly).
    #[arg(long = "coeff-extent", default_value_t = 1.0, value_name = "E")]
    pub coeff_extent: f64,

    /// Largest |w| knot for --emit-coeff; evaluation clamps |w| to this.
    #[arg(long = "coeff-wmax", default_value_t = 2.0, value_name = "W")]
    pub coeff_wmax: f64,
}
