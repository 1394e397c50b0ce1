//! Fixed-point solvers for the two-characteristic equation
//! `f_zbar = mu f_z + nu conj(f_z)`.
//!
//! The linear (frozen-coefficient) problem is solved by the Neumann
//! iteration on the density `omega = f_zbar`:
//!
//! ```text
//! omega_{j+1} = mu + nu + mu * T(omega_j) + nu * conj(T(omega_j)),
//! ```
//!
//! starting from `omega_0 = 0`. Since `T` is an L2 isometry and
//! `|mu| + |nu| <= q_max < 1` pointwise, the map is an L2 contraction with
//! ratio `q_max`; the solution is reassembled as `f = z + C(omega)` and
//! shifted so `f(0) = 0`. The quasilinear problem is handled by an outer
//! freezing loop that re-samples the coefficients along the current iterate,
//! and the truncation ladder solves a sequence of uniformly elliptic
//! problems whose solutions converge to a solution of the degenerate
//! equation.

use num_complex::Complex64;

use crate::coeff::{freeze, truncate, Frozen, GateFn, Oracle};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec};
use crate::spectral::SpectralWorkspace;

/// Inner (linear) solves inside the quasilinear loop run at
/// `tol * INNER_TOL_FACTOR` so the outer sup-difference is measured well
/// above the inner solver's noise floor.
pub const INNER_TOL_FACTOR: f64 = 1e-2;

/// Tolerances and iteration budgets.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Convergence threshold: the linear iteration stops once both the L2
    /// successive difference and the sup-norm algebraic residual drop below
    /// this; the outer loop stops once sup|f_next - f| does.
    pub tol: f64,
    /// Inner (Neumann) iteration cap.
    pub max_iter: usize,
    /// Outer (freezing) iteration cap.
    pub outer_max: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 2000, outer_max: 40 }
    }
}

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// All requested tolerances met.
    Converged,
    /// Iteration budget exhausted first; fields hold the last iterate.
    IterationLimit,
    /// Outer sup-differences increased three times in a row.
    Oscillating,
}

/// Record of the normalization applied to a solution: the raw map is
/// shifted by `-shift` so `f(0) = 0`, and the value at `z = 1` (bilinear,
/// since 1 need not be a node) is recorded. Post-composition with a complex
/// affine map does not preserve the equation (it rotates `nu`), so no scale
/// is ever applied by the solver itself; comparisons against unit-normalized
/// closed forms may apply the real factor from [`Normalization::real_scale`].
#[derive(Clone, Copy, Debug)]
pub struct Normalization {
    pub shift: Complex64,
    pub f_at_one: Complex64,
}

impl Normalization {
    /// Real positive rescale factor `1 / Re f(1)`, available only when
    /// `Im f(1)` is negligible (relative 1e-3) and the real part is
    /// positive — the case for the radial example family. A real positive
    /// scale commutes with both characteristics, so applying it preserves
    /// the equation.
    pub fn real_scale(&self) -> Option<f64> {
        let re = self.f_at_one.re;
        let im = self.f_at_one.im;
        if re > 0.0 && im.abs() <= 1e-3 * re.abs() {
            Some(1.0 / re)
        } else {
            None
        }
    }
}

/// A solved mapping with its derivative fields and convergence record.
///
/// `fz` and `fzbar` are the spectral derivative fields of the iteration
/// (`fz = 1 + T(omega)`, `fzbar = omega`), so `residual_linf` is the
/// algebraic fixed-point residual
/// `max over nodes |z| < 1 of |fzbar - mu fz - nu conj(fz)|`.
/// `fd_residual_linf` is the independent finite-difference residual of the
/// stored `f` over `|z| <= 1 - 2h`; it is dominated by grid differentiation
/// error at coefficient discontinuities and is reported as a diagnostic,
/// not a convergence measure.
#[derive(Clone)]
pub struct MappingSolution {
    pub f: ComplexField,
    pub fz: ComplexField,
    pub fzbar: ComplexField,
    pub omega: ComplexField,
    pub residual_linf: f64,
    pub fd_residual_linf: f64,
    /// Total inner iterations across all linear solves.
    pub iterations: usize,
    /// Outer freezing iterations (0 for a plain linear solve).
    pub outer_iterations: usize,
    pub status: SolveStatus,
    /// L2 successive-difference norms of the last linear solve.
    pub diff_history: Vec<f64>,
    /// Outer sup-differences sup|f_new - f_old| over disk nodes.
    pub outer_diffs: Vec<f64>,
    pub normalization: Normalization,
    /// Coefficients of the last (converged) frozen problem.
    pub frozen: Frozen,
}

impl MappingSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn grid(&self) -> GridSpec {
        self.f.grid()
    }
}

/// One rung per truncation level, solved coldest-to-finest with warm starts.
#[derive(Clone)]
pub struct LadderRun {
    pub levels: Vec<f64>,
    pub solutions: Vec<MappingSolution>,
    /// sup over nodes `|z| <= 0.9` of consecutive solution differences.
    pub sup_diffs: Vec<f64>,
    /// True when every level converged and the final sup-difference is
    /// below the solve tolerance.
    pub converged: bool,
    /// First level whose solve did not converge, if the ladder aborted.
    pub aborted_level: Option<f64>,
}

/// Solves the linear equation for frozen coefficients.
pub fn solve_linear(frozen: &Frozen, grid: GridSpec, opts: &SolverOptions) -> Result<MappingSolution> {
    let mut ws = SpectralWorkspace::new(grid);
    solve_linear_with(frozen, grid, opts, None, &mut ws)
}

fn validate_frozen(frozen: &Frozen, grid: GridSpec) -> Result<()> {
    for field in [&frozen.mu, &frozen.nu] {
        if field.grid() != grid {
            return Err(Error::GridMismatch(
                grid.n_side(),
                grid.half_width(),
                field.grid().n_side(),
                field.grid().half_width(),
            ));
        }
    }
    if !(frozen.q_max < 1.0) {
        return Err(Error::ContractionViolated(frozen.q_max));
    }
    Ok(())
}

/// Linear solve with an optional warm-start density and a caller-owned
/// spectral workspace (so ladder levels reuse FFT plans).
fn solve_linear_with(
    frozen: &Frozen,
    grid: GridSpec,
    opts: &SolverOptions,
    warm: Option<&ComplexField>,
    ws: &mut SpectralWorkspace,
) -> Result<MappingSolution> {
    validate_frozen(frozen, grid)?;
    let mu = frozen.mu.samples();
    let nu = frozen.nu.samples();

    let mut omega = match warm {
        Some(w0) if w0.grid() == grid => w0.clone(),
        _ => ComplexField::zeros(grid),
    };
    let mut diff_history = Vec::new();
    let mut iterations = 0usize;
    let status;
    let mut residual_linf;
    let mut t_field = ws.beurling(&omega)?;

    // Interior-disk node indices, where the residual is measured.
    let disk: Vec<usize> = grid
        .iter()
        .filter(|&(_, _, z)| z.norm() < 1.0)
        .map(|(row, col, _)| grid.index(row, col))
        .collect();

    loop {
        // next = mu + nu + mu*T(omega) + nu*conj(T(omega));
        // nodewise |next - omega| is exactly the algebraic residual of omega.
        let t = t_field.samples();
        let cur = omega.samples();
        let mut next = Vec::with_capacity(cur.len());
        for k in 0..cur.len() {
            next.push(mu[k] + nu[k] + mu[k] * t[k] + nu[k] * t[k].conj());
        }
        let mut l2 = 0.0f64;
        for k in 0..cur.len() {
            l2 += (next[k] - cur[k]).norm_sqr();
        }
        let h = grid.spacing();
        let l2 = (l2).sqrt() * h;
        let mut linf = 0.0f64;
        for &k in &disk {
            linf = linf.max((next[k] - cur[k]).norm());
        }
        diff_history.push(l2);
        residual_linf = linf;

        if l2 < opts.tol && linf < opts.tol {
            // omega (not next) is certified: its residual is linf.
            status = SolveStatus::Converged;
            break;
        }
        if iterations >= opts.max_iter {
            status = SolveStatus::IterationLimit;
            break;
        }
        omega = ComplexField::from_samples(grid, next)?;
        t_field = ws.beurling(&omega)?;
        iterations += 1;
    }

    // Assemble f = z + C(omega), shifted so f(0) = 0 (0 is an exact node).
    let correction = ws.cauchy(&omega)?;
    let (ci, cj) = grid.center();
    let shift = correction.at(ci, cj); // z = 0 contributes nothing
    let mut f_samples = Vec::with_capacity(grid.len());
    for (row, col, z) in grid.iter() {
        f_samples.push(z + correction.at(row, col) - shift);
    }
    let f = ComplexField::from_samples(grid, f_samples)?;

    // fz = 1 + T(omega); fzbar = omega (the spectral derivative pair).
    let mut fz_samples = t_field.samples().to_vec();
    for v in &mut fz_samples {
        *v += Complex64::new(1.0, 0.0);
    }
    let fz = ComplexField::from_samples(grid, fz_samples)?;

    let f_at_one = f
        .interpolate(Complex64::new(1.0, 0.0))
        .expect("z = 1 lies strictly inside the grid");
    let normalization = Normalization { shift, f_at_one };

    let fd_residual_linf = fd_residual(&f, frozen, grid)?;

    Ok(MappingSolution {
        f,
        fz,
        omega: omega.clone(),
        fzbar: omega,
        residual_linf,
        fd_residual_linf,
        iterations,
        outer_iterations: 0,
        status,
        diff_history,
        outer_diffs: Vec::new(),
        normalization,
        frozen: frozen.clone(),
    })
}

/// Finite-difference residual of `f` against the frozen coefficients over
/// `|z| <= 1 - 2h` (staying clear of the coefficient discontinuity at the
/// rim, where one-sided grid effects dominate).
fn fd_residual(f: &ComplexField, frozen: &Frozen, grid: GridSpec) -> Result<f64> {
    let (fz, fzbar) = f.wirtinger_derivatives()?;
    let cut = 1.0 - 2.0 * grid.spacing();
    let mut worst = 0.0f64;
    for (row, col, z) in grid.iter() {
        if z.norm() > cut {
            continue;
        }
        let k = grid.index(row, col);
        let r = fzbar.samples()[k]
            - frozen.mu.samples()[k] * fz.samples()[k]
            - frozen.nu.samples()[k] * fz.samples()[k].conj();
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Solves the quasilinear equation by outer freezing from the identity.
pub fn solve_quasilinear(oracle: &Oracle, grid: GridSpec, opts: &SolverOptions) -> Result<MappingSolution> {
    let mut ws = SpectralWorkspace::new(grid);
    solve_quasilinear_with(oracle, grid, opts, None, &mut ws)
}

fn identity_field(grid: GridSpec) -> ComplexField {
    let samples = grid.iter().map(|(_, _, z)| z).collect();
    ComplexField::from_samples(grid, samples).expect("identity is finite")
}

fn solve_quasilinear_with(
    oracle: &Oracle,
    grid: GridSpec,
    opts: &SolverOptions,
    warm: Option<&MappingSolution>,
    ws: &mut SpectralWorkspace,
) -> Result<MappingSolution> {
    let inner_opts = SolverOptions { tol: opts.tol * INNER_TOL_FACTOR, ..*opts };
    let mut f_cur = match warm {
        Some(sol) if sol.grid() == grid => sol.f.clone(),
        _ => identity_field(grid),
    };
    let mut omega_warm: Option<ComplexField> = warm.map(|s| s.omega.clone());
    let mut prev_frozen: Option<Frozen> = None;
    let mut outer_diffs: Vec<f64> = Vec::new();
    let mut increases = 0usize;
    let mut total_inner = 0usize;
    let mut last: Option<MappingSolution> = None;

    for outer in 0..opts.outer_max {
        let frozen = freeze(oracle, grid, &f_cur)?;
        // Re-freezing along the last solution reproduced the coefficients
        // bit for bit: the freezing map has reached a fixed point.
        let refreeze_fixed = prev_frozen.as_ref().is_some_and(|prev| {
            frozen.mu.samples() == prev.mu.samples() && frozen.nu.samples() == prev.nu.samples()
        });
        if refreeze_fixed {
            let mut sol = last.expect("a previous solve exists whenever prev_frozen is set");
            sol.status = SolveStatus::Converged;
            sol.iterations = total_inner;
            sol.outer_iterations = outer;
            sol.outer_diffs = outer_diffs;
            return Ok(sol);
        }

        let sol = solve_linear_with(&frozen, grid, &inner_opts, omega_warm.as_ref(), ws)?;
        total_inner += sol.iterations;
        if sol.status == SolveStatus::IterationLimit {
            let mut sol = sol;
            sol.iterations = total_inner;
            sol.outer_iterations = outer + 1;
            sol.outer_diffs = outer_diffs;
            return Ok(sol);
        }

        let sup = sol.f.sup_diff_on_disk(&f_cur, 1.0)?;
        let increased = outer_diffs.last().is_some_and(|&prev| sup > prev);
        outer_diffs.push(sup);

        if sup <= opts.tol {
            let mut sol = sol;
            sol.status = SolveStatus::Converged;
            sol.iterations = total_inner;
            sol.outer_iterations = outer + 1;
            sol.outer_diffs = outer_diffs;
            return Ok(sol);
        }

        if increased {
            increases += 1;
            if increases >= 3 {
                let mut sol = sol;
                sol.status = SolveStatus::Oscillating;
                sol.iterations = total_inner;
                sol.outer_iterations = outer + 1;
                sol.outer_diffs = outer_diffs;
                return Ok(sol);
            }
            // Damp the freezing argument to break the oscillation.
            let mut damped = Vec::with_capacity(grid.len());
            for k in 0..grid.len() {
                damped.push(0.5 * (sol.f.samples()[k] + f_cur.samples()[k]));
            }
            f_cur = ComplexField::from_samples(grid, damped)?;
        } else {
            increases = 0;
            f_cur = sol.f.clone();
        }
        omega_warm = Some(sol.omega.clone());
        prev_frozen = Some(frozen);
        last = Some(sol);
    }

    let mut sol = last.expect("outer_max >= 1 guarantees at least one solve");
    sol.status = SolveStatus::IterationLimit;
    sol.iterations = total_inner;
    sol.outer_iterations = opts.outer_max;
    sol.outer_diffs = outer_diffs;
    Ok(sol)
}

/// Runs the truncation ladder: solves the quasilinear problem at each level
/// with the gated coefficients, warm-starting every rung from the previous
/// one, and records sup-differences on the compact `|z| <= 0.9`.
pub fn run_ladder(
    oracle: &Oracle,
    gate: GateFn,
    levels: &[f64],
    grid: GridSpec,
    opts: &SolverOptions,
) -> Result<LadderRun> {
    if levels.is_empty() {
        return Err(Error::InvalidParam {
            key: "levels",
            message: "at least one truncation level is required".into(),
        });
    }
    for pair in levels.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParam {
                key: "levels",
                message: format!("levels must be strictly increasing, got {} then {}", pair[0], pair[1]),
            });
        }
    }

    let mut ws = SpectralWorkspace::new(grid);
    let mut solutions: Vec<MappingSolution> = Vec::new();
    let mut sup_diffs = Vec::new();
    let mut done_levels = Vec::new();
    let mut aborted_level = None;

    for &level in levels {
        let truncated = truncate(oracle, gate.clone(), level)?;
        let warm = solutions.last();
        let sol = solve_quasilinear_with(&truncated, grid, opts, warm, &mut ws)?;
        let converged = sol.converged();
        if let Some(prev) = solutions.last() {
            sup_diffs.push(sol.f.sup_diff_on_disk(&prev.f, 0.9)?);
        }
        done_levels.push(level);
        solutions.push(sol);
        if !converged {
            aborted_level = Some(level);
            break;
        }
    }

    let converged = aborted_level.is_none()
        && sup_diffs.last().map_or(true, |&d| d <= opts.tol)
        && solutions.len() == levels.len();
    Ok(LadderRun { levels: done_levels, solutions, sup_diffs, converged, aborted_level })
}
