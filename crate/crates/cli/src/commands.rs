//! Implementations of the five subcommands.
//!
//! Shared shape: resolve settings (defaults < config file < flags), pick a
//! coefficient source, create and lock the output directory, compute, write
//! field dumps plus one `manifest.txt`, and map the outcome onto the exit
//! contract. Manifests are append-ordered and carry no timing, so reruns
//! with identical inputs are byte-identical; wall-clock chatter goes to
//! stderr.

use crate::bcof::{self, CoeffTable};
use crate::cli::{
    CheckArgs, DiagnoseArgs, ExampleArgs, LadderArgs, OracleOpts, RefField, SolveArgs,
};
use crate::config::{parse_complex, parse_levels, Settings};
use crate::lock::DirLock;
use crate::{core_failure, Failure};
use beltrami_core::io::{read_bfld, write_bfld, write_csv};
use beltrami_core::{
    check_conditions, dilatation_report_from_field, ex1_dilatation, ex1_f, ex1_fk, ex1_gk, ex1_mu,
    ex1_q, example1_oracle, example2_oracle, freeze, inverse_dilatation_integral, invert_field,
    kmu_gate, polar_identity_check, run_ladder, solve_linear, solve_quasilinear, truncate,
    ComplexField, Dilatation, ExampleParams, GateFn, GridSpec, Manifest, MappingSolution, Oracle,
    RadialProfile, SolveStatus, SpectralWorkspace, Verdict, C64,
};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

// ---------------------------------------------------------------------------
// Coefficient sources.

/// A resolved coefficient source for `solve` and `ladder`.
enum Source {
    /// Benchmark family 1 or 2; `level` is the truncation level when the
    /// command takes one (`solve`).
    Example { family: u8, params: ExampleParams, level: Option<f64> },
    Constant { mu: C64, nu: C64 },
    Table { path: PathBuf, table: Arc<CoeffTable> },
}

/// How `--k` participates for the given command.
#[derive(PartialEq)]
enum LevelRule {
    /// `solve`: the benchmark families must be truncated to a level.
    RequiredForExamples,
    /// `ladder`: levels come from `--levels`, so `--k` is rejected.
    Forbidden,
}

fn resolve_source(opts: &OracleOpts, rule: LevelRule) -> Result<Source, Failure> {
    let constant_chosen = opts.constant_mu.is_some() || opts.constant_nu.is_some();
    let chosen = [opts.example1, opts.example2, constant_chosen, opts.coeff_file.is_some()]
        .iter()
        .filter(|&&c| c)
        .count();
    if chosen != 1 {
        return Err(Failure::Usage(
            "choose exactly one coefficient source: --example1, --example2, \
             --constant-mu/--constant-nu, or --coeff-file"
                .into(),
        ));
    }

    if opts.example1 || opts.example2 {
        let level = match (&rule, opts.k) {
            (LevelRule::RequiredForExamples, Some(k)) => Some(k),
            (LevelRule::RequiredForExamples, None) => {
                return Err(Failure::Usage(
                    "--k <K> is required with --example1/--example2 here: the untruncated \
                     family degenerates on the unit circle and has no uniformly elliptic solve"
                        .into(),
                ))
            }
            (LevelRule::Forbidden, Some(_)) => {
                return Err(Failure::Usage(
                    "--k does not apply to ladder runs; pass the levels via --levels".into(),
                ))
            }
            (LevelRule::Forbidden, None) => None,
        };
        // The parameter set wants a concrete k; ladder runs never evaluate
        // anything k-dependent (the gate envelope depends on alpha alone),
        // so any admissible value serves there.
        let k_for_params = level.unwrap_or(1.0 / opts.alpha + 1.0);
        let params =
            ExampleParams::new(opts.alpha, opts.family_p, k_for_params).map_err(core_failure)?;
        let family = if opts.example1 { 1 } else { 2 };
        return Ok(Source::Example { family, params, level });
    }

    if opts.k.is_some() {
        return Err(Failure::Usage(
            "--k only applies to the benchmark families (--example1/--example2)".into(),
        ));
    }

    if constant_chosen {
        let mu = match &opts.constant_mu {
            Some(text) => parse_complex(text)?,
            None => C64::new(0.0, 0.0),
        };
        let nu = match &opts.constant_nu {
            Some(text) => parse_complex(text)?,
            None => C64::new(0.0, 0.0),
        };
        // Constructing the oracle validates |mu| + |nu| < 1 up front.
        Oracle::constant(mu, nu).map_err(core_failure)?;
        return Ok(Source::Constant { mu, nu });
    }

    let path = opts.coeff_file.clone().expect("selector counting guarantees the path");
    let table = Arc::new(CoeffTable::read(&path)?);
    Ok(Source::Table { path, table })
}

impl Source {
    fn describe(&self) -> String {
        match self {
            Source::Example { family, params, level } => match level {
                Some(k) => format!("family {family} (alpha = {}, level {k})", params.alpha),
                None => format!("family {family} (alpha = {})", params.alpha),
            },
            Source::Constant { mu, nu } => format!("constant coefficients mu = {mu}, nu = {nu}"),
            Source::Table { path, .. } => format!("coefficient table {}", path.display()),
        }
    }

    fn push_keys(&self, manifest: &mut Manifest) {
        match self {
            Source::Example { family, params, level } => {
                manifest.push("source", format!("example{family}"));
                manifest.push("alpha", params.alpha);
                manifest.push("family_p", params.p);
                if let Some(k) = level {
                    manifest.push("level_k", k);
                }
            }
            Source::Constant { mu, nu } => {
                manifest.push("source", "constant");
                manifest.push("constant_mu_re", mu.re);
                manifest.push("constant_mu_im", mu.im);
                manifest.push("constant_nu_re", nu.re);
                manifest.push("constant_nu_im", nu.im);
            }
            Source::Table { path, table } => {
                manifest.push("source", "table");
                manifest.push("coeff_file", path.display());
                manifest.push("coeff_nz", table.n_z());
                manifest.push("coeff_nw", table.n_w());
                manifest.push("coeff_q_max", table.q_max());
            }
        }
    }

    /// Untruncated oracle (the table is bounded by construction).
    fn base_oracle(&self) -> Result<Oracle, Failure> {
        match self {
            Source::Example { family: 1, params, .. } => Ok(example1_oracle(params)),
            Source::Example { params, .. } => Ok(example2_oracle(params)),
            Source::Constant { mu, nu } => Oracle::constant(*mu, *nu).map_err(core_failure),
            Source::Table { table, .. } => Ok(bcof::oracle_from(table.clone())),
        }
    }

    /// Dilatation envelope used as the ladder's truncation gate.
    fn gate(&self) -> GateFn {
        match self {
            Source::Example { params, .. } => kmu_gate(params),
            Source::Constant { mu, nu } => {
                let q = mu.norm() + nu.norm();
                let k = (1.0 + q) / (1.0 - q);
                Arc::new(move |z: C64| if z.norm() < 1.0 { k } else { 1.0 })
            }
            Source::Table { table, .. } => {
                let table = table.clone();
                Arc::new(move |z: C64| {
                    let b = table.bound(z);
                    if b >= 1.0 {
                        f64::INFINITY
                    } else {
                        (1.0 + b) / (1.0 - b)
                    }
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Small shared helpers.

fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::IterationLimit => "iteration-limit",
        SolveStatus::Oscillating => "oscillating",
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|err| Failure::Io(format!("cannot create output directory {}: {err}", dir.display())))
}

fn write_field(dir: &Path, name: &str, field: &ComplexField, csv: bool) -> Result<(), Failure> {
    write_bfld(field, &dir.join(format!("{name}.bfld"))).map_err(core_failure)?;
    if csv {
        write_csv(field, &dir.join(format!("{name}.csv"))).map_err(core_failure)?;
    }
    Ok(())
}

fn read_field(dir: &Path, name: &str) -> Result<ComplexField, Failure> {
    read_bfld(&dir.join(format!("{name}.bfld"))).map_err(core_failure)
}

fn push_grid_solver_keys(manifest: &mut Manifest, settings: &Settings) {
    manifest.push("grid_n_side", settings.n_side);
    manifest.push("grid_half_width", settings.half_width);
    manifest.push("solver_tol", settings.tol);
    manifest.push("solver_max_iter", settings.max_iter);
    manifest.push("solver_outer_max", settings.outer_max);
}

fn push_solution_keys(manifest: &mut Manifest, sol: &MappingSolution) {
    manifest.push("status", status_str(sol.status));
    manifest.push("inner_iterations", sol.iterations);
    manifest.push("outer_iterations", sol.outer_iterations);
    manifest.push("residual_linf", sol.residual_linf);
    manifest.push("fd_residual_linf", sol.fd_residual_linf);
    manifest.push("q_max", sol.frozen.q_max);
    manifest.push("shift_re", sol.normalization.shift.re);
    manifest.push("shift_im", sol.normalization.shift.im);
    manifest.push("f_at_one_re", sol.normalization.f_at_one.re);
    manifest.push("f_at_one_im", sol.normalization.f_at_one.im);
}

// ---------------------------------------------------------------------------
// solve

pub fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let settings = Settings::resolve(&args.common)?;
    let grid = settings.grid()?;
    let opts = settings.solver_options();
    let source = resolve_source(&args.oracle, LevelRule::RequiredForExamples)?;

    ensure_dir(&settings.out_dir)?;
    let _lock = DirLock::acquire(&settings.out_dir)?;
    let started = Instant::now();
    eprintln!("solve: grid {0}x{0}, L = {1}", settings.n_side, settings.half_width);
    eprintln!("solve: source {}", source.describe());

    let sol = match &source {
        Source::Constant { .. } => {
            let oracle = source.base_oracle()?;
            let frozen =
                freeze(&oracle, grid, &ComplexField::zeros(grid)).map_err(core_failure)?;
            solve_linear(&frozen, grid, &opts).map_err(core_failure)?
        }
        Source::Example { params: _, level, .. } => {
            let oracle = source.base_oracle()?;
            let level = level.expect("resolve_source enforces --k for solve");
            let truncated = truncate(&oracle, source.gate(), level).map_err(core_failure)?;
            solve_quasilinear(&truncated, grid, &opts).map_err(core_failure)?
        }
        Source::Table { .. } => {
            let oracle = source.base_oracle()?;
            solve_quasilinear(&oracle, grid, &opts).map_err(core_failure)?
        }
    };

    let mut manifest = Manifest::new();
    manifest.push("command", "solve");
    source.push_keys(&mut manifest);
    push_grid_solver_keys(&mut manifest, &settings);
    push_solution_keys(&mut manifest, &sol);
    manifest.push("fields", "f,omega,fz,fzbar,mu,nu");
    manifest.push("csv", settings.csv);

    write_field(&settings.out_dir, "f", &sol.f, settings.csv)?;
    write_field(&settings.out_dir, "omega", &sol.omega, settings.csv)?;
    write_field(&settings.out_dir, "fz", &sol.fz, settings.csv)?;
    write_field(&settings.out_dir, "fzbar", &sol.fzbar, settings.csv)?;
    write_field(&settings.out_dir, "mu", &sol.frozen.mu, settings.csv)?;
    write_field(&settings.out_dir, "nu", &sol.frozen.nu, settings.csv)?;
    manifest.write_to(&settings.out_dir.join("manifest.txt")).map_err(core_failure)?;

    eprintln!(
        "solve: status {}, {} inner / {} outer iterations, residual {:.3e}, wrote {} in {:.2?}",
        status_str(sol.status),
        sol.iterations,
        sol.outer_iterations,
        sol.residual_linf,
        settings.out_dir.display(),
        started.elapsed()
    );

    if sol.converged() {
        Ok(())
    } else {
        Err(Failure::Solver(format!(
            "solver stopped with status {} after {} inner iterations (tol {}); \
             partial artifacts were written to {}",
            status_str(sol.status),
            sol.iterations,
            settings.tol,
            settings.out_dir.display()
        )))
    }
}

// ---------------------------------------------------------------------------
// ladder

pub fn run_ladder_cmd(args: &LadderArgs) -> Result<(), Failure> {
    let settings = Settings::resolve(&args.common)?;
    let grid = settings.grid()?;
    let opts = settings.solver_options();
    let levels = parse_levels(&args.levels)?;
    let source = resolve_source(&args.oracle, LevelRule::Forbidden)?;
    let oracle = source.base_oracle()?;
    let gate = source.gate();

    ensure_dir(&settings.out_dir)?;
    let _lock = DirLock::acquire(&settings.out_dir)?;
    let started = Instant::now();
    eprintln!(
        "ladder: {} at levels {:?} on a {}x{} grid",
        source.describe(),
        levels,
        settings.n_side,
        settings.n_side
    );

    let run = run_ladder(&oracle, gate, &levels, grid, &opts).map_err(core_failure)?;

    let mut manifest = Manifest::new();
    manifest.push("command", "ladder");
    source.push_keys(&mut manifest);
    push_grid_solver_keys(&mut manifest, &settings);
    manifest.push_list("levels", &run.levels);
    let completed: Vec<f64> =
        run.levels.iter().copied().take(run.solutions.len()).collect();
    manifest.push_list("completed_levels", &completed);
    let statuses: Vec<&str> = run.solutions.iter().map(|s| status_str(s.status)).collect();
    manifest.push_list("statuses", &statuses);
    let inner: Vec<usize> = run.solutions.iter().map(|s| s.iterations).collect();
    manifest.push_list("inner_iterations", &inner);
    let outer: Vec<usize> = run.solutions.iter().map(|s| s.outer_iterations).collect();
    manifest.push_list("outer_iterations", &outer);
    let residuals: Vec<f64> = run.solutions.iter().map(|s| s.residual_linf).collect();
    manifest.push_list("residual_linf", &residuals);
    let fd: Vec<f64> = run.solutions.iter().map(|s| s.fd_residual_linf).collect();
    manifest.push_list("fd_residual_linf", &fd);
    manifest.push_list("sup_diffs", &run.sup_diffs);
    manifest.push("ladder_converged", run.converged);
    if let Some(level) = run.aborted_level {
        manifest.push("aborted_level", level);
    }
    manifest.push("fields", "f_top,omega_top,fz_top,fzbar_top,mu_top,nu_top");
    manifest.push("csv", settings.csv);

    let top = run.solutions.last().expect("a validated ladder has at least one rung");
    write_field(&settings.out_dir, "f_top", &top.f, settings.csv)?;
    write_field(&settings.out_dir, "omega_top", &top.omega, settings.csv)?;
    write_field(&settings.out_dir, "fz_top", &top.fz, settings.csv)?;
    write_field(&settings.out_dir, "fzbar_top", &top.fzbar, settings.csv)?;
    write_field(&settings.out_dir, "mu_top", &top.frozen.mu, settings.csv)?;
    write_field(&settings.out_dir, "nu_top", &top.frozen.nu, settings.csv)?;
    manifest.write_to(&settings.out_dir.join("manifest.txt")).map_err(core_failure)?;

    let gaps: Vec<String> = run.sup_diffs.iter().map(|d| format!("{d:.3e}")).collect();
    eprintln!(
        "ladder: {} of {} levels, gaps [{}], wrote {} in {:.2?}",
        run.solutions.len(),
        run.levels.len(),
        gaps.join(", "),
        settings.out_dir.display(),
        started.elapsed()
    );

    match run.aborted_level {
        None => Ok(()),
        Some(level) => Err(Failure::Solver(format!(
            "ladder aborted: the level-{level} solve did not converge; partial artifacts \
             were written to {}",
            settings.out_dir.display()
        ))),
    }
}

// ---------------------------------------------------------------------------
// check

pub fn run_check(args: &CheckArgs) -> Result<(), Failure> {
    let settings = Settings::resolve(&args.common)?;
    let z0 = parse_complex(&args.z0)?;

    let chosen = [args.example1, args.constant_q.is_some(), args.power.is_some(), args.log]
        .iter()
        .filter(|&&c| c)
        .count();
    if chosen != 1 {
        return Err(Failure::Usage(
            "choose exactly one majorant: --example1, --constant-q, --power, or --log".into(),
        ));
    }

    let mut manifest = Manifest::new();
    manifest.push("command", "check");

    // Tiny clamp on radii so pole-type majorants stay finite (enormous is
    // fine; the verdicts fail honestly on unbounded growth, NaN would lie).
    let floor = f64::MIN_POSITIVE;
    let majorant: Box<dyn Fn(C64) -> f64> = if args.example1 {
        let params = ExampleParams::new(args.alpha, 1.0, 1.0 / args.alpha + 1.0)
            .map_err(core_failure)?;
        manifest.push("majorant", "example1");
        manifest.push("majorant_alpha", params.alpha);
        Box::new(move |y| ex1_dilatation(y, &params, Dilatation::QBound))
    } else if let Some(value) = args.constant_q {
        if !(value >= 1.0 && value.is_finite()) {
            return Err(Failure::Usage(format!(
                "--constant-q needs a finite majorant >= 1 (dilatations are >= 1), got {value}"
            )));
        }
        manifest.push("majorant", "constant");
        manifest.push("majorant_value", value);
        Box::new(move |_| value)
    } else if let Some(beta) = args.power {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Failure::Usage(format!(
                "--power needs a finite exponent > 0, got {beta}"
            )));
        }
        manifest.push("majorant", "power");
        manifest.push("majorant_beta", beta);
        Box::new(move |y: C64| (y - z0).norm().max(floor).powf(-beta).max(1.0))
    } else {
        manifest.push("majorant", "log");
        Box::new(move |y: C64| {
            (std::f64::consts::E / (y - z0).norm().max(floor)).ln().max(1.0)
        })
    };

    let profile = RadialProfile::sample(
        &majorant,
        z0,
        args.delta,
        args.eps0,
        args.eps0_prime,
        args.ring_c,
        args.ring_p,
        args.n_radii,
    )
    .map_err(core_failure)?;
    let report = check_conditions(&majorant, profile).map_err(core_failure)?;

    ensure_dir(&settings.out_dir)?;
    let _lock = DirLock::acquire(&settings.out_dir)?;
    for (key, value) in report.to_manifest().entries() {
        manifest.push(key, value);
    }
    manifest.write_to(&settings.out_dir.join("manifest.txt")).map_err(core_failure)?;

    let mut failed = Vec::new();
    for (name, verdict) in report.verdicts() {
        println!("{name}: {}", verdict.as_str());
        if verdict == Verdict::Fail {
            failed.push(name);
        }
    }
    eprintln!("check: wrote {}", settings.out_dir.join("manifest.txt").display());

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verdict(format!("failed conditions: {}", failed.join(", "))))
    }
}

// ---------------------------------------------------------------------------
// diagnose

pub fn run_diagnose(args: &DiagnoseArgs) -> Result<(), Failure> {
    let dir = &args.run;
    let stored = Manifest::read_from(&dir.join("manifest.txt")).map_err(core_failure)?;
    let stored_residual = stored
        .get_f64("residual_linf")
        .ok_or_else(|| Failure::Io(format!(
            "{} has no residual_linf; only `solve` runs can be diagnosed",
            dir.join("manifest.txt").display()
        )))?;
    let stored_fd = stored
        .get_f64("fd_residual_linf")
        .ok_or_else(|| Failure::Io(format!(
            "{} has no fd_residual_linf",
            dir.join("manifest.txt").display()
        )))?;

    let _lock = DirLock::acquire(dir)?;
    let started = Instant::now();
    let f = read_field(dir, "f")?;
    let omega = read_field(dir, "omega")?;
    let mu = read_field(dir, "mu")?;
    let nu = read_field(dir, "nu")?;
    let grid = f.grid();
    for (name, field) in [("omega", &omega), ("mu", &mu), ("nu", &nu)] {
        if field.grid() != grid {
            return Err(Failure::Io(format!(
                "stored field {name} disagrees with f about the grid; the run directory \
                 mixes artifacts from different runs"
            )));
        }
    }

    // Recompute the algebraic fixed-point residual with the solver's own
    // expression: one Beurling transform of the stored density, then
    // max |mu + nu + mu T(omega) + nu conj(T(omega)) - omega| over the disk.
    // Per-node FFTs and the max are order-insensitive, so a faithful store
    // reproduces the manifest bit-for-bit.
    let mut ws = SpectralWorkspace::new(grid);
    let t_field = ws.beurling(&omega).map_err(core_failure)?;
    let t = t_field.samples();
    let mu_s = mu.samples();
    let nu_s = nu.samples();
    let om = omega.samples();
    let mut residual = 0.0f64;
    for (row, col, z) in grid.iter() {
        if z.norm() >= 1.0 {
            continue;
        }
        let k = grid.index(row, col);
        let next = mu_s[k] + nu_s[k] + mu_s[k] * t[k] + nu_s[k] * t[k].conj();
        residual = residual.max((next - om[k]).norm());
    }

    // Finite-difference residual over |z| <= 1 - 2h, as solved.
    let (fz_fd, fzbar_fd) = f.wirtinger_derivatives().map_err(core_failure)?;
    let cut = 1.0 - 2.0 * grid.spacing();
    let mut fd = 0.0f64;
    for (row, col, z) in grid.iter() {
        if z.norm() > cut {
            continue;
        }
        let k = grid.index(row, col);
        let r = fzbar_fd.samples()[k]
            - mu_s[k] * fz_fd.samples()[k]
            - nu_s[k] * fz_fd.samples()[k].conj();
        fd = fd.max(r.norm());
    }

    let residual_match = residual == stored_residual;
    let fd_match = fd == stored_fd;

    let dil = dilatation_report_from_field(&f, args.p_exp).map_err(core_failure)?;
    let mut k_max = 0.0f64;
    for (row, col, z) in grid.iter() {
        if z.norm() <= 0.9 {
            k_max = k_max.max(dil.k_mu_f.at(row, col));
        }
    }
    let polar = polar_identity_check(&f).map_err(core_failure)?;

    let mut manifest = Manifest::new();
    manifest.push("command", "diagnose");
    manifest.push("run", dir.display());
    manifest.push("stored_residual_linf", stored_residual);
    manifest.push("recomputed_residual_linf", residual);
    manifest.push("residual_match", residual_match);
    manifest.push("stored_fd_residual_linf", stored_fd);
    manifest.push("recomputed_fd_residual_linf", fd);
    manifest.push("fd_match", fd_match);
    manifest.push("distortion_p", args.p_exp);
    manifest.push("degenerate_fraction", dil.degenerate_fraction);
    manifest.push("k_mu_f_max_090", k_max);
    manifest.push("polar_max_discrepancy", polar.max_discrepancy);
    manifest.push("polar_excluded", polar.excluded);

    println!(
        "residual_linf: stored {stored_residual} recomputed {residual} ({})",
        if residual_match { "match" } else { "MISMATCH" }
    );
    println!(
        "fd_residual_linf: stored {stored_fd} recomputed {fd} ({})",
        if fd_match { "match" } else { "MISMATCH" }
    );
    println!("degenerate_fraction: {}", dil.degenerate_fraction);
    println!("k_mu_f max on |z| <= 0.9: {k_max}");
    println!(
        "polar identity: max discrepancy {} ({} nodes excluded)",
        polar.max_discrepancy, polar.excluded
    );

    if args.invert {
        let target = GridSpec::new(args.invert_n, grid.half_width()).map_err(core_failure)?;
        let inverse = invert_field(&f, target).map_err(core_failure)?;
        let (integral, excluded_mass) =
            inverse_dilatation_integral(&inverse, args.p_exp).map_err(core_failure)?;
        manifest.push("inverse_target_n", args.invert_n);
        manifest.push("inverse_coverage", inverse.coverage);
        manifest.push("inverse_distortion_integral", integral);
        manifest.push("inverse_excluded_mass", excluded_mass);
        println!(
            "inverse distortion integral (p = {}): {integral} (excluded mass {excluded_mass}, \
             coverage {:.4})",
            args.p_exp, inverse.coverage
        );
    }

    manifest.write_to(&dir.join("diagnose.txt")).map_err(core_failure)?;
    eprintln!("diagnose: wrote {} in {:.2?}", dir.join("diagnose.txt").display(), started.elapsed());

    if residual_match && fd_match {
        Ok(())
    } else {
        Err(Failure::Verdict(
            "recomputed residuals do not reproduce the stored manifest; the artifacts are \
             inconsistent with the recorded run"
                .into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// example

pub fn run_example(args: &ExampleArgs) -> Result<(), Failure> {
    let settings = Settings::resolve(&args.common)?;
    if args.what.is_none() && args.emit_coeff.is_none() {
        return Err(Failure::Usage(
            "nothing to emit: pass --what <FIELD> and/or --emit-coeff <PATH>".into(),
        ));
    }
    let needs_k = args.emit_coeff.is_some()
        || matches!(args.what, Some(RefField::Fk) | Some(RefField::Gk));
    if needs_k && args.k.is_none() {
        return Err(Failure::Usage(
            "--k <K> is required for --what fk/gk and for --emit-coeff".into(),
        ));
    }
    let params = ExampleParams::new(
        args.alpha,
        args.family_p,
        args.k.unwrap_or(1.0 / args.alpha + 1.0),
    )
    .map_err(core_failure)?;

    ensure_dir(&settings.out_dir)?;
    let _lock = DirLock::acquire(&settings.out_dir)?;
    let grid = settings.grid()?;

    let mut manifest = Manifest::new();
    manifest.push("command", "example");
    manifest.push("alpha", params.alpha);
    manifest.push("family_p", params.p);
    if let Some(k) = args.k {
        manifest.push("level_k", k);
    }
    manifest.push("grid_n_side", settings.n_side);
    manifest.push("grid_half_width", settings.half_width);

    if let Some(what) = args.what {
        let (name, field) = match what {
            RefField::F => (
                "f",
                ComplexField::sample(grid, |z| ex1_f(z, &params)).map_err(core_failure)?.field,
            ),
            RefField::Fk => (
                "fk",
                ComplexField::sample(grid, |z| ex1_fk(z, &params)).map_err(core_failure)?.field,
            ),
            RefField::Gk => (
                "gk",
                ComplexField::sample(grid, |y| ex1_gk(y, &params)).map_err(core_failure)?.field,
            ),
            RefField::Mu => {
                let w = C64::new(args.at_w, 0.0);
                manifest.push("at_w", args.at_w);
                (
                    "mu",
                    ComplexField::sample(grid, |z| ex1_mu(z, w, &params))
                        .map_err(core_failure)?
                        .field,
                )
            }
            RefField::Q => (
                "q",
                ComplexField::sample(grid, |z| C64::new(ex1_q(z, &params), 0.0))
                    .map_err(core_failure)?
                    .field,
            ),
        };
        manifest.push("what", name);
        write_field(&settings.out_dir, name, &field, settings.csv)?;
        eprintln!("example: wrote {}.bfld to {}", name, settings.out_dir.display());
    }

    if let Some(coeff_path) = &args.emit_coeff {
        let level = args.k.expect("checked above");
        let truncated =
            truncate(&example1_oracle(&params), kmu_gate(&params), level).map_err(core_failure)?;
        let table = CoeffTable::try_sample(
            args.coeff_nz as usize,
            args.coeff_nw as usize,
            args.coeff_extent,
            args.coeff_wmax,
            |z, t| truncated.eval(z, C64::new(t, 0.0)).map_err(core_failure),
        )?;
        table.write(coeff_path)?;
        manifest.push("coeff_file", coeff_path.display());
        manifest.push("coeff_nz", args.coeff_nz);
        manifest.push("coeff_nw", args.coeff_nw);
        manifest.push("coeff_extent", args.coeff_extent);
        manifest.push("coeff_wmax", args.coeff_wmax);
        eprintln!("example: wrote coefficient table {}", coeff_path.display());
    }

    manifest.write_to(&settings.out_dir.join("manifest.txt")).map_err(core_failure)?;
    Ok(())
}
