//! Diagnostics against the closed-form radial family: inverse-map
//! construction, the inverse dilatation integral, derivative-convergence
//! distances along a hand-built ladder, and the log-Hölder probe, each
//! pinned to values derived independently from the formulas.

mod common;

use std::f64::consts::PI;

use beltrami_core::{
    derivative_l1_convergence, ex1_fk, example1_oracle, freeze, inverse_dilatation_integral,
    invert_field, kmu_gate, log_holder_field, polar_identity_check, solve_quasilinear, truncate,
    ComplexField, ExampleParams, GridSpec, LadderRun, MappingSolution, Oracle, SolverOptions, C64,
};
use beltrami_core::solver::{Normalization, SolveStatus};

use common::sample;

/// A solution-shaped wrapper around a closed-form sample with
/// finite-difference derivative fields, for diagnostics that take ladder
/// output. Residuals are not meaningful here and are set to zero.
fn synthetic_solution(f: ComplexField) -> MappingSolution {
    let grid = f.grid();
    let (fz, fzbar) = f.wirtinger_derivatives().expect("derivatives");
    let zeros = ComplexField::zeros(grid);
    let frozen = freeze(
        &Oracle::constant(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).expect("legal constants"),
        grid,
        &zeros,
    )
    .expect("freeze");
    MappingSolution {
        f,
        fz,
        omega: fzbar.clone(),
        fzbar,
        residual_linf: 0.0,
        fd_residual_linf: 0.0,
        iterations: 0,
        outer_iterations: 0,
        status: SolveStatus::Converged,
        diff_history: Vec::new(),
        outer_diffs: Vec::new(),
        normalization: Normalization { shift: C64::new(0.0, 0.0), f_at_one: C64::new(1.0, 0.0) },
        frozen,
    }
}

/// The dilatation of the inverse of the level-4 truncation integrates to
/// exactly 2*pi over the unit disk: the inverse is conformal on the image
/// disk |y| <= 1/2 (contributing pi/4) and has K(y) = 1 + 1/|y| on the
/// annulus (contributing 2*pi * 7/8). The integral is computed from the
/// geometric inverse with finite-difference derivatives, so the tolerance
/// covers the smeared kink circle and the nodal disk quadrature.
#[test]
fn inverse_dilatation_integral_matches_the_closed_form() {
    let params = ExampleParams::new(1.0, 1.5, 4.0).unwrap();
    let grid = GridSpec::new(256, 1.25).unwrap();
    let f = sample(grid, |z| ex1_fk(z, &params));
    let inv = invert_field(&f, grid).expect("invertible");
    assert!(inv.coverage > 0.999, "coverage {}", inv.coverage);
    let (value, excluded) = inverse_dilatation_integral(&inv, 2.0).unwrap();
    assert!(
        (value - 2.0 * PI).abs() < 0.1,
        "integral {} vs closed form {}",
        value,
        2.0 * PI
    );
    assert!(excluded < 0.01, "excluded mass {}", excluded);
}

/// L^1 derivative distances for the level pair (16, 32), against values
/// integrated by hand from the piecewise closed forms: the fields agree
/// identically outside rho_16 = 9/16, the z-derivatives differ by
/// 2/9 - 2/17 on the inner disk, and the zbar-distance collapses to the
/// exact value pi/32 (the annulus integral of 1/(2r)).
#[test]
fn closed_form_ladder_derivative_distances_match_the_analysis() {
    let grid = GridSpec::new(512, 1.25).unwrap();
    let mut solutions = Vec::new();
    for k in [16.0, 32.0] {
        let params = ExampleParams::new(1.0, 1.5, k).unwrap();
        solutions.push(synthetic_solution(sample(grid, |z| ex1_fk(z, &params))));
    }
    let run = LadderRun {
        levels: vec![16.0, 32.0],
        solutions,
        sup_diffs: Vec::new(),
        converged: true,
        aborted_level: None,
    };
    let pairs = derivative_l1_convergence(&run).unwrap();
    assert_eq!(pairs.len(), 1);
    let (d_z, d_zbar) = pairs[0];
    assert!(
        (d_z - 0.185445).abs() < 0.01,
        "d_z {} vs hand integral 0.185445",
        d_z
    );
    assert!(
        (d_zbar - PI / 32.0).abs() < 0.01,
        "d_zbar {} vs exact pi/32 = {}",
        d_zbar,
        PI / 32.0
    );
}

/// The level-16 truncation is Lipschitz, so its log-Hölder ratios decay
/// toward small separations: the probe must pass with a small finite
/// constant and no small-scale growth.
#[test]
fn holder_probe_passes_on_a_lipschitz_truncation() {
    let params = ExampleParams::new(1.0, 1.5, 16.0).unwrap();
    let grid = GridSpec::new(256, 1.25).unwrap();
    let f = sample(grid, |z| ex1_fk(z, &params));
    let report = log_holder_field(&f, 3.0 * PI, 0.9, 4000).unwrap();
    assert!(report.pass, "decade max {} vs large-scale max {}", report.decade_max, report.large_scale_max);
    assert!(report.fitted_c.is_finite() && report.fitted_c > 0.0);
    assert!(report.fitted_c < 1.0, "fitted constant {}", report.fitted_c);
    assert!(report.decade_max <= report.large_scale_max);
}

/// Inverting the level-8 truncation: the target disk is fully covered and
/// the forward-evaluated roundtrip error is at Newton tolerance, far below
/// one grid cell.
#[test]
fn inverse_map_roundtrip_is_tight_and_covers_the_disk() {
    let params = ExampleParams::new(1.0, 1.5, 8.0).unwrap();
    let grid = GridSpec::new(256, 1.25).unwrap();
    let f = sample(grid, |z| ex1_fk(z, &params));
    let inv = invert_field(&f, grid).expect("invertible");
    assert!(inv.coverage > 0.999, "coverage {}", inv.coverage);
    assert!(inv.max_roundtrip < 1e-6, "max roundtrip {}", inv.max_roundtrip);
    assert!(inv.mean_roundtrip <= inv.max_roundtrip);
}

/// The polar chain-rule identity is algebraic, so it holds at rounding
/// level for solver output too, not just for closed-form samples.
#[test]
fn polar_identity_is_rounding_level_on_solver_output() {
    let params = ExampleParams::new(1.0, 1.5, 4.0).unwrap();
    let oracle = example1_oracle(&params);
    let truncated = truncate(&oracle, kmu_gate(&params), 4.0).unwrap();
    let grid = GridSpec::new(128, 1.25).unwrap();
    let sol = solve_quasilinear(&truncated, grid, &SolverOptions::default()).unwrap();
    assert!(sol.converged());
    let check = polar_identity_check(&sol.f).unwrap();
    assert!(
        check.max_discrepancy < 1e-12,
        "polar identity discrepancy {}",
        check.max_discrepancy
    );
    assert_eq!(check.excluded, 0);
}
