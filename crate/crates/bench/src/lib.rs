//! Shared fixtures for the pipeline benchmarks: a standard grid, a smooth
//! compactly supported density for the transform benches, and prebuilt
//! solver problems so the benches measure the algorithms rather than
//! fixture construction.

use beltrami_core::{
    example1_oracle, freeze, kmu_gate, truncate, ComplexField, ExampleParams, Frozen, GridSpec,
    Oracle, C64,
};

/// Standard benchmark grid: the library's default half-width.
pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, 1.25).expect("benchmark grid sizes are valid")
}

/// Smooth bump supported on a disk of radius 0.6 around 0.2 - 0.1i; its
/// support stays well inside the unit disk, so the frame is exactly zero.
pub fn smooth_density(grid: GridSpec) -> ComplexField {
    ComplexField::sample(grid, |z| {
        let r2 = (z - C64::new(0.2, -0.1)).norm_sqr() / 0.36;
        if r2 >= 1.0 {
            C64::new(0.0, 0.0)
        } else {
            let bump = (-1.0 / (1.0 - r2)).exp();
            C64::new(0.7 * bump, 0.2 * bump)
        }
    })
    .expect("bump is finite")
    .field
}

/// Frozen constant-coefficient problem with moderate contraction.
pub fn constant_problem(grid: GridSpec) -> Frozen {
    let oracle = Oracle::constant(C64::new(0.4, 0.1), C64::new(0.1, 0.0))
        .expect("constants are admissible");
    freeze(&oracle, grid, &ComplexField::zeros(grid)).expect("freezing constants succeeds")
}

/// Level-4 truncation of the benchmark family at alpha = 1.
pub fn quasilinear_problem() -> Oracle {
    let params = ExampleParams::new(1.0, 1.0, 4.0).expect("admissible parameters");
    truncate(&example1_oracle(&params), kmu_gate(&params), 4.0).expect("level 4 is valid")
}

/// Closed-form level-4 truncated map, sampled as a grid field.
pub fn truncated_map(grid: GridSpec) -> ComplexField {
    let params = ExampleParams::new(1.0, 1.0, 4.0).expect("admissible parameters");
    ComplexField::sample(grid, |z| beltrami_core::ex1_fk(z, &params))
        .expect("closed form is finite")
        .field
}
