//! Helpers shared by the integration-test targets.
#![allow(dead_code)]

use beltrami_core::{C64, ComplexField, GridSpec};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Samples a closed form onto a grid, panicking on non-finite values.
pub fn sample(grid: GridSpec, f: impl Fn(C64) -> C64) -> ComplexField {
    ComplexField::sample(grid, f).expect("closed form must be finite").field
}

/// A C-infinity cutoff: `exp(1 - 1/(1 - t^2))` for `t = |z|/radius < 1`,
/// zero otherwise. All derivatives exist and vanish at the support edge,
/// so windowed fields keep clean second-order difference behavior.
pub fn smooth_window(z: C64, radius: f64) -> f64 {
    let t = z.norm() / radius;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Wirtinger derivatives of a radial stretch `f(z) = rho(r) e^{i theta}`
/// at `z != 0`, given the profile value and slope at `r = |z|`:
/// `f_z = (rho' + rho/r)/2` (real), `f_zbar = e^{2 i theta}(rho' - rho/r)/2`.
pub fn radial_derivatives(z: C64, rho: f64, rho_prime: f64) -> (C64, C64) {
    let r = z.norm();
    let e2 = z * z / (r * r);
    let fz = c(0.5 * (rho_prime + rho / r), 0.0);
    let fzbar = e2 * (0.5 * (rho_prime - rho / r));
    (fz, fzbar)
}

/// Profile `(rho, rho')` of the truncated radial stretch at radius `r`:
/// linear `r * rho_star / rho_k` inside the threshold, `(2r - 1)^(1/alpha)`
/// outside.
pub fn fk_profile(r: f64, alpha: f64, k: f64) -> (f64, f64) {
    let rho_k = (2.0 + k * alpha) / (2.0 * k * alpha);
    if r <= rho_k {
        let slope = (2.0 / (k * alpha)).powf(1.0 / alpha) / rho_k;
        (slope * r, slope)
    } else {
        let x = 2.0 * r - 1.0;
        (x.powf(1.0 / alpha), (2.0 / alpha) * x.powf(1.0 / alpha - 1.0))
    }
}

/// One acceptance criterion: clauses accumulate, `finish` prints the single
/// pass/fail line and asserts. Failing clauses carry their analysis into
/// the panic message so a red criterion documents itself.
pub struct Criterion {
    label: &'static str,
    clauses: Vec<(bool, String)>,
}

impl Criterion {
    pub fn new(label: &'static str) -> Self {
        Criterion { label, clauses: Vec::new() }
    }

    pub fn clause(&mut self, ok: bool, detail: String) {
        self.clauses.push((ok, detail));
    }

    pub fn finish(self) {
        let ok = self.clauses.iter().all(|&(ok, _)| ok);
        let mut parts = Vec::new();
        for (cok, detail) in &self.clauses {
            if *cok {
                parts.push(detail.clone());
            } else {
                parts.push(format!("FAILED: {detail}"));
            }
        }
        let joined = parts.join("; ");
        let line = format!("[{}] {} — {}", self.label, if ok { "PASS" } else { "FAIL" }, joined);
        // Write straight to the process stderr: the test harness captures the
        // print macros, and the per-criterion line must be visible for passing
        // criteria too.
        {
            use std::io::Write;
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "{line}");
        }
        assert!(ok, "[{}] FAIL — {}", self.label, joined);
    }
}
