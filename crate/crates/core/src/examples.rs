//! Closed-form radial example family on the unit disk.
//!
//! Example 1 is a continuous but non-homeomorphic solution of the
//! degenerate equation `f_zbar = mu(z, f) f_z`: the map collapses the disk
//! `|z| <= 1/2` to the origin and stretches the annulus `1/2 < |z| < 1`
//! radially. Its coefficient `mu` depends on the mapped value `w` through
//! `|w|` only, is bounded away from modulus 1 on every compact subset of
//! the annulus, and degenerates (modulus -> 1) at `|z| = 1/2`. Truncating
//! the distortion envelope at level `k` yields uniformly elliptic problems
//! whose explicit solutions `f_k` (with explicit inverses `g_k`) converge
//! uniformly to the degenerate limit — the entire family is closed-form,
//! which is what makes it usable as an oracle for the solver, the
//! condition checkers, and the diagnostics.
//!
//! Example 2 splits the same equation into two characteristics,
//! `f_zbar = (mu/2) f_z + (mu/2) conj(f_z)`, valid because the radial
//! stretch has real `f_z`.
//!
//! All evaluators use the natural smooth extension of the outer branch for
//! arguments outside the closed disk, so grid stencils straddling `|z| = 1`
//! see consistent values.

use num_complex::Complex64;
use std::sync::Arc;

use crate::coeff::{GateFn, Oracle};
use crate::error::{Error, Result};
use crate::grid::ComplexField;

/// Parameters of the example family.
///
/// `alpha` controls the stretch exponent (and the integrability of the
/// inverse-distortion majorant `Q`: `Q` is in `L^p` exactly when
/// `alpha < 2/p`); `k > 1/alpha` is the truncation level. The threshold
/// radius `rho_k = (2 + k*alpha) / (2*k*alpha)` separates the collapsed
/// core from the stretched annulus of the truncated solution; for
/// `k*alpha > 2` it lies in (1/2, 1), and the edge case `k*alpha = 2`
/// (allowed, since only `k > 1/alpha` is required) gives `rho_k = 1` and
/// the identity solution.
#[derive(Clone, Copy, Debug)]
pub struct ExampleParams {
    pub alpha: f64,
    pub p: f64,
    pub k: f64,
}

impl ExampleParams {
    pub fn new(alpha: f64, p: f64, k: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParam {
                key: "p",
                message: format!("p must be a finite number >= 1, got {p}"),
            });
        }
        if !(alpha > 0.0) || !(alpha < 2.0 / p) {
            return Err(Error::InvalidParam {
                key: "alpha",
                message: format!("alpha must lie in (0, 2/p) = (0, {}), got {alpha}", 2.0 / p),
            });
        }
        if !(k > 1.0 / alpha) || !k.is_finite() {
            return Err(Error::InvalidParam {
                key: "k",
                message: format!("k must be a finite number > 1/alpha = {}, got {k}", 1.0 / alpha),
            });
        }
        Ok(ExampleParams { alpha, p, k })
    }

    /// Truncation threshold radius `rho_k = (2 + k*alpha) / (2*k*alpha)`.
    pub fn rho_k(&self) -> f64 {
        (2.0 + self.k * self.alpha) / (2.0 * self.k * self.alpha)
    }

    /// Image of the threshold radius, `rho*_k = (2 / (k*alpha))^(1/alpha)`:
    /// the radius of the linear core of the inverse `g_k`.
    pub fn rho_star(&self) -> f64 {
        (2.0 / (self.k * self.alpha)).powf(1.0 / self.alpha)
    }
}

fn e2i_theta(z: Complex64) -> Complex64 {
    // exp(2 i arg z) = z^2 / |z|^2, stable away from 0.
    z * z / z.norm_sqr()
}

/// Coefficient of the degenerate example equation.
///
/// Piecewise in both `z` and the mapped value `w`:
/// zero on `|z| <= 1/2`; for `1/2 < |z|`, with `c = alpha*(2|z| - 1)`,
/// the value is `e^{2i theta} (x - c)/(x + c)` where `x = 2|z|` when
/// `|w| >= 1` and `x = |w|^alpha + 1` when `|w| < 1`.
pub fn ex1_mu(z: Complex64, w: Complex64, params: &ExampleParams) -> Complex64 {
    let r = z.norm();
    if r <= 0.5 || r >= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let c = params.alpha * (2.0 * r - 1.0);
    let x = if w.norm() >= 1.0 { 2.0 * r } else { w.norm().powf(params.alpha) + 1.0 };
    e2i_theta(z) * ((x - c) / (x + c))
}

/// Pointwise bound `q(z) >= |ex1_mu(z, w)|` over all `w`, attained in the
/// limit `|w| -> 1^-`: `q = (2 - c)/(2 + c)` on the annulus, zero outside.
pub fn ex1_q(z: Complex64, params: &ExampleParams) -> f64 {
    let r = z.norm();
    if r <= 0.5 || r >= 1.0 {
        return 0.0;
    }
    let c = params.alpha * (2.0 * r - 1.0);
    (2.0 - c) / (2.0 + c)
}

/// The degenerate limit solution: `(z/|z|) (2|z| - 1)^(1/alpha)` outside
/// radius 1/2, zero inside. Continuous, constant on the core disk.
pub fn ex1_f(z: Complex64, params: &ExampleParams) -> Complex64 {
    let r = z.norm();
    if r <= 0.5 {
        return Complex64::new(0.0, 0.0);
    }
    (z / r) * (2.0 * r - 1.0).powf(1.0 / params.alpha)
}

/// Truncated solution at level `k`: the limit map outside `rho_k`, and the
/// linear ramp `(z / rho_k) * rho*_k` inside. The inner factor is written
/// exactly as the two printed constants, so cross-branch continuity is a
/// checked property rather than an assumption.
pub fn ex1_fk(z: Complex64, params: &ExampleParams) -> Complex64 {
    let rho = params.rho_k();
    if z.norm() <= rho {
        z / rho * params.rho_star()
    } else {
        ex1_f(z, params)
    }
}

/// Exact inverse of `ex1_fk`: `y (|y|^alpha + 1) / (2|y|)` outside the
/// image radius `rho*_k`, linear `y * rho_k / rho*_k` inside.
pub fn ex1_gk(y: Complex64, params: &ExampleParams) -> Complex64 {
    let rho_star = params.rho_star();
    let s = y.norm();
    if s <= rho_star {
        y * (params.rho_k() / rho_star)
    } else {
        y * ((s.powf(params.alpha) + 1.0) / (2.0 * s))
    }
}

/// Which closed-form dilatation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dilatation {
    /// Envelope dilatation of the majorant coefficient:
    /// `2 / (alpha (2|z| - 1))` on the annulus, 1 on `|z| < 1/2`, infinite
    /// on the degeneracy circle `|z| = 1/2`.
    KMu,
    /// True pointwise dilatation of the truncated solution `f_k`:
    /// `2|z| / (alpha (2|z| - 1))` outside `rho_k`, 1 inside (the ramp is
    /// conformal). Differs from [`Dilatation::KMu`] by the factor `|z|`.
    KMuK,
    /// Dilatation of the inverse `g_k`: `(|y|^alpha + 1)/(alpha |y|^alpha)`
    /// outside `rho*_k`, 1 inside.
    KMuGk,
    /// The integrable majorant `Q(y) = (|y|^alpha + 1)/(alpha |y|^alpha)`,
    /// dominating `KMuGk` for every level `k` simultaneously.
    QBound,
}

/// Evaluates a closed-form dilatation of the family at `zy` (a point of the
/// source disk for `KMu`/`KMuK`, of the image disk for `KMuGk`/`QBound`).
pub fn ex1_dilatation(zy: Complex64, params: &ExampleParams, which: Dilatation) -> f64 {
    let r = zy.norm();
    let a = params.alpha;
    match which {
        Dilatation::KMu => {
            if r < 0.5 {
                1.0
            } else if r == 0.5 {
                f64::INFINITY
            } else {
                2.0 / (a * (2.0 * r - 1.0))
            }
        }
        Dilatation::KMuK => {
            if r <= params.rho_k() {
                1.0
            } else {
                2.0 * r / (a * (2.0 * r - 1.0))
            }
        }
        Dilatation::KMuGk => {
            if r <= params.rho_star() {
                1.0
            } else {
                (r.powf(a) + 1.0) / (a * r.powf(a))
            }
        }
        Dilatation::QBound => {
            if r == 0.0 {
                f64::INFINITY
            } else {
                (r.powf(a) + 1.0) / (a * r.powf(a))
            }
        }
    }
}

/// The quasilinear oracle of the degenerate example (`nu = 0`).
pub fn example1_oracle(params: &ExampleParams) -> Oracle {
    let p_mu = *params;
    let p_q = *params;
    Oracle::new(
        Arc::new(move |z, w| ex1_mu(z, w, &p_mu)),
        Arc::new(|_, _| Complex64::new(0.0, 0.0)),
        Arc::new(move |z| ex1_q(z, &p_q)),
    )
}

/// The two-characteristic split `(mu/2, mu/2)` of the same equation,
/// exact because the radial solution has real `f_z`.
pub fn ex2_coefficients(z: Complex64, w: Complex64, params: &ExampleParams) -> (Complex64, Complex64) {
    let half = 0.5 * ex1_mu(z, w, params);
    (half, half)
}

/// Oracle form of [`ex2_coefficients`]; `|mu| + |nu| = |ex1_mu|`, so the
/// bound is unchanged.
pub fn example2_oracle(params: &ExampleParams) -> Oracle {
    let p1 = *params;
    let p2 = *params;
    let p_q = *params;
    Oracle::new(
        Arc::new(move |z, w| 0.5 * ex1_mu(z, w, &p1)),
        Arc::new(move |z, w| 0.5 * ex1_mu(z, w, &p2)),
        Arc::new(move |z| ex1_q(z, &p_q)),
    )
}

/// The truncation gate of the ladder: the envelope dilatation
/// [`Dilatation::KMu`]. Keeping `gate <= n` is exactly the printed
/// truncation rule, and on the kept region the coefficient bound
/// `(2-c)/(2+c)` equals `(gate-1)/(gate+1) <= (n-1)/(n+1)` automatically.
pub fn kmu_gate(params: &ExampleParams) -> GateFn {
    let p = *params;
    Arc::new(move |z| ex1_dilatation(z, &p, Dilatation::KMu))
}

/// Result of the polar-form identity scan.
#[derive(Clone, Copy, Debug)]
pub struct PolarCheck {
    /// Max over tested annulus nodes of the two-sided discrepancy.
    pub max_discrepancy: f64,
    /// Nodes excluded because a denominator vanished.
    pub excluded: usize,
}

/// Checks the polar identity `f_zbar / f_z = e^{2i theta} (r f_r + i f_theta)
/// / (r f_r - i f_theta)` on the annulus `0.6 <= |z| <= 0.9`, with all
/// derivatives taken from grid differences (Cartesian ones directly, polar
/// ones by the chain rule from the same Cartesian pair). Since
/// `r f_r + i f_theta = 2 r e^{-i theta} f_zbar` and
/// `r f_r - i f_theta = 2 r e^{i theta} f_z` identically, the two sides
/// agree as rational functions of the derivative pair: the returned
/// discrepancy is rounding-level whenever the polar-form expression is
/// transcribed correctly, and order one when it is not. The scan is a
/// guard on the polar formulation, not a measure of grid resolution.
pub fn polar_identity_check(f: &ComplexField) -> Result<PolarCheck> {
    let grid = f.grid();
    let (fz, fzbar) = f.wirtinger_derivatives()?;
    let mut worst = 0.0f64;
    let mut excluded = 0usize;
    for (row, col, z) in grid.iter() {
        let r = z.norm();
        if !(0.6..=0.9).contains(&r) {
            continue;
        }
        let k = grid.index(row, col);
        let dz = fz.samples()[k];
        let dzbar = fzbar.samples()[k];
        if dz.norm() < 1e-12 {
            excluded += 1;
            continue;
        }
        let lhs = dzbar / dz;
        // f_x = fz + fzbar, f_y = i (fz - fzbar); then
        // f_r = f_x cos + f_y sin, f_theta = r (-f_x sin + f_y cos).
        let fx = dz + dzbar;
        let fy = Complex64::new(0.0, 1.0) * (dz - dzbar);
        let (sin_t, cos_t) = (z.im / r, z.re / r);
        let fr = fx * cos_t + fy * sin_t;
        let ftheta = (-fx * sin_t + fy * cos_t) * r;
        let denom = fr * r - Complex64::new(0.0, 1.0) * ftheta;
        if denom.norm() < 1e-12 {
            excluded += 1;
            continue;
        }
        let rhs = e2i_theta(z) * (fr * r + Complex64::new(0.0, 1.0) * ftheta) / denom;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(PolarCheck { max_discrepancy: worst, excluded })
}
