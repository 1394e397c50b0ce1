//! Coefficient pairs `(mu, nu)` for the two-characteristic equation
//! `f_zbar = mu(z, f) f_z + nu(z, f) conj(f_z)`, their pointwise bound
//! `q(z) >= |mu| + |nu|`, truncation to uniformly elliptic ladders, and
//! freezing along a current iterate.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec};

/// Coefficient function of position and mapped value.
pub type CoeffFn = Arc<dyn Fn(Complex64, Complex64) -> Complex64 + Send + Sync>;
/// Pointwise majorant of `|mu| + |nu|`.
pub type BoundFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
/// Scalar gate used by truncation, typically a local distortion envelope.
pub type GateFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// Frozen oracles are evaluated with the second argument clamped to this
/// modulus; normalized solutions of the equation stay far inside it, so the
/// clamp only shields the oracle from early wild iterates.
pub const W_CLAMP: f64 = 10.0;

/// Slack allowed when checking `|mu| + |nu| <= q(z)`, absorbing roundoff in
/// closed-form coefficient families.
pub const BOUND_SLACK: f64 = 1e-12;

/// A coefficient pair with its ellipticity bound.
///
/// `eval` is checked: every call verifies `|mu| + |nu| <= q(z) + slack`, so
/// a mismatched bound surfaces at the first offending node instead of as a
/// diverging solve.
#[derive(Clone)]
pub struct Oracle {
    mu: CoeffFn,
    nu: CoeffFn,
    q: BoundFn,
}

impl Oracle {
    pub fn new(mu: CoeffFn, nu: CoeffFn, q: BoundFn) -> Self {
        Oracle { mu, nu, q }
    }

    /// Constant coefficients; `q` is the exact sum of moduli.
    pub fn constant(mu: Complex64, nu: Complex64) -> Result<Self> {
        let q = mu.norm() + nu.norm();
        if !(q < 1.0) {
            return Err(Error::CoefficientBound {
                z: Complex64::new(0.0, 0.0),
                sum: q,
                q: 1.0,
            });
        }
        Ok(Oracle {
            mu: Arc::new(move |_, _| mu),
            nu: Arc::new(move |_, _| nu),
            q: Arc::new(move |_| q),
        })
    }

    /// Checked evaluation at a point.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
        let mu = (self.mu)(z, w);
        let nu = (self.nu)(z, w);
        let bound = (self.q)(z);
        let sum = mu.norm() + nu.norm();
        if !sum.is_finite() || sum > bound + BOUND_SLACK {
            return Err(Error::CoefficientBound { z, sum, q: bound });
        }
        Ok((mu, nu))
    }

    /// The pointwise bound `q(z)`.
    pub fn bound(&self, z: Complex64) -> f64 {
        (self.q)(z)
    }
}

/// Maps an ellipticity bound `q in [0, 1)` to the distortion bound
/// `(1 + q) / (1 - q)` it certifies.
pub fn q0_of(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) || !q.is_finite() {
        return Err(Error::DilatationRange(q));
    }
    Ok((1.0 + q) / (1.0 - q))
}

/// Truncation at level `n >= 1`: keep `(mu, nu)` where `gate(z) <= n`, zero
/// them elsewhere. On the kept region the bound is capped at
/// `(n - 1) / (n + 1)`, the ellipticity constant of distortion `n`, making
/// every rung of the ladder uniformly elliptic (level 1 keeps only the
/// conformal region — a legal degenerate rung).
pub fn truncate(oracle: &Oracle, gate: GateFn, n: f64) -> Result<Oracle> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::InvalidParam {
            key: "truncation_level",
            message: format!("level must be a finite number >= 1, got {n}"),
        });
    }
    let q_cap = (n - 1.0) / (n + 1.0);
    let mu = oracle.mu.clone();
    let nu = oracle.nu.clone();
    let q = oracle.q.clone();
    let gate_mu = gate.clone();
    let gate_nu = gate.clone();
    let gate_q = gate;
    Ok(Oracle {
        mu: Arc::new(move |z, w| {
            if gate_mu(z) <= n {
                mu(z, w)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        nu: Arc::new(move |z, w| {
            if gate_nu(z) <= n {
                nu(z, w)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        q: Arc::new(move |z| if gate_q(z) <= n { q(z).min(q_cap) } else { 0.0 }),
    })
}

/// Coefficients sampled along a fixed iterate: the linear data for one
/// inner solve of the quasilinear outer loop.
#[derive(Clone, Debug)]
pub struct Frozen {
    pub mu: ComplexField,
    pub nu: ComplexField,
    /// Max over grid nodes of `|mu| + |nu|`; contraction constant of the
    /// associated Neumann series.
    pub q_max: f64,
}

/// Samples `(mu(z, w(z)), nu(z, w(z)))` over the grid. Outside the closed
/// unit disk both fields are zero; `w` is clamped to modulus [`W_CLAMP`]
/// before evaluation.
pub fn freeze(oracle: &Oracle, grid: GridSpec, w: &ComplexField) -> Result<Frozen> {
    if w.grid() != grid {
        return Err(Error::GridMismatch(
            grid.n_side(),
            grid.half_width(),
            w.grid().n_side(),
            w.grid().half_width(),
        ));
    }
    let mut mu = ComplexField::zeros(grid);
    let mut nu = ComplexField::zeros(grid);
    let mut q_max = 0.0f64;
    for (row, col, z) in grid.iter() {
        if z.norm() >= 1.0 {
            continue;
        }
        let mut wv = w.at(row, col);
        let wn = wv.norm();
        if wn > W_CLAMP {
            wv *= W_CLAMP / wn;
        }
        let (m, v) = oracle.eval(z, wv)?;
        let k = grid.index(row, col);
        mu.samples_mut()[k] = m;
        nu.samples_mut()[k] = v;
        q_max = q_max.max(m.norm() + v.norm());
    }
    Ok(Frozen { mu, nu, q_max })
}
