//! Square periodized grid enclosing the unit disk, plus the field containers
//! used everywhere else: complex-valued samples, real-valued samples
//! (dilatation fields, which may hold `inf`), Wirtinger derivatives by
//! second-order differences, midpoint disk integration, and trapezoid circle
//! means.
//!
//! Conventions: the grid covers `[-L, L)^2` with `L > 1` so the closed unit
//! disk sits strictly inside with a padding margin. Nodes are
//! `z[i][j] = (-L + j*h) + i*(-L + i*h)` with `h = 2L/n`; storage is row-major
//! (`index = row*n + col`), the row index advancing the imaginary part.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Geometry of the sampling lattice: `n_side` nodes per axis (power of two)
/// over the square `[-half_width, half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_side: usize,
    half_width: f64,
}

impl GridSpec {
    /// Validated constructor. `n_side` must be a power of two, at least 4;
    /// `half_width` must exceed 1 so the unit disk is strictly interior.
    pub fn new(n_side: usize, half_width: f64) -> Result<Self> {
        if n_side < 4 || !n_side.is_power_of_two() {
            return Err(Error::BadGridSide(n_side));
        }
        if !(half_width > 1.0) || !half_width.is_finite() {
            return Err(Error::BadHalfWidth(half_width));
        }
        Ok(GridSpec { n_side, half_width })
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Lattice spacing `2L/n`, exact in binary for the default geometry.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_side as f64
    }

    /// Node count.
    pub fn len(&self) -> usize {
        self.n_side * self.n_side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Complex coordinate of node `(row, col)`.
    pub fn node(&self, row: usize, col: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(-self.half_width + col as f64 * h, -self.half_width + row as f64 * h)
    }

    /// Flat row-major index.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_side + col
    }

    /// Row/col of the node at the origin (exact for power-of-two grids).
    pub fn center(&self) -> (usize, usize) {
        (self.n_side / 2, self.n_side / 2)
    }

    /// Iterate `(row, col, z)` over all nodes in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let n = self.n_side;
        (0..n * n).map(move |k| {
            let (row, col) = (k / n, k % n);
            (row, col, self.node(row, col))
        })
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(
                self.n_side,
                self.half_width,
                other.n_side,
                other.half_width,
            ));
        }
        Ok(())
    }
}

/// Polar coordinates of a plane point; `theta` normalized into `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        let mut theta = z.arg();
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        // arg() can land exactly on pi whose reflection rounds to 2*pi.
        if theta >= 2.0 * std::f64::consts::PI {
            theta = 0.0;
        }
        PolarPoint { r, theta }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// Result of sampling a pointwise function on a grid: the field plus the
/// number of non-finite values outside the unit disk that were clamped to 0.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub field: ComplexField,
    pub clamped_outside: usize,
}

/// Complex-valued samples over a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

impl ComplexField {
    /// All-zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Wrap an existing sample vector (length must match the grid).
    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Format(format!(
                "sample count {} does not match grid {}x{}",
                samples.len(),
                grid.n_side(),
                grid.n_side()
            )));
        }
        Ok(ComplexField { grid, samples })
    }

    /// Evaluate `f` at every node. A non-finite value at a node inside the
    /// closed unit disk is a hard error; outside, the sample is clamped to
    /// zero and counted in [`Sampled::clamped_outside`].
    pub fn sample(grid: GridSpec, f: impl Fn(Complex64) -> Complex64) -> Result<Sampled> {
        let mut samples = Vec::with_capacity(grid.len());
        let mut clamped = 0usize;
        for (row, col, z) in grid.iter() {
            let v = f(z);
            if v.re.is_finite() && v.im.is_finite() {
                samples.push(v);
            } else if z.norm() <= 1.0 {
                return Err(Error::NonFiniteSample { row, col, z });
            } else {
                samples.push(Complex64::new(0.0, 0.0));
                clamped += 1;
            }
        }
        Ok(Sampled { field: ComplexField { grid, samples }, clamped_outside: clamped })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.samples[self.grid.index(row, col)]
    }

    /// Mean of all samples (the DC Fourier coefficient divided by `n^2`).
    pub fn mean(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.samples {
            acc += s;
        }
        acc / self.samples.len() as f64
    }

    /// Continuum-normalized L2 norm `sqrt(sum |s|^2 h^2)`.
    pub fn l2_norm(&self) -> f64 {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut acc = 0.0;
        for s in &self.samples {
            acc += s.norm_sqr();
        }
        (acc * h2).sqrt()
    }

    /// Max modulus over all nodes.
    pub fn linf_norm(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.norm()))
    }

    /// Max modulus of `self - other` over nodes with `|z| <= radius`.
    pub fn sup_diff_on_disk(&self, other: &ComplexField, radius: f64) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let mut m = 0.0f64;
        for (row, col, z) in self.grid.iter() {
            if z.norm() <= radius {
                let k = self.grid.index(row, col);
                m = m.max((self.samples[k] - other.samples[k]).norm());
            }
        }
        Ok(m)
    }

    /// Wirtinger derivatives `(f_z, f_zbar)` by second-order differences:
    /// central in the interior, one-sided (three-point) on the outer frame.
    pub fn wirtinger_derivatives(&self) -> Result<(ComplexField, ComplexField)> {
        let n = self.grid.n_side();
        if n < 4 {
            return Err(Error::BadGridSide(n));
        }
        let h = self.grid.spacing();
        let s = &self.samples;
        let idx = |r: usize, c: usize| r * n + c;
        let mut fz = vec![Complex64::new(0.0, 0.0); n * n];
        let mut fzbar = vec![Complex64::new(0.0, 0.0); n * n];
        for row in 0..n {
            for col in 0..n {
                let fx = if col == 0 {
                    (-3.0 * s[idx(row, 0)] + 4.0 * s[idx(row, 1)] - s[idx(row, 2)]) / (2.0 * h)
                } else if col == n - 1 {
                    (3.0 * s[idx(row, n - 1)] - 4.0 * s[idx(row, n - 2)] + s[idx(row, n - 3)])
                        / (2.0 * h)
                } else {
                    (s[idx(row, col + 1)] - s[idx(row, col - 1)]) / (2.0 * h)
                };
                let fy = if row == 0 {
                    (-3.0 * s[idx(0, col)] + 4.0 * s[idx(1, col)] - s[idx(2, col)]) / (2.0 * h)
                } else if row == n - 1 {
                    (3.0 * s[idx(n - 1, col)] - 4.0 * s[idx(n - 2, col)] + s[idx(n - 3, col)])
                        / (2.0 * h)
                } else {
                    (s[idx(row + 1, col)] - s[idx(row - 1, col)]) / (2.0 * h)
                };
                let i = Complex64::new(0.0, 1.0);
                let k = idx(row, col);
                fz[k] = (fx - i * fy) * 0.5;
                fzbar[k] = (fx + i * fy) * 0.5;
            }
        }
        Ok((
            ComplexField { grid: self.grid, samples: fz },
            ComplexField { grid: self.grid, samples: fzbar },
        ))
    }

    /// Midpoint-rule integral `h^2 * sum` over nodes with `|z| < radius`,
    /// `0 < radius <= 1`. First-order accurate in `h` (ragged boundary).
    pub fn integrate_disk(&self, radius: f64) -> Result<Complex64> {
        check_radius(radius)?;
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, col, z) in self.grid.iter() {
            if z.norm() < radius {
                acc += self.samples[self.grid.index(row, col)];
            }
        }
        Ok(acc * h2)
    }

    /// Bilinear interpolation at an arbitrary point strictly inside the grid
    /// square; `None` if any stencil corner falls outside.
    pub fn interpolate(&self, z: Complex64) -> Option<Complex64> {
        let n = self.grid.n_side();
        let h = self.grid.spacing();
        let l = self.grid.half_width();
        let u = (z.re + l) / h;
        let v = (z.im + l) / h;
        if !(u.is_finite() && v.is_finite()) || u < 0.0 || v < 0.0 {
            return None;
        }
        let j = (u.floor() as usize).min(n.saturating_sub(2));
        let i = (v.floor() as usize).min(n.saturating_sub(2));
        if j + 1 >= n || i + 1 >= n || u > (n - 1) as f64 || v > (n - 1) as f64 {
            return None;
        }
        let a = u - j as f64;
        let b = v - i as f64;
        let s00 = self.at(i, j);
        let s01 = self.at(i, j + 1);
        let s10 = self.at(i + 1, j);
        let s11 = self.at(i + 1, j + 1);
        Some(
            s00 * ((1.0 - a) * (1.0 - b))
                + s01 * (a * (1.0 - b))
                + s10 * ((1.0 - a) * b)
                + s11 * (a * b),
        )
    }

    /// True if every sample in the outer `cells`-wide frame is exactly zero.
    pub fn frame_is_zero(&self, cells: usize) -> bool {
        let n = self.grid.n_side();
        for (row, col, _z) in self.grid.iter() {
            let on_frame = row < cells || col < cells || row >= n - cells || col >= n - cells;
            if on_frame {
                let s = self.samples[self.grid.index(row, col)];
                if s.re != 0.0 || s.im != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Real part as a [`RealField`].
    pub fn real_part(&self) -> RealField {
        RealField { grid: self.grid, samples: self.samples.iter().map(|s| s.re).collect() }
    }
}

/// Real-valued samples over a [`GridSpec`]. Dilatation fields may legally
/// contain `+inf` at degenerate nodes, so no finiteness is enforced here.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        RealField { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn from_samples(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Format(format!(
                "sample count {} does not match grid {}x{}",
                samples.len(),
                grid.n_side(),
                grid.n_side()
            )));
        }
        Ok(RealField { grid, samples })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.samples[self.grid.index(row, col)]
    }

    /// Midpoint-rule integral over `|z| < radius` skipping non-finite
    /// samples; returns `(integral, excluded_mass)` where the excluded mass
    /// is `h^2` times the number of skipped nodes.
    pub fn integrate_disk_excluding(&self, radius: f64) -> Result<(f64, f64)> {
        check_radius(radius)?;
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut acc = 0.0;
        let mut excluded = 0usize;
        for (row, col, z) in self.grid.iter() {
            if z.norm() < radius {
                let v = self.samples[self.grid.index(row, col)];
                if v.is_finite() {
                    acc += v;
                } else {
                    excluded += 1;
                }
            }
        }
        Ok((acc * h2, excluded as f64 * h2))
    }

    /// Complex view (imaginary parts zero) for serialization.
    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::BadRadius(radius));
    }
    Ok(())
}

/// Trapezoid mean of `q` over the circle `|z - z0| = r` with `n_samples`
/// equispaced angles (at least 16). Isolated non-finite samples are skipped;
/// more than 1% of them is an error.
pub fn circle_mean(
    q: impl Fn(Complex64) -> f64,
    z0: Complex64,
    r: f64,
    n_samples: usize,
) -> Result<f64> {
    if n_samples < 16 {
        return Err(Error::TooFewCircleSamples(n_samples));
    }
    let mut acc = 0.0;
    let mut good = 0usize;
    for k in 0..n_samples {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_samples as f64;
        let v = q(z0 + Complex64::from_polar(r, theta));
        if v.is_finite() {
            acc += v;
            good += 1;
        }
    }
    let bad = n_samples - good;
    if (bad as f64) > 0.01 * n_samples as f64 {
        return Err(Error::CircleMeanNonFinite { z0, r, bad, total: n_samples });
    }
    Ok(acc / good as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_spec_validates_side_and_width() {
        assert!(matches!(GridSpec::new(3, 2.0), Err(Error::BadGridSide(3))));
        assert!(matches!(GridSpec::new(6, 2.0), Err(Error::BadGridSide(6))));
        assert!(matches!(GridSpec::new(0, 2.0), Err(Error::BadGridSide(0))));
        assert!(matches!(GridSpec::new(8, 1.0), Err(Error::BadHalfWidth(_))));
        assert!(matches!(GridSpec::new(8, 0.5), Err(Error::BadHalfWidth(_))));
        assert!(GridSpec::new(4, 1.25).is_ok());
    }

    #[test]
    fn corner_node_and_spacing_are_exact() {
        // 4x4 grid over [-2,2): h = 1, node (0,0) = -2 - 2i.
        let g = GridSpec::new(4, 2.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node(0, 0), c(-2.0, -2.0));
        assert_eq!(g.node(1, 3), c(1.0, -1.0));
        // Default geometry: 1.25 and 2.5/512 are exact binary fractions,
        // so the center node is exactly the origin.
        let g = GridSpec::new(512, 1.25).unwrap();
        let (ci, cj) = g.center();
        assert_eq!(g.node(ci, cj), c(0.0, 0.0));
    }

    #[test]
    fn sampling_clamps_outside_and_errors_inside() {
        let g = GridSpec::new(16, 1.25).unwrap();
        // 1/(|z|-1.2) blows up only on |z| = 1.2 which the lattice misses;
        // force non-finite values outside the disk instead.
        let s = ComplexField::sample(g, |z| {
            if z.norm() > 1.0 {
                c(f64::NAN, 0.0)
            } else {
                c(1.0, 0.0)
            }
        })
        .unwrap();
        assert!(s.clamped_outside > 0);
        assert_eq!(s.field.at(8, 8), c(1.0, 0.0));

        let err = ComplexField::sample(g, |z| {
            if z.norm() < 0.1 {
                c(f64::INFINITY, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(matches!(err, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn wirtinger_of_affine_map_is_exact() {
        // f = z + 0.3 conj(z): f_z = 1, f_zbar = 0.3, exactly reproduced by
        // second-order differences on an affine function (boundary included).
        let g = GridSpec::new(32, 1.25).unwrap();
        let f = ComplexField::sample(g, |z| z + 0.3 * z.conj()).unwrap().field;
        let (fz, fzbar) = f.wirtinger_derivatives().unwrap();
        for k in 0..g.len() {
            assert!((fz.samples()[k] - c(1.0, 0.0)).norm() < 1e-13);
            assert!((fzbar.samples()[k] - c(0.3, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn wirtinger_of_antiholomorphic_square_is_second_order() {
        // f = conj(z)^2: f_zbar = 2 conj(z), f_z = 0. Quadratics are exact
        // for central differences; the one-sided frame stencil is also exact
        // on polynomials of degree <= 2, so the error is pure roundoff.
        let g = GridSpec::new(64, 1.25).unwrap();
        let f = ComplexField::sample(g, |z| z.conj() * z.conj()).unwrap().field;
        let (fz, fzbar) = f.wirtinger_derivatives().unwrap();
        for (row, col, z) in g.iter() {
            let k = g.index(row, col);
            assert!(fz.samples()[k].norm() < 1e-12);
            assert!((fzbar.samples()[k] - 2.0 * z.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn wirtinger_converges_at_second_order_on_smooth_field() {
        // f = exp(z) sin(conj z): measure max error of f_zbar against the
        // analytic value cos(conj z) exp(z) on two grids; order >= 1.9.
        let truth = |z: Complex64| z.exp() * z.conj().cos();
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = GridSpec::new(n, 1.25).unwrap();
            let f = ComplexField::sample(g, |z| z.exp() * z.conj().sin()).unwrap().field;
            let (_fz, fzbar) = f.wirtinger_derivatives().unwrap();
            let mut e = 0.0f64;
            for (row, col, z) in g.iter() {
                // interior only: the frame uses one-sided stencils whose
                // constant differs, muddying the order estimate
                if row > 0 && col > 0 && row < n - 1 && col < n - 1 {
                    e = e.max((fzbar.at(row, col) - truth(z)).norm());
                }
            }
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.9, "observed order {order}, errors {errs:?}");
    }

    #[test]
    fn disk_integrals_match_area_and_moment() {
        // integral of 1 over the unit disk = pi; of |z|^2 = pi/2.
        // Midpoint over a ragged boundary is O(h): tolerance 4*h*2*pi*r.
        for n in [128usize, 256] {
            let g = GridSpec::new(n, 1.25).unwrap();
            let h = g.spacing();
            let ones = ComplexField::sample(g, |_| c(1.0, 0.0)).unwrap().field;
            let m2 = ComplexField::sample(g, |z| c(z.norm_sqr(), 0.0)).unwrap().field;
            let a = ones.integrate_disk(1.0).unwrap();
            let b = m2.integrate_disk(1.0).unwrap();
            assert!((a.re - std::f64::consts::PI).abs() < 8.0 * h, "area err {}", a.re);
            assert!(a.im.abs() < 1e-12);
            assert!((b.re - std::f64::consts::PI / 2.0).abs() < 8.0 * h);
        }
    }

    #[test]
    fn disk_integral_error_shrinks_under_refinement() {
        let mut errs = Vec::new();
        for n in [128usize, 256, 512] {
            let g = GridSpec::new(n, 1.25).unwrap();
            let ones = ComplexField::sample(g, |_| c(1.0, 0.0)).unwrap().field;
            errs.push((ones.integrate_disk(1.0).unwrap().re - std::f64::consts::PI).abs());
        }
        assert!(errs[2] < errs[0], "errors should shrink: {errs:?}");
    }

    #[test]
    fn integrate_disk_rejects_bad_radius() {
        let g = GridSpec::new(16, 1.25).unwrap();
        let f = ComplexField::zeros(g);
        assert!(matches!(f.integrate_disk(0.0), Err(Error::BadRadius(_))));
        assert!(matches!(f.integrate_disk(1.5), Err(Error::BadRadius(_))));
    }

    #[test]
    fn circle_mean_exact_for_radial_functions() {
        // Constant: mean = c for any admissible sample count.
        for n in [16usize, 64, 4096] {
            let m = circle_mean(|_| 7.25, c(0.3, -0.2), 0.4, n).unwrap();
            assert!((m - 7.25).abs() < 1e-14);
        }
        // |z|^2 on a circle about the origin is constant r^2.
        let m = circle_mean(|z| z.norm_sqr(), c(0.0, 0.0), 0.5, 64).unwrap();
        assert!((m - 0.25).abs() < 1e-14);
    }

    #[test]
    fn circle_mean_harmonic_mean_value_property() {
        // Re(z^3) is harmonic: its circle mean about z0 = 0.1+0.2i equals its
        // value there. Trapezoid on a trig polynomial is exact.
        let z0 = c(0.1, 0.2);
        let q = |z: Complex64| (z * z * z).re;
        let m = circle_mean(q, z0, 0.3, 64).unwrap();
        assert!((m - q(z0)).abs() < 1e-13);
    }

    #[test]
    fn circle_mean_guards_sample_count_and_nan_budget() {
        assert!(matches!(circle_mean(|_| 1.0, c(0.0, 0.0), 0.5, 8), Err(Error::TooFewCircleSamples(8))));
        // 5 of 128 samples non-finite (> 1%) -> error.
        let spiky = |z: Complex64| if z.im.abs() < 0.1 && z.re > 0.0 { f64::NAN } else { 1.0 };
        let r = circle_mean(spiky, c(0.0, 0.0), 0.9, 128);
        assert!(matches!(r, Err(Error::CircleMeanNonFinite { .. })));
        // A single bad sample in 256 (< 1%) is skipped.
        let one_bad = |z: Complex64| if (z - c(0.9, 0.0)).norm() < 1e-9 { f64::NAN } else { 2.0 };
        assert!((circle_mean(one_bad, c(0.0, 0.0), 0.9, 256).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bilinear_interpolation_reproduces_affine_fields() {
        let g = GridSpec::new(32, 1.25).unwrap();
        let f = ComplexField::sample(g, |z| c(2.0, -1.0) * z + c(0.5, 0.25)).unwrap().field;
        for z in [c(0.3, 0.7), c(-1.1, 0.9), c(1.0, 0.0)] {
            let v = f.interpolate(z).unwrap();
            assert!((v - (c(2.0, -1.0) * z + c(0.5, 0.25))).norm() < 1e-12);
        }
        assert!(f.interpolate(c(1.3, 0.0)).is_none());
    }

    proptest! {
        #[test]
        fn polar_round_trip(r in 0.0f64..2.0, theta in 0.0f64..(2.0 * std::f64::consts::PI - 1e-9)) {
            let p = PolarPoint { r, theta };
            let q = PolarPoint::from_complex(p.to_complex());
            prop_assert!((q.r - r).abs() <= 1e-12 * (1.0 + r));
            if r > 1e-6 {
                let mut d = (q.theta - theta).abs();
                d = d.min((d - 2.0 * std::f64::consts::PI).abs());
                prop_assert!(d <= 1e-9, "theta {theta} -> {}", q.theta);
            }
        }

        #[test]
        fn wirtinger_is_linear(a_re in -2.0f64..2.0, b_im in -2.0f64..2.0) {
            let g = GridSpec::new(16, 1.25).unwrap();
            let f1 = ComplexField::sample(g, |z| z * z).unwrap().field;
            let f2 = ComplexField::sample(g, |z| z.conj() * Complex64::new(0.0, b_im)).unwrap().field;
            let combo = ComplexField::sample(g, |z| {
                Complex64::new(a_re, 0.0) * (z * z) + z.conj() * Complex64::new(0.0, b_im)
            }).unwrap().field;
            let (dz1, _) = f1.wirtinger_derivatives().unwrap();
            let (dz2, _) = f2.wirtinger_derivatives().unwrap();
            let (dzc, _) = combo.wirtinger_derivatives().unwrap();
            for k in 0..g.len() {
                let lin = Complex64::new(a_re, 0.0) * dz1.samples()[k] + dz2.samples()[k];
                prop_assert!((dzc.samples()[k] - lin).norm() < 1e-10);
            }
        }
    }
}
