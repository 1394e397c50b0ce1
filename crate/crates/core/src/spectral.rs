//! Plane Beurling and Cauchy transforms by FFT with an analytic
//! periodization correction.
//!
//! A density `omega` supported in the unit disk (with at least a two-cell
//! zero frame at the grid boundary) is treated as one period of a field on
//! the torus `[-L, L)^2`. With the plane-wave convention
//! `exp(i(x*xi1 + y*xi2))`, the Wirtinger symbols are `d_z = (i/2)*conj(xi)`
//! and `d_zbar = (i/2)*xi` for `xi = xi1 + i*xi2`, giving
//!
//! * Beurling transform `T`: multiplier `conj(xi)/xi`, zero at DC — a
//!   unit-modulus multiplier, hence an L2 isometry on mean-zero fields;
//! * Cauchy transform `C`: multiplier `-2i/xi` on the mean-free part. The
//!   mean itself has no periodic antiderivative and is returned as the
//!   explicit affine term `mean * conj(z)`, so `d_zbar C = id` holds in the
//!   discrete multiplier calculus including the DC component.
//!
//! The multiplier alone computes the transforms of the *periodized* density,
//! which differ from the plane transforms by the lattice images of `omega`:
//! periodizing the plane kernels sums them over the lattice
//! `Lambda = 2L * (Z + iZ)`, so for a disk-supported density
//!
//! ```text
//! T_torus(omega)(z) - T_plane(omega)(z) = -(1/pi) int omega(w) R(z - w) dm(w),
//! R(u) = sum over a in Lambda \ {0} of 1/(u - a)^2  =  wp(u) - 1/u^2,
//! ```
//!
//! with `wp` the Weierstrass function of `Lambda` (the Eisenstein-summed
//! value; the conditionally convergent order-2 series vanishes for a square
//! lattice). Expanding `R(z - w)` in powers of `w` turns the image term into
//! a series over the holomorphic moments `m_j = int w^j omega dm`. This
//! module corrects the monopole term exactly: with `M = m_0` the integral of
//! `omega` over the period square,
//!
//! ```text
//! T(omega) = T_torus(omega) + (M/pi) P'(z),    C(omega) = C_torus(omega) + (M/pi) P(z),
//! P(z) = G4 z^3 + G8 z^7 + G12 z^11 + ...      (so P' = wp - 1/z^2),
//! ```
//!
//! where `G_m` are the Eisenstein series of `Lambda` — only orders divisible
//! by 4 survive on a square lattice, which also makes `P(iz) = -i P(z)`, so
//! the quarter-turn covariance of `C` is preserved. The corrections are
//! holomorphic, so `d_zbar C = id` is untouched, and `d_z P = P'` keeps
//! `d_z C = T` consistent analytically.
//!
//! The correction is exact for densities whose higher holomorphic moments
//! vanish — radial profiles (only `m_0` survives) and `exp(2i*theta)`-type
//! fields (all moments vanish, so torus and plane transforms already agree).
//! Mean-free densities receive no correction at all, preserving the L2
//! isometry. A generic off-center density retains an uncorrected dipole
//! residue of order `|m_1| / (2L)^3`; the supported-contract here is
//! densities in the *centered* unit disk. Anchoring the correction at the
//! origin deliberately trades translation equivariance (which only held for
//! the periodized operator anyway) for plane faithfulness on that contract.
//!
//! Transforms of zero are zero, and the output of `T` is mean-free exactly
//! as before: every correction monomial `z^j` (j = 2, 3 mod 4) sums to zero
//! over the quarter-turn-symmetric node set.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec};
use crate::util::fft_pool;

/// Required zero-frame width (in cells) for transform inputs.
pub const SUPPORT_FRAME: usize = 2;

/// Largest Eisenstein order kept in the image-correction series. At the
/// worst grid point (a corner, `|z| = L*sqrt(2)`) the terms decay like
/// `(sqrt(2)/2)^j`, so order 120 leaves a tail below 1e-17.
const EISENSTEIN_MAX_ORDER: usize = 120;

/// Eisenstein series `G_{2k}` of the unit square lattice `Z + iZ`, indexed
/// by `k` (so `[2]` is the order-4 sum). Only orders divisible by 4 are
/// nonzero. `G4` is the lemniscatic closed form `Gamma(1/4)^8 / (960 pi^2)`;
/// the rest follow from the Weierstrass recursion
/// `(2k+1)(2k-1)(k-3) G_{2k} = 3 sum_{m=2}^{k-2} (2m-1)(2k-2m-1) G_{2m} G_{2k-2m}`
/// with `G6 = 0` (square-lattice symmetry). Scale covariance
/// `G_m(s*Lambda) = G_m(Lambda) / s^m` gives the values for any box size.
fn eisenstein_unit_lattice() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
        let kmax = EISENSTEIN_MAX_ORDER / 2;
        let mut g = vec![0.0f64; kmax + 1];
        g[2] = GAMMA_QUARTER.powi(8) / (960.0 * std::f64::consts::PI * std::f64::consts::PI);
        for k in 4..=kmax {
            let mut s = 0.0;
            for m in 2..=k - 2 {
                s += (2 * m - 1) as f64 * (2 * (k - m) - 1) as f64 * g[m] * g[k - m];
            }
            g[k] = 3.0 * s / ((2 * k + 1) as f64 * (2 * k - 1) as f64 * (k - 3) as f64);
        }
        g
    })
}

/// Planned FFTs, spectral multipliers, image-correction fields, and scratch
/// buffers for one grid. Mutable during a transform; create one per thread
/// of control.
pub struct SpectralWorkspace {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    tmp: Vec<Complex64>,
    scratch: Vec<Complex64>,
    beurling_mult: Vec<Complex64>,
    cauchy_mult: Vec<Complex64>,
    /// `P(z)` sampled on the grid (see module docs): Cauchy correction.
    corr_c: Vec<Complex64>,
    /// `P'(z)` sampled on the grid: Beurling correction.
    corr_t: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n_side();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());

        // Multiplier tables in the transposed spectral layout produced by
        // fft2_forward: row index = x-frequency bin, column = y-frequency.
        let l = grid.half_width();
        let xi_of = |k: usize| {
            let signed = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
            std::f64::consts::PI * signed as f64 / l
        };
        let mut beurling_mult = vec![Complex64::new(0.0, 0.0); n * n];
        let mut cauchy_mult = vec![Complex64::new(0.0, 0.0); n * n];
        for kx in 0..n {
            for ky in 0..n {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let xi = Complex64::new(xi_of(kx), xi_of(ky));
                let idx = kx * n + ky;
                beurling_mult[idx] = xi.conj() / xi;
                cauchy_mult[idx] = Complex64::new(0.0, -2.0) / xi;
            }
        }

        // Image-correction fields. In units of the lattice scale `2L` every
        // node satisfies |z/2L| <= sqrt(2)/2 < 1, inside the convergence
        // disk of the Eisenstein expansion of `wp(z) - 1/z^2`.
        let g_unit = eisenstein_unit_lattice();
        let two_l = 2.0 * l;
        let mut corr_c = vec![Complex64::new(0.0, 0.0); n * n];
        let mut corr_t = vec![Complex64::new(0.0, 0.0); n * n];
        for (row, col, z) in grid.iter() {
            let w = z / two_l;
            let w4 = w * w * w * w;
            let mut w_jm1 = w * w; // w^(j-1), starting at j = 3
            let mut w_j = w_jm1 * w; // w^j
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            let mut order = 4usize; // Eisenstein order m = j + 1
            while order <= EISENSTEIN_MAX_ORDER {
                let gm = g_unit[order / 2];
                p += gm * w_j;
                dp += (order - 1) as f64 * gm * w_jm1;
                w_jm1 *= w4;
                w_j *= w4;
                order += 4;
            }
            // Undo the rescale z = 2L*w: G_m(Lambda) z^j = G_m w^j / 2L.
            let k = grid.index(row, col);
            corr_c[k] = p / two_l;
            corr_t[k] = dp / (two_l * two_l);
        }

        SpectralWorkspace {
            grid,
            fwd,
            inv,
            buf: vec![Complex64::new(0.0, 0.0); n * n],
            tmp: vec![Complex64::new(0.0, 0.0); n * n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            beurling_mult,
            cauchy_mult,
            corr_c,
            corr_t,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Beurling transform `T(omega)`: torus multiplier (DC mapped to zero)
    /// plus the monopole image correction `(M/pi) P'(z)` that restores the
    /// plane transform for disk-centered densities (see module docs).
    pub fn beurling(&mut self, omega: &ComplexField) -> Result<ComplexField> {
        self.check_input(omega)?;
        let area = 4.0 * self.grid.half_width() * self.grid.half_width();
        let monopole = omega.mean() * area * std::f64::consts::FRAC_1_PI;
        self.buf.copy_from_slice(omega.samples());
        self.fft2_forward();
        for (v, m) in self.buf.iter_mut().zip(&self.beurling_mult) {
            *v *= m;
        }
        self.fft2_inverse();
        let scale = 1.0 / (self.grid.len() as f64);
        let samples = self
            .buf
            .iter()
            .zip(&self.corr_t)
            .map(|(v, ct)| v * scale + monopole * ct)
            .collect();
        ComplexField::from_samples(self.grid, samples)
    }

    /// Cauchy transform `C(omega)`: periodic antiderivative of the mean-free
    /// part, the affine term `mean(omega) * conj(z)` (so that
    /// `d_zbar C(omega) = omega` holds including the DC component), and the
    /// monopole image correction `(M/pi) P(z)` (see module docs).
    pub fn cauchy(&mut self, omega: &ComplexField) -> Result<ComplexField> {
        self.check_input(omega)?;
        let mean = omega.mean();
        let area = 4.0 * self.grid.half_width() * self.grid.half_width();
        let monopole = mean * area * std::f64::consts::FRAC_1_PI;
        self.buf.copy_from_slice(omega.samples());
        self.fft2_forward();
        for (v, m) in self.buf.iter_mut().zip(&self.cauchy_mult) {
            *v *= m;
        }
        self.fft2_inverse();
        let scale = 1.0 / (self.grid.len() as f64);
        let mut samples: Vec<Complex64> = self
            .buf
            .iter()
            .zip(&self.corr_c)
            .map(|(v, cc)| v * scale + monopole * cc)
            .collect();
        for (row, col, z) in self.grid.iter() {
            samples[self.grid.index(row, col)] += mean * z.conj();
        }
        ComplexField::from_samples(self.grid, samples)
    }

    fn check_input(&self, omega: &ComplexField) -> Result<()> {
        if omega.grid() != self.grid {
            return Err(Error::GridMismatch(
                self.grid.n_side(),
                self.grid.half_width(),
                omega.grid().n_side(),
                omega.grid().half_width(),
            ));
        }
        if !omega.frame_is_zero(SUPPORT_FRAME) {
            return Err(Error::SupportTouchesBoundary(SUPPORT_FRAME));
        }
        Ok(())
    }

    /// Row FFTs, transpose, row FFTs: leaves `buf` in the transposed
    /// spectral layout the multiplier tables expect.
    fn fft2_forward(&mut self) {
        let n = self.grid.n_side();
        row_pass(&self.fwd, &mut self.buf, &mut self.scratch, n);
        transpose(&self.buf, &mut self.tmp, n);
        std::mem::swap(&mut self.buf, &mut self.tmp);
        row_pass(&self.fwd, &mut self.buf, &mut self.scratch, n);
    }

    /// Inverse of [`fft2_forward`]; caller divides by `n^2`.
    fn fft2_inverse(&mut self) {
        let n = self.grid.n_side();
        row_pass(&self.inv, &mut self.buf, &mut self.scratch, n);
        transpose(&self.buf, &mut self.tmp, n);
        std::mem::swap(&mut self.buf, &mut self.tmp);
        row_pass(&self.inv, &mut self.buf, &mut self.scratch, n);
    }
}

/// FFT every length-`n` row of `buf` in place. Rows are independent, so the
/// parallel split is bit-identical to the serial pass.
fn row_pass(fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], scratch: &mut [Complex64], n: usize) {
    match fft_pool() {
        Some(pool) => {
            let scratch_len = fft.get_inplace_scratch_len();
            pool.install(|| {
                buf.par_chunks_exact_mut(n).for_each_init(
                    || vec![Complex64::new(0.0, 0.0); scratch_len],
                    |scr, row| fft.process_with_scratch(row, scr),
                );
            });
        }
        None => fft.process_with_scratch(buf, scratch),
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
