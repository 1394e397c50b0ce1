//! BCOF coefficient tables: file-backed coefficient pairs sampled on a
//! `(z, |w|)` lattice.
//!
//! The format models coefficients whose dependence on the unknown enters
//! through `|w|` alone — true of the benchmark families, whose angular
//! factor comes from `z` — so a table stores complex samples
//! `mu(z_jk, t_i)`, `nu(z_jk, t_i)` on a square `z` lattice times a uniform
//! `|w|` knot vector. Evaluation is bilinear in `z` and linear in `|w|`;
//! the phase of `w` passes through untouched (it never enters the lookup,
//! and the stored complex values are returned as interpolated). Queries
//! outside the `z` lattice return zero — the equation's coefficients vanish
//! outside the unit disk, so an extent of 1.0 covers the support exactly.
//!
//! Layout (all little-endian):
//!
//! ```text
//! bytes 0..4    magic "BCOF"
//! bytes 4..8    version  u32 = 1
//! bytes 8..12   n_z      u32 >= 2   (z-lattice nodes per side)
//! bytes 12..16  n_w      u32 >= 1   (|w| knots)
//! bytes 16..24  z_extent f64 > 0    (lattice spans [-extent, extent]^2)
//! bytes 24..32  w_max    f64 > 0    (knots uniform on [0, w_max])
//! then          mu block, nu block: n_w * n_z * n_z samples of (re, im)
//!               f64 pairs, |w|-knot outermost, then row-major over z
//!               (row tracks the imaginary part)
//! ```
//!
//! Every stored knot must satisfy `|mu| + |nu| < 1`; the loader rejects the
//! file otherwise, naming the offending knot. Because interpolation applies
//! the same convex weights to `mu` and `nu`, interpolated values satisfy
//! `|mu| + |nu| <= max` over the surrounding knots, so the per-cell bound
//! table this module precomputes is a true pointwise majorant and the
//! derived solver problems stay uniformly contractive.

use crate::Failure;
use beltrami_core::{C64, Oracle};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"BCOF";
const VERSION: u32 = 1;

#[derive(Debug)]
pub struct CoeffTable {
    n_z: usize,
    n_w: usize,
    z_extent: f64,
    w_max: f64,
    mu: Vec<C64>,
    nu: Vec<C64>,
    /// Per-z-cell max of `|mu| + |nu|` over the cell's four corners and all
    /// `|w|` knots; `(n_z - 1)^2` entries, row-major.
    cell_bound: Vec<f64>,
}

impl CoeffTable {
    /// Builds a table from raw knot values, validating geometry and the
    /// strict contraction bound at every knot.
    pub fn new(
        n_z: usize,
        n_w: usize,
        z_extent: f64,
        w_max: f64,
        mu: Vec<C64>,
        nu: Vec<C64>,
    ) -> Result<Self, Failure> {
        if n_z < 2 {
            return Err(Failure::Usage(format!("coefficient table needs n_z >= 2, got {n_z}")));
        }
        if n_w < 1 {
            return Err(Failure::Usage(format!("coefficient table needs n_w >= 1, got {n_w}")));
        }
        if !(z_extent > 0.0 && z_extent.is_finite()) {
            return Err(Failure::Usage(format!(
                "coefficient table needs a positive finite z extent, got {z_extent}"
            )));
        }
        if !(w_max > 0.0 && w_max.is_finite()) {
            return Err(Failure::Usage(format!(
                "coefficient table needs a positive finite w_max, got {w_max}"
            )));
        }
        let expected = n_w * n_z * n_z;
        if mu.len() != expected || nu.len() != expected {
            return Err(Failure::Usage(format!(
                "coefficient table expects {expected} samples per block, got {} and {}",
                mu.len(),
                nu.len()
            )));
        }
        for iw in 0..n_w {
            for row in 0..n_z {
                for col in 0..n_z {
                    let k = (iw * n_z + row) * n_z + col;
                    let sum = mu[k].norm() + nu[k].norm();
                    if !sum.is_finite() || sum >= 1.0 {
                        return Err(Failure::Usage(format!(
                            "coefficient knot (w index {iw}, row {row}, col {col}) has \
                             |mu| + |nu| = {sum}; every knot must satisfy |mu| + |nu| < 1"
                        )));
                    }
                }
            }
        }

        let mut cell_bound = vec![0.0f64; (n_z - 1) * (n_z - 1)];
        for row in 0..n_z - 1 {
            for col in 0..n_z - 1 {
                let mut worst = 0.0f64;
                for iw in 0..n_w {
                    for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let k = (iw * n_z + row + dr) * n_z + col + dc;
                        worst = worst.max(mu[k].norm() + nu[k].norm());
                    }
                }
                cell_bound[row * (n_z - 1) + col] = worst;
            }
        }

        Ok(CoeffTable { n_z, n_w, z_extent, w_max, mu, nu, cell_bound })
    }

    /// Samples a coefficient pair function onto a fresh table.
    pub fn sample(
        n_z: usize,
        n_w: usize,
        z_extent: f64,
        w_max: f64,
        mut coeffs: impl FnMut(C64, f64) -> (C64, C64),
    ) -> Result<Self, Failure> {
        if n_z < 2 || n_w < 1 {
            return Err(Failure::Usage(format!(
                "coefficient table needs n_z >= 2 and n_w >= 1, got {n_z} and {n_w}"
            )));
        }
        let z_step = 2.0 * z_extent / (n_z - 1) as f64;
        let w_step = if n_w == 1 { 0.0 } else { w_max / (n_w - 1) as f64 };
        let mut mu = Vec::with_capacity(n_w * n_z * n_z);
        let mut nu = Vec::with_capacity(n_w * n_z * n_z);
        for iw in 0..n_w {
            let t = iw as f64 * w_step;
            for row in 0..n_z {
                for col in 0..n_z {
                    let z = C64::new(
                        -z_extent + col as f64 * z_step,
                        -z_extent + row as f64 * z_step,
                    );
                    let (m, v) = coeffs(z, t);
                    mu.push(m);
                    nu.push(v);
                }
            }
        }
        CoeffTable::new(n_z, n_w, z_extent, w_max, mu, nu)
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    /// Interpolated coefficient pair at `(z, |w| = t)`: bilinear over the z
    /// cell, linear between |w| knots, zero outside the lattice.
    pub fn eval(&self, z: C64, t: f64) -> (C64, C64) {
        let step = 2.0 * self.z_extent / (self.n_z - 1) as f64;
        let u = (z.re + self.z_extent) / step;
        let v = (z.im + self.z_extent) / step;
        let top = (self.n_z - 1) as f64;
        if !(0.0..=top).contains(&u) || !(0.0..=top).contains(&v) {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let col = (u.floor() as usize).min(self.n_z - 2);
        let row = (v.floor() as usize).min(self.n_z - 2);
        let fu = u - col as f64;
        let fv = v - row as f64;

        let (iw, fw) = if self.n_w == 1 {
            (0usize, 0.0f64)
        } else {
            let w_step = self.w_max / (self.n_w - 1) as f64;
            let s = (t.clamp(0.0, self.w_max)) / w_step;
            let iw = (s.floor() as usize).min(self.n_w - 2);
            (iw, s - iw as f64)
        };

        let mut mu = C64::new(0.0, 0.0);
        let mut nu = C64::new(0.0, 0.0);
        let w_weights = [1.0 - fw, fw];
        let layers = if self.n_w == 1 { 1 } else { 2 };
        for (dw, &ww) in w_weights.iter().enumerate().take(layers) {
            if ww == 0.0 && dw == 1 {
                continue;
            }
            for (dr, wr) in [(0usize, 1.0 - fv), (1, fv)] {
                for (dc, wc) in [(0usize, 1.0 - fu), (1, fu)] {
                    let weight = ww * wr * wc;
                    if weight == 0.0 {
                        continue;
                    }
                    let k = ((iw + dw) * self.n_z + row + dr) * self.n_z + col + dc;
                    mu += weight * self.mu[k];
                    nu += weight * self.nu[k];
                }
            }
        }
        (mu, nu)
    }

    /// Pointwise majorant of `|mu| + |nu|` at `z`: the containing cell's
    /// precomputed corner/knot max, zero outside the lattice.
    pub fn bound(&self, z: C64) -> f64 {
        let step = 2.0 * self.z_extent / (self.n_z - 1) as f64;
        let u = (z.re + self.z_extent) / step;
        let v = (z.im + self.z_extent) / step;
        let top = (self.n_z - 1) as f64;
        if !(0.0..=top).contains(&u) || !(0.0..=top).contains(&v) {
            return 0.0;
        }
        let col = (u.floor() as usize).min(self.n_z - 2);
        let row = (v.floor() as usize).min(self.n_z - 2);
        self.cell_bound[row * (self.n_z - 1) + col]
    }

    /// Global max of the cell bounds; strictly below 1 by construction.
    pub fn q_max(&self) -> f64 {
        self.cell_bound.iter().copied().fold(0.0, f64::max)
    }

    /// Samples a coefficient pair function onto a fresh table, propagating
    /// evaluation failures.
    pub fn try_sample(
        n_z: usize,
        n_w: usize,
        z_extent: f64,
        w_max: f64,
        coeffs: impl Fn(C64, f64) -> Result<(C64, C64), Failure>,
    ) -> Result<Self, Failure> {
        let mut stash = Ok(());
        let table = CoeffTable::sample(n_z, n_w, z_extent, w_max, |z, t| match coeffs(z, t) {
            Ok(pair) => pair,
            Err(failure) => {
                if stash.is_ok() {
                    stash = Err(failure);
                }
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            }
        });
        stash?;
        table
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let file = File::create(path)
            .map_err(|err| Failure::Io(format!("cannot create {}: {err}", path.display())))?;
        let mut out = BufWriter::new(file);
        let io_err = |err: std::io::Error| {
            Failure::Io(format!("cannot write {}: {err}", path.display()))
        };
        out.write_all(MAGIC).map_err(io_err)?;
        out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
        out.write_all(&(self.n_z as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(&(self.n_w as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(&self.z_extent.to_le_bytes()).map_err(io_err)?;
        out.write_all(&self.w_max.to_le_bytes()).map_err(io_err)?;
        for block in [&self.mu, &self.nu] {
            for value in block {
                out.write_all(&value.re.to_le_bytes()).map_err(io_err)?;
                out.write_all(&value.im.to_le_bytes()).map_err(io_err)?;
            }
        }
        out.flush().map_err(io_err)
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let file = File::open(path)
            .map_err(|err| Failure::Io(format!("cannot open {}: {err}", path.display())))?;
        let mut input = BufReader::new(file);
        let io_err = |err: std::io::Error| {
            Failure::Io(format!("cannot read {}: {err}", path.display()))
        };
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(Failure::Io(format!(
                "{} is not a coefficient table (bad magic)",
                path.display()
            )));
        }
        let version = read_u32(&mut input).map_err(io_err)?;
        if version != VERSION {
            return Err(Failure::Io(format!(
                "{} has unsupported coefficient-table version {version}",
                path.display()
            )));
        }
        let n_z = read_u32(&mut input).map_err(io_err)? as usize;
        let n_w = read_u32(&mut input).map_err(io_err)? as usize;
        let z_extent = read_f64(&mut input).map_err(io_err)?;
        let w_max = read_f64(&mut input).map_err(io_err)?;
        if n_z < 2 || n_w < 1 || n_z.saturating_mul(n_z).saturating_mul(n_w) > (1 << 28) {
            return Err(Failure::Io(format!(
                "{} has an implausible lattice {n_z} x {n_z} x {n_w}",
                path.display()
            )));
        }
        let count = n_w * n_z * n_z;
        let mut blocks = [Vec::with_capacity(count), Vec::with_capacity(count)];
        for block in &mut blocks {
            for _ in 0..count {
                let re = read_f64(&mut input).map_err(io_err)?;
                let im = read_f64(&mut input).map_err(io_err)?;
                block.push(C64::new(re, im));
            }
        }
        let [mu, nu] = blocks;
        // Knot-level validation failures on a file are data errors, not
        // command-line mistakes.
        CoeffTable::new(n_z, n_w, z_extent, w_max, mu, nu).map_err(|failure| match failure {
            Failure::Usage(message) => Failure::Io(format!("{}: {message}", path.display())),
            other => other,
        })
    }
}

/// Wraps a shared table as a coefficient oracle for the solver. The caller
/// keeps its own handle for gate construction or direct queries.
pub fn oracle_from(table: Arc<CoeffTable>) -> Oracle {
    let mu_table = table.clone();
    let nu_table = table.clone();
    Oracle::new(
        Arc::new(move |z, w: C64| mu_table.eval(z, w.norm()).0),
        Arc::new(move |z, w: C64| nu_table.eval(z, w.norm()).1),
        Arc::new(move |z| table.bound(z)),
    )
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(input: &mut impl Read) -> std::io::Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(z: C64, t: f64) -> (C64, C64) {
        // Smooth in both arguments, comfortably inside the unit bound.
        let m = C64::new(0.2 * z.re + 0.1 * t, 0.1 * z.im);
        let v = C64::new(0.05 * t, -0.1 * z.re);
        (m, v)
    }

    #[test]
    fn roundtrips_through_a_file_bit_for_bit() {
        let table = CoeffTable::sample(9, 3, 1.0, 2.0, ramp).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.bcof");
        table.write(&path).unwrap();
        let back = CoeffTable::read(&path).unwrap();
        assert_eq!(back.n_z(), 9);
        assert_eq!(back.n_w(), 3);
        for (a, b) in table.mu.iter().zip(&back.mu) {
            assert_eq!(a, b);
        }
        for (a, b) in table.nu.iter().zip(&back.nu) {
            assert_eq!(a, b);
        }
        let z = C64::new(0.3, -0.4);
        assert_eq!(table.eval(z, 0.7), back.eval(z, 0.7));
    }

    #[test]
    fn interpolation_is_exact_on_lattice_knots_and_linear_data() {
        let table = CoeffTable::sample(17, 5, 1.0, 2.0, ramp).unwrap();
        // ramp is affine in (re z, im z, t), so trilinear interpolation
        // reproduces it everywhere inside the lattice, not only at knots.
        for &(x, y, t) in
            &[(0.0, 0.0, 0.0), (0.31, -0.57, 0.83), (-0.99, 0.99, 2.0), (0.125, 0.125, 1.0)]
        {
            let z = C64::new(x, y);
            let (want_mu, want_nu) = ramp(z, t);
            let (got_mu, got_nu) = table.eval(z, t);
            assert!((got_mu - want_mu).norm() < 1e-14, "mu at {z} t={t}");
            assert!((got_nu - want_nu).norm() < 1e-14, "nu at {z} t={t}");
        }
    }

    #[test]
    fn queries_outside_the_lattice_vanish() {
        let table = CoeffTable::sample(9, 2, 1.0, 1.0, ramp).unwrap();
        for &(x, y) in &[(1.5, 0.0), (0.0, -1.01), (2.0, 2.0)] {
            let (m, v) = table.eval(C64::new(x, y), 0.5);
            assert_eq!(m, C64::new(0.0, 0.0));
            assert_eq!(v, C64::new(0.0, 0.0));
            assert_eq!(table.bound(C64::new(x, y)), 0.0);
        }
    }

    #[test]
    fn w_queries_clamp_to_the_knot_range() {
        let table = CoeffTable::sample(9, 3, 1.0, 2.0, ramp).unwrap();
        let z = C64::new(0.25, 0.25);
        assert_eq!(table.eval(z, 5.0), table.eval(z, 2.0));
        assert_eq!(table.eval(z, -1.0), table.eval(z, 0.0));
    }

    #[test]
    fn cell_bound_dominates_interpolated_values() {
        let table = CoeffTable::sample(13, 4, 1.0, 2.0, ramp).unwrap();
        // Sweep a fine lattice of query points; the shared-weight convexity
        // argument makes the cell bound a true majorant.
        for i in 0..40 {
            for j in 0..40 {
                let z = C64::new(-1.0 + i as f64 * 0.05, -1.0 + j as f64 * 0.05);
                for step in 0..5 {
                    let t = step as f64 * 0.5;
                    let (m, v) = table.eval(z, t);
                    let sum = m.norm() + v.norm();
                    assert!(
                        sum <= table.bound(z) + 1e-12,
                        "bound violated at {z}, t = {t}: {sum} > {}",
                        table.bound(z)
                    );
                }
            }
        }
        assert!(table.q_max() < 1.0);
    }

    #[test]
    fn knots_at_or_above_the_unit_bound_are_rejected() {
        let err = CoeffTable::sample(5, 1, 1.0, 1.0, |_, _| {
            (C64::new(0.7, 0.0), C64::new(0.3, 0.0))
        })
        .unwrap_err();
        match err {
            Failure::Usage(message) => {
                assert!(message.contains("|mu| + |nu|"), "message explains the bound: {message}")
            }
            other => panic!("expected a validation failure, got {other:?}"),
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bcof");
        std::fs::write(&path, b"BFLDxxxx").unwrap();
        assert!(matches!(CoeffTable::read(&path), Err(Failure::Io(_))));
        let path2 = dir.path().join("short.bcof");
        std::fs::write(&path2, b"BCOF").unwrap();
        assert!(matches!(CoeffTable::read(&path2), Err(Failure::Io(_))));
    }

    #[test]
    fn oracle_adapter_exposes_values_and_bound() {
        let table = Arc::new(CoeffTable::sample(17, 5, 1.0, 2.0, ramp).unwrap());
        let z = C64::new(0.4, -0.2);
        let w = C64::from_polar(1.3, 0.9);
        let (want_mu, want_nu) = table.eval(z, w.norm());
        let oracle = oracle_from(table);
        let (mu, nu) = oracle.eval(z, w).unwrap();
        assert_eq!(mu, want_mu);
        assert_eq!(nu, want_nu);
        assert!(oracle.bound(z) >= mu.norm() + nu.norm());
    }

    #[test]
    fn try_sample_propagates_the_first_failure() {
        let err = CoeffTable::try_sample(5, 1, 1.0, 1.0, |z, _| {
            if z.re > 0.9 {
                Err(Failure::Usage("synthetic".into()))
            } else {
                Ok((C64::new(0.1, 0.0), C64::new(0.0, 0.0)))
            }
        })
        .unwrap_err();
        assert!(matches!(err, Failure::Usage(message) if message == "synthetic"));
    }
}
