//! Post-solve analysis: Jacobian and dilatation fields, inner-distortion
//! integrals, geometric inverse-map construction, the logarithmic Hölder
//! modulus check, and derivative-convergence measurements along a
//! truncation ladder.
//!
//! Degeneracy conventions, applied identically everywhere a dilatation is
//! computed: writing `a = |f_z|` and `b = |f_zbar|`,
//! `K = 1` where `a + b = 0` (both derivatives vanish), `K = (a+b)/(a-b)`
//! where the Jacobian `J = a^2 - b^2` is positive, and `K = +inf` otherwise
//! (the map is degenerate or orientation-reversing there). Infinities are
//! representable in the report fields and excluded from integrals, with the
//! excluded mass reported rather than hidden.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec, RealField};
use crate::solver::{LadderRun, MappingSolution};
use crate::util::SplitMix64;

/// Nodewise dilatation and Jacobian analysis of one mapping.
#[derive(Clone, Debug)]
pub struct DilatationReport {
    /// `K_{mu_f} = (|f_z| + |f_zbar|) / (|f_z| - |f_zbar|)` under the
    /// conventions above.
    pub k_mu_f: RealField,
    /// Inner distortion `K_{I,p} = J / (|f_z| - |f_zbar|)^p`; equals
    /// `K_{mu_f}` at `p = 2` wherever `J != 0`.
    pub k_i_p: RealField,
    /// `J = |f_z|^2 - |f_zbar|^2`.
    pub jacobian: RealField,
    /// Fraction of unit-disk nodes with `J <= 0`.
    pub degenerate_fraction: f64,
    pub p: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidParam {
            key: "p",
            message: format!("inner-distortion exponent must lie in [1, 2], got {p}"),
        });
    }
    Ok(())
}

fn report_from_derivs(fz: &ComplexField, fzbar: &ComplexField, p: f64) -> DilatationReport {
    let grid = fz.grid();
    let mut k_mu = vec![0.0f64; grid.len()];
    let mut k_ip = vec![0.0f64; grid.len()];
    let mut jac = vec![0.0f64; grid.len()];
    let mut degenerate = 0usize;
    let mut disk_nodes = 0usize;
    for (row, col, z) in grid.iter() {
        let k = grid.index(row, col);
        let a = fz.samples()[k].norm();
        let b = fzbar.samples()[k].norm();
        let j = a * a - b * b;
        jac[k] = j;
        if a + b == 0.0 {
            k_mu[k] = 1.0;
            k_ip[k] = 1.0;
        } else if j > 0.0 {
            k_mu[k] = (a + b) / (a - b);
            k_ip[k] = j / (a - b).powf(p);
        } else {
            k_mu[k] = f64::INFINITY;
            k_ip[k] = f64::INFINITY;
        }
        if z.norm() < 1.0 {
            disk_nodes += 1;
            if j <= 0.0 {
                degenerate += 1;
            }
        }
    }
    DilatationReport {
        k_mu_f: RealField::from_samples(grid, k_mu).expect("matching length"),
        k_i_p: RealField::from_samples(grid, k_ip).expect("matching length"),
        jacobian: RealField::from_samples(grid, jac).expect("matching length"),
        degenerate_fraction: degenerate as f64 / disk_nodes as f64,
        p,
    }
}

/// Dilatation analysis of a solver output, using the stored (spectral)
/// derivative fields. `p` must lie in `[1, 2]`.
pub fn dilatation_report(sol: &MappingSolution, p: f64) -> Result<DilatationReport> {
    check_p(p)?;
    Ok(report_from_derivs(&sol.fz, &sol.fzbar, p))
}

/// Dilatation analysis of an arbitrary sampled mapping, with derivatives by
/// second-order finite differences. Prefer this for maps sampled from
/// closed forms, and for degeneracy screening where spectral ringing from a
/// kink would contaminate the count.
pub fn dilatation_report_from_field(f: &ComplexField, p: f64) -> Result<DilatationReport> {
    check_p(p)?;
    let (fz, fzbar) = f.wirtinger_derivatives()?;
    Ok(report_from_derivs(&fz, &fzbar, p))
}

/// A geometric inverse of a sampled mapping, on its own target grid.
#[derive(Clone, Debug)]
pub struct InverseMap {
    /// `g(w)` per target node; zero where unmapped.
    pub g: ComplexField,
    /// Whether each target node was reached by the forward map.
    pub mapped: Vec<bool>,
    /// Mapped fraction of target nodes inside the unit disk.
    pub coverage: f64,
    /// Max of `|f(g(w)) - w|` over mapped disk nodes (forward values by
    /// bilinear interpolation of the sampled `f`).
    pub max_roundtrip: f64,
    /// Mean of the same residual.
    pub mean_roundtrip: f64,
}

/// Separation (in source-grid spacings) beyond which two preimages of one
/// target count as a fold rather than as the same point seen from two
/// adjacent cells.
const FOLD_SEPARATION: f64 = 3.0;
/// Source cells participate when all corners lie within this radius, and
/// targets are attempted within a matching margin, so every disk node of
/// the target grid keeps a full finite-difference stencil.
const SOURCE_RADIUS: f64 = 1.05;
const TARGET_RADIUS: f64 = 1.02;

/// Inverts a solver solution onto `target`: for each target node `w` it
/// finds `z` with `f(z) = w` by bucketed triangle lookup plus Newton
/// refinement on the bilinear patch of the source cell. Nodes outside the
/// image are marked unmapped; a second, well-separated preimage is a hard
/// `NotInjective` error. Requires the solution to be a homeomorphism
/// candidate: finite-difference degenerate fraction below 0.5%.
pub fn invert_mapping(sol: &MappingSolution, target: GridSpec) -> Result<InverseMap> {
    invert_field(&sol.f, target)
}

/// [`invert_mapping`] for any sampled field (same preconditions).
pub fn invert_field(f: &ComplexField, target: GridSpec) -> Result<InverseMap> {
    let screen = dilatation_report_from_field(f, 2.0)?;
    if screen.degenerate_fraction >= 0.005 {
        return Err(Error::DegenerateSolution(screen.degenerate_fraction));
    }
    let grid = f.grid();
    let n = grid.n_side();
    let h = grid.spacing();
    let s = f.samples();

    // Collect source cells whose four corners sit inside SOURCE_RADIUS and
    // bin them by image bounding box into a uniform bucket grid.
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for row in 0..n - 1 {
        for col in 0..n - 1 {
            let inside = [(0, 0), (0, 1), (1, 0), (1, 1)]
                .iter()
                .all(|&(dv, du)| grid.node(row + dv, col + du).norm() <= SOURCE_RADIUS);
            if inside {
                cells.push((row, col));
            }
        }
    }
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let corner = |row: usize, col: usize, dv: usize, du: usize| -> Complex64 {
        s[grid.index(row + dv, col + du)]
    };
    for &(row, col) in &cells {
        for (dv, du) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let v = corner(row, col, dv, du);
            lo = Complex64::new(lo.re.min(v.re), lo.im.min(v.im));
            hi = Complex64::new(hi.re.max(v.re), hi.im.max(v.im));
        }
    }
    if !(lo.re.is_finite() && hi.re.is_finite()) {
        return Err(Error::Format("forward field has non-finite samples".into()));
    }
    const BUCKETS: usize = 256;
    let span = Complex64::new((hi.re - lo.re).max(1e-12), (hi.im - lo.im).max(1e-12));
    let bucket_of = |p: Complex64| -> (usize, usize) {
        let bx = (((p.re - lo.re) / span.re) * BUCKETS as f64).floor();
        let by = (((p.im - lo.im) / span.im) * BUCKETS as f64).floor();
        (
            (bx.max(0.0) as usize).min(BUCKETS - 1),
            (by.max(0.0) as usize).min(BUCKETS - 1),
        )
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); BUCKETS * BUCKETS];
    for (ci, &(row, col)) in cells.iter().enumerate() {
        let mut c_lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut c_hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (dv, du) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let v = corner(row, col, dv, du);
            c_lo = Complex64::new(c_lo.re.min(v.re), c_lo.im.min(v.im));
            c_hi = Complex64::new(c_hi.re.max(v.re), c_hi.im.max(v.im));
        }
        let (bx0, by0) = bucket_of(c_lo);
        let (bx1, by1) = bucket_of(c_hi);
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                buckets[by * BUCKETS + bx].push(ci as u32);
            }
        }
    }

    // Newton on the bilinear patch of one cell; returns the preimage if the
    // target lies in this cell's image.
    let solve_cell = |row: usize, col: usize, w: Complex64| -> Option<Complex64> {
        let f00 = corner(row, col, 0, 0);
        let f01 = corner(row, col, 0, 1);
        let f10 = corner(row, col, 1, 0);
        let f11 = corner(row, col, 1, 1);
        let mut u = 0.5f64;
        let mut v = 0.5f64;
        for _ in 0..24 {
            let fu0 = f00 + (f01 - f00) * u; // value along the v = 0 edge
            let fu1 = f10 + (f11 - f10) * u; // value along the v = 1 edge
            let val = fu0 + (fu1 - fu0) * v;
            let r = val - w;
            if r.norm() < 1e-13 {
                break;
            }
            // Jacobian of the patch in (u, v).
            let d_u = (f01 - f00) * (1.0 - v) + (f11 - f10) * v;
            let d_v = fu1 - fu0;
            let det = d_u.re * d_v.im - d_u.im * d_v.re;
            if det.abs() < 1e-300 {
                return None;
            }
            let du = (r.re * d_v.im - r.im * d_v.re) / det;
            let dv = (d_u.re * r.im - d_u.im * r.re) / det;
            u -= du;
            v -= dv;
            if !(u.is_finite() && v.is_finite()) || u.abs() > 8.0 || v.abs() > 8.0 {
                return None;
            }
        }
        let fu0 = f00 + (f01 - f00) * u;
        let fu1 = f10 + (f11 - f10) * u;
        if (fu0 + (fu1 - fu0) * v - w).norm() > 1e-10 * (1.0 + w.norm()) {
            return None;
        }
        let slack = 1e-7;
        if (-slack..=1.0 + slack).contains(&u) && (-slack..=1.0 + slack).contains(&v) {
            Some(grid.node(row, col) + Complex64::new(u * h, v * h))
        } else {
            None
        }
    };

    let tn = target.n_side();
    let mut g = vec![Complex64::ZERO; target.len()];
    let mut mapped = vec![false; target.len()];
    let mut disk_nodes = 0usize;
    let mut disk_mapped = 0usize;
    let mut max_rt = 0.0f64;
    let mut sum_rt = 0.0f64;
    for trow in 0..tn {
        for tcol in 0..tn {
            let w = target.node(trow, tcol);
            let in_disk = w.norm() < 1.0;
            if in_disk {
                disk_nodes += 1;
            }
            if w.norm() > TARGET_RADIUS {
                continue;
            }
            let (bx, by) = bucket_of(w);
            let mut found: Option<Complex64> = None;
            for &ci in &buckets[by * BUCKETS + bx] {
                let (row, col) = cells[ci as usize];
                if let Some(z) = solve_cell(row, col, w) {
                    match found {
                        None => found = Some(z),
                        Some(prev) => {
                            if (prev - z).norm() > FOLD_SEPARATION * h {
                                return Err(Error::NotInjective(w));
                            }
                        }
                    }
                }
            }
            if let Some(z) = found {
                let k = target.index(trow, tcol);
                g[k] = z;
                mapped[k] = true;
                if in_disk {
                    disk_mapped += 1;
                    if let Some(fw) = f.interpolate(z) {
                        let rt = (fw - w).norm();
                        max_rt = max_rt.max(rt);
                        sum_rt += rt;
                    }
                }
            }
        }
    }
    let coverage = if disk_nodes == 0 { 0.0 } else { disk_mapped as f64 / disk_nodes as f64 };
    Ok(InverseMap {
        g: ComplexField::from_samples(target, g)?,
        mapped,
        coverage,
        max_roundtrip: max_rt,
        mean_roundtrip: if disk_mapped == 0 { 0.0 } else { sum_rt / disk_mapped as f64 },
    })
}

/// Integrates the inner distortion `K_{I,p}(w, g)` of an inverse map over
/// the unit disk, from central differences restricted to fully-mapped
/// stencils. Returns `(integral, excluded_mass)`: the excluded mass is
/// `h^2` times the disk nodes that were unmapped, stencil-incomplete, or
/// carried a non-finite distortion. Coverage below 99% is an error.
pub fn inverse_dilatation_integral(inv: &InverseMap, p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    if inv.coverage < 0.99 {
        return Err(Error::InverseCoverage {
            covered_pct: inv.coverage * 100.0,
            needed_pct: 99.0,
        });
    }
    let grid = inv.g.grid();
    let n = grid.n_side();
    let h = grid.spacing();
    let s = inv.g.samples();
    let mut integral = 0.0f64;
    let mut excluded = 0usize;
    for (row, col, w) in grid.iter() {
        if w.norm() >= 1.0 {
            continue;
        }
        let k = grid.index(row, col);
        let stencil_ok = row > 0
            && row < n - 1
            && col > 0
            && col < n - 1
            && inv.mapped[k]
            && inv.mapped[k - 1]
            && inv.mapped[k + 1]
            && inv.mapped[k - n]
            && inv.mapped[k + n];
        if !stencil_ok {
            excluded += 1;
            continue;
        }
        let gx = (s[k + 1] - s[k - 1]) / (2.0 * h);
        let gy = (s[k + n] - s[k - n]) / (2.0 * h);
        let i = Complex64::new(0.0, 1.0);
        let a = ((gx - i * gy) * 0.5).norm();
        let b = ((gx + i * gy) * 0.5).norm();
        let j = a * a - b * b;
        let k_ip = if a + b == 0.0 {
            1.0
        } else if j > 0.0 {
            j / (a - b).powf(p)
        } else {
            f64::INFINITY
        };
        if k_ip.is_finite() {
            integral += k_ip;
        } else {
            excluded += 1;
        }
    }
    let h2 = h * h;
    Ok((integral * h2, excluded as f64 * h2))
}

/// Result of the logarithmic Hölder modulus check.
#[derive(Clone, Debug)]
pub struct HolderReport {
    pub compact_radius: f64,
    /// Distance from the compact to the boundary, `1 - compact_radius`.
    pub r0: f64,
    /// The `L^1(D)` majorant norm used in the normalization.
    pub q_l1: f64,
    /// `max |f(x) - f(y)| sqrt(log(1 + r0 / (2|x-y|))) / sqrt(q_l1)` over
    /// the sampled pairs.
    pub fitted_c: f64,
    /// The pair attaining `fitted_c`, with the attained ratio.
    pub worst_pair: (Complex64, Complex64, f64),
    /// Max ratio among pairs below the separation split point
    /// `min(20h, s_max / 2)`.
    pub decade_max: f64,
    /// Max ratio among pairs above the split point.
    pub large_scale_max: f64,
    /// Median ratio over all sampled pairs (context only).
    pub median: f64,
    /// No growth trend at small scales: `decade_max <= 2 * large_scale_max`.
    pub pass: bool,
}

/// Checks the logarithmic Hölder modulus of a solver solution on the
/// compact `|z| <= compact_radius`: sampled point pairs with log-uniform
/// separations in `[2h, 0.5]` are scored by
/// `|f(x) - f(y)| sqrt(log(1 + r0/(2|x-y|))) / sqrt(q_l1)`, which the
/// modulus bound says is uniformly bounded. The check passes when the
/// small-separation ratios show no blow-up relative to the
/// large-separation ones (`decade_max <= 2 * large_scale_max`). The
/// comparison is max-against-max rather than against the median: maps
/// that are constant on part of the compact produce many exactly-zero
/// ratios, which skew any quantile but leave the maxima meaningful.
/// Deterministic: pairs come from a fixed-seed generator.
pub fn log_holder_check(
    sol: &MappingSolution,
    q_l1: f64,
    compact_radius: f64,
    n_pairs: usize,
) -> Result<HolderReport> {
    log_holder_field(&sol.f, q_l1, compact_radius, n_pairs)
}

/// [`log_holder_check`] for any sampled field.
pub fn log_holder_field(
    f: &ComplexField,
    q_l1: f64,
    compact_radius: f64,
    n_pairs: usize,
) -> Result<HolderReport> {
    if !(compact_radius > 0.0 && compact_radius < 1.0) {
        return Err(Error::InvalidParam {
            key: "compact_radius",
            message: format!("compact radius must lie in (0, 1), got {compact_radius}"),
        });
    }
    if n_pairs < 1000 {
        return Err(Error::InvalidParam {
            key: "n_pairs",
            message: format!("need at least 1000 pairs, got {n_pairs}"),
        });
    }
    if !(q_l1 > 0.0 && q_l1.is_finite()) {
        return Err(Error::InvalidParam {
            key: "q_l1",
            message: format!("majorant norm must be positive and finite, got {q_l1}"),
        });
    }
    let h = f.grid().spacing();
    let s_min = 2.0 * h;
    let s_max = 0.5f64;
    if s_min >= s_max {
        return Err(Error::InvalidParam {
            key: "n_pairs",
            message: format!("grid spacing {h} too coarse for separations in [2h, 0.5]"),
        });
    }
    let r0 = 1.0 - compact_radius;
    let mut rng = SplitMix64::new(0x5EED_CAFE_F00D_0001);
    let mut ratios: Vec<f64> = Vec::with_capacity(n_pairs);
    let split = (20.0 * h).min(s_max / 2.0);
    let mut decade_max = 0.0f64;
    let mut large_scale_max = 0.0f64;
    let mut fitted_c = 0.0f64;
    let mut worst_pair = (Complex64::ZERO, Complex64::ZERO, 0.0f64);
    let mut sampled = 0usize;
    while sampled < n_pairs {
        let mut placed = false;
        for _attempt in 0..64 {
            let r = compact_radius * rng.next_f64().sqrt();
            let t = rng.in_range(0.0, std::f64::consts::TAU);
            let x = Complex64::from_polar(r, t);
            let sep = (rng.in_range(s_min.ln(), s_max.ln())).exp();
            let phi = rng.in_range(0.0, std::f64::consts::TAU);
            let y = x + Complex64::from_polar(sep, phi);
            if y.norm() > compact_radius {
                continue;
            }
            let (fx, fy) = match (f.interpolate(x), f.interpolate(y)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let lhs = (fx - fy).norm();
            let ratio = lhs * (1.0 + r0 / (2.0 * sep)).ln().sqrt() / q_l1.sqrt();
            ratios.push(ratio);
            if sep <= split {
                decade_max = decade_max.max(ratio);
            } else {
                large_scale_max = large_scale_max.max(ratio);
            }
            if ratio > fitted_c {
                fitted_c = ratio;
                worst_pair = (x, y, ratio);
            }
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::InvalidParam {
                key: "compact_radius",
                message: "could not place sample pairs inside the compact".to_string(),
            });
        }
        sampled += 1;
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = ratios[ratios.len() / 2];
    let pass = decade_max <= 2.0 * large_scale_max;
    Ok(HolderReport {
        compact_radius,
        r0,
        q_l1,
        fitted_c,
        worst_pair,
        decade_max,
        large_scale_max,
        median,
        pass,
    })
}

/// `L^1` distances over `|z| <= 0.9` between the derivative fields of
/// consecutive ladder levels: one `(d_z, d_zbar)` pair of integrals per
/// consecutive solution pair. Needs at least two completed levels.
pub fn derivative_l1_convergence(run: &LadderRun) -> Result<Vec<(f64, f64)>> {
    if run.solutions.len() < 2 {
        return Err(Error::InvalidParam {
            key: "run",
            message: format!("need at least 2 completed levels, got {}", run.solutions.len()),
        });
    }
    const RADIUS: f64 = 0.9;
    let mut out = Vec::with_capacity(run.solutions.len() - 1);
    for pair in run.solutions.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let grid = a.f.grid();
        let h2 = grid.spacing() * grid.spacing();
        let mut dz = 0.0f64;
        let mut dzbar = 0.0f64;
        for (row, col, z) in grid.iter() {
            if z.norm() > RADIUS {
                continue;
            }
            let k = grid.index(row, col);
            dz += (b.fz.samples()[k] - a.fz.samples()[k]).norm();
            dzbar += (b.fzbar.samples()[k] - a.fzbar.samples()[k]).norm();
        }
        out.push((dz * h2, dzbar * h2));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{ex1_dilatation, ex1_f, ex1_fk, ex1_gk, Dilatation, ExampleParams};
    use crate::grid::GridSpec;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(grid: GridSpec, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        ComplexField::sample(grid, f).unwrap().field
    }

    /// Wraps a sampled field as a solution-shaped value for the operations
    /// that take solver output, with finite-difference derivative fields.
    fn synth_solution(f: ComplexField) -> MappingSolution {
        use crate::coeff::Frozen;
        use crate::solver::{Normalization, SolveStatus};
        let grid = f.grid();
        let (fz, fzbar) = f.wirtinger_derivatives().unwrap();
        MappingSolution {
            f,
            fz,
            fzbar,
            omega: ComplexField::zeros(grid),
            residual_linf: 0.0,
            fd_residual_linf: 0.0,
            iterations: 0,
            outer_iterations: 0,
            status: SolveStatus::Converged,
            diff_history: Vec::new(),
            outer_diffs: Vec::new(),
            normalization: Normalization {
                shift: Complex64::ZERO,
                f_at_one: Complex64::new(1.0, 0.0),
            },
            frozen: Frozen {
                mu: ComplexField::zeros(grid),
                nu: ComplexField::zeros(grid),
                q_max: 0.0,
            },
        }
    }

    #[test]
    fn identity_report_is_trivial() {
        let grid = GridSpec::new(256, 1.25).unwrap();
        let f = sample(grid, |z| z);
        let rep = dilatation_report_from_field(&f, 2.0).unwrap();
        for (row, col, _) in grid.iter() {
            assert_eq!(rep.k_mu_f.at(row, col), 1.0);
            assert_eq!(rep.k_i_p.at(row, col), 1.0);
            assert!((rep.jacobian.at(row, col) - 1.0).abs() < 1e-12);
        }
        assert_eq!(rep.degenerate_fraction, 0.0);
        // Disk integral of K = 1 is the disk area, up to the ragged-boundary
        // error of nodal counting (Gauss-circle scale, ~2e-3 here).
        let (int, excl) = rep.k_mu_f.integrate_disk_excluding(1.0).unwrap();
        assert!((int - std::f64::consts::PI).abs() < 0.01, "got {int}");
        assert_eq!(excl, 0.0);
    }

    #[test]
    fn pure_shear_has_the_textbook_dilatation() {
        let grid = GridSpec::new(64, 1.25).unwrap();
        let f = sample(grid, |z| z + 0.5 * z.conj());
        let rep = dilatation_report_from_field(&f, 2.0).unwrap();
        let (r, c) = grid.center();
        assert!((rep.k_mu_f.at(r, c) - 3.0).abs() < 1e-12);
        assert!((rep.jacobian.at(r, c) - 0.75).abs() < 1e-12);
        assert!((rep.k_i_p.at(r, c) - 3.0).abs() < 1e-12);
        // K_{I,1} = J/(a-b) = 0.75/0.5.
        let rep1 = dilatation_report_from_field(&f, 1.0).unwrap();
        assert!((rep1.k_i_p.at(r, c) - 1.5).abs() < 1e-12);
        assert_eq!(rep.degenerate_fraction, 0.0);
    }

    #[test]
    fn p_outside_the_admissible_interval_is_rejected() {
        let grid = GridSpec::new(16, 1.25).unwrap();
        let f = sample(grid, |z| z);
        assert!(dilatation_report_from_field(&f, 0.5).is_err());
        assert!(dilatation_report_from_field(&f, 2.5).is_err());
    }

    #[test]
    fn truncated_map_dilatation_matches_the_closed_form() {
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(512, 1.25).unwrap();
        let f = sample(grid, |z| ex1_fk(z, &p));
        let rep = dilatation_report_from_field(&f, 2.0).unwrap();
        // Node nearest 0.9 on the positive real axis.
        let (row, col) = {
            let n = grid.n_side();
            let h = grid.spacing();
            let col = ((0.9 + grid.half_width()) / h).round() as usize;
            (n / 2, col)
        };
        let z = grid.node(row, col);
        assert!((z - c64(0.9, 0.0)).norm() < grid.spacing());
        let expect = ex1_dilatation(z, &p, Dilatation::KMuK);
        let got = rep.k_mu_f.at(row, col);
        assert!((got - expect).abs() < 1e-3, "got {got}, expected {expect}");
        // Conformal inside the ramp.
        let (row_in, col_in) = {
            let h = grid.spacing();
            (grid.n_side() / 2, ((0.3 + grid.half_width()) / h).round() as usize)
        };
        assert!((rep.k_mu_f.at(row_in, col_in) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inner_distortion_at_p2_equals_the_dilatation() {
        let grid = GridSpec::new(64, 1.25).unwrap();
        let f = sample(grid, |z| z + 0.3 * z * z + 0.1 * z.conj() * z.conj());
        let rep = dilatation_report_from_field(&f, 2.0).unwrap();
        for (row, col, _) in grid.iter() {
            let j = rep.jacobian.at(row, col);
            if j > 1e-9 {
                let km = rep.k_mu_f.at(row, col);
                let ki = rep.k_i_p.at(row, col);
                assert!((km - ki).abs() <= 1e-10 * km.max(1.0), "{km} vs {ki}");
            }
        }
    }

    #[test]
    fn dilatation_is_invariant_under_translation_and_positive_scaling() {
        let grid = GridSpec::new(64, 1.25).unwrap();
        let base = sample(grid, |z| z + 0.3 * z.conj() + 0.05 * z * z);
        let rep0 = dilatation_report_from_field(&base, 2.0).unwrap();
        for &(lambda, shift) in &[(2.5, c64(1.0, -2.0)), (0.25, c64(0.0, 0.7))] {
            let moved =
                sample(grid, |z| (z + 0.3 * z.conj() + 0.05 * z * z) * lambda + shift);
            let rep1 = dilatation_report_from_field(&moved, 2.0).unwrap();
            for (row, col, _) in grid.iter() {
                let a = rep0.k_mu_f.at(row, col);
                let b = rep1.k_mu_f.at(row, col);
                if a.is_finite() || b.is_finite() {
                    assert!((a - b).abs() < 1e-9 * a.max(1.0), "{a} vs {b}");
                }
            }
            assert_eq!(rep0.degenerate_fraction, rep1.degenerate_fraction);
        }
    }

    #[test]
    fn degenerate_limit_map_collapses_a_quarter_of_the_disk() {
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(256, 1.25).unwrap();
        let f = sample(grid, |z| ex1_f(z, &p));
        let rep = dilatation_report_from_field(&f, 2.0).unwrap();
        // The limit map is constant on |z| < 1/2: J = 0 there, and that
        // disk is a quarter of the unit disk's area.
        assert!(
            (rep.degenerate_fraction - 0.25).abs() < 0.02,
            "degenerate fraction {}",
            rep.degenerate_fraction
        );
        let (r, c) = grid.center();
        assert_eq!(rep.k_mu_f.at(r, c), 1.0, "vanishing derivatives carry K = 1");
        assert_eq!(rep.jacobian.at(r, c), 0.0);
    }

    #[test]
    fn inverting_the_identity_is_exact() {
        // 128 per side keeps 1 + h below the target radius, so every disk
        // node carries a fully mapped difference stencil and the dilatation
        // integral sees the whole disk (nodal area error ~ 5e-3 here).
        let grid = GridSpec::new(128, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| z));
        let inv = invert_mapping(&sol, grid).unwrap();
        assert!((inv.coverage - 1.0).abs() < 1e-12);
        for (row, col, w) in grid.iter() {
            if w.norm() < 1.0 {
                let k = grid.index(row, col);
                assert!(inv.mapped[k]);
                assert!((inv.g.samples()[k] - w).norm() < 1e-9);
            }
        }
        assert!(inv.max_roundtrip < 1e-9);
        let (int, excl) = inverse_dilatation_integral(&inv, 2.0).unwrap();
        assert!((int - std::f64::consts::PI).abs() < 0.01, "got {int}");
        assert_eq!(excl, 0.0);
    }

    #[test]
    fn inverting_the_truncated_map_recovers_the_closed_form_inverse() {
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(256, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| ex1_fk(z, &p)));
        let inv = invert_mapping(&sol, grid).unwrap();
        assert!(inv.coverage > 0.999, "coverage {}", inv.coverage);
        let h = grid.spacing();
        let rho_star = p.rho_star();
        let mut worst_smooth = 0.0f64;
        let mut worst_kink = 0.0f64;
        for (row, col, w) in grid.iter() {
            if w.norm() > 0.9 {
                continue;
            }
            let k = grid.index(row, col);
            assert!(inv.mapped[k], "unmapped node at {w}");
            let err = (inv.g.samples()[k] - ex1_gk(w, &p)).norm();
            // The forward map has a radial derivative jump on |z| = rho_k;
            // cells straddling it interpolate at first order only, so the
            // kink's image band is scored separately.
            if (w.norm() - rho_star).abs() <= 2.0 * h {
                worst_kink = worst_kink.max(err);
            } else {
                worst_smooth = worst_smooth.max(err);
            }
        }
        assert!(worst_smooth < 1.5e-3, "smooth-region error {worst_smooth}");
        assert!(worst_kink < 8e-3, "kink-band error {worst_kink}");
        assert!(
            inv.max_roundtrip <= 5.0 * h,
            "roundtrip {} vs 5h = {}",
            inv.max_roundtrip,
            5.0 * h
        );
    }

    #[test]
    fn folding_maps_are_rejected() {
        // z^2 covers the disk twice; the two preimages of a generic target
        // are far apart, which must surface as a non-injectivity error.
        let grid = GridSpec::new(64, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| z * z));
        match invert_mapping(&sol, grid) {
            Err(Error::NotInjective(_)) => {}
            other => panic!("expected a fold rejection, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_solutions_are_screened_out() {
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(128, 1.25).unwrap();
        // The untruncated limit collapses a quarter of the disk: far over
        // the 0.5% degeneracy budget.
        let sol = synth_solution(sample(grid, |z| ex1_f(z, &p)));
        match invert_mapping(&sol, grid) {
            Err(Error::DegenerateSolution(frac)) => assert!(frac > 0.2),
            other => panic!("expected degeneracy screening, got {other:?}"),
        }
    }

    #[test]
    fn inverse_dilatation_respects_the_majorant() {
        // K_{mu_{g_k}}(y) <= Q(y) nodewise — equality on the stretched
        // annulus, so the finite-difference check needs a small grace and
        // the kink band is excluded.
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(256, 1.25).unwrap();
        let g = sample(grid, |y| ex1_gk(y, &p));
        let rep = dilatation_report_from_field(&g, 2.0).unwrap();
        let h = grid.spacing();
        let rho_star = p.rho_star();
        for (row, col, y) in grid.iter() {
            let r = y.norm();
            if r >= 1.0 || (r - rho_star).abs() <= 2.0 * h || r < 2.0 * h {
                continue;
            }
            let k_val = rep.k_mu_f.at(row, col);
            let q = ex1_dilatation(y, &p, Dilatation::QBound);
            assert!(
                k_val <= q + 1e-3 * q.max(1.0),
                "K = {k_val} exceeds Q = {q} at {y}"
            );
        }
        // Near the rim the inverse dilatation approaches 2.
        let (row, col) = (grid.n_side() / 2, ((0.995 + 1.25) / h).round() as usize);
        let y = grid.node(row, col);
        assert!((rep.k_mu_f.at(row, col) - (y.norm() + 1.0) / y.norm()).abs() < 0.02);
    }

    #[test]
    fn holder_check_on_identity_and_scaling_algebra() {
        let grid = GridSpec::new(128, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| z));
        let rep = log_holder_check(&sol, std::f64::consts::PI, 0.9, 2000).unwrap();
        assert!(rep.fitted_c.is_finite() && rep.fitted_c > 0.0);
        assert!(rep.pass, "identity must show no small-scale blow-up");
        assert!((rep.worst_pair.2 - rep.fitted_c).abs() < 1e-15);
        // Doubling the majorant norm scales every ratio by 1/sqrt(2).
        let rep2 = log_holder_check(&sol, 2.0 * std::f64::consts::PI, 0.9, 2000).unwrap();
        assert!((rep2.fitted_c * 2f64.sqrt() - rep.fitted_c).abs() < 1e-12);
        assert_eq!(rep.pass, rep2.pass);
    }

    #[test]
    fn holder_check_on_the_degenerate_limit_map() {
        // The limit map is globally log-Holder continuous (it is even
        // Lipschitz away from the degeneracy circle), so the normalized
        // ratios must plateau rather than grow at small separations.
        let p = ExampleParams::new(1.0, 1.0, 4.0).unwrap();
        let grid = GridSpec::new(256, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| ex1_f(z, &p)));
        let rep = log_holder_check(&sol, 3.0 * std::f64::consts::PI, 0.9, 4000).unwrap();
        assert!(
            rep.pass,
            "decade max {} vs large-scale max {}",
            rep.decade_max, rep.large_scale_max
        );
        assert!(rep.fitted_c < 10.0, "fitted constant {}", rep.fitted_c);
    }

    #[test]
    fn holder_check_validates_inputs() {
        let grid = GridSpec::new(64, 1.25).unwrap();
        let sol = synth_solution(sample(grid, |z| z));
        assert!(log_holder_check(&sol, 1.0, 1.5, 2000).is_err());
        assert!(log_holder_check(&sol, 1.0, 0.9, 10).is_err());
        assert!(log_holder_check(&sol, -1.0, 0.9, 2000).is_err());
    }

    #[test]
    fn derivative_distances_shrink_along_the_closed_form_ladder() {
        use crate::solver::LadderRun;
        let grid = GridSpec::new(256, 1.25).unwrap();
        let levels = [4.0, 8.0, 16.0, 32.0];
        let mut solutions = Vec::new();
        for &k in &levels {
            let p = ExampleParams::new(1.0, 1.0, k).unwrap();
            solutions.push(synth_solution(sample(grid, move |z| ex1_fk(z, &p))));
        }
        let mut sup_diffs = Vec::new();
        for pair in solutions.windows(2) {
            sup_diffs.push(pair[1].f.sup_diff_on_disk(&pair[0].f, 0.9).unwrap());
        }
        let run = LadderRun {
            levels: levels.to_vec(),
            solutions,
            sup_diffs,
            converged: true,
            aborted_level: None,
        };
        let dists = derivative_l1_convergence(&run).unwrap();
        assert_eq!(dists.len(), 3);
        for pair in dists.windows(2) {
            assert!(
                pair[1].0 < pair[0].0 && pair[1].1 < pair[0].1,
                "distances must shrink: {dists:?}"
            );
        }
        // Closed-form values for the final pair (k = 16 -> 32): the
        // d_z distance is ~0.185 and the d_zbar distance ~0.098 — the
        // truncation tail shrinks like 1/k, not faster.
        let (dz, dzbar) = dists[2];
        assert!((0.13..=0.25).contains(&dz), "d_z distance {dz}");
        assert!((0.06..=0.14).contains(&dzbar), "d_zbar distance {dzbar}");
    }

    #[test]
    fn derivative_distances_vanish_when_the_ladder_is_constant() {
        use crate::solver::LadderRun;
        let grid = GridSpec::new(64, 1.25).unwrap();
        let f1 = sample(grid, |z| z + 0.2 * z.conj());
        let f2 = f1.clone();
        let run = LadderRun {
            levels: vec![4.0, 8.0],
            solutions: vec![synth_solution(f1), synth_solution(f2)],
            sup_diffs: vec![0.0],
            converged: true,
            aborted_level: None,
        };
        let dists = derivative_l1_convergence(&run).unwrap();
        assert!(dists[0].0 < 1e-12 && dists[0].1 < 1e-12);
    }

    #[test]
    fn single_level_runs_are_rejected() {
        use crate::solver::LadderRun;
        let grid = GridSpec::new(64, 1.25).unwrap();
        let run = LadderRun {
            levels: vec![4.0],
            solutions: vec![synth_solution(sample(grid, |z| z))],
            sup_diffs: vec![],
            converged: true,
            aborted_level: None,
        };
        assert!(derivative_l1_convergence(&run).is_err());
    }
}
