//! Measure-theoretic diagnostics: mollification, densities, mean oscillation
//! and Morrey norms over sampled balls.

use crate::chart::{Atlas, ChartGrid};
use crate::error::{Result, WkitError};
use crate::geometry::{check_weak_immersion, geometry, DiagnosticsConfig};
use crate::grid::{Diff, Grid, Quadrature};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Ball centers are taken on every `CENTER_STRIDE`-th node along each axis.
pub const CENTER_STRIDE: usize = 4;
/// Number of logarithmically spaced radii per ball family.
pub const RADII: usize = 12;

/// Linear ramp from 1 (inside) to 0 (outside) over one width around `radius`.
fn soft_indicator(dist: f64, radius: f64, width: f64) -> f64 {
    ((radius - dist) / width + 0.5).clamp(0.0, 1.0)
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => PI.powf(n as f64 / 2.0) / gamma_half_integer(n + 2),
    }
}

fn gamma_half_integer(k: usize) -> f64 {
    // Γ(k/2)
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    /// Vol(Φ(Σ) ∩ B_r(y)) / (rⁿ|Bⁿ|) per radius.
    pub ratios: Vec<f64>,
    /// Linear extrapolation of the ratios to r = 0.
    pub limit: f64,
    pub rounded: i64,
    pub distance_to_integer: f64,
}

/// Density of the image measure at an ambient point.
pub fn density_at(
    atlas: &Atlas,
    y: &[f64],
    radii: &[f64],
    cfg: &DiagnosticsConfig,
) -> Result<DensityReport> {
    if !atlas.closed {
        return Err(WkitError::OpenPatch);
    }
    if y.len() != atlas.m {
        return Err(WkitError::DimensionMismatch {
            expected: atlas.m,
            got: y.len(),
        });
    }
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) || radii[radii.len() - 1] <= 0.0
    {
        return Err(WkitError::RadiiNotDecreasing);
    }
    let n = atlas.n;
    let mut vols = vec![0.0; radii.len()];
    for chart in &atlas.charts {
        let geo = geometry(chart, cfg)?;
        let w = chart.integration_weights(cfg.quadrature);
        let h = chart.grid.spacing();
        let part: Vec<f64> = (0..chart.len())
            .into_par_iter()
            .map(|i| {
                let p = chart.point(i);
                let d = (0..atlas.m)
                    .map(|a| (p[a] - y[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let pg = &geo.points[i];
                // ambient size of one parameter cell
                let width = (0..n)
                    .map(|k| pg.metric.g[k][k].sqrt() * h[k])
                    .fold(0.0, f64::max);
                let mass = w[i] * pg.metric.sqrt_det;
                radii
                    .iter()
                    .map(|&r| mass * soft_indicator(d, r, width))
                    .collect::<Vec<f64>>()
            })
            .reduce(
                || vec![0.0; radii.len()],
                |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            );
        for (v, p) in vols.iter_mut().zip(part) {
            *v += p;
        }
    }
    let ratios: Vec<f64> = vols
        .iter()
        .zip(radii)
        .map(|(v, r)| v / (r.powi(n as i32) * unit_ball_volume(n)))
        .collect();
    let limit = linear_intercept(radii, &ratios);
    let rounded = limit.round();
    Ok(DensityReport {
        radii: radii.to_vec(),
        ratios,
        limit,
        rounded: rounded as i64,
        distance_to_integer: (limit - rounded).abs(),
    })
}

/// Least-squares line through (x, y) evaluated at x = 0.
fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        return y[0];
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    my - slope * mx
}

/// Calls `visit(node, weight)` for every node of the parameter ball B_ρ(center)
/// with smoothed-indicator × cell-volume weights.
fn for_ball(grid: &Grid, center: usize, rho: f64, mut visit: impl FnMut(usize, f64)) {
    let n = grid.dim();
    let h = grid.spacing();
    let width = h.iter().cloned().fold(0.0, f64::max);
    let cell: f64 = h.iter().product();
    let c = grid.unravel(center);
    let reach: Vec<isize> = h.iter().map(|hk| (rho / hk).ceil() as isize + 1).collect();
    let mut offset = vec![0isize; n];
    for (k, o) in offset.iter_mut().enumerate() {
        *o = -reach[k];
    }
    loop {
        let mut idx = [0usize; 4];
        let mut dist2 = 0.0;
        let mut inside = true;
        for k in 0..n {
            let ax = &grid.axes[k];
            let raw = c[k] as isize + offset[k];
            let i = if ax.periodic {
                raw.rem_euclid(ax.len as isize) as usize
            } else if raw < 0 || raw >= ax.len as isize {
                inside = false;
                0
            } else {
                raw as usize
            };
            idx[k] = i;
            dist2 += (offset[k] as f64 * h[k]).powi(2);
        }
        if inside {
            let w = soft_indicator(dist2.sqrt(), rho, width);
            if w > 0.0 {
                visit(grid.ravel(&idx[..n]), w * cell);
            }
        }
        // odometer increment
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            offset[k] += 1;
            if offset[k] <= reach[k] {
                break;
            }
            offset[k] = -reach[k];
        }
    }
}

/// Sampled centers whose radius-ρ ball stays inside the chart.
fn centers(grid: &Grid, rho: f64) -> Vec<usize> {
    let n = grid.dim();
    let h = grid.spacing();
    (0..grid.len())
        .filter(|&node| {
            let idx = grid.unravel(node);
            (0..n).all(|k| {
                let ax = &grid.axes[k];
                if idx[k] % CENTER_STRIDE != 0 {
                    return false;
                }
                ax.periodic || {
                    let x = ax.coord(idx[k]);
                    x - rho - h[k] >= ax.lo - 1e-12 && x + rho + h[k] <= ax.hi + 1e-12
                }
            })
        })
        .collect()
}

/// `RADII` logarithmically spaced radii ending at `r`, starting two cells above
/// the grid scale.
fn radius_ladder(grid: &Grid, r: f64) -> Vec<f64> {
    let hmax = grid.spacing().iter().cloned().fold(0.0, f64::max);
    let lo = (2.0 * hmax).min(r);
    (0..RADII)
        .map(|i| lo * (r / lo).powf(i as f64 / (RADII - 1) as f64))
        .collect()
}

/// β_r = sup over sampled balls B_ρ, ρ ≤ r, of the mean oscillation
/// ⨍|f − f_B|. Balls live in the parameter domain with the flat measure.
pub fn vmo_modulus(grid: &Grid, field: &[f64], r: f64) -> f64 {
    radius_ladder(grid, r)
        .into_iter()
        .flat_map(|rho| centers(grid, rho).into_iter().map(move |c| (c, rho)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, rho)| {
            let mut mass = 0.0;
            let mut sum = 0.0;
            for_ball(grid, c, rho, |i, w| {
                mass += w;
                sum += w * field[i];
            });
            if mass == 0.0 {
                return 0.0;
            }
            let mean = sum / mass;
            let mut osc = 0.0;
            for_ball(grid, c, rho, |i, w| osc += w * (field[i] - mean).abs());
            osc / mass
        })
        .reduce(|| 0.0, f64::max)
}

/// (sup over sampled balls of r^{−λ}∫_{B_r}|f|^p)^{1/p}, with an optional
/// volume density multiplying the flat parameter measure. Radii range up to
/// `r_max`.
pub fn morrey_norm(
    grid: &Grid,
    field: &[f64],
    p: f64,
    lambda: f64,
    r_max: f64,
    density: Option<&[f64]>,
) -> Result<f64> {
    if !(p >= 1.0) || !(0.0..=grid.dim() as f64).contains(&lambda) {
        return Err(WkitError::InvalidShape(format!(
            "Morrey exponents need p ≥ 1 and 0 ≤ λ ≤ n, got p = {p}, λ = {lambda}"
        )));
    }
    let n = grid.dim();
    let sup = radius_ladder(grid, r_max)
        .into_iter()
        .flat_map(|rho| centers(grid, rho).into_iter().map(move |c| (c, rho)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, rho)| {
            let (mut s, mut mass) = (0.0, 0.0);
            for_ball(grid, c, rho, |i, w| {
                let dens = density.map_or(1.0, |d| d[i]);
                s += w * dens * field[i].abs().powf(p);
                mass += w;
            });
            // discrete mean times the exact ball volume
            s / mass * unit_ball_volume(n) * rho.powi(n as i32) / rho.powf(lambda)
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup.powf(1.0 / p))
}

/// Normalized discrete standard mollifier with support radius ε on spacing h.
fn kernel(eps: f64, h: f64) -> Vec<f64> {
    let k = ((eps / h) - 1e-12).ceil().max(1.0) as usize - 1;
    let raw: Vec<f64> = (0..=2 * k)
        .map(|i| {
            let t = (i as f64 - k as f64) * h / eps;
            if t.abs() < 1.0 {
                (-1.0 / (1.0 - t * t)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Lagrange weights extrapolating from nodes 0..EXTRAP_POINTS to position t.
const EXTRAP_POINTS: usize = 5;

fn extrapolation_weights(t: f64) -> [f64; EXTRAP_POINTS] {
    let mut w = [1.0; EXTRAP_POINTS];
    for (j, wj) in w.iter_mut().enumerate() {
        for m in 0..EXTRAP_POINTS {
            if m != j {
                *wj *= (t - m as f64) / (j as f64 - m as f64);
            }
        }
    }
    w
}

/// Convolution along one axis. Non-periodic ends are extended by ghost nodes
/// from a quartic through the nearest five nodes, so polynomials up to that
/// degree pass through unchanged.
fn convolve_axis(grid: &Grid, f: &[f64], axis: usize, ker: &[f64]) -> Vec<f64> {
    let k = (ker.len() / 2) as isize;
    let ax = &grid.axes[axis];
    let len = ax.len as isize;
    let stride = grid.stride(axis) as isize;
    let ghosts: Vec<[f64; EXTRAP_POINTS]> = (1..=k)
        .map(|g| extrapolation_weights(-(g as f64)))
        .collect();
    (0..f.len())
        .into_par_iter()
        .map(|node| {
            let i = grid.index_along(node, axis) as isize;
            let base = node as isize - i * stride;
            let at = |t: isize| f[(base + t * stride) as usize];
            let value = |t: isize| -> f64 {
                if ax.periodic {
                    at(t.rem_euclid(len))
                } else if t < 0 {
                    let w = &ghosts[(-t - 1) as usize];
                    (0..EXTRAP_POINTS).map(|j| w[j] * at(j as isize)).sum()
                } else if t >= len {
                    let w = &ghosts[(t - len) as usize];
                    (0..EXTRAP_POINTS)
                        .map(|j| w[j] * at(len - 1 - j as isize))
                        .sum()
                } else {
                    at(t)
                }
            };
            ker.iter()
                .enumerate()
                .map(|(j, w)| w * value(i + j as isize - k))
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct MollifyReport {
    pub chart: ChartGrid,
    /// Smallest Λ for which the mollified chart is a weak immersion.
    pub lambda: f64,
}

/// Tensor-product convolution of Φ with the standard mollifier at scale ε.
/// Lattice-linear parts are kept exactly; the periodic part is smoothed.
pub fn mollify(chart: &ChartGrid, eps: f64, cfg: &DiagnosticsConfig) -> Result<MollifyReport> {
    let grid = &chart.grid;
    let mut kernels = Vec::with_capacity(grid.dim());
    for ax in &grid.axes {
        let ker = kernel(eps, ax.h());
        let margin = ax.period() / 2.0;
        if ker.len() > ax.len || eps > margin || (!ax.periodic && ax.len < EXTRAP_POINTS) {
            return Err(WkitError::EpsilonTooLarge { eps, margin });
        }
        kernels.push(ker);
    }
    let parts: Vec<Vec<f64>> = (0..chart.m)
        .map(|a| {
            let mut f = chart.periodic_part(a);
            for (axis, ker) in kernels.iter().enumerate() {
                f = convolve_axis(grid, &f, axis, ker);
            }
            f
        })
        .collect();
    let out = chart.from_periodic_parts(parts);
    let lambda = check_weak_immersion(&out, 1.0, cfg)?.lambda_needed;
    Ok(MollifyReport { chart: out, lambda })
}

/// Discrete W^{2,2} distance: L² over the chart of the differences of Φ and
/// of all first and second partial derivatives.
pub fn w22_distance(a: &ChartGrid, b: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<f64> {
    if a.grid != b.grid || a.m != b.m {
        return Err(WkitError::DimensionMismatch {
            expected: a.len() * a.m,
            got: b.len() * b.m,
        });
    }
    let diff = Diff::new(&a.grid, cfg.stencil_order)?;
    let (da1, da2) = a.jets(&diff);
    let (db1, db2) = b.jets(&diff);
    let w = a.grid.quadrature_weights(Quadrature::Trapezoid);
    let n = a.n();
    let total: f64 = (0..a.len())
        .map(|i| {
            let pa = a.point(i);
            let pb = b.point(i);
            let mut s = 0.0;
            for c in 0..a.m {
                s += (pa[c] - pb[c]).powi(2);
                for k in 0..n {
                    s += (da1[i][k][c] - db1[i][k][c]).powi(2);
                    for l in 0..n {
                        s += (da2[i][k][l][c] - db2[i][k][l][c]).powi(2);
                    }
                }
            }
            w[i] * s
        })
        .sum();
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = kernel(0.1, 0.01);
        assert_eq!(k.len(), 19);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..k.len() {
            assert!((k[i] - k[k.len() - 1 - i]).abs() < 1e-16);
        }
        assert_eq!(kernel(0.01, 0.01), vec![1.0]);
    }

    #[test]
    fn constant_field_has_zero_oscillation() {
        let grid = Grid::cube(2, 33, 0.0, 1.0);
        assert!(vmo_modulus(&grid, &vec![2.5; grid.len()], 0.2) < 1e-14);
        let m = morrey_norm(&grid, &vec![0.0; grid.len()], 2.0, 1.0, 0.2, None).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-12);
        assert!((unit_ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_mollification_keeps_lattice_shift() {
        let grid = Grid::new(vec![
            Axis::new(16, 0.0, 1.0, true),
            Axis::new(16, 0.0, 1.0, true),
        ]);
        let chart = ChartGrid::from_fn(grid, 3, |x| vec![x[0], x[1], 0.0])
            .unwrap()
            .with_period_shift(0, vec![1.0, 0.0, 0.0])
            .with_period_shift(1, vec![0.0, 1.0, 0.0]);
        let out = mollify(&chart, 0.2, &DiagnosticsConfig::default()).unwrap();
        for a in 0..3 {
            for (x, y) in out.chart.comps[a].iter().zip(&chart.comps[a]) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(mollify(&chart, 0.9, &DiagnosticsConfig::default()).is_err());
    }
}
