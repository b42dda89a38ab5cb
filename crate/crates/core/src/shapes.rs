//! Analytic test shapes sampled on structured grids.

use crate::chart::{Atlas, ChartGrid};
use crate::error::{Result, WkitError};
use crate::grid::{Axis, Grid};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Half-width of the stereographic parameter square.
pub const STEREO_EXTENT: f64 = 1.3;
/// Inner radius of the partition-of-unity overlap annulus.
pub const STEREO_INNER: f64 = 0.7;

/// Parameters of a generated shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Round sphere in ℝ³ as a two-chart stereographic atlas.
    Sphere2 { radius: f64, center: [f64; 3] },
    /// Two copies of the unit sphere atlas: a degree-two covering.
    DoubleSphere2,
    /// Ellipsoid x²/a² + y²/b² + z²/c² = 1.
    Ellipsoid2 { axes: [f64; 3] },
    /// Torus of revolution with core radius `big_r` and tube radius `small_r`.
    TorusRevolution { big_r: f64, small_r: f64 },
    /// Graph z = u(x, y) over [0,1]²; periodic graphs live on the flat torus.
    /// Each mode (k1, k2) contributes s_{k1}(x) s_{k2}(y) with s_k(t) = sin(2πkt)
    /// for k > 0 and 1 for k = 0.
    Graph2 {
        amplitude: f64,
        modes: Vec<(u32, u32)>,
        periodic: bool,
    },
    /// Lipschitz graph z = amplitude·|sin(2πx)| over the flat torus.
    KinkedGraph2 { amplitude: f64 },
    /// Minimal catenoid patch (cosh s cos θ, cosh s sin θ, s), shifted off the axis.
    CatenoidPatch,
    /// The catenoid patch composed with the inversion x ↦ x/|x|²: a Willmore patch.
    InvertedCatenoidPatch,
    /// Round 4-sphere in ℝ⁵ as a two-chart stereographic atlas.
    Sphere4 { radius: f64 },
    /// Unit 4-sphere with the first ambient axis stretched by `a`.
    Ellipsoid4 { a: f64 },
    /// Open patch of S²(r)×ℝ² ⊂ ℝ⁵.
    ProductPatchS2xR2 { r: f64 },
    /// Graph x₅ = amplitude·sin(2πx₁)·s_{k}(x₂) over the flat 4-torus.
    Graph4 { amplitude: f64, k2: u32 },
    /// Patch of the round n-sphere in geodesic normal coordinates over
    /// [-half_width, half_width]ⁿ. The map is entire, so finite differences
    /// stay accurate through the deeply nested residual operators.
    SpherePatch {
        n: usize,
        radius: f64,
        half_width: f64,
    },
}

impl ShapeSpec {
    pub fn unit_sphere2() -> Self {
        ShapeSpec::Sphere2 {
            radius: 1.0,
            center: [0.0; 3],
        }
    }

    pub fn willmore_torus() -> Self {
        ShapeSpec::TorusRevolution {
            big_r: std::f64::consts::SQRT_2,
            small_r: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Sphere2 { .. } => "sphere2",
            ShapeSpec::DoubleSphere2 => "double_sphere2",
            ShapeSpec::Ellipsoid2 { .. } => "ellipsoid2",
            ShapeSpec::TorusRevolution { .. } => "torus_revolution",
            ShapeSpec::Graph2 { .. } => "graph2",
            ShapeSpec::KinkedGraph2 { .. } => "kinked_graph2",
            ShapeSpec::CatenoidPatch => "catenoid_patch",
            ShapeSpec::InvertedCatenoidPatch => "inverted_catenoid_patch",
            ShapeSpec::Sphere4 { .. } => "sphere4",
            ShapeSpec::Ellipsoid4 { .. } => "ellipsoid4",
            ShapeSpec::ProductPatchS2xR2 { .. } => "product_patch_s2xr2",
            ShapeSpec::Graph4 { .. } => "graph4",
            ShapeSpec::SpherePatch { .. } => "sphere_patch",
        }
    }

    /// Parameter dimension.
    pub fn n(&self) -> usize {
        match self {
            ShapeSpec::Sphere4 { .. }
            | ShapeSpec::Ellipsoid4 { .. }
            | ShapeSpec::ProductPatchS2xR2 { .. }
            | ShapeSpec::Graph4 { .. } => 4,
            ShapeSpec::SpherePatch { n, .. } => *n,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(WkitError::InvalidShape(msg.to_string()));
        match self {
            ShapeSpec::Sphere2 { radius, .. } | ShapeSpec::Sphere4 { radius }
                if !(*radius > 0.0) =>
            {
                bad("radius must be positive")
            }
            ShapeSpec::Ellipsoid2 { axes } if axes.iter().any(|a| !(*a > 0.0)) => {
                bad("semi-axes must be positive")
            }
            ShapeSpec::TorusRevolution { big_r, small_r }
                if !(*small_r > 0.0 && *big_r > *small_r) =>
            {
                bad("torus needs 0 < r < R")
            }
            ShapeSpec::Graph2 {
                amplitude, modes, ..
            } if !amplitude.is_finite() || modes.is_empty() => {
                bad("graph needs a finite amplitude and at least one mode")
            }
            ShapeSpec::Ellipsoid4 { a } if !(*a > 0.0) => bad("stretch must be positive"),
            ShapeSpec::ProductPatchS2xR2 { r } if !(*r > 0.0) => bad("radius must be positive"),
            ShapeSpec::SpherePatch { n, .. } if *n != 2 && *n != 4 => {
                bad("sphere patch needs n = 2 or 4")
            }
            ShapeSpec::SpherePatch {
                n,
                radius,
                half_width,
            } if !(*radius > 0.0 && *half_width > 0.0 && half_width * (*n as f64).sqrt() < PI) => {
                bad("sphere patch needs positive radius and a corner within the injectivity radius")
            }
            _ => Ok(()),
        }
    }

    /// Whether the generated atlas covers a closed manifold.
    pub fn closed(&self) -> bool {
        !matches!(
            self,
            ShapeSpec::CatenoidPatch
                | ShapeSpec::InvertedCatenoidPatch
                | ShapeSpec::ProductPatchS2xR2 { .. }
                | ShapeSpec::SpherePatch { .. }
                | ShapeSpec::Graph2 {
                    periodic: false,
                    ..
                }
        )
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

fn bump(r: f64) -> f64 {
    smooth_step((STEREO_EXTENT - r) / (STEREO_EXTENT - STEREO_INNER))
}

/// Partition weight of a stereographic chart at parameter radius r. The other
/// chart sees the same point at radius 1/r, so the two weights sum to 1.
pub fn stereo_weight(r: f64) -> f64 {
    let a = bump(r);
    let b = if r > 0.0 { bump(1.0 / r) } else { 0.0 };
    a / (a + b)
}

/// Two-chart stereographic atlas of the unit n-sphere in ℝ^{n+1}, both charts
/// carrying the outward Gauss map.
pub fn stereographic_atlas(n: usize, res: usize) -> Result<Atlas> {
    let grid = Grid::cube(n, res, -STEREO_EXTENT, STEREO_EXTENT);
    let mut charts = Vec::with_capacity(2);
    for south in [false, true] {
        let chart = ChartGrid::from_fn(grid.clone(), n + 1, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let mut p: Vec<f64> = x.iter().map(|v| 2.0 * v / (1.0 + r2)).collect();
            if south {
                p[1] = -p[1];
                p.push((r2 - 1.0) / (1.0 + r2));
            } else {
                p.push((1.0 - r2) / (1.0 + r2));
            }
            p
        })?;
        let w = (0..grid.len())
            .map(|node| {
                let x = grid.coords(node);
                stereo_weight(x[..n].iter().map(|v| v * v).sum::<f64>().sqrt())
            })
            .collect();
        charts.push(chart.with_weight(w));
    }
    Ok(Atlas {
        m: n + 1,
        n,
        charts,
        closed: true,
    })
}

fn graph_profile(modes: &[(u32, u32)], x: f64, y: f64) -> f64 {
    let s = |k: u32, t: f64| {
        if k == 0 {
            1.0
        } else {
            (TAU * k as f64 * t).sin()
        }
    };
    modes.iter().map(|&(k1, k2)| s(k1, x) * s(k2, y)).sum()
}

fn periodic_graph_chart(n: usize, res: usize, height: impl Fn(&[f64]) -> f64) -> Result<ChartGrid> {
    let grid = Grid::new((0..n).map(|_| Axis::new(res, 0.0, 1.0, true)).collect());
    let mut chart = ChartGrid::from_fn(grid, n + 1, |x| {
        let mut p = x.to_vec();
        p.push(height(x));
        p
    })?;
    for k in 0..n {
        let mut shift = vec![0.0; n + 1];
        shift[k] = 1.0;
        chart = chart.with_period_shift(k, shift);
    }
    Ok(chart)
}

fn catenoid_chart(res: usize) -> Result<ChartGrid> {
    let grid = Grid::new(vec![
        Axis::new(res, -0.6, 0.6, false),
        Axis::new(res, 0.0, 1.2, false),
    ]);
    ChartGrid::from_fn(grid, 3, |x| {
        let (s, t) = (x[0], x[1]);
        vec![s.cosh() * t.cos() + 0.3, s.cosh() * t.sin() - 0.2, s + 0.1]
    })
}

/// Samples a shape with `res` nodes per axis (per chart for atlases).
pub fn generate(spec: &ShapeSpec, res: usize) -> Result<Atlas> {
    spec.validate()?;
    let closed = spec.closed();
    match spec {
        ShapeSpec::Sphere2 { radius, center } => {
            let (r, c) = (*radius, *center);
            Ok(stereographic_atlas(2, res)?
                .map_points(move |p| (0..3).map(|a| c[a] + r * p[a]).collect()))
        }
        ShapeSpec::DoubleSphere2 => {
            let mut atlas = stereographic_atlas(2, res)?;
            let copy = atlas.charts.clone();
            atlas.charts.extend(copy);
            Ok(atlas)
        }
        ShapeSpec::Ellipsoid2 { axes } => {
            let ax = *axes;
            Ok(stereographic_atlas(2, res)?
                .map_points(move |p| (0..3).map(|a| ax[a] * p[a]).collect()))
        }
        ShapeSpec::TorusRevolution { big_r, small_r } => {
            let (rr, r) = (*big_r, *small_r);
            let grid = Grid::new(vec![
                Axis::new(res, 0.0, TAU, true),
                Axis::new(res, 0.0, TAU, true),
            ]);
            let chart = ChartGrid::from_fn(grid, 3, |x| {
                let (u, v) = (x[0], x[1]);
                let ring = rr + r * v.cos();
                vec![ring * u.cos(), ring * u.sin(), r * v.sin()]
            })?;
            Ok(Atlas::single(chart, closed))
        }
        ShapeSpec::Graph2 {
            amplitude,
            modes,
            periodic,
        } => {
            let chart = if *periodic {
                periodic_graph_chart(2, res, |x| amplitude * graph_profile(modes, x[0], x[1]))?
            } else {
                ChartGrid::from_fn(Grid::cube(2, res, 0.0, 1.0), 3, |x| {
                    vec![x[0], x[1], amplitude * graph_profile(modes, x[0], x[1])]
                })?
            };
            Ok(Atlas::single(chart, closed))
        }
        ShapeSpec::KinkedGraph2 { amplitude } => {
            let chart = periodic_graph_chart(2, res, |x| amplitude * (TAU * x[0]).sin().abs())?;
            Ok(Atlas::single(chart, closed))
        }
        ShapeSpec::CatenoidPatch => Ok(Atlas::single(catenoid_chart(res)?, false)),
        ShapeSpec::InvertedCatenoidPatch => {
            Ok(Atlas::single(invert(&catenoid_chart(res)?, 0.1)?, false))
        }
        ShapeSpec::Sphere4 { radius } => {
            let r = *radius;
            Ok(stereographic_atlas(4, res)?.map_points(move |p| p.iter().map(|v| r * v).collect()))
        }
        ShapeSpec::Ellipsoid4 { a } => {
            let a = *a;
            Ok(stereographic_atlas(4, res)?.map_points(move |p| {
                let mut q = p.to_vec();
                q[0] *= a;
                q
            }))
        }
        ShapeSpec::ProductPatchS2xR2 { r } => {
            let r = *r;
            let flat = (res / 8).max(8);
            let grid = Grid::new(vec![
                Axis::new(res, 0.6, PI - 0.6, false),
                Axis::new(res, 0.0, 1.5, false),
                Axis::new(flat, 0.0, 1.0, false),
                Axis::new(flat, 0.0, 1.0, false),
            ]);
            let chart = ChartGrid::from_fn(grid, 5, |x| {
                let (p, t) = (x[0], x[1]);
                vec![
                    r * p.sin() * t.cos(),
                    r * p.sin() * t.sin(),
                    r * p.cos(),
                    x[2],
                    x[3],
                ]
            })?;
            Ok(Atlas::single(chart, false))
        }
        ShapeSpec::Graph4 { amplitude, k2 } => {
            let (amp, k2) = (*amplitude, *k2);
            let chart =
                periodic_graph_chart(4, res, |x| amp * graph_profile(&[(1, k2)], x[0], x[1]))?;
            Ok(Atlas::single(chart, true))
        }
        ShapeSpec::SpherePatch {
            n,
            radius,
            half_width,
        } => {
            let (n, r) = (*n, *radius);
            let chart =
                ChartGrid::from_fn(Grid::cube(n, res, -half_width, *half_width), n + 1, |x| {
                    let rho = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
                    let mut p: Vec<f64> = x[..n].iter().map(|v| r * sinc(rho) * v).collect();
                    p.push(r * rho.cos());
                    p
                })?;
            Ok(Atlas::single(chart, false))
        }
    }
}

/// sin(t)/t, with its Taylor series near zero.
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// Inversion Φ ↦ Φ/|Φ|², refusing charts that come within `delta` of the origin.
pub fn invert(chart: &ChartGrid, delta: f64) -> Result<ChartGrid> {
    if chart.has_period_shift() {
        return Err(WkitError::InvalidShape(
            "inversion of a lattice-periodic chart".into(),
        ));
    }
    let closest = (0..chart.len())
        .map(|i| {
            let p = chart.point(i);
            p[..chart.m].iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    if closest < delta {
        return Err(WkitError::OriginTooClose(closest));
    }
    Ok(chart.map_points(|p| {
        let r2: f64 = p.iter().map(|v| v * v).sum();
        p.iter().map(|v| v / r2).collect()
    }))
}

/// Inverts every chart of an atlas.
pub fn invert_atlas(atlas: &Atlas, delta: f64) -> Result<Atlas> {
    let charts = atlas
        .charts
        .iter()
        .map(|c| invert(c, delta))
        .collect::<Result<Vec<_>>>()?;
    Ok(Atlas {
        charts,
        ..atlas.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_weights_sum_to_one() {
        for &r in &[0.0, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.3, 1.7] {
            let inv = if r > 0.0 { 1.0 / r } else { f64::INFINITY };
            let w_other = if inv.is_finite() {
                stereo_weight(inv)
            } else {
                0.0
            };
            assert!((stereo_weight(r) + w_other - 1.0).abs() < 1e-15, "{r}");
        }
        assert_eq!(stereo_weight(0.3), 1.0);
        assert_eq!(stereo_weight(1.5), 0.0);
    }

    #[test]
    fn sphere_charts_lie_on_sphere() {
        let atlas = generate(&ShapeSpec::unit_sphere2(), 9).unwrap();
        assert_eq!(atlas.charts.len(), 2);
        for c in &atlas.charts {
            for i in 0..c.len() {
                let p = c.point(i);
                assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = ShapeSpec::TorusRevolution {
            big_r: 1.0,
            small_r: 2.0,
        };
        assert!(generate(&bad, 16).is_err());
        assert!(generate(
            &ShapeSpec::Sphere2 {
                radius: -1.0,
                center: [0.0; 3]
            },
            16
        )
        .is_err());
    }

    #[test]
    fn inversion_is_an_involution_and_guards_origin() {
        let c = catenoid_chart(10).unwrap();
        let back = invert(&invert(&c, 0.1).unwrap(), 0.1).unwrap();
        for a in 0..3 {
            for (x, y) in back.comps[a].iter().zip(&c.comps[a]) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let grid = Grid::cube(2, 9, -1.0, 1.0);
        let through_origin = ChartGrid::from_fn(grid, 3, |x| vec![x[0], x[1], 0.0]).unwrap();
        assert!(matches!(
            invert(&through_origin, 0.01),
            Err(WkitError::OriginTooClose(_))
        ));
    }
}
