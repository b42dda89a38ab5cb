//! Scalar functionals of immersions: Willmore, Chern–Lashof, Gauss–Bonnet,
//! the Liouville residual, the 4D Graham–Reichert, coercive and Dirichlet
//! energies, and the constrained quantities V, I, T.

use crate::chart::{Atlas, ChartGrid};
use crate::error::{Result, WkitError};
use crate::geometry::{geometry, DiagnosticsConfig, GeometryFields};
use crate::linalg;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Integrand selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    /// |H⃗|².
    Willmore,
    /// |K|.
    ChernLashof,
    /// K.
    GaussCurvature,
    /// |dH|² − H²|II|² + 7H⁴.
    GrahamReichert,
    /// 4|dH|² + ⅓|II̊|⁴ + 2H²|II|² − 4H tr S³ + 2 tr S⁴.
    Coercive,
    /// |∇II|² + |II|⁴, the quantity the coercive energy controls.
    CoercivityControl,
    /// ½|dH|².
    DirichletH,
    /// 1.
    Area,
    /// H.
    MeanCurvature,
    /// ⅓ Φ·n with the outward Gauss map.
    EnclosedVolume,
}

impl EnergyKind {
    pub fn name(self) -> &'static str {
        match self {
            EnergyKind::Willmore => "willmore",
            EnergyKind::ChernLashof => "chern_lashof",
            EnergyKind::GaussCurvature => "gauss_bonnet",
            EnergyKind::GrahamReichert => "graham_reichert",
            EnergyKind::Coercive => "coercive",
            EnergyKind::CoercivityControl => "coercivity_control",
            EnergyKind::DirichletH => "dirichlet_h",
            EnergyKind::Area => "area",
            EnergyKind::MeanCurvature => "total_mean_curvature",
            EnergyKind::EnclosedVolume => "enclosed_volume",
        }
    }

    fn required_dim(self) -> Option<usize> {
        match self {
            EnergyKind::Willmore | EnergyKind::ChernLashof | EnergyKind::GaussCurvature => Some(2),
            EnergyKind::GrahamReichert
            | EnergyKind::Coercive
            | EnergyKind::CoercivityControl
            | EnergyKind::DirichletH => Some(4),
            _ => None,
        }
    }
}

/// Min, max and mean of an integrand over all nodes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegrandStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl IntegrandStats {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max, mut sum, mut count) =
            (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            count += 1;
        }
        IntegrandStats {
            min,
            max,
            mean: sum / count.max(1) as f64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub name: String,
    pub value: f64,
    pub integrand_stats: IntegrandStats,
    /// Node counts per axis of every chart.
    pub grid_resolution: Vec<Vec<usize>>,
    pub quadrature: String,
}

/// Integrand of one chart.
pub fn integrand_field(chart: &ChartGrid, geo: &GeometryFields, kind: EnergyKind) -> Vec<f64> {
    let n = geo.n;
    let needs_dh = matches!(
        kind,
        EnergyKind::GrahamReichert | EnergyKind::Coercive | EnergyKind::DirichletH
    );
    let dh = if needs_dh {
        geo.gradient(&geo.h_field())
    } else {
        Vec::new()
    };
    let dii = if kind == EnergyKind::CoercivityControl {
        covariant_ii_norm_sq(geo)
    } else {
        Vec::new()
    };
    (0..geo.len())
        .into_par_iter()
        .map(|i| {
            let p = &geo.points[i];
            let dh_sq = || {
                let v: Vec<f64> = (0..n).map(|k| dh[k][i]).collect();
                p.pair(&v, &v)
            };
            match kind {
                EnergyKind::Willmore => p.h * p.h,
                EnergyKind::ChernLashof => p.k.abs(),
                EnergyKind::GaussCurvature => p.k,
                EnergyKind::Area => 1.0,
                EnergyKind::MeanCurvature => p.h,
                EnergyKind::EnclosedVolume => {
                    let x = chart.point(i);
                    linalg::dot(&x[..geo.m], &p.normal[..geo.m]) / 3.0
                }
                EnergyKind::DirichletH => 0.5 * dh_sq(),
                EnergyKind::GrahamReichert => {
                    let ii2 = p.ii_norm_sq();
                    dh_sq() - p.h * p.h * ii2 + 7.0 * p.h.powi(4)
                }
                EnergyKind::Coercive => {
                    let s = p.shape_operator();
                    let s2 = linalg::matmul(&s, &s, n);
                    let s3 = linalg::matmul(&s2, &s, n);
                    let tr2 = linalg::trace(&s2, n);
                    let tr3 = linalg::trace(&s3, n);
                    let tr4 = linalg::trace(&linalg::matmul(&s2, &s2, n), n);
                    let traceless = tr2 - n as f64 * p.h * p.h;
                    4.0 * dh_sq() + traceless * traceless / 3.0 + 2.0 * p.h * p.h * tr2
                        - 4.0 * p.h * tr3
                        + 2.0 * tr4
                }
                EnergyKind::CoercivityControl => {
                    let ii2 = p.ii_norm_sq();
                    dii[i] + ii2 * ii2
                }
            }
        })
        .collect()
}

/// |∇II|²_g with the Levi-Civita connection of g.
fn covariant_ii_norm_sq(geo: &GeometryFields) -> Vec<f64> {
    let n = geo.n;
    // dg[i][j][k] = ∂_k g_ij, dii[i][j][k] = ∂_k II_ij
    let mut dg = vec![vec![Vec::new(); n]; n];
    let mut dii = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let g: Vec<f64> = geo.points.iter().map(|p| p.metric.g[i][j]).collect();
            let ii: Vec<f64> = geo.points.iter().map(|p| p.ii[i][j]).collect();
            dg[i][j] = geo.gradient(&g);
            dii[i][j] = geo.gradient(&ii);
        }
    }
    (0..geo.len())
        .into_par_iter()
        .map(|node| {
            let p = &geo.points[node];
            // Γ^l_{ki} = ½ g^{lm}(∂_k g_{mi} + ∂_i g_{mk} − ∂_m g_{ki})
            let mut gamma = [[[0.0; 4]; 4]; 4];
            for l in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        gamma[l][k][i] = 0.5
                            * (0..n)
                                .map(|m| {
                                    p.metric.ginv[l][m]
                                        * (dg[m][i][k][node] + dg[m][k][i][node]
                                            - dg[k][i][m][node])
                                })
                                .sum::<f64>();
                    }
                }
            }
            let mut cov = [[[0.0; 4]; 4]; 4];
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = dii[i][j][k][node];
                        for l in 0..n {
                            v -= gamma[l][k][i] * p.ii[l][j] + gamma[l][k][j] * p.ii[i][l];
                        }
                        cov[k][i][j] = v;
                    }
                }
            }
            let gi = &p.metric.ginv;
            let mut raised = [[[0.0; 4]; 4]; 4];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut s = 0.0;
                        for k in 0..n {
                            for i in 0..n {
                                for j in 0..n {
                                    s += gi[a][k] * gi[b][i] * gi[c][j] * cov[k][i][j];
                                }
                            }
                        }
                        raised[a][b][c] = s;
                    }
                }
            }
            let mut total = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        total += raised[a][b][c] * cov[a][b][c];
                    }
                }
            }
            total
        })
        .collect()
}

/// ∫ integrand dvol_g over an atlas, with partition-of-unity weights.
pub fn integrate(atlas: &Atlas, kind: EnergyKind, cfg: &DiagnosticsConfig) -> Result<EnergyReport> {
    Ok(integrate_many(atlas, &[kind], cfg)?.remove(0))
}

/// Several integrals sharing one geometry pass per chart.
pub fn integrate_many(
    atlas: &Atlas,
    kinds: &[EnergyKind],
    cfg: &DiagnosticsConfig,
) -> Result<Vec<EnergyReport>> {
    for kind in kinds {
        if let Some(n) = kind.required_dim() {
            if atlas.n != n {
                return Err(WkitError::DimensionMismatch {
                    expected: n,
                    got: atlas.n,
                });
            }
        }
    }
    if !atlas.closed && !cfg.patch_ok {
        return Err(WkitError::OpenPatch);
    }
    let mut values = vec![0.0; kinds.len()];
    let mut all = vec![Vec::new(); kinds.len()];
    for chart in &atlas.charts {
        let geo = geometry(chart, cfg)?;
        let w = chart.integration_weights(cfg.quadrature);
        for (k, &kind) in kinds.iter().enumerate() {
            let f = integrand_field(chart, &geo, kind);
            values[k] += f
                .iter()
                .zip(&w)
                .zip(&geo.points)
                .map(|((f, w), p)| f * w * p.metric.sqrt_det)
                .sum::<f64>();
            all[k].extend(f);
        }
    }
    let grid_resolution: Vec<Vec<usize>> = atlas
        .charts
        .iter()
        .map(|c| c.grid.axes.iter().map(|a| a.len).collect())
        .collect();
    Ok(kinds
        .iter()
        .zip(values)
        .zip(all)
        .map(|((kind, value), f)| EnergyReport {
            name: kind.name().to_string(),
            value,
            integrand_stats: IntegrandStats::of(f.into_iter()),
            grid_resolution: grid_resolution.clone(),
            quadrature: format!("{:?}", cfg.quadrature).to_lowercase(),
        })
        .collect())
}

/// W = ∫|H⃗|² dvol.
pub fn willmore(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<EnergyReport> {
    integrate(atlas, EnergyKind::Willmore, cfg)
}

/// ∫|K| dvol.
pub fn chern_lashof(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<EnergyReport> {
    integrate(atlas, EnergyKind::ChernLashof, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussBonnetReport {
    pub total_curvature: f64,
    /// ∫K/2π rounded: the Euler characteristic (times the covering degree).
    pub euler_characteristic: i64,
    pub genus: f64,
}

/// ∫K dvol together with the inferred topology.
pub fn gauss_bonnet(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<GaussBonnetReport> {
    let total = integrate(atlas, EnergyKind::GaussCurvature, cfg)?.value;
    let chi = (total / (2.0 * PI)).round() as i64;
    Ok(GaussBonnetReport {
        total_curvature: total,
        euler_characteristic: chi,
        genus: 1.0 - chi as f64 / 2.0,
    })
}

/// Largest relative metric anisotropy accepted as conformal; it has to absorb
/// the discretization error of the sampled metric.
pub const CONFORMAL_TOL: f64 = 1e-2;

/// sup over interior nodes of |−Δα − e^{2α}K| with α = ½ log g₁₁ on a
/// conformal chart.
pub fn liouville_residual(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<f64> {
    let geo = geometry(chart, cfg)?;
    if geo.n != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: geo.n,
        });
    }
    let defect = geo
        .points
        .iter()
        .map(|p| {
            let g = &p.metric.g;
            (g[0][1].abs() + (g[0][0] - g[1][1]).abs()) / (g[0][0] + g[1][1])
        })
        .fold(0.0, f64::max);
    if defect > CONFORMAL_TOL {
        return Err(WkitError::NonConformalChart(defect));
    }
    let alpha: Vec<f64> = geo
        .points
        .iter()
        .map(|p| 0.5 * p.metric.g[0][0].ln())
        .collect();
    let lap: Vec<f64> = (0..2)
        .map(|k| geo.diff.field(&alpha, k, 2))
        .fold(vec![0.0; alpha.len()], |acc, d| {
            acc.iter().zip(&d).map(|(a, b)| a + b).collect()
        });
    Ok(geo.interior_sup(|i| {
        let p = &geo.points[i];
        (-lap[i] - p.metric.g[0][0] * p.k).abs()
    }))
}

/// E_GR = ∫|dH|² − H²|II|² + 7H⁴.
pub fn graham_reichert(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<EnergyReport> {
    integrate(atlas, EnergyKind::GrahamReichert, cfg)
}

/// The coercive energy and the control quantity ∫|∇II|² + |II|⁴ it bounds.
#[derive(Clone, Debug, Serialize)]
pub struct CoerciveReport {
    pub energy: EnergyReport,
    pub control: EnergyReport,
    /// energy / control.
    pub ratio: f64,
}

pub fn coercive_energy(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<CoerciveReport> {
    let mut r = integrate_many(
        atlas,
        &[EnergyKind::Coercive, EnergyKind::CoercivityControl],
        cfg,
    )?;
    let control = r.pop().unwrap();
    let energy = r.pop().unwrap();
    let ratio = energy.value / control.value;
    Ok(CoerciveReport {
        energy,
        control,
        ratio,
    })
}

/// E = ½∫|dH|²_g.
pub fn dirichlet_h(atlas: &Atlas, cfg: &DiagnosticsConfig) -> Result<EnergyReport> {
    integrate(atlas, EnergyKind::DirichletH, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstrainedQuantities {
    pub area: f64,
    /// Enclosed volume, positive for embedded outward-oriented surfaces.
    pub volume: f64,
    /// area / volume^{2/3}.
    pub isoperimetric: f64,
    /// area^{-1/2} ∫H.
    pub total_mean_curvature: f64,
    pub willmore: f64,
}

pub fn constrained_quantities(
    atlas: &Atlas,
    cfg: &DiagnosticsConfig,
) -> Result<ConstrainedQuantities> {
    if atlas.n != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: atlas.n,
        });
    }
    let kinds = [
        EnergyKind::Area,
        EnergyKind::EnclosedVolume,
        EnergyKind::MeanCurvature,
        EnergyKind::Willmore,
    ];
    let v: Vec<f64> = integrate_many(atlas, &kinds, cfg)?
        .iter()
        .map(|r| r.value)
        .collect();
    let (area, volume, total_h, w) = (v[0], v[1], v[2], v[3]);
    Ok(ConstrainedQuantities {
        area,
        volume,
        isoperimetric: area / volume.abs().powf(2.0 / 3.0),
        total_mean_curvature: total_h / area.sqrt(),
        willmore: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{generate, ShapeSpec};

    #[test]
    fn flat_patch_has_zero_willmore_and_refuses_totals() {
        let flat = generate(
            &ShapeSpec::Graph2 {
                amplitude: 0.0,
                modes: vec![(1, 0)],
                periodic: false,
            },
            12,
        )
        .unwrap();
        let cfg = DiagnosticsConfig::default();
        assert!(matches!(willmore(&flat, &cfg), Err(WkitError::OpenPatch)));
        let ok = DiagnosticsConfig {
            patch_ok: true,
            ..cfg
        };
        assert_eq!(willmore(&flat, &ok).unwrap().value, 0.0);
    }

    #[test]
    fn sphere_quantities() {
        let atlas = generate(&ShapeSpec::unit_sphere2(), 48).unwrap();
        let cfg = DiagnosticsConfig::default();
        let w = willmore(&atlas, &cfg).unwrap().value;
        assert!((w / (4.0 * PI) - 1.0).abs() < 5e-3, "{w}");
        let q = constrained_quantities(&atlas, &cfg).unwrap();
        assert!(
            (q.volume / (4.0 * PI / 3.0) - 1.0).abs() < 5e-3,
            "{}",
            q.volume
        );
        let gb = gauss_bonnet(&atlas, &cfg).unwrap();
        assert_eq!(gb.euler_characteristic, 2);
    }

    #[test]
    fn liouville_on_stereographic_chart() {
        let res = |n: usize| {
            let atlas = generate(&ShapeSpec::unit_sphere2(), n).unwrap();
            liouville_residual(&atlas.charts[0], &DiagnosticsConfig::default()).unwrap()
        };
        let (a, b) = (res(32), res(64));
        assert!(a / b > 4.0, "{a} {b}");
    }
}
