//! Pullback metric, Gauss map, second fundamental form and curvatures of a
//! codimension-one chart, plus the pointwise diagnostics built on them.

use crate::chart::ChartGrid;
use crate::error::{Result, WkitError};
use crate::exterior::{cross3, Metric};
use crate::grid::{Diff, Quadrature};
use crate::linalg;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

/// Numerical settings shared by every diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsConfig {
    /// Finite-difference order: 2 or 4 for general use, 6 or 8 when the
    /// fourth-order operators must reach round-off on smooth inputs.
    pub stencil_order: usize,
    pub quadrature: Quadrature,
    /// Bound Λ of the two-sided metric estimate.
    pub lambda: f64,
    /// Boundary collar excluded from residual norms. `None` picks two stencil
    /// widths, since the residuals nest several derivative passes whose
    /// one-sided boundary stencils lose accuracy; at most a quarter of each
    /// bounded axis is ever excluded.
    pub collar: Option<usize>,
    /// Allow totals over open patches.
    pub patch_ok: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            stencil_order: 4,
            quadrature: Quadrature::Trapezoid,
            lambda: 16.0,
            collar: None,
            patch_ok: false,
        }
    }
}

impl DiagnosticsConfig {
    pub fn with_order(order: usize) -> Self {
        DiagnosticsConfig {
            stencil_order: order,
            ..Default::default()
        }
    }

    pub fn collar(&self) -> usize {
        self.collar.unwrap_or(2 * self.stencil_order)
    }
}

/// Geometry at one node.
#[derive(Clone, Copy, Debug)]
pub struct PointGeometry {
    /// ∂_iΦ as rows.
    pub dphi: [[f64; 5]; 4],
    pub metric: Metric,
    /// Oriented unit normal ⋆(∂_1Φ∧…∧∂_nΦ)/|·|.
    pub normal: [f64; 5],
    /// Scalar second fundamental form II_ij = ∂_i∂_jΦ·n.
    pub ii: [[f64; 4]; 4],
    /// H = (1/n) g^{ij} II_ij.
    pub h: f64,
    /// det(g^{-1} II): Gauss curvature for surfaces.
    pub k: f64,
}

impl PointGeometry {
    pub fn from_jets(
        n: usize,
        m: usize,
        d1: &[[f64; 5]; 4],
        d2: &[[[f64; 5]; 4]; 4],
    ) -> std::result::Result<Self, f64> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = linalg::dot(&d1[i][..m], &d1[j][..m]);
            }
        }
        let metric = match Metric::from_matrix(n, g) {
            Ok(mt) => mt,
            Err(_) => return Err(0.0),
        };
        let raw = linalg::cofactor_normal(&d1[..n], m);
        let len = linalg::norm(&raw[..m]);
        if !(len > 0.0) {
            return Err(0.0);
        }
        let mut normal = [0.0; 5];
        for a in 0..m {
            normal[a] = raw[a] / len;
        }
        let mut ii = [[0.0; 4]; 4];
        for i in 0..n {
            for j in 0..n {
                ii[i][j] = linalg::dot(&d2[i][j][..m], &normal[..m]);
            }
        }
        let mut tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr += metric.ginv[i][j] * ii[i][j];
            }
        }
        let s = linalg::matmul(&metric.ginv, &ii, n);
        let k = linalg::det((0..n).map(|i| s[i][..n].to_vec()).collect());
        Ok(PointGeometry {
            dphi: *d1,
            metric,
            normal,
            ii,
            h: tr / n as f64,
            k,
        })
    }

    /// Shape operator S = g^{-1} II.
    pub fn shape_operator(&self) -> [[f64; 4]; 4] {
        linalg::matmul(&self.metric.ginv, &self.ii, self.metric.n)
    }

    /// |II|²_g = tr(S²).
    pub fn ii_norm_sq(&self) -> f64 {
        let n = self.metric.n;
        let s = self.shape_operator();
        linalg::trace(&linalg::matmul(&s, &s, n), n)
    }

    /// g^{ij} a_i b_j for two covectors.
    pub fn pair(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.metric.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.metric.ginv[i][j] * a[i] * b[j];
            }
        }
        s
    }

    /// Raised covector g^{ij} a_j.
    pub fn raise(&self, a: &[f64]) -> [f64; 4] {
        let n = self.metric.n;
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.metric.ginv[i][j] * a[j]).sum();
        }
        out
    }
}

/// Geometric fields of a chart together with the derivative operator that
/// produced them.
#[derive(Clone, Debug)]
pub struct GeometryFields {
    pub n: usize,
    pub m: usize,
    pub points: Vec<PointGeometry>,
    pub diff: Diff,
    pub collar: usize,
}

/// Computes all geometric fields of a codimension-one chart.
pub fn geometry(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<GeometryFields> {
    let n = chart.n();
    if chart.m != n + 1 {
        return Err(WkitError::DimensionMismatch {
            expected: n + 1,
            got: chart.m,
        });
    }
    let diff = Diff::new(&chart.grid, cfg.stencil_order)?;
    let (d1, d2) = chart.jets(&diff);
    geometry_from_jets(diff, chart.m, &d1, &d2, cfg.collar())
}

/// Geometry from precomputed derivative jets.
pub fn geometry_from_jets(
    diff: Diff,
    m: usize,
    d1: &[[[f64; 5]; 4]],
    d2: &[[[[f64; 5]; 4]; 4]],
    collar: usize,
) -> Result<GeometryFields> {
    let n = diff.grid.dim();
    // Keep at least half of every bounded axis in the residual norms.
    let collar = diff
        .grid
        .axes
        .iter()
        .filter(|a| !a.periodic)
        .map(|a| a.len / 4)
        .fold(collar, usize::min);
    let points: Vec<std::result::Result<PointGeometry, f64>> = (0..d1.len())
        .into_par_iter()
        .map(|node| PointGeometry::from_jets(n, m, &d1[node], &d2[node]))
        .collect();
    let scale = points
        .iter()
        .filter_map(|p| p.as_ref().ok())
        .map(|p| linalg::trace(&p.metric.g, n) / n as f64)
        .fold(0.0, f64::max);
    let mut out = Vec::with_capacity(points.len());
    for (node, p) in points.into_iter().enumerate() {
        match p {
            Ok(p) if p.metric.sqrt_det.powi(2) > 1e-14 * scale.powi(n as i32) => out.push(p),
            Ok(p) => {
                return Err(WkitError::DegenerateMetric {
                    node,
                    det: p.metric.sqrt_det.powi(2),
                })
            }
            Err(det) => return Err(WkitError::DegenerateMetric { node, det }),
        }
    }
    Ok(GeometryFields {
        n,
        m,
        points: out,
        diff,
        collar,
    })
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn h_field(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.h).collect()
    }

    pub fn k_field(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.k).collect()
    }

    pub fn sqrt_det(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.metric.sqrt_det).collect()
    }

    pub fn normal_comp(&self, a: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.normal[a]).collect()
    }

    /// ∂_iΦ^a as a node field.
    pub fn dphi_comp(&self, i: usize, a: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.dphi[i][a]).collect()
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        self.diff.gradient(f)
    }

    /// Nodes at least `collar` away from non-periodic ends.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.diff.grid.is_interior(i, self.collar))
            .collect()
    }

    /// Δ_g f = (det g)^{-1/2} ∂_i(g^{ij}(det g)^{1/2} ∂_j f).
    pub fn laplace_beltrami(&self, f: &[f64]) -> Vec<f64> {
        let grad = self.gradient(f);
        self.laplace_from_gradient(&grad)
    }

    /// Δ_g of a function given through its coordinate gradient.
    pub fn laplace_from_gradient(&self, grad: &[Vec<f64>]) -> Vec<f64> {
        let div = self.divergence_of_covector(grad);
        div.iter()
            .zip(&self.points)
            .map(|(d, p)| d / p.metric.sqrt_det)
            .collect()
    }

    /// ∂_i(√g g^{ij} w_j) for a covector field: the coefficient of d *_g w.
    pub fn divergence_of_covector(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let n = self.n;
        let flux: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                self.points
                    .par_iter()
                    .enumerate()
                    .map(|(node, p)| {
                        let s: f64 = (0..n).map(|j| p.metric.ginv[i][j] * w[j][node]).sum();
                        p.metric.sqrt_det * s
                    })
                    .collect()
            })
            .collect();
        self.diff.divergence(&flux)
    }

    /// Δ_gΦ^a using the stored tangent vectors (valid with lattice shifts).
    pub fn laplace_phi(&self, a: usize) -> Vec<f64> {
        let grad: Vec<Vec<f64>> = (0..self.n).map(|i| self.dphi_comp(i, a)).collect();
        self.laplace_from_gradient(&grad)
    }

    /// Sup over interior nodes of a nonnegative pointwise quantity.
    pub fn interior_sup(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        self.interior_nodes()
            .into_par_iter()
            .map(f)
            .reduce(|| 0.0, f64::max)
    }

    /// L² norm over interior nodes with the volume measure.
    pub fn interior_l2(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        let w = self.diff.grid.quadrature_weights(Quadrature::Trapezoid);
        self.interior_nodes()
            .into_par_iter()
            .map(|i| {
                let v = f(i);
                v * v * w[i] * self.points[i].metric.sqrt_det
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Hodge star of a 1-form in two dimensions: returns ((*w)_1, (*w)_2).
pub fn star_one_form_2d(metric: &Metric, w1: f64, w2: f64) -> (f64, f64) {
    let x1 = metric.ginv[0][0] * w1 + metric.ginv[0][1] * w2;
    let x2 = metric.ginv[1][0] * w1 + metric.ginv[1][1] * w2;
    (-metric.sqrt_det * x2, metric.sqrt_det * x1)
}

/// sup over interior nodes of |H⃗ − (1/n) Δ_gΦ|.
pub fn mean_identity_residual(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<f64> {
    let geo = geometry(chart, cfg)?;
    Ok(mean_identity_residual_from(&geo))
}

pub fn mean_identity_residual_from(geo: &GeometryFields) -> f64 {
    let lap: Vec<Vec<f64>> = (0..geo.m).map(|a| geo.laplace_phi(a)).collect();
    let n = geo.n as f64;
    geo.interior_sup(|i| {
        let p = &geo.points[i];
        (0..geo.m)
            .map(|a| (p.h * p.normal[a] - lap[a][i] / n).powi(2))
            .sum::<f64>()
            .sqrt()
    })
}

/// sup over interior nodes of |−2H dΦ − (dn + n × *_g dn)| for surfaces.
pub fn lemma_frame_identity_residual(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<f64> {
    let geo = geometry(chart, cfg)?;
    if geo.n != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: geo.n,
        });
    }
    let dn: Vec<Vec<Vec<f64>>> = (0..3).map(|a| geo.gradient(&geo.normal_comp(a))).collect();
    Ok(geo.interior_sup(|i| {
        let p = &geo.points[i];
        let mut dni = [[0.0; 3]; 2];
        let mut sdn = [[0.0; 3]; 2];
        for a in 0..3 {
            dni[0][a] = dn[a][0][i];
            dni[1][a] = dn[a][1][i];
            let (s1, s2) = star_one_form_2d(&p.metric, dni[0][a], dni[1][a]);
            sdn[0][a] = s1;
            sdn[1][a] = s2;
        }
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let c = cross3(&p.normal[..3], &sdn[k]);
            let r: f64 = (0..3)
                .map(|a| (-2.0 * p.h * p.dphi[k][a] - dni[k][a] - c[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }))
}

/// Outcome of the two-sided metric bound check.
#[derive(Clone, Debug, Serialize)]
pub struct WeakImmersionReport {
    pub lambda: f64,
    pub max_eigenvalue: f64,
    pub min_eigenvalue: f64,
    /// Smallest Λ for which the chart passes.
    pub lambda_needed: f64,
    pub violations: Vec<usize>,
    pub pass: bool,
}

/// Checks Λ^{-1}|v|² ≤ |dΦ(v)|² ≤ Λ|v|² at every node through the extreme
/// eigenvalues of g.
pub fn check_weak_immersion(
    chart: &ChartGrid,
    lambda: f64,
    cfg: &DiagnosticsConfig,
) -> Result<WeakImmersionReport> {
    let diff = Diff::new(&chart.grid, cfg.stencil_order)?;
    let d1 = chart.first_jets(&diff);
    let n = chart.n();
    let m = chart.m;
    let eig: Vec<(f64, f64)> = d1
        .par_iter()
        .map(|t| {
            let mut g = [[0.0; 4]; 4];
            for i in 0..n {
                for j in 0..n {
                    g[i][j] = linalg::dot(&t[i][..m], &t[j][..m]);
                }
            }
            let ev = linalg::sym_eigenvalues(&g, n);
            (ev[0], ev[n - 1])
        })
        .collect();
    let min_e = eig.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let max_e = eig.iter().map(|e| e.1).fold(0.0, f64::max);
    let violations: Vec<usize> = eig
        .iter()
        .enumerate()
        .filter(|(_, &(lo, hi))| lo * lambda < 1.0 - 1e-12 || hi > lambda * (1.0 + 1e-12))
        .map(|(i, _)| i)
        .collect();
    let needed = if min_e > 0.0 {
        max_e.max(1.0 / min_e)
    } else {
        f64::INFINITY
    };
    Ok(WeakImmersionReport {
        lambda,
        max_eigenvalue: max_e,
        min_eigenvalue: min_e,
        lambda_needed: needed,
        pass: violations.is_empty(),
        violations,
    })
}

/// Beltrami dilatation field of a surface chart and its sup norm.
#[derive(Clone, Debug)]
pub struct BeltramiReport {
    pub mu: Vec<Complex64>,
    pub sup: f64,
}

/// μ = (g₁₁ − g₂₂ + 2i g₁₂)/(g₁₁ + g₂₂ + 2√det g) at every node.
pub fn beltrami_dilatation(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<BeltramiReport> {
    if chart.n() != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: chart.n(),
        });
    }
    let diff = Diff::new(&chart.grid, cfg.stencil_order)?;
    let d1 = chart.first_jets(&diff);
    let m = chart.m;
    let mut mu = Vec::with_capacity(d1.len());
    for (node, t) in d1.iter().enumerate() {
        let g11 = linalg::dot(&t[0][..m], &t[0][..m]);
        let g22 = linalg::dot(&t[1][..m], &t[1][..m]);
        let g12 = linalg::dot(&t[0][..m], &t[1][..m]);
        let det = g11 * g22 - g12 * g12;
        if !(det > 0.0) {
            return Err(WkitError::DegenerateMetric { node, det });
        }
        mu.push(Complex64::new(g11 - g22, 2.0 * g12) / (g11 + g22 + 2.0 * det.sqrt()));
    }
    let sup = mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(BeltramiReport { mu, sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, Grid};

    fn plane(res: usize) -> ChartGrid {
        ChartGrid::from_fn(Grid::cube(2, res, -1.0, 1.0), 3, |x| vec![x[0], x[1], 0.0]).unwrap()
    }

    #[test]
    fn flat_plane_has_no_curvature() {
        let geo = geometry(&plane(12), &DiagnosticsConfig::default()).unwrap();
        for p in &geo.points {
            assert!(p.h.abs() < 1e-12 && p.k.abs() < 1e-12);
            assert_eq!(&p.normal[..3], &[0.0, 0.0, 1.0]);
        }
        let cfg = DiagnosticsConfig::default();
        assert!(mean_identity_residual(&plane(12), &cfg).unwrap() < 1e-12);
        assert!(lemma_frame_identity_residual(&plane(12), &cfg).unwrap() < 1e-12);
    }

    #[test]
    fn laplacian_of_constant_vanishes_and_flat_sine() {
        let geo = geometry(&plane(16), &DiagnosticsConfig::default()).unwrap();
        assert!(geo
            .laplace_beltrami(&vec![3.0; geo.len()])
            .iter()
            .all(|v| v.abs() < 1e-12));

        let err = |res: usize| {
            let grid = Grid::new(vec![
                Axis::new(res, 0.0, 1.0, true),
                Axis::new(res, 0.0, 1.0, true),
            ]);
            let chart = ChartGrid::from_fn(grid, 3, |x| vec![x[0], x[1], 0.0])
                .unwrap()
                .with_period_shift(0, vec![1.0, 0.0, 0.0])
                .with_period_shift(1, vec![0.0, 1.0, 0.0]);
            let geo = geometry(&chart, &DiagnosticsConfig::default()).unwrap();
            let tau = std::f64::consts::TAU;
            let f: Vec<f64> = (0..geo.len())
                .map(|i| (tau * chart.grid.coords(i)[0]).sin())
                .collect();
            geo.laplace_beltrami(&f)
                .iter()
                .zip(&f)
                .map(|(l, v)| (l + tau * tau * v).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e1 / e2 > 14.0, "{e1} {e2}");
    }

    #[test]
    fn beltrami_of_stretched_plane() {
        let chart = ChartGrid::from_fn(Grid::cube(2, 10, 0.0, 1.0), 3, |x| {
            vec![2.0 * x[0], x[1], 0.0]
        })
        .unwrap();
        let b = beltrami_dilatation(&chart, &DiagnosticsConfig::default()).unwrap();
        assert!((b.sup - 1.0 / 3.0).abs() < 1e-12);
        let b = beltrami_dilatation(&plane(10), &DiagnosticsConfig::default()).unwrap();
        assert!(b.sup < 1e-15);
    }

    #[test]
    fn weak_immersion_checks() {
        let cfg = DiagnosticsConfig::default();
        assert!(check_weak_immersion(&plane(10), 1.0, &cfg).unwrap().pass);
        let pinched = ChartGrid::from_fn(Grid::cube(2, 11, -1.0, 1.0), 3, |x| {
            vec![x[0].powi(3), x[1], 0.0]
        })
        .unwrap();
        let r = check_weak_immersion(&pinched, 1e6, &cfg).unwrap();
        assert!(!r.pass && r.lambda_needed > 1e6);
    }
}
