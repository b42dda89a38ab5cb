//! Tension of the Dirichlet mean-curvature energy ½∫|dH|² on hypersurfaces of
//! ℝ⁵, its divergence residual, the dilation and rotation Noether currents and
//! the pointwise algebra behind the H-S-R identity.
//!
//! The potentials S and R of the 4D system are never solved for; the identity
//! is checked pointwise from the data that would determine d^{*g}S and d^{*g}R.

use crate::chart::ChartGrid;
use crate::conservation2d::ResidualReport;
use crate::error::{Result, WkitError};
use crate::exterior::{grade, AmbientOp, BaseOp, FormValue, Mask, Metric, MixedValue, Multivector};
use crate::geometry::{geometry_from_jets, DiagnosticsConfig, GeometryFields, PointGeometry};
use crate::grid::Diff;
use crate::linalg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const M: usize = 5;
const N: usize = 4;

/// Which conserved current a field represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentKind {
    /// ℝ⁵-valued 1-form V.
    Tension,
    /// Scalar 1-form L⌐̇_g dΦ + d(H²), whose Hodge star is the conserved 3-form.
    Dilation,
    /// ⋀²ℝ⁵-valued 1-form -L ∧⌐_g dΦ - ½Δ_gH n∧dΦ, starred likewise.
    Rotation,
}

impl CurrentKind {
    /// (ambient grade, base grade) of the stored 1-form representative.
    pub fn grades(self) -> (usize, usize) {
        match self {
            CurrentKind::Tension => (1, 1),
            CurrentKind::Dilation => (0, 1),
            CurrentKind::Rotation => (2, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurrentKind::Tension => "tension",
            CurrentKind::Dilation => "dilation",
            CurrentKind::Rotation => "rotation",
        }
    }
}

/// A current over a 4D chart, stored as one coefficient field per
/// (ambient blade, base blade) pair of its grade pattern.
#[derive(Clone, Debug)]
pub struct Current4D {
    pub kind: CurrentKind,
    pub blades: Vec<(Mask, Mask)>,
    pub fields: Vec<Vec<f64>>,
}

impl Current4D {
    fn zeros(kind: CurrentKind, len: usize) -> Self {
        let (ga, gb) = kind.grades();
        let mut blades = Vec::new();
        for p in 0..1u8 << M {
            for i in 0..1u8 << N {
                if grade(p) == ga && grade(i) == gb {
                    blades.push((p, i));
                }
            }
        }
        let fields = vec![vec![0.0; len]; blades.len()];
        Current4D {
            kind,
            blades,
            fields,
        }
    }

    pub fn len(&self) -> usize {
        self.fields.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The current at one node as a mixed value.
    pub fn at(&self, node: usize) -> MixedValue {
        let mut v = MixedValue::zero(M, N);
        for (&(p, i), f) in self.blades.iter().zip(&self.fields) {
            v.set_coeff(p, i, f[node]);
        }
        v
    }

    /// Largest coefficient over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.fields
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Field of the coefficient with ambient blade `p` on dx^k.
    fn field_mut(&mut self, p: Mask, k: usize) -> &mut Vec<f64> {
        let pos = self
            .blades
            .iter()
            .position(|&b| b == (p, 1 << k))
            .expect("blade in grade pattern");
        &mut self.fields[pos]
    }

    /// Pointwise magnitude of d*_g, i.e. the Euclidean norm over ambient
    /// blades of div_g of each scalar 1-form component.
    pub fn divergence_magnitude(&self, s: &Hypersurface) -> Vec<f64> {
        let mut ambient: Vec<Mask> = self.blades.iter().map(|b| b.0).collect();
        ambient.dedup();
        let mut sq = vec![0.0; self.len()];
        for p in ambient {
            let comps: Vec<Vec<f64>> = (0..N)
                .map(|k| {
                    let pos = self.blades.iter().position(|&b| b == (p, 1 << k)).unwrap();
                    self.fields[pos].clone()
                })
                .collect();
            let div = s.divergence(&comps);
            for (q, d) in sq.iter_mut().zip(div) {
                *q += d * d;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }
}

/// Caller-supplied Lagrange potential L: an ℝ⁵-valued 2-form per node.
pub type LField<'a> = &'a (dyn Fn(usize) -> MixedValue + Sync);

/// Derived fields of a 4D hypersurface chart shared by every current.
///
/// Second-order operators use the non-divergence forms
/// Δ_g f = g^{ij}∂_i∂_j f - γ^k ∂_k f and div_g w = g^{ij}∂_i w_j - γ^k w_k with
/// γ^k = g^{ij}Γ^k_ij taken from the jets of Φ. Each residual then nests three
/// stencil passes instead of five, which keeps boundary closures and rounding
/// from contaminating the interior.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    pub geo: GeometryFields,
    pub gamma: Vec<[f64; 4]>,
    pub h: Vec<f64>,
    pub dh: Vec<Vec<f64>>,
    pub lap_h: Vec<f64>,
    pub normal: Vec<Vec<f64>>,
}

impl Hypersurface {
    pub fn new(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<Self> {
        if chart.n() != N || chart.m != M {
            return Err(WkitError::DimensionMismatch {
                expected: N,
                got: chart.n(),
            });
        }
        let diff = Diff::new(&chart.grid, cfg.stencil_order)?;
        let (d1, d2) = chart.jets(&diff);
        let geo = geometry_from_jets(diff, M, &d1, &d2, cfg.collar())?;
        let gamma = (0..geo.len())
            .into_par_iter()
            .map(|i| {
                let gi = &geo.points[i].metric.ginv;
                // t_l = g^{ij} ∂_i∂_jΦ·∂_lΦ, then γ^k = g^{kl} t_l
                let mut t = [0.0; 4];
                for (l, tl) in t.iter_mut().enumerate() {
                    for a in 0..N {
                        for b in 0..N {
                            *tl += gi[a][b] * linalg::dot(&d2[i][a][b][..M], &d1[i][l][..M]);
                        }
                    }
                }
                let mut out = [0.0; 4];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = (0..N).map(|l| gi[k][l] * t[l]).sum();
                }
                out
            })
            .collect();
        drop((d1, d2));
        let mut s = Hypersurface {
            geo,
            gamma,
            h: Vec::new(),
            dh: Vec::new(),
            lap_h: Vec::new(),
            normal: Vec::new(),
        };
        s.h = s.geo.h_field();
        s.dh = s.geo.gradient(&s.h);
        s.lap_h = s.laplace(&s.h);
        s.normal = (0..M).map(|a| s.geo.normal_comp(a)).collect();
        Ok(s)
    }

    /// Δ_g f from second-derivative stencils.
    pub fn laplace(&self, f: &[f64]) -> Vec<f64> {
        let d = &self.geo.diff;
        (0..f.len())
            .into_par_iter()
            .map(|i| {
                let gi = &self.geo.points[i].metric.ginv;
                let mut s = 0.0;
                for a in 0..N {
                    s += gi[a][a] * d.at(f, i, a, 2) - self.gamma[i][a] * d.at(f, i, a, 1);
                    for b in 0..a {
                        s += 2.0 * gi[a][b] * d.mixed_at(f, i, a, b);
                    }
                }
                s
            })
            .collect()
    }

    /// div_g of a covector field given by its dx^k coefficients.
    pub fn divergence(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let d = &self.geo.diff;
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let gi = &self.geo.points[i].metric.ginv;
                let mut s = 0.0;
                for k in 0..N {
                    let dk: f64 = (0..N).map(|j| gi[j][k] * d.at(&w[k], i, j, 1)).sum();
                    s += dk - self.gamma[i][k] * w[k][i];
                }
                s
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    fn dh_at(&self, i: usize) -> [f64; 4] {
        [self.dh[0][i], self.dh[1][i], self.dh[2][i], self.dh[3][i]]
    }

    fn report(&self, name: &str, mag: &[f64]) -> ResidualReport {
        ResidualReport {
            name: name.to_string(),
            sup: self.geo.interior_sup(|i| mag[i]),
            l2: self.geo.interior_l2(|i| mag[i]),
            refinement_order: None,
        }
    }

    /// Point data for the H-S-R identity at one node.
    pub fn hsr_point(&self, i: usize) -> HsrPoint {
        HsrPoint::from_geometry(&self.geo.points[i], self.h[i], self.dh_at(i), self.lap_h[i])
    }
}

/// V = 2⟨dΦ,dH⟩_g dH - ½ d(n Δ_gH) + Δ_gH dn - |dH|²_g dΦ.
pub fn tension4(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<Current4D> {
    Ok(tension_of(&Hypersurface::new(chart, cfg)?))
}

/// ⟨dΦ^a, dH⟩_g and |dH|²_g per node.
fn tension_scalars(s: &Hypersurface) -> (Vec<[f64; 5]>, Vec<f64>) {
    (0..s.len())
        .into_par_iter()
        .map(|i| {
            let p = &s.geo.points[i];
            let up = p.raise(&s.dh_at(i));
            let mut out = [0.0; 5];
            for (a, o) in out.iter_mut().enumerate() {
                *o = (0..N).map(|k| up[k] * p.dphi[k][a]).sum();
            }
            let norm: f64 = (0..N).map(|k| up[k] * s.dh[k][i]).sum();
            (out, norm)
        })
        .unzip()
}

pub fn tension_of(s: &Hypersurface) -> Current4D {
    let mut v = Current4D::zeros(CurrentKind::Tension, s.len());
    let (pair, dh2) = tension_scalars(s);
    for a in 0..M {
        let dn = s.geo.gradient(&s.normal[a]);
        let n_lap: Vec<f64> = s.normal[a]
            .iter()
            .zip(&s.lap_h)
            .map(|(n, l)| n * l)
            .collect();
        let d_n_lap = s.geo.gradient(&n_lap);
        for k in 0..N {
            let f = v.field_mut(1 << a, k);
            f.par_iter_mut().enumerate().for_each(|(i, out)| {
                let p = &s.geo.points[i];
                *out = 2.0 * pair[i][a] * s.dh[k][i] - 0.5 * d_n_lap[k][i] + s.lap_h[i] * dn[k][i]
                    - dh2[i] * p.dphi[k][a];
            });
        }
    }
    v
}

/// Norms of d*_g V over interior nodes: the Euler-Lagrange residual of ½∫|dH|².
pub fn el4_residual(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<ResidualReport> {
    Ok(el4_residual_of(&Hypersurface::new(chart, cfg)?))
}

/// Uses d*_g V = div_g W - ½Δ_g(nΔ_gH) with W = V + ½d(nΔ_gH), so the
/// highest-order term takes a single second-derivative pass.
pub fn el4_residual_of(s: &Hypersurface) -> ResidualReport {
    let len = s.len();
    let (pair, dh2) = tension_scalars(s);
    let mut sq = vec![0.0; len];
    for a in 0..M {
        let dn = s.geo.gradient(&s.normal[a]);
        let w: Vec<Vec<f64>> = (0..N)
            .map(|k| {
                (0..len)
                    .map(|i| {
                        2.0 * pair[i][a] * s.dh[k][i] + s.lap_h[i] * dn[k][i]
                            - dh2[i] * s.geo.points[i].dphi[k][a]
                    })
                    .collect()
            })
            .collect();
        let div = s.divergence(&w);
        let n_lap: Vec<f64> = s.normal[a]
            .iter()
            .zip(&s.lap_h)
            .map(|(n, l)| n * l)
            .collect();
        let lap = s.laplace(&n_lap);
        for i in 0..len {
            let r = div[i] - 0.5 * lap[i];
            sq[i] += r * r;
        }
    }
    let mag: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    s.report("el4", &mag)
}

fn check_l(l: &MixedValue) -> Result<()> {
    if l.ambient_dim() != M || l.base_dim() != N || !l.has_grades(1, 2) {
        return Err(WkitError::GradeMismatch(
            "L must be an ℝ⁵-valued 2-form on a 4D chart".into(),
        ));
    }
    Ok(())
}

fn dphi_mixed(p: &PointGeometry) -> MixedValue {
    let cols: Vec<Vec<f64>> = (0..N).map(|k| p.dphi[k][..M].to_vec()).collect();
    MixedValue::vector_one_form(&cols)
}

/// Dilation current L⌐̇_g dΦ + d(H²). `None` stands for L = 0, admissible
/// only on CMC inputs where V vanishes.
pub fn dilation_current(s: &Hypersurface, l: Option<LField>) -> Result<Current4D> {
    let len = s.len();
    let mut c = Current4D::zeros(CurrentKind::Dilation, len);
    for k in 0..N {
        *c.field_mut(0, k) = (0..len).map(|i| 2.0 * s.h[i] * s.dh[k][i]).collect();
    }
    if let Some(l) = l {
        let contrib: Vec<MixedValue> = (0..len)
            .into_par_iter()
            .map(|i| {
                let li = l(i);
                check_l(&li)?;
                let p = &s.geo.points[i];
                MixedValue::product(
                    AmbientOp::Dot,
                    BaseOp::Interior,
                    &p.metric,
                    &li,
                    &dphi_mixed(p),
                )
            })
            .collect::<Result<_>>()?;
        for k in 0..N {
            let f = c.field_mut(0, k);
            for (i, x) in f.iter_mut().enumerate() {
                *x += contrib[i].coeff(0, 1 << k);
            }
        }
    }
    Ok(c)
}

/// Rotation current -L ∧⌐_g dΦ - ½Δ_gH n∧dΦ.
pub fn rotation_current(s: &Hypersurface, l: Option<LField>) -> Result<Current4D> {
    let len = s.len();
    let mut c = Current4D::zeros(CurrentKind::Rotation, len);
    for a in 0..M {
        for b in a + 1..M {
            let blade: Mask = (1 << a) | (1 << b);
            for k in 0..N {
                *c.field_mut(blade, k) = (0..len)
                    .map(|i| {
                        let p = &s.geo.points[i];
                        let (na, nb) = (s.normal[a][i], s.normal[b][i]);
                        -0.5 * s.lap_h[i] * (na * p.dphi[k][b] - nb * p.dphi[k][a])
                    })
                    .collect();
            }
        }
    }
    if let Some(l) = l {
        let contrib: Vec<MixedValue> = (0..len)
            .into_par_iter()
            .map(|i| {
                let li = l(i);
                check_l(&li)?;
                let p = &s.geo.points[i];
                MixedValue::product(
                    AmbientOp::Wedge,
                    BaseOp::Interior,
                    &p.metric,
                    &li,
                    &dphi_mixed(p),
                )
            })
            .collect::<Result<_>>()?;
        for idx in 0..c.blades.len() {
            let (p, base) = c.blades[idx];
            for (i, x) in c.fields[idx].iter_mut().enumerate() {
                *x -= contrib[i].coeff(p, base);
            }
        }
    }
    Ok(c)
}

/// Residual norms of d*_g of the dilation and rotation currents.
pub fn noether4_residuals(
    chart: &ChartGrid,
    cfg: &DiagnosticsConfig,
    l: Option<LField>,
) -> Result<(ResidualReport, ResidualReport)> {
    noether4_residuals_of(&Hypersurface::new(chart, cfg)?, l)
}

pub fn noether4_residuals_of(
    s: &Hypersurface,
    l: Option<LField>,
) -> Result<(ResidualReport, ResidualReport)> {
    let dil = dilation_current(s, l)?;
    let dil = s.report("dilation4", &dil.divergence_magnitude(s));
    let rot = rotation_current(s, l)?;
    let rot = s.report("rotation4", &rot.divergence_magnitude(s));
    Ok((dil, rot))
}

/// Pointwise data entering the H-S-R identity.
#[derive(Clone, Debug)]
pub struct HsrPoint {
    pub metric: Metric,
    pub dphi: [[f64; 5]; 4],
    pub normal: [f64; 5],
    pub h: f64,
    pub dh: [f64; 4],
    pub lap_h: f64,
}

impl HsrPoint {
    pub fn from_geometry(p: &PointGeometry, h: f64, dh: [f64; 4], lap_h: f64) -> Self {
        HsrPoint {
            metric: p.metric,
            dphi: p.dphi,
            normal: p.normal,
            h,
            dh,
            lap_h,
        }
    }

    /// Random frame with condition number of g at most 100, its unit normal
    /// and random curvature data.
    pub fn random(rng: &mut impl Rng) -> Self {
        loop {
            let mut dphi = [[0.0; 5]; 4];
            for row in dphi.iter_mut() {
                for x in row.iter_mut() {
                    *x = rng.gen_range(-1.0..1.0);
                }
            }
            let mut g = [[0.0; 4]; 4];
            for i in 0..N {
                for j in 0..N {
                    g[i][j] = linalg::dot(&dphi[i], &dphi[j]);
                }
            }
            let ev = linalg::sym_eigenvalues(&g, N);
            if ev[0] < 1e-2 * ev[N - 1] {
                continue;
            }
            let Ok(metric) = Metric::from_matrix(N, g) else {
                continue;
            };
            let raw = linalg::cofactor_normal(&dphi, M);
            let len = linalg::norm(&raw);
            let mut normal = [0.0; 5];
            for a in 0..M {
                normal[a] = raw[a] / len;
            }
            let mut dh = [0.0; 4];
            for x in dh.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            return HsrPoint {
                metric,
                dphi,
                normal,
                h: rng.gen_range(-1.0..1.0),
                dh,
                lap_h: rng.gen_range(-1.0..1.0),
            };
        }
    }
}

/// Random ℝ⁵-valued 2-form on the 4D cotangent space.
pub fn random_l(rng: &mut impl Rng) -> MixedValue {
    let mut l = MixedValue::zero(M, N);
    for a in 0..M {
        for i in 0..1u8 << N {
            if grade(i) == 2 {
                l.set_coeff(1 << a, i, rng.gen_range(-1.0..1.0));
            }
        }
    }
    l
}

/// Defects of the H-S-R identity and its two auxiliary contractions.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct HsrDefects {
    /// |b ⌐⌐_g dΦ + a ⌐_g dΦ - (2Δ_gH n - ⟨d(H²), dΦ⟩_g)|.
    pub hsr: f64,
    /// |(L ∧⌐_g dΦ) ⌐⌐_g dΦ + (L⌐̇_g dΦ) ⌐_g dΦ|.
    pub l_contraction: f64,
    /// |(n∧dΦ) ⌐⌐_g dΦ + 4n|.
    pub normal_contraction: f64,
}

impl HsrDefects {
    pub fn max(&self) -> f64 {
        self.hsr
            .max(self.l_contraction)
            .max(self.normal_contraction)
    }

    fn merge(self, o: Self) -> Self {
        HsrDefects {
            hsr: self.hsr.max(o.hsr),
            l_contraction: self.l_contraction.max(o.l_contraction),
            normal_contraction: self.normal_contraction.max(o.normal_contraction),
        }
    }
}

/// Checks the H-S-R identity at one point, building a = -L⌐̇_g dΦ - d(H²) and
/// b = -L ∧⌐_g dΦ - ½Δ_gH n∧dΦ from the supplied data as d^{*g}S and d^{*g}R
/// would be.
pub fn hsr_identity_check(p: &HsrPoint, l: &MixedValue) -> Result<HsrDefects> {
    check_l(l)?;
    let g = &p.metric;
    let prod = |amb, base, x: &MixedValue, y: &MixedValue| MixedValue::product(amb, base, g, x, y);
    let cols: Vec<Vec<f64>> = (0..N).map(|k| p.dphi[k].to_vec()).collect();
    let dphi = MixedValue::vector_one_form(&cols);
    let scalar = FormValue::scalar(N, 1.0);
    let n = MixedValue::tensor(&Multivector::vector(&p.normal), &scalar);
    let mut dh2 = FormValue::zero(N);
    for k in 0..N {
        dh2.set(&[k], 2.0 * p.h * p.dh[k]);
    }
    let dh2 = MixedValue::tensor(&Multivector::scalar(M, 1.0), &dh2);

    let l_dot = prod(AmbientOp::Dot, BaseOp::Interior, l, &dphi)?;
    let l_wedge = prod(AmbientOp::Wedge, BaseOp::Interior, l, &dphi)?;
    let n_dphi = prod(AmbientOp::Wedge, BaseOp::Wedge, &n, &dphi)?;
    let a = l_dot.add(&dh2).scale(-1.0);
    let b = l_wedge.add(&n_dphi.scale(0.5 * p.lap_h)).scale(-1.0);

    let lhs = prod(AmbientOp::Interior, BaseOp::Interior, &b, &dphi)?.add(&prod(
        AmbientOp::Wedge,
        BaseOp::Interior,
        &a,
        &dphi,
    )?);
    // 2Δ_gH n - ⟨d(H²), dΦ⟩_g
    let up = {
        let mut v = [0.0; 4];
        for (i, x) in v.iter_mut().enumerate() {
            *x = (0..N).map(|j| g.ginv[i][j] * 2.0 * p.h * p.dh[j]).sum();
        }
        v
    };
    let rhs: Vec<f64> = (0..M)
        .map(|c| 2.0 * p.lap_h * p.normal[c] - (0..N).map(|k| up[k] * p.dphi[k][c]).sum::<f64>())
        .collect();
    let rhs = MixedValue::tensor(&Multivector::vector(&rhs), &scalar);

    let l_contraction = prod(AmbientOp::Interior, BaseOp::Interior, &l_wedge, &dphi)?.add(&prod(
        AmbientOp::Wedge,
        BaseOp::Interior,
        &l_dot,
        &dphi,
    )?);
    let normal_contraction =
        prod(AmbientOp::Interior, BaseOp::Interior, &n_dphi, &dphi)?.add(&n.scale(4.0));
    Ok(HsrDefects {
        hsr: lhs.add(&rhs.scale(-1.0)).max_abs(),
        l_contraction: l_contraction.max_abs(),
        normal_contraction: normal_contraction.max_abs(),
    })
}

/// Worst defects over `draws` random frames and potentials. Draw k uses
/// stream k of a ChaCha generator seeded with `seed`, so results do not
/// depend on scheduling.
pub fn hsr_random_suite(draws: usize, seed: u64) -> Result<HsrDefects> {
    (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let p = HsrPoint::random(&mut rng);
            let l = random_l(&mut rng);
            hsr_identity_check(&p, &l)
        })
        .try_reduce(HsrDefects::default, |a, b| Ok(a.merge(b)))
}

/// Worst defects over every `stride`-th node of a chart, with its own
/// geometry and the given potential (zero when absent).
pub fn hsr_on_chart(s: &Hypersurface, l: Option<LField>, stride: usize) -> Result<HsrDefects> {
    let zero = MixedValue::zero(M, N);
    (0..s.len())
        .into_par_iter()
        .step_by(stride.max(1))
        .map(|i| {
            let li = l.map_or_else(|| zero.clone(), |f| f(i));
            hsr_identity_check(&s.hsr_point(i), &li)
        })
        .try_reduce(HsrDefects::default, |a, b| Ok(a.merge(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn flat_patch_has_zero_tension() {
        let grid = Grid::cube(4, 10, 0.0, 1.0);
        let chart = ChartGrid::from_fn(grid, 5, |x| vec![x[0], x[1], x[2], x[3], 0.0]).unwrap();
        let v = tension4(&chart, &DiagnosticsConfig::default()).unwrap();
        assert_eq!(v.max_abs(), 0.0);
        assert_eq!(v.blades.len(), 20);
    }

    #[test]
    fn random_identities_hold() {
        let d = hsr_random_suite(50, 7).unwrap();
        assert!(d.max() < 1e-10, "{d:?}");
    }

    #[test]
    fn wrong_grade_of_l_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = HsrPoint::random(&mut rng);
        let mut l = MixedValue::zero(M, N);
        l.set_coeff(0b11, 0b11, 1.0);
        assert!(matches!(
            hsr_identity_check(&p, &l),
            Err(WkitError::GradeMismatch(_))
        ));
    }
}
