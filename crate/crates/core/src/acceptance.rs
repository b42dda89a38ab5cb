//! The sixteen acceptance criteria as runnable checks.
//!
//! Every criterion returns measured values next to the tolerance it is held
//! to, so a failing line explains itself. Tolerances are pinned here and
//! nowhere else.

use crate::analysis::{density_at, mollify, w22_distance};
use crate::chart::{Atlas, ChartGrid};
use crate::conservation2d::{
    all_residuals, conservative_residual, reconstruct_potentials, refinement_order, Surface,
};
use crate::conservation4d::{el4_residual, hsr_random_suite};
use crate::elliptic::{
    frame_random_suite, isothermal_coordinates, wente_disk_problem, wente_random_suite, wente_solve,
};
use crate::energies::{constrained_quantities, integrand_field, integrate_many, EnergyKind};
use crate::error::Result;
use crate::exterior::identity_random_suite;
use crate::flow::{run, FlowConfig, FlowFlag, FlowState};
use crate::geometry::{check_weak_immersion, geometry, DiagnosticsConfig};
use crate::grid::Grid;
use crate::shapes::{generate, ShapeSpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::time::Instant;

pub const SPHERE_W_TOL_64: f64 = 5e-3;
pub const SPHERE_W_TOL_128: f64 = 5e-4;
pub const TORUS_W_TOL: f64 = 5e-3;
pub const GAUSS_BONNET_TOL: f64 = 5e-3;
pub const TORUS_K_TOL: f64 = 1e-3;
pub const CHERN_LASHOF_TOL: f64 = 5e-3;
pub const SPHERE_RESIDUAL_TOL: f64 = 1e-8;
pub const MIN_ORDER: f64 = 1.8;
pub const WENTE_DISK_TOL: f64 = 1e-3;
pub const IDENTITY_PULLBACK_TOL: f64 = 1e-8;
pub const MIN_DEFECT_ORDER: f64 = 1.0;
pub const GR_SPHERE4_TOL: f64 = 1e-2;
pub const PRODUCT_INTEGRAND_TOL: f64 = 1e-3;
pub const COERCIVE_SPHERE4_TOL: f64 = 1e-3;
pub const DIRICHLET_H_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const NORMAL_CONTRACTION_TOL: f64 = 1e-12;
pub const EL4_TOL: f64 = 1e-8;
pub const DENSITY_TOL: f64 = 0.05;
pub const ISOPERIMETRIC_TOL: f64 = 5e-3;
pub const HOLDER_TOL: f64 = 1e-8;
pub const DECAY_RATE_TOL: f64 = 0.05;
pub const FLOW_FLAT_TOL: f64 = 1e-6;
pub const MOLLIFY_LAMBDA_RATIO: f64 = 1.2;

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// One-line account of the measured values against their tolerances.
    pub summary: String,
    pub details: Value,
    pub seconds: f64,
}

impl Criterion {
    /// `PASS`/`FAIL` line for terminals and logs.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.seconds
        )
    }
}

pub const NAMES: [&str; 16] = [
    "Willmore sphere value",
    "Willmore torus value",
    "Gauss-Bonnet",
    "Chern-Lashof equality on convex shapes",
    "conservative EL residual",
    "Noether and potential-system residuals",
    "Wente constants",
    "Coulomb frame bound",
    "isothermal construction",
    "4D exact values",
    "4D identity suite",
    "4D EL residual",
    "density",
    "isoperimetric and total mean curvature",
    "Willmore flow",
    "mollification",
];

struct Outcome {
    pass: bool,
    summary: String,
    details: Value,
}

fn rel(value: f64, exact: f64) -> f64 {
    (value / exact - 1.0).abs()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn energies(atlas: &Atlas, kinds: &[EnergyKind], cfg: &DiagnosticsConfig) -> Result<Vec<f64>> {
    Ok(integrate_many(atlas, kinds, cfg)?
        .iter()
        .map(|r| r.value)
        .collect())
}

fn c1() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let exact = 4.0 * PI;
    let w: Vec<f64> = [64, 128]
        .iter()
        .map(|&r| {
            Ok(energies(
                &generate(&ShapeSpec::unit_sphere2(), r)?,
                &[EnergyKind::Willmore],
                &cfg,
            )?[0])
        })
        .collect::<Result<_>>()?;
    let (e64, e128) = (rel(w[0], exact), rel(w[1], exact));
    let pass = e64 <= SPHERE_W_TOL_64 && e128 <= SPHERE_W_TOL_128;
    Ok(Outcome {
        pass,
        summary: format!(
            "rel err {e64:.2e} at 64² (tol {SPHERE_W_TOL_64:.0e}), {e128:.2e} at 128² (tol {SPHERE_W_TOL_128:.0e})"
        ),
        details: json!({"w64": w[0], "w128": w[1], "exact": exact}),
    })
}

fn c2() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let w = energies(
        &generate(&ShapeSpec::willmore_torus(), 128)?,
        &[EnergyKind::Willmore],
        &cfg,
    )?[0];
    let exact = 2.0 * PI * PI;
    let e = rel(w, exact);
    Ok(Outcome {
        pass: e <= TORUS_W_TOL,
        summary: format!("W = {w:.6} vs 2π², rel err {e:.2e} (tol {TORUS_W_TOL:.0e})"),
        details: json!({"w": w, "exact": exact}),
    })
}

fn c3() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let ks = [EnergyKind::GaussCurvature, EnergyKind::Area];
    let s = energies(&generate(&ShapeSpec::unit_sphere2(), 64)?, &ks, &cfg)?;
    let t = energies(&generate(&ShapeSpec::willmore_torus(), 128)?, &ks, &cfg)?;
    let es = rel(s[0], 4.0 * PI);
    let bound = TORUS_K_TOL * t[1];
    let pass = es <= GAUSS_BONNET_TOL && t[0].abs() <= bound;
    Ok(Outcome {
        pass,
        summary: format!(
            "sphere ∫K rel err {es:.2e} (tol {GAUSS_BONNET_TOL:.0e}); torus |∫K| = {:.2e} ≤ {bound:.2e}",
            t[0].abs()
        ),
        details: json!({"sphere_total_k": s[0], "torus_total_k": t[0], "torus_area": t[1]}),
    })
}

fn c4() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let exact = 4.0 * PI;
    let sphere = energies(
        &generate(&ShapeSpec::unit_sphere2(), 64)?,
        &[EnergyKind::ChernLashof],
        &cfg,
    )?[0];
    let ell = ShapeSpec::Ellipsoid2 {
        axes: [2.0, 1.0, 1.0],
    };
    let ellipsoid = energies(&generate(&ell, 64)?, &[EnergyKind::ChernLashof], &cfg)?[0];
    let (a, b) = (rel(sphere, exact), rel(ellipsoid, exact));
    Ok(Outcome {
        pass: a <= CHERN_LASHOF_TOL && b <= CHERN_LASHOF_TOL,
        summary: format!(
            "rel err sphere {a:.2e}, ellipsoid(2,1,1) {b:.2e} (tol {CHERN_LASHOF_TOL:.0e})"
        ),
        details: json!({"sphere": sphere, "ellipsoid": ellipsoid, "exact": exact}),
    })
}

/// Geodesic patch of the unit sphere used where round-sphere residuals must
/// reach 1e-8.
fn sphere_patch2(res: usize) -> Result<ChartGrid> {
    let spec = ShapeSpec::SpherePatch {
        n: 2,
        radius: 1.0,
        half_width: 1.0,
    };
    Ok(generate(&spec, res)?.charts.remove(0))
}

const SPHERE_RESOLUTIONS: [usize; 3] = [32, 48, 64];
const SPHERE_ORDER: usize = 8;

fn catenoid(res: usize) -> Result<ChartGrid> {
    Ok(generate(&ShapeSpec::InvertedCatenoidPatch, res)?
        .charts
        .remove(0))
}

fn c5() -> Result<Outcome> {
    let hi = DiagnosticsConfig::with_order(SPHERE_ORDER);
    let sphere: Vec<f64> = SPHERE_RESOLUTIONS
        .iter()
        .map(|&r| Ok(conservative_residual(&sphere_patch2(r)?, &hi)?.sup))
        .collect::<Result<_>>()?;
    let cfg = DiagnosticsConfig::default();
    let coarse = conservative_residual(&catenoid(64)?, &cfg)?.sup;
    let fine = conservative_residual(&catenoid(128)?, &cfg)?.sup;
    let order = refinement_order(coarse, fine);
    let worst = sphere.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        pass: worst <= SPHERE_RESIDUAL_TOL && order >= MIN_ORDER,
        summary: format!(
            "sphere sup ‖d*V‖ ≤ {worst:.2e} at 32²..64² (tol {SPHERE_RESIDUAL_TOL:.0e}); inverted catenoid order {order:.2} (min {MIN_ORDER})"
        ),
        details: json!({"sphere": sphere, "catenoid": [coarse, fine], "order": order}),
    })
}

fn residual_set(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<Vec<(String, f64)>> {
    let s = Surface::new(chart, cfg)?;
    let st = reconstruct_potentials(&s, cfg.stencil_order)?;
    Ok(all_residuals(&s, &st)
        .into_iter()
        .map(|r| (r.name, r.sup))
        .collect())
}

fn c6() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let coarse = residual_set(&catenoid(64)?, &cfg)?;
    let fine = residual_set(&catenoid(128)?, &cfg)?;
    let orders: Vec<(String, f64)> = coarse
        .iter()
        .zip(&fine)
        .map(|((name, c), (_, f))| (name.clone(), refinement_order(*c, *f)))
        .collect();
    let hi = DiagnosticsConfig::with_order(SPHERE_ORDER);
    let mut sphere_worst: Vec<(String, f64)> =
        coarse.iter().map(|(n, _)| (n.clone(), 0.0)).collect();
    for &r in &SPHERE_RESOLUTIONS {
        for (w, (_, v)) in sphere_worst
            .iter_mut()
            .zip(residual_set(&sphere_patch2(r)?, &hi)?)
        {
            w.1 = w.1.max(v);
        }
    }
    let min_order = orders.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let max_sphere = sphere_worst.iter().map(|o| o.1).fold(0.0, f64::max);
    let failing: Vec<&str> = orders
        .iter()
        .filter(|o| !(o.1 >= MIN_ORDER))
        .chain(
            sphere_worst
                .iter()
                .filter(|o| !(o.1 <= SPHERE_RESIDUAL_TOL)),
        )
        .map(|o| o.0.as_str())
        .collect();
    Ok(Outcome {
        pass: failing.is_empty(),
        summary: format!(
            "7 residuals: min catenoid order {min_order:.2} (min {MIN_ORDER}); sphere max {max_sphere:.2e} (tol {SPHERE_RESIDUAL_TOL:.0e}){}",
            if failing.is_empty() { String::new() } else { format!("; failing {failing:?}") }
        ),
        details: json!({"catenoid_64": coarse, "catenoid_128": fine, "orders": orders, "sphere_max": sphere_worst}),
    })
}

pub const WENTE_DRAWS: usize = 100;
pub const WENTE_RES: usize = 49;
pub const WENTE_DISK_RES: usize = 129;

fn c7(seed: u64) -> Result<Outcome> {
    let suite = wente_random_suite(WENTE_DRAWS, seed, WENTE_RES)?;
    let passed = suite.iter().filter(|r| r.pass).count();
    let max_sup = suite.iter().map(|r| r.sup_ratio).fold(0.0, f64::max);
    let max_energy = suite.iter().map(|r| r.energy_ratio).fold(0.0, f64::max);
    let max_lambda = suite.iter().map(|r| r.lambda).fold(0.0, f64::max);
    let disk = wente_solve(&wente_disk_problem(WENTE_DISK_RES)?, 2)?.report;
    let disk_err = (disk.u_sup - 0.25).abs();
    Ok(Outcome {
        pass: passed == suite.len() && disk_err <= WENTE_DISK_TOL && disk.pass,
        summary: format!(
            "{passed}/{} draws (Λ ≤ {max_lambda:.2}) with max ‖u‖∞/‖da‖‖db‖ = {max_sup:.3} ≤ 18, ‖du‖/‖da‖‖db‖ = {max_energy:.3} ≤ 3√2; disk ‖u‖∞ = {:.5} (tol {WENTE_DISK_TOL:.0e})",
            suite.len(),
            disk.u_sup
        ),
        details: json!({"draws": suite, "disk": disk}),
    })
}

pub const FRAME_DRAWS: usize = 20;
pub const FRAME_RES: usize = 49;

fn c8(seed: u64) -> Result<Outcome> {
    let cfg = DiagnosticsConfig::with_order(4);
    let suite = frame_random_suite(FRAME_DRAWS, seed, FRAME_RES, &cfg)?;
    let budget_ok = suite
        .iter()
        .all(|e| e.total_abs_curvature <= crate::elliptic::CLB_CURVATURE);
    let passed = suite.iter().filter(|e| e.pass).count();
    let margin = suite
        .iter()
        .map(|e| e.frame_energy / e.bound)
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: budget_ok && passed == suite.len(),
        summary: format!(
            "{passed}/{} patches with ∫|K| ≤ 1/36 {}; max frame energy / bound = {margin:.3}",
            suite.len(),
            if budget_ok {
                "verified"
            } else {
                "NOT verified"
            }
        ),
        details: json!({"patches": suite}),
    })
}

fn c9() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::with_order(4);
    let stretched = ChartGrid::from_fn(Grid::cube(2, 33, 0.0, 1.0), 3, |x| {
        vec![2.0 * x[0], x[1], 0.0]
    })?;
    let iso = isothermal_coordinates(&stretched, &cfg)?;
    // the pullback is e^{2λ}(δ + defect): identity needs both to vanish
    let lam = iso.frame.lambda.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let identity = iso.report.defect.max((2.0 * lam).exp_m1().abs());
    let spec = ShapeSpec::Graph2 {
        amplitude: 0.05,
        modes: vec![(1, 1)],
        periodic: false,
    };
    let defects: Vec<f64> = [33, 65]
        .iter()
        .map(|&r| {
            Ok(
                isothermal_coordinates(&generate(&spec, r)?.charts.remove(0), &cfg)?
                    .report
                    .defect,
            )
        })
        .collect::<Result<_>>()?;
    let order = refinement_order(defects[0], defects[1]);
    Ok(Outcome {
        pass: identity <= IDENTITY_PULLBACK_TOL && order >= MIN_DEFECT_ORDER,
        summary: format!(
            "(2x,y,0) pullback deviates {identity:.2e} from δ (tol {IDENTITY_PULLBACK_TOL:.0e}); graph defect {:.2e} → {:.2e}, order {order:.2} (min {MIN_DEFECT_ORDER})",
            defects[0], defects[1]
        ),
        details: json!({"identity_deviation": identity, "graph_defects": defects, "order": order}),
    })
}

pub const SPHERE4_RES: usize = 32;
pub const SPHERE4_ORDER: usize = 8;
pub const PRODUCT_RES: usize = 16;

fn c10() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::with_order(SPHERE4_ORDER);
    let atlas = generate(&ShapeSpec::Sphere4 { radius: 1.0 }, SPHERE4_RES)?;
    let v = energies(
        &atlas,
        &[
            EnergyKind::GrahamReichert,
            EnergyKind::Coercive,
            EnergyKind::DirichletH,
        ],
        &cfg,
    )?;
    drop(atlas);
    let exact = 8.0 * PI * PI;
    let gr = rel(v[0], exact);
    let chart = generate(&ShapeSpec::ProductPatchS2xR2 { r: 1.0 }, PRODUCT_RES)?
        .charts
        .remove(0);
    let pcfg = DiagnosticsConfig::with_order(4);
    let geo = geometry(&chart, &pcfg)?;
    let f = integrand_field(&chart, &geo, EnergyKind::GrahamReichert);
    let dev = f.iter().fold(0.0_f64, |m, x| m.max((x + 1.0 / 16.0).abs()));
    let pass = gr <= GR_SPHERE4_TOL
        && dev <= PRODUCT_INTEGRAND_TOL
        && v[1] <= COERCIVE_SPHERE4_TOL
        && v[2] <= DIRICHLET_H_TOL;
    Ok(Outcome {
        pass,
        summary: format!(
            "E_GR rel err {gr:.2e} (tol {GR_SPHERE4_TOL:.0e}); S²×ℝ² integrand |f + 1/16| ≤ {dev:.2e} (tol {PRODUCT_INTEGRAND_TOL:.0e}); 𝓔 = {:.2e} (tol {COERCIVE_SPHERE4_TOL:.0e}); ½∫|dH|² = {:.2e} (tol {DIRICHLET_H_TOL:.0e})",
            v[1], v[2]
        ),
        details: json!({"graham_reichert": v[0], "exact": exact, "coercive": v[1], "dirichlet_h": v[2], "product_deviation": dev}),
    })
}

pub const IDENTITY_DRAWS: usize = 1000;

fn c11(seed: u64) -> Result<Outcome> {
    let hsr = hsr_random_suite(IDENTITY_DRAWS, seed)?;
    let ext = identity_random_suite(IDENTITY_DRAWS, seed)?;
    let pass = hsr.hsr <= IDENTITY_TOL
        && hsr.l_contraction <= IDENTITY_TOL
        && hsr.normal_contraction <= NORMAL_CONTRACTION_TOL
        && ext.max() <= IDENTITY_TOL;
    Ok(Outcome {
        pass,
        summary: format!(
            "{IDENTITY_DRAWS} draws: HSR {:.1e}, L contraction {:.1e}, normal contraction {:.1e} (tol {NORMAL_CONTRACTION_TOL:.0e}); exterior identities {:.1e} (tol {IDENTITY_TOL:.0e})",
            hsr.hsr, hsr.l_contraction, hsr.normal_contraction, ext.max()
        ),
        details: json!({"hsr": hsr, "exterior": ext}),
    })
}

pub const EL4_RES: usize = 24;
pub const EL4_ORDER: usize = 10;
pub const EL4_HALF_WIDTH: f64 = 1.5;

fn c12() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::with_order(EL4_ORDER);
    let mut values = Vec::new();
    for radius in [1.0, 3.0] {
        let spec = ShapeSpec::SpherePatch {
            n: 4,
            radius,
            half_width: EL4_HALF_WIDTH,
        };
        let chart = generate(&spec, EL4_RES)?.charts.remove(0);
        values.push((radius, el4_residual(&chart, &cfg)?.sup));
    }
    let pass = values.iter().all(|v| v.1 <= EL4_TOL);
    Ok(Outcome {
        pass,
        summary: format!(
            "sup residual {} on 24⁴ (tol {EL4_TOL:.0e})",
            values
                .iter()
                .map(|(r, v)| format!("r={r}: {v:.2e} {}", verdict(*v <= EL4_TOL)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        details: json!({"residuals": values}),
    })
}

pub const DENSITY_RES: usize = 64;
pub const DENSITY_POINTS: usize = 10;

/// Decreasing radii 16h … 4h with h the parameter spacing of the sphere
/// charts. Below about 16h the smoothed ball indicator resolves too few cells
/// for the extrapolation to land within 0.05 of an integer.
fn density_radii(atlas: &Atlas) -> Vec<f64> {
    let h = atlas.charts[0].grid.spacing()[0];
    (0..5)
        .map(|i| 16.0 * h / 2f64.powf(i as f64 / 2.0))
        .collect()
}

/// Spread points on the unit sphere (golden-angle spiral).
pub fn sphere_samples(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

fn c13() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let sphere = generate(&ShapeSpec::unit_sphere2(), DENSITY_RES)?;
    let radii = density_radii(&sphere);
    let mut on = Vec::new();
    for y in sphere_samples(DENSITY_POINTS) {
        on.push(density_at(&sphere, &y, &radii, &cfg)?);
    }
    let double = generate(&ShapeSpec::DoubleSphere2, DENSITY_RES)?;
    let twice = density_at(&double, &[0.0, 0.6, 0.8], &radii, &cfg)?;
    // off-surface points farther from the sphere than the largest radius
    let off = [[0.0, 0.0, 0.0], [0.0, 0.0, 1.8]]
        .iter()
        .map(|y| density_at(&sphere, y, &radii, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let off_ok = off
        .iter()
        .all(|d| d.rounded == 0 && d.distance_to_integer < DENSITY_TOL);
    let off_worst = off
        .iter()
        .map(|d| d.distance_to_integer)
        .fold(0.0, f64::max);
    let on_ok = on
        .iter()
        .all(|d| d.rounded == 1 && d.distance_to_integer < DENSITY_TOL);
    let worst = on.iter().map(|d| d.distance_to_integer).fold(0.0, f64::max);
    let pass = on_ok && twice.rounded == 2 && twice.distance_to_integer < DENSITY_TOL && off_ok;
    Ok(Outcome {
        pass,
        summary: format!(
            "{} sphere points → 1 (max distance {worst:.3}); double cover → {} ({:.3}); {} off-surface points → 0 ({off_worst:.3}); tol {DENSITY_TOL}",
            on.len(),
            twice.rounded,
            twice.distance_to_integer,
            off.len()
        ),
        details: json!({"sphere": on, "double": twice, "off_surface": off}),
    })
}

fn c14() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let sphere = constrained_quantities(&generate(&ShapeSpec::unit_sphere2(), 64)?, &cfg)?;
    let exact = (36.0 * PI).cbrt();
    let iso = rel(sphere.isoperimetric, exact);
    let shapes = [
        ShapeSpec::unit_sphere2(),
        ShapeSpec::Ellipsoid2 {
            axes: [2.0, 1.0, 1.0],
        },
        ShapeSpec::willmore_torus(),
        ShapeSpec::DoubleSphere2,
    ];
    let mut holder = Vec::new();
    for spec in &shapes {
        let q = constrained_quantities(&generate(spec, 64)?, &cfg)?;
        holder.push((spec.name(), q.total_mean_curvature.powi(2) - q.willmore));
    }
    let worst = holder.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        pass: iso <= ISOPERIMETRIC_TOL && worst <= HOLDER_TOL,
        summary: format!(
            "𝓘(sphere) rel err {iso:.2e} (tol {ISOPERIMETRIC_TOL:.0e}); max 𝓣² − W = {worst:.2e} over {} closed shapes (tol {HOLDER_TOL:.0e})",
            shapes.len()
        ),
        details: json!({"isoperimetric": sphere.isoperimetric, "exact": exact, "holder_gap": holder}),
    })
}

pub const FLOW_RES: usize = 32;

fn c15() -> Result<Outcome> {
    let mut monotone = true;
    let mut rates = Vec::new();
    for k in [1u32, 2] {
        let kappa = (2.0 * PI * k as f64).powi(4);
        let tau = 0.01 / kappa;
        let cfg = FlowConfig {
            tau0: tau,
            tau_max: tau,
            tau_growth: 1.0,
            t_end: 40.0 * tau,
            ..Default::default()
        };
        let mut st = FlowState::from_modes(FLOW_RES, 1e-3, &[(k, 0)], &cfg)?;
        let s = run(&mut st, &cfg)?;
        monotone &= s.monotone;
        let h = &st.history;
        let rate = -(h[h.len() - 1].sup_u / h[0].sup_u).ln() / s.t;
        rates.push((k, rate / kappa));
    }
    let cfg = FlowConfig::default();
    let mut st = FlowState::from_modes(FLOW_RES, 0.01, &[(1, 0), (1, 1)], &cfg)?;
    let small = run(&mut st, &cfg)?;
    monotone &= small.monotone;
    let mean = st.mean();
    let flat = st.u.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    let cfg = FlowConfig {
        t_end: 0.01,
        ..Default::default()
    };
    let mut st = FlowState::from_modes(FLOW_RES, 0.5, &[(1, 0), (0, 1)], &cfg)?;
    let large = run(&mut st, &cfg)?;
    monotone &= large.monotone;
    let rates_ok = rates.iter().all(|r| (r.1 - 1.0).abs() <= DECAY_RATE_TOL);
    let pass = monotone && rates_ok && small.flag == FlowFlag::Converged && flat <= FLOW_FLAT_TOL;
    Ok(Outcome {
        pass,
        summary: format!(
            "W non-increasing on all accepted steps: {monotone}; decay rate / (2πk)⁴ = {} (tol {DECAY_RATE_TOL}); small data {:?} with |u − mean| ≤ {flat:.1e} (tol {FLOW_FLAT_TOL:.0e})",
            rates.iter().map(|r| format!("{:.4} (k={})", r.1, r.0)).collect::<Vec<_>>().join(", "),
            small.flag
        ),
        details: json!({"rate_ratios": rates, "small": small, "large": large, "flatness": flat}),
    })
}

pub const MOLLIFY_RES: usize = 64;

fn c16() -> Result<Outcome> {
    let cfg = DiagnosticsConfig::default();
    let chart = generate(&ShapeSpec::KinkedGraph2 { amplitude: 0.05 }, MOLLIFY_RES)?
        .charts
        .remove(0);
    let lambda_in = check_weak_immersion(&chart, 1.0, &cfg)?.lambda_needed;
    let h = chart.grid.spacing()[0];
    let mut dist = Vec::new();
    let mut lambda_2h = f64::NAN;
    for mult in [16.0, 8.0, 4.0, 2.0] {
        let m = mollify(&chart, mult * h, &cfg)?;
        if mult == 2.0 {
            lambda_2h = m.lambda;
        }
        dist.push((mult, w22_distance(&m.chart, &chart, &cfg)?));
    }
    let weak = check_weak_immersion(
        &mollify(&chart, 2.0 * h, &cfg)?.chart,
        MOLLIFY_RES as f64,
        &cfg,
    )?;
    let ratio = lambda_2h / lambda_in;
    let decreasing = dist.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(Outcome {
        pass: weak.pass && ratio <= MOLLIFY_LAMBDA_RATIO && decreasing,
        summary: format!(
            "Λ(ε=2h)/Λ(input) = {ratio:.4} (max {MOLLIFY_LAMBDA_RATIO}); W2,2 distance {} as ε halves from 16h",
            dist.iter().map(|d| format!("{:.3}", d.1)).collect::<Vec<_>>().join(" > ")
        ),
        details: json!({"lambda_input": lambda_in, "lambda_2h": lambda_2h, "w22": dist}),
    })
}

/// Criteria known not to be attainable in double precision, with the reason
/// printed next to their line.
pub const EXPECTED_FAILURES: [(usize, &str); 1] = [(
    12,
    "radius 1 sits on a round-off floor near 1e-7: nested fourth derivatives amplify input rounding by about G³ with G ≈ 3000 at this spacing",
)];

/// Reason a criterion is expected to fail, if it is.
pub fn expected_failure(id: usize) -> Option<&'static str> {
    EXPECTED_FAILURES.iter().find(|e| e.0 == id).map(|e| e.1)
}

/// Runs criterion `id` (1-based). Errors count as failures.
pub fn criterion(id: usize, seed: u64) -> Criterion {
    let start = Instant::now();
    let result = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(seed),
        8 => c8(seed),
        9 => c9(),
        10 => c10(),
        11 => c11(seed),
        12 => c12(),
        13 => c13(),
        14 => c14(),
        15 => c15(),
        16 => c16(),
        _ => panic!("there are 16 criteria, got {id}"),
    };
    let o = result.unwrap_or_else(|e| Outcome {
        pass: false,
        summary: format!("error: {e}"),
        details: json!({"error": e.to_string()}),
    });
    Criterion {
        id,
        name: NAMES[id - 1],
        pass: o.pass,
        summary: o.summary,
        details: o.details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion in order, handing each result to `progress`.
pub fn run_all(seed: u64, mut progress: impl FnMut(&Criterion)) -> Vec<Criterion> {
    (1..=NAMES.len())
        .map(|id| {
            let c = criterion(id, seed);
            progress(&c);
            c
        })
        .collect()
}
