//! Willmore gradient flow of graphs over the flat 2-torus.
//!
//! The height u evolves by the vertical component of the normal speed
//! w = −2(Δ_gH + 2H(H² − K)). Each step treats a flat bilaplacian implicitly
//! and the rest explicitly, which for a single Fourier mode is backward Euler
//! on the linearized flow, and the step is kept only if W does not increase.

use crate::chart::ChartGrid;
use crate::error::{Result, WkitError};
use crate::geometry::{geometry, DiagnosticsConfig, GeometryFields};
use crate::grid::{Axis, Grid};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::TAU;
use std::fmt::Write as _;

/// Smallest admissible vertical component of the unit normal.
pub const FOLD_LIMIT: f64 = 0.1;

/// Step control and stopping thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    pub tau0: f64,
    pub tau_min: f64,
    /// Largest step the controller grows to after accepted steps.
    pub tau_max: f64,
    /// Factor applied to τ after every accepted step.
    pub tau_growth: f64,
    pub t_end: f64,
    /// Allowed increase of W on an accepted step.
    pub energy_increase_tolerance: f64,
    /// BlowUp once sup |II|_g exceeds this.
    pub blowup_threshold: f64,
    /// Converged once ‖w‖_∞ falls below this.
    pub converge_tol: f64,
    /// Radius of the concentration probe in parameter units.
    pub probe_radius: f64,
    /// ε₀ against which the probe is compared.
    pub probe_threshold: f64,
    pub max_steps: usize,
    pub stencil_order: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            tau0: 1e-5,
            tau_min: 1e-12,
            tau_max: 1e-3,
            tau_growth: 1.25,
            t_end: 0.05,
            energy_increase_tolerance: 0.0,
            blowup_threshold: 1e3,
            converge_tol: 1e-8,
            probe_radius: 0.1,
            probe_threshold: 1.0,
            max_steps: 100_000,
            stencil_order: 4,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.tau0,
            self.tau_min,
            self.tau_max,
            self.t_end,
            self.blowup_threshold,
            self.converge_tol,
            self.probe_radius,
            self.probe_threshold,
        ];
        if positive.iter().any(|v| !(*v > 0.0))
            || !(self.tau_min < self.tau0)
            || self.tau_growth < 1.0
        {
            return Err(WkitError::InvalidShape(
                "flow thresholds must be positive with tau_min < tau0 and growth ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub t: f64,
    pub w: f64,
    pub sup_u: f64,
    pub sup_dn: f64,
    pub tau: f64,
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowFlag {
    Converged,
    TEnd,
    BlowUp,
    StepCollapse,
    GraphFold,
    MaxSteps,
}

/// Height field over the periodic unit square with its accepted history.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub res: usize,
    pub u: Vec<f64>,
    pub t: f64,
    /// Step the controller will try next.
    pub tau: f64,
    pub history: Vec<HistoryEntry>,
}

/// Fields of one height function needed by the scheme.
#[derive(Clone, Debug)]
pub struct Evaluation {
    /// W = ∫H² dvol over the periodic cell.
    pub energy: f64,
    /// Normal speed w per node.
    pub w: Vec<f64>,
    /// Vertical speed w/(n·e₃) with its mean removed.
    pub vertical: Vec<f64>,
    /// Mean of w/(n·e₃) before removal.
    pub mean_vertical: f64,
    /// sup |II|_g, which equals sup |dn|_g.
    pub sup_ii: f64,
    /// |dn|²_g √g per node, for the concentration probe.
    pub dn_density: Vec<f64>,
    /// Stabilization constant: max over nodes of λ_max(g⁻¹)².
    pub stiffness: f64,
    pub min_n3: f64,
}

/// Periodic unit-square grid with `res` nodes per axis.
pub fn torus_grid(res: usize) -> Grid {
    Grid::new(vec![Axis::new(res, 0.0, 1.0, true); 2])
}

/// The graph (x, y, u(x, y)) as a chart over the flat torus.
pub fn graph_chart(res: usize, u: &[f64]) -> Result<ChartGrid> {
    let grid = torus_grid(res);
    if u.len() != grid.len() {
        return Err(WkitError::DimensionMismatch {
            expected: grid.len(),
            got: u.len(),
        });
    }
    let mut values = Vec::with_capacity(3 * u.len());
    for (node, &h) in u.iter().enumerate() {
        let x = grid.coords(node);
        values.extend_from_slice(&[x[0], x[1], h]);
    }
    Ok(ChartGrid::new(grid, 3, &values)?
        .with_period_shift(0, vec![1.0, 0.0, 0.0])
        .with_period_shift(1, vec![0.0, 1.0, 0.0]))
}

/// w = −2(Δ_gH + 2H(H² − K)) from the geometry of a surface chart.
fn normal_speed(geo: &GeometryFields) -> Vec<f64> {
    let lap = geo.laplace_beltrami(&geo.h_field());
    lap.iter()
        .zip(&geo.points)
        .map(|(l, p)| -2.0 * (l + 2.0 * p.h * (p.h * p.h - p.k)))
        .collect()
}

fn min_vertical_normal(geo: &GeometryFields) -> f64 {
    geo.points
        .iter()
        .map(|p| p.normal[2])
        .fold(f64::INFINITY, f64::min)
}

/// Normal speed of the Willmore flow on a graph chart (any chart whose third
/// ambient coordinate is the height). Errors when the graph folds.
pub fn willmore_velocity(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<Vec<f64>> {
    if chart.n() != 2 || chart.m != 3 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: chart.n(),
        });
    }
    let geo = geometry(chart, cfg)?;
    let n3 = min_vertical_normal(&geo);
    if n3 <= FOLD_LIMIT {
        return Err(WkitError::GraphFold(n3));
    }
    Ok(normal_speed(&geo))
}

/// Evaluates energy, speeds and curvature bounds of a periodic height field.
pub fn evaluate(res: usize, u: &[f64], order: usize) -> Result<Evaluation> {
    let chart = graph_chart(res, u)?;
    let cfg = DiagnosticsConfig::with_order(order);
    let geo = geometry(&chart, &cfg)?;
    let min_n3 = min_vertical_normal(&geo);
    if min_n3 <= FOLD_LIMIT {
        return Err(WkitError::GraphFold(min_n3));
    }
    let w = normal_speed(&geo);
    let weights = chart.integration_weights(cfg.quadrature);
    let mut energy = 0.0;
    let mut sup_ii: f64 = 0.0;
    let mut stiffness: f64 = 0.0;
    let mut dn_density = Vec::with_capacity(w.len());
    let mut vertical = Vec::with_capacity(w.len());
    for (i, p) in geo.points.iter().enumerate() {
        let dv = p.metric.sqrt_det;
        energy += weights[i] * dv * p.h * p.h;
        let ii = p.ii_norm_sq();
        sup_ii = sup_ii.max(ii.sqrt());
        dn_density.push(ii * dv);
        // largest eigenvalue of g⁻¹ is 1/λ_min(g)
        let g = &p.metric.g;
        let tr = g[0][0] + g[1][1];
        let disc = ((g[0][0] - g[1][1]).powi(2) + 4.0 * g[0][1] * g[0][1]).sqrt();
        let lmin = (tr - disc) / 2.0;
        stiffness = stiffness.max((1.0 / lmin).powi(2));
        vertical.push(w[i] / p.normal[2]);
    }
    let mean = vertical.iter().sum::<f64>() / vertical.len() as f64;
    vertical.iter_mut().for_each(|v| *v -= mean);
    Ok(Evaluation {
        energy,
        w,
        vertical,
        mean_vertical: mean,
        sup_ii,
        dn_density,
        stiffness,
        min_n3,
    })
}

/// In-place 2D FFT of a row-major `res × res` array.
fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], res: usize, inverse: bool) {
    let fft = if inverse {
        planner.plan_fft_inverse(res)
    } else {
        planner.plan_fft_forward(res)
    };
    data.chunks_mut(res).for_each(|row| fft.process(row));
    let mut col = vec![Complex64::new(0.0, 0.0); res];
    for j in 0..res {
        for i in 0..res {
            col[i] = data[i * res + j];
        }
        fft.process(&mut col);
        for i in 0..res {
            data[i * res + j] = col[i];
        }
    }
}

fn wavenumber(j: usize, res: usize) -> f64 {
    let k = if j <= res / 2 {
        j as f64
    } else {
        j as f64 - res as f64
    };
    TAU * k
}

/// Applies (I + τcΔ²)⁻¹ spectrally on the periodic unit square.
pub fn resolvent(res: usize, f: &[f64], tau_c: f64) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut planner, &mut data, res, false);
    for i in 0..res {
        let kx = wavenumber(i, res);
        for j in 0..res {
            let ky = wavenumber(j, res);
            let s = (kx * kx + ky * ky).powi(2);
            data[i * res + j] /= 1.0 + tau_c * s;
        }
    }
    fft2(&mut planner, &mut data, res, true);
    let norm = (res * res) as f64;
    data.iter().map(|c| c.re / norm).collect()
}

/// Flat bilaplacian Δ²f, spectrally.
pub fn bilaplacian(res: usize, f: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut planner, &mut data, res, false);
    for i in 0..res {
        let kx = wavenumber(i, res);
        for j in 0..res {
            let ky = wavenumber(j, res);
            data[i * res + j] *= (kx * kx + ky * ky).powi(2);
        }
    }
    fft2(&mut planner, &mut data, res, true);
    let norm = (res * res) as f64;
    data.iter().map(|c| c.re / norm).collect()
}

fn sup_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

impl FlowState {
    pub fn new(res: usize, u: Vec<f64>, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let ev = evaluate(res, &u, cfg.stencil_order)?;
        let entry = HistoryEntry {
            t: 0.0,
            w: ev.energy,
            sup_u: sup_abs(&u),
            sup_dn: ev.sup_ii,
            tau: 0.0,
        };
        Ok(FlowState {
            res,
            u,
            t: 0.0,
            tau: cfg.tau0,
            history: vec![entry],
        })
    }

    /// Height field z = Σ_modes amplitude·s_{k1}(x)s_{k2}(y), s_k = sin(2πk·)
    /// for k > 0 and 1 for k = 0.
    pub fn from_modes(
        res: usize,
        amplitude: f64,
        modes: &[(u32, u32)],
        cfg: &FlowConfig,
    ) -> Result<Self> {
        let grid = torus_grid(res);
        let s = |k: u32, t: f64| {
            if k == 0 {
                1.0
            } else {
                (TAU * k as f64 * t).sin()
            }
        };
        let u = (0..grid.len())
            .map(|n| {
                let x = grid.coords(n);
                amplitude
                    * modes
                        .iter()
                        .map(|&(a, b)| s(a, x[0]) * s(b, x[1]))
                        .sum::<f64>()
            })
            .collect();
        Self::new(res, u, cfg)
    }

    pub fn mean(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    /// Current W.
    pub fn energy(&self) -> f64 {
        self.history.last().map(|h| h.w).unwrap_or(f64::NAN)
    }

    /// CSV trace with header `t,W,sup_u,sup_dn,tau`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("t,W,sup_u,sup_dn,tau\n");
        for h in &self.history {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{:e}",
                h.t, h.w, h.sup_u, h.sup_dn, h.tau
            );
        }
        s
    }
}

/// Advances by one accepted step. The candidate
/// u + τ(I + τcΔ²)⁻¹v is kept only if W does not grow; otherwise τ is halved.
/// `ev` must be the evaluation of the current state and is replaced by that of
/// the accepted one.
pub fn step(state: &mut FlowState, ev: &mut Evaluation, cfg: &FlowConfig) -> Result<()> {
    if ev.sup_ii > cfg.blowup_threshold {
        return Err(WkitError::BlowUp {
            t: state.t,
            sup_ii: ev.sup_ii,
        });
    }
    let mut tau = state.tau.min(cfg.t_end - state.t).max(cfg.tau_min);
    loop {
        let inc = resolvent(state.res, &ev.vertical, tau * ev.stiffness);
        let cand: Vec<f64> = state
            .u
            .par_iter()
            .zip(&inc)
            .map(|(u, d)| u + tau * d)
            .collect();
        match evaluate(state.res, &cand, cfg.stencil_order) {
            Ok(next) if next.energy <= ev.energy + cfg.energy_increase_tolerance => {
                state.t += tau;
                state.history.push(HistoryEntry {
                    t: state.t,
                    w: next.energy,
                    sup_u: sup_abs(&cand),
                    sup_dn: next.sup_ii,
                    tau,
                });
                state.u = cand;
                state.tau = (tau * cfg.tau_growth).min(cfg.tau_max);
                *ev = next;
                return Ok(());
            }
            // a folded candidate is treated like an energy increase
            Ok(_) | Err(WkitError::GraphFold(_)) => {}
            Err(e) => return Err(e),
        }
        tau /= 2.0;
        if tau < cfg.tau_min {
            state.tau = tau;
            return Err(WkitError::StepCollapse {
                t: state.t,
                tau_min: cfg.tau_min,
            });
        }
    }
}

/// Summary of a run.
#[derive(Clone, Debug, Serialize)]
pub struct FlowSummary {
    pub flag: FlowFlag,
    pub steps: usize,
    pub t: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// Every accepted step kept W non-increasing.
    pub monotone: bool,
    pub mean_drift: f64,
    pub final_speed: f64,
    /// Largest local Gauss-map energy seen at the probe radius.
    pub probe_max: f64,
    /// First time the probe exceeded ε₀, if it did.
    pub probe_exceeded_at: Option<f64>,
}

/// Runs until t_end, convergence, a singularity flag or the step budget.
pub fn run(state: &mut FlowState, cfg: &FlowConfig) -> Result<FlowSummary> {
    cfg.validate()?;
    let mut ev = evaluate(state.res, &state.u, cfg.stencil_order)?;
    let mean0 = state.mean();
    let e0 = ev.energy;
    let mut steps = 0;
    let mut probe_max: f64 = 0.0;
    let mut probe_hit = None;
    let res = state.res;
    let mut probe = |ev: &Evaluation, t: f64| {
        let p = probe_density(res, &ev.dn_density, cfg.probe_radius);
        probe_max = probe_max.max(p);
        if p > cfg.probe_threshold && probe_hit.is_none() {
            probe_hit = Some(t);
        }
    };
    probe(&ev, state.t);
    let flag = loop {
        if sup_abs(&ev.w) <= cfg.converge_tol {
            break FlowFlag::Converged;
        }
        if state.t >= cfg.t_end * (1.0 - 1e-12) {
            break FlowFlag::TEnd;
        }
        if steps >= cfg.max_steps {
            break FlowFlag::MaxSteps;
        }
        match step(state, &mut ev, cfg) {
            Ok(()) => {}
            Err(WkitError::BlowUp { .. }) => break FlowFlag::BlowUp,
            Err(WkitError::StepCollapse { .. }) => break FlowFlag::StepCollapse,
            Err(WkitError::GraphFold(_)) => break FlowFlag::GraphFold,
            Err(e) => return Err(e),
        }
        steps += 1;
        probe(&ev, state.t);
    };
    let monotone = state
        .history
        .windows(2)
        .all(|w| w[1].w <= w[0].w + cfg.energy_increase_tolerance);
    Ok(FlowSummary {
        flag,
        steps,
        t: state.t,
        energy_initial: e0,
        energy_final: ev.energy,
        monotone,
        mean_drift: (state.mean() - mean0).abs(),
        final_speed: sup_abs(&ev.w),
        probe_max,
        probe_exceeded_at: probe_hit,
    })
}

/// max over ball centers of ∫_{B_r}|dn|²_g dvol, balls taken in the periodic
/// parameter square, for a precomputed density |dn|²_g √g.
pub fn probe_density(res: usize, density: &[f64], r: f64) -> f64 {
    let h = 1.0 / res as f64;
    let reach = (r / h).floor() as isize;
    let offsets: Vec<(isize, isize)> = (-reach..=reach)
        .flat_map(|a| (-reach..=reach).map(move |b| (a, b)))
        .filter(|&(a, b)| ((a * a + b * b) as f64) * h * h <= r * r)
        .collect();
    let n = res as isize;
    (0..res * res)
        .into_par_iter()
        .map(|c| {
            let (i, j) = ((c / res) as isize, (c % res) as isize);
            offsets
                .iter()
                .map(|&(a, b)| {
                    let (ii, jj) = ((i + a).rem_euclid(n), (j + b).rem_euclid(n));
                    density[(ii * n + jj) as usize]
                })
                .sum::<f64>()
                * h
                * h
        })
        .reduce(|| 0.0, f64::max)
}

/// Maximal local Gauss-map energy of the current state at scale r.
pub fn concentration_probe(state: &FlowState, r: f64, order: usize) -> Result<f64> {
    let ev = evaluate(state.res, &state.u, order)?;
    Ok(probe_density(state.res, &ev.dn_density, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolvent_inverts_the_shifted_bilaplacian() {
        let res = 16;
        let grid = torus_grid(res);
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let x = grid.coords(n);
                (TAU * x[0]).sin() + 0.3 * (TAU * 2.0 * x[1]).cos()
            })
            .collect();
        let g = resolvent(res, &f, 0.01);
        let b = bilaplacian(res, &g);
        for i in 0..f.len() {
            assert!((g[i] + 0.01 * b[i] - f[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_is_a_fixed_point() {
        let cfg = FlowConfig::default();
        let mut st = FlowState::new(16, vec![0.0; 256], &cfg).unwrap();
        let s = run(&mut st, &cfg).unwrap();
        assert_eq!(s.flag, FlowFlag::Converged);
        assert_eq!(s.steps, 0);
    }
}
