use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use wkit::chart::ChartGrid;
use wkit::flow::*;
use wkit::geometry::{geometry, DiagnosticsConfig};
use wkit::grid::Grid;
use wkit::WkitError;

fn kappa(k: f64) -> f64 {
    (TAU * k).powi(4)
}

fn fixed_step(tau: f64, t_end: f64) -> FlowConfig {
    FlowConfig {
        tau0: tau,
        tau_max: tau,
        tau_growth: 1.0,
        t_end,
        ..Default::default()
    }
}

#[test]
fn plane_has_zero_velocity() {
    let chart = graph_chart(16, &vec![0.0; 256]).unwrap();
    let w = willmore_velocity(&chart, &DiagnosticsConfig::with_order(4)).unwrap();
    assert!(w.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn velocity_linearizes_to_minus_bilaplacian() {
    let res = 32;
    let g = torus_grid(res);
    let u: Vec<f64> = (0..g.len())
        .map(|n| 1e-3 * (TAU * g.coords(n)[0]).sin())
        .collect();
    let ev = evaluate(res, &u, 4).unwrap();
    // least-squares ratio of w against the exact −Δ²u
    let b: Vec<f64> = u.iter().map(|v| kappa(1.0) * v).collect();
    let num: f64 = ev.w.iter().zip(&b).map(|(w, b)| w * b).sum();
    let den: f64 = b.iter().map(|b| b * b).sum();
    let ratio = -num / den;
    assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
}

#[test]
fn spherical_cap_is_willmore() {
    let errs: Vec<f64> = [33, 65]
        .iter()
        .map(|&res| {
            let grid = Grid::cube(2, res, -0.3, 0.3);
            let chart = ChartGrid::from_fn(grid, 3, |x| {
                vec![x[0], x[1], (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt()]
            })
            .unwrap();
            let cfg = DiagnosticsConfig::with_order(4);
            let w = willmore_velocity(&chart, &cfg).unwrap();
            geometry(&chart, &cfg).unwrap().interior_sup(|i| w[i].abs())
        })
        .collect();
    assert!(errs[1] < 1e-6 && errs[0] / errs[1] > 4.0, "{errs:?}");
}

#[test]
fn steep_graph_folds() {
    let chart = graph_chart(32, &{
        let g = torus_grid(32);
        (0..g.len())
            .map(|n| 2.0 * (TAU * g.coords(n)[0]).sin())
            .collect::<Vec<_>>()
    })
    .unwrap();
    assert!(matches!(
        willmore_velocity(&chart, &DiagnosticsConfig::with_order(4)),
        Err(WkitError::GraphFold(_))
    ));
}

#[test]
fn plane_converges_immediately() {
    let cfg = FlowConfig::default();
    let mut st = FlowState::new(16, vec![0.25; 256], &cfg).unwrap();
    let s = run(&mut st, &cfg).unwrap();
    assert_eq!(s.flag, FlowFlag::Converged);
    assert_eq!(st.history.len(), 1);
}

#[test]
fn linear_mode_decays_at_biharmonic_rate() {
    for k in [1u32, 2] {
        let kap = kappa(k as f64);
        // τκ = 0.01 keeps the backward-Euler rate within half a percent
        let cfg = fixed_step(0.01 / kap, 40.0 * 0.01 / kap);
        let mut st = FlowState::from_modes(32, 1e-3, &[(k, 0)], &cfg).unwrap();
        let s = run(&mut st, &cfg).unwrap();
        assert_eq!(s.flag, FlowFlag::TEnd);
        let h = &st.history;
        let rate = -(h.last().unwrap().sup_u / h[0].sup_u).ln() / s.t;
        assert!((rate / kap - 1.0).abs() < 0.05, "k={k}: {rate} vs {kap}");
    }
}

#[test]
fn sup_halves_after_half_life() {
    let t_half = 2f64.ln() / kappa(1.0);
    let cfg = fixed_step(t_half / 50.0, t_half);
    let mut st = FlowState::from_modes(32, 0.01, &[(1, 0)], &cfg).unwrap();
    run(&mut st, &cfg).unwrap();
    let sups: Vec<f64> = st.history.iter().map(|h| h.sup_u).collect();
    assert!(sups.windows(2).all(|w| w[1] < w[0]));
    let last = *sups.last().unwrap();
    assert!((last / 0.005 - 1.0).abs() < 0.1, "{last}");
}

#[test]
fn small_data_converges_to_constant() {
    let cfg = FlowConfig::default();
    let mut st = FlowState::from_modes(32, 0.01, &[(1, 0), (1, 1)], &cfg).unwrap();
    let s = run(&mut st, &cfg).unwrap();
    assert_eq!(s.flag, FlowFlag::Converged);
    assert!(s.monotone);
    let m = st.mean();
    assert!(st.u.iter().all(|v| (v - m).abs() <= 1e-6));
    // a fixed point satisfies the Euler-Lagrange equation to 1e-6
    assert!(s.final_speed / 2.0 <= 1e-6);
    assert!(s.mean_drift <= 1e-8 * s.t.max(1.0));
}

#[test]
fn large_data_stops_with_monotone_energy() {
    let cfg = FlowConfig {
        t_end: 0.01,
        ..Default::default()
    };
    let mut st = FlowState::from_modes(32, 0.5, &[(1, 0), (0, 1)], &cfg).unwrap();
    let s = run(&mut st, &cfg).unwrap();
    assert!(s.monotone);
    assert!(s.energy_final < s.energy_initial);
}

#[test]
fn rough_data_never_raises_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let res = 32;
    let g = torus_grid(res);
    let modes: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(4..8) as f64,
                rng.gen_range(4..8) as f64,
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let u = (0..g.len())
        .map(|n| {
            let x = g.coords(n);
            0.05 * modes
                .iter()
                .map(|(a, b, c)| c * (TAU * a * x[0]).sin() * (TAU * b * x[1]).cos())
                .sum::<f64>()
        })
        .collect();
    let cfg = FlowConfig {
        t_end: 0.01,
        ..Default::default()
    };
    let mut st = FlowState::new(res, u, &cfg).unwrap();
    let s = run(&mut st, &cfg).unwrap();
    assert!(s.monotone);
    assert!(s.flag != FlowFlag::Converged || s.energy_final < s.energy_initial);
}

#[test]
fn trace_has_fixed_header() {
    let cfg = fixed_step(1e-5, 3e-5);
    let mut st = FlowState::from_modes(16, 0.01, &[(1, 0)], &cfg).unwrap();
    run(&mut st, &cfg).unwrap();
    let csv = st.trace_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,W,sup_u,sup_dn,tau"));
    assert_eq!(lines.count(), st.history.len());
}

#[test]
fn config_validation() {
    let bad = FlowConfig {
        tau_min: 1.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    assert!(FlowConfig::default().validate().is_ok());
}

#[test]
fn probe_vanishes_on_the_plane() {
    let cfg = FlowConfig::default();
    let st = FlowState::new(16, vec![0.0; 256], &cfg).unwrap();
    assert_eq!(concentration_probe(&st, 0.2, 4).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn probe_grows_with_radius(seed in 0u64..10_000, r in 0.05f64..0.4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = [(rng.gen_range(0..3), rng.gen_range(1..3))];
        let cfg = FlowConfig::default();
        let st = FlowState::from_modes(24, rng.gen_range(0.01..0.05), &modes, &cfg).unwrap();
        let small = concentration_probe(&st, r, 4).unwrap();
        let large = concentration_probe(&st, r + 0.05, 4).unwrap();
        prop_assert!(small <= large);
    }

    #[test]
    fn accepted_steps_keep_energy_and_mean(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = [(rng.gen_range(1..3), rng.gen_range(0..3)), (rng.gen_range(0..3), rng.gen_range(1..3))];
        let cfg = FlowConfig { t_end: 2e-3, ..Default::default() };
        let mut st = FlowState::from_modes(24, rng.gen_range(0.005..0.05), &modes, &cfg).unwrap();
        let m0 = st.mean();
        let s = run(&mut st, &cfg).unwrap();
        prop_assert!(st.history.windows(2).all(|w| w[1].w <= w[0].w));
        prop_assert!((st.mean() - m0).abs() <= 1e-8 * s.t.max(1.0));
    }
}
