use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wkit::chart::ChartGrid;
use wkit::elliptic::*;
use wkit::geometry::DiagnosticsConfig;
use wkit::grid::Grid;
use wkit::shapes::{generate, stereographic_atlas, ShapeSpec};
use wkit::WkitError;

fn disk_error(res: usize) -> f64 {
    // Δu = −1 on the unit disk has the radial solution (1 − r²)/4
    let chart = disk_chart(res).unwrap();
    let metric = metric_field(&chart, 4).unwrap();
    let coeff = laplace_coefficients(&metric).unwrap();
    // the density of −1 dvol against dx¹∧dx²
    let rhs: Vec<f64> = metric
        .iter()
        .map(|g| -(g[0] * g[2] - g[1] * g[1]).sqrt())
        .collect();
    let s = solve_divform(&EllipticProblem {
        grid: chart.grid.clone(),
        coeff,
        rhs,
        degree: 1,
    })
    .unwrap()
    .require()
    .unwrap();
    (0..chart.len())
        .map(|i| {
            let r2 = chart.comps[0][i].powi(2) + chart.comps[1][i].powi(2);
            (s.u[i] - (1.0 - r2) / 4.0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn disk_radial_solution_converges_at_second_order() {
    let (c, f) = (disk_error(33), disk_error(65));
    assert!(f < 1e-3, "error {f}");
    assert!((c / f).log2() > 1.8, "order {}", (c / f).log2());
}

#[test]
fn manufactured_anisotropic_solution() {
    for degree in [1, 2, 4] {
        let grid = Grid::cube(2, 33, -1.0, 1.0);
        let coeff = vec![[4.0, 0.0, 1.0]; grid.len()];
        let rhs: Vec<f64> = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                -8.0 * (1.0 - c[1] * c[1]) - 2.0 * (1.0 - c[0] * c[0])
            })
            .collect();
        let s = solve_divform(&EllipticProblem {
            grid: grid.clone(),
            coeff,
            rhs,
            degree,
        })
        .unwrap();
        let err = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                (s.u[i] - (1.0 - c[0] * c[0]) * (1.0 - c[1] * c[1])).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "degree {degree}: {err}");
    }
}

#[test]
fn element_degree_follows_the_grid() {
    assert_eq!(element_degree(&Grid::cube(2, 65, 0.0, 1.0), 8), 4);
    assert_eq!(element_degree(&Grid::cube(2, 64, 0.0, 1.0), 8), 3);
    assert_eq!(element_degree(&Grid::cube(2, 64, 0.0, 1.0), 4), 1);
}

#[test]
fn wente_disk_reproduces_quarter() {
    let p = wente_disk_problem(129).unwrap();
    let s = wente_solve(&p, 2).unwrap();
    assert!((s.report.u_sup - 0.25).abs() < 1e-3, "{}", s.report.u_sup);
    assert!(s.report.pass);
    // ‖da‖ = ‖db‖ = √π on the unit disk
    let pi = std::f64::consts::PI;
    assert!((s.report.da_l2 - pi.sqrt()).abs() < 1e-2);
}

#[test]
fn wente_equal_data_gives_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut p = random_wente_problem(&mut rng, 33, 5.0);
    p.b = p.a.clone();
    let s = wente_solve(&p, 4).unwrap();
    assert!(s.report.u_sup < 1e-12);
}

#[test]
fn wente_random_instances_obey_both_constants() {
    let r = wente_random_suite(12, 7, 33).unwrap();
    for x in &r {
        assert!(x.pass);
        assert!(x.lambda <= 10.0 + 1e-9);
        assert!(x.sup_ratio < WENTE_SUP && x.energy_ratio < WENTE_ENERGY);
    }
}

fn cfg4() -> DiagnosticsConfig {
    DiagnosticsConfig::with_order(4)
}

fn plane(f: impl Fn(f64, f64) -> [f64; 3]) -> ChartGrid {
    ChartGrid::from_fn(Grid::cube(2, 33, 0.0, 1.0), 3, |x| f(x[0], x[1]).to_vec()).unwrap()
}

fn sup(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[test]
fn flat_plane_frame_is_trivial() {
    let st = coulomb_frame(&plane(|x, y| [x, y, 0.0]), &cfg4()).unwrap();
    assert!(sup(&st.theta) < 1e-12);
    assert!(sup(&st.lambda) < 1e-12);
    assert!(st.report.frame_energy < 1e-20);
}

#[test]
fn sheared_plane_has_zero_coulomb_energy() {
    let st = coulomb_frame(&plane(|x, y| [x, x + y, 0.0]), &cfg4()).unwrap();
    assert!(st.report.coulomb_energy < 1e-20);
    assert!(st.report.dn_energy < 1e-20);
}

fn sine_patch(amplitude: f64) -> FrameReport {
    let spec = ShapeSpec::Graph2 {
        amplitude,
        modes: vec![(1, 1)],
        periodic: false,
    };
    let chart = generate(&spec, 65).unwrap().charts.remove(0);
    coulomb_frame(&chart, &cfg4()).unwrap().report
}

#[test]
fn small_curvature_graph_obeys_frame_bound() {
    let r = sine_patch(0.006);
    assert!(r.small_curvature, "∫|K| = {}", r.total_abs_curvature);
    assert!(
        r.frame_energy <= r.bound,
        "{} > {}",
        r.frame_energy,
        r.bound
    );
    assert!(r.orthonormality_defect < 1e-10);
    assert!(r.coulomb_energy <= r.gram_schmidt_energy);
}

#[test]
fn curvature_budget_is_reported_when_exceeded() {
    // ∫|K| grows like the square of the amplitude: about 0.25 at 0.02
    let r = sine_patch(0.02);
    assert!(!r.small_curvature);
    assert!((r.total_abs_curvature - 0.25).abs() < 0.01);
    assert!(r.frame_energy <= r.bound);
}

#[test]
fn periodic_chart_is_rejected() {
    let spec = ShapeSpec::Graph2 {
        amplitude: 0.02,
        modes: vec![(1, 1)],
        periodic: true,
    };
    let chart = generate(&spec, 32).unwrap().charts.remove(0);
    assert!(matches!(
        coulomb_frame(&chart, &cfg4()),
        Err(WkitError::NotSimplyConnected)
    ));
}

#[test]
fn stretched_plane_gives_linear_coordinates() {
    let chart = plane(|x, y| [2.0 * x, y, 0.0]);
    let iso = isothermal_coordinates(&chart, &cfg4()).unwrap();
    let b = iso.frame.basepoint;
    let base = chart.point(b);
    for i in 0..chart.len() {
        let p = chart.point(i);
        assert!((iso.phi[0][i] - (p[0] - base[0])).abs() < 1e-10);
        assert!((iso.phi[1][i] - (p[1] - base[1])).abs() < 1e-10);
    }
    assert!(iso.report.defect < 1e-8);
    assert!(iso.report.det_bound_holds);
}

#[test]
fn stereographic_chart_stays_conformal() {
    let chart = stereographic_atlas(2, 65).unwrap().charts.remove(0);
    let iso = isothermal_coordinates(&chart, &DiagnosticsConfig::with_order(8)).unwrap();
    assert!(iso.report.defect < 1e-6, "{}", iso.report.defect);
}

#[test]
fn graph_defect_decreases_under_refinement() {
    let spec = ShapeSpec::Graph2 {
        amplitude: 0.05,
        modes: vec![(1, 0)],
        periodic: false,
    };
    let d: Vec<f64> = [33, 65]
        .iter()
        .map(|&r| {
            let chart = generate(&spec, r).unwrap().charts.remove(0);
            isothermal_coordinates(&chart, &cfg4())
                .unwrap()
                .report
                .defect
        })
        .collect();
    assert!(d[1] < 1e-3 && (d[0] / d[1]).log2() >= 1.0, "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_signed_rhs_gives_opposite_sign(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::cube(2, 17, 0.0, 1.0);
        let rhs: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let coeff = vec![[1.0, 0.0, 1.0]; grid.len()];
        let s = solve_divform(&EllipticProblem { grid, coeff, rhs, degree: 1 }).unwrap();
        prop_assert!(s.u.iter().all(|&v| v <= 1e-14));
    }

    #[test]
    fn theta_is_energy_minimizing(seed in 0u64..10_000) {
        let spec = ShapeSpec::Graph2 { amplitude: 0.05, modes: vec![(1, 1), (2, 1)], periodic: false };
        let chart = generate(&spec, 33).unwrap().charts.remove(0);
        let st = coulomb_frame(&chart, &cfg4()).unwrap();
        let e0 = st.theta_energy(&st.theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kx, ky, ph): (f64, f64, f64) = (rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.0..6.3));
        let pert: Vec<f64> = (0..chart.len())
            .map(|i| {
                let c = chart.grid.coords(i);
                st.theta[i] + 0.01 * (kx * c[0] + ky * c[1] + ph).sin()
            })
            .collect();
        prop_assert!(st.theta_energy(&pert).unwrap() >= e0);
    }
}
