use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use wkit::chart::ChartGrid;
use wkit::geometry::*;
use wkit::grid::Grid;
use wkit::shapes::*;
use wkit::WkitError;

fn cfg(order: usize) -> DiagnosticsConfig {
    DiagnosticsConfig::with_order(order)
}

fn graph(f: impl Fn(f64, f64) -> f64, res: usize) -> ChartGrid {
    ChartGrid::from_fn(Grid::cube(2, res, -0.5, 0.5), 3, |x| {
        vec![x[0], x[1], f(x[0], x[1])]
    })
    .unwrap()
}

/// Rotation from three Euler angles.
fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| {
        [
            [t.cos(), -t.sin(), 0.0],
            [t.sin(), t.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]
    };
    let rx = |t: f64| {
        [
            [1.0, 0.0, 0.0],
            [0.0, t.cos(), -t.sin()],
            [0.0, t.sin(), t.cos()],
        ]
    };
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
            }
        }
        r
    };
    mul(mul(rz(a), rx(b)), rz(c))
}

#[test]
fn unit_sphere_has_unit_curvatures() {
    let atlas = generate(&ShapeSpec::unit_sphere2(), 64).unwrap();
    for chart in &atlas.charts {
        let geo = geometry(chart, &cfg(4)).unwrap();
        for i in geo.interior_nodes() {
            let p = &geo.points[i];
            assert!((p.h + 1.0).abs() < 1e-3, "H = {}", p.h);
            assert!((p.k - 1.0).abs() < 1e-3, "K = {}", p.k);
            // outward normal equals the position on the unit sphere
            let x = chart.point(i);
            assert!((0..3).all(|a| (p.normal[a] - x[a]).abs() < 1e-4));
        }
    }
}

#[test]
fn mean_curvature_scales_inversely_with_radius() {
    let spec = ShapeSpec::Sphere2 {
        radius: 2.5,
        center: [1.0, -2.0, 0.5],
    };
    let chart = &generate(&spec, 48).unwrap().charts[0];
    let geo = geometry(chart, &cfg(4)).unwrap();
    let i = geo.interior_nodes()[0];
    assert!((geo.points[i].h + 0.4).abs() < 1e-3);
    assert!((geo.points[i].k - 0.16).abs() < 1e-3);
}

#[test]
fn mean_curvature_identity_on_the_sphere() {
    let chart = &generate(&ShapeSpec::unit_sphere2(), 64).unwrap().charts[0];
    assert!(mean_identity_residual(chart, &cfg(8)).unwrap() < 1e-6);
}

#[test]
fn four_sphere_has_unit_mean_curvature() {
    let chart = &generate(
        &ShapeSpec::SpherePatch {
            n: 4,
            radius: 1.0,
            half_width: 1.0,
        },
        12,
    )
    .unwrap()
    .charts[0];
    let geo = geometry(chart, &cfg(4)).unwrap();
    for i in geo.interior_nodes() {
        assert!(
            (geo.points[i].h.abs() - 1.0).abs() < 1e-3,
            "{}",
            geo.points[i].h
        );
    }
}

#[test]
fn torus_gauss_curvature_matches_profile() {
    // K = cos v / (r (R + r cos v)) on the torus of revolution
    let (big, small) = (2.0, 0.5);
    let chart = &generate(
        &ShapeSpec::TorusRevolution {
            big_r: big,
            small_r: small,
        },
        64,
    )
    .unwrap()
    .charts[0];
    let geo = geometry(chart, &cfg(4)).unwrap();
    let err = (0..chart.len())
        .map(|i| {
            let x = chart.point(i);
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let cos_v = (rho - big) / small;
            (geo.points[i].k - cos_v / (small * rho)).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn invalid_parameters_are_rejected() {
    for spec in [
        ShapeSpec::Sphere2 {
            radius: -1.0,
            center: [0.0; 3],
        },
        ShapeSpec::TorusRevolution {
            big_r: 0.5,
            small_r: 1.0,
        },
        ShapeSpec::Ellipsoid2 {
            axes: [1.0, 0.0, 1.0],
        },
    ] {
        assert!(matches!(
            generate(&spec, 16),
            Err(WkitError::InvalidShape(_))
        ));
    }
}

#[test]
fn stereographic_atlas_has_two_weighted_charts() {
    let atlas = stereographic_atlas(2, 33).unwrap();
    assert!(atlas.closed);
    assert_eq!(atlas.charts.len(), 2);
    for chart in &atlas.charts {
        assert!(chart
            .weight
            .as_ref()
            .unwrap()
            .iter()
            .all(|w| (0.0..=1.0).contains(w)));
    }
}

#[test]
fn degenerate_chart_is_not_a_weak_immersion() {
    // the fold x ↦ x² collapses the metric along x = 0
    let chart = ChartGrid::from_fn(Grid::cube(2, 33, -1.0, 1.0), 3, |x| {
        vec![x[0] * x[0], x[1], 0.0]
    })
    .unwrap();
    let r = check_weak_immersion(&chart, 16.0, &cfg(4)).unwrap();
    assert!(!r.pass);
    assert!(r.min_eigenvalue < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_gauss_curvature_matches_formula(a in 0.01f64..0.2, kx in 1u32..3, ky in 1u32..3) {
        let (wx, wy) = (TAU * kx as f64, TAU * ky as f64);
        let chart = graph(|x, y| a * (wx * x).sin() * (wy * y).sin(), 65);
        let geo = geometry(&chart, &cfg(6)).unwrap();
        let scale = a * a * wx * wx * wy * wy;
        let err = geo.interior_sup(|i| {
            let c = chart.grid.coords(i);
            let (sx, cx, sy, cy) = ((wx * c[0]).sin(), (wx * c[0]).cos(), (wy * c[1]).sin(), (wy * c[1]).cos());
            let (ux, uy) = (a * wx * cx * sy, a * wy * sx * cy);
            let (uxx, uyy, uxy) = (-a * wx * wx * sx * sy, -a * wy * wy * sx * sy, a * wx * wy * cx * cy);
            let k = (uxx * uyy - uxy * uxy) / (1.0 + ux * ux + uy * uy).powi(2);
            (geo.points[i].k - k).abs()
        });
        prop_assert!(err < 1e-5 * scale, "{} vs {}", err, scale);
    }

    #[test]
    fn curvatures_are_invariant_under_rigid_motions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rotation(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let t: [f64; 3] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let base = graph(|x, y| 0.1 * (TAU * x).sin() * (TAU * y).cos(), 33);
        let moved = base.map_points(|p| (0..3).map(|i| t[i] + (0..3).map(|j| r[i][j] * p[j]).sum::<f64>()).collect());
        let (g0, g1) = (geometry(&base, &cfg(4)).unwrap(), geometry(&moved, &cfg(4)).unwrap());
        for i in 0..base.len() {
            prop_assert!((g0.points[i].h - g1.points[i].h).abs() < 1e-9);
            prop_assert!((g0.points[i].k - g1.points[i].k).abs() < 1e-9);
        }
    }

    #[test]
    fn dilation_scales_mean_curvature(s in 0.2f64..5.0) {
        let base = graph(|x, y| 0.1 * (TAU * x).cos() * (TAU * y).sin(), 33);
        let scaled = base.map_points(|p| p.iter().map(|v| s * v).collect());
        let (g0, g1) = (geometry(&base, &cfg(4)).unwrap(), geometry(&scaled, &cfg(4)).unwrap());
        for i in 0..base.len() {
            prop_assert!((g1.points[i].h * s - g0.points[i].h).abs() < 1e-9 * (1.0 + g0.points[i].h.abs()));
        }
    }

    #[test]
    fn inversion_is_an_involution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: [f64; 3] = [rng.gen_range(1.0..2.0), rng.gen_range(-1.0..1.0), 0.5];
        let chart = graph(|x, y| 0.1 * x * y, 9).map_points(|p| vec![p[0] + c[0], p[1] + c[1], p[2] + c[2]]);
        let twice = invert(&invert(&chart, 1e-6).unwrap(), 1e-6).unwrap();
        for i in 0..chart.len() {
            let (a, b) = (chart.point(i), twice.point(i));
            prop_assert!((0..3).all(|k| (a[k] - b[k]).abs() < 1e-12));
        }
    }
}
