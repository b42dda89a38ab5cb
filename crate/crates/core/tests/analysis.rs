use proptest::prelude::*;
use std::f64::consts::PI;
use wkit::analysis::*;
use wkit::geometry::DiagnosticsConfig;
use wkit::grid::Grid;
use wkit::shapes::{generate, ShapeSpec};
use wkit::WkitError;

fn cfg() -> DiagnosticsConfig {
    DiagnosticsConfig::with_order(4)
}

fn radii(h: f64) -> Vec<f64> {
    (0..5)
        .map(|i| 16.0 * h * 2f64.powf(-0.5 * i as f64))
        .collect()
}

#[test]
fn sphere_density_is_one_on_and_zero_off() {
    let atlas = generate(&ShapeSpec::unit_sphere2(), 64).unwrap();
    let h = atlas.charts[0].grid.axes[0].h();
    let on = density_at(&atlas, &[0.6, 0.0, 0.8], &radii(h), &cfg()).unwrap();
    assert_eq!(on.rounded, 1);
    assert!(on.distance_to_integer < 0.05, "{on:?}");
    let off = density_at(&atlas, &[0.0, 0.0, 0.0], &radii(h), &cfg()).unwrap();
    assert_eq!(off.rounded, 0);
}

#[test]
fn double_cover_has_density_two() {
    let atlas = generate(&ShapeSpec::DoubleSphere2, 64).unwrap();
    let h = atlas.charts[0].grid.axes[0].h();
    let d = density_at(&atlas, &[0.0, 1.0, 0.0], &radii(h), &cfg()).unwrap();
    assert_eq!(d.rounded, 2);
}

#[test]
fn density_rejects_bad_input() {
    let atlas = generate(&ShapeSpec::unit_sphere2(), 32).unwrap();
    let up = [0.1, 0.2];
    assert!(matches!(
        density_at(&atlas, &[0.0, 0.0, 1.0], &up, &cfg()),
        Err(WkitError::RadiiNotDecreasing)
    ));
    assert!(matches!(
        density_at(&atlas, &[0.0, 1.0], &[0.2, 0.1], &cfg()),
        Err(WkitError::DimensionMismatch { .. })
    ));
    let patch = generate(&ShapeSpec::CatenoidPatch, 17).unwrap();
    assert!(matches!(
        density_at(&patch, &[0.0; 3], &[0.2, 0.1], &cfg()),
        Err(WkitError::OpenPatch)
    ));
}

#[test]
fn unit_ball_volumes_match_closed_forms() {
    assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
}

#[test]
fn morrey_norm_of_constant_is_ball_volume() {
    // with λ = n the norm of 1 is (sup r⁻ⁿ|B_r|) = |Bⁿ|
    let grid = Grid::cube(2, 65, 0.0, 1.0);
    let ones = vec![1.0; grid.len()];
    let m = morrey_norm(&grid, &ones, 1.0, 2.0, 0.2, None).unwrap();
    assert!((m / PI - 1.0).abs() < 0.1, "{m}");
    assert!(morrey_norm(&grid, &ones, 0.5, 2.0, 0.2, None).is_err());
}

#[test]
fn mollifying_keeps_linear_maps() {
    let spec = ShapeSpec::Graph2 {
        amplitude: 0.0,
        modes: vec![(1, 1)],
        periodic: true,
    };
    let chart = generate(&spec, 32).unwrap().charts.remove(0);
    let m = mollify(&chart, 0.1, &cfg()).unwrap();
    for i in 0..chart.len() {
        let (a, b) = (chart.point(i), m.chart.point(i));
        assert!((0..3).all(|k| (a[k] - b[k]).abs() < 1e-12));
    }
    assert!((m.lambda - 1.0).abs() < 1e-10);
}

#[test]
fn mollifier_must_fit_the_chart() {
    let spec = ShapeSpec::Graph2 {
        amplitude: 0.05,
        modes: vec![(1, 1)],
        periodic: true,
    };
    let chart = generate(&spec, 32).unwrap().charts.remove(0);
    assert!(matches!(
        mollify(&chart, 0.9, &cfg()),
        Err(WkitError::EpsilonTooLarge { .. })
    ));
}

#[test]
fn mollified_kink_approaches_input() {
    let chart = generate(&ShapeSpec::KinkedGraph2 { amplitude: 0.05 }, 64)
        .unwrap()
        .charts
        .remove(0);
    let h = chart.grid.axes[0].h();
    let d: Vec<f64> = [8.0, 4.0, 2.0]
        .iter()
        .map(|k| {
            w22_distance(
                &chart,
                &mollify(&chart, k * h, &cfg()).unwrap().chart,
                &cfg(),
            )
            .unwrap()
        })
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oscillation_grows_with_radius(r in 0.05f64..0.3, slope in 0.1f64..3.0) {
        let grid = Grid::cube(2, 33, 0.0, 1.0);
        let f: Vec<f64> = (0..grid.len()).map(|i| slope * grid.coords(i)[0]).collect();
        let small = vmo_modulus(&grid, &f, r);
        let large = vmo_modulus(&grid, &f, r * 1.5);
        prop_assert!(small > 0.0 && small <= large);
    }

    #[test]
    fn density_is_translation_invariant(t in -3.0f64..3.0) {
        let atlas = generate(&ShapeSpec::Sphere2 { radius: 1.0, center: [t, 0.5 * t, -t] }, 48).unwrap();
        let h = atlas.charts[0].grid.axes[0].h();
        let d = density_at(&atlas, &[t, 0.5 * t, 1.0 - t], &radii(h), &cfg()).unwrap();
        prop_assert_eq!(d.rounded, 1);
        prop_assert!(d.distance_to_integer < 0.05);
    }
}
