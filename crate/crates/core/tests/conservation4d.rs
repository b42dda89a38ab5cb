use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wkit::chart::ChartGrid;
use wkit::conservation4d::*;
use wkit::geometry::DiagnosticsConfig;
use wkit::shapes::{generate, ShapeSpec};

fn sphere_patch(res: usize) -> ChartGrid {
    let spec = ShapeSpec::SpherePatch {
        n: 4,
        radius: 1.0,
        half_width: 1.0,
    };
    generate(&spec, res).unwrap().charts.remove(0)
}

/// Random rotation of ℝ⁵ by Gram-Schmidt on a random matrix.
fn rotation5(rng: &mut impl Rng) -> [[f64; 5]; 5] {
    let mut q = [[0.0; 5]; 5];
    for i in 0..5 {
        let mut v: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        for j in 0..i {
            let d: f64 = (0..5).map(|k| v[k] * q[j][k]).sum();
            for k in 0..5 {
                v[k] -= d * q[j][k];
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q[i] = v.map(|x| x / n);
    }
    q
}

fn sups(chart: &ChartGrid) -> Vec<f64> {
    let s = Hypersurface::new(chart, &DiagnosticsConfig::with_order(4)).unwrap();
    let (dil, rot) = noether4_residuals_of(&s, None).unwrap();
    vec![el4_residual_of(&s).sup, dil.sup, rot.sup]
}

#[test]
fn identity_suite_holds_on_random_points() {
    let d = hsr_random_suite(300, 42).unwrap();
    assert!(d.max() <= 1e-12, "{d:?}");
}

#[test]
fn identities_hold_on_sampled_sphere_data() {
    let s = Hypersurface::new(&sphere_patch(10), &DiagnosticsConfig::with_order(4)).unwrap();
    let d = hsr_on_chart(&s, None, 3).unwrap();
    assert!(d.max() <= 1e-10, "{d:?}");
}

#[test]
fn sphere_residual_decreases_under_refinement() {
    let (coarse, fine) = (sups(&sphere_patch(10))[0], sups(&sphere_patch(14))[0]);
    assert!(fine < coarse, "{coarse} → {fine}");
}

#[test]
fn tension_has_twenty_blades() {
    let v = tension4(&sphere_patch(8), &DiagnosticsConfig::with_order(4)).unwrap();
    assert_eq!(v.blades.len(), 20);
    assert!(v.max_abs() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn residuals_are_rotation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rotation5(&mut rng);
        let chart = sphere_patch(9);
        let turned = chart.map_points(|p| (0..5).map(|i| (0..5).map(|k| q[i][k] * p[k]).sum()).collect());
        for (a, b) in sups(&chart).iter().zip(sups(&turned)) {
            prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-6), "{} vs {}", a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pointwise_identities_with_any_l(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = HsrPoint::random(&mut rng);
        let l = random_l(&mut rng);
        let d = hsr_identity_check(&p, &l).unwrap();
        prop_assert!(d.max() <= 1e-10, "{:?}", d);
    }
}
