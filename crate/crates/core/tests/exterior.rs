use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wkit::exterior::*;
use wkit::WkitError;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn thousand_random_draws_satisfy_all_identities() {
    let d = identity_random_suite(1000, 42).unwrap();
    assert!(d.max() <= 1e-10, "{d:?}");
}

#[test]
fn suite_is_deterministic_in_the_seed() {
    let a = identity_random_suite(50, 7).unwrap();
    let b = identity_random_suite(50, 7).unwrap();
    assert_eq!(a.max(), b.max());
}

#[test]
fn euclidean_star_maps_dx1_to_dx2() {
    let g = Metric::euclidean(2);
    let mut a = FormValue::zero(2);
    a.set(&[0], 1.0);
    let s = a.hodge_star(&g).unwrap();
    assert_eq!(s.get(&[1]), 1.0);
    assert_eq!(s.get(&[0]), 0.0);
}

#[test]
fn star_of_volume_is_one() {
    for n in [2, 4] {
        let g = random_metric(&mut rng(n as u64), n);
        let s = FormValue::volume(&g).hodge_star(&g).unwrap();
        assert!((s.get(&[]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cross_product_of_basis_vectors() {
    let e1 = Multivector::vector(&[1.0, 0.0, 0.0]);
    let e2 = Multivector::vector(&[0.0, 1.0, 0.0]);
    assert_eq!(e1.cross(&e2).unwrap().to_vector(), vec![0.0, 0.0, 1.0]);
    let four = Multivector::vector(&[1.0, 0.0, 0.0, 0.0]);
    assert!(matches!(
        four.cross(&four),
        Err(WkitError::CrossUnavailable)
    ));
}

#[test]
fn mismatched_dimensions_are_errors() {
    let a = FormValue::zero(2);
    let b = FormValue::zero(4);
    assert!(matches!(
        a.wedge(&b),
        Err(WkitError::DimensionMismatch { .. })
    ));
    assert!(a.hodge_star(&Metric::euclidean(4)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_hold_for_any_seed(seed in any::<u64>(), four in any::<bool>()) {
        let mut r = rng(seed);
        let n = if four { 4 } else { 2 };
        let g = random_metric(&mut r, n);
        let (p, q) = (r.gen_range(0..=n), r.gen_range(0..=n));
        let a = random_form(&mut r, n, p);
        let b = random_form(&mut r, n, q);
        let v = random_form(&mut r, n, 1);
        let d = identity_check(&g, &a, p, &b, q, &v).unwrap();
        prop_assert!(d.max() <= 1e-10, "{:?}", d);
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 4;
        let (p, q) = (r.gen_range(0..=n), r.gen_range(0..=n));
        let a = random_form(&mut r, n, p);
        let b = random_form(&mut r, n, q);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(sign(p * q));
        prop_assert!(ab.sub(&ba).max_abs() < 1e-14);
    }

    #[test]
    fn wedge_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f: Vec<FormValue> = (0..3).map(|_| {
            let k = r.gen_range(0..=2);
            random_form(&mut r, 4, k)
        }).collect();
        let left = f[0].wedge(&f[1]).unwrap().wedge(&f[2]).unwrap();
        let right = f[0].wedge(&f[1].wedge(&f[2]).unwrap()).unwrap();
        prop_assert!(left.sub(&right).max_abs() < 1e-13);
    }

    #[test]
    fn metric_pairing_is_positive(seed in any::<u64>(), k in 0usize..=4) {
        let mut r = rng(seed);
        let g = random_metric(&mut r, 4);
        let a = random_form(&mut r, 4, k);
        prop_assert!(a.inner(&g, &a).unwrap() > 0.0);
    }

    #[test]
    fn star_is_an_isometry(seed in any::<u64>(), k in 0usize..=4) {
        let mut r = rng(seed);
        let g = random_metric(&mut r, 4);
        let a = random_form(&mut r, 4, k);
        let s = a.hodge_star(&g).unwrap();
        let (x, y) = (a.inner(&g, &a).unwrap(), s.inner(&g, &s).unwrap());
        prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0));
    }
}
