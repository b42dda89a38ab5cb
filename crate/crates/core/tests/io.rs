use proptest::prelude::*;
use std::fs;
use wkit::chart::Atlas;
use wkit::io::*;
use wkit::shapes::{generate, ShapeSpec};
use wkit::WkitError;

fn same(a: &Atlas, b: &Atlas) {
    assert_eq!((a.m, a.n, a.closed), (b.m, b.n, b.closed));
    assert_eq!(a.charts.len(), b.charts.len());
    for (x, y) in a.charts.iter().zip(&b.charts) {
        assert_eq!(x.grid, y.grid);
        let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&x.interleaved()), bits(&y.interleaved()));
        assert_eq!(x.weight.as_deref().map(bits), y.weight.as_deref().map(bits));
        assert_eq!(x.period_shift, y.period_shift);
    }
}

#[test]
fn atlases_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = [
        ShapeSpec::unit_sphere2(),
        ShapeSpec::willmore_torus(),
        ShapeSpec::Graph2 {
            amplitude: 0.1,
            modes: vec![(1, 2)],
            periodic: true,
        },
        ShapeSpec::InvertedCatenoidPatch,
    ];
    for (k, spec) in shapes.iter().enumerate() {
        let atlas = generate(spec, 17).unwrap();
        for csv in [false, true] {
            let path = dir
                .path()
                .join(format!("shape{k}{}.json", if csv { "c" } else { "" }));
            let written = save_atlas(&path, &atlas, Some(spec), csv).unwrap();
            let (back, manifest) = load_atlas(&path).unwrap();
            same(&atlas, &back);
            assert_eq!(written, manifest);
            assert_eq!(manifest.shape.as_ref(), Some(spec));
        }
    }
}

#[test]
fn csv_files_have_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    save_atlas(
        &path,
        &generate(&ShapeSpec::unit_sphere2(), 9).unwrap(),
        None,
        true,
    )
    .unwrap();
    let text = fs::read_to_string(dir.path().join("s.0.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2,x3"));
    assert_eq!(text.lines().count(), 1 + 81);
}

#[test]
fn malformed_manifests_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    save_atlas(
        &path,
        &generate(&ShapeSpec::unit_sphere2(), 9).unwrap(),
        None,
        false,
    )
    .unwrap();
    let good = fs::read_to_string(&path).unwrap();

    fs::write(&path, good.replace("\"version\": 1", "\"version\": 7")).unwrap();
    assert!(matches!(load_atlas(&path), Err(WkitError::Format(_))));

    fs::write(&path, good.replace("\"n\": 2", "\"n\": 3")).unwrap();
    assert!(matches!(load_atlas(&path), Err(WkitError::Format(_))));

    fs::write(&path, "{ not json").unwrap();
    assert!(matches!(load_atlas(&path), Err(WkitError::Json(_))));
}

#[test]
fn truncated_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    save_atlas(
        &path,
        &generate(&ShapeSpec::unit_sphere2(), 9).unwrap(),
        None,
        false,
    )
    .unwrap();
    let data = dir.path().join("s.0.f64");
    let bytes = fs::read(&data).unwrap();
    fs::write(&data, &bytes[..bytes.len() - 8]).unwrap();
    assert!(load_atlas(&path).is_err());
    fs::remove_file(&data).unwrap();
    assert!(matches!(load_atlas(&path), Err(WkitError::Io(_))));
}

#[test]
fn report_json_round_trips() {
    let mut r = Report::new(vec!["energy".into()], 42);
    r.insert("value", 0.1 + 0.2).unwrap();
    r.insert("tiny", 5e-324).unwrap();
    r.time("stage", 1.5);
    r.check("ok", true);
    r.check("broken", false);
    let back = Report::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(!back.pass);
    assert_eq!(back.failures, vec!["broken".to_string()]);
    assert!(back.canonical().timings.is_empty());
}

#[test]
fn atomic_write_leaves_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.txt");
    atomic_write(&path, b"one").unwrap();
    atomic_write(&path, b"two").unwrap();
    assert_eq!(fs::read(&path).unwrap(), b"two");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

proptest! {
    #[test]
    fn binary_encoding_is_exact(v in prop::collection::vec(any::<f64>(), 0..64)) {
        let back = decode_f64_le(&encode_f64_le(&v)).unwrap();
        prop_assert_eq!(
            v.iter().map(|f| f.to_bits()).collect::<Vec<_>>(),
            back.iter().map(|f| f.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn csv_encoding_is_exact(rows in prop::collection::vec(prop::array::uniform3(-1e300f64..1e300), 1..32)) {
        let v: Vec<f64> = rows.iter().flatten().cloned().collect();
        prop_assert_eq!(decode_csv(&encode_csv(&v, 3), 3).unwrap(), v);
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = to_json_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }
}
