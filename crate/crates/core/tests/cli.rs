use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use wkit::cli::run_command;
use wkit::io::{load_atlas, Report};

fn wkit(args: &[&str]) -> i32 {
    let mut argv = vec!["wkit", "--quiet"];
    argv.extend_from_slice(args);
    run_command(argv)
}

fn read(path: &Path) -> Report {
    Report::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }
    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

#[test]
fn gen_then_energy_reports_four_pi() {
    let d = Dir::new();
    let (m, r) = (d.path("s.json"), d.path("r.json"));
    assert_eq!(
        wkit(&["gen", "--shape", "sphere2", "--res", "48", "--out", s(&m)]),
        0
    );
    assert_eq!(wkit(&["energy", "--in", s(&m), "--report", s(&r)]), 0);
    let rep = read(&r);
    assert!(rep.pass);
    assert_eq!(rep.results["shape"], "sphere2");
    let w = rep.results["energy"][0]["value"].as_f64().unwrap();
    assert!((w / (4.0 * PI) - 1.0).abs() < 5e-3);
    assert_eq!(
        rep.results["invariants"]["gauss_bonnet_integer"]["pass"],
        true
    );
}

#[test]
fn reports_are_deterministic() {
    let d = Dir::new();
    let r = d.path("r.json");
    let run = |args: &[&str]| {
        let mut a = args.to_vec();
        a.extend_from_slice(&["--report", s(&r)]);
        assert_eq!(wkit(&a), 0);
        read(&r).canonical()
    };
    let wente = [
        "wente",
        "--draws",
        "3",
        "--res",
        "17",
        "--disk-res",
        "33",
        "--seed",
        "9",
    ];
    assert_eq!(
        run(&wente).to_json().unwrap(),
        run(&wente).to_json().unwrap()
    );
    let flow = [
        "flow",
        "--amplitude",
        "0.01",
        "--modes",
        "1,1",
        "--tend",
        "1e-3",
    ];
    assert_eq!(run(&flow).to_json().unwrap(), run(&flow).to_json().unwrap());
}

#[test]
fn exit_codes() {
    let d = Dir::new();
    let (m, r) = (d.path("c.json"), d.path("r.json"));
    // usage errors
    assert_eq!(wkit(&["gen", "--shape", "cube", "--out", s(&m)]), 2);
    assert_eq!(wkit(&["energy"]), 2);
    assert_eq!(wkit(&["no-such-command"]), 2);
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "sphere2",
            "--radius",
            "-1",
            "--out",
            s(&m)
        ]),
        2
    );
    // rejected input: totals over an open patch need --patch-ok
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "catenoid_patch",
            "--res",
            "33",
            "--out",
            s(&m)
        ]),
        0
    );
    assert_eq!(wkit(&["energy", "--in", s(&m), "--report", s(&r)]), 2);
    assert_eq!(
        wkit(&["energy", "--in", s(&m), "--patch-ok", "--report", s(&r)]),
        0
    );
    // failed assertion
    assert_eq!(
        wkit(&[
            "residual",
            "--in",
            s(&m),
            "--max",
            "1e-30",
            "--report",
            s(&r)
        ]),
        1
    );
    let rep = read(&r);
    assert!(!rep.pass && !rep.failures.is_empty());
    // I/O
    assert_eq!(wkit(&["energy", "--in", s(&d.path("missing.json"))]), 3);
    assert_eq!(wkit(&["--help"]), 0);
}

#[test]
fn flow_writes_trace() {
    let d = Dir::new();
    let (t, r) = (d.path("trace.csv"), d.path("r.json"));
    let args = [
        "flow",
        "--amplitude",
        "0.01",
        "--modes",
        "1,0",
        "--out",
        s(&t),
        "--report",
        s(&r),
    ];
    assert_eq!(wkit(&args), 0);
    let trace = fs::read_to_string(&t).unwrap();
    assert_eq!(trace.lines().next(), Some("t,W,sup_u,sup_dn,tau"));
    let rep = read(&r);
    assert_eq!(rep.results["summary"]["flag"], "converged");
    assert_eq!(rep.results["summary"]["monotone"], true);
}

#[test]
fn mollify_writes_a_loadable_atlas() {
    let d = Dir::new();
    let (k, o, r) = (d.path("k.json"), d.path("km.json"), d.path("r.json"));
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "kinked_graph2",
            "--res",
            "32",
            "--out",
            s(&k)
        ]),
        0
    );
    assert_eq!(
        wkit(&[
            "mollify",
            "--in",
            s(&k),
            "--out",
            s(&o),
            "--csv",
            "--report",
            s(&r)
        ]),
        0
    );
    let (atlas, _) = load_atlas(&o).unwrap();
    assert_eq!(atlas.charts[0].len(), 32 * 32);
    let lam = read(&r).results["charts"][0]["lambda_mollified"]
        .as_f64()
        .unwrap();
    assert!(lam >= 1.0 && lam < 1.2);
}

#[test]
fn noether_and_curvature_dump_fields() {
    let d = Dir::new();
    let (m, f, g, r) = (
        d.path("c.json"),
        d.path("n.csv"),
        d.path("k.csv"),
        d.path("r.json"),
    );
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "inverted_catenoid_patch",
            "--res",
            "33",
            "--out",
            s(&m)
        ]),
        0
    );
    assert_eq!(
        wkit(&[
            "noether",
            "--in",
            s(&m),
            "--fields-out",
            s(&f),
            "--report",
            s(&r)
        ]),
        0
    );
    assert_eq!(
        read(&r).results["charts"][0]["residuals"]
            .as_array()
            .unwrap()
            .len(),
        7
    );
    assert_eq!(fs::read_to_string(&f).unwrap().lines().count(), 1 + 33 * 33);
    assert_eq!(
        wkit(&[
            "curvature",
            "--in",
            s(&m),
            "--fields-out",
            s(&g),
            "--report",
            s(&r)
        ]),
        0
    );
    assert!(fs::read_to_string(&g)
        .unwrap()
        .starts_with("chart,node,H,K\n"));
}

#[test]
fn density_at_sphere_points() {
    let d = Dir::new();
    let (m, r) = (d.path("s.json"), d.path("r.json"));
    assert_eq!(
        wkit(&["gen", "--shape", "sphere2", "--res", "48", "--out", s(&m)]),
        0
    );
    assert_eq!(
        wkit(&[
            "density",
            "--in",
            s(&m),
            "--point",
            "0,0,1",
            "--point",
            "0,0,0",
            "--report",
            s(&r)
        ]),
        0
    );
    let rep = read(&r);
    assert_eq!(rep.results["points"][0]["density"]["rounded"], 1);
    assert_eq!(rep.results["points"][1]["density"]["rounded"], 0);
}

#[test]
fn report_all_runs_selected_criteria() {
    let d = Dir::new();
    let r = d.path("r.json");
    assert_eq!(wkit(&["report-all", "--only", "2,4", "--report", s(&r)]), 0);
    let rep = read(&r);
    let c = rep.results["criteria"].as_array().unwrap();
    assert_eq!(c.len(), 2);
    assert!(c.iter().all(|x| x["pass"] == true));
    assert_eq!(wkit(&["report-all", "--only", "99"]), 2);
}

#[test]
fn negative_coordinates_parse() {
    let d = Dir::new();
    let (m, r) = (d.path("s.json"), d.path("r.json"));
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "sphere2",
            "--center",
            "-1,0,0.5",
            "--res",
            "32",
            "--out",
            s(&m)
        ]),
        0
    );
    assert_eq!(
        wkit(&[
            "density",
            "--in",
            s(&m),
            "--point",
            "-1,0,-0.5",
            "--report",
            s(&r)
        ]),
        0
    );
    assert_eq!(read(&r).results["points"][0]["density"]["rounded"], 1);
    assert_eq!(
        wkit(&[
            "gen",
            "--shape",
            "ellipsoid2",
            "--axes",
            "1,2",
            "--out",
            s(&m)
        ]),
        2
    );
}

#[test]
fn clap_definitions_are_consistent() {
    use clap::CommandFactory;
    wkit::cli::Cli::command().debug_assert();
}
