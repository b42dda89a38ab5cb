//! Writing and reading chart manifests, and the JSON report format.
//!
//!     cargo run --release --example chart_files

use wkit::io::{load_atlas, save_atlas, Report};
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let dir = tempfile::tempdir()?;
    let spec = ShapeSpec::willmore_torus();
    let atlas = generate(&spec, 32)?;
    let path = dir.path().join("torus.json");
    let manifest = save_atlas(&path, &atlas, Some(&spec), false)?;
    println!(
        "wrote {} chart(s): {:?}",
        manifest.charts.len(),
        manifest.charts[0].data_file
    );
    let (back, _) = load_atlas(&path)?;
    let same = atlas.charts[0]
        .interleaved()
        .iter()
        .zip(back.charts[0].interleaved())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("bit-exact round trip: {same}");

    let mut report = Report::new(vec!["example".into()], 42);
    report.insert("nodes", back.total_nodes())?;
    report.check("round trip", same);
    print!("{}", report.canonical().to_json()?);
    Ok(())
}
