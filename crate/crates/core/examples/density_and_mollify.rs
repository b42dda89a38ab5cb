//! Densities of the image measure and mollification of a Lipschitz graph.
//!
//!     cargo run --release --example density_and_mollify

use wkit::analysis::{density_at, mollify, w22_distance};
use wkit::geometry::{check_weak_immersion, DiagnosticsConfig};
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let cfg = DiagnosticsConfig::default();
    let sphere = generate(&ShapeSpec::unit_sphere2(), 64)?;
    let double = generate(&ShapeSpec::DoubleSphere2, 64)?;
    let h = sphere.charts[0].grid.axes[0].h();
    let radii: Vec<f64> = (0..5)
        .map(|i| 16.0 * h * 2f64.powf(-0.5 * i as f64))
        .collect();
    for (name, atlas, y) in [
        ("sphere, on", &sphere, [0.0, 0.6, 0.8]),
        ("sphere, off", &sphere, [0.0, 0.0, 1.8]),
        ("double cover", &double, [1.0, 0.0, 0.0]),
    ] {
        let d = density_at(atlas, &y, &radii, &cfg)?;
        println!("{name:<13} θ ≈ {:.4} → {}", d.limit, d.rounded);
    }

    let kink = generate(&ShapeSpec::KinkedGraph2 { amplitude: 0.05 }, 64)?
        .charts
        .remove(0);
    let h = kink.grid.axes[0].h();
    let lam = check_weak_immersion(&kink, cfg.lambda, &cfg)?.lambda_needed;
    println!("\nkinked graph: Λ = {lam:.4}");
    for k in [16.0, 8.0, 4.0, 2.0] {
        let m = mollify(&kink, k * h, &cfg)?;
        println!(
            "ε = {k:>2}h: Λ = {:.4}, W2,2 distance to input {:.3}",
            m.lambda,
            w22_distance(&kink, &m.chart, &cfg)?
        );
    }
    Ok(())
}
