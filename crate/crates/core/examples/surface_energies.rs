//! Willmore energy, Chern-Lashof total curvature and Gauss-Bonnet on the
//! built-in closed surfaces, next to their exact values.
//!
//!     cargo run --release --example surface_energies

use std::f64::consts::PI;
use wkit::energies::{chern_lashof, constrained_quantities, gauss_bonnet, willmore};
use wkit::geometry::DiagnosticsConfig;
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let cfg = DiagnosticsConfig::default();
    let shapes = [
        ("unit sphere", ShapeSpec::unit_sphere2(), Some(4.0 * PI)),
        (
            "Clifford torus of revolution",
            ShapeSpec::willmore_torus(),
            Some(2.0 * PI * PI),
        ),
        ("double sphere", ShapeSpec::DoubleSphere2, Some(8.0 * PI)),
        (
            "ellipsoid (2,1,1)",
            ShapeSpec::Ellipsoid2 {
                axes: [2.0, 1.0, 1.0],
            },
            None,
        ),
    ];
    println!(
        "{:<30} {:>12} {:>12} {:>12} {:>4}",
        "shape", "W", "exact", "∫|K|", "χ"
    );
    for (name, spec, exact) in shapes {
        let atlas = generate(&spec, 64)?;
        let w = willmore(&atlas, &cfg)?.value;
        let cl = chern_lashof(&atlas, &cfg)?.value;
        let gb = gauss_bonnet(&atlas, &cfg)?;
        let exact = exact.map_or("-".to_string(), |e| format!("{e:.6}"));
        println!(
            "{name:<30} {w:>12.6} {exact:>12} {cl:>12.6} {:>4}",
            gb.euler_characteristic
        );
    }

    let q = constrained_quantities(&generate(&ShapeSpec::unit_sphere2(), 64)?, &cfg)?;
    println!(
        "\nsphere: area {:.6}, volume {:.6}, isoperimetric ratio {:.6} (exact {:.6})",
        q.area,
        q.volume,
        q.isoperimetric,
        (36.0 * PI).powf(1.0 / 3.0)
    );
    Ok(())
}
