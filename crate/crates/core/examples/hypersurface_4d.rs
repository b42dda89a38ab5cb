//! Four-dimensional hypersurfaces in ℝ⁵: the Graham-Reichert and coercive
//! energies, the Euler-Lagrange residual, the Noether currents and the
//! pointwise identity suite.
//!
//!     cargo run --release --example hypersurface_4d

use std::f64::consts::PI;
use wkit::conservation4d::{
    el4_residual_of, hsr_on_chart, hsr_random_suite, noether4_residuals_of, Hypersurface,
};
use wkit::energies::{coercive_energy, dirichlet_h, graham_reichert};
use wkit::geometry::DiagnosticsConfig;
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let cfg = DiagnosticsConfig::with_order(6);
    let sphere = generate(&ShapeSpec::Sphere4 { radius: 1.0 }, 20)?;
    let gr = graham_reichert(&sphere, &cfg)?.value;
    let co = coercive_energy(&sphere, &cfg)?;
    let dh = dirichlet_h(&sphere, &cfg)?.value;
    println!(
        "S⁴ at 20⁴: E_GR = {gr:.6} (exact 8π² = {:.6}), 𝓔 = {:.2e}, ½∫|dH|² = {dh:.2e}",
        8.0 * PI * PI,
        co.energy.value
    );
    drop(sphere);

    let ell = generate(&ShapeSpec::Ellipsoid4 { a: 1.5 }, 16)?;
    let co = coercive_energy(&ell, &DiagnosticsConfig::with_order(4))?;
    println!("ellipsoid a = 1.5 at 16⁴: 𝓔 / control = {:.4}", co.ratio);
    drop(ell);

    let spec = ShapeSpec::SpherePatch {
        n: 4,
        radius: 1.0,
        half_width: 1.0,
    };
    for res in [10, 14] {
        let chart = generate(&spec, res)?.charts.remove(0);
        let s = Hypersurface::new(&chart, &DiagnosticsConfig::with_order(4))?;
        let (dil, rot) = noether4_residuals_of(&s, None)?;
        let hsr = hsr_on_chart(&s, None, 5)?;
        println!(
            "sphere patch {res}⁴: EL {:.2e}, dilation {:.2e}, rotation {:.2e}, pointwise identity {:.1e}",
            el4_residual_of(&s).sup,
            dil.sup,
            rot.sup,
            hsr.max()
        );
    }

    let d = hsr_random_suite(1000, 42)?;
    println!(
        "1000 random frames: {:.1e} {:.1e} {:.1e}",
        d.hsr, d.l_contraction, d.normal_contraction
    );
    Ok(())
}
