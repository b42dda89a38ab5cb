//! Coulomb frames and isothermal coordinates on a graph patch.
//!
//!     cargo run --release --example coulomb_frame

use wkit::elliptic::{coulomb_frame, isothermal_coordinates};
use wkit::geometry::DiagnosticsConfig;
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let cfg = DiagnosticsConfig::default();
    for amplitude in [0.006, 0.02, 0.05] {
        let spec = ShapeSpec::Graph2 {
            amplitude,
            modes: vec![(1, 1)],
            periodic: false,
        };
        let chart = generate(&spec, 65)?.charts.remove(0);
        let frame = coulomb_frame(&chart, &cfg)?.report;
        let iso = isothermal_coordinates(&chart, &cfg)?.report;
        println!(
            "amplitude {amplitude}: ∫|K| = {:.4} (small: {}), frame energy {:.4} ≤ bound {:.4}; conformality defect {:.2e}, det ≥ {:.3} holds: {}",
            frame.total_abs_curvature,
            frame.small_curvature,
            frame.frame_energy,
            frame.bound,
            iso.defect,
            iso.det_lower_bound,
            iso.det_bound_holds
        );
    }
    Ok(())
}
