//! Pointwise geometry of a sampled immersion: metric bounds, mean and Gauss
//! curvature, and the identity Δ_gΦ = 2H⃗.
//!
//!     cargo run --release --example curvature_fields

use wkit::geometry::{check_weak_immersion, geometry, mean_identity_residual, DiagnosticsConfig};
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let spec = ShapeSpec::Ellipsoid2 {
        axes: [2.0, 1.0, 0.5],
    };
    let atlas = generate(&spec, 64)?;
    for order in [2, 4, 8] {
        let cfg = DiagnosticsConfig::with_order(order);
        let chart = &atlas.charts[0];
        let geo = geometry(chart, &cfg)?;
        let (h, k) = (geo.h_field(), geo.k_field());
        let range = |f: &[f64]| {
            f.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                })
        };
        let weak = check_weak_immersion(chart, cfg.lambda, &cfg)?;
        println!(
            "order {order}: H in [{:.4}, {:.4}], K in [{:.4}, {:.4}], Λ needed {:.3}, |Δ_gΦ − 2H⃗| ≤ {:.2e}",
            range(&h).0,
            range(&h).1,
            range(&k).0,
            range(&k).1,
            weak.lambda_needed,
            mean_identity_residual(chart, &cfg)?
        );
    }
    Ok(())
}
