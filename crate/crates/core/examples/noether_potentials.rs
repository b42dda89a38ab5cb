//! Conservation laws of a Willmore surface: the conservative residual, the
//! Noether potentials L, S, R and their structure systems, under refinement.
//!
//!     cargo run --release --example noether_potentials

use wkit::conservation2d::{
    all_residuals, conservative_residual_of, reconstruct_potentials, refinement_order, Surface,
};
use wkit::geometry::DiagnosticsConfig;
use wkit::shapes::{generate, ShapeSpec};

fn main() -> wkit::Result<()> {
    let cfg = DiagnosticsConfig::default();
    let mut previous: Option<Vec<f64>> = None;
    for res in [33, 65, 129] {
        let chart = generate(&ShapeSpec::InvertedCatenoidPatch, res)?
            .charts
            .remove(0);
        let s = Surface::new(&chart, &cfg)?;
        let st = reconstruct_potentials(&s, cfg.stencil_order)?;
        let residuals = all_residuals(&s, &st);
        println!(
            "{res}²: ‖d*V‖ = {:.2e}, closedness L {:.1e} S {:.1e} R {:.1e}",
            conservative_residual_of(&s).sup,
            st.defects.l,
            st.defects.s,
            st.defects.r
        );
        let sups: Vec<f64> = residuals.iter().map(|r| r.sup).collect();
        for (i, r) in residuals.iter().enumerate() {
            let order = previous.as_ref().map(|p| refinement_order(p[i], sups[i]));
            match order {
                Some(o) => println!("    {:<11} {:.3e}  order {o:.2}", r.name, r.sup),
                None => println!("    {:<11} {:.3e}", r.name, r.sup),
            }
        }
        previous = Some(sups);
    }
    Ok(())
}
