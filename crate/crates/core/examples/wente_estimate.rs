//! Wente's inequality: solve −div(A∇u) = ⟨da ∧ db⟩ with zero boundary data
//! on random instances and on the disk, where the solution is explicit.
//!
//!     cargo run --release --example wente_estimate

use wkit::elliptic::{
    wente_disk_problem, wente_random_suite, wente_solve, WENTE_ENERGY, WENTE_SUP,
};

fn main() -> wkit::Result<()> {
    let disk = wente_solve(&wente_disk_problem(129)?, 2)?;
    println!(
        "disk, a = x, b = y: sup u = {:.6} (exact 1/4)",
        disk.report.u_sup
    );

    let runs = wente_random_suite(10, 42, 33)?;
    println!("{:>8} {:>14} {:>14}", "Λ", "sup ratio", "energy ratio");
    for r in &runs {
        println!(
            "{:>8.3} {:>14.4} {:>14.4}",
            r.lambda, r.sup_ratio, r.energy_ratio
        );
    }
    println!("bounds: sup ratio < {WENTE_SUP}, energy ratio < {WENTE_ENERGY:.4}");
    Ok(())
}
