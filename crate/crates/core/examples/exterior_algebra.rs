//! Forms under a non-Euclidean metric: wedge, Hodge star, metric interior
//! product, and the random identity suite.
//!
//!     cargo run --release --example exterior_algebra

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wkit::exterior::{identity_random_suite, random_metric, FormValue, Metric};

fn main() -> wkit::Result<()> {
    let g = Metric::new(2, &[2.0, 0.5, 0.5, 1.0])?;
    let mut dx = FormValue::zero(2);
    dx.set(&[0], 1.0);
    let mut dy = FormValue::zero(2);
    dy.set(&[1], 1.0);
    let area = dx.wedge(&dy)?;
    println!("dx∧dy coefficient: {}", area.get(&[0, 1]));
    let star = dx.hodge_star(&g)?;
    println!("*dx = {:.4} dx + {:.4} dy", star.get(&[0]), star.get(&[1]));
    println!(
        "**dx = −dx: {:.2e}",
        star.hodge_star(&g)?.add(&dx).max_abs()
    );
    println!("|dx|²_g = {:.4}", dx.inner(&g, &dx)?);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g4 = random_metric(&mut rng, 4);
    let vol = FormValue::volume(&g4);
    println!(
        "*vol_g on a random 4D metric: {:.15}",
        vol.hodge_star(&g4)?.get(&[])
    );

    let d = identity_random_suite(1000, 42)?;
    println!(
        "1000 random draws: **, *(α∧β), product rule, *(α⌐β) defects {:.1e} {:.1e} {:.1e} {:.1e}",
        d.double_star, d.star_wedge, d.product_rule, d.star_interior
    );
    Ok(())
}
