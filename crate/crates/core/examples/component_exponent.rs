//! The exponent bounding two-sided components of relative sizes (x, y) in
//! B(n, 0), and the component sizes actually seen.
//!
//!     cargo run --release --example component_exponent -- [n] [trials]

use pmcert::certificate::{component_h, component_slope_sup};
use pmcert::matching::components;
use pmcert::model::{generate, ModelParams};
use pmcert::rng::trial_seed;

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(100_000), |s| s.parse()).expect("n");
    let trials: u64 = args.get(1).map_or(Ok(10), |s| s.parse()).expect("trials");

    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 1..=200 {
        for j in 1..=i {
            let (x, y) = (i as f64 * 0.005, j as f64 * 0.005);
            if x + y < 0.01 || x + y > 1.0 {
                continue;
            }
            let v = component_h(x, y)?;
            if v > worst.0 {
                worst = (v, x, y);
            }
        }
    }
    println!("largest exponent on the grid: {:.6} at x = {}, y = {}", worst.0, worst.1, worst.2);
    println!("slope near the origin at most {:.6}", component_slope_sup());

    for i in 0..trials {
        let g = generate(&ModelParams::new(n, 0, trial_seed(31, i))?);
        let mut sizes: Vec<usize> = components(&g).iter().map(|c| c.size()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let rest: usize = sizes[1..].iter().sum();
        println!("trial {i}: largest {} of {}, {} others totalling {rest}", sizes[0], 2 * n, sizes.len() - 1);
    }
    Ok(())
}
