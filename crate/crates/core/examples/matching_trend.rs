//! Fraction of graphs with a perfect matching as n grows, for m = 0 and
//! m = 1 on the same seeds.
//!
//!     cargo run --release --example matching_trend -- [trials]

use pmcert::cli::simulate;
use pmcert::model::Threshold;

fn main() -> pmcert::Result<()> {
    let trials: u64 = std::env::args().nth(1).map_or(Ok(200), |s| s.parse()).expect("trials");
    println!("{:>6} {:>8} {:>8}", "n", "m = 0", "m = 1");
    for n in [250usize, 500, 1000, 2000, 4000, 8000] {
        let frac = |m| simulate(n, Threshold::Finite(m), trials, 2024).map(|s| s.pm_fraction());
        println!("{n:>6} {:>8.3} {:>8.3}", frac(0)?, frac(1)?);
    }
    Ok(())
}
