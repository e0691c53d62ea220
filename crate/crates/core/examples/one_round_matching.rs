//! Maximum matchings in the one-round graph, where every vertex makes a
//! single selection. The matched fraction settles near 0.866.
//!
//!     cargo run --release --example one_round_matching -- [n] [trials]

use pmcert::matching::max_matching;
use pmcert::model::one_round_graph;
use pmcert::rng::trial_seed;

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(100_000), |s| s.parse()).expect("n");
    let trials: u64 = args.get(1).map_or(Ok(20), |s| s.parse()).expect("trials");

    let mut ratios = vec![];
    for i in 0..trials {
        let g = one_round_graph(n, trial_seed(7, i))?;
        ratios.push(max_matching(&g).size as f64 / n as f64);
    }
    let mean = ratios.iter().sum::<f64>() / trials as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0).max(1.0);
    println!("n = {n}, {trials} trials: mean matched fraction {mean:.5} (sd {:.5})", var.sqrt());
    Ok(())
}
