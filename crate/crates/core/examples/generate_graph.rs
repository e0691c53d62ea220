//! Draw one B(n, m) graph and describe it.
//!
//!     cargo run --release --example generate_graph -- [n] [m] [seed]

use pmcert::matching::{components, max_matching};
use pmcert::model::{generate, ModelParams, Threshold};
use pmcert::rng::Side;

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(10_000), |s| s.parse()).expect("n");
    let m: Threshold = args.get(1).map_or(Ok(Threshold::Finite(1)), |s| s.parse()).expect("m");
    let seed: u64 = args.get(2).map_or(Ok(1), |s| s.parse()).expect("seed");

    let g = generate(&ModelParams::new(n, m, seed)?);
    println!("B(n={n}, m={m}), seed {seed}");
    for side in [Side::Row, Side::Col] {
        let second = (0..n).filter(|&v| g.out_degree(side, v) == 2).count();
        println!(
            "  {side:?}: {} unpopular, {second} with a distinct second pick",
            g.unpopular_count(side)
        );
    }
    println!("  {} distinct edges ({:.4} per vertex)", g.edge_count(), g.edge_count() as f64 / n as f64);

    let mm = max_matching(&g);
    println!("  maximum matching {} of {n}, perfect: {}", mm.size, mm.is_perfect());

    let mut sizes: Vec<usize> = components(&g).iter().map(|c| c.size()).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    println!("  {} components, largest {:?}", sizes.len(), &sizes[..sizes.len().min(5)]);
    Ok(())
}
