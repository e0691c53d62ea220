//! Find graphs without a perfect matching and print the Hall obstacle that
//! proves it: a set K whose neighbourhood L is one vertex short.
//!
//!     cargo run --release --example hall_witness -- [n] [m]

use pmcert::matching::{hall_witness, max_matching, neighborhood};
use pmcert::model::{generate, ModelParams, Threshold};
use pmcert::rng::trial_seed;

fn head(v: &[u32]) -> String {
    let shown: Vec<String> = v.iter().take(12).map(u32::to_string).collect();
    let more = if v.len() > 12 { ", ..." } else { "" };
    format!("[{}{more}]", shown.join(", "))
}

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(200), |s| s.parse()).expect("n");
    let m: Threshold = args.get(1).map_or(Ok(Threshold::Finite(0)), |s| s.parse()).expect("m");

    let mut shown = 0;
    for trial in 0..1000 {
        let seed = trial_seed(42, trial);
        let g = generate(&ModelParams::new(n, m, seed)?);
        let Some(w) = hall_witness(&g) else { continue };
        let size = max_matching(&g).size;
        println!("seed {seed:#018x}: matching {size} of {n}");
        println!("  K ({:?} side, {} vertices): {}", w.side, w.k.len(), head(&w.k));
        println!("  L = Gamma(K) ({} vertices): {}", w.l.len(), head(&w.l));
        assert_eq!(neighborhood(&g, w.side, &w.k), w.l);
        shown += 1;
        if shown == 3 {
            break;
        }
    }
    if shown == 0 {
        println!("every one of 1000 graphs had a perfect matching");
    }
    Ok(())
}
