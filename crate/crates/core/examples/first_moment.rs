//! First-moment quantities in log space: the small-k bound, the Stirling
//! sum S_k, the main term of E[Y_n], and the connectivity bound.
//!
//!     cargo run --example first_moment -- [n] [m] [delta]

use pmcert::moments::{log_enk_smallk, log_sk, log_sk_asymptotic, MomentReport};

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u64 = args.first().map_or(Ok(1_000_000), |s| s.parse()).expect("n");
    let m: u32 = args.get(1).map_or(Ok(1), |s| s.parse()).expect("m");
    let delta: f64 = args.get(2).map_or(Ok(0.3), |s| s.parse()).expect("delta");

    let report = MomentReport::compute(n, m, None, delta)?;
    println!("n = {n}, m = {m}, k = {}, k for Y_n = {}", report.k, report.k_yn);
    for (name, value) in report.values() {
        let flag = report.flag(name).map_or(String::new(), |f| format!("  [{f}]"));
        println!("  {name:>14} {value:>16.8}{flag}");
    }

    println!("\n{:>4} {:>14} {:>14} {:>14}", "k", "log E_nk", "log S_k", "saddle approx");
    for k in [5u64, 10, 20, 40, 80] {
        let e = log_enk_smallk(n, k, m).map_or("-".into(), |v| format!("{v:.6}"));
        println!("{k:>4} {e:>14} {:>14.6} {:>14.6}", log_sk(k)?, log_sk_asymptotic(k));
    }
    Ok(())
}
