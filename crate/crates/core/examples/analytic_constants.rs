//! Closed-form constants: small-t decay rates, failure exponents, expected
//! out-degrees, the peak location k_n, and the first-moment rate.
//!
//!     cargo run --example analytic_constants -- [n]

use pmcert::cli::analytic_row;
use pmcert::model::Threshold;
use pmcert::moments::{h_z, lambda, sigma};

fn main() {
    let n: u64 = std::env::args().nth(1).map_or(Ok(1_000_000), |s| s.parse()).expect("n");
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "m", "gamma", "c", "d", "k_n");
    for m in (0..=5).map(Threshold::Finite).chain([Threshold::Infinite]) {
        let r = analytic_row(m, n);
        println!("{:>4} {:>10.6} {:>10} {:>10.6} {:>10}", m.to_string(), r.gamma, fmt(r.c), r.d, fmt(r.k_n));
    }
    let s = sigma();
    println!("sigma = {s:.12}, H(sigma) = {:.12}, lambda = {:.12}", h_z(s), lambda());
}
