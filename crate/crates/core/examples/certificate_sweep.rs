//! Minimise the certificate H over its four variables along t = k/n with
//! warm starts, then report the shape of the trajectory.
//!
//!     cargo run --release --example certificate_sweep -- [n] [m] [stride]

use pmcert::optimizer::{slope_fit, sweep, zero_crossing, SimplexConfig, SweepGrid};

fn main() -> pmcert::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u64 = args.first().map_or(Ok(102_400), |s| s.parse()).expect("n");
    let m: u32 = args.get(1).map_or(Ok(1), |s| s.parse()).expect("m");
    let stride: u64 = args.get(2).map_or(Ok(1), |s| s.parse()).expect("stride");

    let grid = SweepGrid::new(n, 1, n / 2, stride)?;
    let traj = sweep(&grid, m, &SimplexConfig::default())?;
    println!("n = {n}, m = {m}: {} grid points, all converged: {}", traj.points.len(), traj.all_converged());

    println!("{:>10} {:>12} {:>10} {:>10} {:>10} {:>10}", "t", "H_min", "x", "y", "z", "u");
    let step = (traj.points.len() / 12).max(1);
    for p in traj.points.iter().step_by(step).chain(traj.points.last()) {
        let v = p.vars;
        println!("{:>10.6} {:>12.8} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", p.t, p.h_min, v.x, v.y, v.z, v.u);
    }
    if let Some(p) = traj.min_point() {
        println!("minimum {:.8} at t = {:.5}", p.h_min, p.t);
    }
    match zero_crossing(&traj) {
        Some(t) => println!("turns positive after t = {t:.6}"),
        None => println!("no sign change from negative to positive"),
    }
    if let Ok(s) = slope_fit(&traj, 100) {
        println!("slope over the first 100 points: {s:.6}");
    }
    Ok(())
}
