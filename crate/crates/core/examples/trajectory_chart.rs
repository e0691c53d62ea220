//! Both certificate curves at n = 102400, m = 0 and m = 1, as one SVG
//! chart.
//!
//!     cargo run --release --example trajectory_chart -- [out.svg]

use pmcert::optimizer::{sweep, zero_crossing, SimplexConfig, SweepGrid};
use pmcert::svg::{line_chart, Series};

fn main() -> pmcert::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "trajectories.svg".into());
    let n = 102_400;
    let grid = SweepGrid::new(n, 1, n / 2, 1)?;
    let mut series = vec![];
    for m in [0, 1] {
        let traj = sweep(&grid, m, &SimplexConfig::default())?;
        let cross = zero_crossing(&traj).map_or("none".into(), |t| format!("{t:.5}"));
        println!("m = {m}: min {:.6}, zero crossing {cross}", traj.min_point().unwrap().h_min);
        series.push(Series::new(format!("m = {m}"), traj.points.iter().map(|p| (p.t, p.h_min)).collect()));
    }
    std::fs::write(&out, line_chart("n = 102400", "t", "min H", &series))?;
    println!("wrote {out}");
    Ok(())
}
