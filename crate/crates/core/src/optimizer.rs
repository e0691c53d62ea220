//! Penalised Nelder-Mead minimisation of the certificate and its
//! warm-started continuation over the `t = k / n` grid.

use crate::certificate::{self, CertParams, CertVars, PowerLaw};
use crate::{Error, Result};

/// Value substituted for the objective wherever it is undefined or not
/// finite, so the simplex can walk back from infeasible vertices.
pub const OUT_OF_DOMAIN: f64 = 1e12;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexConfig {
    /// Stop when `max_i |f_i - f_best|` is at most this...
    pub func_tol: f64,
    /// ...and `max_i ||x_i - x_best||_inf` is at most this.
    pub opt_tol: f64,
    /// Iteration cap per run.
    pub max_iters: usize,
    /// Weight `P` of the penalty `P (sum_{x_i < 0} x_i)^2`.
    pub penalty: f64,
    /// Fresh simplices built around the incumbent after the first run.
    pub restarts: u32,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            func_tol: 1e-8,
            opt_tol: 1e-8,
            max_iters: 100_000,
            penalty: 1e4,
            restarts: 1,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.func_tol > 0.0 && self.opt_tol > 0.0 && self.penalty > 0.0 && self.max_iters > 0) {
            return Err(Error::InvalidArgument(format!("bad simplex config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum<const N: usize> {
    pub point: [f64; N],
    /// Penalised objective at `point`; equals the raw objective when every
    /// coordinate is non-negative.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

/// `P (h(-x_1) x_1 + ... + h(-x_N) x_N)^2` with `h` the unit step.
pub fn penalty<const N: usize>(p: f64, point: &[f64; N]) -> f64 {
    let s: f64 = point.iter().filter(|&&v| v < 0.0).sum();
    p * s * s
}

struct Simplex<const N: usize> {
    // N + 1 vertices kept sorted by value.
    points: Vec<[f64; N]>,
    values: Vec<f64>,
}

impl<const N: usize> Simplex<N> {
    fn around(start: [f64; N], eval: &mut impl FnMut(&[f64; N]) -> f64) -> Self {
        let mut points = Vec::with_capacity(N + 1);
        points.push(start);
        for i in 0..N {
            let mut p = start;
            p[i] += (0.05 * start[i].abs()).max(1e-3);
            points.push(p);
        }
        let values = points.iter().map(&mut *eval).collect();
        let mut s = Self { points, values };
        s.sort();
        s
    }

    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..=N).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i]).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn converged(&self, func_tol: f64, opt_tol: f64) -> bool {
        let best = self.values[0];
        let spread = self.values[1..].iter().map(|v| (v - best).abs()).fold(0.0, f64::max);
        let diameter = self.points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&self.points[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        spread <= func_tol && diameter <= opt_tol
    }
}

fn affine<const N: usize>(base: &[f64; N], dir_from: &[f64; N], coef: f64) -> [f64; N] {
    // base + coef * (base - dir_from)
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = base[i] + coef * (base[i] - dir_from[i]);
    }
    out
}

/// One Nelder-Mead run; returns `(converged, iterations)`.
fn run<const N: usize>(
    simplex: &mut Simplex<N>,
    eval: &mut impl FnMut(&[f64; N]) -> f64,
    config: &SimplexConfig,
    trace: &mut Option<&mut Vec<f64>>,
) -> (bool, usize) {
    let mut iterations = 0;
    loop {
        if simplex.converged(config.func_tol, config.opt_tol) {
            return (true, iterations);
        }
        if iterations >= config.max_iters {
            return (false, iterations);
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for p in &simplex.points[..N] {
            for i in 0..N {
                centroid[i] += p[i] / N as f64;
            }
        }
        let worst = simplex.points[N];
        let f_worst = simplex.values[N];

        let reflected = affine(&centroid, &worst, REFLECT);
        let f_reflected = eval(&reflected);

        let mut shrink = false;
        if f_reflected < simplex.values[0] {
            let expanded = affine(&centroid, &worst, EXPAND);
            let f_expanded = eval(&expanded);
            if f_expanded < f_reflected {
                simplex.points[N] = expanded;
                simplex.values[N] = f_expanded;
            } else {
                simplex.points[N] = reflected;
                simplex.values[N] = f_reflected;
            }
        } else if f_reflected < simplex.values[N - 1] {
            simplex.points[N] = reflected;
            simplex.values[N] = f_reflected;
        } else if f_reflected < f_worst {
            let outside = affine(&centroid, &worst, REFLECT * CONTRACT);
            let f_outside = eval(&outside);
            if f_outside <= f_reflected {
                simplex.points[N] = outside;
                simplex.values[N] = f_outside;
            } else {
                shrink = true;
            }
        } else {
            let inside = affine(&centroid, &worst, -CONTRACT);
            let f_inside = eval(&inside);
            if f_inside < f_worst {
                simplex.points[N] = inside;
                simplex.values[N] = f_inside;
            } else {
                shrink = true;
            }
        }

        if shrink {
            let best = simplex.points[0];
            for j in 1..=N {
                for i in 0..N {
                    simplex.points[j][i] = best[i] + SHRINK * (simplex.points[j][i] - best[i]);
                }
                simplex.values[j] = eval(&simplex.points[j]);
            }
        }
        simplex.sort();
        if let Some(t) = trace.as_deref_mut() {
            t.push(simplex.values[0]);
        }
    }
}

fn minimize_impl<const N: usize>(
    mut objective: impl FnMut(&[f64; N]) -> f64,
    start: [f64; N],
    config: &SimplexConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Minimum<N> {
    let mut evaluations = 0usize;
    let mut eval = |p: &[f64; N]| {
        evaluations += 1;
        let raw = objective(p);
        let raw = if raw.is_finite() { raw } else { OUT_OF_DOMAIN };
        raw + penalty(config.penalty, p)
    };
    let mut simplex = Simplex::around(start, &mut eval);
    let (mut converged, mut iterations) = run(&mut simplex, &mut eval, config, &mut trace);
    for _ in 0..config.restarts {
        let best = simplex.points[0];
        let best_value = simplex.values[0];
        let mut fresh = Simplex::around(best, &mut eval);
        let (c, it) = run(&mut fresh, &mut eval, config, &mut trace);
        iterations += it;
        converged = c;
        if fresh.values[0] <= best_value {
            simplex = fresh;
        }
    }
    Minimum {
        point: simplex.points[0],
        value: simplex.values[0],
        converged,
        iterations,
        evaluations,
    }
}

/// Nelder-Mead with reflection 1, expansion 2, contractions 0.5 and shrink
/// 0.5 on `objective + penalty`. Non-finite objective values are replaced
/// by [`OUT_OF_DOMAIN`]. The starting simplex offsets each coordinate by
/// `max(5% |x_i|, 1e-3)`. Never returns a value above the start's.
pub fn minimize<const N: usize>(
    objective: impl FnMut(&[f64; N]) -> f64,
    start: [f64; N],
    config: &SimplexConfig,
) -> Minimum<N> {
    minimize_impl(objective, start, config, None)
}

/// As [`minimize`], also returning the best simplex value after every
/// iteration.
pub fn minimize_traced<const N: usize>(
    objective: impl FnMut(&[f64; N]) -> f64,
    start: [f64; N],
    config: &SimplexConfig,
) -> (Minimum<N>, Vec<f64>) {
    let mut trace = Vec::new();
    let m = minimize_impl(objective, start, config, Some(&mut trace));
    (m, trace)
}

/// Certificate value with the domain guard used by the optimiser.
pub fn guarded_h(params: &CertParams, point: &[f64; 4]) -> f64 {
    match certificate::h(params, &CertVars::from_array(*point)) {
        Ok(v) if v.is_finite() => v,
        _ => OUT_OF_DOMAIN,
    }
}

/// Minimises `H(n, m; t, .)` from `start`.
pub fn minimize_h(params: &CertParams, start: CertVars, config: &SimplexConfig) -> Minimum<4> {
    minimize(|p| guarded_h(params, p), start.to_array(), config)
}

/// Starting point at the first grid value of `t`: the power-law path
/// with exponent 1/3 (see [`PowerLaw::sweep_start`]). When `t` is too large
/// for that path to give `u` in `(0, 1)`, `u` falls back to 1/2.
pub fn initial_vars(m: u32, t: f64) -> Result<CertVars> {
    let (mut vars, _) = PowerLaw::sweep_start(m).at(m, t)?;
    if !(vars.u > 0.0 && vars.u < 1.0) {
        vars.u = 0.5;
    }
    CertVars::new(vars.x, vars.y, vars.z, vars.u)
}

/// Grid of `k` values visited by a sweep: `k_from`, then every multiple of
/// `stride` above it, then `k_to`. With `stride = 1` that is every `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepGrid {
    pub n: u64,
    pub k_from: u64,
    pub k_to: u64,
    pub stride: u64,
}

impl SweepGrid {
    pub fn new(n: u64, k_from: u64, k_to: u64, stride: u64) -> Result<Self> {
        let half = n.div_ceil(2);
        if n < 2 || k_from < 1 || k_from > k_to || k_to > half || stride < 1 {
            return Err(Error::InvalidArgument(format!(
                "sweep grid needs n >= 2, 1 <= k_from <= k_to <= ceil(n/2), stride >= 1; got n={n}, k={k_from}..{k_to}, stride={stride}"
            )));
        }
        Ok(Self { n, k_from, k_to, stride })
    }

    /// Grid from `t` bounds, rounding `t n` to the nearest integer.
    pub fn from_t(n: u64, t_from: f64, t_to: f64, stride: u64) -> Result<Self> {
        let k = |t: f64| (t * n as f64).round().max(0.0) as u64;
        Self::new(n, k(t_from).max(1), k(t_to), stride)
    }

    pub fn ks(&self) -> Vec<u64> {
        let mut ks = vec![self.k_from];
        let mut k = (self.k_from / self.stride + 1) * self.stride;
        while k <= self.k_to {
            ks.push(k);
            k += self.stride;
        }
        if *ks.last().unwrap() != self.k_to {
            ks.push(self.k_to);
        }
        ks
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub k: u64,
    pub t: f64,
    pub vars: CertVars,
    pub rho: f64,
    pub h_min: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTrajectory {
    pub n: u64,
    pub m: u32,
    pub points: Vec<SweepPoint>,
}

impl SweepTrajectory {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    pub fn min_point(&self) -> Option<&SweepPoint> {
        self.points.iter().min_by(|a, b| a.h_min.total_cmp(&b.h_min))
    }

    pub fn at_k(&self, k: u64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.k == k)
    }
}

/// Minimises `H` at every grid point, warm-starting each from the previous
/// minimiser and the first from [`initial_vars`].
pub fn sweep(grid: &SweepGrid, m: u32, config: &SimplexConfig) -> Result<SweepTrajectory> {
    let t0 = grid.k_from as f64 / grid.n as f64;
    sweep_from(grid, m, initial_vars(m, t0)?, config)
}

/// [`sweep`] with an explicit starting point for the first grid value.
pub fn sweep_from(grid: &SweepGrid, m: u32, start: CertVars, config: &SimplexConfig) -> Result<SweepTrajectory> {
    config.validate()?;
    let mut current = start;
    let mut points = Vec::new();
    for k in grid.ks() {
        let t = k as f64 / grid.n as f64;
        let params = CertParams::new(grid.n, m, t);
        let found = minimize_h(&params, current, config);
        let vars = CertVars::from_array(found.point);
        if !vars.is_feasible() || penalty(config.penalty, &found.point) != 0.0 {
            return Err(Error::domain("sweep", format!("minimiser left the feasible region at k={k}: {vars:?}")));
        }
        let rho = certificate::rho_m(&params, &vars)?;
        points.push(SweepPoint {
            k,
            t,
            vars,
            rho,
            h_min: found.value,
            converged: found.converged,
        });
        current = vars;
    }
    Ok(SweepTrajectory { n: grid.n, m, points })
}

/// First sign change from negative to positive along the trajectory;
/// returns the grid `t` of the last negative point before it.
pub fn zero_crossing(traj: &SweepTrajectory) -> Option<f64> {
    traj.points
        .windows(2)
        .find(|w| w[0].h_min < 0.0 && w[1].h_min > 0.0)
        .map(|w| w[0].t)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Least-squares slope of `H_min` against `t` over the first `count`
/// trajectory points.
pub fn slope_fit(traj: &SweepTrajectory, count: usize) -> Result<f64> {
    if count < 2 || traj.points.len() < count {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs {count} >= 2 points, trajectory has {}",
            traj.points.len()
        )));
    }
    let pts = &traj.points[..count];
    let ts: Vec<f64> = pts.iter().map(|p| p.t).collect();
    let hs: Vec<f64> = pts.iter().map(|p| p.h_min).collect();
    Ok(least_squares_slope(&ts, &hs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let target = [1.0, 2.0, 3.0, 0.5];
        let obj = |p: &[f64; 4]| p.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let m = minimize(obj, [0.5, 0.5, 0.5, 0.9], &SimplexConfig::default());
        assert!(m.converged);
        for (a, b) in m.point.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{:?}", m.point);
        }
        assert!(m.value < 1e-10);
    }

    #[test]
    fn penalty_keeps_iterates_near_feasible() {
        let obj = |p: &[f64; 4]| (p[0] + 1.0).powi(2) + (p[1] - 1.0).powi(2) + (p[2] - 1.0).powi(2) + (p[3] - 1.0).powi(2);
        let m = minimize(obj, [0.5, 0.5, 0.5, 0.5], &SimplexConfig::default());
        assert!(m.point[0] >= -1e-4, "{:?}", m.point);
        assert!(m.point[0] < 0.0);
    }

    #[test]
    fn non_finite_objective_is_survivable() {
        let obj = |p: &[f64; 2]| if p[0] > 2.0 { f64::NAN } else { (p[0] - 1.0).powi(2) + p[1].powi(2) };
        let m = minimize(obj, [1.99, 0.3], &SimplexConfig::default());
        assert!((m.point[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn iteration_exhaustion_reports_not_converged() {
        let config = SimplexConfig {
            max_iters: 3,
            restarts: 0,
            ..SimplexConfig::default()
        };
        let m = minimize(|p: &[f64; 2]| p[0].powi(2) + p[1].powi(2) + 1.0, [3.0, 4.0], &config);
        assert!(!m.converged);
        assert!(m.value <= 26.0);
    }

    #[test]
    fn grid_points() {
        assert_eq!(SweepGrid::new(100, 1, 10, 1).unwrap().ks(), (1..=10).collect::<Vec<_>>());
        assert_eq!(SweepGrid::new(100, 1, 10, 4).unwrap().ks(), vec![1, 4, 8, 10]);
        assert_eq!(SweepGrid::new(100, 4, 12, 4).unwrap().ks(), vec![4, 8, 12]);
        assert!(SweepGrid::new(100, 1, 51, 1).is_err());
        assert!(SweepGrid::new(101, 1, 51, 1).is_ok());
        assert!(SweepGrid::new(100, 0, 10, 1).is_err());
        assert_eq!(SweepGrid::from_t(1000, 0.001, 0.5, 10).unwrap().k_to, 500);
    }

    #[test]
    fn slope_of_a_line() {
        let xs: Vec<f64> = (1..=100).map(|k| k as f64 / 1e5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.25 - 1.75 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 1.75).abs() < 1e-12);
    }

    #[test]
    fn initial_point_follows_power_law() {
        let t = 1e-3;
        let v = initial_vars(1, t).unwrap();
        assert!((v.x - 0.1).abs() < 1e-12 && (v.y - 0.1).abs() < 1e-12);
        let rho = certificate::rho_m(&CertParams::new(1000, 1, t), &v).unwrap();
        assert!((rho - t).abs() < 1e-15);
        let v0 = initial_vars(0, t).unwrap();
        assert!((v0.y - 3f64.sqrt() * 0.1).abs() < 1e-12);
        let rho0 = certificate::rho_m(&CertParams::new(1000, 0, t), &v0).unwrap();
        assert!((rho0 - t / 3f64.sqrt()).abs() < 1e-15);
    }
}
