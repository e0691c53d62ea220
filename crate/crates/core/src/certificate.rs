//! Closed-form pieces of the first-moment certificate.
//!
//! The expected number of minimal Hall obstacles with `k = t n` rows is
//! bounded by `exp(n H(n, m; t, r))` up to polynomial factors, for every
//! choice of the free variables `r = (x, y, z, u)`. A perfect matching is
//! certified once `min_r H < 0` over the whole range of `t`. This module
//! evaluates `H`, its gradient and ingredients, together with the small-`t`
//! rates `gamma_m`, the exponents `c_m`, and the component exponent used for
//! `m = 0`.

use std::f64::consts::E;

use crate::model::Threshold;
use crate::{Error, Result};

/// `f(t) = t e^(t - 1)`.
pub fn f(t: f64) -> f64 {
    t * (t - 1.0).exp()
}

/// Partial exponential sum `q_k(w) = sum_{j <= k} w^j / j!`; zero for `k < 0`.
pub fn q(w: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= w / j as f64;
        sum += term;
    }
    sum
}

/// Exponential tail `exp_k(w) = sum_{j >= k} w^j / j! = e^w - q_{k-1}(w)`.
///
/// The subtraction is used while it keeps at least one decimal digit;
/// otherwise the tail series is summed directly.
pub fn expq(w: f64, k: u32) -> f64 {
    match k {
        0 => return w.exp(),
        1 => return w.exp_m1(),
        _ => {}
    }
    let full = w.exp();
    let diff = full - q(w, i64::from(k) - 1);
    if diff.abs() >= 0.1 * full.abs() {
        return diff;
    }
    let mut term = 1.0;
    for j in 1..=k {
        term *= w / f64::from(j);
    }
    let mut sum = term;
    let mut j = k;
    loop {
        j += 1;
        term *= w / f64::from(j);
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() || j > k + 400 {
            break;
        }
    }
    sum
}

/// Free variables of the certificate. `x, y, z > 0` and `0 < u <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertVars {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

impl CertVars {
    pub fn new(x: f64, y: f64, z: f64, u: f64) -> Result<Self> {
        let v = Self { x, y, z, u };
        if v.is_feasible() {
            Ok(v)
        } else {
            Err(Error::domain("CertVars", format!("need x,y,z > 0 and 0 < u <= 1, got {v:?}")))
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.x > 0.0 && self.y > 0.0 && self.z > 0.0 && self.u > 0.0 && self.u <= 1.0
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.u]
    }

    /// Unchecked conversion; feasibility is the caller's business.
    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
            u: a[3],
        }
    }
}

/// `(n, m, t)` with `t = k / n`. `n = None` drops the `-log(u)/n` term,
/// which is the `n -> infinity` limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertParams {
    pub n: Option<u64>,
    pub m: u32,
    pub t: f64,
}

impl CertParams {
    pub fn new(n: u64, m: u32, t: f64) -> Self {
        Self { n: Some(n), m, t }
    }

    pub fn asymptotic(m: u32, t: f64) -> Self {
        Self { n: None, m, t }
    }

    fn check_t(&self, function: &'static str) -> Result<()> {
        if self.t > 0.0 && self.t < 1.0 {
            Ok(())
        } else {
            Err(Error::domain(function, format!("t = {} not in (0, 1)", self.t)))
        }
    }
}

/// Quantities shared by `g`, `rho`, `H` and the gradient.
struct Pieces {
    f: f64,
    qm: f64,
    qm1: f64,
    /// `exp_1(y + z) + q_m(1 - t) f(t)`.
    num: f64,
    /// `exp_2(y + z) + (y q_{m-1}(1 - t) + z q_m(1 - t)) f(t)`.
    den: f64,
}

impl Pieces {
    fn new(m: u32, t: f64, y: f64, z: f64) -> Self {
        let f = f(t);
        let qm = q(1.0 - t, i64::from(m));
        let qm1 = q(1.0 - t, i64::from(m) - 1);
        let eta = y + z;
        Self {
            f,
            qm,
            qm1,
            num: expq(eta, 1) + qm * f,
            den: expq(eta, 2) + (y * qm1 + z * qm) * f,
        }
    }
}

/// `g_m(t; y, z)`: ratio of the two generating-function factors.
pub fn g_m(m: u32, t: f64, y: f64, z: f64) -> Result<f64> {
    let p = Pieces::new(m, t, y, z);
    if !(p.den > 0.0) || !p.num.is_finite() {
        return Err(Error::domain("g_m", format!("denominator {} at t={t}, y={y}, z={z}", p.den)));
    }
    Ok(p.num / p.den)
}

/// `rho_m = (1 - t)(1 - u) x / g_m(t; y, z)`, the value of `rho` that makes
/// the argument of the last logarithm in `H` equal to `u`.
pub fn rho_m(params: &CertParams, vars: &CertVars) -> Result<f64> {
    params.check_t("rho_m")?;
    let g = g_m(params.m, params.t, vars.y, vars.z)?;
    Ok((1.0 - params.t) * (1.0 - vars.u) * vars.x / g)
}

fn check_vars(function: &'static str, vars: &CertVars) -> Result<()> {
    if vars.is_feasible() {
        Ok(())
    } else {
        Err(Error::domain(function, format!("infeasible {vars:?}")))
    }
}

/// Terms of `H` that depend on `t` alone.
fn t_only_terms(t: f64, qm: f64, f: f64) -> f64 {
    -2.0 * t + (1.0 - t) * ((1.0 - qm * f) / (1.0 - t)).ln() + t * (-t).ln_1p()
}

/// The certificate function `H(n, m; t, x, y, z, u)` with `rho` eliminated
/// through [`rho_m`] where it enters the last two terms.
///
/// Returns `+inf` at `u = 1` (then `rho = 0` and `t log(1/rho)` diverges).
pub fn h(params: &CertParams, vars: &CertVars) -> Result<f64> {
    params.check_t("H")?;
    check_vars("H", vars)?;
    let CertParams { n, m, t } = *params;
    let CertVars { x, y, z, u } = *vars;
    let p = Pieces::new(m, t, y, z);
    if !(p.den > 0.0) {
        return Err(Error::domain("H", "non-positive generating-function denominator"));
    }
    let rho = (1.0 - t) * (1.0 - u) * x * p.den / p.num;
    let qx = q(x, i64::from(m));

    let mut value = t_only_terms(t, p.qm, p.f);
    value += t * (p.den / (y * z)).ln();
    value += t * (t * qx / (E * rho)).ln();
    value += rho;
    value += z * expq(x, m + 1) / qx * (1.0 - u).powi(m as i32 + 1);
    if let Some(n) = n {
        value -= u.ln() / n as f64;
    }
    Ok(value)
}

/// `H` written with `rho` as an independent variable, before the last
/// logarithm's argument `1 - g rho / ((1 - t) x)` is renamed to `u`.
/// Agrees with [`h`] when `rho = rho_m(t; x, y, z, u)`.
pub fn h_with_rho(params: &CertParams, x: f64, y: f64, z: f64, rho: f64) -> Result<f64> {
    params.check_t("H")?;
    let CertParams { n, m, t } = *params;
    if !(x > 0.0 && y > 0.0 && z > 0.0 && rho > 0.0) {
        return Err(Error::domain("H", "x, y, z, rho must be positive"));
    }
    let p = Pieces::new(m, t, y, z);
    let g = p.num / p.den;
    let ratio = g * rho / (x * (1.0 - t));
    if ratio >= 1.0 {
        return Err(Error::domain("H", format!("g rho / (x (1 - t)) = {ratio} >= 1")));
    }
    let qx = q(x, i64::from(m));
    let mut value = t_only_terms(t, p.qm, p.f);
    value += t * (p.den / (y * z)).ln();
    value += t * (t * qx / (E * rho)).ln();
    value += rho;
    value += z * expq(x, m + 1) / qx * ratio.powi(m as i32 + 1);
    if let Some(n) = n {
        value -= (-ratio).ln_1p() / n as f64;
    }
    Ok(value)
}

/// Analytic gradient of [`h`] with respect to `(x, y, z, u)`.
pub fn h_gradient(params: &CertParams, vars: &CertVars) -> Result<[f64; 4]> {
    params.check_t("grad H")?;
    check_vars("grad H", vars)?;
    if vars.u >= 1.0 {
        return Err(Error::domain("grad H", "u = 1"));
    }
    let CertParams { n, m, t } = *params;
    let CertVars { x, y, z, u } = *vars;
    let p = Pieces::new(m, t, y, z);
    let rho = (1.0 - t) * (1.0 - u) * x * p.den / p.num;
    let e_eta = (y + z).exp();
    let e1 = expq(y + z, 1);
    let den_y = e1 + p.qm1 * p.f;
    let den_z = e1 + p.qm * p.f;
    let log_rho_y = den_y / p.den - e_eta / p.num;
    let log_rho_z = den_z / p.den - e_eta / p.num;

    let mi = i64::from(m);
    let qx = q(x, mi);
    let qx1 = q(x, mi - 1);
    let tail = expq(x, m + 1);
    let ratio_x = tail / qx;
    let ratio_x_prime = (expq(x, m) * qx - tail * qx1) / (qx * qx);
    let one_minus_u = 1.0 - u;
    let pow = one_minus_u.powi(m as i32 + 1);
    let inv_n = n.map_or(0.0, |n| 1.0 / n as f64);

    let dx = t * qx1 / qx - t / x + rho / x + z * pow * ratio_x_prime;
    let dy = t * den_y / p.den - t / y + (rho - t) * log_rho_y;
    let dz = t * den_z / p.den - t / z + (rho - t) * log_rho_z + ratio_x * pow;
    let du = (t - rho) / one_minus_u
        - z * ratio_x * f64::from(m + 1) * one_minus_u.powi(m as i32)
        - inv_n / u;
    Ok([dx, dy, dz, du])
}

/// Power-law trial point for small `t`:
/// `x = a t^s, y = b1 t^s, z = b2 t^s, rho = c t`, with `u` recovered from
/// `rho` by inverting [`rho_m`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub sigma: f64,
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

impl PowerLaw {
    /// Starting point used for the sweeps: `sigma = 1/3`, all coefficients
    /// 1 for `m > 0`; `b1 = sqrt 3`, `c = 1/sqrt 3` for `m = 0`.
    pub fn sweep_start(m: u32) -> Self {
        let s3 = 3f64.sqrt();
        if m == 0 {
            Self {
                sigma: 1.0 / 3.0,
                a: 1.0,
                b1: s3,
                b2: 1.0,
                c: 1.0 / s3,
            }
        } else {
            Self {
                sigma: 1.0 / 3.0,
                a: 1.0,
                b1: 1.0,
                b2: 1.0,
                c: 1.0,
            }
        }
    }

    /// Returns `(vars, rho)`. `u` may fall outside `(0, 1]` for large `t`;
    /// the vars are returned unchecked.
    pub fn at(&self, m: u32, t: f64) -> Result<(CertVars, f64)> {
        let s = t.powf(self.sigma);
        let (x, y, z, rho) = (self.a * s, self.b1 * s, self.b2 * s, self.c * t);
        let g = g_m(m, t, y, z)?;
        let u = 1.0 - g * rho / ((1.0 - t) * x);
        Ok((CertVars { x, y, z, u }, rho))
    }
}

/// Small-`t` decay rate `gamma_m(b, c)` of `H` along a [`PowerLaw`] path.
pub fn gamma_general(m: u32, b1: f64, b2: f64, c: f64) -> Result<f64> {
    if !(b1 > 0.0 && b2 > 0.0 && c > 0.0) {
        return Err(Error::domain("gamma_general", "b1, b2, c must be positive"));
    }
    let mut g = 1.0 + (-1.0f64).exp() * q(1.0, i64::from(m))
        - ((b1 + b2).powi(2) / (2.0 * b1 * b2)).ln()
        - ((1.0 / (E * c)).ln() + c);
    if m == 0 {
        g -= 2.0 * b2 * c / (b1 + b2);
    }
    Ok(g)
}

/// `gamma_m = max_{b, c} gamma_m(b, c)` in closed form.
pub fn gamma_closed(m: Threshold) -> f64 {
    let inv_e = (-1.0f64).exp();
    match m {
        Threshold::Finite(0) => 1.0 + inv_e - (3f64.sqrt() + 2.0).ln(),
        Threshold::Finite(m) => 1.0 + inv_e * q(1.0, i64::from(m)) - 2f64.ln(),
        Threshold::Infinite => 2.0 - 2f64.ln(),
    }
}

/// Failure-probability exponent `c_m = 1 - 1.5 / (1 + (m + 1) gamma_m)`,
/// stated for `m >= 1`; `c_inf = 1`.
pub fn c_m(m: Threshold) -> Result<f64> {
    match m {
        Threshold::Finite(0) => Err(Error::Unsupported("c_m")),
        Threshold::Finite(mm) => Ok(1.0 - 1.5 / (1.0 + f64::from(mm + 1) * gamma_closed(m))),
        Threshold::Infinite => Ok(1.0),
    }
}

/// Location `k_n = 1.5 (m + 1) log n / ((m + 1) gamma_m + 1)` of the peak of
/// [`log_enk_envelope`]; `1.5 log n / gamma_inf` for `m = inf`.
pub fn k_n(m: Threshold, n: f64) -> Result<f64> {
    match m {
        Threshold::Finite(0) => Err(Error::Unsupported("k_n")),
        Threshold::Finite(mm) => {
            let m1 = f64::from(mm + 1);
            Ok(1.5 * m1 * n.ln() / (m1 * gamma_closed(m) + 1.0))
        }
        Threshold::Infinite => Ok(1.5 * n.ln() / gamma_closed(m)),
    }
}

/// Explicit part of the bound on `log E_nk` for `k <= sqrt n`:
/// `min(-log n + k/(m+1), 0.5 log n - gamma_m k)`. The
/// `O(n^-1/2 k^3/2 + k^(m/(m+1)) + log k)` error term is not included.
pub fn log_enk_envelope(n: f64, k: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Unsupported("log_enk_envelope"));
    }
    if !(n >= 2.0 && k >= 1.0 && k <= n.sqrt()) {
        return Err(Error::domain("log_enk_envelope", format!("need n >= 2, 1 <= k <= sqrt n; n={n}, k={k}")));
    }
    let ln_n = n.ln();
    let small = -ln_n + k / f64::from(m + 1);
    let large = 0.5 * ln_n - gamma_closed(Threshold::Finite(m)) * k;
    Ok(small.min(large))
}

/// Exponent `H(x, y)` bounding the expected number of components with `x n`
/// rows and `y n` columns in `B(n, 0)`, on `0 < y <= x`, `x + y <= 1`.
pub fn component_h(x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= x && x + y <= 1.0 + 1e-12) {
        return Err(Error::domain("component_h", format!("need 0 < y <= x, x + y <= 1; x={x}, y={y}")));
    }
    let xlogx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    let l1x = (-x).ln_1p();
    let l1y = (-y).ln_1p();
    let mut h = -xlogx(x) - xlogx(1.0 - x) - xlogx(y) - xlogx(1.0 - y);
    h += y * x.ln() + (1.0 - x) * l1y;
    h += (2.0 * x - y) * y.ln() + (1.0 + x - 2.0 * y) * l1x;
    h += y * (-(-x / y).exp() * (1.0 - x)).ln_1p();
    h += (1.0 - x) * (-(-(1.0 - y) / (1.0 - x)).exp() * y).ln_1p();
    Ok(h)
}

/// Linear coefficient of `H(x, z x)` as `x -> 0`, for fixed `z`:
/// `2(1 - z) log z + z (log(1 - e^(-1/z)) - e^-1)`.
pub fn component_slope(z: f64) -> f64 {
    if z <= 0.0 {
        return f64::NEG_INFINITY;
    }
    2.0 * (1.0 - z) * z.ln() + z * ((-(-1.0 / z).exp()).ln_1p() - (-1.0f64).exp())
}

fn component_slope_prime(z: f64) -> f64 {
    let em = (-1.0 / z).exp();
    -2.0 * z.ln() + 2.0 * (1.0 - z) / z + (-em).ln_1p() - (-1.0f64).exp() - em / (z * (1.0 - em))
}

/// `sup_{z in [0, 1]} component_slope(z)`: best of a 10^5-point grid, then
/// one Newton step on the derivative. The value at `z -> 0` is `-inf`.
pub fn component_slope_sup() -> f64 {
    const GRID: usize = 100_000;
    let (mut best_z, mut best) = (1.0, component_slope(1.0));
    for i in 1..=GRID {
        let z = i as f64 / GRID as f64;
        let v = component_slope(z);
        if v > best {
            best = v;
            best_z = z;
        }
    }
    let h = 1e-5;
    let second = (component_slope_prime(best_z + h) - component_slope_prime(best_z - h)) / (2.0 * h);
    if second < 0.0 {
        let z = (best_z - component_slope_prime(best_z) / second).clamp(1.0 / GRID as f64, 1.0);
        best = best.max(component_slope(z));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn f_values() {
        assert_eq!(f(1.0), 1.0);
        assert_eq!(f(0.0), 0.0);
        assert!(close(f(0.5), 0.303_265_329_856_316_7, 1e-15));
    }

    #[test]
    fn partial_sums() {
        for w in [-2.0, 0.0, 0.3, 5.0] {
            assert_eq!(q(w, 0), 1.0);
            assert_eq!(q(w, -1), 0.0);
        }
        assert_eq!(expq(0.0, 1), 0.0);
        assert!(close(expq(1.0, 2), E - 2.0, 1e-15));
        assert!(close(expq(1.0, 0), E, 1e-15));
    }

    #[test]
    fn expq_small_argument_uses_series() {
        // exp_3(1e-4) = w^3/6 + w^4/24 + ...
        let w: f64 = 1e-4;
        let exact = w.powi(3) / 6.0 + w.powi(4) / 24.0 + w.powi(5) / 120.0;
        assert!(((expq(w, 3) - exact) / exact).abs() < 1e-14);
        // exp_2 at 1e-8 would be pure rounding noise by subtraction.
        let w: f64 = 1e-8;
        assert!(((expq(w, 2) - w * w / 2.0) / (w * w / 2.0)).abs() < 1e-7);
    }

    #[test]
    fn g_m_reference_point() {
        // (e^2 - 1 + 1.5 f(1/2)) / (e^2 - 3 + 2.5 f(1/2)), 40-digit reference.
        let g = g_m(1, 0.5, 1.0, 1.0).unwrap();
        assert!(close(g, 1.329_641_021_786_164_6, 1e-14), "{g}");
    }

    #[test]
    fn g_m_blows_up_near_origin() {
        let (y, z, t) = (1e-6, 1e-6, 0.3);
        let qm = q(1.0 - t, 1);
        let qm1 = q(1.0 - t, 0);
        let expected = (qm * f(t)) / (z * qm * f(t) + y * qm1 * f(t) + (y + z).powi(2) / 2.0);
        let g = g_m(1, t, y, z).unwrap();
        assert!(((g - expected) / expected).abs() < 1e-5);
        assert!(g > 1e5);
    }

    #[test]
    fn rho_reference_point() {
        let p = CertParams::new(1000, 1, 0.5);
        let v = CertVars::new(1.0, 1.0, 1.0, 0.5).unwrap();
        assert!(close(rho_m(&p, &v).unwrap(), 0.188_020_673_177_008_4, 1e-14));
        let v = CertVars::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(rho_m(&p, &v).unwrap(), 0.0);
        assert_eq!(h(&p, &v).unwrap(), f64::INFINITY);
    }

    #[test]
    fn h_rejects_boundary() {
        let p = CertParams::new(100, 1, 0.1);
        assert!(h(&p, &CertVars::from_array([0.0, 1.0, 1.0, 0.5])).is_err());
        assert!(h(&p, &CertVars::from_array([1.0, 1.0, 1.0, 0.0])).is_err());
        assert!(h(&p, &CertVars::from_array([1.0, 1.0, 1.0, 1.5])).is_err());
        assert!(h(&CertParams::new(100, 1, 0.0), &CertVars::from_array([1.0, 1.0, 1.0, 0.5])).is_err());
    }

    #[test]
    fn h_diverges_as_u_approaches_one() {
        let p = CertParams::new(100, 1, 0.1);
        let values: Vec<f64> = [0.9, 0.99, 0.999_999, 1.0 - 1e-12]
            .iter()
            .map(|&u| h(&p, &CertVars::new(0.5, 0.5, 0.5, u).unwrap()).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gamma_closed_values() {
        assert!(close(gamma_closed(Threshold::Finite(0)), 0.050_921_544_246_625_6, 1e-15));
        assert!(close(gamma_closed(Threshold::Finite(1)), 1.042_611_701_782_939_3, 1e-15));
        assert!(close(gamma_closed(Threshold::Infinite), 1.306_852_819_440_054_7, 1e-15));
    }

    #[test]
    fn gamma_general_at_optimum() {
        let g1 = gamma_general(1, 1.0, 1.0, 1.0).unwrap();
        assert!(close(g1, 1.0 + 2.0 / E - 2f64.ln(), 1e-15));
        let s3 = 3f64.sqrt();
        let g0 = gamma_general(0, s3, 1.0, 1.0 / s3).unwrap();
        assert!(close(g0, gamma_closed(Threshold::Finite(0)), 1e-14));
    }

    #[test]
    fn c_m_values() {
        assert!(close(c_m(Threshold::Finite(1)).unwrap(), 0.513_811_544_970_678_3, 1e-14));
        assert_eq!(c_m(Threshold::Infinite).unwrap(), 1.0);
        assert!(matches!(c_m(Threshold::Finite(0)), Err(Error::Unsupported(_))));
        let cs: Vec<f64> = (1..=20).map(|m| c_m(Threshold::Finite(m)).unwrap()).collect();
        assert!(cs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn envelope_peak() {
        let n: f64 = 1e12;
        for m in 1..=3 {
            let kn = k_n(Threshold::Finite(m), n).unwrap();
            let at_peak = log_enk_envelope(n, kn, m).unwrap();
            let cm = c_m(Threshold::Finite(m)).unwrap();
            assert!(close(at_peak, -cm * n.ln(), 1e-9 * n.ln()));
            // at k = 1 the small-k branch is active
            let one = log_enk_envelope(n, 1.0, m).unwrap();
            assert!(close(one, -n.ln() + 1.0 / f64::from(m + 1), 1e-12));
        }
    }

    #[test]
    fn component_h_vanishes_at_origin() {
        let vals: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&x| component_h(x, x / 2.0).unwrap())
            .collect();
        assert!(vals.iter().all(|v| *v < 0.0));
        assert!(vals.windows(2).all(|w| w[1].abs() < w[0].abs()));
        assert!(vals[3].abs() < 1e-6);
        assert!(component_h(0.3, 0.4).is_err());
        assert!(component_h(0.7, 0.5).is_err());
    }

    #[test]
    fn slope_sup_value() {
        // 40-digit reference: maximiser z* = 0.76247386..., value -0.64866935...
        let s = component_slope_sup();
        assert!(close(s, -0.648_669_352_253_546_8, 1e-10), "{s}");
    }
}
