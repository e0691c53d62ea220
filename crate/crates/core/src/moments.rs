//! First-moment quantities in log space: the small-`k` bad-pair bound, the
//! exact `P_nk(u, v)` with Stirling numbers, `S_k`, `H(z)`, `lambda`,
//! `log E[Y_n]` and the connectivity bound on `E[X_k]`.

use std::f64::consts::E;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// `ln sum exp(x_i)`, shifted by the maximum. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max.is_infinite() {
        return max;
    }
    let mut terms: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    // Summing in sorted order keeps the result independent of input order.
    terms.sort_by(f64::total_cmp);
    max + terms.iter().sum::<f64>().ln()
}

/// `ln C(n, k)` for real `n >= k >= 0`. Small `k` is summed term by term,
/// which stays accurate for `n` far beyond where log-gamma differences lose
/// digits.
pub fn ln_choose(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k == k.floor() && k <= 256.0 {
        let mut s = 0.0;
        for i in 0..k as u32 {
            let i = f64::from(i);
            s += ((n - i) / (k - i)).ln();
        }
        return s;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln (k)_v = ln k (k-1) ... (k-v+1)`.
pub fn ln_falling(k: f64, v: f64) -> f64 {
    ln_gamma(k + 1.0) - ln_gamma(k - v + 1.0)
}

/// Stirling number of the second kind, exact, from the triangle
/// `S(v, u) = u S(v-1, u) + S(v-1, u-1)`.
pub fn stirling2(v: usize, u: usize) -> BigUint {
    if u > v {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::one()];
    for i in 1..=v {
        let mut next = vec![BigUint::zero(); i + 1];
        for j in 1..=i {
            let stay = if j < i { &row[j] * BigUint::from(j) } else { BigUint::zero() };
            next[j] = stay + &row[j - 1];
        }
        row = next;
    }
    row[u].clone()
}

/// Bell number `sum_u S(v, u)`.
pub fn bell(v: usize) -> BigUint {
    (0..=v).map(|u| stirling2(v, u)).sum()
}

/// Table of `ln S(v, u)` for `0 <= u <= v <= v_max`, built with the same
/// recurrence in log space. Entries with `u > v` or `S = 0` are `-inf`.
#[derive(Clone, Debug)]
pub struct LogStirling {
    rows: Vec<Vec<f64>>,
}

impl LogStirling {
    pub fn new(v_max: usize) -> Self {
        let mut rows = Vec::with_capacity(v_max + 1);
        rows.push(vec![0.0]);
        for i in 1..=v_max {
            let prev: &Vec<f64> = &rows[i - 1];
            let mut row = vec![f64::NEG_INFINITY; i + 1];
            for j in 1..=i {
                let stay = if j < i { (j as f64).ln() + prev[j] } else { f64::NEG_INFINITY };
                row[j] = log_sum_exp(&[stay, prev[j - 1]]);
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn v_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, v: usize, u: usize) -> f64 {
        match self.rows.get(v).and_then(|r| r.get(u)) {
            Some(&x) => x,
            None => f64::NEG_INFINITY,
        }
    }
}

/// `ln S(v, u)` via [`LogStirling`].
pub fn log_stirling2(v: usize, u: usize) -> f64 {
    LogStirling::new(v).get(v, u)
}

fn check_pnk(n: u64, k: u64) -> Result<()> {
    if !(k >= 2 && k <= n) {
        return Err(Error::domain("log_pnk", format!("need 2 <= k <= n; n={n}, k={k}")));
    }
    Ok(())
}

fn log_pnk_with(table: &LogStirling, n: f64, k: f64, u: usize, v: usize) -> f64 {
    let (uf, vf) = (u as f64, v as f64);
    (2.0 * k - uf) * (k - 1.0).ln() + ln_falling(k, uf) - (2.0 * k - uf + vf) * n.ln()
        + ln_choose(k - 1.0, vf)
        + (k - 1.0 - vf) * (-k / n).ln_1p()
        + table.get(v, u)
}

/// `ln P_nk(u, v)`: probability that a fixed `k`-set of rows `K` and
/// `(k-1)`-set of columns `L` realise the pattern where exactly `v` columns
/// of `L` pick rows of `K` in round one, covering `u` of them, and all
/// other selections by `K` land in `L`.
pub fn log_pnk_uv(n: u64, k: u64, u: usize, v: usize) -> Result<f64> {
    check_pnk(n, k)?;
    if !(u <= v && (v as u64) < k) {
        return Err(Error::domain("log_pnk_uv", format!("need 0 <= u <= v <= k-1; u={u}, v={v}, k={k}")));
    }
    Ok(log_pnk_with(&LogStirling::new(v), n as f64, k as f64, u, v))
}

/// `ln sum_{u <= v <= k-1} P_nk(u, v)`.
pub fn log_pnk(n: u64, k: u64) -> Result<f64> {
    check_pnk(n, k)?;
    let km1 = (k - 1) as usize;
    let table = LogStirling::new(km1);
    let mut terms = Vec::with_capacity(km1 * (km1 + 1) / 2);
    for v in 0..=km1 {
        for u in 0..=v {
            terms.push(log_pnk_with(&table, n as f64, k as f64, u, v));
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Log of the `v`-th term `(k)_v / (k-1)^v * C(k-1, v)` of `S_k`.
pub fn log_sk_term(k: u64, v: u64) -> f64 {
    let (k, v) = (k as f64, v as f64);
    ln_falling(k, v) - v * (k - 1.0).ln() + ln_choose(k - 1.0, v)
}

/// `ln S_k`, `S_k = sum_{v <= k-1} (k)_v / (k-1)^v * C(k-1, v)`.
pub fn log_sk(k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain("log_sk", format!("need k >= 2, got {k}")));
    }
    let terms: Vec<f64> = (0..k).map(|v| log_sk_term(k, v)).collect();
    Ok(log_sum_exp(&terms))
}

/// Saddle-point approximation `sigma + k H(sigma) - ln sqrt(sigma (-H''(sigma)))`
/// of `ln S_k`, accurate to `O(1/k)`.
pub fn log_sk_asymptotic(k: u64) -> f64 {
    let s = sigma();
    s + k as f64 * h_z(s) - 0.5 * (s * -h_z_second(s)).ln()
}

/// `H(z) = -z - 2 (1 - z) ln(1 - z) - z ln z` on `(0, 1)`.
pub fn h_z(z: f64) -> f64 {
    -z - 2.0 * (1.0 - z) * (-z).ln_1p() - z * z.ln()
}

/// `H'(z) = 2 ln(1 - z) - ln z`.
pub fn h_z_prime(z: f64) -> f64 {
    2.0 * (-z).ln_1p() - z.ln()
}

/// `H''(z) = -2 / (1 - z) - 1 / z`.
pub fn h_z_second(z: f64) -> f64 {
    -2.0 / (1.0 - z) - 1.0 / z
}

/// Maximiser `(3 - sqrt 5) / 2` of [`h_z`].
pub fn sigma() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// `lambda = 1 - 1/e + H(sigma)`.
pub fn lambda() -> f64 {
    1.0 - 1.0 / E + h_z(sigma())
}

/// `k = floor(n^delta)`.
pub fn yn_k(n: u64, delta: f64) -> u64 {
    (n as f64).powf(delta).floor() as u64
}

fn check_yn(n: u64, delta: f64) -> Result<u64> {
    if n < 1000 || !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain("log_e_yn", format!("need n >= 1000, 0 < delta < 1/2; n={n}, delta={delta}")));
    }
    let k = yn_k(n, delta);
    if k < 2 {
        return Err(Error::domain("log_e_yn", format!("k = floor(n^delta) = {k} < 2")));
    }
    Ok(k)
}

/// Main term of `ln E[Y_n]` at an explicit `k`:
/// `ln[(k-1)^(2k) / (k! (k-1)! n) e^(-k(1 + 1/e)) S_k]`.
pub fn log_e_yn_at(n: u64, k: u64) -> Result<f64> {
    let kf = k as f64;
    Ok(2.0 * kf * (kf - 1.0).ln() - ln_gamma(kf + 1.0) - ln_gamma(kf) - (n as f64).ln() - kf * (1.0 + 1.0 / E)
        + log_sk(k)?)
}

/// Main term of `ln E[Y_n]`, `Y_n` counting pairs `(K, L)` with `|K| = k`,
/// `L = Gamma(K)`, `|L| = k - 1`, at `k = floor(n^delta)`. The
/// `1 + O(n^(-1/2 + delta + eps))` factor and the exponentially small
/// additive term are not included.
pub fn log_e_yn(n: u64, delta: f64) -> Result<f64> {
    let k = check_yn(n, delta)?;
    log_e_yn_at(n, k)
}

/// `ln(k/n) + 2 ln C(n, k) + 2k ln(k/n) - k(2m+1)/(m+1)`: the product in the
/// small-`k` bad-pair bound without its `O(.)` corrections.
pub fn log_enk_smallk(n: u64, k: u64, m: u32) -> Result<f64> {
    let (nf, kf) = (n as f64, k as f64);
    if !(k >= 1 && kf <= nf.sqrt()) {
        return Err(Error::domain("log_enk_smallk", format!("need 1 <= k <= sqrt n; n={n}, k={k}")));
    }
    let m1 = f64::from(m) + 1.0;
    Ok((kf / nf).ln() + 2.0 * ln_choose(nf, kf) + 2.0 * kf * (kf / nf).ln() - kf * (2.0 * f64::from(m) + 1.0) / m1)
}

/// `-(2m/(m+1)) ln C(n, k)`, the bound on `ln E[X_k]` for the number of
/// `k`-row sets inducing a component. Vacuous for `m = 0`.
pub fn log_xk_bound(n: u64, k: u64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Unsupported("log_xk_bound"));
    }
    if !(k >= 1 && 2 * k <= n) {
        return Err(Error::domain("log_xk_bound", format!("need 1 <= k <= n/2; n={n}, k={k}")));
    }
    let m = f64::from(m);
    Ok(-(2.0 * m / (m + 1.0)) * ln_choose(n as f64, k as f64))
}

/// `ln sum_{k=1}^{n/2} exp(log_xk_bound(n, k, m))`.
pub fn log_xk_sum(n: u64, m: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("log_xk_sum", format!("need n >= 2, got {n}")));
    }
    let terms = (1..=n / 2).map(|k| log_xk_bound(n, k, m)).collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&terms))
}

/// Which correction a reported value leaves out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Omitted {
    /// `log_enk_bound`: the `O(.)` terms of the small-`k` estimate.
    BigOTerms,
    /// `log_e_yn`: the `1 + O(n^(-1/2+delta+eps))` factor and additive tail.
    MainTermOnly,
    /// `log_xk_bound`, `log_xk_sum`: an upper bound, not a moment.
    UpperBoundOnly,
    /// `log_sk`: exact sum; its use in `E[Y_n]` drops a `1 + O(n^(2 delta - 1))`
    /// factor from summing over `u`.
    DominantUOnly,
}

impl fmt::Display for Omitted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Omitted::BigOTerms => "big-o-terms-omitted",
            Omitted::MainTermOnly => "main-term-only",
            Omitted::UpperBoundOnly => "upper-bound-only",
            Omitted::DominantUOnly => "dominant-u-only",
        })
    }
}

/// Log-space moment values for one `(n, m, k)` configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: u64,
    pub m: u32,
    /// `k` used by the small-`k` and connectivity bounds.
    pub k: u64,
    pub delta: f64,
    /// `floor(n^delta)`, the `k` of `Y_n`.
    pub k_yn: u64,
    pub log_enk_bound: Option<f64>,
    pub log_sk: f64,
    pub log_e_yn: f64,
    pub h_sigma: f64,
    pub lambda: f64,
    pub log_xk_bound: Option<f64>,
    pub log_xk_sum: Option<f64>,
    pub omitted: Vec<(&'static str, Omitted)>,
}

impl MomentReport {
    /// `k` defaults to `floor(n^delta)`. Bounds whose preconditions fail for
    /// this `(n, k, m)` are left out rather than reported as errors.
    pub fn compute(n: u64, m: u32, k: Option<u64>, delta: f64) -> Result<Self> {
        let k_yn = check_yn(n, delta)?;
        let k = k.unwrap_or(k_yn);
        if k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let log_enk_bound = log_enk_smallk(n, k, m).ok();
        let (log_xk_bound, log_xk_sum) = if m >= 1 && 2 * k <= n {
            (Some(log_xk_bound(n, k, m)?), Some(log_xk_sum(n, m)?))
        } else {
            (None, None)
        };
        let mut omitted = vec![("log_Sk", Omitted::DominantUOnly), ("log_E_Yn", Omitted::MainTermOnly)];
        if log_enk_bound.is_some() {
            omitted.insert(0, ("log_Enk_bound", Omitted::BigOTerms));
        }
        if log_xk_bound.is_some() {
            omitted.push(("log_Xk_bound", Omitted::UpperBoundOnly));
            omitted.push(("log_Xk_sum", Omitted::UpperBoundOnly));
        }
        Ok(Self {
            n,
            m,
            k,
            delta,
            k_yn,
            log_enk_bound,
            log_sk: log_sk(k_yn)?,
            log_e_yn: log_e_yn_at(n, k_yn)?,
            h_sigma: h_z(sigma()),
            lambda: lambda(),
            log_xk_bound,
            log_xk_sum,
            omitted,
        })
    }

    /// Named numeric entries in output order.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![];
        if let Some(v) = self.log_enk_bound {
            out.push(("log_Enk_bound", v));
        }
        out.push(("log_Sk", self.log_sk));
        out.push(("log_E_Yn", self.log_e_yn));
        out.push(("H_sigma", self.h_sigma));
        out.push(("lambda", self.lambda));
        if let Some(v) = self.log_xk_bound {
            out.push(("log_Xk_bound", v));
        }
        if let Some(v) = self.log_xk_sum {
            out.push(("log_Xk_sum", v));
        }
        out
    }

    pub fn flag(&self, name: &str) -> Option<Omitted> {
        self.omitted.iter().find(|(n, _)| *n == name).map(|&(_, o)| o)
    }
}
