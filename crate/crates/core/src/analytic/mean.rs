//! Exact mean extinction time of the logistic chain.
//!
//! Writing `tau_k` for the expected time to step from `k` down to `k - 1`,
//! first-step analysis gives `tau_N = 1 / q_N` and
//! `tau_k = (1 + b_k tau_{k+1}) / q_k` with `b_k`, `q_k` the up and down
//! rates. The mean from `x0` is `tau_1 + ... + tau_{x0}`. Every term is
//! positive, so the backward sweep has no cancellation.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Largest `N` accepted by [`mean_extinction_double_sum`].
pub const DOUBLE_SUM_MAX_N: u64 = 500;

fn check_x0(p: &ModelParams, x0: u64) -> Result<()> {
    if x0 > p.n() {
        return Err(Error::domain(format!(
            "x0 = {x0} outside 0..={}",
            p.n()
        )));
    }
    Ok(())
}

/// Per-level descent times `tau_1..=tau_N` (index 0 unused), or `None` if
/// they overflow `f64`.
fn descent_times(p: &ModelParams) -> Option<Vec<f64>> {
    let n = p.n() as usize;
    let mut tau = vec![0.0; n + 1];
    tau[n] = 1.0 / p.down_rate(n as u64);
    for k in (1..n).rev() {
        let (b, q) = (p.up_rate(k as u64), p.down_rate(k as u64));
        tau[k] = (1.0 + b * tau[k + 1]) / q;
        if !tau[k].is_finite() {
            return None;
        }
    }
    Some(tau)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn log_descent_times(p: &ModelParams) -> Vec<f64> {
    let n = p.n() as usize;
    let mut ln_tau = vec![f64::NEG_INFINITY; n + 1];
    ln_tau[n] = -p.down_rate(n as u64).ln();
    for k in (1..n).rev() {
        let ln_q = p.down_rate(k as u64).ln();
        let ln_b = p.up_rate(k as u64).ln();
        ln_tau[k] = log_add_exp(-ln_q, ln_b - ln_q + ln_tau[k + 1]);
    }
    ln_tau
}

/// Natural log of the exact mean extinction time; finite even when the mean
/// itself overflows (deep supercritical parameters).
pub fn exact_mean_extinction_ln(p: &ModelParams, x0: u64) -> Result<f64> {
    check_x0(p, x0)?;
    if x0 == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    if let Some(tau) = descent_times(p) {
        let mean: f64 = tau[1..=x0 as usize].iter().sum();
        if mean.is_finite() {
            return Ok(mean.ln());
        }
    }
    let ln_tau = log_descent_times(p);
    Ok(ln_tau[1..=x0 as usize]
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| log_add_exp(acc, v)))
}

/// Exact `E[T_e]` for the logistic chain started at `x0`.
///
/// Returns `f64::INFINITY` only when the true value exceeds `f64::MAX`; use
/// [`exact_mean_extinction_ln`] in that case.
pub fn exact_mean_extinction(p: &ModelParams, x0: u64) -> Result<f64> {
    check_x0(p, x0)?;
    if x0 == 0 {
        return Ok(0.0);
    }
    if let Some(tau) = descent_times(p) {
        let mean: f64 = tau[1..=x0 as usize].iter().sum();
        if mean.is_finite() {
            return Ok(mean);
        }
    }
    Ok(exact_mean_extinction_ln(p, x0)?.exp())
}

/// `E[T_e]` from every starting state `0..=N`.
pub fn mean_extinction_profile(p: &ModelParams) -> Vec<f64> {
    let n = p.n() as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    match descent_times(p) {
        Some(tau) => {
            let mut acc = 0.0;
            for &t in &tau[1..] {
                acc += t;
                out.push(acc);
            }
        }
        None => {
            let ln_tau = log_descent_times(p);
            let mut acc = f64::NEG_INFINITY;
            for &v in &ln_tau[1..] {
                acc = log_add_exp(acc, v);
                out.push(acc.exp());
            }
        }
    }
    out
}

/// The classical double-summation form
/// `E_{x0} = sum_{k=1}^{x0} sum_{j=k}^{N} (1/q_j) prod_{i=k}^{j-1} b_i/q_i`,
/// kept as an independent cross-check for small `N`.
pub fn mean_extinction_double_sum(p: &ModelParams, x0: u64) -> Result<f64> {
    check_x0(p, x0)?;
    if p.n() > DOUBLE_SUM_MAX_N {
        return Err(Error::CostGuard {
            what: "N",
            value: p.n(),
            limit: DOUBLE_SUM_MAX_N,
            hint: "use exact_mean_extinction",
        });
    }
    let n = p.n();
    let mut total = 0.0;
    for k in 1..=x0 {
        let mut prod = 1.0;
        for j in k..=n {
            total += prod / p.down_rate(j);
            prod *= p.up_rate(j) / p.down_rate(j);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, lambda: f64, mu: f64) -> ModelParams {
        ModelParams::new(n, lambda, mu).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let p = params(10, 0.5, 1.0);
        assert_eq!(exact_mean_extinction(&p, 0).unwrap(), 0.0);
        assert!(exact_mean_extinction(&p, 11).is_err());
        for &(lambda, mu) in &[(0.5, 1.0), (3.0, 0.7), (1.0, 1.0)] {
            let p = params(1, lambda, mu);
            assert!((exact_mean_extinction(&p, 1).unwrap() - 1.0 / mu).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_death_is_harmonic() {
        let p = params(60, 0.0, 2.0);
        for k in [1u64, 7, 50, 60] {
            let h: f64 = (1..=k).map(|j| 1.0 / j as f64).sum::<f64>() / 2.0;
            assert!((exact_mean_extinction(&p, k).unwrap() - h).abs() < 1e-13);
        }
    }

    /// Dense solve of the hitting-time equations
    /// (b_x + q_x) E_x = 1 + b_x E_{x+1} + q_x E_{x-1}.
    fn mean_by_dense_solve(p: &ModelParams) -> Vec<f64> {
        let n = p.n() as usize;
        let mut a = vec![vec![0.0; n + 1]; n];
        for x in 1..=n {
            let r = x - 1;
            let (b, q) = (p.up_rate(x as u64), p.down_rate(x as u64));
            a[r][r] = b + q;
            if x > 1 {
                a[r][r - 1] = -q;
            }
            if x < n {
                a[r][r + 1] = -b;
            }
            a[r][n] = 1.0;
        }
        for col in 0..n {
            for row in 0..n {
                if row != col && a[row][col] != 0.0 {
                    let f = a[row][col] / a[col][col];
                    for c in col..=n {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
        let mut e = vec![0.0];
        e.extend((0..n).map(|r| a[r][n] / a[r][r]));
        e
    }

    #[test]
    fn agrees_with_dense_solve_and_double_sum() {
        for &(n, lambda, mu) in &[(30u64, 0.5, 1.0), (40, 1.2, 1.0), (25, 1.0, 1.0)] {
            let p = params(n, lambda, mu);
            let dense = mean_by_dense_solve(&p);
            let profile = mean_extinction_profile(&p);
            for x0 in 0..=n {
                let e = exact_mean_extinction(&p, x0).unwrap();
                let d = mean_extinction_double_sum(&p, x0).unwrap();
                let rel = |a: f64, b: f64| (a - b).abs() / b.max(1e-300);
                assert!(rel(e, dense[x0 as usize]) < 1e-10, "dense x0={x0}");
                assert!(rel(e, d) < 1e-12 || e == d, "double sum x0={x0}");
                assert_eq!(e, profile[x0 as usize]);
            }
        }
        assert!(mean_extinction_double_sum(&params(501, 0.5, 1.0), 1).is_err());
    }

    #[test]
    fn monotone_in_x0() {
        let profile = mean_extinction_profile(&params(2000, 0.9, 1.0));
        assert!(profile.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn time_rescaling() {
        let p = params(5000, 0.5, 1.0);
        let base = exact_mean_extinction(&p, 5000).unwrap();
        for &c in &[0.5, 2.0] {
            let scaled = exact_mean_extinction(&p.rescaled(c).unwrap(), 5000).unwrap();
            assert!(((scaled - base / c) / (base / c)).abs() < 1e-10);
        }
    }

    #[test]
    fn supercritical_overflow_handled_in_log_space() {
        let p = params(10_000, 2.0, 1.0);
        let ln_mean = exact_mean_extinction_ln(&p, 10_000).unwrap();
        assert!(ln_mean.is_finite() && ln_mean > 700.0);
        assert_eq!(exact_mean_extinction(&p, 10_000).unwrap(), f64::INFINITY);

        let p = params(300, 2.0, 1.0);
        let direct = exact_mean_extinction(&p, 300).unwrap();
        let logged = exact_mean_extinction_ln(&p, 300).unwrap();
        let log_only = log_descent_times(&p)[1..]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &v| log_add_exp(a, v));
        assert!((direct.ln() - logged).abs() < 1e-12);
        assert!((logged - log_only).abs() < 1e-10);
    }
}
