//! Parallel Monte Carlo batches and the statistics computed from them.
//!
//! Replicate `i` always draws from stream `i` of the master seed and results
//! are collected in stream order, so every output is independent of the
//! number of worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{gumbel_cdf, GumbelPrediction, RegimeFormula, TimeGrid, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::model::{ode_z, InitialCondition, ModelParams, OdeSolution};
use crate::sim::{sample_extinction_logistic, sample_logistic_at_times, RandomSource, RecordMode};

/// Largest censored fraction tolerated before statistics are refused.
pub const MAX_CENSORED_FRACTION: f64 = 1e-3;

/// Header of the per-replicate CSV export.
pub const SAMPLE_CSV_HEADER: &str = "stream_id,extinction_time,event_count,censored";

/// Runs `f(stream_id)` for `stream_id in 0..n` and returns the results in
/// stream order. `threads = None` uses the global rayon pool.
pub fn map_streams<T, F>(n: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match threads {
        None => Ok((0..n).into_par_iter().map(&f).collect()),
        Some(0) => Err(Error::domain("thread count must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub stream_id: u64,
    /// `None` when censored.
    pub extinction_time: Option<f64>,
    pub event_count: u64,
}

impl ReplicateRecord {
    pub fn censored(&self) -> bool {
        self.extinction_time.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSampleSet {
    pub params: ModelParams,
    pub x0: u64,
    pub master_seed: u64,
    pub t_max: f64,
    /// One record per replicate, in stream order.
    pub records: Vec<ReplicateRecord>,
    /// Extinction times of the uncensored replicates, in stream order.
    pub samples: Vec<f64>,
    pub censored_count: u64,
}

impl ExtinctionSampleSet {
    pub fn replicates(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored_count as f64 / self.records.len().max(1) as f64
    }

    /// Fails when more than [`MAX_CENSORED_FRACTION`] of replicates were censored.
    pub fn check_censoring(&self) -> Result<()> {
        let fraction = self.censored_fraction();
        if fraction > MAX_CENSORED_FRACTION {
            return Err(Error::Censoring {
                censored: self.censored_count,
                total: self.replicates(),
                fraction,
                allowed: MAX_CENSORED_FRACTION,
            });
        }
        Ok(())
    }

    /// Applies `w = (mu - lambda) T - C` to every sample.
    pub fn normalize(&self, prediction: &GumbelPrediction) -> Result<NormalizedSampleSet> {
        self.check_censoring()?;
        Ok(NormalizedSampleSet {
            values: self.samples.iter().map(|&t| prediction.normalize(t)).collect(),
            centering: prediction.centering,
            scale: prediction.scale,
            formula: prediction.regime_formula,
        })
    }

    /// Writes one CSV row per replicate. Censored rows carry `t_max` as the
    /// time and a `1` flag.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SAMPLE_CSV_HEADER}")?;
        for r in &self.records {
            let (t, flag) = match r.extinction_time {
                Some(t) => (t, 0),
                None => (self.t_max, 1),
            };
            writeln!(out, "{},{t},{},{flag}", r.stream_id, r.event_count)?;
        }
        Ok(())
    }

    pub fn mean(&self) -> Option<MeanEstimate> {
        MeanEstimate::from_samples(&self.samples)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub n: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let sd = var.sqrt();
        Some(MeanEstimate {
            mean,
            sd,
            se: sd / n.sqrt(),
            n: xs.len() as u64,
        })
    }
}

/// Simulates `n` extinction times of the logistic chain from `ic`, replicate
/// `i` on stream `i`. `threads` only affects speed.
pub fn run_batch(
    p: &ModelParams,
    ic: InitialCondition,
    n: u64,
    master_seed: u64,
    t_max: f64,
    threads: Option<usize>,
) -> Result<ExtinctionSampleSet> {
    if n == 0 {
        return Err(Error::domain("run_batch needs n >= 1"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("t_max must be positive and finite, got {t_max}")));
    }
    let records = map_streams(n, threads, |stream_id| {
        let mut rng = RandomSource::new(master_seed, stream_id).rng();
        let traj = sample_extinction_logistic(p, ic, t_max, RecordMode::ExtinctionOnly, &mut rng)
            .expect("inputs validated above");
        ReplicateRecord {
            stream_id,
            extinction_time: traj.extinction_time(),
            event_count: traj.event_count,
        }
    })?;
    let samples: Vec<f64> = records.iter().filter_map(|r| r.extinction_time).collect();
    let censored_count = records.len() as u64 - samples.len() as u64;
    Ok(ExtinctionSampleSet {
        params: *p,
        x0: ic.x0(),
        master_seed,
        t_max,
        records,
        samples,
        censored_count,
    })
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF of an empty sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    /// Fraction of samples `<= t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn empirical_cdf(samples: &[f64], t: f64) -> Result<f64> {
    Ok(EmpiricalCdf::new(samples)?.eval(t))
}

/// Normalized extinction times `w_i = (mu - lambda) T_i - C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSampleSet {
    pub values: Vec<f64>,
    pub centering: f64,
    pub scale: f64,
    pub formula: RegimeFormula,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks_distance: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    /// Mean of the standard Gumbel law.
    pub predicted_mean: f64,
    pub n: u64,
}

/// Minimum sample size for [`ks_vs_gumbel`].
pub const KS_MIN_SAMPLES: usize = 10;

/// Kolmogorov-Smirnov distance between the normalized sample and the
/// standard Gumbel law, evaluated exactly at the jump points.
pub fn ks_vs_gumbel(ns: &NormalizedSampleSet) -> Result<GofReport> {
    ks_against(&ns.values, gumbel_cdf)
}

/// KS distance of `values` against a continuous distribution function.
pub fn ks_against(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<GofReport> {
    if values.len() < KS_MIN_SAMPLES {
        return Err(Error::domain(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            values.len()
        )));
    }
    let ecdf = EmpiricalCdf::new(values)?;
    let n = values.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &w) in ecdf.sorted().iter().enumerate() {
        let f = cdf(w);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let est = MeanEstimate::from_samples(values).expect("nonempty");
    Ok(GofReport {
        ks_distance: d.clamp(0.0, 1.0),
        sample_mean: est.mean,
        sample_sd: est.sd,
        predicted_mean: EULER_GAMMA,
        n: values.len() as u64,
    })
}

/// Width of every Monte Carlo band, in standard errors.
pub const SE_BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDominationRow {
    pub t: f64,
    pub mc_mean: f64,
    pub se: f64,
    /// `N z(t)`.
    pub bound: f64,
    /// `mc_mean > bound + 3 se`.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDominationReport {
    pub rows: Vec<MeanDominationRow>,
    pub replicates: u64,
}

impl MeanDominationReport {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violated)
    }
}

/// Compares the Monte Carlo mean of `X_t` with the ODE value `N z(t)` on
/// `grid`.
pub fn mean_domination_report(
    p: &ModelParams,
    ic: InitialCondition,
    grid: &TimeGrid,
    n: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<MeanDominationReport> {
    if n == 0 {
        return Err(Error::domain("mean_domination_report needs n >= 1"));
    }
    let sol = OdeSolution::from_initial(*p, ic)?;
    let times = grid.times();
    let paths = map_streams(n, threads, |stream| {
        let mut rng = RandomSource::new(seed, stream).rng();
        sample_logistic_at_times(p, ic, times, &mut rng)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let nf = p.n() as f64;
    let mut rows = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let column: Vec<f64> = paths.iter().map(|path| path[j] as f64).collect();
        let est = MeanEstimate::from_samples(&column).expect("n >= 1");
        let bound = nf * ode_z(&sol, t)?;
        rows.push(MeanDominationRow {
            t,
            mc_mean: est.mean,
            se: est.se,
            bound,
            violated: est.mean > bound + SE_BAND * est.se,
        });
    }
    Ok(MeanDominationReport { rows, replicates: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{exact_mean_extinction, predict_extinction};

    fn params(n: u64, lambda: f64, mu: f64) -> ModelParams {
        ModelParams::new(n, lambda, mu).unwrap()
    }

    #[test]
    fn zero_start_gives_zero_sample() {
        let p = params(10, 0.5, 1.0);
        let ic = InitialCondition::new(0, &p).unwrap();
        let s = run_batch(&p, ic, 1, 0, 10.0, Some(1)).unwrap();
        assert_eq!(s.samples, vec![0.0]);
        assert_eq!(s.censored_count, 0);
        assert!(run_batch(&p, ic, 0, 0, 10.0, None).is_err());
    }

    #[test]
    fn batch_independent_of_threads() {
        let p = params(200, 0.5, 1.0);
        let ic = InitialCondition::new(200, &p).unwrap();
        let a = run_batch(&p, ic, 500, 17, 1e6, Some(1)).unwrap();
        let b = run_batch(&p, ic, 500, 17, 1e6, Some(8)).unwrap();
        let c = run_batch(&p, ic, 500, 17, 1e6, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = run_batch(&p, ic, 500, 18, 1e6, Some(4)).unwrap();
        assert_ne!(a.samples, d.samples);
    }

    #[test]
    fn batch_mean_matches_exact() {
        let p = params(1000, 0.5, 1.0);
        let ic = InitialCondition::new(1000, &p).unwrap();
        let s = run_batch(&p, ic, 10_000, 5, 1e6, None).unwrap();
        let est = s.mean().unwrap();
        let exact = exact_mean_extinction(&p, 1000).unwrap();
        assert!((est.mean - exact).abs() < 3.0 * est.se, "{} vs {exact}", est.mean);
    }

    #[test]
    fn censoring_is_counted_and_enforced() {
        let p = params(100, 2.0, 1.0);
        let ic = InitialCondition::new(50, &p).unwrap();
        let s = run_batch(&p, ic, 50, 1, 1.0, Some(2)).unwrap();
        assert_eq!(s.censored_count, 50);
        assert!(s.samples.is_empty());
        assert!(matches!(s.check_censoring(), Err(Error::Censoring { .. })));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SAMPLE_CSV_HEADER));
        assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));
    }

    #[test]
    fn empirical_cdf_examples() {
        let s = [1.0, 2.0, 3.0];
        assert_eq!(empirical_cdf(&s, 0.5).unwrap(), 0.0);
        assert_eq!(empirical_cdf(&s, 2.0).unwrap(), 2.0 / 3.0);
        assert_eq!(empirical_cdf(&s, 3.0).unwrap(), 1.0);
        assert_eq!(empirical_cdf(&s, 1e9).unwrap(), 1.0);
        assert!(empirical_cdf(&[], 1.0).is_err());
        let e = EmpiricalCdf::new(&s).unwrap();
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.quantile(0.0), 1.0);
        assert_eq!(e.quantile(1.0), 3.0);
    }

    fn gumbel_quantile(u: f64) -> f64 {
        -(-u.ln()).ln()
    }

    #[test]
    fn ks_on_inverse_cdf_grid() {
        let m = 10_000;
        let values: Vec<f64> = (0..m)
            .map(|i| gumbel_quantile((i as f64 + 0.5) / m as f64))
            .collect();
        let ns = NormalizedSampleSet {
            values,
            centering: 0.0,
            scale: 1.0,
            formula: RegimeFormula::General,
        };
        let r = ks_vs_gumbel(&ns).unwrap();
        assert!(r.ks_distance < 1.5e-4, "{}", r.ks_distance);
        assert!((r.sample_mean - EULER_GAMMA).abs() < 2e-3);
        assert_eq!(r.predicted_mean, EULER_GAMMA);
    }

    #[test]
    fn ks_point_mass_is_at_least_half() {
        for &w0 in &[-3.0, 0.0, 0.3665, 4.0] {
            let ns = NormalizedSampleSet {
                values: vec![w0; 50],
                centering: 0.0,
                scale: 1.0,
                formula: RegimeFormula::General,
            };
            let r = ks_vs_gumbel(&ns).unwrap();
            let f = gumbel_cdf(w0);
            assert!((r.ks_distance - f.max(1.0 - f)).abs() < 1e-15);
            assert!(r.ks_distance >= 0.5);
        }
        let short = NormalizedSampleSet {
            values: vec![0.0; 9],
            centering: 0.0,
            scale: 1.0,
            formula: RegimeFormula::General,
        };
        assert!(ks_vs_gumbel(&short).is_err());
    }

    #[test]
    fn normalization_is_affine_and_order_preserving() {
        let p = params(500, 0.5, 1.0);
        let ic = InitialCondition::new(500, &p).unwrap();
        let s = run_batch(&p, ic, 200, 3, 1e6, None).unwrap();
        let pred = predict_extinction(&p, ic, RegimeFormula::General).unwrap();
        let ns = s.normalize(&pred).unwrap();
        for (t, w) in s.samples.iter().zip(&ns.values) {
            assert!((w - (0.5 * t - pred.centering)).abs() < 1e-12);
        }
        for i in 0..s.samples.len() {
            for j in 0..s.samples.len() {
                if s.samples[i] < s.samples[j] {
                    assert!(ns.values[i] < ns.values[j]);
                }
            }
        }
    }

    #[test]
    fn mean_domination_small_instance() {
        let p = params(200, 0.8, 1.0);
        let ic = InitialCondition::new(200, &p).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.5, 2.0]).unwrap();
        let r = mean_domination_report(&p, ic, &grid, 2000, 4, None).unwrap();
        assert_eq!(r.rows[0].mc_mean, 200.0);
        assert_eq!(r.rows[0].bound, 200.0);
        assert!(!r.any_violation(), "{:?}", r.rows);
    }

    #[test]
    fn mean_domination_pure_death() {
        let p = params(100, 0.0, 1.0);
        let ic = InitialCondition::new(100, &p).unwrap();
        let grid = TimeGrid::new(vec![0.5, 1.0]).unwrap();
        let r = mean_domination_report(&p, ic, &grid, 4000, 8, None).unwrap();
        for row in &r.rows {
            let expected = 100.0 * (-row.t).exp();
            assert!((row.bound - expected).abs() < 1e-10);
            assert!((row.mc_mean - expected).abs() < 3.0 * row.se);
        }
    }
}
