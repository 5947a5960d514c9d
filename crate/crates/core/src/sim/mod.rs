//! Exact samplers for the logistic and linear continuous-time chains, the
//! discrete-time approximation chain, and the coupling constructions used to
//! compare them.
//!
//! The continuous-time samplers are event driven: in state `x` the holding
//! time is exponential with the total jump rate and the direction is chosen
//! in proportion to the up and down rates. Nothing is discretised.

mod coupling;
mod discrete;
mod rng;

use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialCondition, ModelParams};

pub use coupling::{
    run_monotone_pair, run_sandwich_coupling, run_tv_coupling, skeleton_row, CouplingTrace,
    SkeletonRow, TauEvent, TvCoupling,
};
pub use discrete::{
    run_contraction_pair, run_discrete, step_discrete, DiscreteChainParams, Transition,
};
pub use rng::{RandomSource, SimRng};

/// How a simulated path ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// State 0 was reached at `time`.
    Extinct { time: f64 },
    /// Still alive at the horizon.
    Censored { t_max: f64 },
    /// The linear chain reached its simulation cap at `time`.
    CapHit { time: f64 },
}

/// Whether to keep the full path or only the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordMode {
    Full,
    #[default]
    ExtinctionOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_state: u64,
    /// Jump times; empty in [`RecordMode::ExtinctionOnly`].
    pub event_times: Vec<f64>,
    /// State after each jump.
    pub states: Vec<u64>,
    pub outcome: Outcome,
    pub event_count: u64,
}

impl Trajectory {
    pub fn extinction_time(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Extinct { time } => Some(time),
            _ => None,
        }
    }

    pub fn censored(&self) -> bool {
        matches!(self.outcome, Outcome::Censored { .. })
    }

    pub fn cap_hit(&self) -> bool {
        matches!(self.outcome, Outcome::CapHit { .. })
    }

    /// Writes `time,state` rows, starting with the initial state at time 0.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time,state")?;
        writeln!(out, "0,{}", self.initial_state)?;
        for (t, x) in self.event_times.iter().zip(&self.states) {
            writeln!(out, "{t},{x}")?;
        }
        Ok(())
    }
}

fn check_horizon(t_max: f64) -> Result<()> {
    if t_max > 0.0 && t_max.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "censoring horizon t_max must be positive and finite, got {t_max}"
        )))
    }
}

/// Runs a birth-death chain with the given rates until it hits 0, reaches
/// `cap`, or passes `t_max`.
fn run_birth_death<R, F>(
    x0: u64,
    rates: F,
    cap: Option<u64>,
    t_max: f64,
    mode: RecordMode,
    rng: &mut R,
) -> Trajectory
where
    R: Rng + ?Sized,
    F: Fn(u64) -> (f64, f64),
{
    let mut traj = Trajectory {
        initial_state: x0,
        event_times: Vec::new(),
        states: Vec::new(),
        outcome: Outcome::Censored { t_max },
        event_count: 0,
    };
    let mut x = x0;
    let mut t = 0.0;
    loop {
        if x == 0 {
            traj.outcome = Outcome::Extinct { time: t };
            return traj;
        }
        if cap == Some(x) {
            traj.outcome = Outcome::CapHit { time: t };
            return traj;
        }
        let (up, down) = rates(x);
        let total = up + down;
        let hold: f64 = rng.sample(Exp1);
        t += hold / total;
        if t > t_max {
            return traj;
        }
        x = if rng.random::<f64>() * total < up { x + 1 } else { x - 1 };
        traj.event_count += 1;
        if mode == RecordMode::Full {
            traj.event_times.push(t);
            traj.states.push(x);
        }
    }
}

/// Samples the logistic chain from `ic` until extinction or `t_max`.
pub fn sample_extinction_logistic<R: Rng + ?Sized>(
    p: &ModelParams,
    ic: InitialCondition,
    t_max: f64,
    mode: RecordMode,
    rng: &mut R,
) -> Result<Trajectory> {
    check_horizon(t_max)?;
    if ic.x0() > p.n() {
        return Err(Error::domain("initial state exceeds N"));
    }
    Ok(run_birth_death(
        ic.x0(),
        |x| (p.up_rate(x), p.down_rate(x)),
        None,
        t_max,
        mode,
        rng,
    ))
}

/// Default simulation cap for the linear chain: `10 x_start`.
pub fn default_linear_cap(x_start: u64) -> u64 {
    (10 * x_start).max(x_start + 1)
}

/// Samples the linear chain with rates `(lambda y, mu y)`. Reaching `y_cap`
/// stops the run with [`Outcome::CapHit`].
pub fn sample_extinction_linear<R: Rng + ?Sized>(
    p: &ModelParams,
    x_start: u64,
    t_max: f64,
    y_cap: u64,
    mode: RecordMode,
    rng: &mut R,
) -> Result<Trajectory> {
    check_horizon(t_max)?;
    if y_cap <= x_start {
        return Err(Error::domain(format!(
            "y_cap = {y_cap} must exceed x_start = {x_start}"
        )));
    }
    let (lambda, mu) = (p.lambda(), p.mu());
    Ok(run_birth_death(
        x_start,
        |y| (lambda * y as f64, mu * y as f64),
        Some(y_cap),
        t_max,
        mode,
        rng,
    ))
}

/// States of one logistic path observed at the (nondecreasing) `times`.
pub fn sample_logistic_at_times<R: Rng + ?Sized>(
    p: &ModelParams,
    ic: InitialCondition,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::domain("observation times must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("observation times must be sorted"));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut x = ic.x0();
    let mut t = 0.0;
    let mut next_jump = if x == 0 {
        f64::INFINITY
    } else {
        let hold: f64 = rng.sample(Exp1);
        hold / (p.up_rate(x) + p.down_rate(x))
    };
    for &obs in times {
        while t + next_jump <= obs {
            t += next_jump;
            let (up, down) = (p.up_rate(x), p.down_rate(x));
            x = if rng.random::<f64>() * (up + down) < up { x + 1 } else { x - 1 };
            next_jump = if x == 0 {
                f64::INFINITY
            } else {
                let hold: f64 = rng.sample(Exp1);
                hold / (p.up_rate(x) + p.down_rate(x))
            };
        }
        out.push(x);
    }
    Ok(out)
}

/// Draws the number of Bernoulli(`p_success`) trials up to and including the
/// first success. Saturates at `u64::MAX`.
pub(crate) fn geometric_trials<R: Rng + ?Sized>(p_success: f64, rng: &mut R) -> u64 {
    if p_success >= 1.0 {
        return 1;
    }
    if p_success <= 0.0 {
        return u64::MAX;
    }
    let u = 1.0 - rng.random::<f64>();
    let failures = (u.ln() / (-p_success).ln_1p()).floor();
    if failures >= (u64::MAX - 1) as f64 {
        u64::MAX
    } else {
        failures as u64 + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, lambda: f64, mu: f64) -> ModelParams {
        ModelParams::new(n, lambda, mu).unwrap()
    }

    #[test]
    fn absorbed_start() {
        let p = params(10, 0.5, 1.0);
        let ic = InitialCondition::new(0, &p).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        let tr = sample_extinction_logistic(&p, ic, 10.0, RecordMode::Full, &mut rng).unwrap();
        assert_eq!(tr.extinction_time(), Some(0.0));
        assert!(tr.event_times.is_empty());
        let lin = sample_extinction_linear(&p, 0, 10.0, 1, RecordMode::Full, &mut rng).unwrap();
        assert_eq!(lin.extinction_time(), Some(0.0));
    }

    #[test]
    fn horizon_required() {
        let p = params(10, 0.5, 1.0);
        let ic = InitialCondition::new(5, &p).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        for bad in [0.0, -1.0, f64::INFINITY, f64::NAN] {
            assert!(sample_extinction_logistic(&p, ic, bad, RecordMode::Full, &mut rng).is_err());
        }
        assert!(sample_extinction_linear(&p, 5, 1.0, 5, RecordMode::Full, &mut rng).is_err());
    }

    #[test]
    fn trajectory_shape() {
        let p = params(200, 0.8, 1.0);
        let ic = InitialCondition::new(150, &p).unwrap();
        let mut rng = RandomSource::new(9, 2).rng();
        let tr = sample_extinction_logistic(&p, ic, 1e4, RecordMode::Full, &mut rng).unwrap();
        assert_eq!(tr.states.len() as u64, tr.event_count);
        assert!(tr.event_times.windows(2).all(|w| w[1] > w[0]));
        let mut prev = tr.initial_state;
        for &x in &tr.states {
            assert_eq!((x as i64 - prev as i64).abs(), 1);
            assert!(x <= 200);
            prev = x;
        }
        assert_eq!(*tr.states.last().unwrap(), 0);
        assert_eq!(tr.extinction_time(), tr.event_times.last().copied());

        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,state\n0,150\n"));
        assert_eq!(text.lines().count() as u64, tr.event_count + 2);
    }

    #[test]
    fn fast_path_matches_full_recording() {
        let p = params(300, 0.6, 1.0);
        let ic = InitialCondition::new(300, &p).unwrap();
        let src = RandomSource::new(3, 11);
        let full =
            sample_extinction_logistic(&p, ic, 1e4, RecordMode::Full, &mut src.rng()).unwrap();
        let fast =
            sample_extinction_logistic(&p, ic, 1e4, RecordMode::ExtinctionOnly, &mut src.rng())
                .unwrap();
        assert_eq!(full.outcome, fast.outcome);
        assert_eq!(full.event_count, fast.event_count);
        assert!(fast.states.is_empty());
    }

    #[test]
    fn censoring() {
        let p = params(1000, 2.0, 1.0);
        let ic = InitialCondition::new(500, &p).unwrap();
        let mut rng = RandomSource::new(5, 0).rng();
        let tr = sample_extinction_logistic(&p, ic, 1.0, RecordMode::ExtinctionOnly, &mut rng)
            .unwrap();
        assert!(tr.censored());
        assert_eq!(tr.extinction_time(), None);
    }

    #[test]
    fn linear_cap_is_flagged() {
        let p = params(10, 3.0, 1.0);
        let mut rng = RandomSource::new(5, 0).rng();
        let tr = sample_extinction_linear(&p, 20, 1e6, 25, RecordMode::Full, &mut rng).unwrap();
        if let Outcome::CapHit { .. } = tr.outcome {
            assert_eq!(*tr.states.last().unwrap(), 25);
        } else {
            assert!(tr.extinction_time().is_some());
        }
        assert_eq!(default_linear_cap(50), 500);
        assert_eq!(default_linear_cap(0), 1);
    }

    #[test]
    fn observation_at_times_matches_path() {
        let p = params(100, 0.9, 1.0);
        let ic = InitialCondition::new(80, &p).unwrap();
        let times = [0.0, 0.5, 1.0, 2.0, 4.0];
        let obs = sample_logistic_at_times(&p, ic, &times, &mut RandomSource::new(1, 1).rng())
            .unwrap();
        assert_eq!(obs[0], 80);
        assert!(sample_logistic_at_times(&p, ic, &[1.0, 0.5], &mut RandomSource::new(1, 1).rng())
            .is_err());
    }

    #[test]
    fn geometric_mean() {
        let mut rng = RandomSource::new(2, 0).rng();
        let n = 200_000;
        let p = 0.05;
        let mean = (0..n).map(|_| geometric_trials(p, &mut rng) as f64).sum::<f64>() / n as f64;
        let se = ((1.0 - p) / (p * p) / n as f64).sqrt();
        assert!((mean - 1.0 / p).abs() < 4.0 * se);
        assert_eq!(geometric_trials(1.0, &mut rng), 1);
        assert_eq!(geometric_trials(0.0, &mut rng), u64::MAX);
    }
}
