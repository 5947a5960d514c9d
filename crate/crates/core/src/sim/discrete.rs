//! The discrete-time approximation chain: in state `x` it moves up with
//! probability `lambda x (1 - x/N) delta`, down with probability `mu x delta`
//! and otherwise holds, where `delta = 1 / (K (mu + lambda) N)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometric_trials;
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChainParams {
    k: f64,
}

/// One-step transition probabilities. `moving = up + down` is stored
/// separately so that `1 - hold` never suffers cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub up: f64,
    pub down: f64,
    pub hold: f64,
    pub moving: f64,
}

impl DiscreteChainParams {
    /// `K >= 2` keeps every hold probability at least 1/2.
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 2.0 && k.is_finite()) {
            return Err(Error::domain(format!("K must be finite and at least 2, got {k}")));
        }
        Ok(DiscreteChainParams { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Step length `1 / (K (mu + lambda) N)`.
    pub fn delta(&self, p: &ModelParams) -> f64 {
        1.0 / (self.k * (p.mu() + p.lambda()) * p.n() as f64)
    }

    /// Number of steps `ceil(K (mu + lambda) N t)` covering time `t`.
    pub fn steps_for(&self, p: &ModelParams, t: f64) -> u64 {
        (self.k * (p.mu() + p.lambda()) * p.n() as f64 * t).ceil() as u64
    }

    pub fn transition(&self, p: &ModelParams, x: u64) -> Transition {
        let delta = self.delta(p);
        let up = p.up_rate(x) * delta;
        let down = p.down_rate(x) * delta;
        let moving = up + down;
        Transition {
            up,
            down,
            hold: 1.0 - moving,
            moving,
        }
    }
}

/// One step of the discrete chain.
pub fn step_discrete<R: Rng + ?Sized>(
    p: &ModelParams,
    d: &DiscreteChainParams,
    x: u64,
    rng: &mut R,
) -> Result<u64> {
    if x > p.n() {
        return Err(Error::domain(format!("state {x} outside 0..={}", p.n())));
    }
    let tr = d.transition(p, x);
    let u: f64 = rng.random();
    Ok(if u < tr.up {
        x + 1
    } else if u < tr.moving {
        x - 1
    } else {
        x
    })
}

/// State of the discrete chain after `steps` steps from `x0`.
///
/// Runs of holds are skipped with a single geometric draw, so the cost is
/// proportional to the number of actual moves.
pub fn run_discrete<R: Rng + ?Sized>(
    p: &ModelParams,
    d: &DiscreteChainParams,
    x0: u64,
    steps: u64,
    rng: &mut R,
) -> Result<u64> {
    if x0 > p.n() {
        return Err(Error::domain(format!("state {x0} outside 0..={}", p.n())));
    }
    let mut x = x0;
    let mut remaining = steps;
    while x > 0 {
        let tr = d.transition(p, x);
        let wait = geometric_trials(tr.moving, rng);
        if wait > remaining {
            break;
        }
        remaining -= wait;
        x = if rng.random::<f64>() * tr.moving < tr.up { x + 1 } else { x - 1 };
    }
    Ok(x)
}

/// Runs two copies of the discrete chain under the contracting coupling:
/// coalesced copies move together, distinct copies never move in the same
/// step. Returns `|X_k - Y_k|` for `k = 0..=steps`.
pub fn run_contraction_pair<R: Rng + ?Sized>(
    p: &ModelParams,
    d: &DiscreteChainParams,
    x_init: u64,
    y_init: u64,
    steps: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if x_init > p.n() || y_init > p.n() {
        return Err(Error::domain(format!(
            "states ({x_init}, {y_init}) outside 0..={}",
            p.n()
        )));
    }
    let (mut x, mut y) = (x_init, y_init);
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(x.abs_diff(y));
    for _ in 0..steps {
        let u: f64 = rng.random();
        if x == y {
            let tr = d.transition(p, x);
            if u < tr.up {
                x += 1;
            } else if u < tr.moving {
                x -= 1;
            }
            y = x;
        } else {
            // [0, up_x) [.., +down_x) [.., +up_y) [.., +down_y) then hold;
            // each chain's moving mass is at most 1/K <= 1/2.
            let tx = d.transition(p, x);
            let ty = d.transition(p, y);
            if u < tx.up {
                x += 1;
            } else if u < tx.moving {
                x -= 1;
            } else if u < tx.moving + ty.up {
                y += 1;
            } else if u < tx.moving + ty.moving {
                y -= 1;
            }
        }
        out.push(x.abs_diff(y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RandomSource;

    fn params(n: u64, lambda: f64, mu: f64) -> ModelParams {
        ModelParams::new(n, lambda, mu).unwrap()
    }

    #[test]
    fn transition_example() {
        let p = params(100, 0.5, 1.0);
        let d = DiscreteChainParams::new(2.0).unwrap();
        let tr = d.transition(&p, 50);
        assert!((tr.up - 12.5 / 300.0).abs() < 1e-15);
        assert!((tr.down - 50.0 / 300.0).abs() < 1e-15);
        assert!((tr.hold - 0.7916667).abs() < 1e-7);
        assert!((tr.up + tr.down + tr.hold - 1.0).abs() < 1e-15);
        assert!(DiscreteChainParams::new(1.5).is_err());
    }

    #[test]
    fn hold_at_least_half() {
        let p = params(500, 3.0, 0.2);
        let d = DiscreteChainParams::new(2.0).unwrap();
        for x in 0..=500 {
            assert!(d.transition(&p, x).hold >= 0.5);
        }
    }

    #[test]
    fn zero_is_absorbing() {
        let p = params(100, 0.5, 1.0);
        let d = DiscreteChainParams::new(2.0).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        for _ in 0..1000 {
            assert_eq!(step_discrete(&p, &d, 0, &mut rng).unwrap(), 0);
        }
        assert!(step_discrete(&p, &d, 101, &mut rng).is_err());
        assert_eq!(run_discrete(&p, &d, 0, 1_000_000, &mut rng).unwrap(), 0);
    }

    #[test]
    fn one_step_drift() {
        let p = params(100, 0.5, 1.0);
        let d = DiscreteChainParams::new(2.0).unwrap();
        let x = 50u64;
        let mut rng = RandomSource::new(4, 0).rng();
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let dx = step_discrete(&p, &d, x, &mut rng).unwrap() as f64 - x as f64;
            sum += dx;
            sum_sq += dx * dx;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        let xf = x as f64;
        let drift = -((p.mu() - p.lambda()) * xf + p.lambda() * xf * xf / 100.0) / (2.0 * 1.5 * 100.0);
        assert!((mean - drift).abs() < 3.0 * se, "mean {mean} drift {drift} se {se}");
    }

    #[test]
    fn skipping_matches_stepping_in_law() {
        let p = params(30, 0.8, 1.0);
        let d = DiscreteChainParams::new(3.0).unwrap();
        let steps = 400;
        let reps = 20_000;
        let mut a = vec![0u64; 31];
        let mut b = vec![0u64; 31];
        let mut rng = RandomSource::new(8, 0).rng();
        for _ in 0..reps {
            let mut x = 20;
            for _ in 0..steps {
                x = step_discrete(&p, &d, x, &mut rng).unwrap();
            }
            a[x as usize] += 1;
            b[run_discrete(&p, &d, 20, steps, &mut rng).unwrap() as usize] += 1;
        }
        let mean = |h: &[u64]| h.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum::<f64>() / reps as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        assert!((ma - mb).abs() < 0.15, "{ma} vs {mb}");
    }

    #[test]
    fn contraction_pair_basics() {
        let p = params(20, 0.5, 1.0);
        let d = DiscreteChainParams::new(2.0).unwrap();
        let mut rng = RandomSource::new(3, 0).rng();
        let same = run_contraction_pair(&p, &d, 7, 7, 500, &mut rng).unwrap();
        assert!(same.iter().all(|&v| v == 0));
        for _ in 0..200 {
            let dist = run_contraction_pair(&p, &d, 4, 15, 300, &mut rng).unwrap();
            assert_eq!(dist[0], 11);
            assert!(dist.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
            if let Some(pos) = dist.iter().position(|&v| v == 0) {
                assert!(dist[pos..].iter().all(|&v| v == 0));
            }
        }
    }
}
