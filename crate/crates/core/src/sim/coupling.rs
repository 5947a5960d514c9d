//! Coupled simulations: the three-chain sandwich of the logistic chain
//! between two linear chains, a monotone pair of logistic chains, and the
//! maximal coupling of the discrete chain with the continuous chain observed
//! on a grid of spacing `delta`.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::discrete::{DiscreteChainParams, Transition};
use super::geometric_trials;
use crate::error::{Error, Result};
use crate::model::{InitialCondition, ModelParams};

/// Why a coupled run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauEvent {
    HitZero,
    HitUpperBoundary,
    /// Time horizon or step budget exhausted.
    Censored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTrace {
    /// Event times (continuous couplings) or `k * delta` (discrete coupling).
    pub times: Vec<f64>,
    /// Joint state after each event, one entry per chain.
    pub states: Vec<Vec<u64>>,
    /// Set if the chains were ever out of their intended order. Audit probe:
    /// a correct construction never sets it.
    pub ordering_violated: bool,
    pub tau_event: TauEvent,
    pub tau: f64,
    /// First hitting time of 0 for each chain, if it happened before `tau`.
    pub extinction_times: Vec<Option<f64>>,
    /// Discrete coupling: number of steps `k` with the two chains apart.
    pub mismatch_count: u64,
    pub first_mismatch_step: Option<u64>,
    /// Discrete coupling: chains differ at the final step.
    pub final_mismatch: bool,
    /// Sandwich coupling: `lambda (1 - 2 x*/N)` was negative and clamped to 0.
    pub lambda_clamped: bool,
    pub event_count: u64,
}

impl CouplingTrace {
    fn new(chains: usize) -> Self {
        CouplingTrace {
            times: Vec::new(),
            states: Vec::new(),
            ordering_violated: false,
            tau_event: TauEvent::Censored,
            tau: 0.0,
            extinction_times: vec![None; chains],
            mismatch_count: 0,
            first_mismatch_step: None,
            final_mismatch: false,
            lambda_clamped: false,
            event_count: 0,
        }
    }

    /// Extinction times are ordered like the chains (lowest chain first).
    pub fn extinction_order_holds(&self) -> bool {
        let times: Option<Vec<f64>> = self.extinction_times.iter().copied().collect();
        match times {
            Some(t) => t.windows(2).all(|w| w[0] <= w[1]),
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ChainRates {
    Logistic(ModelParams),
    Linear { lambda: f64, mu: f64 },
}

impl ChainRates {
    #[inline]
    fn rates(&self, x: u64) -> (f64, f64) {
        match *self {
            ChainRates::Logistic(p) => (p.up_rate(x), p.down_rate(x)),
            ChainRates::Linear { lambda, mu } => (lambda * x as f64, mu * x as f64),
        }
    }
}

/// Continuous-time coupling of birth-death chains listed from lowest to
/// highest. Chains sharing a state jump together as far as possible: a
/// uniform threshold is drawn below the largest rate in the group and every
/// member whose rate exceeds it moves. Chains in different states never jump
/// at the same instant, so adjacent chains can meet but not cross.
fn run_grouped<R, S>(
    chains: &[ChainRates],
    init: &[u64],
    mut stop: S,
    t_max: f64,
    record: bool,
    rng: &mut R,
) -> CouplingTrace
where
    R: Rng + ?Sized,
    S: FnMut(&[u64]) -> Option<TauEvent>,
{
    let m = chains.len();
    let mut trace = CouplingTrace::new(m);
    let mut s = init.to_vec();
    let mut t = 0.0;
    for (i, &x) in s.iter().enumerate() {
        if x == 0 {
            trace.extinction_times[i] = Some(0.0);
        }
    }
    let mut up = vec![0.0; m];
    let mut down = vec![0.0; m];
    loop {
        if let Some(ev) = stop(&s) {
            trace.tau_event = ev;
            trace.tau = t;
            return trace;
        }
        for i in 0..m {
            (up[i], down[i]) = chains[i].rates(s[i]);
        }
        // Group maxima: a chain's group is identified by its lowest member.
        let mut total = 0.0;
        for i in 0..m {
            if (0..i).any(|j| s[j] == s[i]) {
                continue;
            }
            let (mut gu, mut gd) = (0.0f64, 0.0f64);
            for j in i..m {
                if s[j] == s[i] {
                    gu = gu.max(up[j]);
                    gd = gd.max(down[j]);
                }
            }
            total += gu + gd;
        }
        if total <= 0.0 {
            trace.tau_event = TauEvent::HitZero;
            trace.tau = t;
            return trace;
        }
        let hold: f64 = rng.sample(Exp1);
        t += hold / total;
        if t > t_max {
            trace.tau_event = TauEvent::Censored;
            trace.tau = t_max;
            return trace;
        }
        let mut u = rng.random::<f64>() * total;
        'pick: for i in 0..m {
            if (0..i).any(|j| s[j] == s[i]) {
                continue;
            }
            let v = s[i];
            let members: Vec<usize> = (i..m).filter(|&j| s[j] == v).collect();
            let gu = members.iter().map(|&j| up[j]).fold(0.0, f64::max);
            if u < gu {
                for &j in &members {
                    if up[j] > u {
                        s[j] = v + 1;
                    }
                }
                break 'pick;
            }
            u -= gu;
            let gd = members.iter().map(|&j| down[j]).fold(0.0, f64::max);
            if u < gd {
                for &j in &members {
                    if down[j] > u {
                        s[j] = v - 1;
                    }
                }
                break 'pick;
            }
            u -= gd;
        }
        trace.event_count += 1;
        for (&x, ext) in s.iter().zip(trace.extinction_times.iter_mut()) {
            if x == 0 && ext.is_none() {
                *ext = Some(t);
            }
        }
        if s.windows(2).any(|w| w[0] > w[1]) {
            trace.ordering_violated = true;
        }
        if record {
            trace.times.push(t);
            trace.states.push(s.clone());
        }
    }
}

/// Couples `Z` (linear, rates `lambda'`, `mu` with `lambda' = lambda (1 - 2x*/N)`),
/// the logistic chain `X`, and `Y` (linear, rates `lambda`, `mu`), all from
/// `x_star`, until `Y` hits 0 or `2 x_star`. Chain order in the trace is
/// `[Z, X, Y]`.
pub fn run_sandwich_coupling<R: Rng + ?Sized>(
    p: &ModelParams,
    x_star: u64,
    t_max: f64,
    record: bool,
    rng: &mut R,
) -> Result<CouplingTrace> {
    p.require_subcritical("run_sandwich_coupling")?;
    if x_star == 0 || x_star > p.n() {
        return Err(Error::domain(format!(
            "x_star must lie in 1..={}, got {x_star}",
            p.n()
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain("t_max must be positive and finite"));
    }
    let shrunk = p.lambda() * (1.0 - 2.0 * x_star as f64 / p.n() as f64);
    let lambda_low = shrunk.max(0.0);
    let chains = [
        ChainRates::Linear {
            lambda: lambda_low,
            mu: p.mu(),
        },
        ChainRates::Logistic(*p),
        ChainRates::Linear {
            lambda: p.lambda(),
            mu: p.mu(),
        },
    ];
    let boundary = 2 * x_star;
    let mut trace = run_grouped(
        &chains,
        &[x_star; 3],
        |s| {
            if s[2] == 0 {
                Some(TauEvent::HitZero)
            } else if s[2] >= boundary {
                Some(TauEvent::HitUpperBoundary)
            } else {
                None
            }
        },
        t_max,
        record,
        rng,
    );
    trace.lambda_clamped = shrunk < 0.0;
    Ok(trace)
}

/// Two logistic chains from `x_low <= x_high` under the same grouped
/// coupling, until the higher one is absorbed. Chain order is `[low, high]`.
pub fn run_monotone_pair<R: Rng + ?Sized>(
    p: &ModelParams,
    x_low: u64,
    x_high: u64,
    t_max: f64,
    record: bool,
    rng: &mut R,
) -> Result<CouplingTrace> {
    if x_low > x_high || x_high > p.n() {
        return Err(Error::domain(format!(
            "need x_low <= x_high <= N, got {x_low}, {x_high}"
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain("t_max must be positive and finite"));
    }
    let chains = [ChainRates::Logistic(*p), ChainRates::Logistic(*p)];
    Ok(run_grouped(
        &chains,
        &[x_low, x_high],
        |s| (s[1] == 0).then_some(TauEvent::HitZero),
        t_max,
        record,
        rng,
    ))
}

/// One row of the `delta`-step transition matrix of the continuous chain,
/// `P(X_delta = y | X_0 = x)` for `y` in `lo..lo + probs.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonRow {
    pub x: u64,
    pub lo: u64,
    pub probs: Vec<f64>,
    /// `P(X_delta != x)`, summed from the off-diagonal entries.
    pub moving: f64,
}

impl SkeletonRow {
    pub fn prob(&self, y: u64) -> f64 {
        if y < self.lo {
            return 0.0;
        }
        self.probs.get((y - self.lo) as usize).copied().unwrap_or(0.0)
    }

    fn states(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.lo + i as u64, w))
    }
}

/// Computes a row of `exp(Q delta)` by uniformization with rate
/// `(lambda + mu) N`, truncating the Poisson series once its terms drop
/// below `1e-20`.
pub fn skeleton_row(p: &ModelParams, delta: f64, x: u64) -> Result<SkeletonRow> {
    if x > p.n() {
        return Err(Error::domain(format!("state {x} outside 0..={}", p.n())));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain("delta must be positive and finite"));
    }
    let n = p.n();
    let unif = (p.lambda() + p.mu()) * n as f64;
    let a = unif * delta;
    if a > 50.0 {
        return Err(Error::domain(format!(
            "uniformization parameter {a} too large; use a smaller delta"
        )));
    }

    let mut terms = 0u64;
    let mut w = (-a).exp();
    loop {
        terms += 1;
        w *= a / terms as f64;
        if w < 1e-20 && terms as f64 > a {
            break;
        }
    }
    let lo = x.saturating_sub(terms);
    let hi = (x + terms).min(n);
    let width = (hi - lo + 1) as usize;
    let mut v = vec![0.0; width];
    let mut next = vec![0.0; width];
    let mut row = vec![0.0; width];
    v[(x - lo) as usize] = 1.0;

    let mut weight = (-a).exp();
    for step in 0..=terms {
        for (r, vi) in row.iter_mut().zip(&v) {
            *r += weight * vi;
        }
        if step == terms {
            break;
        }
        for (i, out) in next.iter_mut().enumerate() {
            let y = lo + i as u64;
            let (up, down) = (p.up_rate(y), p.down_rate(y));
            let mut acc = v[i] * (1.0 - (up + down) / unif);
            if i > 0 {
                acc += v[i - 1] * p.up_rate(y - 1) / unif;
            }
            if i + 1 < width {
                acc += v[i + 1] * p.down_rate(y + 1) / unif;
            }
            *out = acc;
        }
        std::mem::swap(&mut v, &mut next);
        weight *= a / (step + 1) as f64;
    }
    let moving = row
        .iter()
        .enumerate()
        .filter(|&(i, _)| lo + i as u64 != x)
        .map(|(_, w)| w)
        .sum();
    Ok(SkeletonRow {
        x,
        lo,
        probs: row,
        moving,
    })
}

/// Maximal one-step coupling of the discrete chain `X^` with the skeleton
/// `Z_k = X_{k delta}` of the continuous chain.
pub struct TvCoupling {
    params: ModelParams,
    discrete: DiscreteChainParams,
    delta: f64,
    rows: HashMap<u64, SkeletonRow>,
}

/// Overlap of the two one-step laws from a shared state.
struct Overlap {
    both_up: f64,
    both_down: f64,
    both_hold: f64,
    /// `1 - both_hold`.
    escape: f64,
}

impl TvCoupling {
    pub fn new(p: &ModelParams, d: &DiscreteChainParams) -> Self {
        TvCoupling {
            params: *p,
            discrete: *d,
            delta: d.delta(p),
            rows: HashMap::new(),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn ensure_row(&mut self, x: u64) {
        if !self.rows.contains_key(&x) {
            let row = skeleton_row(&self.params, self.delta, x)
                .expect("delta from DiscreteChainParams keeps the uniformization rate below 1/2");
            self.rows.insert(x, row);
        }
    }

    pub fn row(&mut self, x: u64) -> &SkeletonRow {
        self.ensure_row(x);
        &self.rows[&x]
    }

    fn overlap(tr: &Transition, row: &SkeletonRow, x: u64) -> Overlap {
        let both_up = tr.up.min(row.prob(x + 1));
        let both_down = if x > 0 { tr.down.min(row.prob(x - 1)) } else { 0.0 };
        let row_hold = row.prob(x);
        let both_hold = tr.hold.min(row_hold);
        let escape = if tr.hold <= row_hold { tr.moving } else { row.moving };
        Overlap {
            both_up,
            both_down,
            both_hold,
            escape,
        }
    }

    fn sample_row<R: Rng + ?Sized>(
        row: &SkeletonRow,
        mut weight: impl FnMut(u64, f64) -> f64,
        rng: &mut R,
    ) -> u64 {
        let total: f64 = row.states().map(|(y, w)| weight(y, w)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = row.x;
        for (y, w) in row.states() {
            let w = weight(y, w);
            if w <= 0.0 {
                continue;
            }
            last = y;
            if u < w {
                return y;
            }
            u -= w;
        }
        last
    }

    /// Joint move from a shared state `x`, conditional on not both holding.
    fn escape_from_shared<R: Rng + ?Sized>(&mut self, x: u64, rng: &mut R) -> (u64, u64) {
        let tr = self.discrete.transition(&self.params, x);
        self.ensure_row(x);
        let row = &self.rows[&x];
        let ov = Self::overlap(&tr, row, x);
        let v = rng.random::<f64>() * ov.escape;
        if v < ov.both_up {
            return (x + 1, x + 1);
        }
        if v < ov.both_up + ov.both_down {
            return (x - 1, x - 1);
        }
        // Independent draws from the two residual measures.
        let res = [
            (x + 1, tr.up - ov.both_up),
            (x.wrapping_sub(1), tr.down - ov.both_down),
            (x, tr.hold - ov.both_hold),
        ];
        let res_total: f64 = res.iter().map(|r| r.1.max(0.0)).sum();
        let mut u = rng.random::<f64>() * res_total;
        let mut xh = x;
        for &(y, w) in &res {
            let w = w.max(0.0);
            if w > 0.0 && u < w {
                xh = y;
                break;
            }
            u -= w;
        }
        let z = Self::sample_row(
            row,
            |y, w| {
                let shared = if y == x + 1 {
                    ov.both_up
                } else if y == x {
                    ov.both_hold
                } else if x > 0 && y == x - 1 {
                    ov.both_down
                } else {
                    0.0
                };
                (w - shared).max(0.0)
            },
            rng,
        );
        (xh, z)
    }

    fn discrete_move<R: Rng + ?Sized>(tr: &Transition, x: u64, rng: &mut R) -> u64 {
        if rng.random::<f64>() * tr.moving < tr.up {
            x + 1
        } else {
            x - 1
        }
    }

    /// One coupled step from `(x_hat, z)` without skipping.
    pub fn step_once<R: Rng + ?Sized>(&mut self, x_hat: u64, z: u64, rng: &mut R) -> (u64, u64) {
        if x_hat == z {
            let tr = self.discrete.transition(&self.params, z);
            self.ensure_row(z);
            let escape = Self::overlap(&tr, &self.rows[&z], z).escape;
            if rng.random::<f64>() < escape {
                self.escape_from_shared(z, rng)
            } else {
                (z, z)
            }
        } else {
            let tr = self.discrete.transition(&self.params, x_hat);
            let u: f64 = rng.random();
            let xh = if u < tr.up {
                x_hat + 1
            } else if u < tr.moving {
                x_hat - 1
            } else {
                x_hat
            };
            let zn = Self::sample_row(self.row(z), |_, w| w, rng);
            (xh, zn)
        }
    }

    /// Runs both chains from `x0` for `steps` steps, skipping runs of joint
    /// holds with geometric draws.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        x0: u64,
        steps: u64,
        record: bool,
        rng: &mut R,
    ) -> CouplingTrace {
        let mut trace = CouplingTrace::new(2);
        let (mut xh, mut z) = (x0, x0);
        let mut k = 0u64;
        trace.tau_event = TauEvent::Censored;
        while k < steps {
            let remaining = steps - k;
            if xh == z {
                if xh == 0 {
                    trace.tau_event = TauEvent::HitZero;
                    break;
                }
                let tr = self.discrete.transition(&self.params, z);
                self.ensure_row(z);
                let escape = Self::overlap(&tr, &self.rows[&z], z).escape;
                let wait = geometric_trials(escape, rng);
                if wait > remaining {
                    break;
                }
                k += wait;
                (xh, z) = self.escape_from_shared(z, rng);
            } else {
                let tx = self.discrete.transition(&self.params, xh);
                let mz = self.row(z).moving;
                let mx = tx.moving;
                let escape = mx + mz - mx * mz;
                let wait = geometric_trials(escape, rng);
                if wait > remaining {
                    trace.mismatch_count += remaining;
                    break;
                }
                trace.mismatch_count += wait - 1;
                k += wait;
                let u = rng.random::<f64>() * escape;
                let (move_x, move_z) = if u < mx * (1.0 - mz) {
                    (true, false)
                } else if u < mx * (1.0 - mz) + (1.0 - mx) * mz {
                    (false, true)
                } else {
                    (true, true)
                };
                if move_x {
                    xh = Self::discrete_move(&tx, xh, rng);
                }
                if move_z {
                    let from = z;
                    z = Self::sample_row(self.row(from), |y, w| if y == from { 0.0 } else { w }, rng);
                }
            }
            trace.event_count += 1;
            if xh != z {
                trace.mismatch_count += 1;
                trace.first_mismatch_step.get_or_insert(k);
            }
            if record {
                trace.times.push(k as f64 * self.delta);
                trace.states.push(vec![xh, z]);
            }
        }
        trace.final_mismatch = xh != z;
        trace.tau = k.min(steps) as f64 * self.delta;
        trace
    }
}

/// Runs the maximal coupling of the discrete chain and the observed
/// continuous chain from `ic` for `ceil(K (mu + lambda) N t0)` steps.
/// Chain order in the trace is `[discrete, observed]`.
pub fn run_tv_coupling<R: Rng + ?Sized>(
    p: &ModelParams,
    d: &DiscreteChainParams,
    ic: InitialCondition,
    t0: f64,
    record: bool,
    rng: &mut R,
) -> Result<CouplingTrace> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::domain(format!("t0 must be positive, got {t0}")));
    }
    let steps = d.steps_for(p, t0);
    let mut coupling = TvCoupling::new(p, d);
    Ok(coupling.run(ic.x0(), steps, record, rng))
}
