//! Extinction CDF of the logistic chain from the Kolmogorov forward
//! equations on `{0, ..., N}`, integrated with an adaptive Dormand-Prince
//! 5(4) scheme.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default cost guard on `N` for the forward-equation integrator.
pub const DEFAULT_FORWARD_MAX_N: u64 = 20_000;

/// Strictly increasing, finite, nonnegative evaluation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::domain(format!(
                "grid times must be finite and nonnegative, got {bad}"
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid times must be strictly increasing"));
        }
        Ok(TimeGrid(times))
    }

    /// `count` points `0, step, 2 step, ...`.
    pub fn uniform(step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("grid step must be positive, got {step}")));
        }
        TimeGrid::new((0..count).map(|i| i as f64 * step).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        TimeGrid::new(v)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardOptions {
    pub max_n: u64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            max_n: DEFAULT_FORWARD_MAX_N,
            rtol: 1e-9,
            atol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardCdf {
    pub times: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Sum of accepted local error estimates plus the probability-mass defect;
    /// a rough bound on the absolute error of every CDF value.
    pub error_estimate: f64,
    pub steps: u64,
}

struct Generator {
    up: Vec<f64>,
    down: Vec<f64>,
}

impl Generator {
    fn new(p: &ModelParams) -> Self {
        let n = p.n();
        Generator {
            up: (0..=n).map(|x| p.up_rate(x)).collect(),
            down: (0..=n).map(|x| p.down_rate(x)).collect(),
        }
    }

    fn max_total_rate(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u + d)
            .fold(0.0, f64::max)
    }

    /// `out = p Q` for the tridiagonal generator `Q`.
    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let n = p.len() - 1;
        for x in 0..=n {
            let mut v = -(self.up[x] + self.down[x]) * p[x];
            if x > 0 {
                v += self.up[x - 1] * p[x - 1];
            }
            if x < n {
                v += self.down[x + 1] * p[x + 1];
            }
            out[x] = v;
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper {
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    fn new(len: usize) -> Self {
        Stepper {
            k: std::array::from_fn(|_| vec![0.0; len]),
            stage: vec![0.0; len],
            next: vec![0.0; len],
        }
    }

    /// One trial step; leaves the proposal in `self.next` and returns the
    /// scaled error norm and the absolute max-norm error.
    fn try_step(&mut self, gen: &Generator, y: &[f64], h: f64, opts: &ForwardOptions) -> (f64, f64) {
        let len = y.len();
        gen.apply(y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..len {
                let mut acc = 0.0;
                for (j, a) in A[s][..s].iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.stage[i] = y[i] + h * acc;
            }
            gen.apply(&self.stage, &mut self.k[s]);
        }
        let mut scaled = 0.0f64;
        let mut absolute = 0.0f64;
        for i in 0..len {
            let mut acc = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                acc += B[s] * self.k[s][i];
                err += E[s] * self.k[s][i];
            }
            self.next[i] = y[i] + h * acc;
            let e = (h * err).abs();
            let tol = opts.atol + opts.rtol * y[i].abs().max(self.next[i].abs());
            scaled = scaled.max(e / tol);
            absolute = absolute.max(e);
        }
        (scaled, absolute)
    }
}

/// `P(T_e <= t)` on `grid` for the logistic chain started at `x0`.
pub fn exact_extinction_cdf_logistic(
    p: &ModelParams,
    x0: u64,
    grid: &TimeGrid,
    opts: &ForwardOptions,
) -> Result<ForwardCdf> {
    if p.n() > opts.max_n {
        return Err(Error::CostGuard {
            what: "N",
            value: p.n(),
            limit: opts.max_n,
            hint: "estimate the extinction CDF by Monte Carlo (mc::run_batch) instead",
        });
    }
    if x0 > p.n() {
        return Err(Error::domain(format!("x0 = {x0} outside 0..={}", p.n())));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::domain("integrator tolerances must be positive"));
    }
    let gen = Generator::new(p);
    let len = p.n() as usize + 1;
    let mut y = vec![0.0; len];
    y[x0 as usize] = 1.0;

    let max_rate = gen.max_total_rate();
    let h_max = if max_rate > 0.0 { 0.5 / max_rate } else { f64::INFINITY };
    let mut h = h_max.min(1.0);
    let mut stepper = Stepper::new(len);
    let mut t = 0.0;
    let mut local_errors = 0.0;
    let mut steps = 0u64;
    let mut cdf = Vec::with_capacity(grid.len());
    let mut running_max = 0.0f64;
    let mut mass_defect = 0.0f64;

    for &target in grid.times() {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (scaled, absolute) = stepper.try_step(&gen, &y, step, opts);
            let factor = if scaled == 0.0 {
                5.0
            } else {
                (0.9 * scaled.powf(-0.2)).clamp(0.2, 5.0)
            };
            if scaled <= 1.0 {
                std::mem::swap(&mut y, &mut stepper.next);
                t = if last { target } else { t + step };
                local_errors += absolute;
                steps += 1;
                // a truncated final step says nothing about the next step size
                if !last {
                    h = (step * factor).min(h_max);
                }
            } else {
                h = (step * factor).min(h_max);
            }
        }
        let total: f64 = y.iter().sum();
        mass_defect = mass_defect.max((total - 1.0).abs());
        let value = y[0].clamp(0.0, 1.0);
        running_max = running_max.max(value);
        cdf.push(running_max);
    }

    Ok(ForwardCdf {
        times: grid.times().to_vec(),
        cdf,
        error_estimate: local_errors + mass_defect,
        steps,
    })
}

/// `integral of (1 - F)` over `[t_0, t_last]` by the composite trapezoid
/// rule on the grid, plus an exponential tail beyond the last point
/// extrapolated from the final two values.
pub fn mean_from_cdf(times: &[f64], cdf: &[f64]) -> Result<f64> {
    if times.len() != cdf.len() || times.len() < 2 {
        return Err(Error::domain("mean_from_cdf needs at least two matching points"));
    }
    let survival = |i: usize| 1.0 - cdf[i];
    let mut integral = 0.0;
    for i in 1..times.len() {
        integral += 0.5 * (times[i] - times[i - 1]) * (survival(i) + survival(i - 1));
    }
    let m = times.len() - 1;
    let (s_last, s_prev) = (survival(m), survival(m - 1));
    if s_last > 0.0 && s_prev > s_last {
        let rate = (s_prev / s_last).ln() / (times[m] - times[m - 1]);
        integral += s_last / rate;
    }
    Ok(integral)
}
