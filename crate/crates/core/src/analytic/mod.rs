//! Closed-form and exact-numeric results: the linear birth-death extinction
//! law, ruin probabilities, Gumbel predictors for the logistic extinction
//! time, concentration bounds and the phase schedule that splits an
//! epidemic into initial, intermediate and final phases.

mod forward;
mod mean;

pub use forward::{
    exact_extinction_cdf_logistic, mean_from_cdf, ForwardCdf, ForwardOptions, TimeGrid,
    DEFAULT_FORWARD_MAX_N,
};
pub use mean::{
    exact_mean_extinction, exact_mean_extinction_ln, mean_extinction_double_sum,
    mean_extinction_profile, DOUBLE_SUM_MAX_N,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ode_s, InitialCondition, ModelParams, ScalingFunction};

/// Euler's constant, the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

/// Below this relative gap `|mu - lambda| / (mu + lambda)` the linear-chain
/// law switches to its equal-rates limit.
pub const EQUAL_RATES_TOLERANCE: f64 = 1e-9;

/// `P(T <= t)` for the linear birth-death chain with rates `(lambda y, mu y)`
/// started from `x_star`.
pub fn linear_extinction_cdf(p: &ModelParams, x_star: u64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || t.is_nan() {
        return Err(Error::domain(format!("linear_extinction_cdf needs t >= 0, got {t}")));
    }
    if x_star == 0 {
        return Ok(1.0);
    }
    let (lambda, mu) = (p.lambda(), p.mu());
    let gap = p.gap();
    // Per-lineage survival probability r(t); the extinction CDF is (1 - r)^x*.
    let r = if gap.abs() < EQUAL_RATES_TOLERANCE * (mu + lambda) {
        1.0 / (1.0 + lambda * t)
    } else {
        // (mu - lambda) e^{-gap t} / (mu - lambda e^{-gap t}), rewritten to stay
        // finite for large |gap t| and accurate for small gap.
        let denom = gap + mu * (gap * t).exp_m1();
        if denom.is_infinite() {
            0.0
        } else {
            gap / denom
        }
    };
    let r = r.clamp(0.0, 1.0);
    if r == 1.0 {
        return Ok(0.0);
    }
    Ok((x_star as f64 * (-r).ln_1p()).exp().clamp(0.0, 1.0))
}

/// Probability that a chain with up-step odds `lambda / (lambda + mu)` hits
/// `y_top` before 0, together with the two cruder bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinEscape {
    pub probability: f64,
    /// `(lambda / mu)^{y - x}`.
    pub geometric_bound: f64,
    /// `exp(-(mu - lambda)(y - x) / mu)`.
    pub exponential_bound: f64,
}

/// `log(e^a - 1)` for `a > 0` without overflow.
fn ln_expm1(a: f64) -> f64 {
    if a > 30.0 {
        a + (-(-a).exp()).ln_1p()
    } else {
        a.exp_m1().ln()
    }
}

pub fn ruin_escape_probability(p: &ModelParams, x_start: u64, y_top: u64) -> Result<RuinEscape> {
    p.require_subcritical("ruin_escape_probability")?;
    if y_top == 0 {
        return Err(Error::domain("ruin_escape_probability needs y_top >= 1"));
    }
    if x_start > y_top {
        return Err(Error::domain(format!(
            "x_start = {x_start} exceeds y_top = {y_top}"
        )));
    }
    let (lambda, mu) = (p.lambda(), p.mu());
    let gap_steps = (y_top - x_start) as f64;
    let geometric_bound = (lambda / mu).powf(gap_steps);
    let exponential_bound = (-(mu - lambda) * gap_steps / mu).exp();
    let probability = if x_start == y_top {
        1.0
    } else if x_start == 0 || lambda == 0.0 {
        0.0
    } else {
        let log_ratio = (mu / lambda).ln();
        let (a, b) = (x_start as f64 * log_ratio, y_top as f64 * log_ratio);
        if b < 700.0 {
            a.exp_m1() / b.exp_m1()
        } else {
            (ln_expm1(a) - ln_expm1(b)).exp()
        }
    };
    Ok(RuinEscape {
        probability,
        geometric_bound,
        exponential_bound,
    })
}

/// Standard Gumbel distribution function `exp(-exp(-w))`.
#[inline]
pub fn gumbel_cdf(w: f64) -> f64 {
    (-(-w).exp()).exp()
}

/// Which centering constant to use for the normalized extinction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RegimeFormula {
    /// Valid throughout the subcritical regime.
    #[default]
    General,
    /// Same constant written in terms of `z0 = x0 / N`.
    Intermediate,
    /// `x0 = o((mu - lambda) N)`: the logistic correction is dropped.
    Low,
    /// `x0 / ((mu - lambda) N) -> infinity`: independent of `x0`.
    High,
}

impl RegimeFormula {
    pub const ALL: [RegimeFormula; 4] = [
        RegimeFormula::General,
        RegimeFormula::Intermediate,
        RegimeFormula::Low,
        RegimeFormula::High,
    ];
}

/// Size of the quantities that must diverge for the Gumbel limit to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisDiagnostics {
    /// `(mu - lambda) sqrt(N)`.
    pub gap_sqrt_n: f64,
    /// `x0 (mu - lambda)`.
    pub x0_gap: f64,
}

/// Gumbel law for `(mu - lambda) T - centering`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelPrediction {
    pub centering: f64,
    pub scale: f64,
    pub predicted_mean: f64,
    pub regime_formula: RegimeFormula,
    pub diagnostics: HypothesisDiagnostics,
}

impl GumbelPrediction {
    /// `w = (mu - lambda) t - centering`.
    pub fn normalize(&self, t: f64) -> f64 {
        t / self.scale - self.centering
    }

    /// Predicted `P(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        gumbel_cdf(self.normalize(t))
    }
}

pub fn predict_extinction(
    p: &ModelParams,
    ic: InitialCondition,
    formula: RegimeFormula,
) -> Result<GumbelPrediction> {
    p.require_subcritical("predict_extinction")?;
    let x0 = ic.x0();
    if x0 == 0 {
        return Err(Error::domain("predict_extinction needs x0 >= 1"));
    }
    let (lambda, mu, gap) = (p.lambda(), p.mu(), p.gap());
    let n = p.n() as f64;
    let x0f = x0 as f64;
    let centering = match formula {
        RegimeFormula::General => {
            x0f.ln() + gap.ln() - (lambda * x0f / (gap * n)).ln_1p() - mu.ln()
        }
        RegimeFormula::Intermediate => {
            let z0 = x0f / n;
            n.ln() + z0.ln() + 2.0 * gap.ln() - (gap + lambda * z0).ln() - mu.ln()
        }
        RegimeFormula::Low => x0f.ln() + gap.ln() - mu.ln(),
        RegimeFormula::High => {
            if lambda == 0.0 {
                return Err(Error::domain("the High formula needs lambda > 0"));
            }
            n.ln() + 2.0 * gap.ln() - mu.ln() - lambda.ln()
        }
    };
    let scale = 1.0 / gap;
    Ok(GumbelPrediction {
        centering,
        scale,
        predicted_mean: scale * (centering + EULER_GAMMA),
        regime_formula: formula,
        diagnostics: HypothesisDiagnostics {
            gap_sqrt_n: gap * n.sqrt(),
            x0_gap: x0f * gap,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallStartMode {
    /// `(mu - lambda) x* -> 0` with `x* -> infinity`; evaluated at `t = v x* / mu`.
    VanishingProduct,
    /// A single initial infective with `mu - lambda -> 0`; evaluated at `t = u / mu`.
    SingleInfective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallStartLimit {
    /// Limiting probability, `e^{-1/v}` or `u / (1 + u)`.
    pub limit: f64,
    /// Linear-chain CDF at the finite parameters.
    pub finite_size: f64,
    /// Evaluation time.
    pub t: f64,
}

pub fn small_start_limits(
    p: &ModelParams,
    x_star: u64,
    mode: SmallStartMode,
    arg: f64,
) -> Result<SmallStartLimit> {
    if !(arg > 0.0 && arg.is_finite()) {
        return Err(Error::domain(format!("small_start_limits needs arg > 0, got {arg}")));
    }
    let (limit, t) = match mode {
        SmallStartMode::VanishingProduct => {
            if x_star == 0 {
                return Err(Error::domain("VanishingProduct needs x_star >= 1"));
            }
            ((-1.0 / arg).exp(), arg * x_star as f64 / p.mu())
        }
        SmallStartMode::SingleInfective => {
            if x_star != 1 {
                return Err(Error::domain(format!(
                    "SingleInfective needs x_star = 1, got {x_star}"
                )));
            }
            (arg / (1.0 + arg), arg / p.mu())
        }
    };
    Ok(SmallStartLimit {
        limit,
        finite_size: linear_extinction_cdf(p, x_star, t)?,
        t,
    })
}

/// Inputs to the martingale concentration inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationInputs {
    /// Uniform bound on twice the one-step coupling differences.
    pub alpha: f64,
    /// Twice the sum of squared per-step bounds.
    pub beta: f64,
    /// Deviation.
    pub a: f64,
}

impl ConcentrationInputs {
    pub fn new(alpha: f64, beta: f64, a: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("a", a)] {
            if !(v >= 0.0) {
                return Err(Error::domain(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(ConcentrationInputs { alpha, beta, a })
    }
}

/// `min(1, 2 exp(-a^2 / (2 beta + 2 alpha a / 3)))`.
pub fn concentration_bound(c: &ConcentrationInputs) -> Result<f64> {
    if c.a == 0.0 {
        return Ok(1.0);
    }
    if c.a.is_infinite() {
        return Ok(0.0);
    }
    let denom = 2.0 * c.beta + 2.0 * c.alpha * c.a / 3.0;
    if denom <= 0.0 {
        return Err(Error::domain(
            "concentration_bound needs beta + alpha a > 0 when a > 0",
        ));
    }
    Ok((2.0 * (-c.a * c.a / denom).exp()).min(1.0))
}

/// `alpha = 2` and the bound `beta <= 2 x0 (lambda + mu) / (mu - lambda)`,
/// uniform in the number of steps, for the discrete chain with `f(x) = x`.
pub fn beta_bound_intermediate(p: &ModelParams, x0: u64, k: f64) -> Result<(f64, f64)> {
    p.require_subcritical("beta_bound_intermediate")?;
    if !(k >= 2.0) {
        return Err(Error::domain(format!("K must be at least 2, got {k}")));
    }
    if x0 == 0 {
        return Err(Error::domain("beta_bound_intermediate needs x0 >= 1"));
    }
    let beta = 2.0 * x0 as f64 * (p.lambda() + p.mu()) / p.gap();
    Ok((2.0, beta))
}

/// Which of the three starting ranges `x0` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartRange {
    /// `x0 <= sqrt(N) omega`: linear-chain comparison from the start.
    Final,
    /// `sqrt(N) omega < x0 <= (mu - lambda) N omega`.
    Intermediate,
    /// `x0 > (mu - lambda) N omega`: a quick initial drop comes first.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub omega: f64,
    /// Initial-phase duration, zero unless `x0 > (mu - lambda) N omega`.
    pub t0: f64,
    /// Exact deterministic time from `x0` to the handover state.
    pub t_star: f64,
    /// The asymptotic form of `t_star` with the handover correction dropped.
    pub t_star_approx: f64,
    /// Handover state `ceil(sqrt(N) omega)`, clamped to `[1, N]`.
    pub x_star: u64,
    /// Discrete-chain steps `ceil(K (mu + lambda) N t_star)`.
    pub k_star: u64,
    /// `w`-quantile time of the final phase from `x_star`.
    pub t_w: f64,
    pub start_range: StartRange,
}

pub fn phase_schedule(
    p: &ModelParams,
    ic: InitialCondition,
    omega: ScalingFunction,
    k: f64,
    w: f64,
) -> Result<PhaseSchedule> {
    p.require_subcritical("phase_schedule")?;
    if ic.x0() == 0 {
        return Err(Error::domain("phase_schedule needs x0 >= 1"));
    }
    if !(k >= 2.0) {
        return Err(Error::domain(format!("K must be at least 2, got {k}")));
    }
    if !w.is_finite() {
        return Err(Error::domain("w must be finite"));
    }
    let (lambda, mu, gap) = (p.lambda(), p.mu(), p.gap());
    let n = p.n() as f64;
    let x0 = ic.x0();
    let x0f = x0 as f64;
    let om = omega.omega(p)?;

    let handover = n.sqrt() * om;
    let x_star = (handover.ceil().max(1.0) as u64).min(p.n());
    let xs = x_star as f64;

    let (t_star, t_star_approx) = if x0 >= x_star {
        let exact = (ode_s(p, xs / n)? - ode_s(p, x0f / n)?) / gap;
        let approx = (x0f.ln() - xs.ln() - (lambda * x0f / (gap * n)).ln_1p()) / gap;
        (exact, approx)
    } else {
        (0.0, 0.0)
    };

    let initial_threshold = gap * n * om;
    let t0 = if x0f > initial_threshold {
        if lambda == 0.0 {
            return Err(Error::domain("the initial-phase duration needs lambda > 0"));
        }
        1.0 / (om.sqrt() * lambda * gap)
    } else {
        0.0
    };

    let start_range = if x0 <= x_star {
        StartRange::Final
    } else if x0f <= initial_threshold {
        StartRange::Intermediate
    } else {
        StartRange::Initial
    };

    let k_star = (k * (mu + lambda) * n * t_star).ceil();
    let k_star = if k_star >= u64::MAX as f64 { u64::MAX } else { k_star as u64 };
    let t_w = (xs.ln() + gap.ln() - mu.ln() + w) / gap;

    Ok(PhaseSchedule {
        omega: om,
        t0,
        t_star,
        t_star_approx,
        x_star,
        k_star,
        t_w,
        start_range,
    })
}
