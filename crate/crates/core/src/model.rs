//! Parameter types, transition rates of the logistic and linear chains,
//! regime classification and the closed-form logistic ODE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default severity threshold separating the critical window from the
/// sub- and supercritical regimes.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 3.0;

/// Population size `N` with infection rate `lambda` and recovery rate `mu`.
///
/// `lambda = 0` is accepted and gives the pure-death chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    n: u64,
    lambda: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "N")]
    n: u64,
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.n, raw.lambda, raw.mu)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n: p.n,
            lambda: p.lambda,
            mu: p.mu,
        }
    }
}

impl ModelParams {
    pub fn new(n: u64, lambda: f64, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("population size N must be at least 1"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!(
                "mu must be finite and positive, got {mu}"
            )));
        }
        Ok(ModelParams { n, lambda, mu })
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `mu - lambda`, the decay rate of the linearised dynamics.
    #[inline]
    pub fn gap(&self) -> f64 {
        self.mu - self.lambda
    }

    #[inline]
    pub fn subcritical(&self) -> bool {
        self.mu > self.lambda
    }

    /// Same population with both rates multiplied by `c`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        ModelParams::new(self.n, c * self.lambda, c * self.mu)
    }

    pub(crate) fn require_subcritical(&self, what: &str) -> Result<()> {
        if self.subcritical() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} requires mu > lambda (got lambda = {}, mu = {})",
                self.lambda, self.mu
            )))
        }
    }

    #[inline]
    pub(crate) fn up_rate(&self, x: u64) -> f64 {
        let xf = x as f64;
        self.lambda * xf * (1.0 - xf / self.n as f64)
    }

    #[inline]
    pub(crate) fn down_rate(&self, x: u64) -> f64 {
        self.mu * x as f64
    }
}

/// Starting state `x0` of the logistic chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialCondition {
    x0: u64,
}

impl InitialCondition {
    pub fn new(x0: u64, params: &ModelParams) -> Result<Self> {
        if x0 > params.n() {
            return Err(Error::domain(format!(
                "initial state {x0} exceeds population size {}",
                params.n()
            )));
        }
        Ok(InitialCondition { x0 })
    }

    #[inline]
    pub fn x0(&self) -> u64 {
        self.x0
    }

    /// Initial infective proportion `x0 / N`.
    pub fn z0(&self, params: &ModelParams) -> f64 {
        self.x0 as f64 / params.n() as f64
    }
}

/// Up and down jump rates of the logistic chain at state `x`.
pub fn rates_logistic(p: &ModelParams, x: u64) -> Result<(f64, f64)> {
    if x > p.n() {
        return Err(Error::domain(format!(
            "state {x} outside 0..={}",
            p.n()
        )));
    }
    Ok((p.up_rate(x), p.down_rate(x)))
}

/// Up and down jump rates of the linear birth-death chain at state `y`.
pub fn rates_linear(p: &ModelParams, y: i64) -> Result<(f64, f64)> {
    if y < 0 {
        return Err(Error::domain(format!("linear-chain state {y} is negative")));
    }
    let yf = y as f64;
    Ok((p.lambda() * yf, p.mu() * yf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub kind: RegimeKind,
    /// Signed severity `(mu - lambda) * sqrt(N)`.
    pub severity: f64,
}

pub fn classify_regime(p: &ModelParams, threshold: f64) -> Result<RegimeClass> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::domain(format!(
            "regime threshold must be positive, got {threshold}"
        )));
    }
    let severity = p.gap() * (p.n() as f64).sqrt();
    let kind = if severity > threshold {
        RegimeKind::Subcritical
    } else if severity < -threshold {
        RegimeKind::Supercritical
    } else {
        RegimeKind::Critical
    };
    Ok(RegimeClass { kind, severity })
}

/// Phase clock `s(z) = log(1 + lambda z / (mu - lambda)) - log z`.
///
/// Differences of `s` divided by `mu - lambda` give deterministic crossing
/// times of the logistic ODE.
pub fn ode_s(p: &ModelParams, z: f64) -> Result<f64> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::domain(format!("ode_s needs z in (0, 1], got {z}")));
    }
    let gap = p.gap();
    if gap == 0.0 {
        return Err(Error::SingularParameters("ode_s"));
    }
    let arg = p.lambda() * z / gap;
    if arg <= -1.0 {
        return Err(Error::domain(format!(
            "ode_s: 1 + lambda z / (mu - lambda) = {} is not positive",
            1.0 + arg
        )));
    }
    Ok(arg.ln_1p() - z.ln())
}

/// Closed-form solution of the logistic (Verhulst) ODE
/// `dz/dt = lambda z (1 - z) - mu z` from `z(0) = z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    z0: f64,
    params: ModelParams,
}

impl OdeSolution {
    pub fn new(params: ModelParams, z0: f64) -> Result<Self> {
        if params.gap() == 0.0 {
            return Err(Error::SingularParameters("OdeSolution"));
        }
        if !(z0 > 0.0 && z0 <= 1.0) {
            return Err(Error::domain(format!(
                "ODE initial proportion must lie in (0, 1], got {z0}"
            )));
        }
        Ok(OdeSolution { z0, params })
    }

    pub fn from_initial(params: ModelParams, ic: InitialCondition) -> Result<Self> {
        OdeSolution::new(params, ic.z0(&params))
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Right-hand side of the ODE at proportion `z`.
    pub fn vector_field(&self, z: f64) -> f64 {
        self.params.lambda() * z * (1.0 - z) - self.params.mu() * z
    }
}

/// `z(t)` for `t >= 0`.
pub fn ode_z(sol: &OdeSolution, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("ode_z needs t >= 0, got {t}")));
    }
    let p = sol.params();
    let gap = p.gap();
    let decay = (-gap * t).exp();
    // 1 - e^{-gap t}, accurate for small gap * t
    let grown = -(-gap * t).exp_m1();
    Ok(sol.z0 * gap * decay / (gap + sol.z0 * p.lambda() * grown))
}

/// Inverse of [`ode_z`]: the time at which the solution reaches `z`.
pub fn ode_t_of_z(sol: &OdeSolution, z: f64) -> Result<f64> {
    if !(z > 0.0 && z <= sol.z0) {
        return Err(Error::domain(format!(
            "ode_t_of_z needs z in (0, {}], got {z}",
            sol.z0
        )));
    }
    let p = sol.params();
    Ok((ode_s(p, z)? - ode_s(p, sol.z0)?) / p.gap())
}

/// The slowly growing function `omega(N)` that sets the handover state
/// `x* = sqrt(N) omega(N)` between the intermediate and final phases.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ScalingFunction {
    /// `((mu - lambda) sqrt(N))^{1/4} = (mu - lambda)^{1/4} N^{1/8}`.
    #[default]
    Default,
    /// A user-supplied constant value.
    Fixed(f64),
}

impl ScalingFunction {
    pub fn omega(&self, p: &ModelParams) -> Result<f64> {
        match *self {
            ScalingFunction::Default => {
                p.require_subcritical("default omega(N)")?;
                Ok(p.gap().powf(0.25) * (p.n() as f64).powf(0.125))
            }
            ScalingFunction::Fixed(v) if v.is_finite() && v > 0.0 => Ok(v),
            ScalingFunction::Fixed(v) => Err(Error::domain(format!(
                "omega must be positive and finite, got {v}"
            ))),
        }
    }

    /// Checks that omega strictly increases along a family of parameters
    /// ordered by `N`.
    pub fn increases_along(&self, family: &[ModelParams]) -> Result<bool> {
        let values = family
            .iter()
            .map(|p| self.omega(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(values.windows(2).all(|w| w[1] > w[0]))
    }
}
