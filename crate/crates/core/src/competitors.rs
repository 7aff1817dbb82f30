//! Comparison loss distributions: GlogM, GB2, Lomax, log-gamma, Fréchet,
//! lognormal and gamma.
//!
//! The two-parameter families use the usual textbook forms, with parameter
//! names chosen to line up with how fitted values are usually tabulated:
//!
//! | family     | cdf                                   | parameters          |
//! |------------|---------------------------------------|---------------------|
//! | Lomax      | `1 - (1 + y/β)^{-σ}`                  | scale β, shape σ    |
//! | log-gamma  | `P(α, β ln y)`, `y > 1`               | shape α, rate β     |
//! | Fréchet    | `exp(-(y/b)^{-a})`                    | shape a, scale b    |
//! | lognormal  | `Φ((ln y - μ)/σ)`                     | location μ, scale σ |
//! | gamma      | `P(α, y/β)`                           | shape α, scale β    |

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glmga::GlmgaParams;
use crate::specfun::{
    self, inv_reg_inc_beta_pair, inv_reg_inc_gamma_pair, ln_beta_pos, reg_inc_beta_pair,
    reg_inc_gamma_pair, softplus, SpecFunConfig, LN2,
};

/// Common surface of every loss distribution in the crate.
pub trait LossDistribution {
    fn log_pdf(&self, y: f64) -> Result<f64>;

    /// `(F(y), 1 - F(y))`, each to full relative precision where possible.
    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)>;

    fn quantile(&self, u: f64) -> Result<f64>;

    fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.log_pdf(y)?.exp())
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.0)
    }

    fn sf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.1)
    }

    /// Inverse-transform sampling.
    fn sample_inverse<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>>
    where
        Self: Sized,
    {
        (0..n)
            .map(|_| {
                let u = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                self.quantile(u)
            })
            .collect()
    }
}

impl LossDistribution for GlmgaParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        GlmgaParams::log_pdf(self, y)
    }
    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        GlmgaParams::cdf_pair(self, y)
    }
    fn quantile(&self, u: f64) -> Result<f64> {
        GlmgaParams::quantile(self, u)
    }
}

fn check_y(y: f64) -> Result<()> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("loss must be positive, got {y}")));
    }
    Ok(())
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("probability level must lie in (0,1), got {u}")));
    }
    Ok(())
}

fn check_params(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// `(logistic(t), logistic(-t))` without cancellation.
fn logistic_pair(t: f64) -> (f64, f64) {
    if t > 0.0 {
        let e = (-t).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = t.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

// ---------------------------------------------------------------------------
// GlogM
// ---------------------------------------------------------------------------

/// Generalized log-Moyal distribution GlogM(θ, σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlogMParams {
    pub sigma: f64,
    pub theta: f64,
}

impl GlogMParams {
    pub fn new(sigma: f64, theta: f64) -> Result<Self> {
        check_params(&[("sigma", sigma), ("theta", theta)])?;
        Ok(Self { sigma, theta })
    }

    /// Scale `μ = (θ/2)^σ`, the alternative way of reporting θ.
    pub fn display_mu(&self) -> f64 {
        (0.5 * self.theta).powf(self.sigma)
    }

    /// `E(Y^r) = (θ/2)^{rσ} Γ(1/2 - rσ) / Γ(1/2)` for `rσ < 1/2`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("moment order must be non-negative, got {r}")));
        }
        if r == 0.0 {
            return Ok(1.0);
        }
        let rs = r * self.sigma;
        if rs >= 0.5 {
            return Err(Error::Nonexistence(format!(
                "GlogM moment of order {r} requires sigma < {}",
                0.5 / r
            )));
        }
        let lg = |x: f64| specfun::log_gamma(x);
        Ok((rs * (0.5 * self.theta).ln() + lg(0.5 - rs)? - lg(0.5)?).exp())
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1.0)
    }

    /// Argument `s = sqrt(θ / (2 y^{1/σ}))` of the erfc form of the cdf.
    fn erfc_argument(&self, y: f64) -> f64 {
        (0.5 * ((0.5 * self.theta).ln() - y.ln() / self.sigma)).exp()
    }
}

impl LossDistribution for GlogMParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        let ln_y = y.ln();
        Ok(0.5 * self.theta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - self.sigma.ln()
            - (0.5 / self.sigma + 1.0) * ln_y
            - 0.5 * self.theta * (-ln_y / self.sigma).exp())
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        if y.is_infinite() {
            return Ok((1.0, 0.0));
        }
        let s = self.erfc_argument(y);
        if !s.is_finite() {
            return Ok((0.0, 1.0));
        }
        Ok((specfun::erfc(s)?, specfun::erf(s)?))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        // erfc(s) = u  <=>  Q(1/2, s^2) = u  <=>  P(1/2, s^2) = 1 - u
        let s2 = inv_reg_inc_gamma_pair(&SpecFunConfig::default(), 0.5, 1.0 - u, u)?;
        Ok((self.sigma * ((0.5 * self.theta).ln() - s2.ln())).exp())
    }
}

// ---------------------------------------------------------------------------
// GB2
// ---------------------------------------------------------------------------

/// Generalized beta distribution of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gb2Params {
    pub mu: f64,
    pub p: f64,
    pub nu: f64,
    pub tau: f64,
}

impl Gb2Params {
    pub fn new(mu: f64, p: f64, nu: f64, tau: f64) -> Result<Self> {
        check_params(&[("mu", mu), ("nu", nu), ("tau", tau)])?;
        if p == 0.0 || !p.is_finite() {
            return Err(Error::domain(format!("GB2 power p must be finite and nonzero, got {p}")));
        }
        Ok(Self { mu, p, nu, tau })
    }

    /// The GB2 member equal to GLMGA(σ, a, b):
    /// `τ = a`, `μ = (2b)^{-σ}`, `ν = 1/2`, `p = -1/σ`.
    pub fn from_glmga(g: &GlmgaParams) -> Self {
        Self {
            mu: (2.0 * g.b).powf(-g.sigma),
            p: -1.0 / g.sigma,
            nu: 0.5,
            tau: g.a,
        }
    }
}

impl LossDistribution for Gb2Params {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        let t = self.p * (y.ln() - self.mu.ln());
        Ok(self.p.abs().ln() - ln_beta_pos(self.nu, self.tau) - y.ln() + self.nu * t
            - (self.nu + self.tau) * softplus(t))
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        if y.is_infinite() {
            return Ok((1.0, 0.0));
        }
        let t = self.p * (y.ln() - self.mu.ln());
        let (w, wc) = logistic_pair(t);
        let (lower, upper) = reg_inc_beta_pair(self.nu, self.tau, w, wc)?;
        if self.p > 0.0 {
            Ok((lower, upper))
        } else {
            Ok((upper, lower))
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let cfg = SpecFunConfig::default();
        let (w, wc) = if self.p > 0.0 {
            inv_reg_inc_beta_pair(&cfg, self.nu, self.tau, u, 1.0 - u)?
        } else {
            inv_reg_inc_beta_pair(&cfg, self.nu, self.tau, 1.0 - u, u)?
        };
        Ok(self.mu * ((w.ln() - wc.ln()) / self.p).exp())
    }
}

// ---------------------------------------------------------------------------
// Two-parameter families
// ---------------------------------------------------------------------------

/// Lomax (Pareto II) with scale `beta` and shape `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LomaxParams {
    pub beta: f64,
    pub sigma: f64,
}

impl LomaxParams {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        check_params(&[("beta", beta), ("sigma", sigma)])?;
        Ok(Self { beta, sigma })
    }
}

impl LossDistribution for LomaxParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(self.sigma.ln() - self.beta.ln() - (self.sigma + 1.0) * (y / self.beta).ln_1p())
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        let l = -self.sigma * (y / self.beta).ln_1p();
        Ok((-l.exp_m1(), l.exp()))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.beta * (-(-u).ln_1p() / self.sigma).exp_m1())
    }
}

/// Log-gamma: `ln Y ~ Gamma(alpha, rate beta)`, support `y > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl LogGammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_params(&[("alpha", alpha), ("beta", beta)])?;
        Ok(Self { alpha, beta })
    }
}

impl LossDistribution for LogGammaParams {
    /// `-inf` for `0 < y <= 1`, which lies outside the family's support.
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        if y <= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let ln_y = y.ln();
        Ok(self.alpha * self.beta.ln() - specfun::log_gamma(self.alpha)?
            + (self.alpha - 1.0) * ln_y.ln()
            - (self.beta + 1.0) * ln_y)
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        if y <= 1.0 {
            return Ok((0.0, 1.0));
        }
        reg_inc_gamma_pair(self.alpha, self.beta * y.ln())
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let g = inv_reg_inc_gamma_pair(&SpecFunConfig::default(), self.alpha, u, 1.0 - u)?;
        Ok((g / self.beta).exp())
    }
}

/// Fréchet with shape `a` and scale `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetParams {
    pub a: f64,
    pub b: f64,
}

impl FrechetParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_params(&[("a", a), ("b", b)])?;
        Ok(Self { a, b })
    }
}

impl LossDistribution for FrechetParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        let l = (y / self.b).ln();
        Ok(self.a.ln() - self.b.ln() - (self.a + 1.0) * l - (-self.a * l).exp())
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        let t = (-self.a * (y / self.b).ln()).exp();
        Ok(((-t).exp(), -(-t).exp_m1()))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.b * (-u.ln()).powf(-1.0 / self.a))
    }
}

/// Lognormal with location `mu` and scale `sigma` on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("lognormal location must be finite, got {mu}")));
        }
        check_params(&[("sigma", sigma)])?;
        Ok(Self { mu, sigma })
    }
}

impl LossDistribution for LognormalParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        let ln_y = y.ln();
        let z = (ln_y - self.mu) / self.sigma;
        Ok(-0.5 * z * z - ln_y - self.sigma.ln() - 0.5 * (LN2 + std::f64::consts::PI.ln()))
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        let z = (y.ln() - self.mu) / self.sigma;
        Ok((specfun::std_normal_cdf(z), specfun::std_normal_cdf(-z)))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok((self.mu + self.sigma * specfun::std_normal_quantile(u)?).exp())
    }
}

/// Gamma with shape `alpha` and scale `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_params(&[("alpha", alpha), ("beta", beta)])?;
        Ok(Self { alpha, beta })
    }
}

impl LossDistribution for GammaParams {
    fn log_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(-self.alpha * self.beta.ln() - specfun::log_gamma(self.alpha)?
            + (self.alpha - 1.0) * y.ln()
            - y / self.beta)
    }

    fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_y(y)?;
        reg_inc_gamma_pair(self.alpha, y / self.beta)
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.beta * inv_reg_inc_gamma_pair(&SpecFunConfig::default(), self.alpha, u, 1.0 - u)?)
    }
}
