//! The generalized log-Moyal gamma distribution GLMGA(σ, a, b).
//!
//! A gamma(a, b)-rate mixture of the generalized log-Moyal law. The density is
//!
//! ```text
//! f(y) = b^a / (√2 σ B(a, 1/2)) · y^{-(1/(2σ)+1)} / (½ y^{-1/σ} + b)^{a+1/2},   y > 0
//! ```
//!
//! and with `z = y^{-1/σ}` and `v = z / (z + 2b)` the survival function is the
//! Beta(1/2, a) cdf at `v`. All tail work goes through `v` and its complement
//! `2b / (z + 2b)`, both computed from `ln y` so that neither under- nor
//! overflows for extreme `y`.
//!
//! The survival function is regularly varying with extreme value index `2σ`,
//! so the `r`-th moment exists only for `rσ < 1/2`. Requests for moments that
//! do not exist return [`Error::Nonexistence`].

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::specfun::{
    self, inv_reg_inc_beta_pair, ln_beta_pos, reg_inc_beta_pair, SpecFunConfig, LN2,
};

/// Parameters of GLMGA(σ, a, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlmgaParams {
    /// Tail parameter; the extreme value index is `2 * sigma`.
    pub sigma: f64,
    /// Shape of the gamma mixing law.
    pub a: f64,
    /// Rate of the gamma mixing law.
    pub b: f64,
}

/// Leading terms of the survival function for large `y`:
/// `1 - F(y) = C y^{-1/xi} (1 + D y^{-1/σ} (1 + o(1)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailExpansion {
    pub c: f64,
    pub d: f64,
    pub xi: f64,
}

/// Which stochastic representation `sample_with` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SamplingMethod {
    /// `(Y / (2b X))^σ` with `X ~ Gamma(1/2, 1)` and `Y ~ Gamma(a, 1)`.
    #[default]
    TwoGamma,
    /// `Θ ~ Gamma(a, rate b)` followed by an inverse-cdf draw from GlogM(Θ, σ).
    GammaMixture,
    /// `(Y / (b X^2))^σ` with `X` standard half-normal and `Y ~ Gamma(a, 1)`.
    HalfNormalGamma,
}

/// Which side of a threshold an incomplete moment conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Log density from precomputed pieces; shared with the likelihood code.
///
/// `ln_beta_a_half` is `ln B(a, 1/2)`.
#[inline]
pub(crate) fn log_density_parts(
    ln_sigma: f64,
    sigma: f64,
    a: f64,
    ln_b: f64,
    ln_beta_a_half: f64,
    ln_y: f64,
) -> f64 {
    // ln(½ y^{-1/σ} + b) as a log-sum-exp.
    let s1 = -ln_y / sigma - LN2;
    let (hi, lo) = if s1 > ln_b { (s1, ln_b) } else { (ln_b, s1) };
    let ln_mix = hi + (lo - hi).exp().ln_1p();
    a * ln_b - 0.5 * LN2 - ln_sigma - ln_beta_a_half - (0.5 / sigma + 1.0) * ln_y
        - (a + 0.5) * ln_mix
}

/// `(v, 1 - v)` with `v = z/(z+2b)`, `z = y^{-1/σ}`, from `ln y`.
#[inline]
pub(crate) fn tail_argument(sigma: f64, b: f64, ln_y: f64) -> (f64, f64) {
    // v = logistic(t), t = ln z - ln(2b)
    let t = -ln_y / sigma - (2.0 * b).ln();
    if t > 0.0 {
        let e = (-t).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = t.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

fn check_positive(name: &str, y: f64) -> Result<()> {
    if !(y > 0.0) || y.is_nan() {
        return Err(Error::domain(format!("{name} must be positive, got {y}")));
    }
    Ok(())
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("probability level must lie in (0,1), got {u}")));
    }
    Ok(())
}

impl GlmgaParams {
    pub fn new(sigma: f64, a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("a", a), ("b", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { sigma, a, b })
    }

    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        check_positive("y", y)?;
        if y.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(log_density_parts(
            self.sigma.ln(),
            self.sigma,
            self.a,
            self.b.ln(),
            ln_beta_pos(self.a, 0.5),
            y.ln(),
        ))
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.log_pdf(y)?.exp())
    }

    /// `(F(y), 1 - F(y))`.
    pub fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        check_positive("y", y)?;
        if y.is_infinite() {
            return Ok((1.0, 0.0));
        }
        let (v, vc) = tail_argument(self.sigma, self.b, y.ln());
        let (surv, cdf) = reg_inc_beta_pair(0.5, self.a, v, vc)?;
        Ok((cdf, surv))
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.0)
    }

    /// Survival function `1 - F(y)`, accurate far into the tail.
    pub fn sf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.1)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        self.quantile_from_pair(u, 1.0 - u)
    }

    /// Quantile at level `u` given also its complement `uc = 1 - u`.
    pub(crate) fn quantile_from_pair(&self, u: f64, uc: f64) -> Result<f64> {
        let (w, wc) = inv_reg_inc_beta_pair(&SpecFunConfig::default(), 0.5, self.a, uc, u)?;
        if w == 0.0 {
            return Ok(f64::INFINITY);
        }
        if wc == 0.0 {
            return Ok(0.0);
        }
        Ok((-self.sigma * ((2.0 * self.b).ln() + w.ln() - wc.ln())).exp())
    }

    /// `n` independent draws using the default representation.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(SamplingMethod::default(), n, seed)
    }

    pub fn sample_with(&self, method: SamplingMethod, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng::seeded(seed);
        self.sample_rng(method, n, &mut rng)
    }

    pub fn sample_rng<R: Rng + ?Sized>(
        &self,
        method: SamplingMethod,
        n: usize,
        rng: &mut R,
    ) -> Vec<f64> {
        (0..n).map(|_| self.draw(method, rng)).collect()
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, method: SamplingMethod, rng: &mut R) -> f64 {
        let shape_a = Gamma::new(self.a, 1.0).expect("validated shape");
        match method {
            SamplingMethod::TwoGamma => {
                let half = Gamma::new(0.5, 1.0).expect("constant shape");
                let x: f64 = half.sample(rng);
                let y: f64 = shape_a.sample(rng);
                (self.sigma * (y.ln() - (2.0 * self.b).ln() - x.ln())).exp()
            }
            SamplingMethod::GammaMixture => {
                let theta: f64 = shape_a.sample(rng) / self.b;
                let u = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                // erfc(s) = u  <=>  s = -Φ^{-1}(u/2)/√2
                let q = specfun::std_normal_quantile(0.5 * u).expect("level in (0, 1/2]");
                let s2 = 0.5 * q * q;
                (self.sigma * (theta.ln() - LN2 - s2.ln())).exp()
            }
            SamplingMethod::HalfNormalGamma => {
                let x: f64 = rng.sample::<f64, _>(StandardNormal);
                let y: f64 = shape_a.sample(rng);
                (self.sigma * (y.ln() - self.b.ln() - 2.0 * x.abs().ln())).exp()
            }
        }
    }

    /// `E(Y^r)`, which exists for `rσ < 1/2`.
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
                "moment of order {r} requires sigma < {}, got sigma = {}",
                0.5 / r,
                self.sigma
            )));
        }
        Ok((-rs * (2.0 * self.b).ln() + ln_beta_pos(0.5 - rs, self.a + rs)
            - ln_beta_pos(0.5, self.a))
        .exp())
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1.0)
    }

    pub fn variance(&self) -> Result<f64> {
        let m2 = self.moment(2.0)?;
        let m1 = self.moment(1.0)?;
        Ok(m2 - m1 * m1)
    }

    /// `E(Y^r | Y <= u)` or `E(Y^r | Y > u)`.
    pub fn incomplete_moment(&self, r: f64, u: f64, side: Side) -> Result<f64> {
        check_positive("threshold", u)?;
        let full = self.moment(r)?;
        let rs = r * self.sigma;
        let (v, vc) = tail_argument(self.sigma, self.b, u.ln());
        let (shifted_up, shifted_low) = reg_inc_beta_pair(0.5 - rs, self.a + rs, v, vc)?;
        let (base_up, base_low) = reg_inc_beta_pair(0.5, self.a, v, vc)?;
        let (num, den) = match side {
            Side::Upper => (shifted_up, base_up),
            Side::Lower => (shifted_low, base_low),
        };
        if den <= 0.0 {
            return Err(Error::numeric(format!(
                "conditioning event has probability zero at threshold {u}"
            )));
        }
        Ok(full * num / den)
    }

    /// Mode `((b + 2bσ)/(a - σ))^{-σ}`, defined for `a > σ`.
    pub fn mode(&self) -> Result<f64> {
        if self.a <= self.sigma {
            return Err(Error::domain(format!(
                "interior mode requires a > sigma (a = {}, sigma = {}); the density is maximal at the boundary y -> 0",
                self.a, self.sigma
            )));
        }
        let z = self.b * (1.0 + 2.0 * self.sigma) / (self.a - self.sigma);
        Ok(z.powf(-self.sigma))
    }

    pub fn tail_expansion(&self) -> TailExpansion {
        let ln_c = LN2 - 0.5 * (2.0 * self.b).ln() - ln_beta_pos(self.a, 0.5);
        TailExpansion {
            c: ln_c.exp(),
            d: -(2.0 * self.a + 1.0) / (12.0 * self.b),
            xi: 2.0 * self.sigma,
        }
    }

    /// Value-at-Risk, the quantile at level `p`.
    pub fn var_risk(&self, p: f64) -> Result<f64> {
        self.quantile(p)
    }

    /// Tail-Value-at-Risk `E(Y | Y > VaR_p)`; requires `σ < 1/2`.
    pub fn tvar(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        let mean = self.mean()?;
        let (w, wc) = inv_reg_inc_beta_pair(&SpecFunConfig::default(), 0.5, self.a, 1.0 - p, p)?;
        let (tail, _) =
            reg_inc_beta_pair(0.5 - self.sigma, self.a + self.sigma, w, wc)?;
        Ok(mean * tail / (1.0 - p))
    }

    /// Net stop-loss premium `E[(Y - R)+]`; requires `σ < 1/2`.
    pub fn stop_loss_premium(&self, retention: f64) -> Result<f64> {
        check_positive("retention", retention)?;
        let mean = self.mean()?;
        let (v, vc) = tail_argument(self.sigma, self.b, retention.ln());
        let (shifted, _) = reg_inc_beta_pair(0.5 - self.sigma, self.a + self.sigma, v, vc)?;
        let (surv, _) = reg_inc_beta_pair(0.5, self.a, v, vc)?;
        Ok((mean * shifted - retention * surv).max(0.0))
    }

    /// Mean excess function `E(Y - u | Y > u)`; requires `σ < 1/2`.
    pub fn mean_excess(&self, u: f64) -> Result<f64> {
        Ok(self.incomplete_moment(1.0, u, Side::Upper)? - u)
    }
}

/// Generalized inverse gamma density reached by GLMGA(σ, a, a φ^{1/σ}/2) as
/// `a -> ∞`.
pub fn limiting_density(sigma: f64, phi: f64, y: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("phi", phi)?;
    check_positive("y", y)?;
    let ln_y = y.ln();
    let ln_phi = phi.ln();
    let ln_f = -sigma.ln() - 0.5 * std::f64::consts::PI.ln() - ln_phi / (2.0 * sigma)
        - (0.5 / sigma + 1.0) * ln_y
        - (-(ln_phi + ln_y) / sigma).exp();
    Ok(ln_f.exp())
}
