use serde::{Deserialize, Serialize};

use super::{check_positive, std_cdf, std_pdf, std_sf};
use crate::closed_form::expected_occupancy;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// A normal law with the given mean and sd, restricted to one side of the
/// breakpoint and carrying mass `weight` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
    pub weight: f64,
}

/// How the two pieces are weighted against each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Density continuous at the breakpoint: the stationary law of the
    /// piecewise OU process.
    Continuous,
    /// Continuity ratio scaled by `sd_left^2 / sd_right^2`. Used by
    /// [`overloaded_mean_approx`].
    VarianceRatio,
}

/// Which occupancy plays the role of the scaling parameter `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancyBasis {
    /// The number of spaces `K`.
    Nominal,
    /// The mean occupancy `lambda (1 - B) / nu` of the loss system.
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseNormalDensity {
    pub breakpoint: f64,
    pub left: TruncatedNormal,
    pub right: TruncatedNormal,
}

/// `φ(a) / (1 - Φ(a))`, stable for large `a`.
fn hazard(a: f64) -> f64 {
    if a == f64::INFINITY {
        return f64::INFINITY;
    }
    if a < 25.0 {
        std_pdf(a) / std_sf(a)
    } else {
        let a2 = a * a;
        a + 1.0 / a - 2.0 / (a * a2) + 10.0 / (a * a2 * a2) - 74.0 / (a * a2 * a2 * a2)
    }
}

impl PiecewiseNormalDensity {
    pub fn new(
        breakpoint: f64,
        (mean_l, sd_l): (f64, f64),
        (mean_r, sd_r): (f64, f64),
        rule: WeightRule,
    ) -> Result<Self> {
        if !(sd_l > 0.0 && sd_r > 0.0 && sd_l.is_finite() && sd_r.is_finite()) {
            return Err(Error::domain("piece standard deviations must be positive"));
        }
        if breakpoint.is_nan() {
            return Err(Error::domain("breakpoint must not be NaN"));
        }
        let d1 = if breakpoint == f64::INFINITY {
            1.0
        } else if breakpoint == f64::NEG_INFINITY {
            0.0
        } else {
            // normalised piece densities at the breakpoint
            let at_left = hazard(-(breakpoint - mean_l) / sd_l) / sd_l;
            let at_right = hazard((breakpoint - mean_r) / sd_r) / sd_r;
            let mut r = at_left / at_right;
            if rule == WeightRule::VarianceRatio {
                r *= sd_l * sd_l / (sd_r * sd_r);
            }
            1.0 / (1.0 + r)
        };
        Ok(PiecewiseNormalDensity {
            breakpoint,
            left: TruncatedNormal { mean: mean_l, sd: sd_l, weight: d1 },
            right: TruncatedNormal { mean: mean_r, sd: sd_r, weight: 1.0 - d1 },
        })
    }

    fn alpha_left(&self) -> f64 {
        (self.breakpoint - self.left.mean) / self.left.sd
    }

    fn alpha_right(&self) -> f64 {
        (self.breakpoint - self.right.mean) / self.right.sd
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.breakpoint {
            let TruncatedNormal { mean, sd, weight } = self.left;
            if weight == 0.0 {
                return 0.0;
            }
            weight * std_pdf((x - mean) / sd) / (sd * std_cdf(self.alpha_left()))
        } else {
            let TruncatedNormal { mean, sd, weight } = self.right;
            if weight == 0.0 {
                return 0.0;
            }
            weight * std_pdf((x - mean) / sd) / (sd * std_sf(self.alpha_right()))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let d1 = self.left.weight;
        if x <= self.breakpoint {
            if d1 == 0.0 {
                return 0.0;
            }
            d1 * std_cdf((x - self.left.mean) / self.left.sd) / std_cdf(self.alpha_left())
        } else {
            if self.right.weight == 0.0 {
                return 1.0;
            }
            let inside = std_sf(self.alpha_right()) - std_sf((x - self.right.mean) / self.right.sd);
            d1 + self.right.weight * inside / std_sf(self.alpha_right())
        }
    }

    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        if self.left.weight > 0.0 {
            m += self.left.weight * (self.left.mean - self.left.sd * hazard(-self.alpha_left()));
        }
        if self.right.weight > 0.0 {
            m += self.right.weight * (self.right.mean + self.right.sd * hazard(self.alpha_right()));
        }
        m
    }
}

/// Stationary density of the full-lot limit with drift `-(nu+mu) x` below
/// `beta` and `-nu x - mu beta` above: a `N(0, nu mu K/(nu+mu)^2)` piece on
/// the left and a `N(-mu beta/nu, mu K/(nu+mu))` piece on the right, glued
/// continuously.
pub fn overloaded_density(nu: f64, mu: f64, k: f64, beta: f64) -> Result<PiecewiseNormalDensity> {
    overloaded_density_with(nu, mu, k, beta, WeightRule::Continuous)
}

pub fn overloaded_density_with(
    nu: f64,
    mu: f64,
    k: f64,
    beta: f64,
    rule: WeightRule,
) -> Result<PiecewiseNormalDensity> {
    check_positive(&[("nu", nu), ("mu", mu), ("K", k)])?;
    let sd_l = (nu * mu * k).sqrt() / (nu + mu);
    let sd_r = (mu * k / (nu + mu)).sqrt();
    let mean_r = if beta.is_finite() { -mu * beta / nu } else { 0.0 };
    PiecewiseNormalDensity::new(beta, (0.0, sd_l), (mean_r, sd_r), rule)
}

/// `beta = (M - nu n/(nu+mu)) / sqrt(n)`.
pub fn overloaded_beta(params: &ModelParams, n: f64) -> f64 {
    (params.m - params.nu * n / (params.nu + params.mu)) / n.sqrt()
}

/// `E[Z] ≈ sqrt(n) E[Ẑ] + nu n/(nu+mu)` with `n` chosen by `basis` and `Ẑ`
/// the unit-size full-lot limit weighted by [`WeightRule::VarianceRatio`].
pub fn overloaded_mean_approx(params: &ModelParams, basis: OccupancyBasis) -> Result<f64> {
    let params = params.validate()?;
    let k = params.finite_k("the overloaded diffusion approximation")?;
    let n = match basis {
        OccupancyBasis::Nominal => k as f64,
        OccupancyBasis::Expected => expected_occupancy(&params)?,
    };
    if !(n > 0.0) {
        return Err(Error::domain("the overloaded approximation needs a nonempty lot"));
    }
    let beta = overloaded_beta(&params, n);
    let density = overloaded_density_with(params.nu, params.mu, 1.0, beta, WeightRule::VarianceRatio)?;
    Ok(n.sqrt() * density.mean() + params.nu * n / (params.nu + params.mu))
}
