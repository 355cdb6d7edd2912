use serde::Serialize;

use super::{check_positive, std_cdf, std_pdf, std_sf};
use crate::error::Result;

/// Two bivariate normals glued along `x1 = beta`, weighted as in the
/// one-dimensional piecewise-OU construction. The `x2` marginal of this
/// candidate differs from the true `N(0, (nu+mu)/nu)` law of the reflected
/// pair's queue coordinate, which is what it is kept around to show.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiInfinity {
    pub nu: f64,
    pub mu: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub mean_minus: [f64; 2],
    pub cov_minus: [[f64; 2]; 2],
    pub mean_plus: [f64; 2],
    pub cov_plus: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRow {
    pub x2: f64,
    pub candidate: f64,
    pub normal: f64,
}

pub fn pi_infinity_density(nu: f64, mu: f64, beta: f64) -> Result<PiInfinity> {
    check_positive(&[("nu", nu), ("mu", mu)])?;
    let ratio = (nu + mu) / nu;
    let boost = ratio.sqrt() * (mu * beta * beta / (2.0 * nu)).exp();
    let c1 = 1.0 / (std_cdf(beta) + boost * std_sf(ratio.sqrt() * beta));
    let cross = (2.0 * nu + mu) / (2.0 * nu);
    Ok(PiInfinity {
        nu,
        mu,
        beta,
        c1,
        c2: c1 * boost,
        mean_minus: [0.0, 0.0],
        cov_minus: [[1.0, 1.0], [1.0, ratio]],
        mean_plus: [-mu * beta / nu, 0.0],
        cov_plus: [[ratio, cross], [cross, ratio]],
    })
}

fn bivariate_pdf(x: [f64; 2], m: [f64; 2], s: [[f64; 2]; 2]) -> f64 {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let (d0, d1) = (x[0] - m[0], x[1] - m[1]);
    let q = (s[1][1] * d0 * d0 - 2.0 * s[0][1] * d0 * d1 + s[0][0] * d1 * d1) / det;
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}

/// `P(x1 <= beta | x2)` and the `x2` density for one normal piece.
fn split_marginal(x2: f64, beta: f64, m: [f64; 2], s: [[f64; 2]; 2]) -> (f64, f64) {
    let sd2 = s[1][1].sqrt();
    let density = std_pdf((x2 - m[1]) / sd2) / sd2;
    let cm = m[0] + s[0][1] / s[1][1] * (x2 - m[1]);
    let cs = (s[0][0] - s[0][1] * s[0][1] / s[1][1]).sqrt();
    (std_cdf((beta - cm) / cs), density)
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

impl PiInfinity {
    pub fn density(&self, x: [f64; 2]) -> f64 {
        if x[0] <= self.beta {
            self.c1 * bivariate_pdf(x, self.mean_minus, self.cov_minus)
        } else {
            self.c2 * bivariate_pdf(x, self.mean_plus, self.cov_plus)
        }
    }

    /// Marginal density of `x2`, integrating `x1` in closed form.
    pub fn x2_marginal(&self, x2: f64) -> f64 {
        let (below, dm) = split_marginal(x2, self.beta, self.mean_minus, self.cov_minus);
        let (below_p, dp) = split_marginal(x2, self.beta, self.mean_plus, self.cov_plus);
        self.c1 * dm * below + self.c2 * dp * (1.0 - below_p)
    }

    /// Density of `N(0, (nu+mu)/nu)`.
    pub fn reference_marginal(&self, x2: f64) -> f64 {
        let sd = ((self.nu + self.mu) / self.nu).sqrt();
        std_pdf(x2 / sd) / sd
    }

    /// Composite Simpson over a box of `half_width` standard deviations,
    /// split at `x1 = beta`, with `n` intervals per side and dimension.
    pub fn total_mass(&self, half_width: f64, n: usize) -> f64 {
        let sd = ((self.nu + self.mu) / self.nu).sqrt();
        let x1_lo = self.mean_plus[0].min(0.0) - half_width * sd;
        let x1_hi = self.mean_plus[0].max(0.0) + half_width * sd;
        let (x2_lo, x2_hi) = (-half_width * sd, half_width * sd);
        let beta = self.beta.clamp(x1_lo, x1_hi);
        let over = |a: f64, b: f64, weight: f64, m: [f64; 2], s: [[f64; 2]; 2]| {
            if b <= a {
                return 0.0;
            }
            simpson(a, b, n, |x1| simpson(x2_lo, x2_hi, n, |x2| weight * bivariate_pdf([x1, x2], m, s)))
        };
        over(x1_lo, beta, self.c1, self.mean_minus, self.cov_minus)
            + over(beta, x1_hi, self.c2, self.mean_plus, self.cov_plus)
    }

    pub fn marginal_report(&self, grid: &[f64]) -> Vec<MarginalRow> {
        grid.iter()
            .map(|&x2| MarginalRow { x2, candidate: self.x2_marginal(x2), normal: self.reference_marginal(x2) })
            .collect()
    }

    /// Largest pointwise gap between the two marginals on `grid`.
    pub fn max_marginal_gap(&self, grid: &[f64]) -> f64 {
        self.marginal_report(grid).iter().map(|r| (r.candidate - r.normal).abs()).fold(0.0, f64::max)
    }
}
