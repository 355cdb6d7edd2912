//! Diffusion approximations: the reflected Halfin–Whitt pair, the
//! overloaded full lot and the small-parking-rate limits, together with an
//! Euler–Maruyama simulator used to check them.

mod bar;
mod halfin_whitt;
mod overloaded;
mod sde;
mod smallnu;

pub use bar::{bar_residual, BarResidual, Monomial, ReflectedFrame, TestFunction};
pub use halfin_whitt::{pi_infinity_density, MarginalRow, PiInfinity};
pub use overloaded::{
    overloaded_beta, overloaded_density, overloaded_density_with, overloaded_mean_approx, OccupancyBasis,
    PiecewiseNormalDensity, TruncatedNormal, WeightRule,
};
pub use sde::{simulate_ou, SdeConfig, SdeEnsemble, SdePath};
pub use smallnu::{smallnu_approx, SmallNuApprox};

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// One linear piece `slope * x + intercept`, valid for `x > from` up to the
/// next piece's threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPiece {
    pub from: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// A piecewise-linear scalar drift. The first piece starts at `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pieces: Vec<DriftPiece>,
}

impl PiecewiseLinear {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        PiecewiseLinear { pieces: vec![DriftPiece { from: f64::NEG_INFINITY, slope, intercept }] }
    }

    pub fn new(pieces: Vec<DriftPiece>) -> Result<Self> {
        match pieces.first() {
            Some(p) if p.from == f64::NEG_INFINITY => {}
            _ => return Err(Error::domain("the first drift piece must start at -inf")),
        }
        if pieces.windows(2).any(|w| !(w[0].from < w[1].from)) {
            return Err(Error::domain("drift thresholds must be strictly increasing"));
        }
        if pieces.iter().any(|p| !(p.slope.is_finite() && p.intercept.is_finite())) {
            return Err(Error::domain("drift coefficients must be finite"));
        }
        Ok(PiecewiseLinear { pieces })
    }

    pub fn pieces(&self) -> &[DriftPiece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.from < x).max(1) - 1;
        let p = &self.pieces[i];
        p.slope * x + p.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Barrier on one coordinate. An overshoot `d` past `level` is removed by
/// moving the whole state by `d * direction / |direction[coord]|`; `d` is
/// added to the regulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub coord: usize,
    pub level: f64,
    pub side: Side,
    pub direction: [f64; 2],
}

impl Reflection {
    fn overshoot(&self, x: &[f64; 2]) -> f64 {
        match self.side {
            Side::Upper => (x[self.coord] - self.level).max(0.0),
            Side::Lower => (self.level - x[self.coord]).max(0.0),
        }
    }

    /// Push per unit of regulator.
    pub fn unit_push(&self) -> [f64; 2] {
        let s = self.direction[self.coord].abs();
        [self.direction[0] / s, self.direction[1] / s]
    }

    pub fn admits(&self, x: &[f64; 2]) -> bool {
        self.overshoot(x) == 0.0
    }
}

/// `dX_i = b_i(X_i) dt + s_i dW_i (- regulator push)`, `corr(W_1, W_2) = rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct OUSpec {
    pub dim: usize,
    pub drift: Vec<PiecewiseLinear>,
    /// Per-coordinate noise coefficients `s_i`.
    pub diffusion: Vec<f64>,
    pub correlation: f64,
    pub reflection: Option<Reflection>,
}

impl OUSpec {
    pub fn new(
        drift: Vec<PiecewiseLinear>,
        diffusion: Vec<f64>,
        correlation: f64,
        reflection: Option<Reflection>,
    ) -> Result<Self> {
        let dim = drift.len();
        if !(dim == 1 || dim == 2) || diffusion.len() != dim {
            return Err(Error::domain("an OU spec needs one or two coordinates"));
        }
        if diffusion.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::domain("noise coefficients must be finite and nonnegative"));
        }
        if !(-1.0..=1.0).contains(&correlation) {
            return Err(Error::domain(format!("correlation {correlation} outside [-1, 1]")));
        }
        if let Some(r) = &reflection {
            let inward = match r.side {
                Side::Upper => r.direction[r.coord] < 0.0,
                Side::Lower => r.direction[r.coord] > 0.0,
            };
            if r.coord >= dim || !inward || r.direction[dim..].iter().any(|d| *d != 0.0) {
                return Err(Error::domain("reflection must push back into the domain"));
            }
        }
        Ok(OUSpec { dim, drift, diffusion, correlation, reflection })
    }

    pub fn drift_at(&self, x: &[f64; 2]) -> [f64; 2] {
        let mut b = [0.0; 2];
        for (i, d) in self.drift.iter().enumerate() {
            b[i] = d.eval(x[i]);
        }
        b
    }

    /// Instantaneous covariance `A A^T` of the driving noise.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let s1 = self.diffusion[0];
        let s2 = self.diffusion.get(1).copied().unwrap_or(0.0);
        let c = self.correlation * s1 * s2;
        [[s1 * s1, c], [c, s2 * s2]]
    }

    /// Lower-triangular square root of [`Self::covariance`].
    pub fn noise_factor(&self) -> [[f64; 2]; 2] {
        let s1 = self.diffusion[0];
        let s2 = self.diffusion.get(1).copied().unwrap_or(0.0);
        let rho = self.correlation;
        [[s1, 0.0], [s2 * rho, s2 * (1.0 - rho * rho).max(0.0).sqrt()]]
    }
}

/// Halfin–Whitt limit in `(Z, Q)` coordinates: drifts
/// `-mu (x ∧ beta) - nu x` and `-nu x`, noise `sqrt(2(nu+mu))` on each
/// coordinate with correlation `(2nu+mu)/(2(nu+mu))`, and a shared regulator
/// keeping `Q <= kappa`. An infinite `kappa` drops the barrier.
pub fn hw_spec(nu: f64, mu: f64, beta: f64, kappa: f64) -> Result<OUSpec> {
    check_positive(&[("nu", nu), ("mu", mu)])?;
    if beta.is_nan() || kappa.is_nan() {
        return Err(Error::domain("beta and kappa must not be NaN"));
    }
    let mut pieces = vec![DriftPiece { from: f64::NEG_INFINITY, slope: -(nu + mu), intercept: 0.0 }];
    if beta.is_finite() {
        pieces.push(DriftPiece { from: beta, slope: -nu, intercept: -mu * beta });
    }
    let s = (2.0 * (nu + mu)).sqrt();
    let reflection = (kappa < f64::INFINITY).then_some(Reflection {
        coord: 1,
        level: kappa,
        side: Side::Upper,
        direction: [-1.0, -1.0],
    });
    OUSpec::new(
        vec![PiecewiseLinear::new(pieces)?, PiecewiseLinear::linear(-nu, 0.0)],
        vec![s, s],
        (2.0 * nu + mu) / (2.0 * (nu + mu)),
        reflection,
    )
}

/// Full-lot limit: drift `-(nu+mu) x` below `beta`, `-nu x - mu beta` above,
/// noise `sqrt(2 nu mu K / (nu+mu))`.
pub fn overloaded_spec(nu: f64, mu: f64, k: f64, beta: f64) -> Result<OUSpec> {
    check_positive(&[("nu", nu), ("mu", mu), ("K", k)])?;
    let mut pieces = vec![DriftPiece { from: f64::NEG_INFINITY, slope: -(nu + mu), intercept: 0.0 }];
    if beta.is_finite() {
        pieces.push(DriftPiece { from: beta, slope: -nu, intercept: -mu * beta });
    }
    OUSpec::new(vec![PiecewiseLinear::new(pieces)?], vec![(2.0 * nu * mu * k / (nu + mu)).sqrt()], 0.0, None)
}

/// Heavy-traffic limit with unbounded lot: drifts `-(c mu M + x)`, noise
/// `sqrt(2 mu M)` with correlation 1/2, uncharged coordinate reflected at 0.
pub fn heavy_traffic_spec(mu: f64, m: f64, c: f64) -> Result<OUSpec> {
    check_positive(&[("mu", mu), ("M", m)])?;
    let b = PiecewiseLinear::linear(-1.0, -c * mu * m);
    let s = (2.0 * mu * m).sqrt();
    OUSpec::new(
        vec![b.clone(), b],
        vec![s, s],
        0.5,
        Some(Reflection { coord: 0, level: 0.0, side: Side::Lower, direction: [1.0, 0.0] }),
    )
}

/// Overloaded small-`nu` limit (time in units of `1/nu`): drifts `-x` and
/// instantaneous covariance `[[2l, 2l - mu M], [2l - mu M, 2l]]`.
pub fn smallnu_spec(lambda: f64, mu: f64, m: f64) -> Result<OUSpec> {
    check_positive(&[("lambda", lambda), ("mu", mu), ("M", m)])?;
    if lambda <= mu * m {
        return Err(Error::domain(format!("needs lambda > mu M, got {lambda} <= {}", mu * m)));
    }
    let s = (2.0 * lambda).sqrt();
    OUSpec::new(
        vec![PiecewiseLinear::linear(-1.0, 0.0), PiecewiseLinear::linear(-1.0, 0.0)],
        vec![s, s],
        (2.0 * lambda - mu * m) / (2.0 * lambda),
        None,
    )
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

pub(crate) fn std_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn std_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 - Φ(x)` without cancellation.
pub(crate) fn std_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hw_spec_examples() {
        let s = hw_spec(1.0, 1.0, 0.3, 2.0).unwrap();
        assert_eq!(s.drift_at(&[0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(s.correlation, 0.75);
        assert_eq!(s.diffusion, vec![2.0, 2.0]);
        // the min is active above beta
        assert!((s.drift[0].eval(1.0) - (-0.3 - 1.0)).abs() < 1e-15);
        assert!((s.drift[0].eval(-1.0) - 2.0).abs() < 1e-15);
        let r = s.reflection.unwrap();
        assert_eq!((r.coord, r.level, r.unit_push()), (1, 2.0, [-1.0, -1.0]));

        let free = hw_spec(1.0, 2.0, f64::INFINITY, f64::INFINITY).unwrap();
        assert!(free.reflection.is_none());
        for x in [-5.0, 0.0, 3.0, 100.0] {
            assert_eq!(free.drift[0].eval(x), -3.0 * x);
        }
        assert!(hw_spec(0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn overloaded_spec_examples() {
        let s = overloaded_spec(1.0, 1.0, 4.0, 0.5).unwrap();
        assert_eq!(s.diffusion, vec![2.0]);
        let b = &s.drift[0];
        assert!((b.eval(0.5) - (-1.0)).abs() < 1e-15);
        assert!((b.eval(0.5 + 1e-12) - (-1.0)).abs() < 1e-11);
        let s = overloaded_spec(0.7, 1.3, 2.0, f64::INFINITY).unwrap();
        assert_eq!(s.drift[0].eval(10.0), -20.0);
    }

    #[test]
    fn heavy_traffic_and_smallnu_specs() {
        let s = heavy_traffic_spec(1.0, 2.0, 0.0).unwrap();
        assert_eq!(s.drift_at(&[0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(s.correlation, 0.5);
        assert_eq!(s.reflection.unwrap().side, Side::Lower);
        assert_eq!(heavy_traffic_spec(1.0, 2.0, 0.5).unwrap().drift_at(&[0.0, 1.0]), [-1.0, -2.0]);

        let s = smallnu_spec(2.0, 1.0, 1.0).unwrap();
        let c = s.covariance();
        assert!((c[0][0] - 4.0).abs() < 1e-14 && (c[0][1] - 3.0).abs() < 1e-14);
        assert!(smallnu_spec(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn noise_factor_squares_to_covariance() {
        let s = hw_spec(0.4, 1.7, 0.0, 1.0).unwrap();
        let l = s.noise_factor();
        let c = s.covariance();
        for i in 0..2 {
            for j in 0..2 {
                let v = l[i][0] * l[j][0] + l[i][1] * l[j][1];
                assert!((v - c[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let b = PiecewiseLinear::linear(-1.0, 0.0);
        assert!(OUSpec::new(vec![b.clone()], vec![1.0], 1.5, None).is_err());
        assert!(OUSpec::new(vec![b.clone()], vec![-1.0], 0.0, None).is_err());
        let wrong_way = Reflection { coord: 0, level: 0.0, side: Side::Upper, direction: [1.0, 0.0] };
        assert!(OUSpec::new(vec![b.clone()], vec![1.0], 0.0, Some(wrong_way)).is_err());
        assert!(PiecewiseLinear::new(vec![DriftPiece { from: 0.0, slope: 1.0, intercept: 0.0 }]).is_err());
        assert!(PiecewiseLinear::new(vec![
            DriftPiece { from: f64::NEG_INFINITY, slope: 1.0, intercept: 0.0 },
            DriftPiece { from: 1.0, slope: 1.0, intercept: 0.0 },
            DriftPiece { from: 1.0, slope: 1.0, intercept: 0.0 },
        ])
        .is_err());
    }

    #[test]
    fn normal_helpers() {
        assert!((std_cdf(0.0) - 0.5).abs() < 1e-16);
        let v = std_cdf(1.959963984540054);
        assert!((v - 0.975).abs() < 1e-11, "{v}");
        assert!((std_sf(10.0) / 7.619853024160527e-24 - 1.0).abs() < 1e-10);
        assert!((std_pdf(0.0) - 0.3989422804014327).abs() < 1e-16);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_distance(&xs, |x| x.clamp(0.0, 1.0)) - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_distance(&xs, |x| (x * x).clamp(0.0, 1.0)) > 0.2);
    }
}
