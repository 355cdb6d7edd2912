use super::{OUSpec, SdeEnsemble};
use crate::error::{Error, Result};

/// A smooth test function with its first and second derivatives.
pub trait TestFunction: Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2];
}

/// `x1^p1 * x2^p2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub p1: u32,
    pub p2: u32,
}

impl Monomial {
    pub const fn new(p1: u32, p2: u32) -> Self {
        Monomial { p1, p2 }
    }
}

fn falling(x: f64, p: u32, order: u32) -> f64 {
    if order > p {
        return 0.0;
    }
    let coeff: f64 = (0..order).map(|i| (p - i) as f64).product();
    coeff * x.powi((p - order) as i32)
}

impl TestFunction for Monomial {
    fn value(&self, x: [f64; 2]) -> f64 {
        falling(x[0], self.p1, 0) * falling(x[1], self.p2, 0)
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        [falling(x[0], self.p1, 1) * falling(x[1], self.p2, 0), falling(x[0], self.p1, 0) * falling(x[1], self.p2, 1)]
    }

    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let off = falling(x[0], self.p1, 1) * falling(x[1], self.p2, 1);
        [
            [falling(x[0], self.p1, 2) * falling(x[1], self.p2, 0), off],
            [off, falling(x[0], self.p1, 0) * falling(x[1], self.p2, 2)],
        ]
    }
}

/// Reads a test function in the `(x1, kappa - x2)` coordinates in which the
/// reflected pair lives on `{x2 >= 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedFrame<F> {
    pub kappa: f64,
    pub inner: F,
}

impl<F: TestFunction> TestFunction for ReflectedFrame<F> {
    fn value(&self, x: [f64; 2]) -> f64 {
        self.inner.value([x[0], self.kappa - x[1]])
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let g = self.inner.gradient([x[0], self.kappa - x[1]]);
        [g[0], -g[1]]
    }

    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let h = self.inner.hessian([x[0], self.kappa - x[1]]);
        [[h[0][0], -h[0][1]], [-h[1][0], h[1][1]]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarResidual {
    pub residual: f64,
    pub std_error: f64,
    /// `residual / std_error`, zero when both vanish.
    pub z_score: f64,
}

/// Monte Carlo estimate of `∫ Lf dπ + ∫ ∇f·u dσ` from the part of each path
/// after `burn_in`, where `L` is the generator of `spec`, `u` the push of its
/// regulator and `σ` the regulator measure per unit time. Each path yields
/// one estimate; the standard error is taken across paths.
///
/// Needs every step recorded. The push term evaluates `∇f` halfway along
/// each projection segment.
pub fn bar_residual(ensemble: &SdeEnsemble, spec: &OUSpec, f: &dyn TestFunction, burn_in: f64) -> Result<BarResidual> {
    if ensemble.record_dt != ensemble.dt {
        return Err(Error::Diagnostic("the adjoint relation needs every step recorded".into()));
    }
    if !(burn_in >= 0.0) || burn_in >= ensemble.horizon() {
        return Err(Error::Diagnostic(format!(
            "burn-in {burn_in} leaves no stationary part of a horizon of {}",
            ensemble.horizon()
        )));
    }
    if ensemble.paths.len() < 2 {
        return Err(Error::Diagnostic("a standard error needs at least two paths".into()));
    }
    let start = ensemble.first_after(burn_in);
    let cov = spec.covariance();
    let push = spec.reflection.map(|r| r.unit_push());
    let dt = ensemble.dt;
    let per_path: Vec<f64> = ensemble
        .paths
        .iter()
        .map(|p| {
            let n = p.states.len() - 1;
            let mut acc = 0.0;
            for k in start..n {
                let x = p.states[k];
                let b = spec.drift_at(&x);
                let g = f.gradient(x);
                let h = f.hessian(x);
                let lf = b[0] * g[0]
                    + b[1] * g[1]
                    + 0.5 * (cov[0][0] * h[0][0] + 2.0 * cov[0][1] * h[0][1] + cov[1][1] * h[1][1]);
                acc += lf * dt;
                if let Some(u) = push {
                    let dy = p.regulator[k + 1] - p.regulator[k];
                    if dy > 0.0 {
                        let after = p.states[k + 1];
                        let mid = [after[0] - 0.5 * dy * u[0], after[1] - 0.5 * dy * u[1]];
                        let gm = f.gradient(mid);
                        acc += (gm[0] * u[0] + gm[1] * u[1]) * dy;
                    }
                }
            }
            acc / ((n - start) as f64 * dt)
        })
        .collect();
    let m = per_path.len() as f64;
    let residual = per_path.iter().sum::<f64>() / m;
    let var = per_path.iter().map(|r| (r - residual).powi(2)).sum::<f64>() / (m - 1.0);
    let std_error = (var / m).sqrt();
    let z_score = if std_error > 0.0 {
        residual / std_error
    } else if residual == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(BarResidual { residual, std_error, z_score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{hw_spec, simulate_ou, SdeConfig};

    #[test]
    fn monomial_derivatives() {
        let f = Monomial::new(2, 1);
        let x = [3.0, -2.0];
        assert_eq!(f.value(x), -18.0);
        assert_eq!(f.gradient(x), [-12.0, 9.0]);
        assert_eq!(f.hessian(x), [[-4.0, 6.0], [6.0, 0.0]]);
        assert_eq!(Monomial::new(0, 0).gradient(x), [0.0, 0.0]);
    }

    #[test]
    fn reflected_frame_chain_rule() {
        let f = ReflectedFrame { kappa: 1.0, inner: Monomial::new(1, 1) };
        // f = x1 (1 - x2)
        let x = [2.0, 0.25];
        assert_eq!(f.value(x), 1.5);
        assert_eq!(f.gradient(x), [0.75, -2.0]);
        assert_eq!(f.hessian(x), [[0.0, -1.0], [-1.0, 0.0]]);
    }

    #[test]
    fn constant_has_zero_residual() {
        let spec = hw_spec(1.0, 1.0, 0.0, 0.5).unwrap();
        let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(1e-2, 10.0, 3, 2)).unwrap();
        let r = bar_residual(&ens, &spec, &Monomial::new(0, 0), 1.0).unwrap();
        assert_eq!((r.residual, r.std_error, r.z_score), (0.0, 0.0, 0.0));
    }

    #[test]
    fn diagnostics() {
        let spec = hw_spec(1.0, 1.0, 0.0, 0.5).unwrap();
        let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(1e-2, 10.0, 3, 2)).unwrap();
        assert!(matches!(bar_residual(&ens, &spec, &Monomial::new(1, 0), 20.0), Err(Error::Diagnostic(_))));
        let thin = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(1e-2, 10.0, 3, 2).thinned(5)).unwrap();
        assert!(matches!(bar_residual(&thin, &spec, &Monomial::new(1, 0), 1.0), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn first_moments_balance() {
        let spec = hw_spec(1.0, 1.0, 0.0, 0.5).unwrap();
        let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(2e-3, 60.0, 8, 5)).unwrap();
        for f in [Monomial::new(1, 0), Monomial::new(0, 1)] {
            let r = bar_residual(&ens, &spec, &f, 10.0).unwrap();
            assert!(r.z_score.abs() < 4.0, "{f:?}: {r:?}");
        }
    }
}
