use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Centres of the small-`nu` limit and the stationary covariance of the
/// unscaled fluctuations `(Z - (lambda - mu M)/nu, Q - lambda/nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallNuApprox {
    pub e_z: f64,
    pub e_q: f64,
    pub sigma: [[f64; 2]; 2],
}

impl SmallNuApprox {
    pub fn is_positive_definite(&self) -> bool {
        let s = self.sigma;
        s[0][0] > 0.0 && s[0][0] * s[1][1] - s[0][1] * s[1][0] > 0.0
    }
}

/// Requires `lambda > mu M`; meant for small `nu` and `K > lambda/nu`.
pub fn smallnu_approx(params: &ModelParams) -> Result<SmallNuApprox> {
    let p = params.validate()?;
    let service = p.mu * p.m;
    if !(p.lambda > service) {
        return Err(Error::domain(format!(
            "small-nu approximation needs lambda > mu M, got {} <= {service}",
            p.lambda
        )));
    }
    let v = p.lambda / p.nu;
    let c = (2.0 * p.lambda - service) / (2.0 * p.nu);
    Ok(SmallNuApprox { e_z: (p.lambda - service) / p.nu, e_q: v, sigma: [[v, c], [c, v]] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centres() {
        let p = ModelParams::new(2.0, 1.0, 0.01, 300, 1.0).unwrap();
        let a = smallnu_approx(&p).unwrap();
        assert!((a.e_z - 100.0).abs() < 1e-9);
        assert!((a.e_q - 200.0).abs() < 1e-9);
        assert!((a.sigma[0][1] - 150.0).abs() < 1e-9);
        assert!(smallnu_approx(&p.with_lambda(1.0)).is_err());
    }

    proptest! {
        #[test]
        fn sigma_positive_definite(service in 0.01f64..10.0, excess in 1e-6f64..10.0, nu in 1e-4f64..1.0) {
            let lambda = service + excess;
            let p = ModelParams::unbounded(lambda, 1.0, nu, service).unwrap();
            let a = smallnu_approx(&p).unwrap();
            prop_assert_eq!(a.sigma[0][1], a.sigma[1][0]);
            prop_assert!(a.is_positive_definite());
        }
    }
}
