//! Deterministic fluid model `z' = a - nu z - mu min(z, M)` for the scaled
//! uncharged count, with admitted arrival rate `a`.
//!
//! The right-hand side is linear on each side of `M`, so trajectories are
//! pieced together from two exponential branches:
//!
//! * `z <= M`: relax at rate `nu + mu` towards `a / (nu + mu)`,
//! * `z > M`:  relax at rate `nu` towards `(a - mu M) / nu`.
//!
//! Exactly one of these targets lies in its own region (they coincide at
//! `M` on the boundary), which is the unique fixed point, so a trajectory
//! switches branch at most once.

use serde::{Deserialize, Serialize};

use crate::closed_form::erlang_b;
use crate::error::{Error, Result};
use crate::params::{ModelParams, Spaces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowM,
    AboveM,
    /// `a / (nu + mu) = M` exactly; handled by the `BelowM` branch.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidResult {
    pub z_star: f64,
    pub regime: Regime,
    /// Admitted arrival rate the fixed point was computed with.
    pub arrival_rate: f64,
    pub trajectory: Option<Vec<(f64, f64)>>,
}

/// The fluid ODE for a given admitted arrival rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidModel {
    pub arrival: f64,
    pub mu: f64,
    pub nu: f64,
    pub m: f64,
    /// Upper end of the state space; `inf` for an unbounded lot.
    pub k: f64,
}

impl FluidModel {
    /// Admitted rate `lambda ∧ nu K`.
    pub fn original(params: &ModelParams) -> Self {
        let arrival = match params.k {
            Spaces::Finite(k) => params.lambda.min(params.nu * k as f64),
            Spaces::Infinite => params.lambda,
        };
        Self::with_arrival(params, arrival)
    }

    /// Admitted rate `lambda (1 - B(lambda/nu, K))` of the loss system.
    pub fn modified(params: &ModelParams) -> Result<Self> {
        let k = params.finite_k("the modified fluid model")?;
        let arrival = params.lambda * (1.0 - erlang_b(params.offered_load(), k)?);
        Ok(Self::with_arrival(params, arrival))
    }

    pub fn with_arrival(params: &ModelParams, arrival: f64) -> Self {
        FluidModel { arrival, mu: params.mu, nu: params.nu, m: params.m, k: params.k.as_f64() }
    }

    pub fn drift(&self, z: f64) -> f64 {
        self.arrival - self.nu * z - self.mu * z.min(self.m)
    }

    pub fn fixed_point(&self) -> FluidResult {
        let below = self.arrival / (self.nu + self.mu);
        let (z_star, regime) = if below < self.m {
            (below, Regime::BelowM)
        } else if below == self.m {
            (below, Regime::Boundary)
        } else {
            ((self.arrival - self.mu * self.m) / self.nu, Regime::AboveM)
        };
        FluidResult { z_star, regime, arrival_rate: self.arrival, trajectory: None }
    }

    /// `|z - a E[min(D, B max(1, z/M))]|` with `D ~ Exp(nu)`, `B ~ Exp(mu)`,
    /// using `E[min(D, c B)] = 1 / (nu + mu / c)`.
    pub fn fixed_point_residual(&self, z: f64) -> f64 {
        let stretch = (z / self.m).max(1.0);
        (z - self.arrival / (self.nu + self.mu / stretch)).abs()
    }

    /// Exact solution sampled on `times` (need not be sorted).
    pub fn trajectory(&self, z0: f64, times: &[f64]) -> Result<Vec<f64>> {
        if !(z0 >= 0.0 && z0 <= self.k) {
            return Err(Error::domain(format!("initial mass {z0} outside [0, {}]", self.k)));
        }
        if times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::domain("trajectory times must be nonnegative"));
        }
        let (rate_lo, target_lo) = (self.nu + self.mu, self.arrival / (self.nu + self.mu));
        let (rate_hi, target_hi) = (self.nu, (self.arrival - self.mu * self.m) / self.nu);
        let low_side = |z: f64| z < self.m || (z == self.m && self.drift(z) <= 0.0);
        let (r0, t0) = if low_side(z0) { (rate_lo, target_lo) } else { (rate_hi, target_hi) };
        let (r1, t1) = if low_side(z0) { (rate_hi, target_hi) } else { (rate_lo, target_lo) };
        // time at which the first branch reaches M, if its target is across M
        let crossing = {
            let crosses = if low_side(z0) { t0 > self.m } else { t0 < self.m };
            if crosses && z0 != self.m {
                Some(((z0 - t0) / (self.m - t0)).ln() / r0)
            } else if crosses {
                Some(0.0)
            } else {
                None
            }
        };
        Ok(times
            .iter()
            .map(|&t| match crossing {
                Some(tc) if t > tc => t1 + (self.m - t1) * (-r1 * (t - tc)).exp(),
                _ => t0 + (z0 - t0) * (-r0 * t).exp(),
            })
            .collect())
    }

    /// Classical RK4 on a fixed step, for cross-checking [`Self::trajectory`].
    pub fn trajectory_rk4(&self, z0: f64, times: &[f64], step: f64) -> Result<Vec<f64>> {
        if !(z0 >= 0.0 && z0 <= self.k) {
            return Err(Error::domain(format!("initial mass {z0} outside [0, {}]", self.k)));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut out = vec![0.0; times.len()];
        let (mut t, mut z) = (0.0, z0);
        for i in order {
            while t < times[i] {
                let h = step.min(times[i] - t);
                let k1 = self.drift(z);
                let k2 = self.drift(z + 0.5 * h * k1);
                let k3 = self.drift(z + 0.5 * h * k2);
                let k4 = self.drift(z + h * k3);
                z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += h;
            }
            out[i] = z;
        }
        Ok(out)
    }
}

pub fn fluid_fixed_point(params: &ModelParams) -> Result<FluidResult> {
    Ok(FluidModel::original(&params.validate()?).fixed_point())
}

pub fn modified_fluid_fixed_point(params: &ModelParams) -> Result<FluidResult> {
    Ok(FluidModel::modified(&params.validate()?)?.fixed_point())
}

/// Sampled trajectory of the original fluid model.
pub fn fluid_trajectory(params: &ModelParams, z0: f64, times: &[f64]) -> Result<Vec<f64>> {
    FluidModel::original(&params.validate()?).trajectory(z0, times)
}

/// Fluid success probability: `mu/(nu+mu)` below `M`, `mu M / a` above.
pub fn fluid_success_prob(result: &FluidResult, params: &ModelParams) -> Result<f64> {
    match result.regime {
        Regime::BelowM | Regime::Boundary => Ok(params.mu / (params.nu + params.mu)),
        Regime::AboveM => {
            if !(result.arrival_rate > 0.0) {
                return Err(Error::domain("fluid success probability needs a positive arrival rate"));
            }
            Ok(params.mu * params.m / result.arrival_rate)
        }
    }
}

/// Fluid point of the always-full lot: the root of
/// `mu min(z, M) = nu (K - z)`.
pub fn full_lot_fluid(params: &ModelParams) -> Result<f64> {
    let params = params.validate()?;
    let k = params.finite_k("the full-lot fluid point")? as f64;
    let below = params.nu * k / (params.nu + params.mu);
    Ok(if below <= params.m { below } else { (params.nu * k - params.mu * params.m) / params.nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lambda: f64, k: u32, m: f64) -> ModelParams {
        ModelParams::new(lambda, 1.0, 1.0, k, m).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let r = fluid_fixed_point(&p(8.0, 10, 5.0)).unwrap();
        assert_eq!(r.z_star, 4.0);
        assert_eq!(r.regime, Regime::BelowM);
        let r = fluid_fixed_point(&p(12.0, 10, 2.0)).unwrap();
        assert_eq!(r.z_star, 8.0);
        assert_eq!(r.regime, Regime::AboveM);
        assert_eq!(r.arrival_rate, 10.0);
        assert_eq!(fluid_success_prob(&r, &p(12.0, 10, 2.0)).unwrap(), 0.2);
    }

    #[test]
    fn full_power_is_never_above() {
        for lambda in [1.0, 10.0, 100.0] {
            let r = fluid_fixed_point(&p(lambda, 10, 10.0)).unwrap();
            assert_ne!(r.regime, Regime::AboveM);
        }
    }

    #[test]
    fn boundary_regime_and_continuity() {
        // a/(nu+mu) = 10/2 = 5 = M
        let params = p(10.0, 10, 5.0);
        let r = fluid_fixed_point(&params).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        let above = FluidResult { regime: Regime::AboveM, ..r.clone() };
        assert!(
            (fluid_success_prob(&r, &params).unwrap() - fluid_success_prob(&above, &params).unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn success_below_m_is_race() {
        let r = fluid_fixed_point(&p(6.0, 10, 8.0)).unwrap();
        assert_eq!(fluid_success_prob(&r, &p(6.0, 10, 8.0)).unwrap(), 0.5);
    }

    #[test]
    fn modified_uses_loss_throughput() {
        let params = p(10.0, 10, 10.0);
        let r = modified_fluid_fixed_point(&params).unwrap();
        let b = erlang_b(10.0, 10).unwrap();
        assert!((r.arrival_rate - 10.0 * (1.0 - b)).abs() < 1e-15);
        // large lots recover the unmodified point
        let big = ModelParams::new(8.0, 1.0, 1.0, 200, 5.0).unwrap();
        let a = fluid_fixed_point(&big).unwrap().z_star;
        let b = modified_fluid_fixed_point(&big).unwrap().z_star;
        assert!((a - b).abs() < 1e-12);
        assert!(modified_fluid_fixed_point(&big.with_unbounded_spaces()).is_err());
    }

    #[test]
    fn full_lot_points() {
        assert_eq!(full_lot_fluid(&p(1.0, 10, 5.0)).unwrap(), 5.0);
        assert_eq!(full_lot_fluid(&p(1.0, 10, 2.0)).unwrap(), 8.0);
        for m in [1.0, 2.5, 6.0, 10.0] {
            let params = ModelParams::new(1.0, 1.3, 0.4, 10, m).unwrap();
            let z = full_lot_fluid(&params).unwrap();
            assert!((1.3 * z.min(m) - 0.4 * (10.0 - z)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_branch_closed_form() {
        let params = p(8.0, 10, 5.0);
        let ts = [0.0, 0.25, 1.0, 3.0];
        let z = fluid_trajectory(&params, 0.0, &ts).unwrap();
        for (t, zt) in ts.iter().zip(z) {
            assert!((zt - 4.0 * (1.0 - (-2.0 * t).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_is_invariant() {
        let params = p(12.0, 10, 2.0);
        let model = FluidModel::original(&params);
        let zs = model.fixed_point().z_star;
        let traj = model.trajectory(zs, &[0.0, 1.0, 10.0]).unwrap();
        assert!(traj.iter().all(|z| (z - zs).abs() < 1e-12));
        assert!(model.trajectory(11.0, &[1.0]).is_err());
        assert!(model.trajectory(-0.1, &[1.0]).is_err());
    }

    #[test]
    fn exact_branches_match_rk4() {
        for (lambda, m, z0) in [(8.0, 5.0, 0.0), (12.0, 2.0, 0.0), (12.0, 2.0, 10.0), (3.0, 1.0, 9.0), (10.0, 5.0, 5.0)]
        {
            let model = FluidModel::original(&p(lambda, 10, m));
            let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.4).collect();
            let a = model.trajectory(z0, &ts).unwrap();
            let b = model.trajectory_rk4(z0, &ts, 1e-3).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-6, "lambda={lambda} m={m} z0={z0}: {x} vs {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn fixed_point_residual_vanishes(lambda in 0.01f64..50.0, mu in 0.1f64..5.0, nu in 0.1f64..5.0,
                                         k in 1u32..60, frac in 0.01f64..1.0) {
            let m = (frac * k as f64).max(0.01);
            let params = ModelParams::new(lambda, mu, nu, k, m).unwrap();
            for model in [FluidModel::original(&params), FluidModel::modified(&params).unwrap()] {
                let r = model.fixed_point();
                prop_assert!(model.fixed_point_residual(r.z_star) <= 1e-12 * (1.0 + r.z_star));
                prop_assert!(r.z_star >= 0.0 && r.z_star <= k as f64 + 1e-12);
            }
        }

        #[test]
        fn trajectory_stays_in_lot_and_converges(z0f in 0.0f64..1.0, lambda in 0.1f64..30.0, frac in 0.05f64..1.0) {
            let k = 10u32;
            let params = ModelParams::new(lambda, 1.0, 1.0, k, frac * k as f64).unwrap();
            let model = FluidModel::original(&params);
            let zs = model.fixed_point().z_star;
            let ts: Vec<f64> = (0..=50).map(|i| i as f64).collect();
            let z = model.trajectory(z0f * k as f64, &ts).unwrap();
            prop_assert!(z.iter().all(|v| *v >= -1e-12 && *v <= k as f64 + 1e-12));
            prop_assert!((z[50] - zs).abs() < 1e-8);
        }
    }
}
