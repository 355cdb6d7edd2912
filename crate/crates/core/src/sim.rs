//! Event-driven simulation of the charging station and of its scaled
//! families.
//!
//! Replication `i` draws from a ChaCha8 stream seeded with the master seed
//! and stream number `i`, so estimates are reproducible and independent of
//! thread scheduling.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::diffusion::{overloaded_density, std_cdf, std_pdf};
use crate::error::{Error, Result, ValidationError};
use crate::fluid::FluidModel;
use crate::params::{ModelParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    #[default]
    FullModel,
    /// Always-full lot: only `z` moves, up at `nu (K - z)` and down at
    /// `mu min(z, M)`.
    FullLot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub burn_in: f64,
    pub n_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: SimMode,
    /// Starting state; empty lot when absent. In full-lot mode only `z`
    /// is used.
    #[serde(default)]
    pub initial: Option<State>,
}

impl SimConfig {
    pub fn new(horizon: f64, burn_in: f64, n_reps: usize, seed: u64) -> Self {
        SimConfig { horizon, burn_in, n_reps, seed, mode: SimMode::FullModel, initial: None }
    }

    pub fn full_lot(self) -> Self {
        SimConfig { mode: SimMode::FullLot, ..self }
    }

    pub fn starting_at(self, state: State) -> Self {
        SimConfig { initial: Some(state), ..self }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(ValidationError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.horizon) {
            return Err(ValidationError::Config(format!("burn-in {} must lie in [0, horizon)", self.burn_in)));
        }
        if self.n_reps == 0 {
            return Err(ValidationError::Config("need at least one replication".into()));
        }
        Ok(())
    }
}

/// Estimates from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replication {
    pub e_q: f64,
    pub e_z: f64,
    pub p_success: Option<f64>,
    pub p_block: f64,
    pub second_moments: [f64; 3],
    pub departures: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HalfWidths {
    pub e_q: f64,
    pub e_z: f64,
    pub p_success: f64,
    pub p_block: f64,
}

/// Replication means with 95% Student-t half-widths. The half-widths are
/// infinite with a single replication. `var_*` and `cov_zq` are pooled
/// time-average moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub e_q: f64,
    pub e_z: f64,
    pub p_success: Option<f64>,
    pub p_block: f64,
    pub half_widths: HalfWidths,
    pub var_q: f64,
    pub var_z: f64,
    pub cov_zq: f64,
    pub reps_used: usize,
}

impl SimEstimate {
    fn from_reps(reps: &[Replication]) -> Self {
        let (e_q, hw_q) = mean_and_half_width(reps.iter().map(|r| r.e_q));
        let (e_z, hw_z) = mean_and_half_width(reps.iter().map(|r| r.e_z));
        let (p_block, hw_b) = mean_and_half_width(reps.iter().map(|r| r.p_block));
        let succ: Vec<f64> = reps.iter().filter_map(|r| r.p_success).collect();
        let (p_success, hw_s) = if succ.is_empty() {
            (None, f64::INFINITY)
        } else {
            let (m, h) = mean_and_half_width(succ.iter().copied());
            (Some(m), h)
        };
        let n = reps.len() as f64;
        let mom = |i: usize| reps.iter().map(|r| r.second_moments[i]).sum::<f64>() / n;
        SimEstimate {
            e_q,
            e_z,
            p_success,
            p_block,
            half_widths: HalfWidths { e_q: hw_q, e_z: hw_z, p_success: hw_s, p_block: hw_b },
            var_q: mom(0) - e_q * e_q,
            var_z: mom(1) - e_z * e_z,
            cov_zq: mom(2) - e_z * e_q,
            reps_used: reps.len(),
        }
    }
}

fn mean_and_half_width(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.collect();
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Time-weighted accumulator over `[burn_in, horizon]`.
#[derive(Default)]
struct Averages {
    q: f64,
    z: f64,
    full: f64,
    qq: f64,
    zz: f64,
    zq: f64,
}

impl Averages {
    fn add(&mut self, w: f64, q: f64, z: f64, full: bool) {
        self.q += w * q;
        self.z += w * z;
        self.qq += w * q * q;
        self.zz += w * z * z;
        self.zq += w * z * q;
        if full {
            self.full += w;
        }
    }
}

struct Chain {
    lambda: f64,
    mu: f64,
    nu: f64,
    k: u32,
    m: f64,
    mode: SimMode,
}

impl Chain {
    fn new(params: &ModelParams, mode: SimMode) -> Result<Self> {
        let k = params.finite_k("simulation")?;
        Ok(Chain { lambda: params.lambda, mu: params.mu, nu: params.nu, k, m: params.m, mode })
    }

    fn start(&self, initial: Option<State>) -> Result<State> {
        let s = initial.unwrap_or(State { q: 0, z: 0 });
        let s = match self.mode {
            SimMode::FullModel => s,
            SimMode::FullLot => State { q: self.k, z: s.z },
        };
        if s.z > s.q || s.q > self.k {
            return Err(Error::domain(format!("initial state {s:?} outside the lot")));
        }
        Ok(s)
    }

    /// Advances one event. Returns the holding time, or `None` when no
    /// event can happen. `departed` records whether a leaving car was charged.
    fn step(&self, s: &mut State, rng: &mut ChaCha8Rng, departed: &mut Option<bool>) -> Option<f64> {
        *departed = None;
        let charge = self.mu * (s.z as f64).min(self.m);
        match self.mode {
            SimMode::FullModel => {
                let arrive = if s.q < self.k { self.lambda } else { 0.0 };
                let depart = self.nu * s.q as f64;
                let total = arrive + depart + charge;
                if total == 0.0 {
                    return None;
                }
                let hold = rng.sample::<f64, _>(Exp1) / total;
                let u = rng.random::<f64>() * total;
                if u < arrive {
                    s.q += 1;
                    s.z += 1;
                } else if u < arrive + depart {
                    let uncharged = rng.random::<f64>() * (s.q as f64) < s.z as f64;
                    s.q -= 1;
                    if uncharged {
                        s.z -= 1;
                    }
                    *departed = Some(!uncharged);
                } else {
                    s.z -= 1;
                }
                debug_assert!(s.z <= s.q && s.q <= self.k);
                Some(hold)
            }
            SimMode::FullLot => {
                let up = self.nu * (self.k - s.z) as f64;
                let total = up + charge;
                if total == 0.0 {
                    return None;
                }
                let hold = rng.sample::<f64, _>(Exp1) / total;
                if rng.random::<f64>() * total < up {
                    s.z += 1;
                } else {
                    s.z -= 1;
                }
                debug_assert!(s.z <= self.k);
                Some(hold)
            }
        }
    }

    fn replicate(&self, config: &SimConfig, stream: u64) -> Result<Replication> {
        let mut rng = rng_for(config.seed, stream);
        let mut s = self.start(config.initial)?;
        let mut acc = Averages::default();
        let (mut t, mut departures, mut successes) = (0.0, 0u64, 0u64);
        let mut departed = None;
        loop {
            let before = s;
            let hold = self.step(&mut s, &mut rng, &mut departed);
            let next = hold.map_or(config.horizon, |h| (t + h).min(config.horizon));
            let w = next - t.max(config.burn_in);
            if w > 0.0 {
                acc.add(w, before.q as f64, before.z as f64, before.q == self.k);
            }
            if hold.is_none() || t + hold.unwrap() >= config.horizon {
                break;
            }
            t = next;
            if t >= config.burn_in {
                if let Some(charged) = departed {
                    departures += 1;
                    successes += charged as u64;
                }
            }
        }
        let span = config.horizon - config.burn_in;
        let (e_q, e_z) = (acc.q / span, acc.z / span);
        let p_success = match self.mode {
            SimMode::FullModel => (departures > 0).then(|| successes as f64 / departures as f64),
            SimMode::FullLot => Some(1.0 - e_z / self.k as f64),
        };
        Ok(Replication {
            e_q,
            e_z,
            p_success,
            p_block: acc.full / span,
            second_moments: [acc.qq / span, acc.zz / span, acc.zq / span],
            departures,
        })
    }

    /// `z` observed at each of the sorted `times`.
    fn sample_z(&self, initial: State, times: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut departed = None;
        let (mut s, mut next) = (initial, initial);
        let mut event_at = self.step(&mut next, rng, &mut departed).unwrap_or(f64::INFINITY);
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            while event_at <= target {
                s = next;
                event_at += self.step(&mut next, rng, &mut departed).unwrap_or(f64::INFINITY);
            }
            out.push(s.z as f64);
        }
        out
    }
}

fn run_reps(params: &ModelParams, config: &SimConfig) -> Result<Vec<Replication>> {
    let params = params.validate()?;
    config.validate()?;
    let chain = Chain::new(&params, config.mode)?;
    chain.start(config.initial)?;
    (0..config.n_reps as u64).into_par_iter().map(|i| chain.replicate(config, i)).collect()
}

/// Simulates the full model (or the full lot, per `config.mode`).
pub fn simulate_model(params: &ModelParams, config: &SimConfig) -> Result<SimEstimate> {
    Ok(SimEstimate::from_reps(&run_reps(params, config)?))
}

/// Simulates the always-full lot regardless of `config.mode`.
pub fn simulate_full_lot(params: &ModelParams, config: &SimConfig) -> Result<SimEstimate> {
    simulate_model(params, &config.full_lot())
}

/// Per-replication estimates, for callers that want their own statistics.
pub fn simulate_replications(params: &ModelParams, config: &SimConfig) -> Result<Vec<Replication>> {
    run_reps(params, config)
}

/// Scaled family used by [`convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    /// `lambda n, K n, M n`; lot full at time 0 with `n z0` uncharged cars.
    /// Compares the replication mean of `Z^n(t)/n` with the fluid path.
    Fluid { z0: f64, t_grid: Vec<f64> },
    /// `lambda^n = n(nu+mu)`, `M^n = n + beta sqrt(n)`,
    /// `K^n = n(nu+mu)/nu + kappa sqrt(n)`. Compares the stationary
    /// variance of `(Q - lambda^n/nu)/sqrt(n)` with that of a normal
    /// `N(0, (nu+mu)/nu)` truncated at `kappa`. Uses only `nu` and `mu`
    /// from the base parameters.
    HalfinWhitt { beta: f64, kappa: f64 },
    /// `lambda n, K n, M^n = nu K n/(nu+mu) + beta sqrt(n)` with
    /// `lambda > nu K`. Compares the stationary mean of
    /// `(Z - nu K n/(nu+mu))/sqrt(n)` with the full-lot density mean.
    Overloaded { beta: f64 },
    /// `nu/n` with a lot large enough never to fill. Compares
    /// `nu^n Var(Z)` with its limit `lambda`.
    SmallNu,
}

impl FromStr for Scaling {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fluid" => Ok(Scaling::Fluid { z0: 0.0, t_grid: (1..=10).map(f64::from).collect() }),
            "hw" | "halfin-whitt" | "halfin_whitt" => Ok(Scaling::HalfinWhitt { beta: 0.0, kappa: 1.0 }),
            "overloaded" => Ok(Scaling::Overloaded { beta: 0.0 }),
            "smallnu" | "small-nu" | "small_nu" => Ok(Scaling::SmallNu),
            other => Err(ValidationError::Config(format!(
                "unknown scaling `{other}` (expected fluid, hw, overloaded or smallnu)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub statistic: f64,
    pub limit: f64,
    pub error: f64,
}

fn scaled_seed(seed: u64, n: u32) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn truncated_normal_variance(sd: f64, upper: f64) -> f64 {
    if upper == f64::INFINITY {
        return sd * sd;
    }
    let a = upper / sd;
    let ratio = std_pdf(a) / std_cdf(a);
    sd * sd * (1.0 - a * ratio - ratio * ratio)
}

/// Simulates the `n`-th system of `scaling` for each `n` and reports the
/// scaled statistic next to its limit. For the stationary regimes `config`
/// gives the horizon and burn-in in the time units of the scaled system.
pub fn convergence_experiment(
    base: &ModelParams,
    scaling: &Scaling,
    n_list: &[u32],
    config: &SimConfig,
) -> Result<Vec<ConvergenceRow>> {
    let base = base.validate()?;
    config.validate()?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ValidationError::Config("n list must be increasing positive integers".into()).into());
    }
    let (lambda, mu, nu, m) = (base.lambda, base.mu, base.nu, base.m);
    n_list
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let cfg = SimConfig { seed: scaled_seed(config.seed, n), mode: SimMode::FullModel, ..*config };
            match scaling {
                Scaling::Fluid { z0, t_grid } => {
                    let k = base.finite_k("the fluid scaling")?;
                    if !(*z0 >= 0.0 && *z0 <= k as f64) {
                        return Err(Error::domain(format!("z0 = {z0} outside [0, {k}]")));
                    }
                    let mut times = t_grid.clone();
                    times.sort_by(f64::total_cmp);
                    let limit = FluidModel::original(&base).trajectory(*z0, &times)?;
                    let scaled = ModelParams::new(lambda * nf, mu, nu, k * n, m * nf)?;
                    let chain = Chain::new(&scaled, SimMode::FullModel)?;
                    let kn = k * n;
                    let start = State { q: kn, z: ((z0 * nf).round() as u32).min(kn) };
                    let paths: Vec<Vec<f64>> = (0..cfg.n_reps as u64)
                        .into_par_iter()
                        .map(|i| chain.sample_z(start, &times, &mut rng_for(cfg.seed, i)))
                        .collect();
                    let reps = paths.len() as f64;
                    let (mut sup, mut arg) = (0.0, 0usize);
                    for (j, lim) in limit.iter().enumerate() {
                        let mean = paths.iter().map(|p| p[j]).sum::<f64>() / reps / nf;
                        if (mean - lim).abs() >= sup {
                            sup = (mean - lim).abs();
                            arg = j;
                        }
                    }
                    let stat = paths.iter().map(|p| p[arg]).sum::<f64>() / reps / nf;
                    Ok(ConvergenceRow { n, statistic: stat, limit: limit[arg], error: sup })
                }
                Scaling::HalfinWhitt { beta, kappa } => {
                    let lam = nf * (nu + mu);
                    let mn = nf + beta * nf.sqrt();
                    let kn = (lam / nu + kappa * nf.sqrt()).round();
                    if !(mn > 0.0 && kn >= 1.0 && mn <= kn) {
                        return Err(Error::domain(format!("n = {n} gives an infeasible system")));
                    }
                    let scaled = ModelParams::new(lam, mu, nu, kn as u32, mn)?;
                    let est = simulate_model(&scaled, &cfg)?;
                    let stat = est.var_q / nf;
                    let limit = truncated_normal_variance(((nu + mu) / nu).sqrt(), *kappa);
                    Ok(ConvergenceRow { n, statistic: stat, limit, error: (stat - limit).abs() })
                }
                Scaling::Overloaded { beta } => {
                    let k = base.finite_k("the overloaded scaling")? as f64;
                    if !(lambda > nu * k) {
                        return Err(Error::domain("the overloaded scaling needs lambda > nu K"));
                    }
                    let kn = k * nf;
                    let centre = nu * kn / (nu + mu);
                    let mn = centre + beta * nf.sqrt();
                    let scaled = ModelParams::new(lambda * nf, mu, nu, kn as u32, mn)?;
                    let est =
                        simulate_model(&scaled, &cfg.starting_at(State { q: kn as u32, z: centre.round() as u32 }))?;
                    let stat = (est.e_z - centre) / nf.sqrt();
                    let limit = overloaded_density(nu, mu, k, *beta)?.mean();
                    Ok(ConvergenceRow { n, statistic: stat, limit, error: (stat - limit).abs() })
                }
                Scaling::SmallNu => {
                    if !(lambda > mu * m) {
                        return Err(Error::domain("the small-nu scaling needs lambda > mu M"));
                    }
                    let nun = nu / nf;
                    let occupancy = lambda / nun;
                    let kn = (occupancy + 10.0 * occupancy.sqrt() + 10.0).ceil() as u32;
                    let scaled = ModelParams::new(lambda, mu, nun, kn, m)?;
                    let start = State { q: occupancy.round() as u32, z: ((lambda - mu * m) / nun).round() as u32 };
                    let est = simulate_model(&scaled, &cfg.starting_at(start))?;
                    let stat = est.var_z * nun;
                    Ok(ConvergenceRow { n, statistic: stat, limit: lambda, error: (stat - lambda).abs() })
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::dist_full_lot;
    use crate::exact::exact_metrics;

    fn covers(est: f64, hw: f64, truth: f64) -> bool {
        (est - truth).abs() <= hw
    }

    #[test]
    fn no_arrivals() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 5, 2.0).unwrap();
        let est = simulate_model(&p, &SimConfig::new(100.0, 10.0, 4, 1)).unwrap();
        assert_eq!((est.e_q, est.e_z, est.p_block), (0.0, 0.0, 0.0));
        assert_eq!(est.p_success, None);
    }

    #[test]
    fn three_state_chain() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1, 1.0).unwrap();
        let exact = exact_metrics(&p).unwrap();
        let est = simulate_model(&p, &SimConfig::new(2e4, 100.0, 20, 3)).unwrap();
        assert!(covers(est.e_q, 1.5 * est.half_widths.e_q, 0.5));
        assert!(covers(est.p_success.unwrap(), 1.5 * est.half_widths.p_success, 0.5));
        assert!(covers(est.e_z, 1.5 * est.half_widths.e_z, exact.e_z));
        assert!(covers(est.p_block, 1.5 * est.half_widths.p_block, exact.p_block));
    }

    #[test]
    fn enough_power_is_race() {
        let p = ModelParams::new(10.0, 1.0, 1.0, 10, 10.0).unwrap();
        let est = simulate_model(&p, &SimConfig::new(5e3, 50.0, 10, 9)).unwrap();
        assert!(covers(est.p_success.unwrap(), 1.5 * est.half_widths.p_success, 0.5));
    }

    #[test]
    fn full_lot_means() {
        for (m, seed) in [(10.0, 1), (2.0, 2)] {
            let p = ModelParams::new(1.0, 1.0, 1.0, 10, m).unwrap();
            let truth = dist_full_lot(&p).unwrap().mean();
            let est = simulate_full_lot(&p, &SimConfig::new(5e3, 50.0, 10, seed)).unwrap();
            assert!((est.e_q - 10.0).abs() < 1e-12);
            assert!(covers(est.e_z, 1.5 * est.half_widths.e_z, truth), "{m}: {} vs {truth}", est.e_z);
            assert!(est.e_z >= 0.0 && est.e_z <= 10.0);
        }
    }

    #[test]
    fn deterministic() {
        let p = ModelParams::new(3.0, 1.0, 0.5, 6, 2.5).unwrap();
        let cfg = SimConfig::new(500.0, 10.0, 5, 42);
        let a = simulate_model(&p, &cfg).unwrap();
        let b = simulate_model(&p, &cfg).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = simulate_model(&p, &SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.e_z, c.e_z);
    }

    #[test]
    fn config_validation() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 2, 1.0).unwrap();
        assert!(simulate_model(&p, &SimConfig::new(10.0, 10.0, 1, 0)).unwrap_err().is_validation());
        assert!(simulate_model(&p, &SimConfig::new(10.0, 1.0, 0, 0)).unwrap_err().is_validation());
        assert!(simulate_model(&p.with_unbounded_spaces(), &SimConfig::new(10.0, 1.0, 1, 0)).is_err());
        let bad = SimConfig::new(10.0, 1.0, 1, 0).starting_at(State { q: 3, z: 0 });
        assert!(simulate_model(&p, &bad).is_err());
    }

    #[test]
    fn scaling_tags() {
        assert!(matches!("fluid".parse::<Scaling>(), Ok(Scaling::Fluid { .. })));
        assert!(matches!("HW".parse::<Scaling>(), Ok(Scaling::HalfinWhitt { .. })));
        assert_eq!("smallnu".parse::<Scaling>(), Ok(Scaling::SmallNu));
        assert!(matches!("bogus".parse::<Scaling>(), Err(ValidationError::Config(_))));
    }

    #[test]
    fn truncated_variance() {
        assert_eq!(truncated_normal_variance(2.0, f64::INFINITY), 4.0);
        // half-normal
        let v = truncated_normal_variance(1.0, 0.0);
        assert!((v - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn fluid_scaling_converges() {
        let p = ModelParams::new(8.0, 1.0, 1.0, 10, 5.0).unwrap();
        let scaling = Scaling::Fluid { z0: 0.0, t_grid: (1..=10).map(|i| i as f64 * 0.5).collect() };
        let rows = convergence_experiment(&p, &scaling, &[10, 100], &SimConfig::new(10.0, 0.0, 200, 5)).unwrap();
        assert!(rows[1].error < rows[0].error, "{rows:?}");
        assert!(rows[1].error < 0.05);
    }
}
