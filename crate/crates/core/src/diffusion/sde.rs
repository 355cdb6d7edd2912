use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::OUSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Keep one state out of every `record_every` steps.
    pub record_every: usize,
}

impl SdeConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Self {
        SdeConfig { dt, horizon, n_paths, seed, record_every: 1 }
    }

    pub fn thinned(self, record_every: usize) -> Self {
        SdeConfig { record_every, ..self }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One simulated path: recorded states and the cumulative regulator at the
/// same instants. Unused coordinates of a 1-D spec stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SdePath {
    pub states: Vec<[f64; 2]>,
    pub regulator: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeEnsemble {
    pub dim: usize,
    pub dt: f64,
    /// Time between consecutive recorded states.
    pub record_dt: f64,
    pub seed: u64,
    pub paths: Vec<SdePath>,
}

impl SdeEnsemble {
    /// Index of the first record at or after `burn_in`.
    pub fn first_after(&self, burn_in: f64) -> usize {
        (burn_in / self.record_dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn horizon(&self) -> f64 {
        self.paths.first().map_or(0.0, |p| (p.states.len() - 1) as f64 * self.record_dt)
    }

    /// Values of one coordinate from every path after `burn_in`.
    pub fn samples(&self, coord: usize, burn_in: f64) -> Vec<f64> {
        let start = self.first_after(burn_in);
        self.paths.iter().flat_map(|p| p.states.iter().skip(start).map(move |x| x[coord])).collect()
    }

    /// Pooled mean vector and covariance matrix after `burn_in`.
    pub fn moments(&self, burn_in: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let start = self.first_after(burn_in);
        let mut n = 0.0;
        let mut s = [0.0; 2];
        let mut ss = [[0.0; 2]; 2];
        for x in self.paths.iter().flat_map(|p| p.states.iter().skip(start)) {
            n += 1.0;
            for i in 0..2 {
                s[i] += x[i];
                for j in 0..2 {
                    ss[i][j] += x[i] * x[j];
                }
            }
        }
        let mean = [s[0] / n, s[1] / n];
        let mut cov = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] = ss[i][j] / n - mean[i] * mean[j];
            }
        }
        (mean, cov)
    }
}

/// Euler–Maruyama with projection onto the barrier. Path `i` draws from a
/// ChaCha8 stream seeded by `seed` with stream number `i`, so results do not
/// depend on thread scheduling.
pub fn simulate_ou(spec: &OUSpec, x0: [f64; 2], config: &SdeConfig) -> Result<SdeEnsemble> {
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(Error::domain(format!("step must be positive, got {}", config.dt)));
    }
    if !(config.horizon >= config.dt) {
        return Err(Error::domain("horizon must cover at least one step"));
    }
    if config.n_paths == 0 || config.record_every == 0 {
        return Err(Error::domain("need at least one path and a positive record interval"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial point must be finite"));
    }
    if let Some(r) = &spec.reflection {
        if !r.admits(&x0) {
            return Err(Error::domain(format!(
                "initial point {x0:?} violates the barrier at {} on coordinate {}",
                r.level, r.coord
            )));
        }
    }
    let mut x0 = x0;
    for v in x0.iter_mut().skip(spec.dim) {
        *v = 0.0;
    }
    let paths = (0..config.n_paths).into_par_iter().map(|i| simulate_path(spec, x0, config, i as u64)).collect();
    Ok(SdeEnsemble {
        dim: spec.dim,
        dt: config.dt,
        record_dt: config.dt * config.record_every as f64,
        seed: config.seed,
        paths,
    })
}

fn simulate_path(spec: &OUSpec, x0: [f64; 2], config: &SdeConfig, stream: u64) -> SdePath {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let steps = config.steps();
    let capacity = steps / config.record_every + 1;
    let mut states = Vec::with_capacity(capacity);
    let mut regulator = Vec::with_capacity(capacity);
    let l = spec.noise_factor();
    let sqrt_dt = config.dt.sqrt();
    let push = spec.reflection.map(|r| (r, r.unit_push()));
    let (mut x, mut y) = (x0, 0.0);
    states.push(x);
    regulator.push(y);
    for step in 1..=steps {
        let b = spec.drift_at(&x);
        let e1: f64 = rng.sample(StandardNormal);
        if spec.dim == 2 {
            let e2: f64 = rng.sample(StandardNormal);
            x[0] += b[0] * config.dt + l[0][0] * sqrt_dt * e1;
            x[1] += b[1] * config.dt + (l[1][0] * e1 + l[1][1] * e2) * sqrt_dt;
        } else {
            x[0] += b[0] * config.dt + l[0][0] * sqrt_dt * e1;
        }
        if let Some((r, u)) = &push {
            let d = r.overshoot(&x);
            if d > 0.0 {
                x[0] += d * u[0];
                x[1] += d * u[1];
                x[r.coord] = r.level;
                y += d;
            }
        }
        if step % config.record_every == 0 {
            states.push(x);
            regulator.push(y);
        }
    }
    SdePath { states, regulator }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{heavy_traffic_spec, hw_spec, PiecewiseLinear, Side};

    #[test]
    fn zero_noise_follows_the_ode() {
        let spec = OUSpec::new(vec![PiecewiseLinear::linear(-1.0, 0.0)], vec![0.0], 0.0, None).unwrap();
        let dt = 1e-3;
        let ens = simulate_ou(&spec, [1.0, 0.0], &SdeConfig::new(dt, 2.0, 1, 0)).unwrap();
        for (i, x) in ens.paths[0].states.iter().enumerate() {
            let t = i as f64 * dt;
            assert!((x[0] - (-t).exp()).abs() < dt);
        }
    }

    #[test]
    fn reflection_and_regulator() {
        let spec = hw_spec(1.0, 1.0, 0.0, 0.5).unwrap();
        let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(1e-2, 50.0, 4, 7)).unwrap();
        let mut pushes = 0;
        for p in &ens.paths {
            assert!(p.states.iter().all(|x| x[1] <= 0.5));
            for w in 0..p.states.len() - 1 {
                let dy = p.regulator[w + 1] - p.regulator[w];
                assert!(dy >= 0.0);
                if dy > 0.0 {
                    pushes += 1;
                    assert_eq!(p.states[w + 1][1], 0.5);
                }
            }
        }
        assert!(pushes > 0);
        assert!(simulate_ou(&spec, [0.0, 0.6], &SdeConfig::new(1e-2, 1.0, 1, 0)).is_err());
    }

    #[test]
    fn lower_barrier_keeps_z_nonnegative() {
        let spec = heavy_traffic_spec(1.0, 1.0, 0.5).unwrap();
        assert_eq!(spec.reflection.unwrap().side, Side::Lower);
        let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(1e-2, 20.0, 4, 1)).unwrap();
        assert!(ens.paths.iter().all(|p| p.states.iter().all(|x| x[0] >= 0.0)));
        assert!(ens.paths.iter().all(|p| *p.regulator.last().unwrap() > 0.0));
    }

    #[test]
    fn deterministic_and_thinned() {
        let spec = hw_spec(1.0, 2.0, 0.1, 1.0).unwrap();
        let cfg = SdeConfig::new(1e-2, 5.0, 3, 11);
        let a = simulate_ou(&spec, [0.0, 0.0], &cfg).unwrap();
        let b = simulate_ou(&spec, [0.0, 0.0], &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_ou(&spec, [0.0, 0.0], &cfg.thinned(10)).unwrap();
        assert_eq!(c.paths[1].states.len(), 51);
        assert_eq!(c.paths[1].states[5], a.paths[1].states[50]);
        assert!((c.horizon() - 5.0).abs() < 1e-12);
        assert_eq!(c.first_after(1.0), 10);
    }

    #[test]
    fn config_errors() {
        let spec = hw_spec(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(simulate_ou(&spec, [0.0; 2], &SdeConfig::new(0.0, 1.0, 1, 0)).is_err());
        assert!(simulate_ou(&spec, [0.0; 2], &SdeConfig::new(0.1, 1.0, 0, 0)).is_err());
    }
}
