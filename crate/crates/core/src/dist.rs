//! Probability vectors over the state space and the performance metrics
//! derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{state_count, state_index, State};

/// Stationary law over `{(q, z): 0 <= z <= q <= k}` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    k: u32,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn from_probs(k: u32, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != state_count(k) {
            return Err(Error::domain(format!(
                "expected {} probabilities for K={k}, got {}",
                state_count(k),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= -1e-14)) {
            return Err(Error::domain("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(JointDist { k, probs })
    }

    /// All mass on the empty state.
    pub fn point_mass_empty(k: u32) -> Self {
        let mut probs = vec![0.0; state_count(k)];
        probs[0] = 1.0;
        JointDist { k, probs }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, q: u32, z: u32) -> f64 {
        if z > q || q > self.k {
            0.0
        } else {
            self.probs[state_index(q, z)]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, f64)> + '_ {
        (0..=self.k).flat_map(|q| (0..=q).map(move |z| State { q, z })).zip(self.probs.iter().copied())
    }

    /// Law of `q` alone.
    pub fn q_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k as usize + 1];
        for (s, p) in self.iter() {
            out[s.q as usize] += p;
        }
        out
    }

    /// Law of `z` alone.
    pub fn z_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k as usize + 1];
        for (s, p) in self.iter() {
            out[s.z as usize] += p;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &JointDist) -> f64 {
        assert_eq!(self.k, other.k, "distributions over different state spaces");
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Distribution of a single count over `0..=limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDist {
    pub probs: Vec<f64>,
    /// Upper bound on the mass discarded by truncation before
    /// renormalisation (zero when nothing was truncated).
    pub tail_bound: f64,
}

impl MarginalDist {
    pub fn limit(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| i as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Stationary expectations and probabilities.
///
/// `p_success` is `None` when the lot is empty with probability one, since
/// the fraction of fully charged departures is then undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub e_q: f64,
    pub e_z: f64,
    pub e_c: f64,
    pub p_success: Option<f64>,
    pub p_block: f64,
}

impl Metrics {
    pub fn from_moments(e_q: f64, e_z: f64, p_block: f64) -> Self {
        Metrics { e_q, e_z, e_c: e_q - e_z, p_success: success_from_means(e_q, e_z), p_block }
    }
}

/// `1 - E[Z]/E[Q]`, undefined for an empty system.
pub fn success_from_means(e_q: f64, e_z: f64) -> Option<f64> {
    (e_q > 0.0).then(|| 1.0 - e_z / e_q)
}
