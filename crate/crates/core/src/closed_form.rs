//! Exactly solvable special cases and the success-probability bounds built
//! from them.
//!
//! * Enough power (`M = K`): the joint law is Erlang-loss occupancy with a
//!   binomial split into charged/uncharged cars.
//! * Enough spaces (`K = inf`): the uncharged count is a birth-death chain
//!   with birth `lambda` and death `nu z + mu min(z, M)` (an Erlang-A variant
//!   where cars also abandon while charging).
//! * Full lot: every departure is replaced by an uncharged car, so the
//!   uncharged count is a birth-death chain with birth `nu (K - z)` and
//!   death `mu min(z, M)`.
//!
//! Products are accumulated in log space throughout.

use serde::{Deserialize, Serialize};

use crate::dist::{JointDist, MarginalDist};
use crate::error::{Error, Result};
use crate::params::{state_count, state_index, ModelParams, Spaces};

/// Erlang-B blocking probability for offered load `load` and `servers`
/// servers, via `B(a,k) = a B(a,k-1) / (k + a B(a,k-1))`, `B(a,0) = 1`.
pub fn erlang_b(load: f64, servers: u32) -> Result<f64> {
    if !(load >= 0.0 && load.is_finite()) {
        return Err(Error::domain(format!("offered load must be finite and >= 0, got {load}")));
    }
    let mut b = 1.0;
    for k in 1..=servers {
        b = load * b / (k as f64 + load * b);
    }
    Ok(b)
}

/// Occupancy law of the Erlang loss system: `p(q) ∝ load^q / q!`, `q <= k`.
pub fn erlang_loss(load: f64, k: u32) -> Vec<f64> {
    if load == 0.0 {
        let mut out = vec![0.0; k as usize + 1];
        out[0] = 1.0;
        return out;
    }
    let mut logs = Vec::with_capacity(k as usize + 1);
    let mut acc = 0.0;
    logs.push(acc);
    for q in 1..=k {
        acc += load.ln() - (q as f64).ln();
        logs.push(acc);
    }
    normalize_logs(&logs)
}

/// Expected occupancy `(lambda/nu)(1 - B(lambda/nu, K))` of the loss system.
pub fn expected_occupancy(params: &ModelParams) -> Result<f64> {
    let k = params.finite_k("expected occupancy")?;
    let load = params.offered_load();
    Ok(load * (1.0 - erlang_b(load, k)?))
}

fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Joint law when every car can charge at full rate (`M = K`).
pub fn dist_enough_power(params: &ModelParams) -> Result<JointDist> {
    let params = params.validate()?;
    let k = params.finite_k("the enough-power distribution")?;
    if params.m != k as f64 {
        return Err(Error::domain(format!("closed form needs M = K, got M={} K={k}", params.m)));
    }
    let occupancy = erlang_loss(params.offered_load(), k);
    let p_unc = params.nu / (params.nu + params.mu);
    let mut probs = vec![0.0; state_count(k)];
    for q in 0..=k {
        let row = binomial_pmf(q, p_unc);
        for (z, b) in row.into_iter().enumerate() {
            probs[state_index(q, z as u32)] = occupancy[q as usize] * b;
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    JointDist::from_probs(k, probs)
}

/// Binomial(n, p) probabilities for `0..=n`.
pub(crate) fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut out = vec![0.0; n as usize + 1];
        out[if p <= 0.0 { 0 } else { n as usize }] = 1.0;
        return out;
    }
    let mut logs = Vec::with_capacity(n as usize + 1);
    let mut acc = n as f64 * (1.0 - p).ln();
    logs.push(acc);
    for j in 1..=n {
        acc += ((n - j + 1) as f64).ln() - (j as f64).ln() + p.ln() - (1.0 - p).ln();
        logs.push(acc);
    }
    logs.into_iter().map(f64::exp).collect()
}

/// Law of the uncharged count in a lot with unboundedly many spaces,
/// truncated where the geometric tail bound falls below `tail_eps` relative
/// to the accumulated mass, then renormalised.
pub fn dist_infinite_spaces(params: &ModelParams, tail_eps: f64) -> Result<MarginalDist> {
    let params = params.validate()?;
    if params.k != Spaces::Infinite {
        return Err(Error::domain("the enough-spaces law needs K = inf"));
    }
    if !(tail_eps > 0.0) {
        return Err(Error::domain("tail tolerance must be positive"));
    }
    let ModelParams { lambda, mu, nu, m, .. } = params;
    if lambda == 0.0 {
        return Ok(MarginalDist { probs: vec![1.0], tail_bound: 0.0 });
    }
    let death = |z: f64| nu * z + mu * z.min(m);
    let mut logs = vec![0.0];
    let mut log_total = 0.0;
    loop {
        let z = logs.len() as f64 - 1.0;
        // every later birth/death ratio is at most this one
        let ratio = lambda / death(z + 1.0);
        if ratio < 1.0 {
            let log_tail = logs[logs.len() - 1] + ratio.ln() - (1.0 - ratio).ln();
            if log_tail - log_total < tail_eps.ln() {
                let tail_bound = (log_tail - log_total).exp();
                return Ok(MarginalDist { probs: normalize_logs(&logs), tail_bound });
            }
        }
        let next = logs[logs.len() - 1] + ratio.ln();
        log_total = log_sum_exp(log_total, next);
        logs.push(next);
    }
}

/// Stationary law of the full-lot chain: birth `nu (K - z)`, death
/// `mu min(z, M)` on `0..=K`, from detailed balance.
pub fn dist_full_lot(params: &ModelParams) -> Result<MarginalDist> {
    let params = params.validate()?;
    let k = params.finite_k("the full-lot distribution")?;
    let ModelParams { mu, nu, m, .. } = params;
    let mut logs = Vec::with_capacity(k as usize + 1);
    let mut acc = 0.0;
    logs.push(acc);
    for z in 0..k {
        acc += (nu * (k - z) as f64).ln() - (mu * ((z + 1) as f64).min(m)).ln();
        logs.push(acc);
    }
    Ok(MarginalDist { probs: normalize_logs(&logs), tail_bound: 0.0 })
}

/// Mean of the full-lot product form evaluated at a real-valued lot size.
///
/// The weights `w(z+1)/w(z) = nu (lot - z) / (mu min(z+1, M))` are taken over
/// `z = 0..=states` exactly as the product form is written, without clipping
/// the birth factor at zero. For integer `lot = states` this is the mean of
/// [`dist_full_lot`]. When `lot` is not an integer, weights beyond
/// `ceil(lot)` alternate in sign, so the result is a formal average rather
/// than the mean of a probability law. Passing the expected occupancy as
/// `lot` gives the full-lot approximation of `E[Z]` for a finite lot.
pub fn full_lot_mean_at(lot: f64, states: u32, mu: f64, nu: f64, m: f64) -> Result<f64> {
    if !(lot > 0.0 && mu > 0.0 && nu > 0.0 && m > 0.0) {
        return Err(Error::domain("full-lot product form needs positive lot, rates and power"));
    }
    // signed weights with running rescale
    let mut w = vec![1.0f64];
    for z in 0..states {
        let next = w[z as usize] * nu * (lot - z as f64) / (mu * ((z + 1) as f64).min(m));
        w.push(next);
        let peak = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if peak > 1e150 {
            w.iter_mut().for_each(|x| *x /= peak);
        }
    }
    let total: f64 = w.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::domain("full-lot product form has zero total weight"));
    }
    Ok(w.iter().enumerate().map(|(z, x)| z as f64 * x).sum::<f64>() / total)
}

/// Bounds and bound-derived approximations for the success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessBounds {
    /// `mu/(nu+mu)`: the probability that charging beats the parking clock.
    pub upper: f64,
    /// From the lot with unboundedly many spaces.
    pub lower_erlang_a: f64,
    /// From the always-full lot with `K` spaces.
    pub lower_full_lot: f64,
    /// The full-lot expression with `K` replaced by the expected occupancy.
    /// An approximation only; it is not guaranteed to bound anything.
    pub modified_lower: f64,
}

/// Tail tolerance used for the enough-spaces law inside the bounds.
pub const BOUNDS_TAIL_EPS: f64 = 1e-14;

pub fn success_bounds(params: &ModelParams) -> Result<SuccessBounds> {
    let params = params.validate()?;
    let k = params.finite_k("success bounds")?;
    if params.lambda == 0.0 {
        return Err(Error::domain("success probability is undefined without arrivals"));
    }
    let upper = params.mu / (params.nu + params.mu);
    let unbounded = dist_infinite_spaces(&params.with_unbounded_spaces(), BOUNDS_TAIL_EPS)?;
    let lower_erlang_a = 1.0 - unbounded.mean() / params.offered_load();
    let e_q = expected_occupancy(&params)?;
    let full = dist_full_lot(&params)?.mean();
    let modified = full_lot_mean_at(e_q, k, params.mu, params.nu, params.m)?;
    Ok(SuccessBounds {
        upper,
        lower_erlang_a: lower_erlang_a.clamp(0.0, 1.0),
        lower_full_lot: ((e_q - full) / e_q).clamp(0.0, 1.0),
        modified_lower: ((e_q - modified) / e_q).clamp(0.0, 1.0),
    })
}
