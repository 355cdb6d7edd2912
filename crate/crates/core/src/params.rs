//! Model parameters, the `(q, z)` state space and the power allocation
//! function shared by every other module.
//!
//! States are ordered lexicographically by `(q, z)`:
//! `(0,0), (1,0), (1,1), (2,0), (2,1), (2,2), ...`, so the state `(q, z)`
//! sits at position `q(q+1)/2 + z`. Every dense or sparse structure in the
//! crate uses this ordering.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};

/// Number of parking spaces: a finite count or an unbounded lot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpacesRepr", into = "SpacesRepr")]
pub enum Spaces {
    Finite(u32),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpacesRepr {
    Count(u32),
    Symbol(String),
}

impl TryFrom<SpacesRepr> for Spaces {
    type Error = String;

    fn try_from(repr: SpacesRepr) -> Result<Self, Self::Error> {
        match repr {
            SpacesRepr::Count(k) => Ok(Spaces::Finite(k)),
            SpacesRepr::Symbol(s) => s.parse(),
        }
    }
}

impl From<Spaces> for SpacesRepr {
    fn from(s: Spaces) -> Self {
        match s {
            Spaces::Finite(k) => SpacesRepr::Count(k),
            Spaces::Infinite => SpacesRepr::Symbol("inf".into()),
        }
    }
}

impl std::str::FromStr for Spaces {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Spaces::Infinite),
            other => other
                .parse::<u32>()
                .map(Spaces::Finite)
                .map_err(|_| format!("expected a nonnegative integer or `inf`, got `{s}`")),
        }
    }
}

impl fmt::Display for Spaces {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spaces::Finite(k) => write!(f, "{k}"),
            Spaces::Infinite => f.write_str("inf"),
        }
    }
}

impl Spaces {
    pub fn finite(self) -> Option<u32> {
        match self {
            Spaces::Finite(k) => Some(k),
            Spaces::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Spaces::Finite(k) => k as f64,
            Spaces::Infinite => f64::INFINITY,
        }
    }
}

/// Arrival rate `lambda`, charging rate `mu`, parking rate `nu`, parking
/// spaces `k` and power capacity `m` (in unit-rate car equivalents; may be
/// fractional).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub k: Spaces,
    pub m: f64,
}

impl ModelParams {
    /// Validated parameters for a lot with `k` spaces.
    pub fn new(lambda: f64, mu: f64, nu: f64, k: u32, m: f64) -> Result<Self, ValidationError> {
        ModelParams { lambda, mu, nu, k: Spaces::Finite(k), m }.validate()
    }

    /// Validated parameters for a lot with unboundedly many spaces.
    pub fn unbounded(lambda: f64, mu: f64, nu: f64, m: f64) -> Result<Self, ValidationError> {
        ModelParams { lambda, mu, nu, k: Spaces::Infinite, m }.validate()
    }

    /// Checks every invariant and returns the parameters unchanged when they
    /// all hold.
    pub fn validate(self) -> Result<Self, ValidationError> {
        check_rate("lambda", self.lambda, true)?;
        check_rate("mu", self.mu, false)?;
        check_rate("nu", self.nu, false)?;
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(ValidationError::NonPositivePower(self.m));
        }
        if let Spaces::Finite(k) = self.k {
            if k == 0 {
                return Err(ValidationError::NoSpaces);
            }
            if self.m > k as f64 {
                return Err(ValidationError::PowerExceedsSpaces { m: self.m, k });
            }
        }
        Ok(self)
    }

    /// `K`, or an error naming the operation that needs it finite.
    pub fn finite_k(&self, op: &'static str) -> Result<u32> {
        self.k.finite().ok_or(Error::InfiniteSpaces(op))
    }

    /// Offered load `lambda / nu` of the underlying loss system.
    pub fn offered_load(&self) -> f64 {
        self.lambda / self.nu
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ModelParams { lambda, ..self }
    }

    pub fn with_power(self, m: f64) -> Self {
        ModelParams { m, ..self }
    }

    pub fn with_unbounded_spaces(self) -> Self {
        ModelParams { k: Spaces::Infinite, ..self }
    }
}

fn check_rate(name: &'static str, value: f64, zero_ok: bool) -> Result<(), ValidationError> {
    if !value.is_finite() {
        Err(ValidationError::NonFiniteRate { name, value })
    } else if value < 0.0 {
        Err(ValidationError::NegativeRate { name, value })
    } else if value == 0.0 && !zero_ok {
        Err(ValidationError::ZeroRate { name })
    } else {
        Ok(())
    }
}

/// `(q, z)`: total and uncharged cars. The number of charged cars is `q - z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State {
    pub q: u32,
    pub z: u32,
}

impl State {
    pub fn new(q: u32, z: u32) -> Option<Self> {
        (z <= q).then_some(State { q, z })
    }

    pub fn charged(&self) -> u32 {
        self.q - self.z
    }

    /// Position in the lexicographic ordering.
    pub fn index(&self) -> usize {
        state_index(self.q, self.z)
    }
}

#[inline]
pub fn state_index(q: u32, z: u32) -> usize {
    let q = q as usize;
    q * (q + 1) / 2 + z as usize
}

/// Number of states with `0 <= z <= q <= k`.
pub fn state_count(k: u32) -> usize {
    let k = k as usize;
    (k + 1) * (k + 2) / 2
}

/// All states of a lot with `k` spaces in lexicographic `(q, z)` order.
pub fn enumerate_states(k: Spaces) -> Result<Vec<State>> {
    let k = k.finite().ok_or(Error::InfiniteSpaces("state enumeration"))?;
    Ok((0..=k).flat_map(|q| (0..=q).map(move |z| State { q, z })).collect())
}

/// Power allocation `min(z, m)`: the total charging rate, in units of `mu`,
/// when `z` cars are still charging.
pub fn allocation(z: f64, m: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::domain(format!("uncharged count must be nonnegative, got {z}")));
    }
    if !(m > 0.0) {
        return Err(Error::domain(format!("power capacity must be positive, got {m}")));
    }
    Ok(z.min(m))
}
