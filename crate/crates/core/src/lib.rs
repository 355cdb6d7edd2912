//! Stationary analysis of an EV charging station with `K` parking spaces and
//! a shared power budget `M`.
//!
//! Cars arrive at rate `lambda`, stay parked for an `Exp(nu)` time and need an
//! `Exp(mu)` amount of charge. With `z` uncharged cars present, power is
//! split equally so the total charging rate is `mu min(z, M)`. The state is
//! `(q, z)`: cars present and cars still charging.
//!
//! The crate offers the exact stationary law of that chain, closed forms for
//! special cases and bounds on the success probability, a fluid model, three
//! diffusion approximations, a Monte Carlo simulator and the `evcharge` CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod diffusion;
pub mod dist;
pub mod error;
pub mod exact;
pub mod fluid;
pub mod params;
pub mod report;
pub mod sim;

pub use dist::{JointDist, MarginalDist, Metrics};
pub use error::{Error, Result, ValidationError};
pub use params::{enumerate_states, ModelParams, Spaces, State};
