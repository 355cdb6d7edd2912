//! Generator of the `(Q, Z)` chain, its stationary distribution, and the
//! exact metrics every approximation is scored against.
//!
//! From `(q, z)` the chain moves to
//!
//! * `(q+1, z+1)` at rate `lambda` when `q < K` (an uncharged arrival),
//! * `(q-1, z-1)` at rate `nu z` (an uncharged car leaves),
//! * `(q-1, z)` at rate `nu (q - z)` (a charged car leaves),
//! * `(q, z-1)` at rate `mu min(z, M)` (a car finishes charging).
//!
//! The default solver exploits the level structure in `q`: the generator is
//! block tridiagonal with blocks of size `q + 1`, so block elimination from
//! the top level down costs `O(K^4)` and handles `K` in the hundreds.

use nalgebra::{DMatrix, DVector};

use crate::dist::{JointDist, Metrics};
use crate::error::{Error, Result};
use crate::params::{state_count, state_index, ModelParams, State};

/// Largest tolerated `||pi G||_inf` after a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Sparse generator in compressed-row form, rows and columns in the
/// lexicographic state order.
#[derive(Debug, Clone)]
pub struct Generator {
    params: ModelParams,
    k: u32,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Generator {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// `(column, rate)` pairs of one row, diagonal included.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn rate(&self, from: State, to: State) -> f64 {
        let j = to.index();
        self.row(from.index()).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn max_row_sum_abs(&self) -> f64 {
        (0..self.dimension()).map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// `pi G` for a row vector `pi`.
    pub fn left_apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        for (i, &p) in pi.iter().enumerate() {
            if p != 0.0 {
                for (j, v) in self.row(i) {
                    out[j] += p * v;
                }
            }
        }
        out
    }

    pub fn residual(&self, pi: &[f64]) -> f64 {
        self.left_apply(pi).into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                g[(i, j)] += v;
            }
        }
        g
    }
}

pub fn build_generator(params: &ModelParams) -> Result<Generator> {
    let params = params.validate()?;
    let k = params.finite_k("the exact generator")?;
    let ModelParams { lambda, mu, nu, m, .. } = params;
    let n = state_count(k);
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    row_ptr.push(0);
    for q in 0..=k {
        for z in 0..=q {
            let mut out = 0.0;
            let mut push = |col: usize, rate: f64| {
                if rate > 0.0 {
                    cols.push(col);
                    vals.push(rate);
                    out += rate;
                }
            };
            if z > 0 {
                push(state_index(q - 1, z - 1), nu * z as f64);
                push(state_index(q, z - 1), mu * (z as f64).min(m));
            }
            if q > z {
                push(state_index(q - 1, z), nu * (q - z) as f64);
            }
            if q < k {
                push(state_index(q + 1, z + 1), lambda);
            }
            cols.push(state_index(q, z));
            vals.push(-out);
            row_ptr.push(cols.len());
        }
    }
    Ok(Generator { params, k, row_ptr, cols, vals })
}

/// Linear-solve strategy for the stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Block elimination over the levels `q = K, K-1, ..., 0`.
    #[default]
    LevelReduction,
    /// Dense LU on `G^T` with one balance equation replaced by the
    /// normalisation row. Cubic in the state count; small `K` only.
    Dense,
}

pub fn stationary_distribution(gen: &Generator) -> Result<JointDist> {
    stationary_distribution_with(gen, Solver::default())
}

pub fn stationary_distribution_with(gen: &Generator, solver: Solver) -> Result<JointDist> {
    let k = gen.k();
    if gen.params().lambda == 0.0 {
        return Ok(JointDist::point_mass_empty(k));
    }
    let mut pi = match solver {
        Solver::LevelReduction => level_reduction(gen.params(), k)?,
        Solver::Dense => dense_solve(gen)?,
    };
    for p in pi.iter_mut() {
        // round-off can leave -1e-18 on states that are barely reachable
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let residual = gen.residual(&pi);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::Numerical { residual, tolerance: RESIDUAL_TOLERANCE });
    }
    JointDist::from_probs(k, pi)
}

/// Stationary distribution straight from parameters.
pub fn solve(params: &ModelParams) -> Result<JointDist> {
    stationary_distribution(&build_generator(params)?)
}

/// Exact metrics straight from parameters.
pub fn exact_metrics(params: &ModelParams) -> Result<Metrics> {
    let dist = solve(params)?;
    metrics(&dist, params)
}

fn dense_solve(gen: &Generator) -> Result<Vec<f64>> {
    let n = gen.dimension();
    let mut a = gen.to_dense().transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::Singular { level: 0 })?;
    Ok(x.iter().copied().collect())
}

/// Levels are `q = 0..=K`; level `q` holds states `z = 0..=q`.
///
/// With `U_q`, `D_q`, `L_q` the up, down and within-level blocks, the
/// balance equations read `pi_{q-1} U_{q-1} + pi_q L_q + pi_{q+1} D_{q+1} = 0`.
/// Eliminating from the top, `pi_{q} = pi_{q-1} R_{q-1}` with
/// `R_{q-1} = U_{q-1} S_q^{-1}`, `S_K = -L_K` and
/// `S_q = -(L_q + R_q D_{q+1})`.
fn level_reduction(params: &ModelParams, k: u32) -> Result<Vec<f64>> {
    let ModelParams { lambda, mu, nu, m, .. } = *params;
    let k = k as usize;
    let within = |q: usize| -> DMatrix<f64> {
        // L_q: (q,z) -> (q,z-1) at mu min(z,M); diagonal holds total outflow
        let mut l = DMatrix::zeros(q + 1, q + 1);
        for z in 0..=q {
            let charge = mu * (z as f64).min(m);
            let up = if q < k { lambda } else { 0.0 };
            l[(z, z)] = -(up + nu * q as f64 + charge);
            if z > 0 {
                l[(z, z - 1)] = charge;
            }
        }
        l
    };
    // R_{q-1} D_q only needs the bidiagonal D_q, applied in place.
    let times_down = |r: &DMatrix<f64>, q: usize| -> DMatrix<f64> {
        // r: (q) x (q+1) times D_q: (q+1) x q
        let mut out = DMatrix::zeros(r.nrows(), q);
        for i in 0..r.nrows() {
            for z in 0..=q {
                let v = r[(i, z)];
                if v == 0.0 {
                    continue;
                }
                if z > 0 {
                    out[(i, z - 1)] += v * nu * z as f64;
                }
                if z < q {
                    out[(i, z)] += v * nu * (q - z) as f64;
                }
            }
        }
        out
    };

    let mut rs: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); k];
    let mut s = -within(k);
    for q in (1..=k).rev() {
        let inv = s.clone().try_inverse().ok_or(Error::Singular { level: q })?;
        // U_{q-1} maps (q-1, z) -> (q, z+1) at rate lambda
        let r = inv.rows(1, q) * lambda;
        let rd = times_down(&r, q);
        let mut block = within(q - 1) + rd;
        // rows of the censored block plus the down rate nu (q-1) sum to
        // zero; rebuilding the diagonal from that avoids cancellation
        for z in 0..q {
            let off: f64 = (0..q).filter(|&j| j != z).map(|j| block[(z, j)].max(0.0)).sum();
            block[(z, z)] = -(nu * (q - 1) as f64 + off);
        }
        s = -block;
        rs[q - 1] = r;
    }

    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    levels.push(vec![1.0]);
    for q in 1..=k {
        let prev = DMatrix::from_row_slice(1, q, &levels[q - 1]);
        let mut next: Vec<f64> = (prev * &rs[q - 1]).iter().copied().collect();
        let peak = next.iter().copied().fold(0.0, f64::max);
        if peak > 1e200 {
            for level in levels.iter_mut() {
                level.iter_mut().for_each(|p| *p /= peak);
            }
            next.iter_mut().for_each(|p| *p /= peak);
        }
        levels.push(next);
    }
    Ok(levels.into_iter().flatten().collect())
}

pub fn metrics(dist: &JointDist, params: &ModelParams) -> Result<Metrics> {
    let k = params.finite_k("exact metrics")?;
    if dist.k() != k {
        return Err(Error::domain(format!("distribution has K={} but parameters have K={k}", dist.k())));
    }
    let (mut e_q, mut e_z, mut p_block) = (0.0, 0.0, 0.0);
    for (s, p) in dist.iter() {
        e_q += s.q as f64 * p;
        e_z += s.z as f64 * p;
        if s.q == k {
            p_block += p;
        }
    }
    Ok(Metrics::from_moments(e_q, e_z, p_block))
}

/// `|exact - approx| / exact * 100`.
pub fn relative_error(exact: f64, approx: f64) -> Result<f64> {
    if !(exact > 0.0) {
        return Err(Error::domain(format!("relative error needs a positive reference, got {exact}")));
    }
    Ok((exact - approx).abs() / exact * 100.0)
}
