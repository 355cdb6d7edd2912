//! Stationary distribution of a small lot and its headline metrics.

use evcharge::exact::{build_generator, metrics, stationary_distribution_with, Solver};
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    let p = ModelParams::new(8.0, 1.0, 1.0, 10, 4.0)?;
    let gen = build_generator(&p)?;
    let fast = stationary_distribution_with(&gen, Solver::LevelReduction)?;
    let dense = stationary_distribution_with(&gen, Solver::Dense)?;
    println!("{} states, solvers differ by {:.1e}", gen.dimension(), fast.max_abs_diff(&dense));
    println!("balance residual {:.1e}", gen.residual(fast.probs()));

    let m = metrics(&fast, &p)?;
    println!("E[Q] = {:.4}  E[Z] = {:.4}  P_s = {:.4}  P_block = {:.4}", m.e_q, m.e_z, m.p_success.unwrap(), m.p_block);

    println!("\nz   P(Z = z)");
    for (z, pr) in fast.z_marginal().iter().enumerate() {
        println!("{z:<3} {pr:.5}");
    }
    Ok(())
}
