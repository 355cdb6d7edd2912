//! Simulated systems approaching their fluid and diffusion limits.

use evcharge::sim::{convergence_experiment, Scaling, SimConfig};
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    let base = ModelParams::new(1.2, 1.0, 1.0, 1, 0.5)?;
    let fluid = Scaling::Fluid { z0: 0.5, t_grid: (1..=10).map(|i| i as f64 * 0.5).collect() };
    println!("fluid: sup |Z^n/n - z|");
    for row in convergence_experiment(&base, &fluid, &[10, 100, 1000], &SimConfig::new(5.0, 0.0, 50, 1))? {
        println!("  n = {:<5} {:.4}", row.n, row.error);
    }

    let hw = Scaling::HalfinWhitt { beta: 0.0, kappa: 1.0 };
    println!("Halfin-Whitt: Var(Q)/n against its limit");
    for row in convergence_experiment(&base, &hw, &[10, 50], &SimConfig::new(2e3, 100.0, 10, 2))? {
        println!("  n = {:<5} {:.4} vs {:.4}", row.n, row.statistic, row.limit);
    }
    Ok(())
}
