//! Fluid fixed points and the explicit trajectory.

use evcharge::exact::exact_metrics;
use evcharge::fluid::{fluid_fixed_point, fluid_success_prob, modified_fluid_fixed_point, FluidModel};
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    let p = ModelParams::new(10.0, 1.0, 1.0, 10, 3.0)?;
    let plain = fluid_fixed_point(&p)?;
    let modified = modified_fluid_fixed_point(&p)?;
    let exact = exact_metrics(&p)?;
    println!(
        "z* = {:.4} ({:?}), modified {:.4}, exact E[Z] = {:.4}",
        plain.z_star, plain.regime, modified.z_star, exact.e_z
    );
    println!(
        "P_s: fluid {:.4}, modified {:.4}, exact {:.4}",
        fluid_success_prob(&plain, &p)?,
        fluid_success_prob(&modified, &p)?,
        exact.p_success.unwrap()
    );

    let model = FluidModel::original(&p);
    let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
    let exact_path = model.trajectory(10.0, &times)?;
    let rk4 = model.trajectory_rk4(10.0, &times, 1e-3)?;
    println!("\n   t   z(t)     rk4");
    for ((t, z), r) in times.iter().zip(&exact_path).zip(&rk4) {
        println!("{t:>4.1} {z:>7.4} {r:>7.4}");
    }
    Ok(())
}
