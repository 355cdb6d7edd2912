//! Monte Carlo estimates with 95% confidence half-widths.

use evcharge::exact::exact_metrics;
use evcharge::sim::{simulate_full_lot, simulate_model, SimConfig};
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    let p = ModelParams::new(8.0, 1.0, 1.0, 10, 3.0)?;
    let cfg = SimConfig::new(5e3, 200.0, 20, 7);
    let est = simulate_model(&p, &cfg)?;
    let exact = exact_metrics(&p)?;
    let h = est.half_widths;
    println!("E[Q]    {:.4} ± {:.4}  (exact {:.4})", est.e_q, h.e_q, exact.e_q);
    println!("E[Z]    {:.4} ± {:.4}  (exact {:.4})", est.e_z, h.e_z, exact.e_z);
    println!("P_s     {:.4} ± {:.4}  (exact {:.4})", est.p_success.unwrap(), h.p_success, exact.p_success.unwrap());
    println!("P_block {:.4} ± {:.4}  (exact {:.4})", est.p_block, h.p_block, exact.p_block);

    let full = simulate_full_lot(&p, &cfg)?;
    println!("full lot: E[Z_f] {:.4} ± {:.4}", full.e_z, full.half_widths.e_z);
    Ok(())
}
