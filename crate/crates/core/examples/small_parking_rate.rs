//! Long parking times: exact means against the small-nu centres.

use evcharge::diffusion::smallnu_approx;
use evcharge::exact::exact_metrics;
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    for nu in [0.1, 0.03, 0.01] {
        let k = (2.0 / nu * 1.5) as u32;
        let p = ModelParams::new(2.0, 1.0, nu, k, 1.0)?;
        let a = smallnu_approx(&p)?;
        let e = exact_metrics(&p)?;
        println!(
            "nu = {nu:<5} K = {k:<4} E[Z] {:>8.3} vs {:>6.1}   E[Q] {:>8.3} vs {:>6.1}",
            e.e_z, a.e_z, e.e_q, a.e_q
        );
    }
    let a = smallnu_approx(&ModelParams::unbounded(2.0, 1.0, 0.01, 1.0)?)?;
    println!("covariance {:?}, positive definite: {}", a.sigma, a.is_positive_definite());
    Ok(())
}
