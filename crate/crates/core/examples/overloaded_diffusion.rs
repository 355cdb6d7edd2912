//! Full-lot diffusion density, checked against an SDE histogram, and the
//! resulting E[Z] approximation.

use evcharge::diffusion::{
    ks_distance, overloaded_density, overloaded_mean_approx, overloaded_spec, simulate_ou, OccupancyBasis, SdeConfig,
};
use evcharge::exact::exact_metrics;
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    let (nu, mu, k, beta) = (1.0, 1.0, 4.0, 0.5);
    let dens = overloaded_density(nu, mu, k, beta)?;
    let spec = overloaded_spec(nu, mu, k, beta)?;
    let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(2e-3, 2000.0, 8, 3).thinned(250))?;
    let samples = ens.samples(0, 10.0);
    let sim_mean = samples.iter().sum::<f64>() / samples.len() as f64;
    println!("density mean {:.4}, simulated {:.4}", dens.mean(), sim_mean);
    println!("KS distance {:.4} over {} samples", ks_distance(&samples, |x| dens.cdf(x)), samples.len());

    println!("\n   M  exact E[Z]  approx");
    for m in [2.0, 4.0, 6.0, 8.0] {
        let p = ModelParams::new(12.0, 1.0, 1.0, 10, m)?;
        let approx = overloaded_mean_approx(&p, OccupancyBasis::Expected)?;
        println!("{m:>4} {:>11.4} {approx:>7.4}", exact_metrics(&p)?.e_z);
    }
    Ok(())
}
