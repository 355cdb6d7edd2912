//! Reflected Halfin–Whitt diffusion: adjoint-relation residuals and the
//! mixture candidate for its stationary law.

use evcharge::diffusion::{bar_residual, hw_spec, pi_infinity_density, simulate_ou, Monomial, SdeConfig};

fn main() -> evcharge::Result<()> {
    let spec = hw_spec(1.0, 1.0, 0.0, 0.5)?;
    let ens = simulate_ou(&spec, [0.0, 0.0], &SdeConfig::new(2e-3, 100.0, 8, 1))?;
    let (mean, cov) = ens.moments(10.0);
    println!("mean ({:.3}, {:.3}), Var(Q) {:.3}", mean[0], mean[1], cov[1][1]);
    for f in [Monomial::new(1, 0), Monomial::new(0, 1), Monomial::new(2, 0), Monomial::new(1, 1), Monomial::new(0, 2)] {
        let r = bar_residual(&ens, &spec, &f, 10.0)?;
        println!("x1^{} x2^{}: residual {:+.4} ± {:.4}", f.p1, f.p2, r.residual, r.std_error);
    }

    let pi = pi_infinity_density(1.0, 1.0, 0.0)?;
    println!("\nmixture mass {:.8}", pi.total_mass(15.0, 3000));
    println!("  x2  candidate  normal");
    for row in pi.marginal_report(&[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]) {
        println!("{:>4.1} {:>10.5} {:>7.5}", row.x2, row.candidate, row.normal);
    }
    Ok(())
}
