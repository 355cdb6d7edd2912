//! Product-form special cases: ample power, unlimited spaces and the
//! always-full lot.

use evcharge::closed_form::{dist_enough_power, dist_full_lot, dist_infinite_spaces, erlang_b};
use evcharge::exact::solve;
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    // M = K: every car charges at full rate
    let p = ModelParams::new(6.0, 1.0, 1.0, 6, 6.0)?;
    let closed = dist_enough_power(&p)?;
    println!("M = K: closed form vs linear solve {:.1e}", closed.max_abs_diff(&solve(&p)?));
    println!("Erlang B(6, 6) = {:.5}", erlang_b(6.0, 6)?);

    // K = inf: a modified Erlang-A queue with M servers
    let inf = ModelParams::unbounded(6.0, 1.0, 1.0, 2.0)?;
    let z = dist_infinite_spaces(&inf, 1e-14)?;
    println!("K = inf, M = 2: E[Z] = {:.4} over {} states", z.mean(), z.limit() + 1);

    // every departure replaced at once
    let full = ModelParams::new(6.0, 1.0, 1.0, 6, 2.0)?;
    let f = dist_full_lot(&full)?;
    println!("full lot K = 6, M = 2: E[Z_f] = {:.4}", f.mean());
    Ok(())
}
