//! Bounds on the success probability next to the exact value.

use evcharge::closed_form::success_bounds;
use evcharge::exact::exact_metrics;
use evcharge::ModelParams;

fn main() -> evcharge::Result<()> {
    println!("{:>4} {:>8} {:>8} {:>9} {:>9} {:>9}", "M", "exact", "upper", "erlang_a", "full_lot", "modified");
    for m in 1..=10 {
        let p = ModelParams::new(12.0, 1.0, 1.0, 10, m as f64)?;
        let b = success_bounds(&p)?;
        let exact = exact_metrics(&p)?.p_success.unwrap();
        println!(
            "{m:>4} {exact:>8.4} {:>8.4} {:>9.4} {:>9.4} {:>9.4}",
            b.upper, b.lower_erlang_a, b.lower_full_lot, b.modified_lower
        );
    }
    Ok(())
}
