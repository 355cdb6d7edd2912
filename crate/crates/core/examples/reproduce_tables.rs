//! The four maximum-relative-error tables for E[Z], with nu = mu = 1.

use evcharge::report::{cmd_tables, TABLE_KS};

fn main() -> evcharge::Result<()> {
    let names = ["fluid", "modified fluid", "full lot at expected occupancy", "overloaded diffusion"];
    for (id, name) in (1u8..=4).zip(names) {
        let cells = cmd_tables(id)?;
        println!("Table {id}: {name}");
        print!("{:>8}", "lambda");
        for k in TABLE_KS {
            print!("{:>9}", format!("K={k}"));
        }
        println!();
        for row in cells.chunks(TABLE_KS.len()) {
            print!("{:>7}K", row[0].lambda_mult);
            for c in row {
                print!("{:>9.4}", c.max_rel_error_pct);
            }
            println!();
        }
        println!();
    }
    Ok(())
}
