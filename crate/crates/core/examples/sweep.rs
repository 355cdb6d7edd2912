//! Success probability and its approximations as power grows.

use evcharge::report::{cmd_sweep, write_records, Format};

fn main() -> evcharge::Result<()> {
    let rows = cmd_sweep(20, 1.2, 1.0, 1.0, None)?;
    write_records(&rows, Format::Csv, &mut std::io::stdout().lock())
}
