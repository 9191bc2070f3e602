//! Table-style benchmark runs written as CSV to stdout.

use mjls::bench::{run_bench, write_csv, BenchSpec, Experiment};

fn main() -> mjls::Result<()> {
    let mut rows = Vec::new();
    for e in [Experiment::Table1, Experiment::Table6] {
        rows.extend(run_bench(&BenchSpec::preset(e))?);
    }
    write_csv(&rows, std::io::stdout())
}
