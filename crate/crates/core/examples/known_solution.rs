//! Solves the two-mode example with a known solution and reports the error.

use mjls::generators::known_example;
use mjls::model::error_norm;
use mjls::{solve, Method, SolveOptions};

fn main() -> mjls::Result<()> {
    let (p, xstar) = known_example();
    let (x, report) = solve(&p, Method::KrylovGs, &SolveOptions::with_tol(1e-11))?;
    println!("iterations {:.1}  residual {:.2e}  error {:.2e}", report.iterations, report.residual, error_norm(&x, &xstar)?);
    for (i, block) in x.blocks().iter().enumerate() {
        println!("X{} ={block:.6}", i + 1);
    }
    Ok(())
}
