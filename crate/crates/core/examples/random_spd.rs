//! Krylov solve of a random instance with symmetric negative definite modes.

use mjls::generators::random_spd_problem;
use mjls::{solve, Method, SolveOptions};

fn main() -> mjls::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let p = random_spd_problem(n, 1)?;
    let (_, r) = solve(&p, Method::KrylovGs, &SolveOptions::with_tol(1e-11))?;
    println!("n={n}: {:.1} iterations, residual {:.2e}, {:.3} s", r.iterations, r.residual, r.wall_time_s);
    Ok(())
}
