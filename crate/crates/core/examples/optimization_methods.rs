//! Steepest descent, Dai-Yuan CG and trust region on the known example,
//! printing the trust-region trace.

use mjls::generators::known_example;
use mjls::optimization::{solve_tr_observed, OptStopRule, TrustRegionParams};
use mjls::{solve, Method, SolveOptions};

fn main() -> mjls::Result<()> {
    let (p, _) = known_example();
    for m in [Method::SteepestDescent, Method::ConjugateGradient] {
        let (_, r) = solve(&p, m, &SolveOptions::default())?;
        println!("{m}: {} iterations, residual {:.2e}", r.iterations, r.residual);
    }
    let (_, r) = solve_tr_observed(&p, None, &OptStopRule::default(), &TrustRegionParams::new(), |s| {
        println!(
            "  tr {:>3}  f {:.3e}  |g| {:.2e}  radius {:.2e}  {}",
            s.iteration,
            s.f_after,
            s.grad_norm,
            s.radius.unwrap_or(f64::NAN),
            if s.accepted { "accepted" } else { "rejected" }
        );
    })?;
    println!("tr: {} iterations, residual {:.2e}", r.iterations, r.residual);
    Ok(())
}
