//! Nonsymmetric modes with the coupling scaled to a target spectral radius,
//! solved by all four fixed-point variants.

use mjls::generators::random_stable_problem;
use mjls::stability::spectral_radius_linv_pi;
use mjls::{solve, Method, SolveOptions};

fn main() -> mjls::Result<()> {
    let p = random_stable_problem(30, 6, 4, 0.9)?;
    println!("rho(L^-1 Pi) = {:.4}", spectral_radius_linv_pi(&p)?);
    let opts = SolveOptions { tol: Some(1e-10), max_iter: Some(2000), ..Default::default() };
    for m in [Method::Jacobi, Method::GaussSeidel, Method::KrylovJacobi, Method::KrylovGs] {
        let (_, r) = solve(&p, m, &opts)?;
        println!("{:<14} {:>7.1} it  residual {:.2e}", m.name(), r.iterations, r.residual);
    }
    Ok(())
}
