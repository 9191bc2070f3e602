//! Stability certificates of a stable and a destabilized instance.

use mjls::generators::random_stable_problem;
use mjls::stability::is_ms_stable;

fn main() -> mjls::Result<()> {
    let p = random_stable_problem(3, 3, 2, 0.8)?;
    for (label, q) in [("scaled", p.clone()), ("coupling x2", p.with_gamma(p.gamma().with_scaled_off_diagonal(2.0))?)] {
        let c = is_ms_stable(&q)?;
        println!(
            "{label}: verdict {:?}, rho {:.4}, max modal abscissa {:.3}, Kronecker abscissa {:?}",
            c.verdict,
            c.rho_linv_pi,
            c.max_abscissa(),
            c.kronecker_abscissa
        );
    }
    Ok(())
}
