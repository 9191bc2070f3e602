//! H2 norm of the networked cart system from both Gramians.

use mjls::generators::{cart_system, h2_norm, h2_norm_squared_sides, CartConfig};

fn main() -> mjls::Result<()> {
    for nu in [2, 3] {
        let sys = cart_system(&CartConfig::new(nu))?;
        let (via_p, via_q) = h2_norm_squared_sides(&sys)?;
        println!("nu={nu} n={} N={}: H2 = {:.6}  ({via_p:.10e} vs {via_q:.10e})", sys.dim(), sys.modes(), h2_norm(&sys)?);
    }
    Ok(())
}
