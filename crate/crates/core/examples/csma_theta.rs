//! Transition matrix of the two-station CSMA/CA channel with memory 3.

use mjls::generators::{csma_theta, stationary_distribution, CsmaConfig, CsmaState};

fn main() -> mjls::Result<()> {
    let cfg = CsmaConfig::new(2, 3);
    let theta = csma_theta(&cfg)?;
    let mu = stationary_distribution(&theta)?;
    for (i, m) in mu.iter().enumerate() {
        let row: Vec<String> = theta.row(i).iter().map(|v| format!("{v:.2}")).collect();
        println!("{} {}  mu={:.3}", CsmaState::decode(i, cfg.nu, cfg.tau).label(), row.join(" "), m);
    }
    Ok(())
}
