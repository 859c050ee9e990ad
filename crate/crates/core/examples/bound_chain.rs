//! Hadamard bound chain `Re V >= rhs >= V_BCS(||phi||)` on random fields.

use bcs_landscape::bound::bound_report;
use bcs_landscape::gap::with_coupling_ratio;
use bcs_landscape::model::{random_config, Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&with_coupling_ratio(&base, 2.0)?)?;
    let slack = 1e-9 * lat.kappa();
    println!("{:>5} {:>6} {:>14} {:>14} {:>14} {:>6}", "seed", "scale", "Re V", "rhs", "V_BCS", "ok");
    for seed in 0..12 {
        let scale = [0.1, 0.3, 1.0, 3.0][seed as usize % 4];
        let r = bound_report(&lat, &random_config(&lat, scale, seed), slack);
        println!(
            "{seed:>5} {scale:>6.1} {:>14.6} {:>14.6} {:>14.6} {:>6}",
            r.re_v, r.rhs26, r.vbcs_at_norm, r.chain_ok
        );
    }
    Ok(())
}
