//! Gap equation across couplings, with both closed forms of the minimum.

use bcs_landscape::gap::{critical_coupling, gap_lhs, solve_gap};
use bcs_landscape::model::{Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let spec = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&spec)?;
    let lc = critical_coupling(&lat);
    println!("{:>8} {:>14} {:>14} {:>12} {:>14}", "l/l_c", "r0", "Delta^2", "residual", "V_min");
    for ratio in [0.5, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0] {
        let l = lat.with_lambda(ratio * lc);
        let sol = solve_gap(&l, 1e-13)?;
        println!(
            "{ratio:>8.2} {:>14.10} {:>14.10} {:>12.2e} {:>14.8}",
            sol.r0, sol.delta_sq, sol.residual, sol.v_min_sum
        );
        if !sol.trivial {
            assert!((gap_lhs(&l, sol.delta_sq) - 1.0).abs() <= 1e-13);
        }
    }
    Ok(())
}
