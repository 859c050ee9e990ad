//! External pairing field: shifted minimum, lifted phase mode, propagators.

use bcs_landscape::expansion::{coefficients_external, default_step, hessian_check};
use bcs_landscape::gap::{solve_gap, solve_gap_external, with_coupling_ratio};
use bcs_landscape::model::{Lattice, ModelSpec};
use bcs_landscape::potential::{propagators, ExternalField};

fn main() -> bcs_landscape::Result<()> {
    let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&with_coupling_ratio(&base, 2.0)?)?;
    let lam = lat.spec.lambda;
    let r0 = solve_gap(&lat, 1e-14)?.r0;
    let z = lat.q.zero;
    println!("{:>8} {:>14} {:>16} {:>12} {:>12}", "|r|", "y0", "|l y0^2 - l r0^2|", "shift", "lift");
    for mag in [1e-1, 1e-2, 1e-3, 1e-4] {
        let r = ExternalField::new(mag, 0.3)?;
        let y0 = solve_gap_external(&lat, &r, 1e-15)?.y0.expect("external solution");
        let qf = coefficients_external(&lat, y0, &r)?;
        let chk = hessian_check(&lat, &qf, &[2 * z, 2 * z + 1], default_step(&lat, &qf))?;
        println!(
            "{mag:>8.0e} {y0:>14.10} {:>16.3e} {:>12.4e} {:>12.4e}",
            (lam * y0 * y0 - lam * r0 * r0).abs(),
            chk.shift,
            chk.lift
        );
    }

    let r = ExternalField::new(1e-2, 0.3)?;
    let y0 = solve_gap_external(&lat, &r, 1e-15)?.y0.expect("external solution");
    let qf = coefficients_external(&lat, y0, &r)?;
    let props = propagators(&lat, &qf.minimum(&lat), &r)?;
    for k in 0..3 {
        println!("k = {:>8}: F = {:.6}, G = {:.6}", lat.m.momenta[k].label(1), props[k].f, props[k].g);
    }
    Ok(())
}
