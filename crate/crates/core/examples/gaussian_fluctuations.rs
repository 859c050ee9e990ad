//! Gaussian fluctuation integrals around the minimum and a quadrature cross-check.

use bcs_landscape::expansion::coefficients;
use bcs_landscape::gap::{solve_gap, with_coupling_ratio};
use bcs_landscape::gaussian::{eps_int2, free_bubble, lambda2, pair_factor, pair_quadrature, stiffness, z2};
use bcs_landscape::model::{Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&with_coupling_ratio(&base, 2.0)?)?;
    let sol = solve_gap(&lat, 1e-13)?;
    let qf = coefficients(&lat, sol.r0, 0.0);

    let z = z2(&lat, &qf)?;
    println!("log Z2 = {:.10} (with 2 beta0^2 radial exponent: {:.10})", z.log_z2, z.log_z2_beta0_sq);
    for include in [false, true] {
        let e = eps_int2(&lat, &qf, include)?;
        println!("eps_int2 ({:?}) = {:.10}, |Im| residue {:.1e}", e.handling, e.value, e.imag_residue);
    }

    let q = lat.q_min().expect("nonzero transfer");
    let quad = pair_quadrature(stiffness(&qf, q), qf.beta_coef[q], qf.gamma[q], qf.pair_phase(), 1e-10)?;
    println!("q_min = {}", lat.q.q[q].label(1));
    println!("  pair factor {:.12}, quadrature {:.12} (order {})", pair_factor(&qf, q)?, quad.value.re, quad.order);
    println!("  Lambda_2 = {:.8}", lambda2(&lat, &qf, q)?);
    println!("  free bubble = {:.8}", free_bubble(&lat, q));
    Ok(())
}
