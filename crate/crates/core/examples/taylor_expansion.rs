//! Expansion coefficients at the BCS minimum and the quadratic model's error.

use bcs_landscape::expansion::{coefficients, identity_residual, remainder};
use bcs_landscape::gap::{solve_gap, with_coupling_ratio};
use bcs_landscape::model::{random_direction, Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&with_coupling_ratio(&base, 2.0)?)?;
    let sol = solve_gap(&lat, 1e-13)?;
    let qf = coefficients(&lat, sol.r0, 0.0);
    println!("r0 = {:.10}, beta0 = {:.10}, V_min = {:.10}", qf.r0, qf.beta0, qf.v_min);

    let (b, l) = (lat.spec.beta, lat.spec.l);
    let mut order: Vec<usize> = (0..lat.q.len()).collect();
    order.sort_by(|&i, &j| lat.q.q[i].norm_sq(b, l).partial_cmp(&lat.q.q[j].norm_sq(b, l)).unwrap());
    println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>10}", "q", "alpha", "edge", "beta", "gamma", "identity");
    for &q in order.iter().take(9) {
        println!(
            "{:>8} {:>12.6} {:>12.3e} {:>12.6} {:>12.6} {:>10.1e}",
            lat.q.q[q].label(1),
            qf.alpha[q],
            qf.edge[q],
            qf.beta_coef[q],
            qf.gamma[q],
            identity_residual(&lat, &qf, q)
        );
    }

    let t = 1e-2 * lat.kappa().sqrt();
    for seed in 0..3 {
        let xi = random_direction(&lat, seed);
        let (r1, r2) = (remainder(&lat, &qf, &xi, t)?, remainder(&lat, &qf, &xi, t / 2.0)?);
        println!("direction {seed}: |V - V2| = {r1:.3e}, halved step ratio {:.3}", r1 / r2);
    }
    Ok(())
}
