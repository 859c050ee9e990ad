//! Finite-difference Hessian of the potential against the analytic one.

use bcs_landscape::expansion::{coefficients, default_step, hessian_check, select_coords};
use bcs_landscape::gap::{solve_gap, with_coupling_ratio};
use bcs_landscape::model::{Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&with_coupling_ratio(&base, 2.0)?)?;
    let sol = solve_gap(&lat, 1e-13)?;
    let qf = coefficients(&lat, sol.r0, 0.6);
    let coords = select_coords(&lat, 3, 4, 1);
    let h = default_step(&lat, &qf);
    let chk = hessian_check(&lat, &qf, &coords, h)?;
    println!("{} real coordinates, step {h:.3e}", chk.coords);
    println!("relative error: real {:.2e}, imaginary {:.2e}", chk.rel_err_re, chk.rel_err_im);
    println!("condensate phase curvature / max|H| = {:.2e}", chk.zero_mode);
    Ok(())
}
