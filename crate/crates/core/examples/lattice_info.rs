//! Cutoff set, transfer set and critical coupling of a small 1-d lattice.

use bcs_landscape::gap::critical_coupling;
use bcs_landscape::model::{nondegeneracy_check, Lattice, ModelSpec};

fn main() -> bcs_landscape::Result<()> {
    let spec = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    let lat = Lattice::new(&spec)?;
    println!("|M| = {}, |Q| = {}, kappa = {}", lat.n(), lat.q.len(), lat.kappa());
    println!("lambda_c = {:.12}", critical_coupling(&lat));
    println!("nondegenerate: {}", nondegeneracy_check(&lat.spec, &lat.q));

    println!("{:>10} {:>10} {:>10}", "k", "k0", "e_k");
    for i in 0..lat.n().min(8) {
        let k = lat.m.momenta[i];
        println!("{:>10} {:>10.4} {:>10.4}", k.label(1), lat.m.k0[i], lat.m.e[i]);
    }
    Ok(())
}
