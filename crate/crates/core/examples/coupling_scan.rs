//! Sweeps through the library's command runner: gap versus coupling, then
//! infrared growth versus system size.

use bcs_landscape::cli::run_command;
use bcs_landscape::config::{parse_pairs, parse_sweep, RunConfig};

fn show(cfg: &RunConfig) -> bcs_landscape::Result<()> {
    let out = run_command("scan", cfg)?;
    let t = out.table.expect("scan writes a table");
    println!("{}", t.header.join(","));
    for row in &t.rows {
        println!("{}", row.join(","));
    }
    println!();
    Ok(())
}

fn main() -> bcs_landscape::Result<()> {
    let mut cfg = RunConfig::from_pairs(&parse_pairs("L = 32\nbeta = 2\nnu = 5\nmu = 0.2\n")?)?;
    cfg.sweep = Some(parse_sweep("lambda_factor=0.5:3:6")?);
    show(&cfg)?;
    cfg.sweep = Some(parse_sweep("L=8:32:4")?);
    show(&cfg)
}
