//! Effective potential of the attractive-delta Fermi gas on a finite cutoff lattice.
//!
//! The crate evaluates the Hubbard-Stratonovich effective potential `V(phi)`
//! through complex log-determinants, solves the BCS gap equation, checks the
//! Hadamard lower bound that pins the global minimum to the BCS configuration,
//! computes the second-order expansion around it, and evaluates the Gaussian
//! fluctuation quantities built from that expansion.
//!
//! ```
//! use bcs_landscape::{gap, model::{bcs_config, Lattice, ModelSpec}, potential};
//!
//! let spec = gap::with_coupling_ratio(&ModelSpec::default(), 2.0).unwrap();
//! let lat = Lattice::new(&spec).unwrap();
//! let sol = gap::solve_gap(&lat, 1e-12).unwrap();
//! let v = potential::potential_real(&lat, &bcs_config(&lat, sol.r0, 0.0));
//! assert!((v - sol.v_min_sum).abs() < 1e-9 * v.abs());
//! ```

pub mod bound;
pub mod cli;
pub mod config;
pub mod error;
pub mod expansion;
pub mod gap;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod potential;

pub use error::{Error, Result};
