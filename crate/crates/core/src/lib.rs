//! Simulation and exact computation for the random field Ising model and its
//! random cluster representations on finite subsets of `Z^d`.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: boxes, boundaries, edge sets and the deterministic orderings
//!   used by the exploration couplings.
//! * [`fields`]: quenched field realizations (bimodal, Gaussian, general).
//! * [`gibbs`]: spin measures, exact enumeration, heat-bath dynamics.
//! * [`cluster`]: single- and two-ghost random cluster measures, exact
//!   enumeration, Edwards–Sokal dynamics and `theta_n` estimation.
//! * [`coupling`]: the exploration couplings with full reveal traces, the
//!   worst-case sign bound and the dominating site percolation.
//! * [`perc`]: critical constants, field thresholds, decay fits and the
//!   Kertész line scan.
//! * [`harness`]: configuration, experiment drivers and result files.

pub mod cluster;
pub mod coupling;
pub mod error;
pub mod fields;
pub mod gibbs;
pub mod harness;
pub mod lattice;
pub mod perc;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
