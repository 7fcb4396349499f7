//! Compositional open Markov processes and reaction networks.
//!
//! Open systems are decorated cospans: a finite set of states or species
//! (the apex) carrying a Markov process, reaction network, or polynomial
//! vector field, with input and output legs marking boundary elements.
//! Composition glues systems along shared boundaries via pushouts, and
//! "black-boxing" extracts the steady-state relation each system imposes
//! on its boundary — a linear relation for detailed-balanced Markov
//! processes, a solver-backed semialgebraic relation for mass-action
//! reaction networks. A thermodynamic suite (relative entropy,
//! f-divergences, dissipation, entropy production) quantifies how far
//! those steady states sit from equilibrium.
//!
//! Start with the runnable examples (`cargo run --example
//! three_cycle_ness`, `membrane_diffusion`, `blackbox_markov`,
//! `reaction_blackbox`, ...) or the `open-nets` binary, which exposes
//! validation, composition, simulation, black-boxing and law-checking
//! over JSON documents.

pub mod behavior_markov;
pub mod behavior_rx;
pub mod doc;
pub mod error;
pub mod finset;
pub mod linrel;
pub mod markov;
pub mod open_markov;
pub mod open_reaction;
pub mod reaction;
pub mod solver;
pub mod thermo;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
