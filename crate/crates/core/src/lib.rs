//! Hybrid quantum repeater toolkit.
//!
//! The crate is organised in three layers that mirror how a repeater chain is
//! built up:
//!
//! * [`probe_model`]: closed-form analytics of entanglement distribution with
//!   a bright coherent probe and homodyne postselection. Produces the link
//!   success probability and the Bell-diagonal link state.
//! * [`bell_algebra`]: four-population Bell-diagonal states and the maps that
//!   act on them (DEJMPS purification, entanglement swapping, gate noise),
//!   together with a dense density-matrix oracle used to validate them.
//! * [`repeater_sim`]: a deterministic discrete-event Monte-Carlo simulation
//!   of autonomous stations running nested purification and swapping over a
//!   chain of segments.
//!
//! The `book/` directory at the workspace root contains a narrative guide; its
//! code listings are compiled and run as doc-tests of this crate.

pub mod bell_algebra;
mod error;
pub mod probe_model;
pub mod repeater_sim;
pub mod search;

pub use bell_algebra::{BellDiagonalState, BellState, GateNoise};
pub use error::{Error, Result};
pub use probe_model::ProbeParams;
pub use repeater_sim::{ChainConfig, SimResult};

// Compile and run the guide's listings alongside the API doc-tests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/probe-model.md")]
    pub mod probe_model {}
    #[doc = include_str!("../../../book/src/bell-algebra.md")]
    pub mod bell_algebra {}
    #[doc = include_str!("../../../book/src/repeater-simulation.md")]
    pub mod repeater_simulation {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    pub mod command_line {}
}
