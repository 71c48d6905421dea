//! Event history of a delivered pair, for recomputing its state offline.

use serde::{Deserialize, Serialize};

use super::config::NoiseConfig;
use crate::bell_algebra::{self, BellDiagonalState};
use crate::Result;

/// How a pair came to be. Failed purification rounds leave no node, since
/// the kept pair is unchanged by them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Lineage {
    Link(BellDiagonalState),
    Purified {
        kept: Box<Lineage>,
        sacrificed: Box<Lineage>,
    },
    Swapped {
        left: Box<Lineage>,
        right: Box<Lineage>,
    },
}

impl Lineage {
    /// Number of elementary links consumed to build this pair.
    pub fn links(&self) -> usize {
        match self {
            Lineage::Link(_) => 1,
            Lineage::Purified { kept, sacrificed } => kept.links() + sacrificed.links(),
            Lineage::Swapped { left, right } => left.links() + right.links(),
        }
    }
}

/// Recompute a pair's state from its lineage with the same noise settings.
pub fn replay(lineage: &Lineage, noise: &NoiseConfig) -> Result<BellDiagonalState> {
    Ok(match lineage {
        Lineage::Link(state) => *state,
        Lineage::Purified { kept, sacrificed } => {
            let a = replay(kept, noise)?;
            let b = replay(sacrificed, noise)?;
            bell_algebra::purify(&a, &b, noise.purification())?.state
        }
        Lineage::Swapped { left, right } => {
            let a = replay(left, noise)?;
            let b = replay(right, noise)?;
            bell_algebra::connect(&a, &b, noise.swap())
        }
    })
}

/// A delivered pair together with its history.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveredPair {
    pub arrival_ms: f64,
    pub state: BellDiagonalState,
    pub lineage: Lineage,
}
