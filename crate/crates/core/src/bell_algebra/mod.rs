//! Bell-diagonal two-qubit states and the protocol maps acting on them.
//!
//! A Bell-diagonal state is a probability vector over the four Bell states,
//! stored in the fixed order `(Ψ⁺, Ψ⁻, Φ⁺, Φ⁻)`. The target state of the
//! repeater is `Ψ⁺`, so [`BellDiagonalState::fidelity`] is simply the first
//! population.
//!
//! Each Bell state is a Pauli applied to one half of `Φ⁺`:
//! `Φ⁺ ↔ I`, `Ψ⁺ ↔ X`, `Ψ⁻ ↔ Y`, `Φ⁻ ↔ Z`. Up to phases the Paulis compose
//! like the Klein four-group, which is what entanglement swapping does to the
//! labels.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PsiPlus,
        BellState::PsiMinus,
        BellState::PhiPlus,
        BellState::PhiMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Two-bit Pauli label: bit 0 is the X part, bit 1 the Z part.
    fn pauli_bits(self) -> u8 {
        match self {
            BellState::PhiPlus => 0b00,
            BellState::PsiPlus => 0b01,
            BellState::PhiMinus => 0b10,
            BellState::PsiMinus => 0b11,
        }
    }

    fn from_pauli_bits(bits: u8) -> Self {
        match bits & 0b11 {
            0b00 => BellState::PhiPlus,
            0b01 => BellState::PsiPlus,
            0b10 => BellState::PhiMinus,
            _ => BellState::PsiMinus,
        }
    }

    /// Label of the Pauli product, ignoring phase.
    pub fn compose(self, other: BellState) -> BellState {
        BellState::from_pauli_bits(self.pauli_bits() ^ other.pauli_bits())
    }
}

/// Populations of one entangled pair in the order `(Ψ⁺, Ψ⁻, Φ⁺, Φ⁻)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BellDiagonalState([f64; 4]);

impl BellDiagonalState {
    pub const PSI_PLUS: Self = BellDiagonalState([1.0, 0.0, 0.0, 0.0]);
    pub const MAXIMALLY_MIXED: Self = BellDiagonalState([0.25; 4]);

    /// Validates that every component lies in `[0, 1]` and that they sum to
    /// one within `1e-9`.
    pub fn new(v: [f64; 4]) -> Result<Self> {
        let in_range = v.iter().all(|&x| x.is_finite() && (-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&x));
        let sum: f64 = v.iter().sum();
        if !in_range || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidState(v));
        }
        Ok(BellDiagonalState(v.map(|x| x.clamp(0.0, 1.0))))
    }

    /// Normalises a non-negative weight vector.
    pub fn from_weights(w: [f64; 4]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidState(w));
        }
        Self::new(w.map(|x| x / sum))
    }

    pub fn pure(state: BellState) -> Self {
        let mut v = [0.0; 4];
        v[state.index()] = 1.0;
        BellDiagonalState(v)
    }

    /// Werner-like state: fidelity `f` on `Ψ⁺`, the rest spread evenly.
    pub fn werner(f: f64) -> Result<Self> {
        let rest = (1.0 - f) / 3.0;
        Self::new([f, rest, rest, rest])
    }

    pub fn populations(&self) -> [f64; 4] {
        self.0
    }

    pub fn population(&self, state: BellState) -> f64 {
        self.0[state.index()]
    }

    /// Overlap with the target `Ψ⁺`.
    pub fn fidelity(&self) -> f64 {
        self.0[0]
    }

    /// Relabel by a Pauli applied to one qubit: `out[k] = in[pauli ∘ k]`.
    pub fn relabel(&self, pauli: BellState) -> Self {
        let mut out = [0.0; 4];
        for k in BellState::ALL {
            out[k.index()] = self.0[pauli.compose(k).index()];
        }
        BellDiagonalState(out)
    }
}

impl TryFrom<[f64; 4]> for BellDiagonalState {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BellDiagonalState> for [f64; 4] {
    fn from(s: BellDiagonalState) -> Self {
        s.0
    }
}

/// Local optical loss `ε` per two-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateNoise {
    pub epsilon: f64,
}

impl GateNoise {
    pub const IDEAL: GateNoise = GateNoise { epsilon: 0.0 };

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::param("epsilon", format!("must lie in [0, 1), got {epsilon}")));
        }
        Ok(GateNoise { epsilon })
    }

    /// Probability that a pair passes a gate untouched: one loss chance for
    /// each of the two probe interactions.
    pub fn reliability(&self) -> f64 {
        (1.0 - self.epsilon).powi(2)
    }
}

/// With probability `(1−ε)²` the pair is untouched, otherwise it is replaced
/// by the maximally mixed state.
pub fn apply_gate_noise(state: &BellDiagonalState, noise: GateNoise) -> BellDiagonalState {
    if noise.epsilon == 0.0 {
        return *state;
    }
    let keep = noise.reliability();
    BellDiagonalState(state.0.map(|x| keep * x + (1.0 - keep) / 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationOutcome {
    pub success_probability: f64,
    pub state: BellDiagonalState,
}

/// One DEJMPS recurrence round targeting `Ψ⁺`. `pair_a` is the pair that is
/// kept; `pair_b` is measured.
///
/// Both pairs first pass through the gate-noise channel. The recurrence is the
/// `Φ⁺`-targeted one conjugated by an `X` on one qubit of each pair, so with
/// `A = Ψ⁺`, `B = Φ⁻`, `C = Φ⁺`, `D = Ψ⁻`:
///
/// ```text
/// N  = (A₁+B₁)(A₂+B₂) + (C₁+D₁)(C₂+D₂)
/// A' = (A₁A₂ + B₁B₂)/N     B' = (C₁D₂ + D₁C₂)/N
/// C' = (C₁C₂ + D₁D₂)/N     D' = (A₁B₂ + B₁A₂)/N
/// ```
pub fn purify(
    pair_a: &BellDiagonalState,
    pair_b: &BellDiagonalState,
    noise: GateNoise,
) -> Result<PurificationOutcome> {
    let [a1, d1, c1, b1] = apply_gate_noise(pair_a, noise).0;
    let [a2, d2, c2, b2] = apply_gate_noise(pair_b, noise).0;
    let norm = (a1 + b1) * (a2 + b2) + (c1 + d1) * (c2 + d2);
    if norm <= 0.0 {
        return Err(Error::PurificationImpossible);
    }
    let out = [
        (a1 * a2 + b1 * b2) / norm,
        (a1 * b2 + b1 * a2) / norm,
        (c1 * c2 + d1 * d2) / norm,
        (c1 * d2 + d1 * c2) / norm,
    ];
    Ok(PurificationOutcome {
        success_probability: norm.min(1.0),
        state: BellDiagonalState::new(out)?,
    })
}

/// Entanglement swapping with Pauli-frame correction relative to `Φ⁺`:
/// `out[k] = Σᵢ a[i] · b[i ∘ k]`.
pub fn swap(pair_ab: &BellDiagonalState, pair_bc: &BellDiagonalState, noise: GateNoise) -> BellDiagonalState {
    let a = apply_gate_noise(pair_ab, noise).0;
    let b = apply_gate_noise(pair_bc, noise).0;
    let mut out = [0.0; 4];
    for k in BellState::ALL {
        out[k.index()] = BellState::ALL
            .iter()
            .map(|&i| a[i.index()] * b[i.compose(k).index()])
            .sum();
    }
    BellDiagonalState(out)
}

/// Swap followed by the fixed local `X` correction that maps `Ψ⁺ ⊗ Ψ⁺` onto
/// `Ψ⁺`. This is the form the repeater uses, since every pair in the chain
/// targets `Ψ⁺`.
pub fn connect(pair_ab: &BellDiagonalState, pair_bc: &BellDiagonalState, noise: GateNoise) -> BellDiagonalState {
    swap(pair_ab, pair_bc, noise).relabel(BellState::PsiPlus)
}
