//! Dense 4-qubit reference for the closed-form purification and swapping
//! maps.
//!
//! The oracle builds the 16×16 density matrix of two pairs, runs the ideal
//! circuit gate by gate, applies the projective measurements, and reads the
//! Bell-basis populations of the surviving pair. It shares nothing with the
//! closed forms in the parent module beyond the Bell-state ordering, so
//! agreement between the two is a real check. It is meant for tests and
//! verification runs, not for the simulator's hot path.
//!
//! Qubit `0` is the most significant bit of a basis index.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{BellDiagonalState, BellState};
use crate::{Error, Result};

type Matrix = DMatrix<Complex64>;

const N_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Circuit {
    /// Bilateral CNOT from the first pair onto the second, measure the second
    /// pair, keep coincident outcomes.
    Purify,
    /// Bell measurement on the inner qubits with Pauli correction on the far
    /// qubit, averaged over outcomes.
    Swap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub success_probability: f64,
    pub state: BellDiagonalState,
    /// Largest off-diagonal magnitude of the output in the Bell basis.
    pub max_coherence: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// `exp(-i angle X / 2)`.
fn rx(angle: f64) -> Matrix {
    let (s, co) = (angle / 2.0).sin_cos();
    let off = Complex64::new(0.0, -s);
    Matrix::from_row_slice(2, 2, &[c(co), off, off, c(co)])
}

/// Amplitudes of a Bell state in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_vector(state: BellState) -> [Complex64; 4] {
    let h = FRAC_1_SQRT_2;
    match state {
        BellState::PhiPlus => [c(h), c(0.0), c(0.0), c(h)],
        BellState::PhiMinus => [c(h), c(0.0), c(0.0), c(-h)],
        BellState::PsiPlus => [c(0.0), c(h), c(h), c(0.0)],
        BellState::PsiMinus => [c(0.0), c(h), c(-h), c(0.0)],
    }
}

/// 4×4 density matrix of a Bell-diagonal state.
pub fn pair_density(state: &BellDiagonalState) -> Matrix {
    let mut rho = Matrix::zeros(4, 4);
    for b in BellState::ALL {
        let v = bell_vector(b);
        let w = state.population(b);
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    rho
}

/// Single-qubit operator `u` acting on `qubit` of an `n`-qubit register.
fn embed(u: &Matrix, qubit: usize, n: usize) -> Matrix {
    let mut full = Matrix::identity(1, 1);
    for q in 0..n {
        let factor = if q == qubit { u.clone() } else { Matrix::identity(2, 2) };
        full = full.kronecker(&factor);
    }
    full
}

fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

fn cnot(control: usize, target: usize, n: usize) -> Matrix {
    let dim = 1 << n;
    let mut m = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let j = if bit(i, control, n) == 1 { i ^ (1 << (n - 1 - target)) } else { i };
        m[(j, i)] = c(1.0);
    }
    m
}

fn conjugate(rho: &Matrix, u: &Matrix) -> Matrix {
    u * rho * u.adjoint()
}

/// Trace out every qubit not listed in `keep` (which must be ascending).
fn partial_trace(rho: &Matrix, keep: &[usize], n: usize) -> Matrix {
    let k = keep.len();
    let mut out = Matrix::zeros(1 << k, 1 << k);
    let dim = 1 << n;
    let reduced = |i: usize| keep.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q, n));
    let rest = |i: usize| {
        (0..n)
            .filter(|q| !keep.contains(q))
            .fold(0, |acc, q| (acc << 1) | bit(i, q, n))
    };
    for i in 0..dim {
        for j in 0..dim {
            if rest(i) == rest(j) {
                out[(reduced(i), reduced(j))] += rho[(i, j)];
            }
        }
    }
    out
}

/// Bell-basis matrix elements `⟨Bᵢ|ρ|Bⱼ⟩` of a two-qubit operator.
fn bell_matrix(rho: &Matrix) -> [[Complex64; 4]; 4] {
    let mut out = [[c(0.0); 4]; 4];
    for a in BellState::ALL {
        for b in BellState::ALL {
            let va = bell_vector(a);
            let vb = bell_vector(b);
            let mut acc = c(0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += va[i].conj() * rho[(i, j)] * vb[j];
                }
            }
            out[a.index()][b.index()] = acc;
        }
    }
    out
}

fn outcome(rho: &Matrix, success_probability: f64) -> Result<OracleOutcome> {
    let m = bell_matrix(rho);
    let pops = [0, 1, 2, 3].map(|i| m[i][i].re / success_probability);
    let mut max_coherence: f64 = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                max_coherence = max_coherence.max(x.norm() / success_probability);
            }
        }
    }
    Ok(OracleOutcome {
        success_probability,
        state: BellDiagonalState::new(pops)?,
        max_coherence,
    })
}

/// DEJMPS round on pairs `(a1, b1)` = qubits 0, 1 and `(a2, b2)` = qubits
/// 2, 3, written for `Φ⁺` and conjugated by `X` on Bob's qubits so that it
/// targets `Ψ⁺`.
fn run_purify(first: &BellDiagonalState, second: &BellDiagonalState) -> Result<OracleOutcome> {
    let n = N_QUBITS;
    let (a1, b1, a2, b2) = (0, 1, 2, 3);
    let mut rho = pair_density(first).kronecker(&pair_density(second));

    for q in [b1, b2] {
        rho = conjugate(&rho, &embed(&pauli_x(), q, n));
    }
    let quarter = std::f64::consts::FRAC_PI_2;
    for q in [a1, a2] {
        rho = conjugate(&rho, &embed(&rx(quarter), q, n));
    }
    for q in [b1, b2] {
        rho = conjugate(&rho, &embed(&rx(-quarter), q, n));
    }
    rho = conjugate(&rho, &cnot(a1, a2, n));
    rho = conjugate(&rho, &cnot(b1, b2, n));

    // Keep outcomes where the measured qubits agree.
    let dim = 1 << n;
    let mut projector = Matrix::zeros(dim, dim);
    for i in 0..dim {
        if bit(i, a2, n) == bit(i, b2, n) {
            projector[(i, i)] = c(1.0);
        }
    }
    let kept = &projector * rho * &projector;
    let success: f64 = kept.trace().re;
    if success <= 0.0 {
        return Err(Error::PurificationImpossible);
    }
    let mut reduced = partial_trace(&kept, &[a1, b1], n);
    reduced = conjugate(&reduced, &embed(&pauli_x(), 1, 2));
    outcome(&reduced, success)
}

/// Swap of `(a, b1)` = qubits 0, 1 with `(b2, c)` = qubits 2, 3.
fn run_swap(first: &BellDiagonalState, second: &BellDiagonalState) -> Result<OracleOutcome> {
    let n = N_QUBITS;
    // Qubits 1 and 2 are measured and traced out.
    let (a, cq) = (0, 3);
    let rho = pair_density(first).kronecker(&pair_density(second));
    let mut total = Matrix::zeros(4, 4);
    for m in BellState::ALL {
        // |B_m⟩⟨B_m| on (b1, b2), identity on a and c.
        let v = bell_vector(m);
        let mut proj2 = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                proj2[(i, j)] = v[i] * v[j].conj();
            }
        }
        let proj = Matrix::identity(2, 2).kronecker(&proj2).kronecker(&Matrix::identity(2, 2));
        let mut branch = &proj * &rho * &proj;
        let (x_part, z_part) = match m {
            BellState::PhiPlus => (false, false),
            BellState::PsiPlus => (true, false),
            BellState::PhiMinus => (false, true),
            BellState::PsiMinus => (true, true),
        };
        if x_part {
            branch = conjugate(&branch, &embed(&pauli_x(), cq, n));
        }
        if z_part {
            branch = conjugate(&branch, &embed(&pauli_z(), cq, n));
        }
        total += partial_trace(&branch, &[a, cq], n);
    }
    let success = total.trace().re;
    outcome(&total, success)
}

/// Run `circuit` exactly on two Bell-diagonal pairs.
pub fn brute_force_oracle(states: &[BellDiagonalState], circuit: Circuit) -> Result<OracleOutcome> {
    let [first, second] = states else {
        return Err(Error::DimensionMismatch { expected: 2, got: states.len() });
    };
    match circuit {
        Circuit::Purify => run_purify(first, second),
        Circuit::Swap => run_swap(first, second),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_pairs_purify_to_themselves() {
        let p = BellDiagonalState::PSI_PLUS;
        let out = brute_force_oracle(&[p, p], Circuit::Purify).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-12);
        assert!((out.state.fidelity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_identity_case() {
        let phi = BellDiagonalState::pure(BellState::PhiPlus);
        let out = brute_force_oracle(&[phi, phi], Circuit::Swap).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-12);
        assert!((out.state.population(BellState::PhiPlus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_pair_count() {
        let p = BellDiagonalState::PSI_PLUS;
        assert_eq!(
            brute_force_oracle(&[p], Circuit::Purify),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
        assert!(brute_force_oracle(&[p, p, p], Circuit::Swap).is_err());
    }

    #[test]
    fn density_has_unit_trace() {
        let s = BellDiagonalState::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((pair_density(&s).trace().re - 1.0).abs() < 1e-14);
    }
}
