//! Entanglement distribution with a bright coherent probe.
//!
//! A probe in coherent state `|α⟩` picks up a conditional phase `θ` from each
//! of two qubits at neighbouring stations. A homodyne measurement of the
//! probe's `p` quadrature then distinguishes the "no net rotation" branch
//! (which carries `|Ψ⁺⟩`) from the two branches rotated by `±θ` (which carry
//! `|00⟩` and `|11⟩`). Keeping only results with `|p| < p_c` postselects a
//! noisy `|Ψ⁺⟩`.
//!
//! Channel loss (amplitude transmission `η`) both shrinks the probe,
//! `α → ηα` and `d → ηd` inside the amplitudes, and leaks which-path
//! information, damping the `Ψ⁺`/`Ψ⁻` coherence by `e^{-γ}`.
//!
//! All functions here are pure and cheap; the windowed integrals are taken in
//! closed form through `erf`.

use std::f64::consts::{FRAC_2_PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell_algebra::BellDiagonalState;
use crate::search::grid_seeded_max;
use crate::{Error, Result};

/// Phase shift per qubit-probe interaction assumed when a physical probe
/// amplitude has to be recovered from a distinguishability.
pub const DEFAULT_THETA: f64 = 0.01;

/// Upper end of the distinguishability search interval.
pub const MAX_DISTINGUISHABILITY: f64 = 5.0;

/// Absolute tolerance on the optimal distinguishability.
pub const OPTIMIZER_TOLERANCE: f64 = 1e-6;

const OPTIMIZER_GRID: usize = 100;

/// Tolerance below zero accepted for a diagonal element before it is treated
/// as an arithmetic fault.
const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// How the damping exponent `γ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaForm {
    /// `γ = α²(1−η²)(1−cos θ)`.
    #[default]
    Exact,
    /// `γ ≈ ½(1−η²)d²`, the form the operating-point optimisation uses.
    SmallAngle,
}

/// Physical parameters of one distribution attempt over one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    /// Probe amplitude, real and non-negative.
    pub alpha: f64,
    /// Conditional phase per interaction, radians in `(0, π/2)`.
    pub theta: f64,
    /// Amplitude transmission of the segment; power transmission is `η²`.
    pub eta: f64,
    /// Half-width of the accepted homodyne window.
    pub p_c: f64,
    pub gamma_form: GammaForm,
    /// Keep the loss-induced phase `ξ` instead of assuming it is compensated.
    pub retain_xi: bool,
}

impl ProbeParams {
    pub fn new(alpha: f64, theta: f64, eta: f64, p_c: f64) -> Result<Self> {
        let params = ProbeParams {
            alpha,
            theta,
            eta,
            p_c,
            gamma_form: GammaForm::Exact,
            retain_xi: false,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with probe amplitude `α = d / sin θ`.
    pub fn from_distinguishability(d: f64, theta: f64, eta: f64, p_c: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::param("d", format!("must be finite and >= 0, got {d}")));
        }
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param("theta", format!("must lie in (0, pi/2), got {theta}")));
        }
        Self::new(d / theta.sin(), theta, eta, p_c)
    }

    pub fn with_gamma_form(mut self, form: GammaForm) -> Self {
        self.gamma_form = form;
        self
    }

    pub fn with_retained_xi(mut self, retain: bool) -> Self {
        self.retain_xi = retain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param("theta", format!("must lie in (0, pi/2), got {}", self.theta)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.p_c >= 0.0) || self.p_c.is_nan() {
            return Err(Error::param("p_c", format!("must be >= 0, got {}", self.p_c)));
        }
        Ok(())
    }

    /// Separation `d = α sin θ` of the probe's conditional peaks.
    pub fn distinguishability(&self) -> f64 {
        self.alpha * self.theta.sin()
    }

    /// `b_s = √2 (p_c + s η d)`.
    fn window_edge(&self, branch: Branch) -> f64 {
        SQRT_2 * (self.p_c + branch.sign() * self.eta * self.distinguishability())
    }
}

/// Which probe branch an amplitude belongs to: rotated by `+θ`, unrotated, or
/// rotated by `−θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Minus,
    Zero,
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Zero => 0.0,
            Branch::Plus => 1.0,
        }
    }
}

/// Loss-induced damping exponent and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoherence {
    pub gamma: f64,
    pub xi: f64,
}

/// The four Bell-basis diagonal elements of the unnormalised conditional
/// density matrix at one homodyne result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalDiagonal {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl ConditionalDiagonal {
    pub fn trace(&self) -> f64 {
        self.psi_plus + self.psi_minus + self.phi_plus + self.phi_minus
    }
}

/// Optimal distinguishability for a fixed window and channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub d_opt: f64,
    pub f_max: f64,
    pub p_s: f64,
    /// The optimum sits on the upper search bound; the true supremum may lie
    /// beyond it.
    pub boundary_hit: bool,
}

pub fn distinguishability(params: &ProbeParams) -> f64 {
    params.distinguishability()
}

pub fn decoherence_params(params: &ProbeParams) -> Decoherence {
    let loss = 1.0 - params.eta * params.eta;
    let gamma = match params.gamma_form {
        GammaForm::Exact => params.alpha * params.alpha * loss * (1.0 - params.theta.cos()),
        GammaForm::SmallAngle => {
            let d = params.distinguishability();
            0.5 * loss * d * d
        }
    };
    let xi = params.alpha * params.alpha * loss * params.theta.sin();
    Decoherence { gamma, xi }
}

/// `ξ` as it enters the state: zero unless the parameters ask to keep it.
fn effective_xi(params: &ProbeParams, dec: &Decoherence) -> f64 {
    if params.retain_xi {
        dec.xi
    } else {
        0.0
    }
}

/// Branch amplitude `C_s(p) = G_s(p) K_s(p)` with the lossy substitutions
/// `α → ηα`, `d → ηd`.
pub fn amplitude_c(p: f64, branch: Branch, params: &ProbeParams) -> Complex64 {
    let eta_alpha = params.eta * params.alpha;
    let eta_d = params.eta * params.distinguishability();
    let s = branch.sign();
    let gaussian = FRAC_2_PI.sqrt().sqrt() * (-(p - s * eta_d).powi(2)).exp();
    let phase = match branch {
        Branch::Zero => -2.0 * eta_alpha * p,
        Branch::Plus | Branch::Minus => -eta_alpha * params.theta.cos() * (2.0 * p - s * eta_d),
    };
    Complex64::from_polar(gaussian, phase)
}

pub fn conditional_diagonal(p: f64, params: &ProbeParams) -> Result<ConditionalDiagonal> {
    let dec = decoherence_params(params);
    let xi = effective_xi(params, &dec);
    let damping = (-dec.gamma).exp();
    let c0 = amplitude_c(p, Branch::Zero, params);
    let c_plus = amplitude_c(p, Branch::Plus, params);
    let c_minus = amplitude_c(p, Branch::Minus, params);

    let psi_coherence = damping * xi.cos();
    let psi_plus = c0.norm_sqr() * (1.0 + psi_coherence) / 4.0;
    let psi_minus = c0.norm_sqr() * (1.0 - psi_coherence) / 4.0;
    let phi_mean = (c_plus.norm_sqr() + c_minus.norm_sqr()) / 8.0;
    let phi_cross = damping * (Complex64::from_polar(1.0, xi) * c_plus * c_minus.conj()).re / 4.0;

    let diag = ConditionalDiagonal {
        psi_plus,
        psi_minus,
        phi_plus: phi_mean + phi_cross,
        phi_minus: phi_mean - phi_cross,
    };
    for (element, value) in [
        ("psi_plus", diag.psi_plus),
        ("psi_minus", diag.psi_minus),
        ("phi_plus", diag.phi_plus),
        ("phi_minus", diag.phi_minus),
    ] {
        if value < -NEGATIVITY_TOLERANCE {
            return Err(Error::NegativePopulation { element, value });
        }
    }
    Ok(diag)
}

fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn success_probability(params: &ProbeParams) -> f64 {
    let e0 = erf(params.window_edge(Branch::Zero));
    let e_plus = erf(params.window_edge(Branch::Plus));
    let e_minus = erf(params.window_edge(Branch::Minus));
    e0 / 2.0 + e_plus / 4.0 + e_minus / 4.0
}

/// Window-integrated diagonal elements (unnormalised, summing to `P_s`).
fn integrated_diagonal(params: &ProbeParams) -> [f64; 4] {
    let dec = decoherence_params(params);
    let xi = effective_xi(params, &dec);
    let damping = (-dec.gamma).exp();
    let eta_d = params.eta * params.distinguishability();
    let e0 = erf(params.window_edge(Branch::Zero));
    let e_plus = erf(params.window_edge(Branch::Plus));
    let e_minus = erf(params.window_edge(Branch::Minus));

    // G_{+1} G_{-1} = sqrt(2/pi) exp(-2p^2) exp(-2 (eta d)^2), and the phase of
    // C_{+1} C_{-1}^* is the constant 2 eta^2 alpha d cos(theta).
    let cross_phase = 2.0 * params.eta * params.alpha * eta_d * params.theta.cos();
    let cross = damping * (-2.0 * eta_d * eta_d).exp() * e0 * (cross_phase + xi).cos() / 4.0;
    let phi_mean = (e_plus + e_minus) / 8.0;
    [
        e0 * (1.0 + damping * xi.cos()) / 4.0,
        e0 * (1.0 - damping * xi.cos()) / 4.0,
        phi_mean + cross,
        phi_mean - cross,
    ]
}

fn require_window(params: &ProbeParams) -> Result<f64> {
    params.validate()?;
    let p_s = success_probability(params);
    if params.p_c == 0.0 || p_s <= 0.0 {
        return Err(Error::UndefinedFidelity { p_c: params.p_c });
    }
    Ok(p_s)
}

/// Average `Ψ⁺` fidelity of the postselected pair.
pub fn postselected_fidelity(params: &ProbeParams) -> Result<f64> {
    let p_s = require_window(params)?;
    Ok(integrated_diagonal(params)[0] / p_s)
}

/// The postselected pair truncated to its Bell-diagonal part.
pub fn postselected_state(params: &ProbeParams) -> Result<BellDiagonalState> {
    let p_s = require_window(params)?;
    let v = integrated_diagonal(params).map(|x| (x / p_s).max(0.0));
    BellDiagonalState::new(v)
}

/// Distinguishability maximising the postselected fidelity for window `p_c`
/// and amplitude transmission `eta`, using the small-angle damping.
pub fn optimize_distinguishability(p_c: f64, eta: f64) -> Result<OperatingPoint> {
    if !(p_c > 0.0 && p_c.is_finite()) {
        return Err(Error::param("p_c", format!("must be finite and > 0, got {p_c}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", format!("must lie in (0, 1], got {eta}")));
    }
    let at = |d: f64| {
        ProbeParams::from_distinguishability(d, DEFAULT_THETA, eta, p_c)
            .map(|p| p.with_gamma_form(GammaForm::SmallAngle))
    };
    let fidelity = |d: f64| at(d).and_then(|p| postselected_fidelity(&p)).unwrap_or(f64::NEG_INFINITY);
    let best = grid_seeded_max(
        fidelity,
        0.0,
        MAX_DISTINGUISHABILITY,
        OPTIMIZER_GRID,
        OPTIMIZER_TOLERANCE,
    );
    // A plateau that reaches the upper bound counts as a boundary optimum.
    let d_opt = if fidelity(MAX_DISTINGUISHABILITY) >= best.value {
        MAX_DISTINGUISHABILITY
    } else {
        best.x
    };
    let params = at(d_opt)?;
    Ok(OperatingPoint {
        d_opt,
        f_max: postselected_fidelity(&params)?,
        p_s: success_probability(&params),
        boundary_hit: (MAX_DISTINGUISHABILITY - d_opt).abs() <= OPTIMIZER_TOLERANCE,
    })
}

/// Operating-point parameters with a physical amplitude `α = d_opt / sin θ`.
pub fn operating_params(point: &OperatingPoint, theta: f64, eta: f64, p_c: f64) -> Result<ProbeParams> {
    Ok(ProbeParams::from_distinguishability(point.d_opt, theta, eta, p_c)?.with_gamma_form(GammaForm::SmallAngle))
}

/// Controlled phase `φ ≈ T(1+T)α²θ²` of the probe-mediated two-qubit gate.
pub fn gate_phase(transmission_t: f64, alpha: f64, theta: f64) -> f64 {
    debug_assert!(transmission_t > 0.0 && transmission_t <= 1.0);
    transmission_t * (1.0 + transmission_t) * alpha * alpha * theta * theta
}

/// Power transmission `η²` of a fibre span.
pub fn fiber_transmission(length_km: f64, loss_db_per_km: f64) -> f64 {
    debug_assert!(length_km >= 0.0 && loss_db_per_km >= 0.0);
    10f64.powf(-loss_db_per_km * length_km / 10.0)
}
