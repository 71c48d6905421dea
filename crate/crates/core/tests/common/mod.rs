//! Direct numerical integration of the conditional two-qubit state, written
//! from the amplitude formulas alone.

#![allow(dead_code)]

use num_complex::Complex64;
use repeaterlab::probe_model::{GammaForm, ProbeParams};

const QUAD_TOLERANCE: f64 = 1e-13;

fn gaussian(p: f64, centre: f64) -> f64 {
    (2.0 / std::f64::consts::PI).powf(0.25) * (-(p - centre).powi(2)).exp()
}

/// `C_s(p)` with the lossy substitutions `α → ηα`, `d → ηd`.
pub fn amplitude(p: f64, s: i32, params: &ProbeParams) -> Complex64 {
    let eta_alpha = params.eta * params.alpha;
    let eta_d = params.eta * params.alpha * params.theta.sin();
    let g = gaussian(p, s as f64 * eta_d);
    let phase = if s == 0 {
        -2.0 * eta_alpha * p
    } else {
        -eta_alpha * params.theta.cos() * (2.0 * p - s as f64 * eta_d)
    };
    Complex64::from_polar(g, phase)
}

pub fn gamma_xi(params: &ProbeParams) -> (f64, f64) {
    let loss = 1.0 - params.eta * params.eta;
    let a2 = params.alpha * params.alpha;
    let gamma = match params.gamma_form {
        GammaForm::Exact => a2 * loss * (1.0 - params.theta.cos()),
        GammaForm::SmallAngle => 0.5 * loss * (params.alpha * params.theta.sin()).powi(2),
    };
    let xi = if params.retain_xi { a2 * loss * params.theta.sin() } else { 0.0 };
    (gamma, xi)
}

/// Diagonal of the unnormalised conditional state at homodyne result `p`,
/// ordered `Ψ⁺, Ψ⁻, Φ⁺, Φ⁻`.
pub fn diagonal_at(p: f64, params: &ProbeParams) -> [f64; 4] {
    let (gamma, xi) = gamma_xi(params);
    let coherence = Complex64::from_polar((-gamma).exp(), xi);
    let c0 = amplitude(p, 0, params).norm_sqr();
    let c1 = amplitude(p, 1, params);
    let cm1 = amplitude(p, -1, params);
    let outer = (c1.norm_sqr() + cm1.norm_sqr()) / 8.0;
    let cross = (coherence * c1 * cm1.conj()).re / 4.0;
    [
        c0 * (1.0 + coherence).re / 4.0,
        c0 * (1.0 - coherence).re / 4.0,
        outer + cross,
        outer - cross,
    ]
}

/// Window integrals of the four diagonal elements over `|p| < p_c`.
pub fn integrated_diagonal(params: &ProbeParams) -> [f64; 4] {
    std::array::from_fn(|k| {
        quadrature::double_exponential::integrate(|p| diagonal_at(p, params)[k], -params.p_c, params.p_c, QUAD_TOLERANCE)
            .integral
    })
}

pub fn success_probability(params: &ProbeParams) -> f64 {
    integrated_diagonal(params).iter().sum()
}

pub fn fidelity(params: &ProbeParams) -> f64 {
    let v = integrated_diagonal(params);
    v[0] / v.iter().sum::<f64>()
}
