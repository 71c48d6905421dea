//! One-dimensional maximization by golden-section search.
//!
//! The search keeps four abscissae `a < x1 < x2 < b` where the two interior
//! points split the bracket in the golden ratio, so each iteration reuses one
//! function value and costs a single new evaluation:
//!
//! ```text
//!   a        x1     x2        b
//!   +--------+------+---------+
//! ```
//!
//! If `f(x1) >= f(x2)` the maximum lies in `[a, x2]`, otherwise in `[x1, b]`.

/// 1/φ, the fraction of the bracket kept each iteration.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// The maximizer sits on one end of the searched interval.
    pub at_boundary: bool,
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    assert!(lo <= hi, "empty bracket [{lo}, {hi}]");
    assert!(tol > 0.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 >= f2 {
        Maximum { x: x1, value: f1, at_boundary: false }
    } else {
        Maximum { x: x2, value: f2, at_boundary: false }
    };
    // The interior points never touch the ends; check them explicitly so a
    // monotone objective reports its boundary optimum.
    for end in [lo, hi] {
        let v = f(end);
        if v > best.value {
            best = Maximum { x: end, value: v, at_boundary: true };
        }
    }
    if (best.x - lo).abs() <= tol || (hi - best.x).abs() <= tol {
        best.at_boundary = true;
    }
    best
}

/// Coarse grid scan over `(lo, hi]` followed by golden-section refinement in
/// the bracket around the best grid point.
pub fn grid_seeded_max<F>(f: F, lo: f64, hi: f64, grid_points: usize, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    assert!(grid_points >= 2);
    let step = (hi - lo) / grid_points as f64;
    let xs: Vec<f64> = (1..=grid_points).map(|i| lo + step * i as f64).collect();
    let (best_idx, _) = xs
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let left = if best_idx == 0 { lo + step * 1e-3 } else { xs[best_idx - 1] };
    let right = xs[(best_idx + 1).min(grid_points - 1)];
    let mut m = golden_section_max(&f, left, right, tol);
    m.at_boundary = (hi - m.x).abs() <= tol || (m.x - lo).abs() <= step;
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 1.3).powi(2), 0.0, 5.0, 1e-9);
        assert!((m.x - 1.3).abs() < 1e-8);
        assert!(!m.at_boundary);
    }

    #[test]
    fn monotone_hits_upper_end() {
        let m = golden_section_max(|x| x, 0.0, 2.0, 1e-9);
        assert_eq!(m.x, 2.0);
        assert!(m.at_boundary);
    }

    #[test]
    fn grid_seed_escapes_flat_tail() {
        // Narrow peak that a bare golden search over [0, 5] would miss.
        let f = |x: f64| (-(x - 4.2_f64).powi(2) * 50.0).exp();
        let m = grid_seeded_max(f, 0.0, 5.0, 100, 1e-8);
        assert!((m.x - 4.2).abs() < 1e-6);
    }
}
