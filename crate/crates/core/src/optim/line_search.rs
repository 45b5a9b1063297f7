use crate::error::{Error, Result};

pub const MAX_BISECTIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchResult {
    pub eta: f64,
    pub value: f64,
    pub trials: usize,
    /// The Wolfe conditions were not both met; `eta` is the best fallback.
    pub early_exit: bool,
}

/// Weak Wolfe bisection in ascent form.
///
/// `phi(η)` returns `(φ(η), φ'(η))`. Accepts `η` with
/// `φ(η) ≥ φ(0) + c₁ηφ'(0)` and `φ'(η) ≤ c₂φ'(0)`. The bracket `[lo, hi]`
/// starts at `[0, ∞)`; a failed increase test shrinks `hi`, a failed
/// curvature test raises `lo`, and the next trial is the midpoint or `2·lo`
/// while `hi` is unbounded.
pub fn weak_wolfe_bisection(
    mut phi: impl FnMut(f64) -> Result<(f64, f64)>,
    phi0: f64,
    dphi0: f64,
    eta0: f64,
    c1: f64,
    c2: f64,
) -> Result<LineSearchResult> {
    let mut lo = 0.0;
    let mut lo_value = phi0;
    let mut hi = f64::INFINITY;
    let mut eta = eta0;
    let mut best: Option<(f64, f64)> = None;
    for trial in 1..=MAX_BISECTIONS {
        let (v, dv) = phi(eta)?;
        if v > phi0 && best.map_or(true, |(_, bv)| v > bv) {
            best = Some((eta, v));
        }
        if !(v >= phi0 + c1 * eta * dphi0) {
            hi = eta;
        } else if dv > c2 * dphi0 {
            lo = eta;
            lo_value = v;
        } else {
            return Ok(LineSearchResult {
                eta,
                value: v,
                trials: trial,
                early_exit: false,
            });
        }
        eta = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
    }
    let (eta, value) = if lo > 0.0 {
        (lo, lo_value)
    } else {
        best.ok_or(Error::NoImprovement)?
    };
    Ok(LineSearchResult {
        eta,
        value,
        trials: MAX_BISECTIONS,
        early_exit: true,
    })
}

/// `max(λ + ηd, 0)`
pub fn pga_step(lambda: &[f64], d: &[f64], eta: f64) -> Vec<f64> {
    lambda.iter().zip(d).map(|(l, v)| (l + eta * v).max(0.0)).collect()
}
