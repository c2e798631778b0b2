//! Asymptotic laws for `omega(b)` near the bifurcation and at large amplitude.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sweep::SweepRecord;
use crate::error::{Result, SolverError};
use crate::ode::eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    Bifurcation,
    LargeBOscillation,
    OmegaInfLaw,
}

/// Parameters and residual of an asymptotic fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    /// Maximum relative deviation over `window`.
    pub residual: f64,
    /// `(b_lo, b_hi)` or `(d_lo, d_hi)`.
    pub window: (f64, f64),
}

/// Largest amplitude in the bifurcation window.
pub const BIFURCATION_WINDOW: f64 = 0.1;

/// `k_d` in `omega = d - k_d b^2 + O(b^3)`, equal to `1 / (2^{d/2} (d-2))`.
pub fn bifurcation_coefficient(d: u32) -> f64 {
    let d = f64::from(d);
    1.0 / (2f64.powf(0.5 * d) * (d - 2.0))
}

fn points(curve: &[SweepRecord], keep: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    curve
        .iter()
        .filter(|r| r.is_ok() && r.omega.is_finite() && keep(r.b))
        .map(|r| (r.b, r.omega))
        .collect()
}

fn window(pts: &[(f64, f64)]) -> (f64, f64) {
    pts.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)))
}

/// Compares the curve with `d - k_d b^2` on `b <= 0.1`.
///
/// `params`: `coefficient` (closed form), `fitted_coefficient` (least squares
/// of `d - omega` on `b^2`) and `c3 = max |omega - formula| / b^3`. The
/// residual is the deviation relative to the `b^2` term.
pub fn fit_bifurcation(curve: &[SweepRecord], d: u32) -> Result<FitReport> {
    let pts = points(curve, |b| b <= BIFURCATION_WINDOW);
    if pts.is_empty() {
        return Err(SolverError::FitDomain(format!(
            "no converged points with b <= {BIFURCATION_WINDOW}"
        )));
    }
    let k = bifurcation_coefficient(d);
    let df = f64::from(d);
    let (mut c3, mut residual) = (0.0f64, 0.0f64);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(b, w) in &pts {
        let dev = (w - (df - k * b * b)).abs();
        c3 = c3.max(dev / b.powi(3));
        residual = residual.max(dev / (k * b * b));
        sxy += (df - w) * b * b;
        sxx += b.powi(4);
    }
    Ok(FitReport {
        model: FitModel::Bifurcation,
        params: BTreeMap::from([
            ("coefficient".to_string(), k),
            ("fitted_coefficient".to_string(), sxy / sxx),
            ("c3".to_string(), c3),
        ]),
        residual,
        window: window(&pts),
    })
}

/// `omega_inf + A b^{beta/2} sin(alpha1 ln sqrt(b) + delta)`.
pub fn large_b_model(d: u32, omega_inf: f64, amplitude: f64, phase: f64, b: f64) -> Result<f64> {
    let e = eigenvalues(d)?;
    Ok(omega_inf + amplitude * b.powf(0.5 * e.beta) * (e.alpha1 * b.sqrt().ln() + phase).sin())
}

/// Least-squares `(A, delta)` of the large-amplitude law with `beta` and
/// `alpha1` fixed by the eigenvalues of dimension `d`.
///
/// Oscillations only exist for `7 <= d <= 15`; the window must span at least
/// one full period `2 pi / alpha1` in `ln sqrt(b)`. The residual is the worst
/// misfit relative to the largest `|omega - omega_inf|` in the window.
pub fn fit_large_b(curve: &[SweepRecord], d: u32, omega_inf: f64) -> Result<FitReport> {
    if !(7..=15).contains(&d) {
        return Err(SolverError::ModelNotApplicable(format!(
            "no large-b oscillation in dimension {d}"
        )));
    }
    let e = eigenvalues(d)?;
    let pts = points(curve, |b| b > 0.0);
    let (lo, hi) = window(&pts);
    let period = 2.0 * std::f64::consts::PI / e.alpha1;
    if pts.len() < 3 || 0.5 * (hi / lo).ln() < period {
        return Err(SolverError::FitDomain(format!(
            "window spans {:.3} in ln sqrt(b); need {period:.3}",
            0.5 * (hi / lo).ln().max(0.0)
        )));
    }
    // omega - omega_inf = p s + q c with s, c the enveloped sine and cosine
    let (mut ss, mut sc, mut cc, mut sy, mut cy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(b, w) in &pts {
        let env = b.powf(0.5 * e.beta);
        let x = e.alpha1 * b.sqrt().ln();
        let (s, c) = (env * x.sin(), env * x.cos());
        let y = w - omega_inf;
        ss += s * s;
        sc += s * c;
        cc += c * c;
        sy += s * y;
        cy += c * y;
    }
    let det = ss * cc - sc * sc;
    let p = (sy * cc - cy * sc) / det;
    let q = (cy * ss - sy * sc) / det;
    let (amplitude, phase) = (p.hypot(q), q.atan2(p));
    let scale = pts.iter().map(|&(_, w)| (w - omega_inf).abs()).fold(0.0, f64::max);
    let misfit = pts
        .iter()
        .map(|&(b, w)| large_b_model(d, omega_inf, amplitude, phase, b).map(|m| (m - w).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(FitReport {
        model: FitModel::LargeBOscillation,
        params: BTreeMap::from([
            ("A_tilde".to_string(), amplitude),
            ("delta_tilde".to_string(), phase),
            ("beta".to_string(), e.beta),
            ("alpha1".to_string(), e.alpha1),
            ("omega_inf".to_string(), omega_inf),
        ]),
        residual: if scale > 0.0 { misfit / scale } else { misfit },
        window: (lo, hi),
    })
}
