//! Reduced radial systems and their left-endpoint initializations.
//!
//! Regular mode integrates `(f, f', h, h')` in `r`, where `h = omega - v`
//! absorbs the frequency. Singular mode factors out `2(d-4)/r^2` from both
//! fields and integrates the deviations `(eta, eta', xi, xi')` in `t = ln r`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::problem::{Mode, ProblemSpec};

/// One point of a trajectory.
///
/// In singular mode the same record carries `(t, eta, eta_dot, xi, xi_dot)`
/// with `t = ln r`, `eta = f~ - 1` and `xi = h~ - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub r: f64,
    pub f: f64,
    pub fp: f64,
    pub h: f64,
    pub hp: f64,
}

/// Derivative of `(f, f', h, h')` with respect to the independent variable.
pub type Derivative = [f64; 4];

impl State {
    pub fn new(r: f64, f: f64, fp: f64, h: f64, hp: f64) -> Self {
        State { r, f, fp, h, hp }
    }

    pub fn from_parts(x: f64, y: &[f64; 4]) -> Self {
        State::new(x, y[0], y[1], y[2], y[3])
    }

    pub fn components(&self) -> [f64; 4] {
        [self.f, self.fp, self.h, self.hp]
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.components().iter().all(|v| v.is_finite())
    }
}

/// Prefactor `2(d-4)` of the singular solution `f = 2(d-4)/r^2`.
pub fn singular_scale(d: u32) -> f64 {
    2.0 * (f64::from(d) - 4.0)
}

#[inline]
pub(crate) fn regular_field(r: f64, y: &[f64; 4], d: f64) -> Derivative {
    let [f, fp, h, hp] = *y;
    let damping = (d - 1.0) / r;
    [fp, r * r * f - f * h - damping * fp, hp, -f * f - damping * hp]
}

#[inline]
pub(crate) fn singular_field(t: f64, y: &[f64; 4], d: f64) -> Derivative {
    let [eta, eta_dot, xi, xi_dot] = *y;
    let k = 2.0 * (d - 4.0);
    let friction = d - 6.0;
    let forcing = (4.0 * t).exp() * (1.0 + eta);
    [
        eta_dot,
        forcing - k * eta * xi - friction * eta_dot - k * xi,
        xi_dot,
        -k * eta * eta - friction * xi_dot - k * (2.0 * eta - xi),
    ]
}

/// Right-hand side of the regular system in `r`.
pub fn rhs_regular(s: &State, d: u32) -> Result<Derivative> {
    if !s.is_finite() || s.r <= 0.0 {
        return Err(SolverError::InvalidState { x: s.r });
    }
    Ok(regular_field(s.r, &s.components(), f64::from(d)))
}

/// Right-hand side of the singular deviation system in `t = ln r`,
/// including the `e^{4t}` trap forcing.
pub fn rhs_singular(s: &State, d: u32) -> Result<Derivative> {
    if !s.is_finite() {
        return Err(SolverError::InvalidState { x: s.r });
    }
    Ok(singular_field(s.r, &s.components(), f64::from(d)))
}

/// Taylor coefficients `(f2, f4, h2, h4)` of the regular solution with
/// `f(0) = b`, `h(0) = c`.
pub fn regular_series_coefficients(b: f64, c: f64, d: u32) -> (f64, f64, f64, f64) {
    let d = f64::from(d);
    let f2 = -b * c / (2.0 * d);
    let h2 = -b * b / (2.0 * d);
    let f4 = (b - b * h2 - c * f2) / (4.0 * (d + 2.0));
    let h4 = -b * f2 / (2.0 * (d + 2.0));
    (f2, f4, h2, h4)
}

/// Start radius used for a regular shot. Large central values shrink the
/// core to `r ~ 1/sqrt(b)`, so the series window is scaled to keep
/// `max(b, |c|) r^2` below `1e-4`.
pub fn regular_start_radius(b: f64, c: f64, spec: &ProblemSpec) -> f64 {
    let scale = b.abs().max(c.abs()).max(1.0);
    spec.r_start.min(1e-2 / scale.sqrt())
}

/// State at the regular start radius from the local power series.
pub fn series_start_regular(b: f64, c: f64, spec: &ProblemSpec) -> Result<State> {
    if spec.mode != Mode::Regular {
        return Err(SolverError::InvalidSpec(
            "series start requires regular mode".into(),
        ));
    }
    if !(b.is_finite() && b >= 0.0 && c.is_finite()) {
        return Err(SolverError::InvalidSpec(format!(
            "central values must be finite with b >= 0, got b = {b}, c = {c}"
        )));
    }
    let r = regular_start_radius(b, c, spec);
    Ok(series_state(b, c, spec.d, r))
}

pub(crate) fn series_state(b: f64, c: f64, d: u32, r: f64) -> State {
    let (f2, f4, h2, h4) = regular_series_coefficients(b, c, d);
    let r2 = r * r;
    State::new(
        r,
        b + f2 * r2 + f4 * r2 * r2,
        2.0 * f2 * r + 4.0 * f4 * r2 * r,
        c + h2 * r2 + h4 * r2 * r2,
        2.0 * h2 * r + 4.0 * h4 * r2 * r,
    )
}

/// A pair of roots of a real quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RootPair {
    /// `(plus, minus)`.
    Real(f64, f64),
    /// `re +/- i im`.
    Complex { re: f64, im: f64 },
}

/// Spectrum of the linearization of the singular system about `eta = xi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalues {
    pub lambda1: RootPair,
    /// `(lambda2_plus, lambda2_minus)`.
    pub lambda2: (f64, f64),
    /// Dominant unstable exponent `lambda2_plus`.
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    /// True when `lambda1` is a complex pair, i.e. `d < 10 + 4 sqrt(2)`.
    pub oscillatory_lambda1: bool,
}

pub fn eigenvalues(d: u32) -> Result<Eigenvalues> {
    if d < 7 {
        return Err(SolverError::Domain {
            d,
            reason: "the linearized singular system is hyperbolic only for d >= 7",
        });
    }
    let df = f64::from(d);
    let beta = 3.0 - df / 2.0;
    let disc1 = df * df - 20.0 * df + 68.0;
    let disc2 = df * df + 4.0 * df - 28.0;
    let alpha1 = 0.5 * disc1.abs().sqrt();
    let alpha2 = 0.5 * disc2.sqrt();
    let oscillatory = disc1 < 0.0;
    let lambda1 = if oscillatory {
        RootPair::Complex {
            re: beta,
            im: alpha1,
        }
    } else {
        RootPair::Real(beta + alpha1, beta - alpha1)
    };
    Ok(Eigenvalues {
        lambda1,
        lambda2: (beta + alpha2, beta - alpha2),
        lambda: beta + alpha2,
        alpha1,
        alpha2,
        beta,
        oscillatory_lambda1: oscillatory,
    })
}

/// Largest admissible `|c| e^{lambda t0}` for the manifold start.
pub const MANIFOLD_AMPLITUDE_LIMIT: f64 = 1e-6;
/// Largest admissible `e^{4 t0}`, keeping the neglected forcing subdominant.
pub const MANIFOLD_FORCING_LIMIT: f64 = 1e-8;

/// Point on the one-dimensional unstable manifold at `t0 = ln r_start`.
pub fn manifold_start_singular(c: f64, spec: &ProblemSpec) -> Result<State> {
    if spec.mode != Mode::Singular {
        return Err(SolverError::InvalidSpec(
            "manifold start requires singular mode".into(),
        ));
    }
    if !c.is_finite() {
        return Err(SolverError::Initialization(format!(
            "non-finite manifold amplitude {c}"
        )));
    }
    let eig = eigenvalues(spec.d)?;
    let t0 = spec.r_start.ln();
    let growth = (eig.lambda * t0).exp();
    if c.abs() * growth > MANIFOLD_AMPLITUDE_LIMIT {
        return Err(SolverError::Initialization(format!(
            "|c| r_start^lambda = {:e} exceeds {MANIFOLD_AMPLITUDE_LIMIT:e}; shrink r_start below {:e}",
            c.abs() * growth,
            (MANIFOLD_AMPLITUDE_LIMIT / c.abs()).powf(1.0 / eig.lambda)
        )));
    }
    if (4.0 * t0).exp() > MANIFOLD_FORCING_LIMIT {
        return Err(SolverError::Initialization(format!(
            "r_start^4 = {:e} exceeds {MANIFOLD_FORCING_LIMIT:e}; shrink r_start",
            (4.0 * t0).exp()
        )));
    }
    let amp = c * growth;
    Ok(State::new(
        t0,
        -amp,
        -amp * eig.lambda,
        2.0 * amp,
        2.0 * amp * eig.lambda,
    ))
}

/// Maps a singular-mode record `(t, eta, eta', xi, xi')` to physical
/// `(r, f, f', h, h')`.
pub fn singular_to_physical(s: &State, d: u32) -> State {
    let k = singular_scale(d);
    let r = s.r.exp();
    let inv_r2 = 1.0 / (r * r);
    let f_red = 1.0 + s.f;
    let h_red = 1.0 + s.h;
    State::new(
        r,
        k * f_red * inv_r2,
        k * (s.fp - 2.0 * f_red) * inv_r2 / r,
        k * h_red * inv_r2,
        k * (s.hp - 2.0 * h_red) * inv_r2 / r,
    )
}
