//! Integral identities, the nonlocal potential cross-check, mass and energy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{Profile, DEFAULT_NODES};
use crate::error::Result;
use crate::shooting::{check_decayed, ShootResult};

/// Tolerance on every identity residual and on the Newton cross-check.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

/// Weighted norms of a state, all with the radial measure `r^{d-1} dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    /// `||f'||^2`
    pub grad: f64,
    /// `||r f||^2`
    pub trap: f64,
    /// `||f||^2`
    pub mass: f64,
    /// `||v'||^2`, including the exterior `K^2 R^{2-d} / (d-2)`.
    pub field: f64,
    /// `int f^2 v r^{d-1}`
    pub coupling: f64,
    /// `int f^2 v' r^d`
    pub coupling_dilation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Relative residuals keyed by identity name.
    pub residuals: BTreeMap<String, f64>,
    pub norms: Norms,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residuals.values().all(|r| r.is_finite() && *r <= tol)
    }
}

/// Sum of `terms` relative to the largest of them; zero when all vanish.
fn relative(terms: &[f64]) -> f64 {
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<f64>().abs() / scale
    }
}

/// Norms over the mesh. The disc `r < r_min` contributes `O(r_min^d)` and is
/// dropped.
pub fn norms(profile: &Profile, nodes: usize) -> Norms {
    let d = f64::from(profile.d);
    let omega = profile.omega;
    let [grad, trap, mass, field, coupling, coupling_dilation] = profile.integrate(nodes, |p| {
        let w = p.r.powf(d - 1.0);
        let v = omega - p.h;
        let f2 = p.f * p.f;
        [
            p.fp * p.fp * w,
            p.r * p.r * f2 * w,
            f2 * w,
            p.hp * p.hp * w,
            f2 * v * w,
            -f2 * p.hp * w * p.r,
        ]
    });
    // beyond R the field is negligible and h' = K r^{1-d}
    let tail = profile.samples().last().expect("profile is non-empty");
    let k = tail.hp * tail.r.powf(d - 1.0);
    let exterior = k * k * tail.r.powf(2.0 - d) / (d - 2.0);
    Norms {
        grad,
        trap,
        mass,
        field: field + exterior,
        coupling,
        coupling_dilation,
    }
}

/// Residuals of the six integral identities for `omega` and `norms`.
pub fn identity_residuals(d: u32, omega: f64, n: &Norms) -> BTreeMap<String, f64> {
    let d = f64::from(d);
    let (a, b, c, v, p, q) = (n.grad, n.trap, n.mass, n.field, n.coupling, n.coupling_dilation);
    BTreeMap::from([
        ("field_virial".to_string(), relative(&[-a, -b, omega * c, -p])),
        (
            "field_dilation".to_string(),
            relative(&[
                0.5 * (d - 2.0) * a,
                0.5 * (d + 2.0) * b,
                0.5 * d * p,
                0.5 * q,
                -0.5 * omega * d * c,
            ]),
        ),
        ("potential_virial".to_string(), relative(&[v, p])),
        ("potential_dilation".to_string(), relative(&[0.5 * (d - 2.0) * v, -q])),
        (
            "pohozaev".to_string(),
            relative(&[(d - 6.0) * a, (d + 2.0) * b, -omega * (d - 2.0) * c]),
        ),
        (
            "pohozaev_alt".to_string(),
            relative(&[8.0 * b, -(d - 6.0) * p, -4.0 * omega * c]),
        ),
    ])
}

/// Virial, dilation and Pohozaev identities evaluated on a converged state.
pub fn pohozaev_report(res: &ShootResult) -> Result<IdentityReport> {
    check_decayed(&res.profile)?;
    identity_report(&Profile::from_shoot(res)?, DEFAULT_NODES)
}

pub fn identity_report(profile: &Profile, nodes: usize) -> Result<IdentityReport> {
    let norms = norms(profile, nodes);
    Ok(IdentityReport {
        residuals: identity_residuals(profile.d, profile.omega, &norms),
        norms,
    })
}

/// Largest deviation on `grid` between `omega - h` and the Newton potential
///
/// `v_N(r) = -1/(d-2) [ r^{2-d} int_0^r f^2 s^{d-1} ds + int_r^inf f^2 s ds ]`,
///
/// relative to `|v_N(0)|`. The field is negligible beyond the profile.
pub fn newton_potential_check(res: &ShootResult, grid: &[f64]) -> Result<f64> {
    newton_deviation(&Profile::from_shoot(res)?, grid, DEFAULT_NODES)
}

pub fn newton_deviation(profile: &Profile, grid: &[f64], nodes: usize) -> Result<f64> {
    let d = f64::from(profile.d);
    let inner = |p: &super::quadrature::Point| p.f * p.f * p.r.powf(d - 1.0);
    let outer = |p: &super::quadrature::Point| p.f * p.f * p.r;
    let cum_inner = profile.cumulative(nodes, inner);
    let cum_outer = profile.cumulative(nodes, outer);
    // f is flat to O(r^2) on [0, r_min]
    let (r0, f0) = (profile.r_min(), profile.samples()[0].f);
    let (inner0, outer0) = (f0 * f0 * r0.powf(d) / d, 0.5 * f0 * f0 * r0 * r0);
    let total_outer = outer0 + cum_outer.last().expect("profile is non-empty");
    let scale = total_outer / (d - 2.0);
    let mut worst: f64 = 0.0;
    for &r in grid {
        let m = inner0 + profile.partial(nodes, &cum_inner, r, inner)?;
        let o = total_outer - outer0 - profile.partial(nodes, &cum_outer, r, outer)?;
        let v_newton = -(r.powf(2.0 - d) * m + o) / (d - 2.0);
        let v_ode = profile.omega - profile.at(r)?.h;
        worst = worst.max((v_newton - v_ode).abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Evenly spaced radii across the profile.
pub fn profile_grid(res: &ShootResult, points: usize) -> Vec<f64> {
    let s = &res.profile.samples;
    let (lo, hi) = (s[0].r, s[s.len() - 1].r);
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).min(hi))
            .collect(),
    }
}

/// Area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: u32) -> f64 {
    let half = 0.5 * f64::from(d);
    2.0 * PI.powf(half) / gamma(half)
}

/// Gamma function at positive integers and half-integers.
fn gamma(x: f64) -> f64 {
    let mut acc = if x.fract() == 0.0 { 1.0 } else { PI.sqrt() };
    let mut y = if x.fract() == 0.0 { 1.0 } else { 0.5 };
    while y < x - 0.25 {
        acc *= y;
        y += 1.0;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEnergy {
    pub mass: f64,
    pub energy: f64,
}

/// `M = S_d ||f||^2` and `E = S_d (||f'||^2 / 2 + ||r f||^2 / 2 + int f^2 v / 4)`.
pub fn mass_energy(res: &ShootResult) -> Result<MassEnergy> {
    check_decayed(&res.profile)?;
    let n = norms(&Profile::from_shoot(res)?, DEFAULT_NODES);
    Ok(mass_energy_from(res.d, &n))
}

pub fn mass_energy_from(d: u32, n: &Norms) -> MassEnergy {
    let s = sphere_area(d);
    MassEnergy {
        mass: s * n.mass,
        energy: s * (0.5 * n.grad + 0.5 * n.trap + 0.25 * n.coupling),
    }
}

/// Ground-state frequency window `[d (d-6)/(d-2), d]`.
pub fn omega_bounds(d: u32) -> (f64, f64) {
    let d = f64::from(d);
    (d * (d - 6.0) / (d - 2.0), d)
}

/// Slack allowed on both ends of the frequency window.
pub const RANGE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeCheck {
    pub lower: f64,
    pub upper: f64,
    pub omega: f64,
    /// `omega - lower`
    pub margin_lower: f64,
    /// `upper - omega`
    pub margin_upper: f64,
    pub pass: bool,
}

/// Checks `omega` against the ground-state window for dimension `d`.
pub fn omega_range(d: u32, omega: f64) -> RangeCheck {
    let (lower, upper) = omega_bounds(d);
    let margin_lower = omega - lower;
    let margin_upper = upper - omega;
    RangeCheck {
        lower,
        upper,
        omega,
        margin_lower,
        margin_upper,
        pass: margin_lower >= -RANGE_EPSILON && margin_upper >= -RANGE_EPSILON,
    }
}

/// Frequency window check for a ground state; the window does not constrain
/// excited states.
pub fn omega_range_check(res: &ShootResult) -> RangeCheck {
    omega_range(res.d, res.omega)
}
