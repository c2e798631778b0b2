//! Singular states, diverging like `2(d-4)/r^2` at the origin.
//!
//! Runs start on the unstable manifold of the reduced system in `t = ln r`,
//! parametrised by the amplitude `c` in `f~ = 1 - c r^lambda`, and are
//! classified with the same trichotomy as regular shots. The limiting
//! frequency `omega_inf` is read off the tail exactly as in the regular case.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{FitModel, FitReport};
use crate::error::{Result, SolverError};
use crate::interp::{hermite5, interval_index};
use crate::ode::{
    eigenvalues, integrate, manifold_start_singular, singular_field, singular_scale, EventSet,
    Termination, Trajectory, MANIFOLD_AMPLITUDE_LIMIT,
};
use crate::problem::{Mode, ProblemSpec};
use crate::shooting::{
    bisect, omega_extract, reliable_cut, seek_upper, truncate, Bracket, ClassKind, Classification,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularResult {
    pub d: u32,
    pub c_star: f64,
    pub n: usize,
    pub omega_inf: f64,
    /// Log-variable run `(t, eta, eta', xi, xi')`, truncated at `r_reliable`.
    pub profile: Trajectory,
    pub bracket_width: f64,
    pub r_reliable: f64,
}

fn singular_spec(d: u32, spec: &ProblemSpec) -> Result<ProblemSpec> {
    let mut s = spec.clone();
    s.d = d;
    s.mode = Mode::Singular;
    s.validate()?;
    Ok(s)
}

/// Start radius meeting the manifold amplitude bound for amplitude `c`.
fn start_radius(c: f64, spec: &ProblemSpec) -> Result<f64> {
    let lambda = eigenvalues(spec.d)?.lambda;
    if c == 0.0 {
        return Ok(spec.r_start);
    }
    let bound = (0.5 * MANIFOLD_AMPLITUDE_LIMIT / c.abs()).powf(1.0 / lambda);
    Ok(spec.r_start.min(bound))
}

pub(crate) fn singular_run(c: f64, n_target: usize, spec: &ProblemSpec, with_floor: bool) -> Result<Trajectory> {
    let start_spec = spec.clone().with_r_start(start_radius(c, spec)?)?;
    let start = manifold_start_singular(c, &start_spec)?;
    let mut events = EventSet::singular(spec).stop_at(Some(n_target + 1));
    if !with_floor {
        events.decay_floor = None;
    }
    integrate(&start, spec, &events).map_err(|e| e.context(format!("singular run, c = {c}")))
}

/// Trichotomy classification of the singular run with amplitude `c`.
pub fn classify_singular(c: f64, n_target: usize, spec: &ProblemSpec) -> Result<Classification> {
    let spec = singular_spec(spec.d, spec)?;
    singular_run(c, n_target, &spec, true).map(|t| Classification::from_trajectory(&t))
}

fn probe(n: usize, spec: &ProblemSpec) -> impl Fn(f64) -> Result<ClassKind> + '_ {
    move |c| singular_run(c, n, spec, false).map(|t| Classification::from_trajectory(&t).kind)
}

fn lower_end(spec: &ProblemSpec) -> Result<f64> {
    let probe = probe(0, spec);
    let mut lo = 0.0;
    for _ in 0..8 {
        if probe(lo)?.diverges() {
            return Ok(lo);
        }
        lo = if lo == 0.0 { -1.0 } else { 2.0 * lo };
    }
    Err(SolverError::BracketNotFound {
        attempts: 8,
        c_last: lo,
    })
}

pub(crate) fn singular_ladder(n: usize, spec: &ProblemSpec, c_tol: f64) -> Result<Vec<Bracket>> {
    let mut ladder: Vec<Bracket> = Vec::with_capacity(n + 1);
    for level in 0..=n {
        let probe = probe(level, spec);
        let lo = match ladder.last() {
            None => lower_end(spec)?,
            Some(prev) => {
                if !probe(prev.hi)?.diverges() {
                    return Err(SolverError::BracketNotFound {
                        attempts: 0,
                        c_last: prev.hi,
                    }
                    .context(format!("singular level {level} lower end does not diverge")));
                }
                prev.hi
            }
        };
        let seed = if lo > 0.0 { 2.0 * lo } else { 1.0 };
        let bracket = seek_upper(lo, seed, &probe)?;
        ladder.push(bisect(bracket, c_tol, &probe)?);
    }
    Ok(ladder)
}

/// Like `reliable_cut`, but once the run turns away from the separatrix the
/// cut moves back to the smallest reduced field `|1 + eta|` past the last
/// node: the physical minimum lags it by the `r^-2` factor.
fn singular_cut(run: &Trajectory, n: usize) -> usize {
    let cut = reliable_cut(run, n);
    if matches!(run.termination, Termination::SignChangeF | Termination::DecayedBelowFloor) {
        return cut;
    }
    let from = match n.checked_sub(1).and_then(|i| run.node_radii.get(i)) {
        Some(&r) => run.samples.iter().position(|s| s.r > r.ln()).unwrap_or(cut),
        None => 0,
    };
    (from..=cut)
        .min_by(|&i, &j| (1.0 + run.samples[i].f).abs().total_cmp(&(1.0 + run.samples[j].f).abs()))
        .unwrap_or(cut)
}

/// `n`-node singular state in dimension `d` and its frequency `omega_inf`.
pub fn find_singular_state(d: u32, n: usize, spec: &ProblemSpec, c_tol: f64) -> Result<SingularResult> {
    let spec = singular_spec(d, spec)?;
    if !(c_tol > 0.0) {
        return Err(SolverError::InvalidSpec(format!("c_tol must be positive, got {c_tol}")));
    }
    let ladder = singular_ladder(n, &spec, c_tol)?;
    let mut bracket = ladder[n];
    let mut tol = c_tol;
    loop {
        let c_star = bracket.mid();
        let run = singular_run(c_star, n, &spec, true)?;
        let profile = truncate(&run, singular_cut(&run, n));
        if profile.node_count != n {
            return Err(SolverError::NodeMiscount {
                expected: n,
                found: profile.node_count,
            });
        }
        match omega_extract(&profile, &spec) {
            Ok(omega_inf) => {
                return Ok(SingularResult {
                    d,
                    c_star,
                    n,
                    omega_inf,
                    r_reliable: profile.r_end,
                    profile,
                    bracket_width: bracket.width(),
                })
            }
            // the separatrix is steeper than c_tol resolves: keep bisecting
            // until the bracket stops shrinking
            Err(SolverError::NotDecayed(_)) if tol > f64::EPSILON => {
                tol /= 16.0;
                bracket = bisect(bracket, tol, probe(n, &spec))?;
            }
            Err(e) => return Err(e.context(format!("singular d = {d}, n = {n}"))),
        }
    }
}

/// Singular ground states for every dimension in `dims`, solved in parallel
/// and returned in input order.
pub fn singular_table(dims: &[u32], spec: &ProblemSpec, c_tol: f64) -> Vec<Result<SingularResult>> {
    dims.par_iter()
        .map(|&d| find_singular_state(d, 0, spec, c_tol))
        .collect()
}

/// Physical `(f, h)` at radius `r`, interpolating the log-variable profile.
pub fn singular_profile_to_physical(res: &SingularResult, r: f64) -> Result<(f64, f64)> {
    let samples = &res.profile.samples;
    let lo = samples.first().map_or(f64::NAN, |s| s.r.exp());
    let hi = res.profile.r_end;
    if !(r >= lo && r <= hi) {
        return Err(SolverError::OutOfRange { r, lo, hi });
    }
    let t = r.ln().clamp(samples[0].r, samples[samples.len() - 1].r);
    let (eta, xi) = if samples.len() == 1 {
        (samples[0].f, samples[0].h)
    } else {
        let ts: Vec<f64> = samples.iter().map(|s| s.r).collect();
        let i = interval_index(&ts, t);
        let (a, b) = (&samples[i], &samples[i + 1]);
        let d = f64::from(res.d);
        let da = singular_field(a.r, &a.components(), d);
        let db = singular_field(b.r, &b.components(), d);
        let (eta, _) = hermite5(a.r, b.r, [a.f, a.fp, da[1]], [b.f, b.fp, db[1]], t);
        let (xi, _) = hermite5(a.r, b.r, [a.h, a.hp, da[3]], [b.h, b.hp, db[3]], t);
        (eta, xi)
    };
    let k = singular_scale(res.d) / (r * r);
    Ok((k * (1.0 + eta), k * (1.0 + xi)))
}

/// Least-squares fit of `d - omega_inf(d) = A exp(-gamma d)` in log form.
pub fn fit_omega_inf_law(table: &[(u32, f64)]) -> Result<FitReport> {
    if table.len() < 3 {
        return Err(SolverError::FitDomain(format!(
            "need at least 3 dimensions, got {}",
            table.len()
        )));
    }
    let mut pts = Vec::with_capacity(table.len());
    for &(d, w) in table {
        let gap = f64::from(d) - w;
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(SolverError::FitDomain(format!(
                "d - omega_inf must be positive, got {gap} at d = {d}"
            )));
        }
        pts.push((f64::from(d), gap.ln()));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let (amplitude, gamma) = (intercept.exp(), -slope);
    let residual = pts
        .iter()
        .map(|&(x, y)| (y.exp() / (amplitude * (-gamma * x).exp()) - 1.0).abs())
        .fold(0.0, f64::max);
    let (d_lo, d_hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    Ok(FitReport {
        model: FitModel::OmegaInfLaw,
        params: BTreeMap::from([("A".to_string(), amplitude), ("gamma".to_string(), gamma)]),
        residual,
        window: (d_lo, d_hi),
    })
}
