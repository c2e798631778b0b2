//! Ground-state frequency curves `omega(b)` and their shape.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identities::pohozaev_report;
use crate::error::{Result, SolverError};
use crate::problem::ProblemSpec;
use crate::shooting::{find_ground_state, find_ground_state_near, ShootResult};

/// One point of a sweep. Failed points keep `b` and carry the error text;
/// their numeric fields are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub b: f64,
    pub omega: f64,
    pub c_star: f64,
    pub n: usize,
    pub bracket_width: f64,
    pub identity_max_residual: f64,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(b: f64, err: &SolverError) -> Self {
        SweepRecord {
            b,
            omega: f64::NAN,
            c_star: f64::NAN,
            n: 0,
            bracket_width: f64::NAN,
            identity_max_residual: f64::NAN,
            error: Some(err.to_string()),
        }
    }

    fn from_result(res: &ShootResult) -> Self {
        let identity_max_residual = pohozaev_report(res).map_or(f64::NAN, |r| r.max_residual());
        SweepRecord {
            b: res.b,
            omega: res.omega,
            c_star: res.c_star,
            n: res.n,
            bracket_width: res.bracket_width,
            identity_max_residual,
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// `points` values from `lo` to `hi`, geometric or arithmetic.
pub fn log_grid(lo: f64, hi: f64, points: usize, log: bool) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| match i {
                0 => lo,
                _ if i == points - 1 => hi,
                _ => {
                    let s = i as f64 / (points - 1) as f64;
                    if log {
                        (lo.ln() + s * (hi / lo).ln()).exp()
                    } else {
                        lo + s * (hi - lo)
                    }
                }
            })
            .collect(),
    }
}

/// Points per warm-started chain; chains run in parallel.
const CHAIN: usize = 16;

/// Ground states along `b_grid`. Within each chain, the bracket search starts
/// from the linear extrapolation of the previous two `c_star` values.
pub fn sweep_omega_b(d: u32, b_grid: &[f64], spec: &ProblemSpec, c_tol: f64) -> Result<Vec<SweepRecord>> {
    let mut spec = spec.clone();
    spec.d = d;
    spec.validate()?;
    if b_grid.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(SolverError::InvalidSpec("sweep amplitudes must be positive".into()));
    }
    if b_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidSpec("sweep amplitudes must increase strictly".into()));
    }
    let spec = &spec;
    let chains: Vec<Vec<SweepRecord>> = b_grid
        .par_chunks(CHAIN)
        .map(|chunk| {
            let mut out = Vec::with_capacity(chunk.len());
            let mut history: Vec<(f64, f64)> = Vec::new();
            for &b in chunk {
                let attempt = match history.as_slice() {
                    [.., (b1, c1), (b2, c2)] => {
                        let guess = c2 + (c2 - c1) * (b - b2) / (b2 - b1);
                        find_ground_state_near(b, spec, c_tol, guess, 0.5 * (guess - c2).abs())
                    }
                    [(b1, c1)] => find_ground_state_near(b, spec, c_tol, *c1, 0.5 * (b - b1).abs()),
                    [] => find_ground_state(b, spec, c_tol),
                };
                match attempt {
                    Ok(res) => {
                        history.push((b, res.c_star));
                        out.push(SweepRecord::from_result(&res));
                    }
                    Err(e) => out.push(SweepRecord::failed(b, &e)),
                }
            }
            out
        })
        .collect();
    Ok(chains.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub b: f64,
    pub omega: f64,
    pub kind: ExtremumKind,
}

fn usable(curve: &[SweepRecord]) -> Vec<(f64, f64)> {
    curve
        .iter()
        .filter(|r| r.is_ok() && r.omega.is_finite())
        .map(|r| (r.b.ln(), r.omega))
        .collect()
}

/// Local extrema of `omega` in `ln b`, refined by a parabola through the
/// three neighbouring points. Extrema whose rise on either side is below
/// `prominence` are treated as noise.
pub fn detect_extrema(curve: &[SweepRecord], prominence: f64) -> Vec<Extremum> {
    let pts = usable(curve);
    let mut out = Vec::new();
    for w in pts.windows(3) {
        let [(x0, y0), (x1, y1), (x2, y2)] = [w[0], w[1], w[2]];
        let kind = if y1 > y0 && y1 > y2 {
            ExtremumKind::Max
        } else if y1 < y0 && y1 < y2 {
            ExtremumKind::Min
        } else {
            continue;
        };
        if (y1 - y0).abs().min((y1 - y2).abs()) < prominence {
            continue;
        }
        // vertex of the interpolating parabola
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let a = (d12 - d01) / (x2 - x0);
        let xv = 0.5 * (x0 + x1) - d01 / (2.0 * a);
        let yv = y1 + d01 * (xv - x1) + a * (xv - x0) * (xv - x1);
        let xv = xv.clamp(x0, x2);
        out.push(Extremum {
            b: xv.exp(),
            omega: yv,
            kind,
        });
    }
    out
}

/// Amplitudes where the curve crosses `level`, by linear interpolation in `ln b`.
pub fn crossings(curve: &[SweepRecord], level: f64) -> Vec<f64> {
    let pts = usable(curve);
    pts.windows(2)
        .filter_map(|w| {
            let (a, b) = ((w[0].1 - level), (w[1].1 - level));
            if a == 0.0 {
                return Some(w[0].0.exp());
            }
            (a * b < 0.0).then(|| (w[0].0 + (w[1].0 - w[0].0) * a / (a - b)).exp())
        })
        .collect()
}

/// Log-log slope of `|omega* - omega_inf|` against `b` over the extrema.
pub fn envelope_slope(extrema: &[Extremum], omega_inf: f64) -> Result<f64> {
    if extrema.len() < 2 {
        return Err(SolverError::FitDomain(format!(
            "envelope needs at least 2 extrema, got {}",
            extrema.len()
        )));
    }
    let pts: Vec<(f64, f64)> = extrema
        .iter()
        .map(|e| (e.b.ln(), (e.omega - omega_inf).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
