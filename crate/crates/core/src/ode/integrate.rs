//! Adaptive integration with event detection.
//!
//! Events are expressed on the physical field `f` and its radial derivative
//! in both modes; singular runs evaluate sign-equivalent signals built from
//! the reduced variables so the classifier never forms `1/r^2` factors.

use serde::{Deserialize, Serialize};

use super::dopri::{Segment, StepOutcome, Stepper};
use super::system::{regular_field, singular_field, singular_scale, singular_to_physical, State};
use crate::error::{Result, SolverError};
use crate::problem::{Mode, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    SignChangeF,
    PositiveMinimum,
    NegativeMaximum,
    BlowUp,
    ReachedRMax,
    DecayedBelowFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSet {
    /// Stop at this sign change of `f` (1-based count); `None` records
    /// sign changes without stopping.
    pub stop_at_sign_change: Option<usize>,
    /// Stop at a positive minimum or negative maximum of `f`.
    pub stop_on_extremum: bool,
    /// Threshold on `|f|` (regular) or `|f~|` (singular).
    pub blowup: f64,
    /// Threshold on `|f|` (regular) or `|f~|` (singular) for the decay event.
    pub decay_floor: Option<f64>,
    /// Keep every `stride`-th accepted step as a sample.
    pub stride: usize,
}

impl EventSet {
    /// Defaults for a regular shot with central value `b`.
    pub fn regular(b: f64, spec: &ProblemSpec) -> Self {
        EventSet {
            stop_at_sign_change: Some(1),
            stop_on_extremum: true,
            blowup: spec.f_blowup * b.abs().max(1.0),
            decay_floor: Some(1e-10 * b.abs()),
            stride: 1,
        }
    }

    pub fn singular(spec: &ProblemSpec) -> Self {
        EventSet {
            stop_at_sign_change: Some(1),
            stop_on_extremum: true,
            blowup: spec.f_blowup,
            decay_floor: Some(1e-10),
            stride: 1,
        }
    }

    pub fn stop_at(mut self, sign_changes: Option<usize>) -> Self {
        self.stop_at_sign_change = sign_changes;
        self
    }
}

/// One integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d: u32,
    pub mode: Mode,
    /// Strictly increasing in the independent variable (`r`, or `t` in
    /// singular mode).
    pub samples: Vec<State>,
    pub termination: Termination,
    /// Final physical radius.
    pub r_end: f64,
    pub node_count: usize,
    /// Physical radii of the recorded sign changes of `f`.
    pub node_radii: Vec<f64>,
}

impl Trajectory {
    /// Samples mapped to physical `(r, f, f', h, h')`.
    pub fn physical_samples(&self) -> Vec<State> {
        match self.mode {
            Mode::Regular => self.samples.clone(),
            Mode::Singular => self
                .samples
                .iter()
                .map(|s| singular_to_physical(s, self.d))
                .collect(),
        }
    }

    pub fn last(&self) -> &State {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Sign-carrying signals evaluated along a run.
#[derive(Debug, Clone, Copy)]
struct Signals {
    /// Same sign as `f`.
    f: f64,
    /// Same sign as `f'`.
    fp: f64,
}

#[derive(Clone, Copy)]
struct View {
    mode: Mode,
    d: u32,
}

impl View {
    fn signals(&self, y: &[f64; 4]) -> Signals {
        match self.mode {
            Mode::Regular => Signals { f: y[0], fp: y[1] },
            Mode::Singular => {
                let f_red = 1.0 + y[0];
                Signals {
                    f: f_red,
                    fp: y[1] - 2.0 * f_red,
                }
            }
        }
    }

    fn radius(&self, x: f64) -> f64 {
        match self.mode {
            Mode::Regular => x,
            Mode::Singular => x.exp(),
        }
    }

    /// Magnitude compared against the blow-up and decay thresholds.
    fn magnitude(&self, y: &[f64; 4]) -> f64 {
        match self.mode {
            Mode::Regular => y[0].abs(),
            Mode::Singular => (1.0 + y[0]).abs(),
        }
    }

    /// `r^2 - h`, positive once the trap term dominates.
    fn trap_excess(&self, x: f64, y: &[f64; 4]) -> f64 {
        match self.mode {
            Mode::Regular => x * x - y[2],
            Mode::Singular => {
                let r2 = (2.0 * x).exp();
                r2 - singular_scale(self.d) * (1.0 + y[2]) / r2
            }
        }
    }
}

/// Illinois false position on a bracketing interval.
fn locate_root(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> f64 {
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let x = (a * gb - b * ga) / (gb - ga);
        let x = if x > a.min(b) && x < a.max(b) {
            x
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return x;
        }
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx > 0.0) == (gb > 0.0) {
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (a + b)
}

fn crosses(fa: f64, fb: f64) -> bool {
    (fa > 0.0 && fb <= 0.0) || (fa < 0.0 && fb >= 0.0)
}

enum Found {
    SignChange(f64),
    Extremum(f64, Termination),
}

/// Scans one accepted segment for events. Returns the terminating event if
/// any; sign changes that do not terminate are appended to `nodes`.
fn scan_segment(
    seg: &Segment,
    view: View,
    events: &EventSet,
    nodes: &mut Vec<f64>,
) -> Option<(f64, Termination)> {
    const PARTS: usize = 4;
    let x0 = seg.x0;
    let x1 = seg.x1();
    let mut a = x0;
    let mut sa = view.signals(&seg.y0);
    for j in 1..=PARTS {
        let (b, yb) = if j == PARTS {
            (x1, seg.y1)
        } else {
            let b = x0 + seg.h * j as f64 / PARTS as f64;
            (b, seg.eval(b))
        };
        let sb = view.signals(&yb);
        loop {
            let mut found: Option<Found> = None;
            if crosses(sa.f, sb.f) {
                let x = locate_root(|x| view.signals(&seg.eval(x)).f, a, b, sa.f, sb.f);
                found = Some(Found::SignChange(x));
            }
            if events.stop_on_extremum {
                let upward = sa.fp <= 0.0 && sb.fp > 0.0;
                let downward = sa.fp >= 0.0 && sb.fp < 0.0;
                if upward || downward {
                    let x = locate_root(|x| view.signals(&seg.eval(x)).fp, a, b, sa.fp, sb.fp);
                    let fx = view.signals(&seg.eval(x)).f;
                    let kind = if upward && fx > 0.0 {
                        Some(Termination::PositiveMinimum)
                    } else if downward && fx < 0.0 {
                        Some(Termination::NegativeMaximum)
                    } else {
                        None
                    };
                    if let Some(kind) = kind {
                        // a sign change at the same point wins the tie
                        let earlier = match found {
                            Some(Found::SignChange(xs)) => x < xs,
                            _ => true,
                        };
                        if earlier {
                            found = Some(Found::Extremum(x, kind));
                        }
                    }
                }
            }
            match found {
                None => break,
                Some(Found::Extremum(x, kind)) => return Some((x, kind)),
                Some(Found::SignChange(x)) => {
                    nodes.push(view.radius(x));
                    if events.stop_at_sign_change == Some(nodes.len()) {
                        return Some((x, Termination::SignChangeF));
                    }
                    a = x;
                    let mut s = view.signals(&seg.eval(x));
                    s.f = 0.0;
                    sa = s;
                }
            }
        }
        a = b;
        sa = sb;
    }
    None
}

const H_MAX: f64 = 0.05;
const MAX_STEPS: usize = 2_000_000;

/// Integrates from `start` until the first triggered event.
pub fn integrate(start: &State, spec: &ProblemSpec, events: &EventSet) -> Result<Trajectory> {
    spec.validate()?;
    if !start.is_finite() {
        return Err(SolverError::InvalidState { x: start.r });
    }
    let view = View {
        mode: spec.mode,
        d: spec.d,
    };
    let x_max = match spec.mode {
        Mode::Regular => spec.r_max,
        Mode::Singular => spec.r_max.ln(),
    };
    if spec.mode == Mode::Regular && start.r <= 0.0 {
        return Err(SolverError::InvalidState { x: start.r });
    }
    if start.r >= x_max {
        return Err(SolverError::InvalidSpec(format!(
            "start point {} lies beyond the integration cap",
            start.r
        )));
    }
    let dim = spec.dim();
    let stride = events.stride.max(1);
    let mut samples = vec![*start];
    let mut nodes = Vec::new();

    let finish = |samples: Vec<State>, nodes: Vec<f64>, termination| {
        let last: &State = samples.last().expect("non-empty");
        Ok(Trajectory {
            d: spec.d,
            mode: spec.mode,
            r_end: view.radius(last.r),
            node_count: nodes.len(),
            node_radii: nodes,
            samples,
            termination,
        })
    };

    // A regular run leaving the origin with f f' > 0 starts at a forbidden
    // extremum: the central value is a positive minimum (or negative maximum).
    if events.stop_on_extremum && spec.mode == Mode::Regular {
        if start.f > 0.0 && start.fp > 0.0 {
            return finish(samples, nodes, Termination::PositiveMinimum);
        }
        if start.f < 0.0 && start.fp < 0.0 {
            return finish(samples, nodes, Termination::NegativeMaximum);
        }
    }

    let y0 = start.components();
    match spec.mode {
        Mode::Regular => run(
            move |x, y: &[f64; 4]| regular_field(x, y, dim),
            start.r,
            y0,
            x_max,
            spec,
            events,
            view,
            stride,
            &mut samples,
            &mut nodes,
        ),
        Mode::Singular => run(
            move |x, y: &[f64; 4]| singular_field(x, y, dim),
            start.r,
            y0,
            x_max,
            spec,
            events,
            view,
            stride,
            &mut samples,
            &mut nodes,
        ),
    }
    .and_then(|termination| finish(samples, nodes, termination))
}

#[allow(clippy::too_many_arguments)]
fn run<F>(
    rhs: F,
    x0: f64,
    y0: [f64; 4],
    x_max: f64,
    spec: &ProblemSpec,
    events: &EventSet,
    view: View,
    stride: usize,
    samples: &mut Vec<State>,
    nodes: &mut Vec<f64>,
) -> Result<Termination>
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    let mut stepper = Stepper::new(rhs, x0, y0, spec.rtol, spec.atol, H_MAX);
    let mut accepted = 0usize;
    loop {
        if accepted >= MAX_STEPS {
            return Err(SolverError::Stiffness {
                last: State::from_parts(stepper.x, &stepper.y),
                h: 0.0,
            });
        }
        let seg = match stepper.step(x_max) {
            StepOutcome::Accepted(seg) => seg,
            StepOutcome::Underflow { h } => {
                return Err(SolverError::Stiffness {
                    last: State::from_parts(stepper.x, &stepper.y),
                    h,
                })
            }
        };
        accepted += 1;
        if let Some((x, kind)) = scan_segment(&seg, view, events, nodes) {
            let last_x = samples.last().map_or(f64::NEG_INFINITY, |s| s.r);
            if x > last_x {
                samples.push(State::from_parts(x, &seg.eval(x)));
            }
            return Ok(kind);
        }
        let x1 = seg.x1();
        let y1 = seg.y1;
        let at_end = x1 >= x_max;
        let blown = view.magnitude(&y1) > events.blowup;
        let decayed = events.decay_floor.is_some_and(|floor| {
            let s = view.signals(&y1);
            view.magnitude(&y1) < floor && view.trap_excess(x1, &y1) > 0.0 && s.f * s.fp < 0.0
        });
        if at_end || blown || decayed || accepted % stride == 0 {
            samples.push(State::from_parts(x1, &y1));
        }
        if blown {
            return Ok(Termination::BlowUp);
        }
        if decayed {
            return Ok(Termination::DecayedBelowFloor);
        }
        if at_end {
            return Ok(Termination::ReachedRMax);
        }
    }
}
