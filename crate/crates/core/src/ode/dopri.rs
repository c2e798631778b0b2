//! Dormand–Prince 5(4) pair with PI step control and the 4th-order
//! continuous extension, specialised to four-component systems.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MAX_GROWTH: f64 = 10.0;
const MAX_SHRINK: f64 = 5.0;

type Vec4 = [f64; 4];

#[inline]
fn axpy(y: &Vec4, terms: &[(f64, &Vec4)], h: f64) -> Vec4 {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..4 {
            out[i] += h * coef * k[i];
        }
    }
    out
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub x0: f64,
    pub h: f64,
    pub y0: Vec4,
    pub y1: Vec4,
    cont: [Vec4; 5],
}

impl Segment {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }

    pub fn eval(&self, x: f64) -> Vec4 {
        let theta = (x - self.x0) / self.h;
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        out
    }
}

pub(crate) enum StepOutcome {
    Accepted(Segment),
    Underflow { h: f64 },
}

pub(crate) struct Stepper<F> {
    rhs: F,
    rtol: f64,
    atol: f64,
    h_max: f64,
    pub x: f64,
    pub y: Vec4,
    k1: Vec4,
    h: f64,
    err_old: f64,
    last_rejected: bool,
}

impl<F> Stepper<F>
where
    F: Fn(f64, &Vec4) -> Vec4,
{
    pub fn new(rhs: F, x0: f64, y0: Vec4, rtol: f64, atol: f64, h_max: f64) -> Self {
        let k1 = rhs(x0, &y0);
        let mut stepper = Stepper {
            rhs,
            rtol,
            atol,
            h_max,
            x: x0,
            y: y0,
            k1,
            h: 0.0,
            err_old: 1e-4,
            last_rejected: false,
        };
        stepper.h = stepper.initial_step();
        stepper
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    // Hairer & Wanner's starting step heuristic.
    fn initial_step(&self) -> f64 {
        let (mut dnf, mut dny) = (0.0, 0.0);
        for i in 0..4 {
            let sk = self.scale(self.y[i], 0.0);
            dnf += (self.k1[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.h_max);
        let y1 = axpy(&self.y, &[(1.0, &self.k1)], h);
        let k2 = (self.rhs)(self.x + h, &y1);
        let mut der2: f64 = 0.0;
        for i in 0..4 {
            let sk = self.scale(self.y[i], 0.0);
            der2 += ((k2[i] - self.k1[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.h_max)
    }

    /// Advances by one accepted step that does not pass `x_end`.
    pub fn step(&mut self, x_end: f64) -> StepOutcome {
        loop {
            let mut h = self.h.min(self.h_max);
            let remaining = x_end - self.x;
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h.abs() <= 16.0 * f64::EPSILON * self.x.abs().max(1e-300) {
                return StepOutcome::Underflow { h };
            }
            let (x, y, k1) = (self.x, self.y, self.k1);
            let rhs = &self.rhs;
            let y2 = axpy(&y, &[(A21, &k1)], h);
            let k2 = rhs(x + C2 * h, &y2);
            let y3 = axpy(&y, &[(A31, &k1), (A32, &k2)], h);
            let k3 = rhs(x + C3 * h, &y3);
            let y4 = axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h);
            let k4 = rhs(x + C4 * h, &y4);
            let y5 = axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h);
            let k5 = rhs(x + C5 * h, &y5);
            let y6 = axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            );
            let x_new = if clipped { x_end } else { x + h };
            let k6 = rhs(x_new, &y6);
            let y_new = axpy(
                &y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let k7 = rhs(x_new, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..4 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                err += (e / self.scale(y[i], y_new[i])).powi(2);
            }
            let err = (err / 4.0).sqrt();
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                self.h = h / MAX_SHRINK;
                self.last_rejected = true;
                continue;
            }

            let expo = 0.2 - 0.75 * BETA;
            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY)
                    .clamp(1.0 / MAX_GROWTH, MAX_SHRINK);
                let mut h_new = h / fac;
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                self.err_old = err.max(1e-4);
                self.last_rejected = false;

                let ydiff: Vec4 = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: Vec4 = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let cont = [
                    y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ];
                let segment = Segment {
                    x0: x,
                    h: x_new - x,
                    y0: y,
                    y1: y_new,
                    cont,
                };
                self.x = x_new;
                self.y = y_new;
                self.k1 = k7;
                // keep the controller's preferred size after a clipped final step
                self.h = if clipped { self.h.max(h_new) } else { h_new };
                return StepOutcome::Accepted(segment);
            }
            self.h = h / (fac11 / SAFETY).min(MAX_SHRINK);
            self.last_rejected = true;
        }
    }
}
