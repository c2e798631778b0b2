//! Gauss–Legendre quadrature over a dense regular profile.

use crate::error::{Result, SolverError};
use crate::interp::{hermite5, interval_index};
use crate::ode::State;
use crate::shooting::{second_derivatives, ShootResult};

/// Gauss–Legendre nodes per mesh interval used by the identity checks.
pub const DEFAULT_NODES: usize = 8;

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one node");
    let nf = n as f64;
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Physical profile `(r, f, f', h, h')` with ODE second derivatives, so that
/// each interval carries a quintic Hermite interpolant.
#[derive(Debug, Clone)]
pub struct Profile {
    pub d: u32,
    pub omega: f64,
    samples: Vec<State>,
    second: Vec<(f64, f64)>,
}

/// Field and potential at one quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub r: f64,
    pub f: f64,
    pub fp: f64,
    pub h: f64,
    pub hp: f64,
}

impl Profile {
    pub fn from_shoot(res: &ShootResult) -> Result<Self> {
        Self::new(res.d, res.omega, res.profile.physical_samples())
    }

    pub fn new(d: u32, omega: f64, samples: Vec<State>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(SolverError::NotDecayed("profile needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].r > w[0].r)) {
            return Err(SolverError::InvalidSpec("profile radii must increase strictly".into()));
        }
        let second = samples.iter().map(|s| second_derivatives(s, d)).collect();
        Ok(Profile {
            d,
            omega,
            samples,
            second,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    pub fn samples(&self) -> &[State] {
        &self.samples
    }

    fn point_in(&self, i: usize, r: f64) -> Point {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let (fa, ha) = self.second[i];
        let (fb, hb) = self.second[i + 1];
        let (f, fp) = hermite5(a.r, b.r, [a.f, a.fp, fa], [b.f, b.fp, fb], r);
        let (h, hp) = hermite5(a.r, b.r, [a.h, a.hp, ha], [b.h, b.hp, hb], r);
        Point { r, f, fp, h, hp }
    }

    /// Interpolated state at `r` inside the mesh.
    pub fn at(&self, r: f64) -> Result<Point> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(SolverError::OutOfRange { r, lo, hi });
        }
        let xs: Vec<f64> = self.samples.iter().map(|s| s.r).collect();
        Ok(self.point_in(interval_index(&xs, r), r))
    }

    fn integrate_interval<const K: usize>(
        &self,
        i: usize,
        a: f64,
        b: f64,
        rule: &[(f64, f64)],
        g: &impl Fn(&Point) -> [f64; K],
    ) -> [f64; K] {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = [0.0; K];
        for &(x, w) in rule {
            let v = g(&self.point_in(i, mid + half * x));
            for k in 0..K {
                acc[k] += w * half * v[k];
            }
        }
        acc
    }

    /// `K` integrals over the mesh `[r_min, r_max]` sharing the interpolant
    /// evaluations, with `nodes` Gauss points per interval.
    pub fn integrate<const K: usize>(&self, nodes: usize, g: impl Fn(&Point) -> [f64; K]) -> [f64; K] {
        let rule = gauss_legendre(nodes);
        let mut total = [0.0; K];
        for i in 0..self.samples.len() - 1 {
            let part = self.integrate_interval(i, self.samples[i].r, self.samples[i + 1].r, &rule, &g);
            for k in 0..K {
                total[k] += part[k];
            }
        }
        total
    }

    /// Running integral of `g` from `r_min` to each sample radius.
    pub(crate) fn cumulative(&self, nodes: usize, g: impl Fn(&Point) -> f64) -> Vec<f64> {
        let rule = gauss_legendre(nodes);
        let g1 = |p: &Point| [g(p)];
        let mut out = Vec::with_capacity(self.samples.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..self.samples.len() - 1 {
            acc += self.integrate_interval(i, self.samples[i].r, self.samples[i + 1].r, &rule, &g1)[0];
            out.push(acc);
        }
        out
    }

    /// Integral of `g` from `r_min` to `r`, given `cumulative` of the same `g`.
    pub(crate) fn partial(&self, nodes: usize, cum: &[f64], r: f64, g: impl Fn(&Point) -> f64) -> Result<f64> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(SolverError::OutOfRange { r, lo, hi });
        }
        let xs: Vec<f64> = self.samples.iter().map(|s| s.r).collect();
        let i = interval_index(&xs, r);
        let rule = gauss_legendre(nodes);
        Ok(cum[i] + self.integrate_interval(i, xs[i], r, &rule, &|p: &Point| [g(p)])[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16] {
            let rule = gauss_legendre(n);
            assert!((rule.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got: f64 = rule.iter().map(|&(x, w)| w * x.powi(k as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn gaussian_moments_on_a_synthetic_profile() {
        // f = e^{-r^2/2} with h chosen so the field equation holds for omega = d
        let d = 7;
        let samples: Vec<State> = (0..=400)
            .map(|i| {
                let r = 1e-3 + 0.02 * f64::from(i);
                let f = (-0.5 * r * r).exp();
                State::new(r, f, -r * f, 7.0, 0.0)
            })
            .collect();
        let p = Profile::new(d, 7.0, samples).unwrap();
        let [m] = p.integrate(DEFAULT_NODES, |q| [q.f * q.f * q.r.powi(6)]);
        // int_0^inf e^{-r^2} r^6 dr = 15 sqrt(pi) / 16
        let exact = 15.0 * std::f64::consts::PI.sqrt() / 16.0;
        assert!((m - exact).abs() < 1e-10 * exact, "{m} vs {exact}");
    }
}
