//! Immutable problem definition shared by every solver entry point.
//!
//! Units are fixed so that the trap frequency is one; every length, field
//! value and frequency in the crate is dimensionless.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Which reduced system a trajectory integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Smooth states in the radius `r`, shooting on the central potential.
    Regular,
    /// States diverging like `2(d-4)/r^2`, integrated in `t = ln r`.
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub d: u32,
    pub mode: Mode,
    pub rtol: f64,
    pub atol: f64,
    /// Left endpoint radius. Regular runs with a large central value start
    /// closer to the origin, see [`crate::ode::regular_start_radius`].
    pub r_start: f64,
    /// Blow-up threshold, scaled by `max(1, b)` in regular mode and applied
    /// to the reduced field `f r^2 / 2(d-4)` in singular mode.
    pub f_blowup: f64,
    pub r_max: f64,
}

pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_ATOL: f64 = 1e-12;
pub const DEFAULT_SINGULAR_ATOL: f64 = 1e-15;
pub const DEFAULT_R_START: f64 = 1e-3;
pub const DEFAULT_F_BLOWUP: f64 = 1e6;
pub const DEFAULT_R_MAX: f64 = 20.0;

impl ProblemSpec {
    pub fn regular(d: u32) -> Result<Self> {
        let spec = ProblemSpec {
            d,
            mode: Mode::Regular,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            r_start: DEFAULT_R_START,
            f_blowup: DEFAULT_F_BLOWUP,
            r_max: DEFAULT_R_MAX,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn singular(d: u32) -> Result<Self> {
        let spec = ProblemSpec {
            d,
            mode: Mode::Singular,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_SINGULAR_ATOL,
            r_start: DEFAULT_R_START,
            f_blowup: DEFAULT_F_BLOWUP,
            r_max: DEFAULT_R_MAX,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Result<Self> {
        self.rtol = rtol;
        self.atol = atol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_max(mut self, r_max: f64) -> Result<Self> {
        self.r_max = r_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_start(mut self, r_start: f64) -> Result<Self> {
        self.r_start = r_start;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Regular if self.d < 6 => {
                return Err(SolverError::Domain {
                    d: self.d,
                    reason: "regular states require d >= 6",
                })
            }
            Mode::Singular if self.d < 7 => {
                return Err(SolverError::Domain {
                    d: self.d,
                    reason: "singular states require d >= 7",
                })
            }
            _ => {}
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.r_start) && self.r_start < 1.0) {
            return Err(SolverError::InvalidSpec(format!(
                "r_start must lie in (0, 1), got {}",
                self.r_start
            )));
        }
        if !positive(self.rtol) || !positive(self.atol) {
            return Err(SolverError::InvalidSpec(format!(
                "tolerances must be positive, got rtol = {}, atol = {}",
                self.rtol, self.atol
            )));
        }
        if !positive(self.f_blowup) {
            return Err(SolverError::InvalidSpec(format!(
                "f_blowup must be positive, got {}",
                self.f_blowup
            )));
        }
        if !(self.r_max.is_finite() && self.r_max > 1.0) {
            return Err(SolverError::InvalidSpec(format!(
                "r_max must exceed 1, got {}",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        f64::from(self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_limits_per_mode() {
        assert!(ProblemSpec::regular(6).is_ok());
        assert!(ProblemSpec::regular(5).is_err());
        assert!(ProblemSpec::singular(6).is_err());
        assert!(ProblemSpec::singular(7).is_ok());
    }

    #[test]
    fn rejects_bad_knobs() {
        let spec = ProblemSpec::regular(7).unwrap();
        assert!(spec.clone().with_tolerances(0.0, 1e-12).is_err());
        assert!(spec.clone().with_tolerances(1e-10, -1.0).is_err());
        assert!(spec.clone().with_r_start(1.0).is_err());
        assert!(spec.clone().with_r_max(0.5).is_err());
        let mut bad = spec;
        bad.f_blowup = 0.0;
        assert!(bad.validate().is_err());
    }
}
