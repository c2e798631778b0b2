//! Post-processing and verification of converged states: integral
//! identities, the nonlocal potential cross-check, mass and energy,
//! frequency sweeps and asymptotic fits.

mod fits;
mod identities;
mod quadrature;
mod sweep;

pub use fits::{
    bifurcation_coefficient, fit_bifurcation, fit_large_b, large_b_model, FitModel, FitReport,
};
pub use identities::{
    identity_report, identity_residuals, mass_energy, mass_energy_from, newton_deviation,
    newton_potential_check, norms, omega_bounds, omega_range, omega_range_check, pohozaev_report,
    profile_grid, sphere_area, IdentityReport, MassEnergy, Norms, RangeCheck, IDENTITY_TOLERANCE,
    RANGE_EPSILON,
};
pub use quadrature::{Point, Profile, DEFAULT_NODES};
pub use sweep::{
    crossings, detect_extrema, envelope_slope, log_grid, sweep_omega_b, Extremum, ExtremumKind,
    SweepRecord,
};
