//! Reduced ODE systems, left-endpoint initializations and the adaptive
//! integrator shared by the regular and singular solvers.

mod dopri;
mod integrate;
mod system;

pub use integrate::{integrate, EventSet, Termination, Trajectory};
pub use system::{
    eigenvalues, manifold_start_singular, regular_series_coefficients, regular_start_radius,
    rhs_regular, rhs_singular, series_start_regular, singular_scale, singular_to_physical,
    Derivative, Eigenvalues, RootPair, State, MANIFOLD_AMPLITUDE_LIMIT, MANIFOLD_FORCING_LIMIT,
};
#[cfg(test)]
pub(crate) use dopri::{StepOutcome, Stepper};
pub(crate) use system::singular_field;
