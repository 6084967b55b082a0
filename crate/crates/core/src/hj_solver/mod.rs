//! Monotone finite-difference solvers for periodic Cauchy problems.

mod field;
mod initial;
mod oc;
mod scheme;

pub use field::{sup_error, sup_error_by_time, SpaceTimeField};
pub use initial::InitialData;
pub use oc::{oc_search_radius, oc_solve};
pub use scheme::{
    closed_form_theta, derivative_bound, estimate_scheme, solve_cauchy, NodeHamiltonian, OscillatoryHamiltonian,
    SchemeParameters, SolveOptions, UniformHamiltonian,
};

pub(crate) use scheme::lf_step;

use crate::error::Result;
use crate::model::HamiltonianModel;
use crate::scalar::Real;

/// Solves `u_t + H(x / eps, Du) = 0` with `eps = 1 / eps_recip`.
pub fn solve_oscillatory<T: Real>(
    model: &HamiltonianModel<T>,
    eps_recip: u32,
    g: &InitialData<T>,
    horizon: T,
    nx: usize,
    opts: &SolveOptions<T>,
) -> Result<SpaceTimeField<T>> {
    let h = OscillatoryHamiltonian::new(model, eps_recip, nx)?;
    let mut f = solve_cauchy(&h, g, horizon, nx, opts)?;
    f.set_eps_recip(eps_recip);
    Ok(f)
}

#[cfg(test)]
mod tests;
