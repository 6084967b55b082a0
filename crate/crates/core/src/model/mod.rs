//! Potentials, Hamiltonians and their Legendre transforms.

mod hamiltonian;
mod legendre;
mod potential;

pub use hamiltonian::{CustomEvaluator, HamiltonianKind, HamiltonianModel, LocalHamiltonian};
pub use legendre::{
    conjugate, default_p_steps, legendre, LagrangianTable, ModelLagrangian, DEFAULT_P_STEPS_1D, DEFAULT_P_STEPS_2D,
};
pub use potential::{normalize_potential, Interpolation, NormalizedPotential, PotentialField, DEFAULT_RESOLUTION};

pub(crate) use hamiltonian::{directions, norm};
pub(crate) use potential::grid_points;
