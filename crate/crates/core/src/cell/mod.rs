//! Effective Hamiltonians from the periodic cell problem, and their Lagrangians.

mod ergodic;
mod table;

pub use ergodic::{effective_h_at, ergodic_bracket, Bracket, CellEstimate, CellOptions};
pub use table::{build_discrete_table, build_effective_table, effective_lagrangian, EffectiveHamiltonian, EffectiveTable};
