//! Numerical laboratory for periodic homogenization of Hamilton-Jacobi equations.

pub mod cell;
pub mod curvecut;
pub mod error;
pub mod game;
pub mod hj_solver;
pub mod lab;
pub mod metric;
pub mod model;
pub mod optim;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{ExactScalar, Real};

/// Double-precision instances of the main types.
pub type HamiltonianModel64 = model::HamiltonianModel<f64>;
pub type PotentialField64 = model::PotentialField<f64>;
pub type LagrangianTable64 = model::LagrangianTable<f64>;
pub type InitialData64 = hj_solver::InitialData<f64>;
pub type SpaceTimeField64 = hj_solver::SpaceTimeField<f64>;
pub type SolveOptions64 = hj_solver::SolveOptions<f64>;
pub type CellOptions64 = cell::CellOptions<f64>;
pub type EffectiveTable64 = cell::EffectiveTable<f64>;
pub type MetricOptions64 = metric::MetricOptions<f64>;
pub type DiscreteActionMetric64 = metric::DiscreteActionMetric<f64>;
pub type PeriodicGraphMetric64 = metric::PeriodicGraphMetric<f64>;
pub type StableNorm64 = metric::StableNorm<f64>;
pub type InequalityReport64 = metric::InequalityReport<f64>;
pub type PolyPath64 = curvecut::PolyPath<f64>;
pub type Reassembly64 = curvecut::Reassembly<f64>;
pub type QuasiconvexReport64 = game::QuasiconvexReport<f64>;
pub type RateReport64 = lab::RateReport<f64>;
/// Exact scalar of the game bookkeeping.
pub type Rational = num_rational::BigRational;
pub type ExactTranscript = game::GameTranscript<Rational>;
