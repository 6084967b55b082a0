//! Curve cutting on piecewise-linear paths and the half-time reassembly built on it.

mod decompose;
mod path;
mod reassemble;
mod sphere;

pub use decompose::{decompose_half, IntervalDecomposition};
pub use path::PolyPath;
pub use reassemble::{reassemble_half_time, Reassembly};
pub use sphere::{odd_map_zero, oddness_defect, sphere_points};

#[cfg(test)]
mod tests;
