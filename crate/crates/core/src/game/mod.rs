//! Game representation of the double-well example: transcripts, trace reduction and the
//! comparison with the truncated Hamiltonian.

mod quasiconvex;
mod reduce;
mod transcript;

pub use quasiconvex::{quasiconvexification_check, QuasiconvexParams, QuasiconvexReport};
pub use reduce::{anchor_point, trace_reduce, Certificate, Reduction, Removal};
pub use transcript::{conforming_transcript, transcript_cost, Control, GameTranscript, Round, StrategyParams};

#[cfg(test)]
mod tests;
