use super::transcript::{transcript_cost, Control, GameTranscript, Round};
use crate::error::{Error, Result};
use crate::hj_solver::InitialData;
use crate::model::PotentialField;
use crate::scalar::ExactScalar;

/// Grid minimizer `y*` of `V` scaled by `eps`, exactly representable in `S`.
pub fn anchor_point<S: ExactScalar>(v: &PotentialField<f64>, eps_recip: u32) -> Vec<S> {
    let k = S::from_f64_exact(eps_recip as f64).expect("finite");
    v.argmin().iter().map(|&c| S::from_f64_exact(c).expect("grid point") / k.clone()).collect()
}

/// One removed piece with its cost.
#[derive(Clone, Debug, PartialEq)]
pub enum Removal<S> {
    /// Player I stays at the anchor for round `round`: `delta (-1 - V(y*))`.
    StayPut { round: usize, cost: S },
    /// Player II's step in round `forward` undone by player I in round `back`:
    /// `delta (1 - V) + delta (-1 - V)` at the shared midpoint.
    MirroredPair { forward: usize, back: usize, cost: S },
}

impl<S: ExactScalar> Removal<S> {
    pub fn cost(&self) -> &S {
        match self {
            Removal::StayPut { cost, .. } | Removal::MirroredPair { cost, .. } => cost,
        }
    }
}

/// Itemized accounting of a trace reduction.
#[derive(Clone, Debug)]
pub struct Certificate<S> {
    pub removals: Vec<Removal<S>>,
    pub original_cost: S,
    pub reduced_cost: S,
    /// Constant subtracted from the potential before reduction.
    pub normalization_shift: f64,
}

impl<S: ExactScalar> Certificate<S> {
    pub fn removed_total(&self) -> S {
        self.removals.iter().fold(S::zero(), |s, r| s + r.cost().clone())
    }

    pub fn all_nonnegative(&self) -> bool {
        self.removals.iter().all(|r| *r.cost() >= S::zero())
    }

    /// `original - reduced - removed`; identically zero for an exact scalar.
    pub fn balance(&self) -> S {
        self.original_cost.clone() - self.reduced_cost.clone() - self.removed_total()
    }

    /// Every item nonnegative, the books balance and `original >= reduced`.
    pub fn holds(&self) -> bool {
        let balanced = if S::is_exact() {
            self.balance() == S::zero()
        } else {
            self.balance().abs().to_f64_approx() <= 1e-9 * (1.0 + self.original_cost.abs().to_f64_approx())
        };
        self.all_nonnegative() && balanced && self.original_cost >= self.reduced_cost
    }
}

#[derive(Clone, Debug)]
pub struct Reduction<S> {
    /// Player II's surviving rounds, in order.
    pub reduced: GameTranscript<S>,
    /// Indices of the surviving rounds in the original transcript.
    pub kept: Vec<usize>,
    pub certificate: Certificate<S>,
}

/// Removes every stay-put round and every mirrored pair from a transcript in which player I
/// follows the trace-back strategy anchored at `anchor`, leaving a pure player-II path.
///
/// The transcript's potential is expected to be normalized by [`crate::model::normalize_potential`];
/// `normalization_shift` is recorded in the certificate.
pub fn trace_reduce<S: ExactScalar>(
    transcript: &GameTranscript<S>,
    anchor: &[S],
    g: &InitialData<f64>,
    normalization_shift: f64,
) -> Result<Reduction<S>> {
    if transcript.start() != anchor {
        return Err(Error::StrategyPattern { round: 0, reason: "play does not start at the anchor".into() });
    }
    let states = transcript.states();
    let costs = transcript.round_costs();
    let mut stack: Vec<usize> = Vec::new();
    let mut removals = Vec::new();
    let mut removed = vec![false; transcript.rounds().len()];
    for (j, r) in transcript.rounds().iter().enumerate() {
        match r.control {
            Control::Two => stack.push(j),
            Control::One if states[j] == anchor => {
                if r.a.iter().any(|c| *c != S::zero()) {
                    return Err(Error::StrategyPattern { round: j, reason: "player I must stay put at the anchor".into() });
                }
                removals.push(Removal::StayPut { round: j, cost: costs[j].clone() });
                removed[j] = true;
            }
            Control::One => {
                let f = stack.pop().ok_or_else(|| Error::StrategyPattern { round: j, reason: "nothing to trace back".into() })?;
                let undo: Vec<S> = transcript.rounds()[f].b.iter().map(|c| -c.clone()).collect();
                if r.a != undo {
                    return Err(Error::StrategyPattern {
                        round: j,
                        reason: format!("player I must undo the step of round {f}"),
                    });
                }
                removals.push(Removal::MirroredPair { forward: f, back: j, cost: costs[f].clone() + costs[j].clone() });
                removed[f] = true;
                removed[j] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..removed.len()).filter(|&j| !removed[j]).collect();
    let rounds: Vec<Round<S>> = kept.iter().map(|&j| transcript.rounds()[j].clone()).collect();
    let reduced = GameTranscript::new(
        transcript.delta().clone(),
        transcript.eps_recip(),
        transcript.start().to_vec(),
        rounds,
        transcript.potential().clone(),
    )?;
    let certificate = Certificate {
        removals,
        original_cost: transcript_cost(transcript, g),
        reduced_cost: transcript_cost(&reduced, g),
        normalization_shift,
    };
    Ok(Reduction { reduced, kept, certificate })
}
