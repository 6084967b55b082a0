use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hj_solver::InitialData;
use crate::model::PotentialField;
use crate::scalar::ExactScalar;

/// Which player controls the round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// Player II hands the round to player I, who moves by `a`.
    One,
    /// Player II moves by `b`.
    Two,
}

impl Control {
    pub fn index(self) -> u8 {
        match self {
            Control::One => 1,
            Control::Two => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Round<S> {
    pub control: Control,
    /// Player II's vector, `|b| <= 1`.
    pub b: Vec<S>,
    /// Player I's vector, `|a| <= 1`.
    pub a: Vec<S>,
}

impl<S: ExactScalar> Round<S> {
    /// Vector that moves the state.
    pub fn velocity(&self) -> &[S] {
        match self.control {
            Control::One => &self.a,
            Control::Two => &self.b,
        }
    }
}

/// A discrete play of the two-player game with running cost `h(1, x) = -1 - V(x)`,
/// `h(2, x) = 1 - V(x)` and dynamics `f(a, (1, b)) = a`, `f(a, (2, b)) = b`.
///
/// Round `j` moves the state from `xi_j` to `xi_j + delta v_j` and costs
/// `delta h(i_j, m_j / eps)` with `m_j` the round's midpoint.
#[derive(Clone, Debug)]
pub struct GameTranscript<S> {
    delta: S,
    eps_recip: u32,
    start: Vec<S>,
    rounds: Vec<Round<S>>,
    potential: PotentialField<f64>,
}

fn unit_ball<S: ExactScalar>(v: &[S]) -> bool {
    v.iter().fold(S::zero(), |s, c| s + c.clone() * c.clone()) <= S::one()
}

impl<S: ExactScalar> GameTranscript<S> {
    pub fn new(
        delta: S,
        eps_recip: u32,
        start: Vec<S>,
        rounds: Vec<Round<S>>,
        potential: PotentialField<f64>,
    ) -> Result<Self> {
        let dim = potential.dim();
        if !(delta > S::zero()) || eps_recip == 0 {
            return Err(Error::invalid("time step and eps reciprocal must be positive"));
        }
        if start.len() != dim {
            return Err(Error::invalid("start point dimension differs from the potential's"));
        }
        for (j, r) in rounds.iter().enumerate() {
            if r.a.len() != dim || r.b.len() != dim {
                return Err(Error::invalid(format!("round {j}: control vectors must have dimension {dim}")));
            }
            if !unit_ball(&r.a) || !unit_ball(&r.b) {
                return Err(Error::invalid(format!("round {j}: control outside the closed unit ball")));
            }
        }
        Ok(Self { delta, eps_recip, start, rounds, potential })
    }

    pub fn delta(&self) -> &S {
        &self.delta
    }

    pub fn eps_recip(&self) -> u32 {
        self.eps_recip
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn start(&self) -> &[S] {
        &self.start
    }

    pub fn rounds(&self) -> &[Round<S>] {
        &self.rounds
    }

    pub fn potential(&self) -> &PotentialField<f64> {
        &self.potential
    }

    /// `delta` times the number of rounds.
    pub fn duration(&self) -> S {
        (0..self.rounds.len()).fold(S::zero(), |s, _| s + self.delta.clone())
    }

    /// States `xi_0, ..., xi_R`.
    pub fn states(&self) -> Vec<Vec<S>> {
        let mut out = Vec::with_capacity(self.rounds.len() + 1);
        let mut x = self.start.clone();
        out.push(x.clone());
        for r in &self.rounds {
            for (c, v) in x.iter_mut().zip(r.velocity()) {
                *c = c.clone() + self.delta.clone() * v.clone();
            }
            out.push(x.clone());
        }
        out
    }

    pub fn end(&self) -> Vec<S> {
        self.states().pop().expect("at least the start state")
    }

    /// `h(i, x / eps)` with `x` given in the slow variable.
    pub fn running_cost(&self, control: Control, x: &[S]) -> S {
        let y: Vec<f64> = x.iter().map(|c| c.to_f64_approx() * self.eps_recip as f64).collect();
        let v = self.potential.eval(&y);
        let h = match control {
            Control::One => -1.0 - v,
            Control::Two => 1.0 - v,
        };
        S::from_f64_exact(h).expect("finite potential values")
    }

    /// Cost of each round.
    pub fn round_costs(&self) -> Vec<S> {
        let states = self.states();
        let two = S::one() + S::one();
        self.rounds
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let mid: Vec<S> = states[j].iter().zip(&states[j + 1]).map(|(p, q)| (p.clone() + q.clone()) / two.clone()).collect();
                self.delta.clone() * self.running_cost(r.control, &mid)
            })
            .collect()
    }
}

/// `g(xi_R) + sum_j delta h(i_j, m_j / eps)`.
pub fn transcript_cost<S: ExactScalar>(transcript: &GameTranscript<S>, g: &InitialData<f64>) -> S {
    let end: Vec<f64> = transcript.end().iter().map(|c| c.to_f64_approx()).collect();
    let terminal = S::from_f64_exact(g.eval(&end)).expect("finite terminal data");
    transcript.round_costs().into_iter().fold(terminal, |s, c| s + c)
}

/// Parameters of [`conforming_transcript`].
#[derive(Clone, Debug)]
pub struct StrategyParams {
    pub rounds: usize,
    /// Probability that player II hands a round to player I.
    pub p_one: f64,
    /// Components of `b` are multiples of `1 / grain`.
    pub grain: u32,
    pub seed: u64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self { rounds: 200, p_one: 0.4, grain: 8, seed: 0 }
    }
}

/// Random play in which player II chooses freely and player I follows the trace-back strategy
/// anchored at `anchor`: stay put there, otherwise undo player II's latest unmatched step.
pub fn conforming_transcript<S: ExactScalar>(
    potential: &PotentialField<f64>,
    eps_recip: u32,
    delta: S,
    anchor: Vec<S>,
    params: &StrategyParams,
) -> Result<GameTranscript<S>> {
    let dim = potential.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let grain = params.grain.max(1) as i64;
    let den = S::from_f64_exact(grain as f64).expect("finite grain");
    let zero = vec![S::zero(); dim];
    let mut t = GameTranscript::new(delta, eps_recip, anchor, Vec::new(), potential.clone())?;
    let mut x = t.start.clone();
    let mut stack: Vec<Vec<S>> = Vec::new();
    for _ in 0..params.rounds {
        let b: Vec<S> = loop {
            let raw: Vec<i64> = (0..dim).map(|_| rng.gen_range(-grain..=grain)).collect();
            if raw.iter().map(|c| c * c).sum::<i64>() <= grain * grain {
                break raw.iter().map(|&c| S::from_f64_exact(c as f64).expect("small integer") / den.clone()).collect();
            }
        };
        let r = if rng.gen_bool(params.p_one) {
            let a = if x == t.start { zero.clone() } else { stack.pop().expect("off the anchor").iter().map(|c| -c.clone()).collect() };
            Round { control: Control::One, b, a }
        } else {
            stack.push(b.clone());
            Round { control: Control::Two, b, a: zero.clone() }
        };
        for (c, v) in x.iter_mut().zip(r.velocity()) {
            *c = c.clone() + t.delta.clone() * v.clone();
        }
        t.rounds.push(r);
    }
    Ok(t)
}
