use super::decompose::{decompose_half, IntervalDecomposition};
use super::path::PolyPath;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-time path built from a path on `[0, 2t]`, with its action bookkeeping.
#[derive(Clone, Debug)]
pub struct Reassembly<T> {
    /// Path on `[0, t]` from the origin to `y`.
    pub eta: PolyPath<T>,
    /// `None` on the direct-connector branch `t < n`.
    pub decomposition: Option<IntervalDecomposition<T>>,
    /// Integer shift applied to each piece.
    pub shifts: Vec<Vec<T>>,
    /// Connector displacements, first from the origin and last into `y`.
    pub jumps: Vec<Vec<T>>,
    /// Duration of each connector.
    pub connector_time: T,
    /// Start `d` of the unit interval run at double speed.
    pub cheap_interval: Option<usize>,
    pub action_gamma: T,
    pub action_eta: T,
    /// `2 action(eta) - action(gamma)`.
    pub c_meas: T,
}

impl<T: Real> Reassembly<T> {
    /// Largest connector speed.
    pub fn max_connector_speed(&self) -> T {
        self.jumps.iter().map(|j| j.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()).fold(T::zero(), T::max)
            / self.connector_time
    }
}

/// Straight piece of the rearranged path `gamma~` in its own time.
#[derive(Clone, Debug)]
struct Segment<T> {
    s: [T; 2],
    x: [Vec<T>; 2],
}

/// Cuts `gamma` (from the origin at time 0 to `2y` at time `2t`) into the pieces of a half
/// decomposition of `s -> (gamma(s), s)`, shifts them by integer vectors so that consecutive
/// pieces jump by a vector in `[0,1)^n`, runs the cheapest unit interval at double speed and
/// spends the saved half unit on `k + 1` straight connectors of equal duration.
///
/// For `t < n` the result is the straight path `s -> s y / t`.
pub fn reassemble_half_time<T, L>(gamma: &PolyPath<T>, l: L, tol: T) -> Result<Reassembly<T>>
where
    T: Real,
    L: Fn(&[T], &[T]) -> Result<Option<T>>,
{
    let n = gamma.dim();
    if gamma.start_time() != T::zero() || gamma.start().iter().any(|&c| c != T::zero()) {
        return Err(Error::invalid("gamma must start at the origin at time 0"));
    }
    let t = gamma.duration() / T::lit(2.0);
    let two = T::lit(2.0);
    let y: Vec<T> = gamma.end().iter().map(|&c| c / two).collect();
    let action_gamma = gamma.action(&l)?;
    if t < T::lit(n as f64) {
        let eta = PolyPath::new(vec![T::zero(), t], vec![vec![T::zero(); n], y.clone()])?;
        let action_eta = eta.action(&l)?;
        return Ok(Reassembly {
            eta,
            decomposition: None,
            shifts: Vec::new(),
            jumps: vec![y],
            connector_time: t,
            cheap_interval: None,
            action_gamma,
            action_eta,
            c_meas: two * action_eta - action_gamma,
        });
    }

    let xi = PolyPath::new(
        gamma.breaks().to_vec(),
        gamma.breaks().iter().zip(gamma.vertices()).map(|(&s, v)| v.iter().copied().chain(std::iter::once(s)).collect()).collect(),
    )?;
    let dec = decompose_half(&xi, tol)?;
    let k = dec.len();

    // Pieces in temporal order, shifted and laid end to end in gamma~ time.
    let mut segments: Vec<Vec<Segment<T>>> = Vec::with_capacity(k);
    let mut shifts = Vec::with_capacity(k);
    let mut jumps = Vec::with_capacity(k + 1);
    let mut offset = T::zero();
    let mut prev_end: Vec<T> = vec![T::zero(); n];
    for (j, iv) in dec.intervals.iter().enumerate() {
        let (a, b) = (iv[0], iv[1]);
        let start = gamma.eval(a);
        let shift: Vec<T> = if j == 0 {
            start.iter().map(|c| -c.floor()).collect()
        } else {
            start.iter().zip(&prev_end).map(|(s, p)| -(*s - *p).floor()).collect()
        };
        let shifted = |v: &[T]| v.iter().zip(&shift).map(|(c, w)| *c + *w).collect::<Vec<T>>();
        let mut times = vec![a];
        times.extend(gamma.breaks().iter().copied().filter(|&s| s > a && s < b));
        times.push(b);
        let piece: Vec<Segment<T>> = times
            .windows(2)
            .map(|w| Segment { s: [offset + (w[0] - a), offset + (w[1] - a)], x: [shifted(&gamma.eval(w[0])), shifted(&gamma.eval(w[1]))] })
            .collect();
        let first = shifted(&start);
        jumps.push(first.iter().zip(&prev_end).map(|(f, p)| *f - *p).collect());
        prev_end = shifted(&gamma.eval(b));
        offset += b - a;
        segments.push(piece);
        shifts.push(shift);
    }
    jumps.push(y.iter().zip(&prev_end).map(|(a, b)| *a - *b).collect());
    let total = offset;
    if total < T::one() {
        return Err(Error::invalid(format!("pieces last {total}, shorter than one time unit")));
    }

    // Split at integer times so each segment lies in one unit interval.
    let split: Vec<Vec<Segment<T>>> = segments
        .iter()
        .map(|piece| {
            let mut out = Vec::new();
            for seg in piece {
                let mut cuts = vec![seg.s[0]];
                let mut c = seg.s[0].floor() + T::one();
                while c < seg.s[1] {
                    cuts.push(c);
                    c += T::one();
                }
                cuts.push(seg.s[1]);
                let at = |s: T| {
                    let w = (s - seg.s[0]) / (seg.s[1] - seg.s[0]);
                    seg.x[0].iter().zip(&seg.x[1]).map(|(u, v)| *u + (*v - *u) * w).collect::<Vec<T>>()
                };
                for w in cuts.windows(2) {
                    if w[1] > w[0] {
                        out.push(Segment { s: [w[0], w[1]], x: [at(w[0]), at(w[1])] });
                    }
                }
            }
            out
        })
        .collect();

    let seg_action = |seg: &Segment<T>| -> Result<T> {
        PolyPath::new(seg.s.to_vec(), seg.x.to_vec()).map_or(Ok(T::zero()), |p| p.action(&l))
    };
    let units = (total - T::one()).floor().to_usize().unwrap_or(0) + 1;
    let mut unit_action = vec![T::zero(); units];
    for seg in split.iter().flatten() {
        let d = ((seg.s[0] + seg.s[1]) / two).floor().to_usize().unwrap_or(0);
        if d < units {
            unit_action[d] += seg_action(seg)?;
        }
    }
    let d = (0..units)
        .min_by(|&i, &j| unit_action[i].partial_cmp(&unit_action[j]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let dt = T::lit(d as f64);
    let half = T::lit(0.5);
    let warp = |s: T| s - half * (s - dt).max(T::zero()).min(T::one());

    let connector_time = (t - (total - half)) / T::lit((k + 1) as f64);
    if !(connector_time > T::zero()) {
        return Err(Error::invalid("pieces leave no time for connectors"));
    }
    let mut breaks = vec![T::zero()];
    let mut vertices = vec![vec![T::zero(); n]];
    for (j, piece) in split.iter().enumerate() {
        let lag = connector_time * T::lit((j + 1) as f64);
        if let Some(first) = piece.first() {
            breaks.push(warp(first.s[0]) + lag);
            vertices.push(first.x[0].clone());
        }
        for seg in piece {
            let s = warp(seg.s[1]) + lag;
            if s > breaks[breaks.len() - 1] {
                breaks.push(s);
                vertices.push(seg.x[1].clone());
            } else {
                *vertices.last_mut().expect("nonempty") = seg.x[1].clone();
            }
        }
    }
    if !(t > breaks[breaks.len() - 1]) {
        return Err(Error::invalid("time bookkeeping overran the horizon"));
    }
    breaks.push(t);
    vertices.push(y);
    let eta = PolyPath::new(breaks, vertices)?;
    let action_eta = eta.action(&l)?;
    Ok(Reassembly {
        eta,
        decomposition: Some(dec),
        shifts,
        jumps,
        connector_time,
        cheap_interval: Some(d),
        action_gamma,
        action_eta,
        c_meas: two * action_eta - action_gamma,
    })
}
