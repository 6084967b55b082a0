use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::model::{HamiltonianModel, ModelLagrangian};
use crate::scalar::Real;

/// Lattice point in units of the spacing `h`; the second entry is zero in 1D.
pub type Node = [i64; 2];

/// Construction parameters of a [`DiscreteActionMetric`].
#[derive(Clone, Debug)]
pub struct MetricOptions<T> {
    /// Lattice cells per unit length, `h = 1 / cells_per_unit`.
    pub cells_per_unit: usize,
    pub tau: T,
    /// Largest displacement per step along each axis, in cells.
    pub max_stride: usize,
    /// Optional cap on `|displacement| / tau`.
    pub speed_cap: Option<T>,
    /// `p` box radius and resolution for numerical Legendre transforms.
    pub p_radius: Option<T>,
    pub p_steps: Option<usize>,
}

impl<T: Real> Default for MetricOptions<T> {
    fn default() -> Self {
        Self { cells_per_unit: 4, tau: T::lit(0.5), max_stride: 3, speed_cap: None, p_radius: None, p_steps: None }
    }
}

/// Minimal discrete action over lattice paths with time step `tau`.
///
/// A step from `z` by `d` costs `tau L(z + d h / 2, d h / tau)`, rounded to a multiple of
/// `2^-QUANTUM_BITS`, so path costs are exact sums. Costs depend on `z` only modulo the period.
pub struct DiscreteActionMetric<T: Real> {
    dim: usize,
    cells: usize,
    h: T,
    tau: T,
    stride: i64,
    moves: Vec<Node>,
    /// `costs[class * moves.len() + m]`, `class` the lattice node modulo the period.
    costs: Vec<Option<T>>,
    id: String,
    memo: Mutex<HashMap<(usize, Node, Node), Option<T>>>,
}

impl<T: Real> std::fmt::Debug for DiscreteActionMetric<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteActionMetric")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("cells", &self.cells)
            .field("tau", &self.tau)
            .field("moves", &self.moves.len())
            .finish()
    }
}

/// Minimizing lattice path with its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePath<T> {
    pub nodes: Vec<Node>,
    pub cost: T,
}

impl<T: Real> DiscreteActionMetric<T> {
    /// Metric of the model's Lagrangian.
    pub fn new(model: &HamiltonianModel<T>, opts: &MetricOptions<T>) -> Result<Self> {
        let qmax = T::lit(opts.max_stride as f64) / (T::lit(opts.cells_per_unit as f64) * opts.tau);
        let lagr = ModelLagrangian::new(model, qmax, opts.p_radius, opts.p_steps);
        Self::build(model.dim(), opts, model.id(), model.is_even(), |y, q| lagr.eval(y, q))
    }

    /// Metric of an arbitrary Lagrangian; `None` marks `L = +inf`.
    pub fn from_lagrangian<F>(dim: usize, opts: &MetricOptions<T>, id: &str, even: bool, l: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Option<T>,
    {
        Self::build(dim, opts, id, even, |y, q| Ok(l(y, q)))
    }

    fn build<F>(dim: usize, opts: &MetricOptions<T>, id: &str, even: bool, l: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Result<Option<T>>,
    {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid("metric dimension must be 1 or 2"));
        }
        if opts.cells_per_unit == 0 || opts.max_stride == 0 || opts.tau <= T::zero() {
            return Err(Error::invalid("lattice spacing, stride and tau must be positive"));
        }
        let cells = opts.cells_per_unit;
        let h = T::one() / T::lit(cells as f64);
        let tau = opts.tau;
        let s = opts.max_stride as i64;
        let mut moves = Vec::new();
        for a in -s..=s {
            for b in if dim == 2 { -s..=s } else { 0..=0 } {
                let speed = (T::lit((a * a + b * b) as f64)).sqrt() * h / tau;
                if opts.speed_cap.map_or(true, |cap| speed <= cap) {
                    moves.push([a, b]);
                }
            }
        }
        let classes = cells.pow(dim as u32);
        let nm = moves.len();
        let mut costs = vec![None; classes * nm];
        let index_of: HashMap<Node, usize> = moves.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let two_k = 2 * cells as i64;
        for class in 0..classes {
            let z: Node = if dim == 1 { [class as i64, 0] } else { [(class / cells) as i64, (class % cells) as i64] };
            for (mi, d) in moves.iter().enumerate() {
                if even {
                    // Reuse the value at the mirrored velocity from the same midpoint.
                    let back = [-d[0], -d[1]];
                    let zb = [z[0] + d[0], z[1] + d[1]];
                    let cb = class_of(zb, cells, dim);
                    if let Some(&bi) = index_of.get(&back) {
                        if (cb, bi) < (class, mi) {
                            costs[class * nm + mi] = costs[cb * nm + bi];
                            continue;
                        }
                    }
                }
                let half = |i: usize| T::lit((2 * z[i] + d[i]).rem_euclid(two_k) as f64) / T::lit(two_k as f64);
                let y = [half(0), half(1)];
                let q = [T::lit(d[0] as f64) * h / tau, T::lit(d[1] as f64) * h / tau];
                costs[class * nm + mi] = l(&y[..dim], &q[..dim])?.map(|v| (tau * v).quantize());
            }
        }
        if costs.iter().flatten().any(|c| c.abs() * T::lit(1e4) > T::exact_sum_bound()) {
            return Err(Error::invalid("step costs too large for exact summation"));
        }
        Ok(Self { dim, cells, h, tau, stride: s, moves, costs, id: id.to_string(), memo: Mutex::new(HashMap::new()) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn cells_per_unit(&self) -> usize {
        self.cells
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn stride(&self) -> i64 {
        self.stride
    }

    pub fn moves(&self) -> &[Node] {
        &self.moves
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Cost of the step from `z` by `moves[m]`, `None` when infinite.
    #[inline]
    pub fn step_cost(&self, z: Node, m: usize) -> Option<T> {
        self.costs[class_of(z, self.cells, self.dim) * self.moves.len() + m]
    }

    /// Number of equivalence classes of lattice nodes modulo the period.
    pub fn classes(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Cost by node class, for cell computations.
    pub(crate) fn class_cost(&self, class: usize, m: usize) -> Option<T> {
        self.costs[class * self.moves.len() + m]
    }

    pub(crate) fn class_node(&self, class: usize) -> Node {
        if self.dim == 1 {
            [class as i64, 0]
        } else {
            [(class / self.cells) as i64, (class % self.cells) as i64]
        }
    }

    pub(crate) fn class_index(&self, z: Node) -> usize {
        class_of(z, self.cells, self.dim)
    }

    /// `min_m cost(z, m)` and `max_z cost(z, 0-move)` over all classes.
    pub fn cost_bounds(&self) -> (T, T) {
        let rest = self.moves.iter().position(|m| *m == [0, 0]).expect("stencil contains the rest move");
        let min = self.costs.iter().flatten().copied().fold(T::infinity(), T::min);
        let max_rest = (0..self.classes())
            .filter_map(|c| self.class_cost(c, rest))
            .fold(T::neg_infinity(), T::max);
        (min, max_rest)
    }

    /// Converts a point to lattice units; it must lie on the lattice.
    pub fn to_lattice(&self, x: &[T]) -> Result<Node> {
        let mut out = [0i64; 2];
        for (i, &c) in x.iter().enumerate().take(self.dim) {
            let s = c / self.h;
            let r = s.round();
            if (s - r).abs() > T::lit(1e-9) {
                return Err(Error::invalid(format!("point {x:?} is not on the lattice of spacing {}", self.h)));
            }
            out[i] = r.to_i64().ok_or_else(|| Error::invalid("lattice coordinate out of range"))?;
        }
        Ok(out)
    }

    /// Number of steps for duration `t`; it must be a multiple of `tau`.
    pub fn to_steps(&self, t: T) -> Result<usize> {
        let s = t / self.tau;
        let r = s.round();
        if (s - r).abs() > T::lit(1e-9) || r < T::zero() {
            return Err(Error::invalid(format!("time {t} is not a multiple of tau = {}", self.tau)));
        }
        Ok(r.to_usize().unwrap_or(0))
    }

    /// `m(t, x, y)` for lattice points `x`, `y` and `t` a multiple of `tau`.
    pub fn action_metric(&self, t: T, x: &[T], y: &[T]) -> Result<T> {
        self.value(self.to_steps(t)?, self.to_lattice(x)?, self.to_lattice(y)?)
    }

    /// Minimal cost of an `n`-step lattice path from `x` to `y`.
    pub fn value(&self, n: usize, x: Node, y: Node) -> Result<T> {
        if let Some(v) = self.memo.lock().expect("memo lock").get(&(n, x, y)) {
            return v.ok_or(Error::Unreachable);
        }
        let v = self.solve(n, x, y, false).map(|(v, _)| v);
        let stored = match &v {
            Ok(c) => Some(*c),
            Err(Error::Unreachable) => None,
            Err(_) => return v,
        };
        self.memo.lock().expect("memo lock").insert((n, x, y), stored);
        v
    }

    /// A minimizing path, ties broken by the first move in stencil order.
    pub fn minimizer(&self, n: usize, x: Node, y: Node) -> Result<DiscretePath<T>> {
        let (cost, seq) = self.solve(n, x, y, true)?;
        let seq = seq.expect("moves kept");
        let mut nodes = vec![y];
        let mut z = y;
        for k in (0..n).rev() {
            let m = self.moves[seq[k] as usize];
            z = [z[0] - m[0], z[1] - m[1]];
            nodes.push(z);
        }
        nodes.reverse();
        debug_assert_eq!(nodes[0], x);
        Ok(DiscretePath { nodes, cost })
    }

    /// `m(n, z, y)` for every start `z` within `n` steps of `y`, by a backward sweep.
    pub fn values_to(&self, n: usize, y: Node) -> Result<ReachField<T>> {
        if self.dim == 1 && y[1] != 0 {
            return Err(Error::invalid("1D lattice points carry a zero second coordinate"));
        }
        let inf = T::infinity();
        let mut field = ReachField { lo: y, hi: y, values: vec![T::zero()] };
        for _ in 0..n {
            let mut lo = field.lo;
            let mut hi = field.hi;
            for i in 0..self.dim {
                lo[i] -= self.stride;
                hi[i] += self.stride;
            }
            let grown = SliceBox { lo, hi };
            let old = SliceBox { lo: field.lo, hi: field.hi };
            let w1 = old.width(1);
            let mut next = vec![inf; grown.len()];
            for a in lo[0]..=hi[0] {
                for b in lo[1]..=hi[1] {
                    let z = [a, b];
                    let base = class_of(z, self.cells, self.dim) * self.moves.len();
                    let mut best = inf;
                    for (mi, d) in self.moves.iter().enumerate() {
                        let t = [a + d[0], b + d[1]];
                        if t[0] < old.lo[0] || t[0] > old.hi[0] || t[1] < old.lo[1] || t[1] > old.hi[1] {
                            continue;
                        }
                        let v = field.values[((t[0] - old.lo[0]) as usize) * w1 + (t[1] - old.lo[1]) as usize];
                        if let Some(c) = self.costs[base + mi] {
                            if v + c < best {
                                best = v + c;
                            }
                        }
                    }
                    next[grown.offset(z)] = best;
                }
            }
            field = ReachField { lo, hi, values: next };
        }
        Ok(field)
    }

    /// Exact cost of a lattice path, `None` if a step is not in the stencil or infinite.
    pub fn path_cost(&self, nodes: &[Node]) -> Option<T> {
        let mut total = T::zero();
        for w in nodes.windows(2) {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let m = self.moves.iter().position(|c| *c == d)?;
            total += self.step_cost(w[0], m)?;
        }
        Some(total)
    }

    fn boxes(&self, n: usize, x: Node, y: Node) -> Option<Vec<SliceBox>> {
        let s = self.stride;
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let k = k as i64;
            let r = n as i64 - k;
            let mut lo = [0i64; 2];
            let mut hi = [0i64; 2];
            for i in 0..self.dim {
                lo[i] = (x[i] - s * k).max(y[i] - s * r);
                hi[i] = (x[i] + s * k).min(y[i] + s * r);
                if lo[i] > hi[i] {
                    return None;
                }
            }
            out.push(SliceBox { lo, hi });
        }
        Some(out)
    }

    fn solve(&self, n: usize, x: Node, y: Node, keep: bool) -> Result<(T, Option<Vec<u8>>)> {
        if self.dim == 1 && (x[1] != 0 || y[1] != 0) {
            return Err(Error::invalid("1D lattice points carry a zero second coordinate"));
        }
        let boxes = self.boxes(n, x, y).ok_or(Error::Unreachable)?;
        let inf = T::infinity();
        let mut cur = vec![T::zero(); 1];
        let mut kept: Vec<Vec<u8>> = Vec::new();
        let nm = self.moves.len();
        let cells = self.cells as i64;
        for k in 0..n {
            let (b0, b1) = (&boxes[k], &boxes[k + 1]);
            let w0 = b0.width(1);
            let mut next = vec![inf; b1.len()];
            let mut arg = if keep { vec![u8::MAX; b1.len()] } else { Vec::new() };
            let w1 = b1.width(1);
            let mut row_cost = vec![inf; self.cells];
            for (mi, d) in self.moves.iter().enumerate() {
                let a_lo = b1.lo[0].max(b0.lo[0] + d[0]);
                let a_hi = b1.hi[0].min(b0.hi[0] + d[0]);
                let b_lo = b1.lo[1].max(b0.lo[1] + d[1]);
                let b_hi = b1.hi[1].min(b0.hi[1] + d[1]);
                if a_lo > a_hi || b_lo > b_hi {
                    continue;
                }
                for a in a_lo..=a_hi {
                    let za = a - d[0];
                    let ca = za.rem_euclid(cells) as usize;
                    for (cb, rc) in row_cost.iter_mut().enumerate() {
                        let class = if self.dim == 1 { ca } else { ca * self.cells + cb };
                        *rc = self.costs[class * nm + mi].unwrap_or(inf);
                    }
                    let src = ((za - b0.lo[0]) as usize) * w0;
                    let dst = ((a - b1.lo[0]) as usize) * w1;
                    let mut cb = (b_lo - d[1]).rem_euclid(cells) as usize;
                    for b in b_lo..=b_hi {
                        let zb = b - d[1];
                        let cand = cur[src + (zb - b0.lo[1]) as usize] + row_cost[cb];
                        let slot = dst + (b - b1.lo[1]) as usize;
                        if cand < next[slot] {
                            next[slot] = cand;
                            if keep {
                                arg[slot] = mi as u8;
                            }
                        }
                        cb += 1;
                        if cb == self.cells {
                            cb = 0;
                        }
                    }
                }
            }
            cur = next;
            if keep {
                kept.push(arg);
            }
        }
        let v = cur[0];
        if v == inf {
            return Err(Error::Unreachable);
        }
        if !keep {
            return Ok((v, None));
        }
        // Translate per-slice argmins into the move sequence of the path ending at y.
        let mut seq = vec![0u8; n];
        let mut z = y;
        for k in (0..n).rev() {
            let b1 = &boxes[k + 1];
            let m = kept[k][b1.offset(z)];
            seq[k] = m;
            let d = self.moves[m as usize];
            z = [z[0] - d[0], z[1] - d[1]];
        }
        Ok((v, Some(seq)))
    }
}

/// Values on a lattice box, `+inf` where the target is out of reach.
#[derive(Clone, Debug)]
pub struct ReachField<T> {
    pub lo: Node,
    pub hi: Node,
    /// Row-major over the box, second coordinate fastest.
    pub values: Vec<T>,
}

impl<T: Real> ReachField<T> {
    pub fn get(&self, z: Node) -> Option<T> {
        let inside = (0..2).all(|i| z[i] >= self.lo[i] && z[i] <= self.hi[i]);
        inside.then(|| self.values[SliceBox { lo: self.lo, hi: self.hi }.offset(z)])
    }

    /// Boxed nodes with their values.
    pub fn iter(&self) -> impl Iterator<Item = (Node, T)> + '_ {
        let w = (self.hi[1] - self.lo[1] + 1) as usize;
        self.values.iter().enumerate().map(move |(k, &v)| ([self.lo[0] + (k / w) as i64, self.lo[1] + (k % w) as i64], v))
    }
}

#[derive(Clone, Copy, Debug)]
struct SliceBox {
    lo: Node,
    hi: Node,
}

impl SliceBox {
    fn width(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    fn len(&self) -> usize {
        self.width(0) * self.width(1)
    }

    fn offset(&self, z: Node) -> usize {
        ((z[0] - self.lo[0]) as usize) * self.width(1) + (z[1] - self.lo[1]) as usize
    }
}

#[inline]
fn class_of(z: Node, cells: usize, dim: usize) -> usize {
    let k = cells as i64;
    if dim == 1 {
        z[0].rem_euclid(k) as usize
    } else {
        (z[0].rem_euclid(k) * k + z[1].rem_euclid(k)) as usize
    }
}
