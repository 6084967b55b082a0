use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::action::Node;
use crate::error::{Error, Result};
use crate::model::PotentialField;
use crate::scalar::Real;

/// Length structure `|dx| / a(x)` on the lattice `Z^n / res`, lifted to the plane.
///
/// Edges join 8 neighbours in 2D (2 in 1D); an edge costs its Euclidean length over `a` at its
/// midpoint, rounded to the summation quantum so that path lengths are exact sums.
pub struct PeriodicGraphMetric<T: Real> {
    dim: usize,
    res: usize,
    steps: Vec<Node>,
    /// `weights[class * steps.len() + s]`.
    weights: Vec<T>,
    /// Smallest edge weight per unit Euclidean length.
    rate: T,
    id: String,
}

impl<T: Real> std::fmt::Debug for PeriodicGraphMetric<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGraphMetric").field("id", &self.id).field("dim", &self.dim).field("res", &self.res).finish()
    }
}

/// Stable-norm estimate with its deviation sequence.
#[derive(Clone, Debug)]
pub struct StableNorm<T> {
    pub estimate: T,
    /// `d(0, lambda x)` for `lambda = 1..=lambda_max`.
    pub distances: Vec<T>,
    /// `d(0, lambda x) - lambda * estimate`.
    pub deviations: Vec<T>,
}

impl<T: Real> StableNorm<T> {
    /// `max |delta_lambda|` over `lambda <= l`.
    pub fn max_deviation(&self, l: usize) -> T {
        self.deviations.iter().take(l).fold(T::zero(), |m, d| m.max(d.abs()))
    }
}

impl<T: Real> PeriodicGraphMetric<T> {
    /// `res` lattice nodes per unit length along each axis.
    pub fn new(a: &PotentialField<T>, res: usize) -> Result<Self> {
        let dim = a.dim();
        if res == 0 {
            return Err(Error::invalid("resolution must be positive"));
        }
        let steps: Vec<Node> = if dim == 1 {
            vec![[1, 0], [-1, 0]]
        } else {
            vec![[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]]
        };
        let classes = res.pow(dim as u32);
        let two_r = 2 * res as i64;
        let mut weights = Vec::with_capacity(classes * steps.len());
        let mut rate = T::infinity();
        for c in 0..classes {
            let z: Node = if dim == 1 { [c as i64, 0] } else { [(c / res) as i64, (c % res) as i64] };
            for e in &steps {
                let half = |i: usize| T::lit((2 * z[i] + e[i]).rem_euclid(two_r) as f64) / T::lit(two_r as f64);
                let y = [half(0), half(1)];
                let av = a.eval(&y[..dim]);
                if !(av > T::zero()) {
                    return Err(Error::invalid(format!("coefficient must be positive, got {av} at {y:?}")));
                }
                let len = T::lit(((e[0] * e[0] + e[1] * e[1]) as f64).sqrt()) / T::lit(res as f64);
                let w = (len / av).quantize();
                rate = rate.min(w / len);
                weights.push(w);
            }
        }
        // Quantization may round up; keep the bound a true lower bound.
        rate = rate * T::lit(1.0 - 1e-12);
        Ok(Self { dim, res, steps, weights, rate, id: a.name().to_string() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.res
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    fn class(&self, z: Node) -> usize {
        let r = self.res as i64;
        if self.dim == 1 {
            z[0].rem_euclid(r) as usize
        } else {
            (z[0].rem_euclid(r) * r + z[1].rem_euclid(r)) as usize
        }
    }

    /// Shortest-path lengths from `origin` to `targets` (lattice indices), searched in the
    /// bounding box of all points widened by `margin` units. Errors unless every path that
    /// leaves the window is provably no shorter than the in-window distance.
    pub fn distances_in_window(&self, origin: Node, targets: &[Node], margin: usize) -> Result<Vec<T>> {
        let r = self.res as i64;
        let pad = margin as i64 * r;
        let mut lo = origin;
        let mut hi = origin;
        for t in targets {
            for i in 0..self.dim {
                lo[i] = lo[i].min(t[i]);
                hi[i] = hi[i].max(t[i]);
            }
        }
        for i in 0..self.dim {
            lo[i] -= pad;
            hi[i] += pad;
        }
        let w = [(hi[0] - lo[0] + 1) as usize, if self.dim == 2 { (hi[1] - lo[1] + 1) as usize } else { 1 }];
        let index = |z: Node| ((z[0] - lo[0]) as usize) * w[1] + (z[1] - lo[1]) as usize;
        let node = |k: usize| -> Node { [lo[0] + (k / w[1]) as i64, lo[1] + (k % w[1]) as i64] };
        let inside = |z: Node| (0..self.dim).all(|i| z[i] >= lo[i] && z[i] <= hi[i]);
        let on_boundary = |z: Node| (0..self.dim).any(|i| z[i] == lo[i] || z[i] == hi[i]);

        let total = w[0] * w[1];
        let mut dist = vec![T::infinity(); total];
        let mut done = vec![false; total];
        let mut pending: Vec<usize> = targets.iter().map(|&t| index(t)).collect();
        pending.sort_unstable();
        pending.dedup();
        let mut remaining = pending.len();
        let mut heap = BinaryHeap::new();
        dist[index(origin)] = T::zero();
        heap.push(Item { d: T::zero(), k: index(origin) });
        let mut target_max = T::zero();
        let mut boundary: Vec<(Node, T)> = Vec::new();
        let ns = self.steps.len();
        while let Some(Item { d, k }) = heap.pop() {
            if done[k] {
                continue;
            }
            if remaining == 0 && d > target_max {
                break;
            }
            done[k] = true;
            let z = node(k);
            if on_boundary(z) {
                boundary.push((z, d));
            }
            if pending.binary_search(&k).is_ok() {
                remaining -= 1;
                target_max = target_max.max(d);
            }
            let base = self.class(z) * ns;
            for (s, e) in self.steps.iter().enumerate() {
                let nz = [z[0] + e[0], z[1] + e[1]];
                if !inside(nz) {
                    continue;
                }
                let nk = index(nz);
                if done[nk] {
                    continue;
                }
                let nd = d + self.weights[base + s];
                if nd < dist[nk] {
                    dist[nk] = nd;
                    heap.push(Item { d: nd, k: nk });
                }
            }
        }
        if remaining > 0 {
            return Err(Error::Unreachable);
        }
        // An escaping path first meets the boundary at a settled node b, then needs at least
        // rate * |b - t| more; unsettled boundary nodes are already farther than every target.
        let unit = T::lit(r as f64);
        for &t in targets {
            let dt = dist[index(t)];
            for &(b, db) in &boundary {
                let gap = (0..self.dim).fold(T::zero(), |s, i| {
                    let c = T::lit((b[i] - t[i]) as f64) / unit;
                    s + c * c
                });
                let bound = db + self.rate * gap.sqrt();
                if bound < dt {
                    return Err(Error::WindowOverflow(format!(
                        "escape bound {bound} below target distance {dt} with margin {margin}"
                    )));
                }
            }
        }
        Ok(targets.iter().map(|&t| dist[index(t)]).collect())
    }

    /// [`distances_in_window`](Self::distances_in_window) from the origin, doubling the margin
    /// up to seven times before reporting overflow.
    pub fn distances(&self, targets: &[Node]) -> Result<Vec<T>> {
        let mut margin = 2;
        let mut last = None;
        for _ in 0..8 {
            match self.distances_in_window([0, 0], targets, margin) {
                Err(e @ Error::WindowOverflow(_)) => last = Some(e),
                other => return other,
            }
            margin *= 2;
        }
        Err(last.expect("at least one attempt"))
    }

    /// `d_a(0, x)` for a lattice point `x` in physical units.
    pub fn graph_distance(&self, x: &[T]) -> Result<T> {
        let mut z = [0i64; 2];
        for i in 0..self.dim {
            let s = x[i] * T::lit(self.res as f64);
            let r = s.round();
            if (s - r).abs() > T::lit(1e-9) {
                return Err(Error::invalid(format!("{x:?} is not a lattice point at resolution {}", self.res)));
            }
            z[i] = r.to_i64().ok_or_else(|| Error::invalid("coordinate out of range"))?;
        }
        Ok(self.distances(&[z])?[0])
    }

    /// Stable-norm estimate along the integer vector `x`, from `d(0, lambda x)`, `lambda <= lambda_max`.
    pub fn stable_norm_estimate(&self, x: &[i64], lambda_max: usize) -> Result<StableNorm<T>> {
        if lambda_max < 8 {
            return Err(Error::invalid("lambda_max must be at least 8"));
        }
        let r = self.res as i64;
        let targets: Vec<Node> = (1..=lambda_max as i64)
            .map(|l| {
                let mut z = [0i64; 2];
                for i in 0..self.dim {
                    z[i] = l * x[i] * r;
                }
                z
            })
            .collect();
        let distances = self.distances(&targets)?;
        let estimate = distances[lambda_max - 1] / T::lit(lambda_max as f64);
        let deviations = distances.iter().enumerate().map(|(i, d)| *d - T::lit((i + 1) as f64) * estimate).collect();
        Ok(StableNorm { estimate, distances, deviations })
    }
}

#[derive(Clone, Copy)]
struct Item<T> {
    d: T,
    k: usize,
}

impl<T: Real> PartialEq for Item<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl<T: Real> Eq for Item<T> {}

impl<T: Real> PartialOrd for Item<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<T: Real> Ord for Item<T> {
    // Min-heap on distance, then on node index.
    fn cmp(&self, o: &Self) -> Ordering {
        o.d.partial_cmp(&self.d).unwrap_or(Ordering::Equal).then_with(|| o.k.cmp(&self.k))
    }
}
