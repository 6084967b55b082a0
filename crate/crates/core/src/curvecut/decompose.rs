use super::path::PolyPath;
use super::sphere::{odd_map_zero, solve_square};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Disjoint sorted intervals whose increments add up to half the total increment of a path.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalDecomposition<T> {
    pub intervals: Vec<[T; 2]>,
    /// `sum (xi(b_i) - xi(a_i)) - (xi(end) - xi(start)) / 2`.
    pub residual: Vec<T>,
    /// Zero of the odd map the intervals were read from.
    pub sphere_point: Vec<T>,
}

impl<T: Real> IntervalDecomposition<T> {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn residual_norm(&self) -> T {
        self.residual.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()
    }

    pub fn total_length(&self) -> T {
        self.intervals.iter().fold(T::zero(), |s, iv| s + (iv[1] - iv[0]))
    }

    /// Bound `floor((m + 1) / 2)` on the interval count for a path in `R^m`.
    pub fn max_intervals(m: usize) -> usize {
        (m + 1) / 2
    }

    /// Sorted, pairwise disjoint and inside `[lo, hi]`.
    pub fn is_disjoint_within(&self, lo: T, hi: T) -> bool {
        self.intervals.iter().all(|iv| iv[0] >= lo && iv[1] <= hi && iv[0] < iv[1])
            && self.intervals.windows(2).all(|w| w[0][1] < w[1][0])
    }
}

/// Partition points `t_0 <= ... <= t_{m+1}` of the path domain with `t_i - t_{i-1}`
/// proportional to `x_i^2`.
fn partition<T: Real>(x: &[T], s0: T, len: T) -> Vec<T> {
    let total = x.iter().fold(T::zero(), |s, &c| s + c * c);
    let mut t = Vec::with_capacity(x.len() + 1);
    let mut acc = T::zero();
    t.push(s0);
    for (i, &c) in x.iter().enumerate() {
        acc += c * c;
        t.push(if i + 1 == x.len() { s0 + len } else { s0 + len * (acc / total) });
    }
    t
}

/// Intervals `[t_{i-1}, t_i]` over the coordinates selected by `keep`, touching ones merged and
/// numerically empty ones dropped.
fn class_intervals<T: Real>(t: &[T], x: &[T], keep: impl Fn(T) -> bool, min_len: T) -> Vec<[T; 2]> {
    let mut out: Vec<[T; 2]> = Vec::new();
    for (i, &c) in x.iter().enumerate() {
        if !keep(c) {
            continue;
        }
        let (a, b) = (t[i], t[i + 1]);
        match out.last_mut() {
            Some(last) if last[1] >= a => last[1] = b,
            _ => out.push([a, b]),
        }
    }
    out.retain(|iv| iv[1] - iv[0] > min_len);
    out
}

fn class_residual<T: Real>(path: &PolyPath<T>, intervals: &[[T; 2]]) -> Vec<T> {
    let m = path.dim();
    let mut r: Vec<T> = (0..m).map(|i| -(path.end()[i] - path.start()[i]) / T::lit(2.0)).collect();
    for iv in intervals {
        let (a, b) = (path.eval(iv[0]), path.eval(iv[1]));
        for i in 0..m {
            r[i] += b[i] - a[i];
        }
    }
    r
}

/// Exact zero search over the cells of the path's breakpoints.
///
/// With alternating signs `sigma_i = (-1)^(i+1)` the odd map reads
/// `-sigma_1 xi(s0) + sigma_(m+1) xi(s1) + 2 sum_i sigma_i xi(t_i)`, which is affine in
/// `(t_1, ..., t_m)` once each `t_i` is pinned to a segment. Every nondecreasing choice of
/// segments is solved as an `m x m` linear system; singular cells are skipped.
fn cell_zero<T: Real>(path: &PolyPath<T>, tol: T) -> Option<Vec<T>> {
    let m = path.dim();
    let b = path.breaks();
    let v = path.vertices();
    let nseg = b.len() - 1;
    let sigma = |i: usize| if i % 2 == 1 { T::one() } else { -T::one() };
    let two = T::lit(2.0);
    let slack = path.duration() * T::lit(1e-12);
    let vel = path.velocities();
    let mut segs = vec![0usize; m];
    loop {
        // Constant part and columns of the affine map.
        let mut rhs: Vec<T> = (0..m).map(|k| sigma(1) * v[0][k] - sigma(m + 1) * v[nseg][k]).collect();
        let mut a = vec![vec![T::zero(); m]; m];
        for (i, &j) in segs.iter().enumerate() {
            let c = two * sigma(i + 1);
            for k in 0..m {
                rhs[k] -= c * (v[j][k] - vel[j][k] * b[j]);
                a[k][i] = c * vel[j][k];
            }
        }
        if let Some(t) = solve_square(a, rhs) {
            let inside = segs.iter().zip(&t).all(|(&j, &ti)| ti >= b[j] - slack && ti <= b[j + 1] + slack)
                && t.windows(2).all(|w| w[0] <= w[1] + slack);
            if inside && t.iter().all(|c| c.is_finite()) {
                let mut t: Vec<T> = t.iter().map(|&c| c.max(b[0]).min(b[nseg])).collect();
                for i in 1..m {
                    t[i] = t[i].max(t[i - 1]);
                }
                let mut knots = vec![b[0]];
                knots.extend(t.iter().copied());
                knots.push(b[nseg]);
                let x: Vec<T> = (0..=m).map(|i| sigma(i + 1) * (knots[i + 1] - knots[i]).max(T::zero()).sqrt()).collect();
                let norm = x.iter().fold(T::zero(), |s, &c| s + c * c).sqrt();
                let x: Vec<T> = x.iter().map(|&c| c / norm).collect();
                let r = {
                    let mut acc = vec![T::zero(); m];
                    for i in 0..=m {
                        let (lo, hi) = (path.eval(knots[i]), path.eval(knots[i + 1]));
                        for k in 0..m {
                            acc[k] += sigma(i + 1) * (hi[k] - lo[k]);
                        }
                    }
                    acc.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()
                };
                if r <= tol {
                    return Some(x);
                }
            }
        }
        // Next nondecreasing tuple.
        let mut i = m;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if segs[i] + 1 < nseg {
                segs[i] += 1;
                for k in i + 1..m {
                    segs[k] = segs[i];
                }
                break;
            }
        }
    }
}

/// Splits the path into at most `floor((m+1)/2)` disjoint intervals carrying half of its total
/// increment, to within `tol` in the Euclidean norm.
///
/// Signs of a zero of the odd map `x -> sum sign(x_i) (xi(t_i) - xi(t_{i-1}))` on `S^m` are read
/// off as a two-class partition of the domain; a class with few enough intervals is returned,
/// preferring fewer intervals and then the lexicographically smaller list.
pub fn decompose_half<T: Real>(path: &PolyPath<T>, tol: T) -> Result<IntervalDecomposition<T>> {
    let m = path.dim();
    let (s0, len) = (path.start_time(), path.duration());
    let odd = |x: &[T]| {
        let t = partition(x, s0, len);
        let mut acc = vec![T::zero(); m];
        let mut lo = vec![T::zero(); m];
        let mut hi = vec![T::zero(); m];
        for (i, &c) in x.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            path.eval_into(t[i], &mut lo);
            path.eval_into(t[i + 1], &mut hi);
            let sgn = if c > T::zero() { T::one() } else { -T::one() };
            for k in 0..m {
                acc[k] += sgn * (hi[k] - lo[k]);
            }
        }
        acc
    };
    // The class residual is half the map value, so this leaves room for rounding.
    let x = match odd_map_zero(odd, m, tol) {
        Err(Error::ZeroNotFound { best_residual }) => {
            cell_zero(path, tol).ok_or(Error::ZeroNotFound { best_residual })?
        }
        other => other?,
    };
    let t = partition(&x, s0, len);
    let min_len = len * T::lit(1e-14);
    let pos = class_intervals(&t, &x, |c| c > T::zero(), min_len);
    let neg = class_intervals(&t, &x, |c| c < T::zero(), min_len);
    let bound = IntervalDecomposition::<T>::max_intervals(m);
    let mut candidates: Vec<(Vec<[T; 2]>, Vec<T>)> = Vec::new();
    for (ivs, sgn) in [(pos, T::one()), (neg, -T::one())] {
        if ivs.len() <= bound {
            candidates.push((ivs, x.iter().map(|&c| c * sgn).collect()));
        }
    }
    candidates.sort_by(|a, b| {
        a.0.len().cmp(&b.0.len()).then_with(|| {
            let fa = a.0.iter().flatten();
            let fb = b.0.iter().flatten();
            fa.partial_cmp(fb).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let (intervals, sphere_point) = candidates
        .into_iter()
        .next()
        .ok_or_else(|| Error::invalid("no sign class within the interval bound"))?;
    let residual = class_residual(path, &intervals);
    let out = IntervalDecomposition { intervals, residual, sphere_point };
    if out.residual_norm() > tol {
        return Err(Error::ZeroNotFound { best_residual: out.residual_norm().to_f64_lossy() });
    }
    Ok(out)
}
