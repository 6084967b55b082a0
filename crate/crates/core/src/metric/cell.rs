use super::action::DiscreteActionMetric;
use crate::cell::EffectiveTable;
use crate::error::{Error, Result};
use crate::optim::{golden_max, nested_golden_max};
use crate::scalar::Real;

/// Effective Hamiltonian of a discrete action metric, from min-plus cycle means on the
/// period torus of the lattice.
///
/// With tilted step weights `c(z, d) - p . d h`, `lambda(p)` is the minimal mean weight per
/// step over closed walks; then `Hbar_d(p) = -lambda(p) / tau` and `m(t, 0, y)` stays within a
/// bounded distance of `t Lbar_d(y / t)`.
pub struct DiscreteCell<'a, T: Real> {
    metric: &'a DiscreteActionMetric<T>,
}

impl<'a, T: Real> DiscreteCell<'a, T> {
    pub fn new(metric: &'a DiscreteActionMetric<T>) -> Self {
        Self { metric }
    }

    /// Minimal cycle mean of the tilted weights (Karp's algorithm).
    pub fn cycle_mean(&self, p: &[T]) -> T {
        let m = self.metric;
        let nv = m.classes();
        let h = m.h();
        let inf = T::infinity();
        let edges: Vec<(usize, usize, T)> = (0..nv)
            .flat_map(|c| {
                let z = m.class_node(c);
                m.moves().iter().enumerate().filter_map(move |(mi, d)| {
                    let w = m.class_cost(c, mi)?;
                    let tilt = (0..m.dim()).fold(T::zero(), |s, i| s + p[i] * T::lit(d[i] as f64) * h);
                    Some((c, m.class_index([z[0] + d[0], z[1] + d[1]]), w - tilt))
                })
            })
            .collect();
        // d[k][v]: lightest k-edge walk ending at v from any start.
        let mut d = vec![vec![inf; nv]; nv + 1];
        d[0] = vec![T::zero(); nv];
        for k in 1..=nv {
            let (prev, cur) = d.split_at_mut(k);
            let (prev, cur) = (&prev[k - 1], &mut cur[0]);
            for &(a, b, w) in &edges {
                if prev[a] < inf {
                    let c = prev[a] + w;
                    if c < cur[b] {
                        cur[b] = c;
                    }
                }
            }
        }
        let mut best = inf;
        for v in 0..nv {
            if d[nv][v] == inf {
                continue;
            }
            let mut worst = T::neg_infinity();
            for k in 0..nv {
                if d[k][v] < inf {
                    worst = worst.max((d[nv][v] - d[k][v]) / T::lit((nv - k) as f64));
                }
            }
            best = best.min(worst);
        }
        best
    }

    /// `Hbar_d(p) = -lambda(p) / tau`.
    pub fn hbar(&self, p: &[T]) -> T {
        -self.cycle_mean(p) / self.metric.tau()
    }

    /// `Lbar_d(q) = sup_p (p . q - Hbar_d(p))`, a concave maximization solved by golden sections.
    pub fn lbar(&self, q: &[T]) -> Result<T> {
        let tau = self.metric.tau();
        let dim = self.metric.dim();
        let mut radius = T::lit(4.0);
        let tol = T::lit(1e-12);
        for _ in 0..8 {
            let (arg, val) = if dim == 1 {
                let (x, v) = golden_max(|a| a * q[0] + self.cycle_mean(&[a]) / tau, -radius, radius, tol);
                ([x, T::zero()], v)
            } else {
                nested_golden_max(
                    |a, b| a * q[0] + b * q[1] + self.cycle_mean(&[a, b]) / tau,
                    [-radius, -radius],
                    [radius, radius],
                    tol,
                )
            };
            let edge = arg[..dim].iter().any(|c| c.abs() > radius * T::lit(0.99));
            if !edge {
                return Ok(val);
            }
            radius = radius * T::lit(4.0);
        }
        Err(Error::SearchBoundary { radius: radius.to_f64_lossy() })
    }

    /// Homogenized metric `t Lbar_d((y - x) / t)`.
    pub fn homogenized_metric(&self, t: T, x: &[T], y: &[T]) -> Result<T> {
        let q: Vec<T> = x.iter().zip(y).map(|(a, b)| (*b - *a) / t).collect();
        Ok(t * self.lbar(&q)?)
    }

    /// `Hbar_d` tabulated on an [`EffectiveTable`] grid.
    pub fn table(&self, p_radius: T, steps: usize) -> EffectiveTable<T> {
        EffectiveTable::from_fn(self.metric.dim(), p_radius, steps, true, &format!("discrete[{}]", self.metric.id()), |p| {
            self.hbar(p)
        })
    }
}
