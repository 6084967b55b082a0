use super::initial::InitialData;
use super::scheme::closed_form_theta;
use crate::error::{Error, Result};
use crate::metric::DiscreteActionMetric;
use crate::model::HamiltonianModel;
use crate::scalar::Real;

/// Default search radius: `t` times a bound on the characteristic speed for slopes up to `Lip(g)`.
pub fn oc_search_radius<T: Real>(model: &HamiltonianModel<T>, g: &InitialData<T>, t: T) -> T {
    let lip = g.lipschitz() + T::one();
    let speed = closed_form_theta(model, lip).unwrap_or(lip);
    t * speed * T::lit(1.5)
}

/// `u^eps(x, t) = min_y g(y) + eps m(t / eps, y / eps, x / eps)` over lattice points `y` of the
/// metric scaled by `eps`, within `radius` of `x` (default [`oc_search_radius`]).
///
/// `x / eps` must lie on the lattice and `t / eps` must be a multiple of the time step. A
/// minimizer on the search boundary doubles the radius once; the lattice reach of the metric
/// caps the radius, and a minimizer there is an error.
pub fn oc_solve<T: Real>(
    model: &HamiltonianModel<T>,
    eps_recip: u32,
    g: &InitialData<T>,
    x: &[T],
    t: T,
    metric: &DiscreteActionMetric<T>,
    radius: Option<T>,
) -> Result<T> {
    let dim = metric.dim();
    if eps_recip == 0 || x.len() != dim || g.dim() != dim {
        return Err(Error::invalid("oc_solve needs a positive eps reciprocal and matching dimensions"));
    }
    if t <= T::zero() {
        return Ok(g.eval(x));
    }
    let k = T::lit(eps_recip as f64);
    let eps = T::one() / k;
    let xs: Vec<T> = x.iter().map(|&c| c * k).collect();
    let target = metric.to_lattice(&xs)?;
    let n = metric.to_steps(t * k)?;
    let field = metric.values_to(n, target)?;
    let h = metric.h();
    let reach = T::lit((metric.stride() * n as i64) as f64) * h / k;
    let mut r = radius.unwrap_or_else(|| oc_search_radius(model, g, t)).min(reach);
    for attempt in 0..2 {
        let rl = r * k / h;
        let mut best: Option<(T, bool)> = None;
        for (z, v) in field.iter() {
            if !v.is_finite() {
                continue;
            }
            let d = (0..dim).fold(T::zero(), |s, i| s.max(T::lit((z[i] - target[i]).abs() as f64)));
            if d > rl {
                continue;
            }
            let y: Vec<T> = (0..dim).map(|i| T::lit(z[i] as f64) * h * eps).collect();
            let val = g.eval(&y) + eps * v;
            if best.map_or(true, |(b, _)| val < b) {
                best = Some((val, d + T::one() > rl));
            }
        }
        let (val, on_boundary) = best.ok_or(Error::Unreachable)?;
        if !on_boundary {
            return Ok(val);
        }
        if attempt == 1 || r >= reach {
            return Err(Error::SearchBoundary { radius: r.to_f64_lossy() });
        }
        r = (r * T::lit(2.0)).min(reach);
    }
    unreachable!("the loop returns on its second pass")
}
