use rayon::prelude::*;

use super::hamiltonian::{HamiltonianKind, HamiltonianModel};
use crate::error::{Error, Result};
use crate::optim::{golden_max, nested_golden_max};
use crate::scalar::Real;

pub const DEFAULT_P_STEPS_1D: usize = 512;
pub const DEFAULT_P_STEPS_2D: usize = 256;

/// Maximizes `p . q - h(p)` over the box `[-radius, radius]^dim`.
///
/// A grid search over `steps` cells per axis is followed by a golden-section polish inside the
/// neighbouring cells. A grid maximizer on the box boundary means the supremum is not attained
/// inside the box and is reported as [`Error::BoundaryAttained`].
pub fn conjugate<T: Real, H: Fn(&[T]) -> T>(h: H, dim: usize, q: &[T], radius: T, steps: usize) -> Result<T> {
    let steps = steps.max(2);
    let dp = T::lit(2.0) * radius / T::lit(steps as f64);
    let node = |i: usize| -radius + dp * T::lit(i as f64);
    let tol = dp * T::lit(1e-9);
    if dim == 1 {
        let obj = |p: T| p * q[0] - h(&[p]);
        let mut best = (0usize, T::neg_infinity());
        for i in 0..=steps {
            let v = obj(node(i));
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.0 == 0 || best.0 == steps {
            return Err(Error::BoundaryAttained { radius: radius.to_f64_lossy() });
        }
        let (_, v) = golden_max(obj, node(best.0 - 1), node(best.0 + 1), tol);
        Ok(v.max(best.1))
    } else {
        let obj = |p1: T, p2: T| p1 * q[0] + p2 * q[1] - h(&[p1, p2]);
        let mut best = ((0usize, 0usize), T::neg_infinity());
        for i in 0..=steps {
            let p1 = node(i);
            for j in 0..=steps {
                let v = obj(p1, node(j));
                if v > best.1 {
                    best = ((i, j), v);
                }
            }
        }
        let (i, j) = best.0;
        if i == 0 || j == 0 || i == steps || j == steps {
            return Err(Error::BoundaryAttained { radius: radius.to_f64_lossy() });
        }
        let (_, v) = nested_golden_max(obj, [node(i - 1), node(j - 1)], [node(i + 1), node(j + 1)], tol);
        Ok(v.max(best.1))
    }
}

/// `L(y, q) = sup_p (p . q - H(y, p))` over the box `|p_i| <= p_radius`.
pub fn legendre<T: Real>(model: &HamiltonianModel<T>, y: &[T], q: &[T], p_radius: T, p_steps: usize) -> Result<T> {
    let min_radius = T::lit(2.0) * model.lipschitz_radius() + T::one();
    if p_radius < min_radius {
        return Err(Error::invalid(format!(
            "p_radius {p_radius} below 2*C0+1 = {min_radius}"
        )));
    }
    let h = model.local(y);
    conjugate(|p| h.eval(p), model.dim(), q, p_radius, p_steps)
}

/// Pointwise Lagrangian of a model: closed form for the quadratic kind, numerical conjugate
/// otherwise. `None` marks velocities whose supremum leaves the `p` box (`L = +inf`).
#[derive(Clone, Copy)]
pub struct ModelLagrangian<'a, T: Real> {
    model: &'a HamiltonianModel<T>,
    p_radius: T,
    p_steps: usize,
}

impl<'a, T: Real> ModelLagrangian<'a, T> {
    /// `p_radius` defaults to `2 C0 + 1` enlarged to cover speeds up to `speed`.
    pub fn new(model: &'a HamiltonianModel<T>, speed: T, p_radius: Option<T>, p_steps: Option<usize>) -> Self {
        let dim = model.dim();
        let p_radius = p_radius.unwrap_or_else(|| {
            (T::lit(2.0) * model.lipschitz_radius() + T::one())
                .max(T::lit(2.0) * speed * T::lit((dim as f64).sqrt()) + T::one())
        });
        let p_steps = p_steps.unwrap_or(if dim == 1 { 1024 } else { 256 });
        Self { model, p_radius, p_steps }
    }

    pub fn model(&self) -> &HamiltonianModel<T> {
        self.model
    }

    pub fn eval(&self, y: &[T], q: &[T]) -> Result<Option<T>> {
        if matches!(self.model.kind(), HamiltonianKind::Quadratic) {
            let q2 = q.iter().fold(T::zero(), |s, &c| s + c * c);
            return Ok(Some(T::lit(0.5) * q2 - self.model.potential().eval(y)));
        }
        match legendre(self.model, y, q, self.p_radius, self.p_steps) {
            Ok(v) => Ok(Some(v)),
            Err(Error::BoundaryAttained { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

pub fn default_p_steps(dim: usize) -> usize {
    if dim == 1 {
        DEFAULT_P_STEPS_1D
    } else {
        DEFAULT_P_STEPS_2D
    }
}

/// Tabulated Lagrangian on a torus grid times a velocity set.
///
/// Entries are `None` where the supremum is not attained in the `p` box, which for
/// eikonal-type models marks velocities outside the effective domain (`L = +inf`).
#[derive(Clone, Debug)]
pub struct LagrangianTable<T: Real> {
    dim: usize,
    y_points: Vec<Vec<T>>,
    velocities: Vec<Vec<T>>,
    values: Vec<Option<T>>,
    /// Truncation radius of the velocity box (max |q_i| over the velocity set).
    q_radius: T,
}

impl<T: Real> LagrangianTable<T> {
    /// Table on the `y_res^n` torus grid and the `(q_steps+1)^n` grid over `[-Q, Q]^n`.
    pub fn build(
        model: &HamiltonianModel<T>,
        y_res: usize,
        q_radius: T,
        q_steps: usize,
        p_radius: T,
        p_steps: usize,
    ) -> Result<Self> {
        let dim = model.dim();
        let y_points = super::hamiltonian::grid_y::<T>(dim, y_res);
        let dq = T::lit(2.0) * q_radius / T::lit(q_steps as f64);
        let axis: Vec<T> = (0..=q_steps).map(|i| -q_radius + dq * T::lit(i as f64)).collect();
        let velocities: Vec<Vec<T>> = if dim == 1 {
            axis.iter().map(|&a| vec![a]).collect()
        } else {
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
        };
        Self::for_points(model, y_points, velocities, p_radius, p_steps)
    }

    /// Table at arbitrary torus points and velocities.
    pub fn for_points(
        model: &HamiltonianModel<T>,
        y_points: Vec<Vec<T>>,
        velocities: Vec<Vec<T>>,
        p_radius: T,
        p_steps: usize,
    ) -> Result<Self> {
        let dim = model.dim();
        let nq = velocities.len();
        let values: Vec<Result<Option<T>>> = (0..y_points.len() * nq)
            .into_par_iter()
            .map(|k| {
                let y = &y_points[k / nq];
                let q = &velocities[k % nq];
                match legendre(model, y, q, p_radius, p_steps) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::BoundaryAttained { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        let values = values.into_iter().collect::<Result<Vec<_>>>()?;
        let q_radius = velocities
            .iter()
            .flat_map(|q| q.iter().map(|c| c.abs()))
            .fold(T::zero(), T::max);
        Ok(Self { dim, y_points, velocities, values, q_radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y_points(&self) -> &[Vec<T>] {
        &self.y_points
    }

    pub fn velocities(&self) -> &[Vec<T>] {
        &self.velocities
    }

    pub fn q_radius(&self) -> T {
        self.q_radius
    }

    /// `L(y_points[yi], velocities[qi])`, `None` meaning `+inf`.
    pub fn get(&self, yi: usize, qi: usize) -> Option<T> {
        self.values[yi * self.velocities.len() + qi]
    }

    /// Smallest discrete second difference along velocity grid lines (box-grid tables only).
    pub fn min_second_difference(&self, q_steps: usize) -> T {
        let n = q_steps + 1;
        let mut worst = T::infinity();
        for yi in 0..self.y_points.len() {
            let at = |a: usize, b: usize| {
                let qi = if self.dim == 1 { a } else { a * n + b };
                self.get(yi, qi)
            };
            let lines = if self.dim == 1 { 1 } else { n };
            for l in 0..lines {
                for k in 1..n - 1 {
                    let tri = if self.dim == 1 {
                        [at(k - 1, 0), at(k, 0), at(k + 1, 0)]
                    } else {
                        [at(l, k - 1), at(l, k), at(l, k + 1)]
                    };
                    if let [Some(a), Some(b), Some(c)] = tri {
                        worst = worst.min(a - T::lit(2.0) * b + c);
                    }
                    if self.dim == 2 {
                        if let [Some(a), Some(b), Some(c)] = [at(k - 1, l), at(k, l), at(k + 1, l)] {
                            worst = worst.min(a - T::lit(2.0) * b + c);
                        }
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PotentialField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad(v: PotentialField<f64>) -> HamiltonianModel<f64> {
        HamiltonianModel::quadratic(v).with_lipschitz_radius(2.0)
    }

    #[test]
    fn self_conjugate_quadratic() {
        let m = quad(PotentialField::constant(2, 0.0));
        let l = legendre(&m, &[0.0, 0.0], &[1.0, 0.0], 6.0, 256).unwrap();
        assert!((l - 0.5).abs() < 1e-6, "{l}");
        let m1 = quad(PotentialField::constant(1, 0.0));
        let l1 = legendre(&m1, &[0.0], &[1.0], 6.0, 512).unwrap();
        assert!((l1 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn potential_enters_with_minus_sign() {
        let m = quad(PotentialField::cos1d(1));
        let l = legendre(&m, &[0.0], &[0.0], 6.0, 512).unwrap();
        assert!((l + 1.0).abs() < 1e-9);
    }

    #[test]
    fn eikonal_conjugate_is_indicator() {
        let m = HamiltonianModel::eikonal(PotentialField::<f64>::constant(1, 1.0)).unwrap();
        let l = legendre(&m, &[0.3], &[0.5], 3.0, 512).unwrap();
        assert!(l.abs() < 1e-12);
        assert!(matches!(legendre(&m, &[0.3], &[1.5], 3.0, 512), Err(Error::BoundaryAttained { .. })));
        let m2 = HamiltonianModel::eikonal(PotentialField::<f64>::constant(2, 1.0)).unwrap();
        let l2 = legendre(&m2, &[0.3, 0.1], &[0.3, -0.4], 3.0, 128).unwrap();
        assert!(l2.abs() < 1e-12);
    }

    #[test]
    fn radius_precondition() {
        let m = quad(PotentialField::constant(1, 0.0));
        assert!(matches!(legendre(&m, &[0.0], &[0.0], 4.0, 64), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fenchel_young_inequality() {
        let m = quad(PotentialField::cos2d());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..60 {
            let y = [rng.gen::<f64>(), rng.gen::<f64>()];
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let q = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let l = legendre(&m, &y, &q, 6.0, 64).unwrap();
            let h = m.eval_h(&y, &p).unwrap();
            assert!(p[0] * q[0] + p[1] * q[1] <= l + h + 1e-9);
        }
    }

    #[test]
    fn quadratic_table_sandwich_and_convexity() {
        let m = quad(PotentialField::cos1d(1));
        let t = LagrangianTable::build(&m, 16, 3.0, 60, 8.0, 512).unwrap();
        let k0 = m.growth_constant();
        for (yi, _) in t.y_points().iter().enumerate() {
            for (qi, q) in t.velocities().iter().enumerate() {
                let l = t.get(yi, qi).unwrap();
                let half = 0.5 * q[0] * q[0];
                assert!(half - k0 <= l && l <= half + k0);
            }
        }
        assert!(t.min_second_difference(60) > -1e-9);
    }

    #[test]
    fn double_conjugation_recovers_convex_h() {
        // Conjugate the tabulated Lagrangian back over its velocity grid.
        let m = HamiltonianModel::truncated_eikonal(PotentialField::<f64>::cos1d(1)).with_lipschitz_radius(1.0);
        let q_steps = 400;
        let t = LagrangianTable::build(&m, 8, 1.0, q_steps, 3.0, 1024).unwrap();
        let dq = 2.0 / q_steps as f64;
        for (yi, y) in t.y_points().iter().enumerate() {
            for p in [-1.0, -0.6, 0.0, 0.4, 1.0] {
                let mut best = f64::NEG_INFINITY;
                for (qi, q) in t.velocities().iter().enumerate() {
                    if let Some(l) = t.get(yi, qi) {
                        best = best.max(p * q[0] - l);
                    }
                }
                let h = m.eval_h(y, &[p]).unwrap();
                assert!((best - h).abs() <= 2.0 * dq, "y={y:?} p={p}: {best} vs {h}");
            }
        }
    }
}
