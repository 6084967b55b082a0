use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::potential::PotentialField;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CustomEvaluator<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

/// The closed-form Hamiltonian families plus a user closure.
#[derive(Clone)]
pub enum HamiltonianKind<T: Real> {
    /// `|p|^2 / 2 + V(y)`
    Quadratic,
    /// `a(y) |p|`, with `a` stored as the model potential.
    Eikonal,
    /// `max{|p| - 1, 1 - |p|} + V(y)`
    DoubleWell,
    /// `max{0, |p| - 1} + V(y)`
    TruncatedEikonal,
    Custom(CustomEvaluator<T>),
    /// `max{H, |p|^2/2 + offset}` inside `|p| <= outer`, `|p|^2/2 + offset` outside.
    QuadraticBlend { base: Box<HamiltonianKind<T>>, inner: T, outer: T, offset: T },
}

impl<T: Real> fmt::Debug for HamiltonianKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic => write!(f, "Quadratic"),
            Self::Eikonal => write!(f, "Eikonal"),
            Self::DoubleWell => write!(f, "DoubleWell"),
            Self::TruncatedEikonal => write!(f, "TruncatedEikonal"),
            Self::Custom(_) => write!(f, "Custom"),
            Self::QuadraticBlend { base, inner, outer, offset } => f
                .debug_struct("QuadraticBlend")
                .field("base", base)
                .field("inner", inner)
                .field("outer", outer)
                .field("offset", offset)
                .finish(),
        }
    }
}

/// A periodic, coercive Hamiltonian `H(y, p)` with its metadata.
#[derive(Clone, Debug)]
pub struct HamiltonianModel<T: Real> {
    kind: HamiltonianKind<T>,
    potential: PotentialField<T>,
    convex: bool,
    /// Constant in `|p|^2/2 - K0 <= H <= |p|^2/2 + K0`; infinite when the model does not grow quadratically.
    k0: T,
    /// Lipschitz radius beyond which values of `H` are irrelevant.
    c0: T,
    id: String,
}

#[inline]
pub(crate) fn norm<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

#[inline]
fn norm_sq<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |s, &x| s + x * x)
}

impl<T: Real> HamiltonianKind<T> {
    /// Value given the potential already evaluated at `y`.
    #[inline]
    pub(crate) fn eval_with(&self, v: T, y: &[T], p: &[T]) -> T {
        let one = T::one();
        match self {
            Self::Quadratic => T::lit(0.5) * norm_sq(p) + v,
            Self::Eikonal => v * norm(p),
            Self::DoubleWell => {
                let r = norm(p);
                (r - one).max(one - r) + v
            }
            Self::TruncatedEikonal => (norm(p) - one).max(T::zero()) + v,
            Self::Custom(f) => f(y, p),
            Self::QuadraticBlend { base, outer, offset, .. } => {
                let r2 = norm_sq(p);
                let quad = T::lit(0.5) * r2 + *offset;
                if r2.sqrt() > *outer {
                    quad
                } else {
                    base.eval_with(v, y, p).max(quad)
                }
            }
        }
    }

    fn name(&self) -> String {
        match self {
            Self::Quadratic => "quadratic".into(),
            Self::Eikonal => "eikonal".into(),
            Self::DoubleWell => "double-well".into(),
            Self::TruncatedEikonal => "truncated-eikonal".into(),
            Self::Custom(_) => "custom".into(),
            Self::QuadraticBlend { base, .. } => format!("{}+quad", base.name()),
        }
    }

    /// Evenness `H(y, p) = H(y, -p)` is known for every closed form.
    fn is_even(&self) -> bool {
        match self {
            Self::Custom(_) => false,
            Self::QuadraticBlend { base, .. } => base.is_even(),
            _ => true,
        }
    }
}

/// `H(y, .)` with the potential value cached, for inner loops.
#[derive(Clone, Copy)]
pub struct LocalHamiltonian<'a, T: Real> {
    kind: &'a HamiltonianKind<T>,
    v: T,
    y: [T; 2],
    dim: usize,
}

impl<T: Real> LocalHamiltonian<'_, T> {
    #[inline]
    pub fn eval(&self, p: &[T]) -> T {
        self.kind.eval_with(self.v, &self.y[..self.dim], p)
    }
}

impl<T: Real> HamiltonianModel<T> {
    fn new(kind: HamiltonianKind<T>, potential: PotentialField<T>, convex: bool) -> Self {
        let k0 = match kind {
            HamiltonianKind::Quadratic => potential.max_abs() + T::one(),
            _ => T::infinity(),
        };
        let id = format!("{}[{}]", kind.name(), potential.name());
        Self { kind, potential, convex, k0, c0: T::one(), id }
    }

    pub fn quadratic(v: PotentialField<T>) -> Self {
        Self::new(HamiltonianKind::Quadratic, v, true)
    }

    /// `a(y)|p|`; `a` must be strictly positive.
    pub fn eikonal(a: PotentialField<T>) -> Result<Self> {
        if a.min_sample() <= T::zero() {
            return Err(Error::invalid("eikonal coefficient must be strictly positive"));
        }
        Ok(Self::new(HamiltonianKind::Eikonal, a, true))
    }

    pub fn double_well(v: PotentialField<T>) -> Self {
        Self::new(HamiltonianKind::DoubleWell, v, false)
    }

    pub fn truncated_eikonal(v: PotentialField<T>) -> Self {
        Self::new(HamiltonianKind::TruncatedEikonal, v, true)
    }

    /// User closure `H(y, p)`; `y` is passed already wrapped into `[0,1)^n`.
    pub fn custom<F>(dim: usize, id: &str, convex: bool, f: F) -> Self
    where
        F: Fn(&[T], &[T]) -> T + Send + Sync + 'static,
    {
        let mut m = Self::new(
            HamiltonianKind::Custom(Arc::new(f)),
            PotentialField::constant(dim, T::zero()),
            convex,
        );
        m.id = id.to_string();
        m
    }

    /// Parses `quadratic | eikonal | double-well | truncated-eikonal` with a potential spec.
    pub fn from_spec(kind: &str, potential: &str, dim: usize) -> Result<Self> {
        let v = PotentialField::from_spec(potential, dim)?;
        match kind {
            "quadratic" => Ok(Self::quadratic(v)),
            "eikonal" => Self::eikonal(v),
            "double-well" | "doublewell" => Ok(Self::double_well(v)),
            "truncated-eikonal" => Ok(Self::truncated_eikonal(v)),
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }

    pub fn with_lipschitz_radius(mut self, c0: T) -> Self {
        self.c0 = c0;
        self
    }

    pub fn with_id(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }

    pub fn kind(&self) -> &HamiltonianKind<T> {
        &self.kind
    }

    pub fn potential(&self) -> &PotentialField<T> {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_even(&self) -> bool {
        self.kind.is_even()
    }

    pub fn growth_constant(&self) -> T {
        self.k0
    }

    pub fn lipschitz_radius(&self) -> T {
        self.c0
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// `H` frozen at `y` (wrapped mod 1).
    pub fn local(&self, y: &[T]) -> LocalHamiltonian<'_, T> {
        let dim = self.dim();
        let mut w = [T::zero(); 2];
        for i in 0..dim {
            w[i] = super::potential::wrap_unit(y[i]);
        }
        LocalHamiltonian { kind: &self.kind, v: self.potential.eval(&w[..dim]), y: w, dim }
    }

    /// Evaluates `H(y, p)`; fails when a custom evaluator returns a non-finite value.
    pub fn eval_h(&self, y: &[T], p: &[T]) -> Result<T> {
        let v = self.local(y).eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                y: y.iter().map(|v| v.to_f64_lossy()).collect(),
                p: p.iter().map(|v| v.to_f64_lossy()).collect(),
            })
        }
    }

    /// Checks midpoint convexity in `p` on random triples; returns the first violating `y`.
    pub fn midpoint_convexity_violation(&self, samples: usize, radius: T, seed: u64) -> Option<Vec<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let r = radius.to_f64_lossy();
        for _ in 0..samples {
            let y: Vec<T> = (0..dim).map(|_| T::lit(rng.gen::<f64>())).collect();
            let p1: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-r..r))).collect();
            let p2: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-r..r))).collect();
            let mid: Vec<T> = p1.iter().zip(&p2).map(|(&a, &b)| T::lit(0.5) * (a + b)).collect();
            let h = self.local(&y);
            let lhs = h.eval(&mid);
            let rhs = T::lit(0.5) * (h.eval(&p1) + h.eval(&p2));
            let scale = T::one() + lhs.abs().max(rhs.abs());
            if lhs > rhs + T::lit(1e-10) * scale {
                return Some(y);
            }
        }
        None
    }

    /// Smallest sampled radius `R <= limit` with `min_y H(y, p) > H-bound` for every `|p| >= R`
    /// along the tested rays; `None` when coercivity is not observed within `limit`.
    pub fn coercivity_radius(&self, bound: T, limit: T) -> Option<T> {
        let samples = grid_y::<T>(self.dim(), 32);
        let dirs = directions::<T>(self.dim(), 16);
        let steps = 400;
        let mut last_bad = T::zero();
        for s in 0..=steps {
            let r = limit * T::lit(s as f64 / steps as f64);
            let mut all_above = true;
            'outer: for d in &dirs {
                let p: Vec<T> = d.iter().map(|&c| c * r).collect();
                for y in &samples {
                    if self.local(y).eval(&p) <= bound {
                        all_above = false;
                        break 'outer;
                    }
                }
            }
            if !all_above {
                last_bad = r;
            }
        }
        if last_bad >= limit {
            None
        } else {
            Some(last_bad + limit / T::lit(steps as f64))
        }
    }

    /// Replaces `H` for `|p| > 2 C0 + 1` by a quadratic.
    ///
    /// The output agrees with the input on `|p| <= 2 C0 + 1`, equals `|p|^2/2 + c` for
    /// `|p| >= 3 C0 + 2`, and is the pointwise maximum of the two in between, which keeps
    /// convexity and continuity.
    pub fn quadratic_truncate(&self, c0: T) -> Result<Self> {
        if matches!(self.kind, HamiltonianKind::Quadratic) {
            return Ok(self.clone());
        }
        if c0 <= T::zero() {
            return Err(Error::invalid("C0 must be positive"));
        }
        let inner = T::lit(2.0) * c0 + T::one();
        let outer = T::lit(3.0) * c0 + T::lit(2.0);
        if self.convex {
            if let Some(y) = self.midpoint_convexity_violation(2000, outer, 17) {
                return Err(Error::ConvexityFlag { y: y.iter().map(|v| v.to_f64_lossy()).collect() });
            }
        }
        let ys = grid_y::<T>(self.dim(), 48);
        let dirs = directions::<T>(self.dim(), 32);
        let radial = 256;
        let half = T::lit(0.5);
        // Offset: largest c with |p|^2/2 + c <= H on the inner ball (sampled, with margin).
        let mut offset = T::infinity();
        for y in &ys {
            let h = self.local(y);
            for d in &dirs {
                for s in 0..=radial {
                    let r = inner * T::lit(s as f64 / radial as f64);
                    let p: Vec<T> = d.iter().map(|&c| c * r).collect();
                    offset = offset.min(h.eval(&p) - half * r * r);
                }
            }
        }
        offset -= T::lit(1e-3);
        // The quadratic must dominate from the outer radius on.
        for y in &ys {
            let h = self.local(y);
            for d in &dirs {
                for s in 0..=radial {
                    let r = outer * (T::one() + T::lit(s as f64 / radial as f64));
                    let p: Vec<T> = d.iter().map(|&c| c * r).collect();
                    if h.eval(&p) > half * r * r + offset {
                        return Err(Error::invalid(format!(
                            "quadratic blend infeasible: H exceeds |p|^2/2 + c at |p| = {r}"
                        )));
                    }
                }
            }
        }
        let kind = HamiltonianKind::QuadraticBlend { base: Box::new(self.kind.clone()), inner, outer, offset };
        let mut out = Self {
            kind,
            potential: self.potential.clone(),
            convex: self.convex,
            k0: T::zero(),
            c0,
            id: format!("{}+quad(C0={c0})", self.id),
        };
        // K0 by direct evaluation sweep; the exterior contributes |offset|.
        let mut k0 = offset.abs();
        for y in &ys {
            let h = out.local(y);
            for d in &dirs {
                for s in 0..=radial {
                    let r = outer * T::lit(s as f64 / radial as f64);
                    let p: Vec<T> = d.iter().map(|&c| c * r).collect();
                    k0 = k0.max((h.eval(&p) - half * r * r).abs());
                }
            }
        }
        out.k0 = (k0 * T::lit(1.01)).max(T::one() + T::lit(1e-9));
        Ok(out)
    }
}

/// `n^dim` grid over the torus.
pub(crate) fn grid_y<T: Real>(dim: usize, n: usize) -> Vec<Vec<T>> {
    super::potential::grid_points::<T>(dim, n).map(|y| y[..dim].to_vec()).collect()
}

/// Unit directions: `{-1, 1}` in 1D, `count` equally spaced angles in 2D.
pub(crate) fn directions<T: Real>(dim: usize, count: usize) -> Vec<Vec<T>> {
    if dim == 1 {
        vec![vec![T::one()], vec![-T::one()]]
    } else {
        (0..count)
            .map(|k| {
                let a = T::TAU() * T::lit(k as f64 / count as f64);
                vec![a.cos(), a.sin()]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let q = HamiltonianModel::quadratic(PotentialField::<f64>::constant(2, 0.0));
        assert_eq!(q.eval_h(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.5);

        let dw = HamiltonianModel::double_well(PotentialField::<f64>::constant(2, 0.0));
        assert_eq!(dw.eval_h(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);

        let a = PotentialField::<f64>::from_spec("cos1d:-1:2", 1).unwrap();
        let e = HamiltonianModel::eikonal(a).unwrap();
        assert!((e.eval_h(&[0.0], &[3.0]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn custom_non_finite_is_reported() {
        let m = HamiltonianModel::<f64>::custom(1, "bad", false, |_, p| 1.0 / p[0]);
        match m.eval_h(&[0.5], &[0.0]) {
            Err(Error::NonFinite { y, p }) => {
                assert_eq!(y, vec![0.5]);
                assert_eq!(p, vec![0.0]);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn periodicity_is_exact_for_dyadic_points() {
        let models = [
            HamiltonianModel::quadratic(PotentialField::<f64>::cos2d()),
            HamiltonianModel::double_well(PotentialField::<f64>::cos2d()),
            HamiltonianModel::truncated_eikonal(PotentialField::<f64>::bump(2)),
            HamiltonianModel::eikonal(PotentialField::<f64>::inv_cos(2)).unwrap(),
        ];
        for m in &models {
            for (y, w) in [([0.375, 0.125], [1.0, -2.0]), ([0.5, 0.0625], [-7.0, 3.0])] {
                let p = [0.3, -1.2];
                let shifted = [y[0] + w[0], y[1] + w[1]];
                assert_eq!(m.eval_h(&y, &p).unwrap(), m.eval_h(&shifted, &p).unwrap());
            }
        }
    }

    #[test]
    fn quadratic_growth_sandwich() {
        let v = PotentialField::<f64>::cos2d();
        let m = HamiltonianModel::quadratic(v);
        let k0 = m.growth_constant();
        assert!((k0 - 2.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let y = [rng.gen::<f64>(), rng.gen::<f64>()];
            let p = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let h = m.eval_h(&y, &p).unwrap();
            let q = 0.5 * (p[0] * p[0] + p[1] * p[1]);
            assert!(q - k0 <= h && h <= q + k0);
        }
    }

    #[test]
    fn coercivity_of_builtins() {
        let models = [
            HamiltonianModel::quadratic(PotentialField::<f64>::cos1d(1)),
            HamiltonianModel::double_well(PotentialField::<f64>::cos1d(1)),
            HamiltonianModel::truncated_eikonal(PotentialField::<f64>::cos1d(1)),
        ];
        for m in &models {
            let h0 = m.eval_h(&[0.0], &[0.0]).unwrap();
            assert!(m.coercivity_radius(h0 + 1.0, 50.0).is_some());
        }
    }

    #[test]
    fn convex_flags_hold_on_samples() {
        let convex = [
            HamiltonianModel::quadratic(PotentialField::<f64>::cos2d()),
            HamiltonianModel::truncated_eikonal(PotentialField::<f64>::cos2d()),
            HamiltonianModel::eikonal(PotentialField::<f64>::inv_cos(2)).unwrap(),
        ];
        for m in &convex {
            assert!(m.is_convex());
            assert!(m.midpoint_convexity_violation(5000, 4.0, 1).is_none());
        }
        let dw = HamiltonianModel::double_well(PotentialField::<f64>::cos2d());
        assert!(dw.midpoint_convexity_violation(5000, 2.0, 1).is_some());
    }

    #[test]
    fn truncate_is_identity_on_quadratic() {
        let m = HamiltonianModel::quadratic(PotentialField::<f64>::cos1d(1));
        let t = m.quadratic_truncate(1.0).unwrap();
        assert!(matches!(t.kind(), HamiltonianKind::Quadratic));
    }

    #[test]
    fn truncate_eikonal() {
        let m = HamiltonianModel::eikonal(PotentialField::<f64>::constant(1, 1.0)).unwrap();
        let t = m.quadratic_truncate(1.0).unwrap();
        for p in [-3.0, -1.5, 0.0, 0.7, 2.9, 3.0] {
            assert_eq!(t.eval_h(&[0.2], &[p]).unwrap(), f64::abs(p));
        }
        let HamiltonianKind::QuadraticBlend { offset, .. } = t.kind() else { panic!() };
        for p in [5.0, 6.5, -8.0, 20.0] {
            let expect = 0.5 * p * p + offset;
            assert_eq!(t.eval_h(&[0.7], &[p]).unwrap(), expect);
        }
        assert!(t.midpoint_convexity_violation(5000, 10.0, 3).is_none());
    }

    #[test]
    fn truncate_sandwich_with_recomputed_k0() {
        let v = PotentialField::<f64>::cos2d();
        let m = HamiltonianModel::truncated_eikonal(v);
        let t = m.quadratic_truncate(1.5).unwrap();
        let k0 = t.growth_constant();
        assert!(k0 > 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let y = [rng.gen::<f64>(), rng.gen::<f64>()];
            let p = [rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0)];
            let h = t.eval_h(&y, &p).unwrap();
            let q = 0.5 * (p[0] * p[0] + p[1] * p[1]);
            assert!(q - k0 <= h && h <= q + k0, "sandwich fails at {p:?}");
        }
    }

    #[test]
    fn truncate_rejects_false_convex_flag() {
        let m = HamiltonianModel::<f64>::custom(1, "fake", true, |_, p| -(p[0] * p[0]).min(1.0));
        assert!(matches!(m.quadratic_truncate(1.0), Err(Error::ConvexityFlag { .. })));
    }
}
