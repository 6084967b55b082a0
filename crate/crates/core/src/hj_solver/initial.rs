use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::grid_points;
use crate::scalar::Real;

type DataFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Initial datum `g(x) = tilt . x + g_per(x)` with `g_per` 1-periodic.
///
/// The solver evolves the periodic part and adds the tilt to every reconstructed gradient,
/// so affine data stay on the torus.
#[derive(Clone)]
pub struct InitialData<T: Real> {
    dim: usize,
    name: String,
    periodic: DataFn<T>,
    lipschitz: T,
    tilt: [T; 2],
}

impl<T: Real> fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("tilt", &self.tilt)
            .finish()
    }
}

impl<T: Real> InitialData<T> {
    /// `lipschitz` bounds the Lipschitz constant of the periodic part.
    pub fn new<F>(name: &str, dim: usize, lipschitz: T, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Send + Sync + 'static,
    {
        Self { dim, name: name.to_string(), periodic: Arc::new(f), lipschitz, tilt: [T::zero(); 2] }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::new(&format!("constant:{c}"), dim, T::zero(), move |_| c)
    }

    /// `sum_i sin(2 pi x_i) / (2 pi)`.
    pub fn sin(dim: usize) -> Self {
        let lip = T::lit((dim as f64).sqrt());
        Self::new("sin", dim, lip, |x: &[T]| x.iter().map(|&xi| (T::TAU() * xi).sin()).sum::<T>() / T::TAU())
    }

    /// `sum_i cos(2 pi x_i) / (2 pi)`.
    pub fn cos(dim: usize) -> Self {
        let lip = T::lit((dim as f64).sqrt());
        Self::new("cos", dim, lip, |x: &[T]| x.iter().map(|&xi| (T::TAU() * xi).cos()).sum::<T>() / T::TAU())
    }

    /// Linear datum `p . x`.
    pub fn linear(p: &[T]) -> Self {
        Self::constant(p.len(), T::zero()).with_tilt(p)
    }

    pub fn with_tilt(mut self, p: &[T]) -> Self {
        self.tilt = [T::zero(); 2];
        self.tilt[..p.len()].copy_from_slice(p);
        self.name = format!("{}+tilt{:?}", self.name, &p.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>());
        self
    }

    /// Parses `sin`, `cos`, `zero`, `constant:<c>` or `linear:<p1>[,<p2>]`, optionally prefixed
    /// by `builtin:`.
    pub fn from_spec(spec: &str, dim: usize) -> Result<Self> {
        let s = spec.strip_prefix("builtin:").unwrap_or(spec);
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| -> Result<f64> {
            a.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{a}' in initial data '{spec}'")))
        };
        match (head, arg) {
            ("sin", None) => Ok(Self::sin(dim)),
            ("cos", None) => Ok(Self::cos(dim)),
            ("zero", None) => Ok(Self::constant(dim, T::zero())),
            ("constant", Some(a)) => Ok(Self::constant(dim, T::lit(num(a)?))),
            ("linear", Some(a)) => {
                let p = a.split(',').map(num).collect::<Result<Vec<_>>>()?;
                if p.len() != dim {
                    return Err(Error::Parse(format!("linear data needs {dim} slopes, got {}", p.len())));
                }
                Ok(Self::linear(&p.into_iter().map(T::lit).collect::<Vec<_>>()))
            }
            _ => Err(Error::Parse(format!("unknown initial data '{spec}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn tilt(&self) -> [T; 2] {
        self.tilt
    }

    /// Periodic part at `x`.
    pub fn periodic_part(&self, x: &[T]) -> T {
        (self.periodic)(x)
    }

    /// Full datum `tilt . x + g_per(x)`.
    pub fn eval(&self, x: &[T]) -> T {
        let lin = x.iter().zip(self.tilt.iter()).fold(T::zero(), |s, (&a, &b)| s + a * b);
        lin + (self.periodic)(x)
    }

    /// Periodic part on the `nx^n` grid, row-major.
    pub fn sample(&self, nx: usize) -> Vec<T> {
        grid_points::<T>(self.dim, nx).map(|y| (self.periodic)(&y[..self.dim])).collect()
    }

    /// Central-difference gradients of the grid samples plus the tilt.
    pub fn grid_gradients(&self, nx: usize) -> Vec<[T; 2]> {
        let u = self.sample(nx);
        let inv = T::lit(nx as f64 * 0.5);
        let n = nx;
        (0..u.len())
            .map(|k| {
                if self.dim == 1 {
                    [(u[(k + 1) % n] - u[(k + n - 1) % n]) * inv + self.tilt[0], T::zero()]
                } else {
                    let (i, j) = (k / n, k % n);
                    let d1 = u[((i + 1) % n) * n + j] - u[((i + n - 1) % n) * n + j];
                    let d2 = u[i * n + (j + 1) % n] - u[i * n + (j + n - 1) % n];
                    [d1 * inv + self.tilt[0], d2 * inv + self.tilt[1]]
                }
            })
            .collect()
    }
}
