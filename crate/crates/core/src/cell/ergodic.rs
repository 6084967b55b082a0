use crate::error::{Error, Result};
use crate::hj_solver::{estimate_scheme, lf_step, InitialData, NodeHamiltonian, OscillatoryHamiltonian};
use crate::model::HamiltonianModel;
use crate::scalar::Real;

/// Enclosure `lo <= Hbar_d <= hi` of the discrete effective Hamiltonian of one scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn mid(&self) -> T {
        T::lit(0.5) * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> T {
        T::lit(0.5) * (self.hi - self.lo)
    }

    fn intersect(self, other: Self) -> Self {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Self { lo, hi }
        } else {
            // Disjoint only through rounding.
            let m = T::lit(0.5) * (lo + hi);
            Self { lo: m, hi: m }
        }
    }
}

/// Brackets the cycle time of the Lax-Friedrichs map `S` for `w_t + H(y, p + Dw) = 0` on the torus.
///
/// `S` is monotone and commutes with constants, so for any `x` and `m` the increments obey
/// `min(S^m x - x) <= m chi <= max(S^m x - x)`, with `Hbar_d = -chi / dt`. The bound is applied to
/// `x = 0` after one step and after `2m` steps, and to `x = S^m 0`, where `m dt = horizon / 2`.
pub fn ergodic_bracket<T: Real, H: NodeHamiltonian<T>>(
    h: &H,
    p: [T; 2],
    nx: usize,
    theta: [T; 2],
    horizon: T,
) -> Result<Bracket<T>> {
    let total = nx.pow(h.dim() as u32);
    let dx = T::one() / T::lit(nx as f64);
    let dt_max = dx / (T::lit(2.0) * theta[0].max(theta[1]));
    let half = horizon * T::lit(0.5);
    let m = (half / dt_max).ceil().to_usize().unwrap_or(1).max(1);
    let dt = half / T::lit(m as f64);
    let mut u = vec![T::zero(); total];
    let mut next = vec![T::zero(); total];

    lf_step(h, &u, &mut next, p, nx, theta, dt);
    let (lo, hi) = extremes(&next);
    let mut bracket = Bracket { lo: -hi / dt, hi: -lo / dt };

    for _ in 0..m {
        lf_step(h, &u, &mut next, p, nx, theta, dt);
        std::mem::swap(&mut u, &mut next);
    }
    let w_half = u.clone();
    for step in m..2 * m {
        lf_step(h, &u, &mut next, p, nx, theta, dt);
        std::mem::swap(&mut u, &mut next);
        if step % 256 == 0 && u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotANumber { step });
        }
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotANumber { step: 2 * m });
    }
    let (lo, hi) = extremes(&u);
    bracket = bracket.intersect(Bracket { lo: -hi / horizon, hi: -lo / horizon });
    let diff: Vec<T> = u.iter().zip(&w_half).map(|(a, b)| *a - *b).collect();
    let (lo, hi) = extremes(&diff);
    Ok(bracket.intersect(Bracket { lo: -hi / half, hi: -lo / half }))
}

fn extremes<T: Real>(v: &[T]) -> (T, T) {
    v.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Settings for [`effective_h_at`].
#[derive(Clone, Debug)]
pub struct CellOptions<T> {
    /// Ergodic horizon `T`.
    pub horizon: T,
    /// Cells per period per axis.
    pub cells: usize,
    /// Error estimates above this mark the estimate as not converged.
    pub tolerance: T,
    /// Also solve on a half and a quarter of the cells and add the extrapolated
    /// discretization error to the estimate.
    pub halving: bool,
    /// Fixed viscosity; estimated when `None`.
    pub theta: Option<T>,
}

impl<T: Real> CellOptions<T> {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            horizon: T::lit(50.0),
            cells: if dim == 1 { 256 } else { 64 },
            tolerance: T::lit(1e-2),
            halving: true,
            theta: None,
        }
    }
}

/// Estimate of `Hbar(p)`.
#[derive(Clone, Copy, Debug)]
pub struct CellEstimate<T> {
    pub value: T,
    /// Bracket half-width plus the extrapolated discretization error.
    pub error: T,
    pub bracket: Bracket<T>,
    pub scheme_error: T,
    pub converged: bool,
}

/// `Hbar(p)` from the large-time behavior of `w_t + H(y, p + Dw) = 0`, `w(., 0) = 0`.
pub fn effective_h_at<T: Real>(model: &HamiltonianModel<T>, p: &[T], opts: &CellOptions<T>) -> Result<CellEstimate<T>> {
    let dim = model.dim();
    if p.len() != dim {
        return Err(Error::invalid("covector dimension differs from the model"));
    }
    if opts.horizon < T::one() {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if opts.cells < 8 || (opts.halving && opts.cells % 4 != 0) {
        return Err(Error::invalid("need at least 8 cells, a multiple of 4 when halving"));
    }
    let mut tilt = [T::zero(); 2];
    tilt[..dim].copy_from_slice(p);
    let fine = OscillatoryHamiltonian::new(model, 1, opts.cells)?;
    let theta = match opts.theta {
        Some(t) => [t, if dim == 2 { t } else { T::zero() }],
        None => {
            let g = InitialData::constant(dim, T::zero()).with_tilt(p);
            estimate_scheme(&fine, &g, opts.cells)?.theta
        }
    };
    let b = ergodic_bracket(&fine, tilt, opts.cells, theta, opts.horizon)?;
    let scheme_error = if opts.halving {
        let level = |n: usize| -> Result<Bracket<T>> {
            let h = OscillatoryHamiltonian::new(model, 1, n)?;
            ergodic_bracket(&h, tilt, n, theta, opts.horizon)
        };
        let b2 = level(opts.cells / 2)?;
        let b4 = level(opts.cells / 4)?;
        tail_estimate(b4, b2, b)
    } else {
        T::zero()
    };
    let error = b.half_width() + scheme_error;
    Ok(CellEstimate { value: b.mid(), error, bracket: b, scheme_error, converged: error <= opts.tolerance })
}

/// Remaining discretization error at the finest of three grids `N/4, N/2, N`.
///
/// The last change `d2` is extended by a geometric tail with the observed contraction
/// `rho = d1 / d2`, clamped to `rho >= 5/4`, and never reported below `d2` itself.
fn tail_estimate<T: Real>(b4: Bracket<T>, b2: Bracket<T>, b1: Bracket<T>) -> T {
    let d1 = (b4.mid() - b2.mid()).abs() + b4.half_width();
    let d2 = (b2.mid() - b1.mid()).abs() + b2.half_width();
    if d2 == T::zero() {
        return T::zero();
    }
    let rho = (d1 / d2).max(T::lit(1.25));
    d2 * (T::one() / (rho - T::one())).max(T::one())
}
