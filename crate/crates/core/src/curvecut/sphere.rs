use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coarse seeds per unit of `2^m`.
const SEEDS_PER_ORTHANT: usize = 10_000;
/// Seeds refined by local descent before giving up.
const REFINED_SEEDS: usize = 256;
/// Refined seeds are kept this far apart in chordal distance, modulo the antipodal map.
const SEED_SEPARATION: f64 = 0.2;
const DESCENT_ITERATIONS: usize = 200;

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &c| s + c * c)
}

fn normalized<T: Real>(v: &mut [T]) {
    let n = norm2(v).sqrt();
    for c in v.iter_mut() {
        *c = *c / n;
    }
}

/// Quasi-uniform points on `S^m`: a Kronecker sequence in the unit cube pushed through
/// Box-Muller to Gaussian samples, then normalized.
pub fn sphere_points<T: Real>(m: usize, count: usize) -> Vec<Vec<T>> {
    let d = m + 1;
    let cube = d + d % 2;
    // Generalized golden ratio: the positive root of x^(cube+1) = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (cube as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=cube).map(|k| (1.0 / phi.powi(k as i32)).fract()).collect();
    (0..count)
        .map(|j| {
            let u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * (j + 1) as f64).fract()).collect();
            let mut g = Vec::with_capacity(cube);
            for pair in u.chunks(2) {
                let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                let th = std::f64::consts::TAU * pair[1];
                g.push(r * th.cos());
                g.push(r * th.sin());
            }
            let mut x: Vec<T> = g[..d].iter().map(|&c| T::lit(c)).collect();
            if norm2(&x) == T::zero() {
                x[0] = T::one();
            }
            normalized(&mut x);
            x
        })
        .collect()
}

/// Largest `|f(x) + f(-x)|` over `samples` sphere points.
pub fn oddness_defect<T: Real, F: Fn(&[T]) -> Vec<T>>(f: &F, m: usize, samples: usize) -> T {
    sphere_points::<T>(m, samples)
        .iter()
        .map(|x| {
            let neg: Vec<T> = x.iter().map(|&c| -c).collect();
            let (a, b) = (f(x), f(&neg));
            a.iter().zip(&b).fold(T::zero(), |s, (u, v)| s.max((*u + *v).abs()))
        })
        .fold(T::zero(), T::max)
}

/// Finds `x` on `S^m` with `|f(x)| <= tol` for an odd continuous `f: S^m -> R^m`.
///
/// `m = 1` brackets a sign change on the half circle and bisects. Otherwise the best seeds of
/// a quasi-uniform sample of about `10^4 2^m` points are refined by damped Gauss-Newton on the
/// tangent space, each iterate projected back onto the sphere.
pub fn odd_map_zero<T, F>(f: F, m: usize, tol: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T> + Sync,
{
    if m == 0 {
        return Err(Error::invalid("sphere dimension must be positive"));
    }
    let scale = sphere_points::<T>(m, 64).iter().map(|x| norm2(&f(x)).sqrt()).fold(T::zero(), T::max);
    let defect = oddness_defect(&f, m, 64);
    if defect > T::lit(1e-9) * (T::one() + scale) {
        return Err(Error::NotOdd { defect: defect.to_f64_lossy() });
    }
    if m == 1 {
        return circle_zero(&f, tol);
    }
    let count = SEEDS_PER_ORTHANT << m;
    let seeds = sphere_points::<T>(m, count);
    let mut scored: Vec<(T, usize)> = seeds.par_iter().enumerate().map(|(k, x)| (norm2(&f(x)), k)).collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let sep = T::lit(SEED_SEPARATION * SEED_SEPARATION);
    let mut chosen: Vec<usize> = Vec::with_capacity(REFINED_SEEDS);
    for &(_, k) in &scored {
        if chosen.len() == REFINED_SEEDS {
            break;
        }
        let far = chosen.iter().all(|&c| {
            let (plus, minus) = seeds[k].iter().zip(&seeds[c]).fold((T::zero(), T::zero()), |(p, q), (a, b)| {
                (p + (*a - *b) * (*a - *b), q + (*a + *b) * (*a + *b))
            });
            plus.min(minus) > sep
        });
        if far {
            chosen.push(k);
        }
    }
    let mut best = T::infinity();
    for k in chosen {
        let (x, r) = descend(&f, seeds[k].clone(), m, tol);
        if r <= tol {
            return Ok(x);
        }
        best = best.min(r);
    }
    Err(Error::ZeroNotFound { best_residual: best.to_f64_lossy() })
}

fn circle_zero<T: Real, F: Fn(&[T]) -> Vec<T>>(f: &F, tol: T) -> Result<Vec<T>> {
    let g = |th: T| f(&[th.cos(), th.sin()])[0];
    let samples = 2 * SEEDS_PER_ORTHANT;
    let pi = T::PI();
    let at = |k: usize| pi * T::lit(k as f64) / T::lit(samples as f64);
    let (mut lo, mut glo) = (T::zero(), g(T::zero()));
    let mut bracket = None;
    for k in 1..=samples {
        let th = at(k);
        let v = g(th);
        if glo == T::zero() {
            bracket = Some((lo, lo));
            break;
        }
        if (glo < T::zero()) != (v < T::zero()) || v == T::zero() {
            bracket = Some((lo, th));
            break;
        }
        lo = th;
        glo = v;
    }
    let (mut a, mut b) = bracket.ok_or(Error::ZeroNotFound { best_residual: glo.abs().to_f64_lossy() })?;
    let ga_neg = g(a) < T::zero();
    for _ in 0..200 {
        if b - a <= T::epsilon() * pi {
            break;
        }
        let c = (a + b) / T::lit(2.0);
        let gc = g(c);
        if gc == T::zero() {
            a = c;
            b = c;
            break;
        }
        if (gc < T::zero()) == ga_neg {
            a = c;
        } else {
            b = c;
        }
    }
    let th = if g(a).abs() <= g(b).abs() { a } else { b };
    let r = g(th).abs();
    if r <= tol {
        Ok(vec![th.cos(), th.sin()])
    } else {
        Err(Error::ZeroNotFound { best_residual: r.to_f64_lossy() })
    }
}

/// Orthonormal basis of the tangent space at the unit vector `x`.
fn tangent_basis<T: Real>(x: &[T]) -> Vec<Vec<T>> {
    let d = x.len();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(d - 1);
    // Skip the axis most aligned with x.
    let skip = (0..d).max_by(|&i, &j| x[i].abs().partial_cmp(&x[j].abs()).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(0);
    for e in (0..d).filter(|&i| i != skip) {
        let mut v = vec![T::zero(); d];
        v[e] = T::one();
        for b in std::iter::once(x).chain(basis.iter().map(|b| b.as_slice())) {
            let dot = v.iter().zip(b).fold(T::zero(), |s, (p, q)| s + *p * *q);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * *bi;
            }
        }
        normalized(&mut v);
        basis.push(v);
    }
    basis
}

/// Solves the square system `a z = rhs` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_square<T: Real>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[p][c] == T::zero() {
            return None;
        }
        a.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
            let v = rhs[c];
            rhs[r] -= f * v;
        }
    }
    let mut z = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s = (r + 1..n).fold(rhs[r], |s, k| s - a[r][k] * z[k]);
        z[r] = s / a[r][r];
    }
    Some(z)
}

/// Damped Gauss-Newton on `|f|^2` restricted to the sphere; returns the last iterate and `|f|`.
fn descend<T: Real, F: Fn(&[T]) -> Vec<T>>(f: &F, mut x: Vec<T>, m: usize, tol: T) -> (Vec<T>, T) {
    let retract = |x: &[T], basis: &[Vec<T>], z: &[T]| {
        let mut y = x.to_vec();
        for (b, &c) in basis.iter().zip(z) {
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += c * *bi;
            }
        }
        normalized(&mut y);
        y
    };
    let h = T::epsilon().cbrt();
    let mut fx = f(&x);
    let mut r = norm2(&fx).sqrt();
    let mut mu = T::lit(1e-6);
    for _ in 0..DESCENT_ITERATIONS {
        if r <= tol {
            break;
        }
        let basis = tangent_basis(&x);
        // Central-difference Jacobian, columns along the tangent basis.
        let cols: Vec<Vec<T>> = (0..m)
            .map(|k| {
                let mut e = vec![T::zero(); m];
                e[k] = h;
                let fp = f(&retract(&x, &basis, &e));
                e[k] = -h;
                let fm = f(&retract(&x, &basis, &e));
                fp.iter().zip(&fm).map(|(a, b)| (*a - *b) / (T::lit(2.0) * h)).collect()
            })
            .collect();
        let jtj = |i: usize, j: usize| cols[i].iter().zip(&cols[j]).fold(T::zero(), |s, (a, b)| s + *a * *b);
        let jtf: Vec<T> = (0..m).map(|i| -cols[i].iter().zip(&fx).fold(T::zero(), |s, (a, b)| s + *a * *b)).collect();
        let mut improved = false;
        for _ in 0..12 {
            let a: Vec<Vec<T>> =
                (0..m).map(|i| (0..m).map(|j| jtj(i, j) + if i == j { mu * (T::one() + jtj(i, i)) } else { T::zero() }).collect()).collect();
            if let Some(z) = solve_square(a, jtf.clone()) {
                let y = retract(&x, &basis, &z);
                let fy = f(&y);
                let ry = norm2(&fy).sqrt();
                if ry < r {
                    x = y;
                    fx = fy;
                    r = ry;
                    mu = (mu / T::lit(10.0)).max(T::lit(1e-12));
                    improved = true;
                    break;
                }
            }
            mu = mu * T::lit(10.0);
        }
        if !improved {
            break;
        }
    }
    (x, r)
}
