//! Composite Gauss–Legendre rules used throughout the crate.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::ops::{Add, Mul};
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Values that quadrature can accumulate.
pub trait Integrand: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights on [-1, 1], cached per degree.
pub fn rule(degree: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(degree)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(degree.max(1)).unwrap();
            let mut pairs: Vec<(f64, f64)> =
                GaussLegendre::new(n).as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Nodes and weights mapped to [a, b].
pub fn mapped_rule(degree: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule(degree)
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

pub fn integrate_panels<T: Integrand>(
    f: &mut dyn FnMut(f64) -> T,
    a: f64,
    b: f64,
    panels: usize,
    degree: usize,
) -> T {
    let r = rule(degree);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in r.iter() {
            acc = acc + f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

/// Panel doubling until successive estimates differ by less than `tol` (relative to max(1, |I|)).
pub fn integrate<T: Integrand>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, tol: f64) -> T {
    const DEGREE: usize = 12;
    let mut panels = 2;
    let mut prev = integrate_panels(&mut f, a, b, panels, DEGREE);
    loop {
        panels *= 2;
        let cur = integrate_panels(&mut f, a, b, panels, DEGREE);
        let scale = cur.magnitude().max(1.0);
        if (cur + prev * -1.0).magnitude() < tol * scale || panels >= 1 << 14 {
            return cur;
        }
        prev = cur;
    }
}

/// Locally adaptive bisection comparing a 10-point and a 20-point rule; suited to integrands with kinks.
pub fn integrate_adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let coarse = integrate_panels(f, a, b, 1, 10);
        let fine = integrate_panels(f, a, b, 1, 20);
        if (fine - coarse).abs() <= tol || depth >= 48 {
            return fine;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|p| {
            let lo = a + h * p as f64;
            recurse(f, lo, lo + h, tol / pieces as f64, 0)
        })
        .sum()
}

/// ∫_a^b dt ∫_a^t g(s, t) ds on a composite tensor grid with `panels` panels per axis.
pub fn triangle_panels<T: Integrand>(
    g: &mut dyn FnMut(f64, f64) -> T,
    a: f64,
    b: f64,
    panels: usize,
    degree: usize,
) -> T {
    let r = rule(degree);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let tlo = a + h * p as f64;
        for &(xt, wt) in r.iter() {
            let t = tlo + 0.5 * h * (1.0 + xt);
            let wt = 0.5 * h * wt;
            let mut inner = T::zero();
            for q in 0..p {
                let slo = a + h * q as f64;
                for &(xs, ws) in r.iter() {
                    let s = slo + 0.5 * h * (1.0 + xs);
                    inner = inner + g(s, t) * (0.5 * h * ws);
                }
            }
            let part = t - tlo;
            for &(xs, ws) in r.iter() {
                let s = tlo + 0.5 * part * (1.0 + xs);
                inner = inner + g(s, t) * (0.5 * part * ws);
            }
            acc = acc + inner * wt;
        }
    }
    acc
}

/// Triangle integral with panel doubling to relative tolerance `tol`.
pub fn triangle<T: Integrand>(mut g: impl FnMut(f64, f64) -> T, a: f64, b: f64, tol: f64) -> T {
    const DEGREE: usize = 12;
    let mut panels = 1;
    let mut prev = triangle_panels(&mut g, a, b, panels, DEGREE);
    loop {
        panels *= 2;
        let cur = triangle_panels(&mut g, a, b, panels, DEGREE);
        let scale = cur.magnitude().max(prev.magnitude()).max(f64::MIN_POSITIVE);
        if (cur + prev * -1.0).magnitude() <= tol * scale || panels >= 64 {
            return cur;
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let v = integrate(|x: f64| x.powi(7) - 3.0 * x, 0.0, 2.0, 1e-14);
        assert!((v - (256.0 / 8.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn kink_is_resolved_adaptively() {
        let v = integrate_adaptive(&mut |t| (2.0 * (2.0 * std::f64::consts::PI * t).cos()).abs(), 0.0, 1.0, 1e-13);
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn triangle_of_product() {
        // ∫_0^1 ∫_0^t s t ds dt = 1/8
        let v: f64 = triangle(|s, t| s * t, 0.0, 1.0, 1e-14);
        assert!((v - 0.125).abs() < 1e-14);
    }
}
