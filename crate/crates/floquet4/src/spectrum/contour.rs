//! Winding numbers along closed contours by adaptive phase accumulation.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Contours are rejected when `min|f| / max|f|` along them falls below this.
pub const ZERO_RATIO: f64 = 1e-6;

/// Largest phase step accepted between neighbouring samples.
const MAX_STEP: f64 = PI / 4.0;

const MAX_DEPTH: u32 = 40;

/// A positively oriented closed curve in the `λ`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "plane", rename_all = "snake_case")]
pub enum Contour {
    /// `|λ − center| = radius`.
    Lambda { center: [f64; 2], radius: f64 },
    /// The image under `λ = z⁴` of `|z − center| = radius`. The disk must not contain `z = 0`.
    Quartic { center: [f64; 2], radius: f64 },
}

impl Contour {
    /// `|λ|^{1/4} = r`, i.e. the circle `|λ| = r⁴`.
    pub fn quartic_radius(r: f64) -> Self {
        Contour::Lambda { center: [0.0, 0.0], radius: r.powi(4) }
    }

    pub fn lambda_circle(center: Complex64, radius: f64) -> Self {
        Contour::Lambda { center: [center.re, center.im], radius }
    }

    pub fn z_disk(center: Complex64, radius: f64) -> Self {
        Contour::Quartic { center: [center.re, center.im], radius }
    }

    /// Point at parameter `t ∈ [0, 1)`.
    pub fn point(&self, t: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, TAU * t);
        match *self {
            Contour::Lambda { center, radius } => Complex64::new(center[0], center[1]) + radius * e,
            Contour::Quartic { center, radius } => {
                let z = Complex64::new(center[0], center[1]) + radius * e;
                let z2 = z * z;
                z2 * z2
            }
        }
    }

    /// True if `λ` lies inside the contour.
    pub fn contains(&self, lambda: Complex64) -> bool {
        match *self {
            Contour::Lambda { center, radius } => (lambda - Complex64::new(center[0], center[1])).norm() < radius,
            Contour::Quartic { center, radius } => {
                let c = Complex64::new(center[0], center[1]);
                let z = crate::quartic_basis::principal_quartic_root(lambda).z;
                let mut w = z;
                (0..4).any(|_| {
                    let inside = (w - c).norm() < radius;
                    w *= Complex64::i();
                    inside
                })
            }
        }
    }

    /// Real points of the closed disk, as an interval of `w = sign(λ)|λ|^{1/4}`.
    pub fn real_window(&self) -> Option<(f64, f64)> {
        let signed_root = |l: f64| l.signum() * l.abs().sqrt().sqrt();
        match *self {
            Contour::Lambda { center, radius } => {
                if center[1].abs() >= radius {
                    return None;
                }
                let half = (radius * radius - center[1] * center[1]).sqrt();
                Some((signed_root(center[0] - half), signed_root(center[0] + half)))
            }
            Contour::Quartic { center, radius } => {
                let c = Complex64::new(center[0], center[1]);
                // positive axis: z real; negative axis: z on the ray arg z = π/4
                let ray = |dir: Complex64| -> Option<(f64, f64)> {
                    let p = (c * dir.conj()).re;
                    let d2 = radius * radius - (c - p * dir).norm_sqr();
                    if d2 <= 0.0 {
                        return None;
                    }
                    let d = d2.sqrt();
                    let (lo, hi) = ((p - d).max(0.0), p + d);
                    (hi > 0.0).then_some((lo, hi))
                };
                if let Some((lo, hi)) = ray(Complex64::new(1.0, 0.0)) {
                    return Some((lo, hi));
                }
                ray(Complex64::from_polar(1.0, PI / 4.0)).map(|(lo, hi)| (-hi, -lo))
            }
        }
    }

    fn initial_samples(&self) -> usize {
        let arc = match *self {
            Contour::Lambda { center, radius } => {
                let far = Complex64::new(center[0], center[1]).norm() + radius;
                // the quarter-angle image has arc length ≲ (π/2)·|λ|^{1/4}
                0.5 * PI * far.sqrt().sqrt()
            }
            Contour::Quartic { radius, .. } => TAU * radius,
        };
        (64.0 + 16.0 * arc).ceil() as usize
    }
}

/// Number of zeros of `f` inside `contour`, counted with multiplicity.
///
/// `f` may be rescaled by any positive factor that varies continuously along the contour; the
/// ratio test against [`ZERO_RATIO`] is applied to the values as returned.
pub fn count_zeros<F>(mut f: F, contour: &Contour) -> Result<usize>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let n = contour.initial_samples();
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..n {
        let t = i as f64 / n as f64;
        values.push((t, f(contour.point(t))?));
    }
    values.push((1.0, values[0].1));

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut note = |v: Complex64| {
        let m = v.norm();
        lo = lo.min(m);
        hi = hi.max(m);
    };
    for &(_, v) in &values {
        note(v);
    }

    let mut total = 0.0;
    for w in values.windows(2) {
        let (ta, va) = w[0];
        let (tb, vb) = w[1];
        total += phase_step(&mut f, contour, ta, va, tb, vb, 0, &mut note)?;
    }
    if !(lo / hi > ZERO_RATIO) {
        return Err(Error::ZeroOnContour { ratio: lo / hi });
    }
    let winding = total / TAU;
    let k = winding.round();
    if (winding - k).abs() > 0.1 || k < 0.0 {
        return Err(Error::ZeroOnContour { ratio: lo / hi });
    }
    Ok(k as usize)
}

fn phase_step<F>(
    f: &mut F,
    contour: &Contour,
    ta: f64,
    va: Complex64,
    tb: f64,
    vb: Complex64,
    depth: u32,
    note: &mut impl FnMut(Complex64),
) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let direct = (vb / va).arg();
    let tm = 0.5 * (ta + tb);
    let vm = f(contour.point(tm))?;
    note(vm);
    let d1 = (vm / va).arg();
    let d2 = (vb / vm).arg();
    if direct.abs() < MAX_STEP && d1.abs() < MAX_STEP && d2.abs() < MAX_STEP && (d1 + d2 - direct).abs() < 1e-3 {
        return Ok(d1 + d2);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::ZeroOnContour { ratio: (va.norm().min(vb.norm())) / va.norm().max(vb.norm()) });
    }
    Ok(phase_step(f, contour, ta, va, tm, vm, depth + 1, note)? + phase_step(f, contour, tm, vm, tb, vb, depth + 1, note)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_roots_are_counted() {
        let f = |l: Complex64| Ok((l - 1.0) * (l - 2.0) * (l - 2.0) * (l + 5.0));
        assert_eq!(count_zeros(f, &Contour::lambda_circle(Complex64::new(0.0, 0.0), 3.0)).unwrap(), 3);
        assert_eq!(count_zeros(f, &Contour::lambda_circle(Complex64::new(0.0, 0.0), 6.0)).unwrap(), 4);
        assert_eq!(count_zeros(f, &Contour::lambda_circle(Complex64::new(10.0, 0.0), 1.0)).unwrap(), 0);
    }

    #[test]
    fn zero_on_contour_is_refused() {
        let f = |l: Complex64| Ok(l - 3.0);
        let e = count_zeros(f, &Contour::lambda_circle(Complex64::new(0.0, 0.0), 3.0)).unwrap_err();
        assert!(matches!(e, Error::ZeroOnContour { .. }));
    }

    #[test]
    fn quartic_disk_windows() {
        let c = Contour::z_disk(Complex64::new(2.0 * PI, 0.0), PI / 2.0);
        let (lo, hi) = c.real_window().unwrap();
        assert!((lo - 1.5 * PI).abs() < 1e-12 && (hi - 2.5 * PI).abs() < 1e-12);
        assert!(c.contains(Complex64::new((2.0 * PI).powi(4), 1.0)));
        let r = Contour::z_disk(Complex64::new(PI, PI), PI / 4.0);
        let (lo, hi) = r.real_window().unwrap();
        let m = 2f64.sqrt() * PI;
        assert!((lo + m + PI / 4.0).abs() < 1e-12 && (hi + m - PI / 4.0).abs() < 1e-12);
        assert!(r.contains(Complex64::new(-4.0 * PI.powi(4), -3.0)));
        assert!(!r.contains(Complex64::new(-4.0 * (2.0 * PI).powi(4), 0.0)));
    }
}
