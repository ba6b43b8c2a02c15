//! The principal quartic root `z = λ^{1/4}` and the unperturbed fundamental solutions `φⱼ⁰`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

pub type Mat4 = [[Complex64; 4]; 4];

/// Below this value of `|z t|` the closed forms lose digits to cancellation and the series is used.
const SERIES_SWITCH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticRoot {
    pub lambda: Complex64,
    pub z: Complex64,
    pub x: f64,
    pub y: f64,
}

/// `z = λ^{1/4}` with `arg z ∈ (−π/4, π/4]`; the ray `arg λ = π` maps to `arg z = π/4`.
pub fn principal_quartic_root(lambda: Complex64) -> QuarticRoot {
    let r = lambda.norm();
    let z = if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let mut theta = lambda.im.atan2(lambda.re);
        if theta <= -PI {
            theta = PI;
        }
        if lambda.im == 0.0 && lambda.re < 0.0 {
            theta = PI;
        }
        Complex64::from_polar(r.sqrt().sqrt(), 0.25 * theta)
    };
    QuarticRoot { lambda, z, x: z.re, y: z.im }
}

/// True iff `|z| > r` and `z` stays farther than π/4 from every `πn` and `(1±i)πn`, `n ≥ 0`.
pub fn in_domain_d(root: &QuarticRoot, r: f64) -> bool {
    let z = root.z;
    if z.norm() <= r {
        return false;
    }
    let base = (z.re / PI).round().max(0.0) as i64;
    for n in (base - 2).max(0)..=base + 2 {
        let p = PI * n as f64;
        let lattice = [
            Complex64::new(p, 0.0),
            Complex64::new(p, p),
            Complex64::new(p, -p),
        ];
        if lattice.iter().any(|c| (z - c).norm() <= FRAC_PI_4) {
            return false;
        }
    }
    true
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `φ_m⁰(t, λ)·e^{−shift}` for `m ∈ −3..=3`, using `φ_m = λ φ_{m+4}` for negative `m`.
pub(crate) fn phi0_scaled(m: i32, t: f64, lambda: Complex64, z: Complex64, shift: f64) -> Complex64 {
    if m < 0 {
        return lambda * phi0_scaled(m + 4, t, lambda, z, shift);
    }
    let w = z * t;
    if w.norm() < SERIES_SWITCH {
        // φ_m = Σ_k λ^k t^{4k+m}/(4k+m)!
        let t4 = lambda * t.powi(4);
        let mut term = Complex64::new(t.powi(m) / factorial(m as u32), 0.0);
        let mut sum = term;
        for k in 1..40u32 {
            let d = 4 * k + m as u32;
            term *= t4 / ((d - 3) as f64 * (d - 2) as f64 * (d - 1) as f64 * d as f64);
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        return sum * (-shift).exp();
    }
    let i = Complex64::new(0.0, 1.0);
    let ep = (w - shift).exp();
    let em = (-w - shift).exp();
    let eip = (i * w - shift).exp();
    let eim = (-i * w - shift).exp();
    let ch = 0.5 * (ep + em);
    let sh = 0.5 * (ep - em);
    let c = 0.5 * (eip + eim);
    let s = (eip - eim) / (2.0 * i);
    match m {
        0 => 0.5 * (ch + c),
        1 => (sh + s) / (2.0 * z),
        2 => (ch - c) / (2.0 * z * z),
        3 => (sh - s) / (2.0 * z * z * z),
        _ => unreachable!("index outside -3..=3"),
    }
}

/// `φⱼ⁰(t, λ)`, `j ∈ 0..=3`.
pub fn phi0(j: usize, t: f64, lambda: Complex64) -> Complex64 {
    assert!(j < 4, "phi0 index must be in 0..=3");
    let z = principal_quartic_root(lambda).z;
    phi0_scaled(j as i32, t, lambda, z, 0.0)
}

pub(crate) fn phi0_matrix_scaled(t: f64, lambda: Complex64, shift: f64) -> Mat4 {
    let z = principal_quartic_root(lambda).z;
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = phi0_scaled(j as i32 - k as i32, t, lambda, z, shift);
        }
    }
    m
}

/// The unperturbed matrix with entries `(k, j) = ∂ₜᵏφⱼ⁰ = φ⁰_{j−k}`.
pub fn phi0_matrix(t: f64, lambda: Complex64) -> Mat4 {
    phi0_matrix_scaled(t, lambda, 0.0)
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}
