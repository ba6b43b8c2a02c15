//! Complex double-double helpers for the high-precision backend.

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

pub type DD = TwoFloat;
pub type CDD = Complex<TwoFloat>;

pub fn dd(x: f64) -> DD {
    TwoFloat::from(x)
}

pub fn cdd(z: Complex64) -> CDD {
    Complex::new(dd(z.re), dd(z.im))
}

pub fn to_c64(z: CDD) -> Complex64 {
    Complex64::new(f64::from(z.re), f64::from(z.im))
}

pub fn czero() -> CDD {
    Complex::new(dd(0.0), dd(0.0))
}

pub fn cone() -> CDD {
    Complex::new(dd(1.0), dd(0.0))
}

pub fn scale(z: CDD, s: DD) -> CDD {
    Complex::new(z.re * s, z.im * s)
}

/// `1 / k` in double-double.
pub fn inv(k: f64) -> DD {
    dd(1.0) / k
}

pub fn abs1(z: CDD) -> f64 {
    f64::from(z.re).abs() + f64::from(z.im).abs()
}

/// e^z by a Taylor series after halving the argument below 1/2, then repeated squaring.
pub fn cexp(z: CDD) -> CDD {
    let mag = abs1(z);
    let mut halvings = 0u32;
    let mut w = z;
    let mut m = mag;
    while m > 0.5 {
        w = scale(w, dd(0.5));
        m *= 0.5;
        halvings += 1;
    }
    let mut term = cone();
    let mut sum = cone();
    for k in 1..60 {
        term = scale(term * w, inv(k as f64));
        sum += term;
        if abs1(term) < 1e-36 * abs1(sum) {
            break;
        }
    }
    for _ in 0..halvings {
        sum = sum * sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_exponential_is_accurate() {
        // e^{iπ/3} = 1/2 + i√3/2; check (re - 1/2) and |w|² - 1 in double-double
        let pi = twofloat::consts::PI;
        let w = cexp(Complex::new(dd(0.0), pi / 3.0));
        let err_re = f64::from(w.re - dd(0.5)).abs();
        let err_norm = f64::from(w.re * w.re + w.im * w.im - dd(1.0)).abs();
        assert!(err_re < 1e-30, "{err_re:e}");
        assert!(err_norm < 1e-30, "{err_norm:e}");
    }
}
