//! Scalar root finding and minimization helpers.

use roots::{find_root_brent, Convergency};

use crate::error::{Error, Result};

/// Stops on an exact zero, or when the bracket is narrower than `rel` times its magnitude.
struct Relative {
    rel: f64,
}

impl Convergency<f64> for Relative {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.rel * x1.abs().max(x2.abs()).max(f64::MIN_POSITIVE) + 4.0 * f64::EPSILON * f64::MIN_POSITIVE
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 400
    }
}

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel: f64) -> Result<f64> {
    if f(a) == 0.0 {
        return Ok(a);
    }
    if f(b) == 0.0 {
        return Ok(b);
    }
    let mut conv = Relative { rel: rel.max(4.0 * f64::EPSILON) };
    find_root_brent(a, b, f, &mut conv).map_err(|e| Error::RootEscape(format!("Brent on [{a}, {b}]: {e}")))
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, rel: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > (rel * (a.abs() + b.abs())).max(4.0 * f64::EPSILON * a.abs().max(b.abs())).max(1e-300) && iter < 300 {
        iter += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimum of a smooth unimodal `f` on `[a, b]`: golden section to a coarse bracket, then
/// successive parabolic interpolation. Returns `(x, f(x))`.
pub fn minimize(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let width = (b - a).abs();
    let x0 = golden_min(&mut f, a, b, 1e-4 * width / (a.abs() + b.abs()).max(1e-300));
    // three points around the coarse minimizer, the best kept in the middle
    let h = 1e-4 * width;
    let mut pts = [(x0 - h, f(x0 - h)), (x0, f(x0)), (x0 + h, f(x0 + h))];
    for _ in 0..12 {
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let [(x1, f1), (x2, f2), (x3, f3)] = pts;
        let num = (x2 - x1).powi(2) * (f2 - f3) - (x2 - x3).powi(2) * (f2 - f1);
        let den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1);
        if den == 0.0 || !den.is_finite() {
            break;
        }
        let x = (x2 - 0.5 * num / den).clamp(a.min(b), a.max(b));
        let fx = f(x);
        // replace the worst point
        let worst = (0..3).max_by(|&i, &j| pts[i].1.total_cmp(&pts[j].1)).unwrap();
        let step = (x - x2).abs();
        if fx < pts[worst].1 {
            pts[worst] = (x, fx);
        } else {
            break;
        }
        if step <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    pts.into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap()
}
