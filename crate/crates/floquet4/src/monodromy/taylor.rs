//! Taylor-series integration of `y⁗ = (λ − V) y` in double-double arithmetic for trig potentials.
//!
//! Quantities such as `ρ` and `T` lose up to `e^{2x}` to cancellation when formed from `M`; carrying
//! roughly 32 digits through the whole computation keeps them accurate well past the desk-scale range.

use num_complex::{Complex, Complex64};

use crate::dd::{abs1, cdd, cexp, cone, czero, dd, inv, scale, to_c64, CDD};
use crate::error::{Error, Result};
use crate::potential::{PeriodicPotential, TrigPotential};
use crate::quartic_basis::{principal_quartic_root, Mat4};

use super::{shift_for, MonodromyMatrix};

const MAX_ORDER: usize = 160;

pub(crate) type Mat4DD = [[CDD; 4]; 4];

/// Entries `(k, j) = φⱼ⁽ᵏ⁾(1, λ)·e^{−shift}` in double-double, together with the shift.
pub(crate) fn monodromy_dd(potential: &TrigPotential, lambda: Complex64) -> (Mat4DD, f64) {
    let root = principal_quartic_root(lambda);
    let shift = shift_for(root.x);
    let harmonics: Vec<(usize, CDD)> = potential
        .positive_coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|(k, c)| (k + 1, cdd(*c)))
        .collect();
    let top = harmonics.last().map_or(0, |h| h.0);
    let rate = root.z.norm().max(2.0 * std::f64::consts::PI * top as f64).max(1.0);
    let steps = rate.ceil() as usize;
    let h = inv(steps as f64);
    let two_pi = twofloat::consts::PI * dd(2.0);
    let lam = cdd(lambda);
    let h4 = h * h * h * h;
    let damp = if shift > 0.0 {
        cexp(Complex::new(-(dd(shift) * h), dd(0.0))).re
    } else {
        dd(1.0)
    };

    // Phase factors e^{2πinh} and running e^{2πin t0}.
    let step_phase: Vec<CDD> = harmonics
        .iter()
        .map(|&(n, _)| cexp(Complex::new(dd(0.0), two_pi * dd(n as f64) * h)))
        .collect();
    let mut phase: Vec<CDD> = vec![cone(); harmonics.len()];
    // (2πinh)^i / i! for each harmonic, reused every step.
    let mut powers: Vec<Vec<CDD>> = Vec::with_capacity(harmonics.len());
    for &(n, _) in &harmonics {
        let w = Complex::new(dd(0.0), two_pi * dd(n as f64) * h);
        let mut row = Vec::with_capacity(MAX_ORDER + 1);
        let mut term = cone();
        row.push(term);
        for i in 1..=MAX_ORDER {
            term = scale(term * w, inv(i as f64));
            row.push(term);
        }
        powers.push(row);
    }

    // state[j][m] = y_j^{(m)}(t0)
    let mut state = [[czero(); 4]; 4];
    for (j, col) in state.iter_mut().enumerate() {
        col[j] = cone();
    }
    let falling = |k: usize, m: usize| -> f64 { (0..m).map(|i| (k - i) as f64).product() };
    let mut v = vec![dd(0.0); MAX_ORDER + 1];
    let mut b = vec![czero(); MAX_ORDER + 5];
    let hpow = [dd(1.0), h, h * h, h * h * h];
    let s = steps as f64;
    let inv_hpow = [dd(1.0), dd(s), dd(s) * s, dd(s) * s * s];

    for _ in 0..steps {
        // Scaled Taylor coefficients of V at t0: ṽ_i = Σ 2 Re(V̂_n e^{2πin t0} (2πinh)^i / i!).
        let mut vmax = 0.0f64;
        for (i, vi) in v.iter_mut().enumerate() {
            let mut acc = dd(0.0);
            for (idx, &(_, c)) in harmonics.iter().enumerate() {
                let term = c * phase[idx] * powers[idx][i];
                acc += term.re * dd(2.0);
            }
            *vi = acc;
            vmax = vmax.max(f64::from(acc).abs());
        }
        for col in state.iter_mut() {
            let mut bmax = 0.0f64;
            for m in 0..4 {
                b[m] = scale(col[m], hpow[m] / falling(m, m));
                bmax = bmax.max(abs1(b[m]));
            }
            let mut order = 4;
            let mut quiet = 0;
            while order < MAX_ORDER {
                let k = order - 4;
                let mut conv = czero();
                for i in 0..=k {
                    if v[i] != dd(0.0) {
                        conv += scale(b[k - i], v[i]);
                    }
                }
                let num = lam * b[k] - conv;
                let denom = ((k + 1) * (k + 2) * (k + 3) * (k + 4)) as f64;
                b[order] = scale(num, h4 / denom);
                let mag = abs1(b[order]);
                bmax = bmax.max(mag);
                if mag <= 1e-36 * bmax {
                    quiet += 1;
                    if quiet >= 4 && order > 12 {
                        order += 1;
                        break;
                    }
                } else {
                    quiet = 0;
                }
                order += 1;
            }
            for m in 0..4 {
                let mut acc = czero();
                for k in m..order {
                    acc += scale(b[k], dd(falling(k, m)));
                }
                col[m] = scale(acc, inv_hpow[m] * damp);
            }
        }
        for (p, s) in phase.iter_mut().zip(&step_phase) {
            *p = *p * *s;
        }
        let _ = vmax;
    }

    let mut out = [[czero(); 4]; 4];
    for (j, col) in state.iter().enumerate() {
        for k in 0..4 {
            out[k][j] = col[k];
        }
    }
    (out, shift)
}

pub(crate) fn round_matrix(m: &Mat4DD) -> Mat4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for k in 0..4 {
        for j in 0..4 {
            out[k][j] = to_c64(m[k][j]);
        }
    }
    out
}

/// `Tr M/4`, `Tr M²/4` in double-double (each carrying the stored exponent offset).
pub(crate) fn traces_dd(m: &Mat4DD) -> (CDD, CDD) {
    let mut tr = czero();
    let mut tr2 = czero();
    for i in 0..4 {
        tr += m[i][i];
        for l in 0..4 {
            tr2 += m[i][l] * m[l][i];
        }
    }
    (scale(tr, dd(0.25)), scale(tr2, dd(0.25)))
}

/// Monodromy matrix from the double-double integrator, rounded to double precision.
pub fn monodromy_high_precision(potential: &PeriodicPotential, lambda: Complex64) -> Result<MonodromyMatrix> {
    let trig = potential
        .as_trig()
        .ok_or(Error::BackendMismatch { backend: "high_precision", kind: potential.kind() })?;
    let (m, shift) = monodromy_dd(trig, lambda);
    let (t1, t2) = traces_dd(&m);
    let four = dd(4.0);
    let t = scale(t1 * t1, four) - t2;
    Ok(MonodromyMatrix {
        lambda,
        entries: round_matrix(&m),
        scale_exponent: shift,
        wedge_trace: Some(to_c64(scale(t, dd(2.0)))),
    })
}

/// `(T₁, T₂, T, ρ, D₊, D₋)` formed in double-double and only then rounded, plus the exponent offset.
pub(crate) fn trace_values(potential: &TrigPotential, lambda: Complex64) -> ([Complex64; 7], f64) {
    let (m, shift) = monodromy_dd(potential, lambda);
    let (t1, t2) = traces_dd(&m);
    // 1 and 4T₁ carry e^{−2s} and e^{−s} relative to the stored T.
    let one = if shift > 0.0 { cexp(Complex::new(dd(-2.0 * shift), dd(0.0))) } else { cone() };
    let unit = if shift > 0.0 { cexp(Complex::new(dd(-shift), dd(0.0))) } else { cone() };
    let t = scale(t1 * t1, dd(4.0)) - t2;
    let rho = t1 * t1 - scale(t - one, dd(0.5));
    let four_t1 = scale(t1 * unit, dd(4.0));
    let d_plus = scale(t - four_t1 + one, dd(0.5));
    let d_minus = scale(t + four_t1 + one, dd(0.5));
    // ρ again, from D± alone
    let inv_unit = if shift > 0.0 { cexp(Complex::new(dd(shift), dd(0.0))) } else { cone() };
    let t1_back = scale(d_minus - d_plus, dd(0.25)) * inv_unit;
    let rho_recovered = (t1_back - unit) * (t1_back - unit) - d_plus;
    ([t1, t2, t, rho, d_plus, d_minus, rho_recovered].map(to_c64), shift)
}
