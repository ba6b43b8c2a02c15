//! Trace functions `T₁, T₂`, the discriminant `ρ`, the factors `D±` and the two Lyapunov branches.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::monodromy::{self, taylor, Backend, MonodromyMatrix};
use crate::potential::PeriodicPotential;
use crate::quadrature;
use crate::quartic_basis::{phi0, principal_quartic_root};

pub use crate::monodromy::kappa;

/// Scalar trace data at one `λ`.
///
/// With `s = scale_exponent`, `t1` holds `T₁·e^{−s}` and the other fields hold their values times `e^{−2s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBundle {
    pub lambda: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub rho: Complex64,
    pub t: Complex64,
    pub d_plus: Complex64,
    pub d_minus: Complex64,
    /// `ρ` rebuilt from `D±` alone, `(T₁ − 1)² − D₊` with `T₁ = (D₋ − D₊)/4`, at the backend's working precision.
    pub rho_recovered: Complex64,
    pub scale_exponent: f64,
}

impl TraceBundle {
    /// Assemble from `T₁` and `T = 4T₁² − T₂`, the pair that avoids cancellation in `D±`.
    pub(crate) fn from_t1_t(lambda: Complex64, t1: Complex64, t: Complex64, shift: f64) -> Self {
        let (unit, one) = units(shift);
        let t2 = 4.0 * t1 * t1 - t;
        let d_plus = 0.5 * (t - 4.0 * unit * t1 + one);
        let d_minus = 0.5 * (t + 4.0 * unit * t1 + one);
        TraceBundle {
            lambda,
            t1,
            t2,
            rho: t1 * t1 - 0.5 * (t - one),
            t,
            d_plus,
            d_minus,
            rho_recovered: recover_rho(d_plus, d_minus, unit),
            scale_exponent: shift,
        }
    }

    /// Traces of an explicit monodromy matrix, using its exterior-square trace when present.
    pub fn from_monodromy(m: &MonodromyMatrix) -> Self {
        let t1 = m.t1();
        let t = match m.wedge_trace {
            Some(w) => 0.5 * w,
            None => 4.0 * t1 * t1 - m.t2(),
        };
        Self::from_t1_t(m.lambda, t1, t, m.scale_exponent)
    }

    /// `e^{−s}` and `e^{−2s}`: the stored forms of `1` at the scales of `T₁` and of `T₂`.
    pub fn units(&self) -> (f64, f64) {
        units(self.scale_exponent)
    }

    /// Magnitude `e^{m x}` against which quantities of degree `m` (1 for `T₁`, 2 for `ρ`, `D±`) are measured, in stored units.
    pub fn natural_scale(&self, degree: i32) -> f64 {
        let x = principal_quartic_root(self.lambda).x;
        (degree as f64 * (x - self.scale_exponent)).exp()
    }

    /// Unscaled value of `ρ`; overflows to infinity past the double range.
    pub fn rho_unscaled(&self) -> Complex64 {
        self.rho * (2.0 * self.scale_exponent).exp()
    }

    pub fn d_plus_unscaled(&self) -> Complex64 {
        self.d_plus * (2.0 * self.scale_exponent).exp()
    }

    pub fn d_minus_unscaled(&self) -> Complex64 {
        self.d_minus * (2.0 * self.scale_exponent).exp()
    }

    pub fn t1_unscaled(&self) -> Complex64 {
        self.t1 * self.scale_exponent.exp()
    }
}

/// `(T₁ − 1)² − D₊` with `T₁ = (D₋ − D₊)/4`; `unit = e^{−s}`.
pub(crate) fn recover_rho(d_plus: Complex64, d_minus: Complex64, unit: f64) -> Complex64 {
    let t1 = (d_minus - d_plus) / (4.0 * unit);
    (t1 - unit) * (t1 - unit) - d_plus
}

fn units(shift: f64) -> (f64, f64) {
    ((-shift).exp(), (-2.0 * shift).exp())
}

/// `T₁, T₂, ρ, T, D±` at `λ` from one monodromy evaluation.
pub fn trace_bundle(potential: &PeriodicPotential, lambda: Complex64, backend: Backend, tol: f64) -> Result<TraceBundle> {
    backend.check(potential)?;
    match backend {
        Backend::HighPrecision => {
            let trig = potential
                .as_trig()
                .ok_or(Error::BackendMismatch { backend: backend.name(), kind: potential.kind() })?;
            let ([t1, t2, t, rho, d_plus, d_minus, rho_recovered], shift) = taylor::trace_values(trig, lambda);
            Ok(TraceBundle { lambda, t1, t2, rho, t, d_plus, d_minus, rho_recovered, scale_exponent: shift })
        }
        Backend::DeltaComb => match potential {
            PeriodicPotential::DeltaComb { gamma } => Ok(crate::delta_comb::trace_bundle_delta(*gamma, lambda)),
            _ => unreachable!("checked above"),
        },
        _ => Ok(TraceBundle::from_monodromy(&monodromy::monodromy(potential, lambda, backend, tol)?)),
    }
}

/// `T_{m,2}(λ) = ¼∫₀^m dt ∫₀^t V(s)V(t) φ₃⁰(m−t+s) φ₃⁰(t−s) ds`, the second-order term of `T_m`.
pub fn t_m2(potential: &PeriodicPotential, m: u32, lambda: Complex64) -> Result<Complex64> {
    if !(1..=2).contains(&m) {
        return Err(Error::Domain(format!("t_m2 is defined for m = 1, 2 (got {m})")));
    }
    if potential.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mf = m as f64;
    // evaluate() rejects the comb, so probe once for the error
    potential.evaluate(0.0)?;
    let g = |s: f64, t: f64| {
        let v = potential.value(s) * potential.value(t);
        phi0(3, mf - t + s, lambda) * phi0(3, t - s, lambda) * v
    };
    Ok(0.25 * quadrature::triangle(g, 0.0, mf, 1e-12))
}

/// The two branch values `Δ₁, Δ₂` of the Lyapunov function at a real `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovPair {
    pub lambda: f64,
    pub delta1: Complex64,
    pub delta2: Complex64,
    /// `ρ ≥ 0`: both branches are real.
    pub real_branches: bool,
    /// Both branches are stored times `e^{−scale_exponent}`.
    pub scale_exponent: f64,
}

impl LyapunovPair {
    pub fn from_bundle(b: &TraceBundle) -> Self {
        let (d1, d2) = branches(b);
        LyapunovPair {
            lambda: b.lambda.re,
            delta1: d1,
            delta2: d2,
            real_branches: b.rho.re >= 0.0,
            scale_exponent: b.scale_exponent,
        }
    }

    /// The four multipliers, roots of `τ² − 2Δ_mτ + 1` for `m = 1, 2`; only meaningful unscaled.
    pub fn multipliers(&self) -> [Complex64; 4] {
        let f = self.scale_exponent.exp();
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (k, d) in [self.delta1 * f, self.delta2 * f].into_iter().enumerate() {
            let (a, b) = reciprocal_roots(d);
            out[2 * k] = a;
            out[2 * k + 1] = b;
        }
        out
    }
}

/// Roots of `τ² − 2Δτ + 1`, the larger one first.
fn reciprocal_roots(delta: Complex64) -> (Complex64, Complex64) {
    let r = (delta * delta - 1.0).sqrt();
    let big = if (delta + r).norm() >= (delta - r).norm() { delta + r } else { delta - r };
    (big, 1.0 / big)
}

/// `Δ₁,₂ = T₁ ± √ρ` with `Δ₁Δ₂ = (T − 1)/2` used for the smaller of the two.
///
/// For real `λ` and `ρ ≥ 0` the root is taken nonnegative, so `Δ₁ ≥ Δ₂`. For `ρ < 0` the pair is
/// `T₁ ± i√|ρ|`. Off the real axis the principal root is used.
pub fn branches(b: &TraceBundle) -> (Complex64, Complex64) {
    let (_, one) = b.units();
    let product = 0.5 * (b.t - one);
    let real = b.lambda.im == 0.0;
    if real && b.rho.re < 0.0 {
        let t1 = Complex64::new(b.t1.re, 0.0);
        let i = Complex64::new(0.0, (-b.rho.re).sqrt());
        return (t1 + i, t1 - i);
    }
    let root = if real { Complex64::new(b.rho.re.max(0.0).sqrt(), 0.0) } else { b.rho.sqrt() };
    let (t1, product) = if real { (Complex64::new(b.t1.re, 0.0), Complex64::new(product.re, 0.0)) } else { (b.t1, product) };
    let plus = t1 + root;
    let minus = t1 - root;
    if plus.norm() >= minus.norm() {
        let d2 = if plus.norm() > 0.0 { product / plus } else { minus };
        (plus, d2)
    } else {
        let d1 = if minus.norm() > 0.0 { product / minus } else { plus };
        (d1, minus)
    }
}

/// Lyapunov branches at a real `λ`.
pub fn lyapunov_pair(potential: &PeriodicPotential, lambda: f64, backend: Backend) -> Result<LyapunovPair> {
    let b = trace_bundle(potential, Complex64::new(lambda, 0.0), backend, DEFAULT_TOL)?;
    Ok(LyapunovPair::from_bundle(&b))
}

/// ODE tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `V = 0` closed forms: `T₁⁰ = (cos z + cosh z)/2`, `ρ⁰ = ((cos z − cosh z)/2)²`.
pub fn free_traces(lambda: Complex64) -> TraceBundle {
    crate::delta_comb::trace_bundle_delta(0.0, lambda)
}
