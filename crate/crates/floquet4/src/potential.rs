//! One-periodic, mean-zero potentials and their Fourier data.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const REALNESS_TOL: f64 = 1e-14;
const MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum PeriodicPotential {
    Trig(TrigPotential),
    Sampled(SampledPotential),
    DeltaComb { gamma: f64 },
}

/// `V(t) = Σ_{n≠0} V̂_n e^{2πint}` with `V̂_{-n} = conj(V̂_n)`; only positive indices are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPotential {
    coeffs: Vec<Complex64>,
}

/// Uniform samples on [0, 1) with periodic local Lagrange interpolation through `order` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    values: Vec<f64>,
    order: usize,
}

/// Serialized form: `{"kind":"trig","coeffs":[[n,re,im],...]}` and friends.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Trig { coeffs: Vec<[f64; 3]> },
    Sampled {
        values: Vec<f64>,
        #[serde(default)]
        order: Option<usize>,
    },
    DeltaComb { gamma: f64 },
}

impl TrigPotential {
    /// `V̂_n` for `n ≥ 1`, indexed from zero.
    pub fn positive_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let (s, co) = (2.0 * PI * (k + 1) as f64 * t).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// The full two-sided sum, whose imaginary part vanishes for a real potential.
    pub fn value_complex(&self, t: f64) -> Complex64 {
        let t = t.rem_euclid(1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = Complex64::from_polar(1.0, 2.0 * PI * (k + 1) as f64 * t);
            acc += c * e + c.conj() * e.conj();
        }
        acc
    }
}

impl SampledPotential {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self, t: f64) -> f64 {
        let m = self.values.len();
        let u = t.rem_euclid(1.0) * m as f64;
        let cell = u.floor();
        let frac = u - cell;
        let cell = cell as i64;
        let p = self.order as i64;
        let first = 1 - p / 2;
        let mut acc = 0.0;
        for a in 0..p {
            let xa = (first + a) as f64;
            let mut w = 1.0;
            for b in 0..p {
                if b != a {
                    let xb = (first + b) as f64;
                    w *= (frac - xb) / (xa - xb);
                }
            }
            let idx = (cell + first + a).rem_euclid(m as i64) as usize;
            acc += w * self.values[idx];
        }
        acc
    }
}

impl PeriodicPotential {
    pub fn zero() -> Self {
        PeriodicPotential::Trig(TrigPotential { coeffs: Vec::new() })
    }

    /// Build from `(n, V̂_n)` pairs. A missing `-n` partner is implied by conjugation; a present one must match.
    pub fn trig(coeffs: &[(i64, Complex64)]) -> Result<Self> {
        let max = coeffs.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut pos = vec![None::<Complex64>; max];
        let mut neg = vec![None::<Complex64>; max];
        for &(n, c) in coeffs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidPotential(format!("non-finite coefficient at n = {n}")));
            }
            if n == 0 {
                if c.norm() != 0.0 {
                    return Err(Error::InvalidPotential(
                        "nonzero mean: the n = 0 coefficient must vanish".into(),
                    ));
                }
                continue;
            }
            let slot = if n > 0 { &mut pos[n as usize - 1] } else { &mut neg[(-n) as usize - 1] };
            if slot.is_some() {
                return Err(Error::InvalidPotential(format!("duplicate coefficient for n = {n}")));
            }
            *slot = Some(c);
        }
        let mut out = Vec::with_capacity(max);
        for k in 0..max {
            let c = match (pos[k], neg[k]) {
                (Some(p), Some(q)) => {
                    let scale = p.norm().max(q.norm()).max(1.0);
                    if (p - q.conj()).norm() > REALNESS_TOL * scale {
                        return Err(Error::InvalidPotential(format!(
                            "coefficients for n = ±{} are not conjugate (potential must be real)",
                            k + 1
                        )));
                    }
                    p
                }
                (Some(p), None) => p,
                (None, Some(q)) => q.conj(),
                (None, None) => Complex64::new(0.0, 0.0),
            };
            out.push(c);
        }
        while out.last().is_some_and(|c| c.norm() == 0.0) {
            out.pop();
        }
        Ok(PeriodicPotential::Trig(TrigPotential { coeffs: out }))
    }

    /// `Σ aₙ cos 2πnt` for the given `(n, aₙ)`, `n ≥ 1`.
    pub fn cosine_series(terms: &[(u32, f64)]) -> Result<Self> {
        let pairs: Vec<(i64, Complex64)> = terms
            .iter()
            .map(|&(n, a)| (n as i64, Complex64::new(0.5 * a, 0.0)))
            .collect();
        if terms.iter().any(|&(n, _)| n == 0) {
            return Err(Error::InvalidPotential("cosine terms need n ≥ 1".into()));
        }
        Self::trig(&pairs)
    }

    pub fn sampled(values: Vec<f64>, order: usize) -> Result<Self> {
        if order < 2 || order % 2 != 0 || order > 16 {
            return Err(Error::InvalidPotential(format!(
                "interpolation order must be even and in 2..=16, got {order}"
            )));
        }
        if values.len() < order {
            return Err(Error::InvalidPotential(format!(
                "need at least {order} samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        // The periodic Lagrange interpolant integrates to the sample mean.
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if mean.abs() > MEAN_TOL * scale {
            return Err(Error::InvalidPotential(format!("nonzero mean {mean:e}")));
        }
        Ok(PeriodicPotential::Sampled(SampledPotential { values, order }))
    }

    pub fn delta_comb(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidPotential("non-finite coupling".into()));
        }
        Ok(PeriodicPotential::DeltaComb { gamma })
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        match spec {
            PotentialSpec::Trig { coeffs } => {
                let mut pairs = Vec::with_capacity(coeffs.len());
                for &[n, re, im] in coeffs {
                    if n.fract() != 0.0 || n.abs() > 1e6 {
                        return Err(Error::InvalidPotential(format!("harmonic index {n} is not an integer")));
                    }
                    pairs.push((n as i64, Complex64::new(re, im)));
                }
                Self::trig(&pairs)
            }
            PotentialSpec::Sampled { values, order } => Self::sampled(values.clone(), order.unwrap_or(8)),
            PotentialSpec::DeltaComb { gamma } => Self::delta_comb(*gamma),
        }
    }

    pub fn to_spec(&self) -> PotentialSpec {
        match self {
            PeriodicPotential::Trig(t) => PotentialSpec::Trig {
                coeffs: t
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| [(k + 1) as f64, c.re, c.im])
                    .collect(),
            },
            PeriodicPotential::Sampled(s) => PotentialSpec::Sampled {
                values: s.values.clone(),
                order: Some(s.order),
            },
            PeriodicPotential::DeltaComb { gamma } => PotentialSpec::DeltaComb { gamma: *gamma },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PeriodicPotential::Trig(_) => "trig",
            PeriodicPotential::Sampled(_) => "sampled",
            PeriodicPotential::DeltaComb { .. } => "delta_comb",
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PeriodicPotential::Trig(t) => t.coeffs.is_empty(),
            PeriodicPotential::Sampled(s) => s.values.iter().all(|&v| v == 0.0),
            PeriodicPotential::DeltaComb { gamma } => *gamma == 0.0,
        }
    }

    /// The potential `γ·V`.
    pub fn scaled(&self, gamma: f64) -> Self {
        match self {
            PeriodicPotential::Trig(t) => {
                let mut coeffs: Vec<Complex64> = t.coeffs.iter().map(|c| c * gamma).collect();
                if gamma == 0.0 {
                    coeffs.clear();
                }
                PeriodicPotential::Trig(TrigPotential { coeffs })
            }
            PeriodicPotential::Sampled(s) => PeriodicPotential::Sampled(SampledPotential {
                values: s.values.iter().map(|v| v * gamma).collect(),
                order: s.order,
            }),
            PeriodicPotential::DeltaComb { gamma: g } => PeriodicPotential::DeltaComb { gamma: g * gamma },
        }
    }

    pub fn fourier_coefficient(&self, n: i64) -> Result<Complex64> {
        match self {
            PeriodicPotential::Trig(t) => {
                if n == 0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let k = n.unsigned_abs() as usize;
                let c = t.coeffs.get(k - 1).copied().unwrap_or_default();
                Ok(if n > 0 { c } else { c.conj() })
            }
            PeriodicPotential::Sampled(s) => {
                if n == 0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let m = s.values.len();
                let degree = s.order / 2 + 8;
                let omega = -2.0 * PI * n as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for cell in 0..m {
                    let a = cell as f64 / m as f64;
                    let b = (cell + 1) as f64 / m as f64;
                    for (t, w) in quadrature::mapped_rule(degree, a, b) {
                        acc += Complex64::from_polar(w * s.value(t), omega * t);
                    }
                }
                Ok(acc)
            }
            PeriodicPotential::DeltaComb { .. } => Err(Error::UnsupportedRepresentation("delta_comb")),
        }
    }

    /// `‖V‖ = ∫₀¹|V(t)| dt`; for the delta comb this is `|γ|`.
    pub fn norm_l1(&self) -> Result<f64> {
        match self {
            PeriodicPotential::Trig(t) => {
                if t.coeffs.is_empty() {
                    return Ok(0.0);
                }
                Ok(quadrature::integrate_adaptive(&mut |x| t.value(x).abs(), 0.0, 1.0, 1e-14))
            }
            PeriodicPotential::Sampled(s) => {
                Ok(quadrature::integrate_adaptive(&mut |x| s.value(x).abs(), 0.0, 1.0, 1e-14))
            }
            PeriodicPotential::DeltaComb { .. } => Err(Error::UnsupportedRepresentation("delta_comb")),
        }
    }

    /// Total mass used by the Picard bound; equals `‖V‖` for functions and `|γ|` for the comb.
    pub fn mass(&self) -> f64 {
        match self {
            PeriodicPotential::DeltaComb { gamma } => gamma.abs(),
            _ => self.norm_l1().unwrap_or(0.0),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        match self {
            PeriodicPotential::Trig(p) => Ok(p.value(t)),
            PeriodicPotential::Sampled(p) => Ok(p.value(t)),
            PeriodicPotential::DeltaComb { .. } => Err(Error::UnsupportedRepresentation("delta_comb")),
        }
    }

    /// Two-sided Fourier sum; only defined for the trig representation.
    pub fn evaluate_complex(&self, t: f64) -> Result<Complex64> {
        match self {
            PeriodicPotential::Trig(p) => Ok(p.value_complex(t)),
            _ => Err(Error::UnsupportedRepresentation(self.kind())),
        }
    }

    /// Discrete Fourier transform of the samples as a trig polynomial (harmonics below the Nyquist index).
    pub fn to_trig(&self) -> Result<Self> {
        match self {
            PeriodicPotential::Trig(_) => Ok(self.clone()),
            PeriodicPotential::Sampled(s) => {
                let m = s.values.len();
                let mut pairs = Vec::new();
                for n in 1..m.div_ceil(2) {
                    let mut c = Complex64::new(0.0, 0.0);
                    for (k, &v) in s.values.iter().enumerate() {
                        let ang = -2.0 * PI * ((n * k) % m) as f64 / m as f64;
                        c += Complex64::from_polar(v, ang);
                    }
                    pairs.push((n as i64, c / m as f64));
                }
                Self::trig(&pairs)
            }
            PeriodicPotential::DeltaComb { .. } => Err(Error::UnsupportedRepresentation("delta_comb")),
        }
    }

    pub fn as_trig(&self) -> Option<&TrigPotential> {
        match self {
            PeriodicPotential::Trig(t) => Some(t),
            _ => None,
        }
    }

    /// Pointwise value without representation checks; zero for the comb.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self {
            PeriodicPotential::Trig(p) => p.value(t),
            PeriodicPotential::Sampled(p) => p.value(t),
            PeriodicPotential::DeltaComb { .. } => 0.0,
        }
    }
}
