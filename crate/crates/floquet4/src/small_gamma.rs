//! The bottom of the spectrum for a weak potential `γV`.
//!
//! For small `γ ≠ 0` the lowest band starts at the resonance `r₀⁻(γ)`, is four-fold up to the
//! periodic eigenvalue `λ₀⁺(γ)`, and both endpoints move like `2γ²(4v₁ − v₂)`, separated by
//! `4A²γ⁴` to leading order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::Backend;
use crate::potential::PeriodicPotential;
use crate::quadrature;
use crate::solve;
use crate::spectrum::classify_bundle;
use crate::traces::{self, TraceBundle};

/// Interior points checked for multiplicity 4.
pub const INTERIOR_POINTS: usize = 32;

/// `v₁, v₂` and the two expressions for the gap constant `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallGammaConstants {
    pub v1: f64,
    pub v2: f64,
    /// `v₂/12 − 4v₁/3`.
    pub a_integral: f64,
    /// `(5/4) Σ_{n≠0} |V̂ₙ|²/(2πn)⁶`. Numerically `a_integral = 2·a_fourier`; the gap law follows `a_integral`.
    pub a_fourier: f64,
}

impl SmallGammaConstants {
    /// `2γ²(4v₁ − v₂)`, the common leading term of `r₀⁻(γ)` and `λ₀⁺(γ)`.
    pub fn leading_endpoint(&self, gamma: f64) -> f64 {
        2.0 * gamma * gamma * (4.0 * self.v1 - self.v2)
    }

    /// `4A²γ⁴`.
    pub fn leading_gap(&self, gamma: f64) -> f64 {
        4.0 * self.a_integral * self.a_integral * gamma.powi(4)
    }
}

fn reject_comb(potential: &PeriodicPotential) -> Result<()> {
    if matches!(potential, PeriodicPotential::DeltaComb { .. }) {
        return Err(Error::UnsupportedRepresentation("delta_comb"));
    }
    Ok(())
}

/// `v_m = (1/144) ∫₀^m dt ∫₀^t V(t)V(s)(m−t+s)³(t−s)³ ds` for `m = 1, 2`.
pub fn v_constants(potential: &PeriodicPotential) -> Result<(f64, f64)> {
    reject_comb(potential)?;
    if potential.is_zero() {
        return Ok((0.0, 0.0));
    }
    let v = |m: f64| {
        quadrature::triangle(
            |s, t| potential.value(t) * potential.value(s) * ((m - t + s) * (t - s)).powi(3),
            0.0,
            m,
            1e-14,
        ) / 144.0
    };
    Ok((v(1.0), v(2.0)))
}

pub fn constants(potential: &PeriodicPotential) -> Result<SmallGammaConstants> {
    let (v1, v2) = v_constants(potential)?;
    let harmonics = match potential {
        PeriodicPotential::Trig(t) => t.max_harmonic(),
        PeriodicPotential::Sampled(s) => s.order(),
        PeriodicPotential::DeltaComb { .. } => unreachable!("rejected above"),
    };
    let mut sum = 0.0;
    for n in 1..=harmonics {
        let c = potential.fourier_coefficient(n as i64)?.norm_sqr();
        sum += 2.0 * c / (2.0 * PI * n as f64).powi(6);
    }
    Ok(SmallGammaConstants { v1, v2, a_integral: v2 / 12.0 - 4.0 * v1 / 3.0, a_fourier: 1.25 * sum })
}

/// The two lowest spectral endpoints of `γV`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowestBand {
    pub gamma: f64,
    pub r0_minus: f64,
    pub lambda0_plus: f64,
    /// Uncertainty of each endpoint: bracket width plus evaluation noise over the slope.
    pub noise: f64,
}

impl LowestBand {
    pub fn gap(&self) -> f64 {
        self.lambda0_plus - self.r0_minus
    }
}

fn quiet_backend(potential: &PeriodicPotential) -> Backend {
    Backend::precise_for(potential)
}

fn bundle(potential: &PeriodicPotential, lambda: f64, backend: Backend) -> Result<TraceBundle> {
    if potential.is_zero() {
        return Ok(traces::free_traces(Complex64::new(lambda, 0.0)));
    }
    traces::trace_bundle(potential, Complex64::new(lambda, 0.0), backend, 1e-13)
}

fn root_in_unit_interval(potential: &PeriodicPotential, backend: Backend, pick: fn(&TraceBundle) -> f64, name: &str) -> Result<f64> {
    let (a, b) = (-1.0, 1.0);
    let fa = pick(&bundle(potential, a, backend)?);
    let fb = pick(&bundle(potential, b, backend)?);
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::RootEscape(format!("{name} has no sign change on [-1, 1]")));
    }
    let mut err = None;
    let r = solve::brent(
        |l| match bundle(potential, l, backend) {
            Ok(x) => pick(&x),
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        1e-15,
    );
    if let Some(e) = err {
        return Err(e);
    }
    r
}

/// `r₀⁻(γ)` and `λ₀⁺(γ)`: the zeros of `ρ` and `D₊` for `γV` in `[−1, 1]`.
pub fn lowest_band(potential: &PeriodicPotential, gamma: f64) -> Result<LowestBand> {
    reject_comb(potential)?;
    if gamma == 0.0 || potential.is_zero() {
        return Ok(LowestBand { gamma, r0_minus: 0.0, lambda0_plus: 0.0, noise: 0.0 });
    }
    let v = potential.scaled(gamma);
    let backend = quiet_backend(&v);
    let r0 = root_in_unit_interval(&v, backend, |b| b.rho.re, "rho")?;
    let l0 = root_in_unit_interval(&v, backend, |b| b.d_plus.re, "D+")?;
    // near λ = 0 both functions have slope about ∓1/4
    let floor = match backend {
        Backend::HighPrecision => 1e-31,
        Backend::DeltaComb => 1e-16,
        _ => 1e-13,
    };
    let noise = 4.0 * floor + 8.0 * f64::EPSILON * r0.abs().max(l0.abs());
    Ok(LowestBand { gamma, r0_minus: r0, lambda0_plus: l0, noise })
}

/// Classification results around the lowest band.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityCheck {
    pub gamma: f64,
    pub interior: Vec<(f64, u8)>,
    pub below: (f64, u8),
    pub above: (f64, u8),
}

impl MultiplicityCheck {
    pub fn interior_all_four(&self) -> bool {
        self.interior.iter().all(|p| p.1 == 4)
    }

    /// Interior four-fold, nothing below `r₀⁻`, two-fold above `λ₀⁺`.
    pub fn passes(&self) -> bool {
        self.interior_all_four() && self.below.1 == 0 && self.above.1 == 2
    }
}

pub fn lowest_band_multiplicity(potential: &PeriodicPotential, gamma: f64) -> Result<MultiplicityCheck> {
    let band = lowest_band(potential, gamma)?;
    let gap = band.gap();
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("lowest band is empty at gamma = {gamma}")));
    }
    let v = potential.scaled(gamma);
    let backend = quiet_backend(&v);
    let classify = |l: f64| -> Result<(f64, u8)> { Ok((l, classify_bundle(&bundle(&v, l, backend)?))) };
    let interior = (1..=INTERIOR_POINTS)
        .into_par_iter()
        .map(|k| classify(band.r0_minus + gap * k as f64 / (INTERIOR_POINTS + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiplicityCheck {
        gamma,
        interior,
        below: classify(band.r0_minus - gap)?,
        above: classify(band.lambda0_plus + gap)?,
    })
}

/// One `γ` of the sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapRow {
    pub gamma: f64,
    pub r0_minus: f64,
    pub lambda0_plus: f64,
    pub gap: f64,
    pub predicted_leading: f64,
    pub noise: f64,
}

/// Log–log slope of the gap over the best-populated `γ`-decade with a resolvable gap.
#[derive(Debug, Clone, Serialize)]
pub struct GapLaw {
    pub rows: Vec<GapRow>,
    pub slope: Option<f64>,
    /// `[γ_lo, γ_hi]` of the points used in the fit.
    pub decade: Option<(f64, f64)>,
    /// Points with `gap > 10³ × noise`.
    pub resolvable: usize,
}

pub fn gap_law(potential: &PeriodicPotential, gammas: &[f64]) -> Result<GapLaw> {
    let k = constants(potential)?;
    let rows = gammas
        .par_iter()
        .map(|&g| {
            let b = lowest_band(potential, g)?;
            Ok(GapRow {
                gamma: g,
                r0_minus: b.r0_minus,
                lambda0_plus: b.lambda0_plus,
                gap: b.gap(),
                predicted_leading: k.leading_endpoint(g),
                noise: b.noise,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut good: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gamma > 0.0 && r.gap > 1e3 * r.noise)
        .map(|r| (r.gamma, r.gap))
        .collect();
    good.sort_by(|a, b| a.0.total_cmp(&b.0));
    let resolvable = good.len();
    // the decade [g, 10g] holding the most points, the smallest g on ties
    let mut best: Option<(usize, usize)> = None;
    for i in 0..good.len() {
        let j = good.iter().rposition(|p| p.0 <= 10.0 * good[i].0 * (1.0 + 1e-12)).unwrap();
        let count = j + 1 - i;
        if best.map_or(true, |(bi, bj)| count > bj + 1 - bi) {
            best = Some((i, j));
        }
    }
    let (slope, decade) = match best {
        Some((i, j)) if j > i => {
            let pts = &good[i..=j];
            let n = pts.len() as f64;
            let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            (Some(sxy / sxx), Some((pts[0].0, pts[pts.len() - 1].0)))
        }
        _ => (None, None),
    };
    Ok(GapLaw { rows, slope, decade, resolvable })
}
