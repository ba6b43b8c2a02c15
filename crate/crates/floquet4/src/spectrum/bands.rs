//! Band and gap structure on a real interval.
//!
//! The multiplicity of a real `λ` changes only where `D₊`, `D₋` or `ρ` changes sign, so the real
//! zeros of those three functions are the only candidate band edges. Each interval between
//! consecutive candidates is classified once with the quiet backend; the coarse grid then
//! cross-checks the classification and flags any edge the zero search missed.

use num_complex::Complex64;
use serde::Serialize;

use super::{SpectralFunction, SpectralSolver};
use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::solve;
use crate::traces::{branches, TraceBundle};

const MAX_DEPTH: usize = 40;

/// Samples per band in the monotonicity check.
const MONOTONE_SAMPLES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapKind {
    /// Both branches real outside `[−1, 1]`; the edges are periodic or anti-periodic eigenvalues.
    Stable,
    /// `ρ < 0` somewhere inside: the branches are a complex conjugate pair there.
    Resonance,
}

/// What a band or gap edge is a zero of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Periodic,
    Antiperiodic,
    Resonance,
    /// The end of the scanned range.
    RangeEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// 2 or 4.
    pub multiplicity: u8,
    /// Whether every interior branch is strictly monotone between closed gaps; `None` if not checked.
    pub monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub kind: GapKind,
    pub lower: Endpoint,
    pub upper: Endpoint,
}

/// Bands and gaps partitioning `[lo, hi]`, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStructure {
    pub lo: f64,
    pub hi: f64,
    pub bands: Vec<Band>,
    pub gaps: Vec<Gap>,
    /// Double zeros of `D±` inside a band: gaps of length zero.
    pub closed_gaps: Vec<f64>,
}

impl BandStructure {
    /// Multiplicity at `λ` read off the structure (edges belong to the band).
    pub fn multiplicity_at(&self, lambda: f64) -> Option<u8> {
        if let Some(b) = self.bands.iter().find(|b| b.lo <= lambda && lambda <= b.hi) {
            return Some(b.multiplicity);
        }
        self.gaps.iter().any(|g| g.lo < lambda && lambda < g.hi).then_some(0)
    }
}

/// Spectral multiplicity at a real point from the signs of `ρ`, `D₊`, `D₋` and `T₁ ∓ 1`.
///
/// With `Δ₁,₂ = T₁ ± √ρ`, `D₊ = (Δ₁ − 1)(Δ₂ − 1)` and `D₋ = (Δ₁ + 1)(Δ₂ + 1)`, so the number of
/// branches below `1` and above `−1` follows from signs alone, without forming `√ρ`.
pub fn classify_bundle(b: &TraceBundle) -> u8 {
    if b.rho.re < 0.0 {
        return 0;
    }
    let (unit, _) = b.units();
    let t1 = b.t1.re;
    let below_one = if b.d_plus.re < 0.0 { 1 } else if t1 < unit { 2 } else { 0 };
    let above_minus_one = if b.d_minus.re < 0.0 { 1 } else if t1 > -unit { 2 } else { 0 };
    match (below_one, above_minus_one) {
        (2, 2) => 4,
        (2, 1) | (1, 2) => 2,
        _ => 0,
    }
}

/// Multiplicity 0, 2 or 4 of `λ` in the spectrum, using the quietest backend for `V`.
pub fn classify_point(potential: &PeriodicPotential, lambda: f64) -> Result<u8> {
    let solver = SpectralSolver::new(potential);
    Ok(classify_bundle(&solver.bundle(Complex64::new(lambda, 0.0), true)?))
}

/// Band structure of `V` on `[lo, hi]`; `grid` is the coarse density per unit of `|λ|^{1/4}`.
pub fn band_scan(potential: &PeriodicPotential, lo: f64, hi: f64, grid: f64, tol: f64) -> Result<BandStructure> {
    scan_with(&SpectralSolver::new(potential).with_grid(grid).with_tol(tol), lo, hi)
}

#[derive(Debug, Clone, Copy)]
struct Breakpoint {
    lambda: f64,
    label: Endpoint,
    /// Double zero of `D±`.
    closed: bool,
}

pub(super) fn scan_with(solver: &SpectralSolver, lo: f64, hi: f64) -> Result<BandStructure> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("band scan needs a finite range lo < hi (got [{lo}, {hi}])")));
    }
    let fs = [SpectralFunction::DPlus, SpectralFunction::DMinus, SpectralFunction::Rho];
    let labels = [Endpoint::Periodic, Endpoint::Antiperiodic, Endpoint::Resonance];
    let (scan, zeros) = solver.real_axis(&fs, lo, hi)?;
    let mut points: Vec<Breakpoint> = Vec::new();
    for (k, list) in zeros.iter().enumerate() {
        for &(lambda, double) in list {
            points.push(Breakpoint { lambda, label: labels[k], closed: double && k < 2 });
        }
    }

    let fine = |l: f64| solver.bundle(Complex64::new(l, 0.0), true);
    let nodes: Vec<(f64, u8)> = scan.bundles.iter().map(|b| (b.lambda.re, classify_bundle(b))).collect();

    let mut pieces = Vec::new();
    for _ in 0..MAX_DEPTH {
        let edges = edges(lo, hi, &mut points);
        pieces.clear();
        let mut missed = None;
        for w in edges.windows(2) {
            let (a, b) = (w[0].lambda, w[1].lambda);
            let mid = 0.5 * (a + b);
            let bm = fine(mid)?;
            let m = classify_bundle(&bm);
            pieces.push((a, b, m, bm.rho.re < 0.0));
            let margin = 1e-9 * (b - a);
            for &(l, c) in nodes.iter().filter(|n| n.0 > a + margin && n.0 < b - margin) {
                if c == m {
                    continue;
                }
                let bl = fine(l)?;
                if classify_bundle(&bl) != m {
                    missed = Some((mid, bm, l, bl));
                    break;
                }
            }
            if missed.is_some() {
                break;
            }
        }
        match missed {
            None => return Ok(assemble(solver, lo, hi, &edges, &pieces)?),
            Some((a, ba, b, bb)) => points.push(locate_missed(solver, a, &ba, b, &bb)?),
        }
    }
    Err(Error::Unresolved(0.5 * (lo + hi)))
}

/// Sorted edges including the range ends; coincident zeros keep the `D±` label.
fn edges(lo: f64, hi: f64, points: &mut [Breakpoint]) -> Vec<Breakpoint> {
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut out = vec![Breakpoint { lambda: lo, label: Endpoint::RangeEnd, closed: false }];
    for &p in points.iter() {
        if p.lambda <= lo || p.lambda >= hi {
            continue;
        }
        let last = out.last_mut().unwrap();
        let close = (p.lambda - last.lambda).abs() <= 1e-12 * p.lambda.abs().max(1.0);
        if close && last.label != Endpoint::RangeEnd {
            if last.label == Endpoint::Resonance {
                last.label = p.label;
            }
            last.closed |= p.closed;
            continue;
        }
        out.push(p);
    }
    out.push(Breakpoint { lambda: hi, label: Endpoint::RangeEnd, closed: false });
    out
}

/// Find the zero responsible for a classification change between `a` and `b`.
fn locate_missed(solver: &SpectralSolver, a: f64, ba: &TraceBundle, b: f64, bb: &TraceBundle) -> Result<Breakpoint> {
    let fs = [
        (SpectralFunction::DPlus, Endpoint::Periodic),
        (SpectralFunction::DMinus, Endpoint::Antiperiodic),
        (SpectralFunction::Rho, Endpoint::Resonance),
    ];
    for (f, label) in fs {
        let (fa, fb) = (f.normalized(ba).re, f.normalized(bb).re);
        if (fa < 0.0) == (fb < 0.0) {
            continue;
        }
        let mut err = None;
        let root = solve::brent(
            |l| match solver.bundle(Complex64::new(l, 0.0), true) {
                Ok(x) => f.normalized(&x).re,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            a.min(b),
            a.max(b),
            1e-15,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if let Ok(lambda) = root {
            return Ok(Breakpoint { lambda, label, closed: false });
        }
    }
    Err(Error::Unresolved(0.5 * (a + b)))
}

fn assemble(
    solver: &SpectralSolver,
    lo: f64,
    hi: f64,
    edges: &[Breakpoint],
    pieces: &[(f64, f64, u8, bool)],
) -> Result<BandStructure> {
    // merge neighbours with equal multiplicity; a D± double zero between two band pieces is a closed gap
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut closed_gaps = Vec::new();
    let mut start = 0;
    for i in 1..=pieces.len() {
        if i < pieces.len() && pieces[i].2 == pieces[start].2 {
            if pieces[i].2 > 0 && edges[i].closed {
                closed_gaps.push(edges[i].lambda);
            }
            continue;
        }
        runs.push((start, i));
        start = i;
    }

    let mut bands = Vec::new();
    let mut gaps = Vec::new();
    for &(s, e) in &runs {
        let (a, b) = (edges[s].lambda, edges[e].lambda);
        let m = pieces[s].2;
        if m == 0 {
            let resonance = pieces[s..e].iter().any(|p| p.3);
            gaps.push(Gap {
                lo: a,
                hi: b,
                kind: if resonance { GapKind::Resonance } else { GapKind::Stable },
                lower: edges[s].label,
                upper: edges[e].label,
            });
        } else {
            let splits: Vec<f64> = closed_gaps.iter().copied().filter(|&c| c > a && c < b).collect();
            let monotone = monotone_band(solver, a, b, &splits)?;
            bands.push(Band { lo: a, hi: b, multiplicity: m, monotone: Some(monotone) });
        }
    }
    Ok(BandStructure { lo, hi, bands, gaps, closed_gaps })
}

/// Sampled sign-constancy of the derivative of every branch lying in `(−1, 1)`.
fn monotone_band(solver: &SpectralSolver, a: f64, b: f64, splits: &[f64]) -> Result<bool> {
    let mut cuts = vec![a];
    cuts.extend_from_slice(splits);
    cuts.push(b);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut values: Vec<[Option<f64>; 2]> = Vec::with_capacity(MONOTONE_SAMPLES);
        for k in 1..=MONOTONE_SAMPLES {
            let l = lo + (hi - lo) * k as f64 / (MONOTONE_SAMPLES + 1) as f64;
            let bundle = solver.bundle(Complex64::new(l, 0.0), true)?;
            let (d1, d2) = branches(&bundle);
            let f = bundle.scale_exponent.exp();
            let inner = |d: Complex64| {
                let v = d.re * f;
                (d.im == 0.0 && v.abs() < 1.0).then_some(v)
            };
            values.push([inner(d1), inner(d2)]);
        }
        for branch in 0..2 {
            let mut sign = 0.0;
            for pair in values.windows(2) {
                let (Some(u), Some(v)) = (pair[0][branch], pair[1][branch]) else { continue };
                let s = (v - u).signum();
                if v == u || (sign != 0.0 && s != sign) {
                    return Ok(false);
                }
                sign = s;
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traces::free_traces;

    #[test]
    fn free_classification() {
        assert_eq!(classify_bundle(&free_traces(Complex64::new(5.0, 0.0))), 2);
        assert_eq!(classify_bundle(&free_traces(Complex64::new(-5.0, 0.0))), 0);
        assert_eq!(classify_bundle(&free_traces(Complex64::new(1e4, 0.0))), 2);
    }

    #[test]
    fn free_band_structure() {
        let v = PeriodicPotential::zero();
        let s = band_scan(&v, -10.0, 500.0, 64.0, 1e-10).unwrap();
        assert_eq!(s.bands.len(), 1, "{s:?}");
        assert_eq!(s.bands[0].multiplicity, 2);
        assert!(s.bands[0].lo.abs() < 1e-12);
        assert_eq!(s.gaps.len(), 1);
        assert_eq!(s.gaps[0].kind, GapKind::Resonance);
        assert_eq!(s.gaps[0].upper, Endpoint::Periodic);
        assert_eq!(s.closed_gaps.len(), 1);
        assert!((s.closed_gaps[0] - std::f64::consts::PI.powi(4)).abs() < 1e-9);
        assert_eq!(s.bands[0].monotone, Some(true));
    }
}
