//! Periodic and anti-periodic eigenvalues, resonances and the real band structure.
//!
//! Zeros of `D₊`, `D₋` and `ρ` are searched inside the localization regions: one large disk
//! `|λ|^{1/4} < R` holding the low-lying zeros, and small disks around each unperturbed double
//! zero beyond it. Each region's winding number is compared with the roots actually found.
//!
//! On the real axis the search runs in `w = sign(λ)|λ|^{1/4}`, where the oscillation has unit
//! period. A coarse backend samples a grid; every sign change and every local minimum of `|f|`
//! is then refined with the quietest backend available. A minimum that fails to reach zero by
//! more than the noise floor is either no root (for `D±`, whose zeros are real) or, for `ρ`, the
//! trace of a complex pair, which Newton's method then locates.

mod bands;
mod contour;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::Backend;
use crate::potential::PeriodicPotential;
use crate::quartic_basis::principal_quartic_root;
use crate::solve;
use crate::traces::{self, TraceBundle};

pub use bands::{band_scan, classify_bundle, classify_point, Band, BandStructure, Endpoint, Gap, GapKind};
pub use contour::{count_zeros, Contour, ZERO_RATIO};

/// Grid points per unit of `w = |λ|^{1/4}` in real-axis scans.
pub const DEFAULT_GRID: f64 = 64.0;

/// Default residual tolerance, relative to the natural size of the function.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The entire functions whose zeros are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFunction {
    /// `D₊ = (T₁ − 1)² − ρ`; zeros are periodic eigenvalues.
    DPlus,
    /// `D₋ = (T₁ + 1)² − ρ`; zeros are anti-periodic eigenvalues.
    DMinus,
    /// `ρ = (T₂ + 1)/2 − T₁²`; zeros are resonances.
    Rho,
    /// `ρ` rebuilt pointwise from `D±` alone: `T₁ = (D₋ − D₊)/4`, `ρ = (T₁ − 1)² − D₊`.
    RecoveredRho,
}

impl SpectralFunction {
    /// `log` of the size `f` has away from its zeros: `e^{x+|y|}` for `D±`, `e^{2x}` for `ρ`.
    fn envelope(self, lambda: Complex64) -> f64 {
        let r = principal_quartic_root(lambda);
        match self {
            SpectralFunction::DPlus | SpectralFunction::DMinus => r.x + r.y.abs(),
            SpectralFunction::Rho | SpectralFunction::RecoveredRho => 2.0 * r.x,
        }
    }

    /// The stored value, carrying the bundle's `e^{−2s}` offset.
    fn stored(self, b: &TraceBundle) -> Complex64 {
        match self {
            SpectralFunction::DPlus => b.d_plus,
            SpectralFunction::DMinus => b.d_minus,
            SpectralFunction::Rho => b.rho,
            SpectralFunction::RecoveredRho => b.rho_recovered,
        }
    }

    /// `f(λ)·e^{−envelope}`, of order one away from the zeros.
    pub fn normalized(self, b: &TraceBundle) -> Complex64 {
        self.stored(b) * (2.0 * b.scale_exponent - self.envelope(b.lambda)).exp()
    }

    fn is_rho(self) -> bool {
        matches!(self, SpectralFunction::Rho | SpectralFunction::RecoveredRho)
    }
}

/// `−` or `+` in the labels `λₙ±`, `rₙ±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

/// A real zero with its label. Double zeros appear twice, both flagged `coincident`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledRoot {
    pub n: usize,
    pub sign: Sign,
    pub lambda: f64,
    pub coincident: bool,
    /// `|f|` at the root, relative to the natural size of `f`.
    pub residual: f64,
}

/// A non-real resonance `rₙ⁺ ∈ ℂ₊` and its conjugate `rₙ⁻`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPair {
    pub n: usize,
    pub upper: Complex64,
    pub residual: f64,
}

impl ComplexPair {
    pub fn lower(&self) -> Complex64 {
        self.upper.conj()
    }
}

/// Argument-principle count for one localization region.
#[derive(Debug, Clone, Serialize)]
pub struct RegionCount {
    pub function: SpectralFunction,
    /// 0 for the central disk, otherwise the index `n` of the small disk.
    pub index: usize,
    pub contour: Contour,
    /// Count stated by the localization lemma.
    pub expected: usize,
    /// Winding number of `f` along the contour.
    pub winding: usize,
    /// Roots found inside, with multiplicity.
    pub found: usize,
}

/// Periodic zeros `λ₀⁺ ≤ λ₂⁻ ≤ λ₂⁺ ≤ …` and anti-periodic zeros `λ₁⁻ ≤ λ₁⁺ ≤ λ₃⁻ ≤ …`.
#[derive(Debug, Clone)]
pub struct EigenvalueList {
    pub periodic: Vec<LabeledRoot>,
    pub antiperiodic: Vec<LabeledRoot>,
    pub regions: Vec<RegionCount>,
}

impl EigenvalueList {
    /// `λₙ±`, if it was computed.
    pub fn get(&self, n: usize, sign: Sign) -> Option<f64> {
        let list = if n % 2 == 0 { &self.periodic } else { &self.antiperiodic };
        list.iter().find(|r| r.n == n && r.sign == sign).map(|r| r.lambda)
    }

    /// `(λₙ⁻, λₙ⁺)` for `n ≥ 1`.
    pub fn pair(&self, n: usize) -> Option<(f64, f64)> {
        Some((self.get(n, Sign::Minus)?, self.get(n, Sign::Plus)?))
    }

    /// Both lists merged in increasing order.
    pub fn interleaved(&self) -> Vec<LabeledRoot> {
        let mut all: Vec<LabeledRoot> = self.periodic.iter().chain(&self.antiperiodic).copied().collect();
        all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        all
    }

    pub fn max_residual(&self) -> f64 {
        self.periodic.iter().chain(&self.antiperiodic).map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Real resonances `r₀⁻ > r₁⁺ ≥ r₁⁻ > …` and non-real conjugate pairs.
#[derive(Debug, Clone)]
pub struct ResonanceList {
    pub real: Vec<LabeledRoot>,
    pub complex: Vec<ComplexPair>,
    pub regions: Vec<RegionCount>,
}

impl ResonanceList {
    /// The maximal real zero of `ρ`.
    pub fn r0_minus(&self) -> Option<f64> {
        self.real.iter().find(|r| r.n == 0).map(|r| r.lambda)
    }

    /// `(rₙ⁺, rₙ⁻)`: for a real pair `rₙ⁺ ≥ rₙ⁻`; for a complex pair `rₙ⁺ ∈ ℂ₊`.
    pub fn pair(&self, n: usize) -> Option<(Complex64, Complex64)> {
        if let Some(p) = self.complex.iter().find(|p| p.n == n) {
            return Some((p.upper, p.lower()));
        }
        let find = |s| self.real.iter().find(|r| r.n == n && r.sign == s).map(|r| Complex64::new(r.lambda, 0.0));
        Some((find(Sign::Plus)?, find(Sign::Minus)?))
    }

    /// Every zero as a complex number, conjugate pairs expanded.
    pub fn all(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.real.iter().map(|r| Complex64::new(r.lambda, 0.0)).collect();
        for p in &self.complex {
            v.push(p.upper);
            v.push(p.lower());
        }
        v
    }

    pub fn max_residual(&self) -> f64 {
        self.real.iter().map(|r| r.residual).chain(self.complex.iter().map(|p| p.residual)).fold(0.0, f64::max)
    }
}

/// A zero found by the search.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Root {
    Real { lambda: f64, double: bool, residual: f64 },
    Pair { upper: Complex64, residual: f64 },
}

impl Root {
    fn multiplicity(&self) -> usize {
        match self {
            Root::Real { double: false, .. } => 1,
            _ => 2,
        }
    }

    fn inside(&self, c: &Contour) -> bool {
        match *self {
            Root::Real { lambda, .. } => c.contains(Complex64::new(lambda, 0.0)),
            Root::Pair { upper, .. } => c.contains(upper) && c.contains(upper.conj()),
        }
    }

    fn re(&self) -> f64 {
        match *self {
            Root::Real { lambda, .. } => lambda,
            Root::Pair { upper, .. } => upper.re,
        }
    }
}

fn lam(w: f64) -> f64 {
    w * w.abs().powi(3)
}

fn signed_root(l: f64) -> f64 {
    l.signum() * l.abs().sqrt().sqrt()
}

/// Result of inspecting a local minimum of `|f|` on the real axis.
enum Trough {
    Roots(Vec<f64>),
    Double(f64, f64),
    Shallow(f64),
    None,
}

/// Samples of the coarse backend over a window of `w`.
struct Scan {
    w: Vec<f64>,
    bundles: Vec<TraceBundle>,
}

/// Zero finder for one potential.
#[derive(Debug, Clone)]
pub struct SpectralSolver<'a> {
    potential: &'a PeriodicPotential,
    coarse: Backend,
    fine: Backend,
    tol: f64,
    grid: f64,
    cutoff: usize,
}

impl<'a> SpectralSolver<'a> {
    /// Coarse scans with the fastest backend, refinement with the quietest one.
    pub fn new(potential: &'a PeriodicPotential) -> Self {
        let norm = potential.mass();
        SpectralSolver {
            potential,
            coarse: Backend::default_for(potential),
            fine: Backend::precise_for(potential),
            tol: DEFAULT_TOL,
            grid: DEFAULT_GRID,
            cutoff: norm.cbrt().floor() as usize + 1,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_grid(mut self, per_unit: f64) -> Self {
        self.grid = per_unit;
        self
    }

    pub fn with_backends(mut self, coarse: Backend, fine: Backend) -> Result<Self> {
        coarse.check(self.potential)?;
        fine.check(self.potential)?;
        self.coarse = coarse;
        self.fine = fine;
        Ok(self)
    }

    /// Override the split `N` between the central disk and the small disks.
    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.cutoff = n.max(1);
        self
    }

    /// `N = ⌊‖V‖^{1/3}⌋ + 1` unless overridden.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn potential(&self) -> &PeriodicPotential {
        self.potential
    }

    pub(crate) fn bundle(&self, lambda: Complex64, fine: bool) -> Result<TraceBundle> {
        if self.potential.is_zero() {
            return Ok(traces::free_traces(lambda));
        }
        let backend = if fine { self.fine } else { self.coarse };
        traces::trace_bundle(self.potential, lambda, backend, traces::DEFAULT_TOL)
    }

    fn value(&self, f: SpectralFunction, w: f64) -> Result<f64> {
        Ok(f.normalized(&self.bundle(Complex64::new(lam(w), 0.0), true)?).re)
    }

    /// Normalized size below which a computed value of `f` near `λ(w)` is indistinguishable from zero.
    ///
    /// `D±` on the positive axis is of size `e^{x}` but assembled from terms of size `e^{2x}`, so its
    /// relative noise grows like `e^{x}` there.
    fn noise_floor(&self, f: SpectralFunction, w: f64) -> f64 {
        if self.potential.is_zero() {
            return 1e-14;
        }
        let growth = if f.is_rho() || w <= 0.0 { 1.0 } else { w.exp() };
        match self.fine {
            Backend::HighPrecision => (1e-25f64).max(1e-31 * growth),
            Backend::DeltaComb => (1e-13f64).max(1e-16 * growth),
            Backend::Ode | Backend::Series => (1e-10f64).max(1e-13 * growth),
        }
    }

    /// Roots closer than this fraction of the local disk size are merged.
    fn merge_fraction(&self) -> f64 {
        if self.potential.is_zero() || self.fine == Backend::HighPrecision {
            1e-12
        } else {
            1e-6
        }
    }

    /// Localization regions of `f` up to eigenvalue (or resonance) index `n_max`.
    pub fn regions(&self, f: SpectralFunction, n_max: usize) -> Vec<(usize, Contour, usize)> {
        let n = self.cutoff;
        let nf = n as f64;
        let mut out = Vec::new();
        match f {
            SpectralFunction::DPlus => {
                out.push((0, Contour::quartic_radius(2.0 * PI * (nf + 0.5)), 2 * n + 1));
                for m in (n + 1)..=(n_max / 2) {
                    out.push((2 * m, Contour::z_disk(Complex64::new(2.0 * PI * m as f64, 0.0), PI / 2.0), 2));
                }
            }
            SpectralFunction::DMinus => {
                out.push((0, Contour::quartic_radius(2.0 * PI * nf), 2 * n));
                let mut m = n;
                while 2 * m + 1 <= n_max {
                    out.push((2 * m + 1, Contour::z_disk(Complex64::new(PI * (2 * m + 1) as f64, 0.0), PI / 2.0), 2));
                    m += 1;
                }
            }
            SpectralFunction::Rho | SpectralFunction::RecoveredRho => {
                out.push((0, Contour::lambda_circle(Complex64::new(0.0, 0.0), 4.0 * (PI * (nf + 0.5)).powi(4)), 2 * n + 1));
                for m in (n + 1)..=n_max {
                    let c = Complex64::new(PI * m as f64, PI * m as f64);
                    out.push((m, Contour::z_disk(c, PI / 4.0), 2));
                }
            }
        }
        out
    }

    /// Winding number of `f` along a contour, evaluated with the coarse backend.
    pub fn winding(&self, f: SpectralFunction, contour: &Contour) -> Result<usize> {
        count_zeros(|l| Ok(f.normalized(&self.bundle(l, false)?)), contour)
    }

    fn scan(&self, lo: f64, hi: f64, density: f64) -> Result<Scan> {
        let cells = ((hi - lo) * density).ceil().max(2.0) as usize;
        let w: Vec<f64> = (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect();
        let bundles = w
            .par_iter()
            .map(|&w| self.bundle(Complex64::new(lam(w), 0.0), false))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scan { w, bundles })
    }

    /// All zeros of `f` on `[lo, hi]` (in `w`), plus complex pairs traced from shallow minima of `ρ`.
    fn search_window(&self, f: SpectralFunction, lo: f64, hi: f64, density: f64) -> Result<Vec<Root>> {
        let scan = self.scan(lo, hi, density)?;
        self.search_scan(f, &scan, lo, hi)
    }

    fn search_scan(&self, f: SpectralFunction, scan: &Scan, lo: f64, hi: f64) -> Result<Vec<Root>> {
        let idx: Vec<usize> = (0..scan.w.len()).filter(|&i| scan.w[i] >= lo && scan.w[i] <= hi).collect();
        if idx.len() < 2 {
            return Ok(Vec::new());
        }
        let w: Vec<f64> = idx.iter().map(|&i| scan.w[i]).collect();
        let c: Vec<f64> = idx.iter().map(|&i| f.normalized(&scan.bundles[i]).re).collect();
        let positive = |v: f64| v >= 0.0;
        let sign_cell: Vec<bool> = (0..w.len() - 1).map(|i| positive(c[i]) != positive(c[i + 1])).collect();

        enum Candidate {
            Cell(usize),
            Trough(usize),
        }
        let mut cands = Vec::new();
        for i in 0..w.len() - 1 {
            if sign_cell[i] {
                cands.push(Candidate::Cell(i));
            }
        }
        for i in 1..w.len() - 1 {
            let a = c[i].abs();
            let is_min = a <= c[i - 1].abs() && a <= c[i + 1].abs() && (a < c[i - 1].abs() || a < c[i + 1].abs());
            if is_min && !sign_cell[i - 1] && !sign_cell[i] {
                cands.push(Candidate::Trough(i));
            }
        }

        let results: Vec<Result<Vec<Root>>> = cands
            .par_iter()
            .map(|cand| match *cand {
                Candidate::Cell(i) => self.refine_cell(f, w[i], w[i + 1]),
                Candidate::Trough(i) => self.refine_trough(f, w[i - 1], w[i], w[i + 1]),
            })
            .collect();
        let mut roots = Vec::new();
        for r in results {
            roots.extend(r?);
        }
        let roots = self.merge(roots);
        self.fuse_noise_crossings(f, roots)
    }

    /// Two neighbouring simple roots between which `|f|` never rises above the noise floor are
    /// rounding crossings of one double root.
    fn fuse_noise_crossings(&self, f: SpectralFunction, roots: Vec<Root>) -> Result<Vec<Root>> {
        let mut out: Vec<Root> = Vec::with_capacity(roots.len());
        for r in roots {
            if let (Some(Root::Real { lambda: a, double: false, residual: ra }), Root::Real { lambda: b, double: false, residual: rb }) =
                (out.last().copied(), r)
            {
                let (wa, wb) = (signed_root(a), signed_root(b));
                if wb - wa < 0.25 {
                    let s = self.value(f, 0.5 * (wa + wb))?.signum();
                    let mut err = None;
                    let (wm, hm) = solve::minimize(
                        |w| match self.value(f, w) {
                            Ok(v) => -s * v,
                            Err(e) => {
                                err.get_or_insert(e);
                                f64::INFINITY
                            }
                        },
                        wa,
                        wb,
                    );
                    if let Some(e) = err {
                        return Err(e);
                    }
                    if -hm <= self.noise_floor(f, wm) {
                        *out.last_mut().unwrap() = Root::Real { lambda: lam(wm), double: true, residual: ra.max(rb).max(-hm) };
                        continue;
                    }
                }
            }
            out.push(r);
        }
        Ok(out)
    }

    fn refine_cell(&self, f: SpectralFunction, a: f64, b: f64) -> Result<Vec<Root>> {
        let fa = self.value(f, a)?;
        let fb = self.value(f, b)?;
        if (fa >= 0.0) != (fb >= 0.0) || fa == 0.0 {
            let w = self.brent(f, a, b)?;
            return Ok(vec![self.real_root(f, w, false)?]);
        }
        // the coarse sign change was noise: treat the cell as a trough
        self.refine_trough(f, a, 0.5 * (a + b), b)
    }

    fn brent(&self, f: SpectralFunction, a: f64, b: f64) -> Result<f64> {
        let mut err = None;
        let w = solve::brent(
            |w| match self.value(f, w) {
                Ok(v) => v,
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
        w
    }

    fn real_root(&self, f: SpectralFunction, w: f64, double: bool) -> Result<Root> {
        let residual = self.value(f, w)?.abs();
        Ok(Root::Real { lambda: lam(w), double, residual })
    }

    fn inspect_trough(&self, f: SpectralFunction, a: f64, m: f64, b: f64) -> Result<Trough> {
        let fm = self.value(f, m)?;
        if fm == 0.0 {
            return Ok(Trough::Double(m, 0.0));
        }
        let s = fm.signum();
        let mut err = None;
        let (wmin, hmin) = solve::minimize(
            |w| match self.value(f, w) {
                Ok(v) => s * v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            },
            a,
            b,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if hmin < 0.0 {
            let mut roots = Vec::new();
            for (lo, hi) in [(a, wmin), (wmin, b)] {
                if s * self.value(f, lo.min(hi))? > 0.0 || s * self.value(f, lo.max(hi))? > 0.0 {
                    roots.push(self.brent(f, lo, hi)?);
                }
            }
            return Ok(Trough::Roots(roots));
        }
        if hmin <= self.noise_floor(f, wmin) {
            return Ok(Trough::Double(wmin, hmin));
        }
        let interior = wmin > a + 1e-9 * (b - a) && wmin < b - 1e-9 * (b - a);
        Ok(if interior { Trough::Shallow(wmin) } else { Trough::None })
    }

    fn refine_trough(&self, f: SpectralFunction, a: f64, m: f64, b: f64) -> Result<Vec<Root>> {
        match self.inspect_trough(f, a, m, b)? {
            Trough::Roots(ws) => ws.into_iter().map(|w| self.real_root(f, w, false)).collect(),
            Trough::Double(w, depth) => Ok(vec![Root::Real { lambda: lam(w), double: true, residual: depth }]),
            Trough::Shallow(w) if f.is_rho() => Ok(self.complex_pair(f, w, b - a)?.into_iter().collect()),
            _ => Ok(Vec::new()),
        }
    }

    /// Newton's method for a conjugate pair whose real part is near `λ(w)`.
    fn complex_pair(&self, f: SpectralFunction, w: f64, width: f64) -> Result<Option<Root>> {
        let l0 = lam(w);
        let env0 = f.envelope(Complex64::new(l0, 0.0));
        // `f·e^{−env0}` with a fixed factor stays analytic in `λ`
        let eval = |l: Complex64| -> Result<Complex64> {
            let b = self.bundle(l, true)?;
            Ok(f.stored(&b) * (2.0 * b.scale_exponent - env0).exp())
        };
        let dl = 4.0 * w.abs().powi(3).max(1.0) * width / 8.0;
        let f0 = eval(Complex64::new(l0, 0.0))?.re;
        let fp = eval(Complex64::new(l0 + dl, 0.0))?.re;
        let fm = eval(Complex64::new(l0 - dl, 0.0))?.re;
        let f2 = (fp - 2.0 * f0 + fm) / (dl * dl);
        let b2 = 2.0 * f0 / f2;
        if !(b2 > 0.0) {
            return Ok(None);
        }
        let mut z = Complex64::new(l0, b2.sqrt());
        let mut converged = false;
        for _ in 0..60 {
            let h = 1e-4 * z.im.abs().max(1e-12 * z.norm());
            let fz = eval(z)?;
            let d = (eval(z + h)? - eval(z - h)?) / (2.0 * h);
            let step = fz / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            z -= step;
            if step.norm() <= 1e-14 * z.norm() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(None);
        }
        // a real limit is a root the real search already owns; a distant one belongs to another trough
        if z.im.abs() <= 1e-10 * z.norm().max(1.0) || (z.re - l0).abs() > 16.0 * dl {
            return Ok(None);
        }
        let upper = if z.im > 0.0 { z } else { z.conj() };
        let residual = f.normalized(&self.bundle(upper, true)?).norm();
        Ok(Some(Root::Pair { upper, residual }))
    }

    /// Sort, and fuse real roots that lie closer than the merge distance.
    fn merge(&self, mut roots: Vec<Root>) -> Vec<Root> {
        roots.sort_by(|a, b| a.re().total_cmp(&b.re()));
        let mut out: Vec<Root> = Vec::with_capacity(roots.len());
        for r in roots {
            if let (Some(Root::Real { lambda: a, double: false, residual: ra }), Root::Real { lambda: b, double: false, residual: rb }) =
                (out.last().copied(), r)
            {
                let scale = 2.0 * PI * signed_root(b).abs().max(1.0).powi(3);
                if (b - a).abs() <= self.merge_fraction() * scale {
                    *out.last_mut().unwrap() = Root::Real { lambda: 0.5 * (a + b), double: true, residual: ra.max(rb) };
                    continue;
                }
            }
            out.push(r);
        }
        out
    }

    /// Roots of each function inside its regions, with per-region counts; one shared scan.
    fn analyse(&self, functions: &[SpectralFunction], n_max: usize) -> Result<Vec<(Vec<Root>, Vec<RegionCount>)>> {
        let mut windows: Vec<(f64, f64)> = Vec::new();
        let plans: Vec<Vec<(usize, Contour, usize)>> = functions.iter().map(|&f| self.regions(f, n_max)).collect();
        for plan in &plans {
            windows.extend(plan.iter().filter_map(|(_, c, _)| c.real_window()));
        }
        let merged = merge_intervals(windows);
        let scans = merged.iter().map(|&(lo, hi)| self.scan(lo, hi, self.grid)).collect::<Result<Vec<_>>>()?;

        let mut out = Vec::new();
        for (&f, plan) in functions.iter().zip(&plans) {
            let windings = plan
                .par_iter()
                .map(|(_, c, _)| self.winding(f, c))
                .collect::<Result<Vec<_>>>()?;
            let mut all_roots = Vec::new();
            let mut counts = Vec::new();
            for ((index, contour, expected), winding) in plan.iter().zip(windings) {
                let Some((lo, hi)) = contour.real_window() else { continue };
                let k = merged.iter().position(|&(a, b)| a <= lo && hi <= b).expect("window covered by scan");
                let mut roots: Vec<Root> = self.search_scan(f, &scans[k], lo, hi)?.into_iter().filter(|r| r.inside(contour)).collect();
                let mut found: usize = roots.iter().map(Root::multiplicity).sum();
                let mut density = self.grid;
                while found != winding && density < 16.0 * self.grid {
                    density *= 4.0;
                    roots = self.search_window(f, lo, hi, density)?.into_iter().filter(|r| r.inside(contour)).collect();
                    found = roots.iter().map(Root::multiplicity).sum();
                }
                if found != winding {
                    return Err(Error::CountMismatch { region: region_name(f, *index), expected: winding, found });
                }
                counts.push(RegionCount { function: f, index: *index, contour: *contour, expected: *expected, winding, found });
                all_roots.extend(roots);
            }
            all_roots.sort_by(|a, b| a.re().total_cmp(&b.re()));
            out.push((all_roots, counts));
        }
        Ok(out)
    }

    pub fn periodic_eigenvalues(&self, n_max: usize) -> Result<EigenvalueList> {
        let mut r = self.analyse(&[SpectralFunction::DPlus], n_max.max(1))?;
        let (roots, regions) = r.remove(0);
        Ok(EigenvalueList { periodic: label_eigenvalues(&roots, true), antiperiodic: Vec::new(), regions })
    }

    pub fn antiperiodic_eigenvalues(&self, n_max: usize) -> Result<EigenvalueList> {
        let mut r = self.analyse(&[SpectralFunction::DMinus], n_max.max(1))?;
        let (roots, regions) = r.remove(0);
        Ok(EigenvalueList { periodic: Vec::new(), antiperiodic: label_eigenvalues(&roots, false), regions })
    }

    /// Both eigenvalue lists from one scan.
    pub fn eigenvalues(&self, n_max: usize) -> Result<EigenvalueList> {
        let r = self.analyse(&[SpectralFunction::DPlus, SpectralFunction::DMinus], n_max.max(1))?;
        let mut regions = r[0].1.clone();
        regions.extend(r[1].1.iter().cloned());
        Ok(EigenvalueList {
            periodic: label_eigenvalues(&r[0].0, true),
            antiperiodic: label_eigenvalues(&r[1].0, false),
            regions,
        })
    }

    pub fn resonances(&self, n_max: usize) -> Result<ResonanceList> {
        self.resonances_of(SpectralFunction::Rho, n_max)
    }

    /// Resonances from `ρ` rebuilt out of `D±` values alone.
    pub fn recovered_resonances(&self, n_max: usize) -> Result<ResonanceList> {
        self.resonances_of(SpectralFunction::RecoveredRho, n_max)
    }

    fn resonances_of(&self, f: SpectralFunction, n_max: usize) -> Result<ResonanceList> {
        let mut r = self.analyse(&[f], n_max.max(1))?;
        let (roots, regions) = r.remove(0);
        let (real, complex) = label_resonances(&roots);
        Ok(ResonanceList { real, complex, regions })
    }

    /// Eigenvalues, resonances and (optionally) the band structure on a real range.
    pub fn report(&self, n_max: usize, range: Option<(f64, f64)>) -> Result<SpectralReport> {
        let fs = [SpectralFunction::DPlus, SpectralFunction::DMinus, SpectralFunction::Rho];
        let r = self.analyse(&fs, n_max.max(1))?;
        let eig = EigenvalueList {
            periodic: label_eigenvalues(&r[0].0, true),
            antiperiodic: label_eigenvalues(&r[1].0, false),
            regions: Vec::new(),
        };
        let (real, complex) = label_resonances(&r[2].0);
        let res = ResonanceList { real, complex, regions: Vec::new() };
        let bands = match range {
            Some((lo, hi)) => Some(bands::scan_with(self, lo, hi)?),
            None => None,
        };
        let regions = r.into_iter().flat_map(|(_, c)| c).collect();
        Ok(SpectralReport::new(&eig, &res, bands.as_ref(), regions))
    }

    /// Real zeros of each `f` on `[lo, hi]` in `λ`, from one shared scan, without region bookkeeping.
    fn real_axis(&self, fs: &[SpectralFunction], lo: f64, hi: f64) -> Result<(Scan, Vec<Vec<(f64, bool)>>)> {
        let (wlo, whi) = (signed_root(lo), signed_root(hi));
        let scan = self.scan(wlo, whi, self.grid)?;
        let mut out = Vec::new();
        for &f in fs {
            let roots = self.search_scan(f, &scan, wlo, whi)?;
            out.push(
                roots
                    .into_iter()
                    .filter_map(|r| match r {
                        Root::Real { lambda, double, .. } if lambda >= lo && lambda <= hi => Some((lambda, double)),
                        _ => None,
                    })
                    .collect(),
            );
        }
        Ok((scan, out))
    }
}

fn region_name(f: SpectralFunction, index: usize) -> String {
    let name = match f {
        SpectralFunction::DPlus => "D+",
        SpectralFunction::DMinus => "D-",
        SpectralFunction::Rho => "rho",
        SpectralFunction::RecoveredRho => "recovered rho",
    };
    if index == 0 {
        format!("{name} central disk")
    } else {
        format!("{name} disk n = {index}")
    }
}

fn merge_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 0.5 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn expand_real(roots: &[Root]) -> Vec<(f64, bool, f64)> {
    let mut v = Vec::new();
    for r in roots {
        if let Root::Real { lambda, double, residual } = *r {
            v.push((lambda, double, residual));
            if double {
                v.push((lambda, true, residual));
            }
        }
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn label_eigenvalues(roots: &[Root], periodic: bool) -> Vec<LabeledRoot> {
    expand_real(roots)
        .into_iter()
        .enumerate()
        .map(|(k, (lambda, coincident, residual))| {
            let (n, sign) = if periodic {
                if k == 0 {
                    (0, Sign::Plus)
                } else {
                    (2 * ((k + 1) / 2), if k % 2 == 1 { Sign::Minus } else { Sign::Plus })
                }
            } else {
                (2 * (k / 2) + 1, if k % 2 == 0 { Sign::Minus } else { Sign::Plus })
            };
            LabeledRoot { n, sign, lambda, coincident, residual }
        })
        .collect()
}

fn label_resonances(roots: &[Root]) -> (Vec<LabeledRoot>, Vec<ComplexPair>) {
    let mut reals = expand_real(roots);
    reals.reverse();
    let mut real = Vec::new();
    let mut complex = Vec::new();
    if reals.is_empty() {
        return (real, complex);
    }
    let (l0, c0, r0) = reals[0];
    real.push(LabeledRoot { n: 0, sign: Sign::Minus, lambda: l0, coincident: c0, residual: r0 });

    enum Item {
        Real(f64, bool, f64),
        Pair(Complex64, f64),
    }
    let mut items: Vec<Item> = reals[1..].iter().map(|&(l, c, r)| Item::Real(l, c, r)).collect();
    for r in roots {
        if let Root::Pair { upper, residual } = *r {
            items.push(Item::Pair(upper, residual));
        }
    }
    let key = |i: &Item| match i {
        Item::Real(l, ..) => *l,
        Item::Pair(z, _) => z.re,
    };
    items.sort_by(|a, b| key(b).total_cmp(&key(a)));

    let mut n = 1;
    let mut pending: Option<(f64, bool, f64)> = None;
    for item in items {
        match item {
            Item::Real(l, c, r) => match pending.take() {
                Some((lp, cp, rp)) => {
                    real.push(LabeledRoot { n, sign: Sign::Plus, lambda: lp, coincident: cp, residual: rp });
                    real.push(LabeledRoot { n, sign: Sign::Minus, lambda: l, coincident: c, residual: r });
                    n += 1;
                }
                None => pending = Some((l, c, r)),
            },
            Item::Pair(upper, residual) => {
                if let Some((lp, cp, rp)) = pending.take() {
                    real.push(LabeledRoot { n, sign: Sign::Plus, lambda: lp, coincident: cp, residual: rp });
                    n += 1;
                }
                complex.push(ComplexPair { n, upper, residual });
                n += 1;
            }
        }
    }
    if let Some((lp, cp, rp)) = pending {
        real.push(LabeledRoot { n, sign: Sign::Plus, lambda: lp, coincident: cp, residual: rp });
    }
    (real, complex)
}

/// Periodic zeros of `D₊` with the default solver.
pub fn periodic_eigenvalues(potential: &PeriodicPotential, n_max: usize, tol: f64) -> Result<EigenvalueList> {
    SpectralSolver::new(potential).with_tol(tol).periodic_eigenvalues(n_max)
}

/// Anti-periodic zeros of `D₋` with the default solver.
pub fn antiperiodic_eigenvalues(potential: &PeriodicPotential, n_max: usize, tol: f64) -> Result<EigenvalueList> {
    SpectralSolver::new(potential).with_tol(tol).antiperiodic_eigenvalues(n_max)
}

/// Zeros of `ρ` with the default solver.
pub fn resonances(potential: &PeriodicPotential, n_max: usize, tol: f64) -> Result<ResonanceList> {
    SpectralSolver::new(potential).with_tol(tol).resonances(n_max)
}

/// Serializable summary of a spectral computation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: ReportEigenvalues,
    pub resonances: ReportResonances,
    pub bands: Vec<ReportBand>,
    pub gaps: Vec<ReportGap>,
    pub closed_gaps: Vec<f64>,
    pub regions: Vec<RegionCount>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEigenvalues {
    pub periodic: Vec<f64>,
    pub antiperiodic: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportResonances {
    pub real: Vec<f64>,
    pub complex: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBand {
    pub lo: f64,
    pub hi: f64,
    pub mult: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportGap {
    pub lo: f64,
    pub hi: f64,
    pub kind: GapKind,
}

impl SpectralReport {
    pub fn new(eig: &EigenvalueList, res: &ResonanceList, bands: Option<&BandStructure>, regions: Vec<RegionCount>) -> Self {
        let mut complex = Vec::new();
        for p in &res.complex {
            complex.push([p.upper.re, p.upper.im]);
            complex.push([p.upper.re, -p.upper.im]);
        }
        SpectralReport {
            eigenvalues: ReportEigenvalues {
                periodic: eig.periodic.iter().map(|r| r.lambda).collect(),
                antiperiodic: eig.antiperiodic.iter().map(|r| r.lambda).collect(),
            },
            resonances: ReportResonances { real: res.real.iter().map(|r| r.lambda).collect(), complex },
            bands: bands
                .map(|b| b.bands.iter().map(|b| ReportBand { lo: b.lo, hi: b.hi, mult: b.multiplicity }).collect())
                .unwrap_or_default(),
            gaps: bands
                .map(|b| b.gaps.iter().map(|g| ReportGap { lo: g.lo, hi: g.hi, kind: g.kind }).collect())
                .unwrap_or_default(),
            closed_gaps: bands.map(|b| b.closed_gaps.clone()).unwrap_or_default(),
            regions,
        }
    }

    /// True if every number in the report is finite.
    pub fn is_finite(&self) -> bool {
        let e = &self.eigenvalues;
        e.periodic.iter().chain(&e.antiperiodic).chain(&self.resonances.real).chain(&self.closed_gaps).all(|v| v.is_finite())
            && self.resonances.complex.iter().all(|c| c[0].is_finite() && c[1].is_finite())
            && self.bands.iter().all(|b| b.lo.is_finite() && b.hi.is_finite())
            && self.gaps.iter().all(|g| g.lo.is_finite() && g.hi.is_finite())
            && self.regions.iter().all(|r| match r.contour {
                Contour::Lambda { center, radius } | Contour::Quartic { center, radius } => {
                    center[0].is_finite() && center[1].is_finite() && radius.is_finite()
                }
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_periodic_zeros() {
        let v = PeriodicPotential::zero();
        let e = SpectralSolver::new(&v).with_cutoff(1).periodic_eigenvalues(4).unwrap();
        let got: Vec<f64> = e.periodic.iter().map(|r| r.lambda).collect();
        let want = [0.0, (2.0 * PI).powi(4), (2.0 * PI).powi(4), (4.0 * PI).powi(4), (4.0 * PI).powi(4)];
        assert_eq!(got.len(), want.len(), "{got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-9 * w.max(1.0), "{g} vs {w}");
        }
        assert!(e.periodic[1].coincident && e.periodic[2].coincident);
        assert_eq!(e.periodic[3].n, 4);
    }

    #[test]
    fn resonance_labels_follow_descending_order() {
        let roots = [
            Root::Real { lambda: -10.0, double: false, residual: 0.0 },
            Root::Real { lambda: -9.0, double: false, residual: 0.0 },
            Root::Real { lambda: 0.1, double: false, residual: 0.0 },
            Root::Pair { upper: Complex64::new(-50.0, 2.0), residual: 0.0 },
        ];
        let (real, complex) = label_resonances(&roots);
        assert_eq!(real[0].lambda, 0.1);
        assert_eq!((real[1].n, real[1].sign, real[1].lambda), (1, Sign::Plus, -9.0));
        assert_eq!((real[2].n, real[2].sign, real[2].lambda), (1, Sign::Minus, -10.0));
        assert_eq!(complex[0].n, 2);
    }

    #[test]
    fn merged_windows() {
        let m = merge_intervals(vec![(3.0, 5.0), (-1.0, 1.0), (0.5, 2.0), (10.0, 11.0)]);
        assert_eq!(m, vec![(-1.0, 2.0), (3.0, 5.0), (10.0, 11.0)]);
    }
}
