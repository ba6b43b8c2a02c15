//! Second-order constants of the high-energy expansion and residual tables for the
//! eigenvalue and resonance asymptotics
//!
//! `λₙ± = (πn)⁴ ± |V̂ₙ| + O(n^{−3/2})`,  `rₙ± = −4(πn)⁴ ± √2|V̂ₙ| + O(n^{−3/2})`.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::quadrature::{self, Integrand};
use crate::quartic_basis::principal_quartic_root;
use crate::spectrum::SpectralSolver;

type C = Complex64;

/// Largest `πn` accepted in residual tables, so that `e^{2x}` stays representable after scaling.
pub const MAX_PI_N: f64 = 300.0;

/// Sixteen complex accumulators integrated in one pass.
#[derive(Debug, Clone, Copy)]
struct Block([C; 16]);

impl Add for Block {
    type Output = Block;
    fn add(mut self, o: Block) -> Block {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
        self
    }
}

impl Mul<f64> for Block {
    type Output = Block;
    fn mul(mut self, s: f64) -> Block {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Integrand for Block {
    fn zero() -> Self {
        Block([C::new(0.0, 0.0); 16])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `ω = diag(1, −i, i, −1)` on `Im λ ≥ 0`, its conjugate below.
pub fn omega(lambda: C) -> [C; 4] {
    let s = if lambda.im >= 0.0 { 1.0 } else { -1.0 };
    [C::new(1.0, 0.0), C::new(0.0, -s), C::new(0.0, s), C::new(-1.0, 0.0)]
}

/// The constants `b_jk, c_jk, α_j, β_jk` at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConstants {
    pub lambda: C,
    pub z: C,
    pub omega: [C; 4],
    pub b: [[C; 4]; 4],
    pub c: [[C; 4]; 4],
    pub alpha: [C; 4],
    pub beta: [[C; 4]; 4],
    /// `ϰ = ‖V‖/|z|³`.
    pub kappa: f64,
}

impl AsymptoticConstants {
    /// `α(λ) = (1 + e^{(1−ω₁)z})α₀ + (1 + e^{−(1−ω₁)z})α₁ − 2β₀₁`.
    pub fn alpha_combination(&self) -> C {
        let e = ((1.0 - self.omega[1]) * self.z).exp();
        (1.0 + e) * self.alpha[0] + (1.0 + 1.0 / e) * self.alpha[1] - 2.0 * self.beta[0][1]
    }

    /// `β(λ) = e^{ω₁z}β₀₁ + e^{ω₂z}β₀₂ − 2α₀ cos z`.
    pub fn beta_combination(&self) -> C {
        (self.omega[1] * self.z).exp() * self.beta[0][1] + (self.omega[2] * self.z).exp() * self.beta[0][2]
            - 2.0 * self.alpha[0] * self.z.cos()
    }

    /// `λ` lies where `|λ|^{3/4} > 4‖V‖`, the region of the second-order bounds.
    pub fn in_bound_region(&self) -> bool {
        self.kappa < 0.25
    }

    /// `|α_k| ≤ (3/8)ϰ²` for every `k`.
    pub fn alpha_bound_holds(&self) -> bool {
        let bound = 0.375 * self.kappa * self.kappa;
        self.alpha.iter().all(|a| a.norm() <= bound * (1.0 + 1e-9))
    }

    /// `|b_jk| ≤ ϰ²/32` for `j ≥ k`, where the exponent `z(u−s)(ω_j−ω_k)` has nonpositive real part.
    pub fn b_bound_holds(&self) -> bool {
        let bound = self.kappa * self.kappa / 32.0;
        (0..4).all(|j| (0..=j).all(|k| self.b[j][k].norm() <= bound * (1.0 + 1e-9)))
    }

    /// Largest `|β_jk − (α_j + α_k − c_kj)|`, relative to the size of the terms.
    pub fn beta_identity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                let rhs = self.alpha[j] + self.alpha[k] - self.c[k][j];
                let scale = self.alpha[j].norm() + self.alpha[k].norm() + self.c[k][j].norm();
                if scale > 0.0 {
                    worst = worst.max((self.beta[j][k] - rhs).norm() / scale);
                }
            }
        }
        worst
    }
}

/// Constants at `λ` by quadrature of `b_jk = ω_jω_k/(16z⁶) ∫₀¹du ∫₀^u V(u)V(s) e^{z(u−s)(ω_j−ω_k)} ds`.
pub fn asymptotic_constants(potential: &PeriodicPotential, lambda: C) -> Result<AsymptoticConstants> {
    if matches!(potential, PeriodicPotential::DeltaComb { .. }) {
        return Err(Error::UnsupportedRepresentation("delta_comb"));
    }
    let root = principal_quartic_root(lambda);
    let z = root.z;
    if z.norm() == 0.0 {
        return Err(Error::Domain("the expansion constants are singular at lambda = 0".into()));
    }
    let w = omega(lambda);
    let kap = potential.norm_l1()? / z.norm().powi(3);

    let mut k = [[C::new(0.0, 0.0); 4]; 4];
    let mut m = [[0.0; 4]; 4];
    for j in 0..4 {
        for l in 0..4 {
            k[j][l] = z * (w[j] - w[l]);
            m[j][l] = k[j][l].re.max(0.0);
        }
    }
    // each exponential carries e^{−max(0, Re κ)}, so every entry stays of order ‖V‖²
    let integrals = quadrature::triangle(
        |s, u| {
            let v = potential.value(u) * potential.value(s);
            let mut out = [C::new(0.0, 0.0); 16];
            for j in 0..4 {
                for l in 0..4 {
                    out[4 * j + l] = (k[j][l] * (u - s) - m[j][l]).exp() * v;
                }
            }
            Block(out)
        },
        0.0,
        1.0,
        1e-13,
    )
    .0;

    let z6 = z.powi(6);
    let pre = |j: usize, l: usize| w[j] * w[l] / (16.0 * z6);
    let mut b = [[C::new(0.0, 0.0); 4]; 4];
    let mut c = [[C::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        for l in 0..4 {
            b[j][l] = pre(j, l) * integrals[4 * j + l] * m[j][l].exp();
        }
    }
    for j in 0..4 {
        for l in 0..4 {
            // e^{κ_jl}(b_jl + b_lj), with the exponentials combined before they are applied
            let kk = k[j][l];
            c[j][l] = pre(j, l) * ((kk + m[j][l]).exp() * integrals[4 * j + l] + (kk + m[l][j]).exp() * integrals[4 * l + j]);
        }
    }

    let mut alpha = [C::new(0.0, 0.0); 4];
    alpha[0] = (1..4).map(|l| b[l][0] + c[l][0]).sum();
    for j in 1..3 {
        let upper: C = ((j + 1)..4).map(|l| b[l][j] + c[l][j]).sum();
        let lower: C = (0..j).map(|l| b[j][l]).sum();
        alpha[j] = upper - lower;
    }
    alpha[3] = -(0..3).map(|l| b[3][l]).sum::<C>();

    let mut beta = [[C::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        for l in 0..4 {
            beta[j][l] = alpha[j] + alpha[l] - c[l][j];
        }
    }
    Ok(AsymptoticConstants { lambda, z, omega: w, b, c, alpha, beta, kappa: kap })
}

/// One row of the eigenvalue residual table.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueRow {
    pub n: usize,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `|V̂ₙ|`.
    pub predicted: f64,
    /// `max |λₙ± − (πn)⁴ ∓ |V̂ₙ||`.
    pub residual: f64,
    pub normalized_residual: f64,
    pub gap: f64,
    /// `λₙ⁺ − λₙ⁻ − 2|V̂ₙ|`.
    pub gap_residual: f64,
}

/// One row of the resonance residual table; `r±` are complex in general.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceRow {
    pub n: usize,
    pub r_minus: [f64; 2],
    pub r_plus: [f64; 2],
    /// `√2|V̂ₙ|`.
    pub predicted: f64,
    /// `max |rₙ± − (−4(πn)⁴ ± √2|V̂ₙ|)|`.
    pub residual: f64,
    pub normalized_residual: f64,
    pub splitting: f64,
    /// `|rₙ⁺ − rₙ⁻| − 2√2|V̂ₙ|`.
    pub splitting_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualTable<R> {
    pub rows: Vec<R>,
    pub max_normalized_residual: f64,
}

fn check_range(n_range: (usize, usize)) -> Result<()> {
    let (lo, hi) = n_range;
    if lo < 1 || hi < lo {
        return Err(Error::Domain(format!("n range must satisfy 1 ≤ lo ≤ hi (got {lo}..={hi})")));
    }
    if PI * hi as f64 > MAX_PI_N {
        return Err(Error::Domain(format!("πn ≤ {MAX_PI_N} is required (got n = {hi})")));
    }
    Ok(())
}

fn fourier_abs(potential: &PeriodicPotential, n: usize) -> Result<f64> {
    Ok(potential.fourier_coefficient(n as i64)?.norm())
}

/// Residuals `λₙ± − (πn)⁴ ∓ |V̂ₙ|` for `n` in the inclusive range.
pub fn check_eigenvalue_asymptotics(potential: &PeriodicPotential, n_range: (usize, usize)) -> Result<ResidualTable<EigenvalueRow>> {
    check_range(n_range)?;
    let eig = SpectralSolver::new(potential).eigenvalues(n_range.1)?;
    let mut rows = Vec::new();
    for n in n_range.0..=n_range.1 {
        let (lm, lp) = eig.pair(n).ok_or_else(|| Error::RootEscape(format!("eigenvalue pair n = {n} not found")))?;
        let v = fourier_abs(potential, n)?;
        let base = (PI * n as f64).powi(4);
        let residual = (lm - base + v).abs().max((lp - base - v).abs());
        rows.push(EigenvalueRow {
            n,
            lambda_minus: lm,
            lambda_plus: lp,
            predicted: v,
            residual,
            normalized_residual: residual * (n as f64).powf(1.5),
            gap: lp - lm,
            gap_residual: lp - lm - 2.0 * v,
        });
    }
    let max_normalized_residual = rows.iter().map(|r| r.normalized_residual).fold(0.0, f64::max);
    Ok(ResidualTable { rows, max_normalized_residual })
}

/// Residuals `rₙ± − (−4(πn)⁴ ± √2|V̂ₙ|)` for `n` in the inclusive range.
pub fn check_resonance_asymptotics(potential: &PeriodicPotential, n_range: (usize, usize)) -> Result<ResidualTable<ResonanceRow>> {
    check_range(n_range)?;
    let res = SpectralSolver::new(potential).resonances(n_range.1)?;
    let rows = (n_range.0..=n_range.1)
        .into_par_iter()
        .map(|n| {
            let (rp, rm) = res.pair(n).ok_or_else(|| Error::RootEscape(format!("resonance pair n = {n} not found")))?;
            let v = SQRT_2 * fourier_abs(potential, n)?;
            let base = -4.0 * (PI * n as f64).powi(4);
            let residual = (rm - (base - v)).norm().max((rp - (base + v)).norm());
            let splitting = (rp - rm).norm();
            Ok(ResonanceRow {
                n,
                r_minus: [rm.re, rm.im],
                r_plus: [rp.re, rp.im],
                predicted: v,
                residual,
                normalized_residual: residual * (n as f64).powf(1.5),
                splitting,
                splitting_residual: splitting - 2.0 * v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_normalized_residual = rows.iter().map(|r| r.normalized_residual).fold(0.0, f64::max);
    Ok(ResidualTable { rows, max_normalized_residual })
}

/// Least-squares slope of `log y` against `log n` over the positive entries.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(n, y)| ((n as f64).ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
