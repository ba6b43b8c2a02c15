//! Monodromy matrix `M(λ) = 𝓜(1, λ)` from several independent backends.

mod ode;
mod series;
pub(crate) mod taylor;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::quartic_basis::{mat_mul, phi0_matrix_scaled, principal_quartic_root, Mat4, QuarticRoot};

pub use ode::monodromy_ode;
pub use series::{kappa, monodromy_series, picard_bound, SeriesMonodromy};
pub use taylor::monodromy_high_precision;

/// Above this real part of `z`, stored quantities carry an exponent offset.
pub const SCALE_THRESHOLD: f64 = 300.0;

/// Exponent offset `max(0, x − 300)` used for stored quantities.
pub fn shift_for(x: f64) -> f64 {
    (x - SCALE_THRESHOLD).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Adaptive Runge–Kutta in double precision, with the exterior square integrated alongside.
    Ode,
    /// Picard iterates by nested quadrature; an oracle for moderate `|λ|`.
    Series,
    /// Taylor-series integration in double-double arithmetic (trig potentials only).
    HighPrecision,
    /// Closed-form jump matrix for the delta comb.
    DeltaComb,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Ode => "ode",
            Backend::Series => "series",
            Backend::HighPrecision => "high_precision",
            Backend::DeltaComb => "delta_comb",
        }
    }

    /// The fastest backend valid for the potential.
    pub fn default_for(potential: &PeriodicPotential) -> Backend {
        match potential {
            PeriodicPotential::DeltaComb { .. } => Backend::DeltaComb,
            _ => Backend::Ode,
        }
    }

    /// The quietest backend valid for the potential.
    pub fn precise_for(potential: &PeriodicPotential) -> Backend {
        match potential {
            PeriodicPotential::DeltaComb { .. } => Backend::DeltaComb,
            PeriodicPotential::Trig(_) => Backend::HighPrecision,
            PeriodicPotential::Sampled(_) => Backend::Ode,
        }
    }

    pub fn check(self, potential: &PeriodicPotential) -> Result<()> {
        let ok = match (self, potential) {
            (Backend::DeltaComb, PeriodicPotential::DeltaComb { .. }) => true,
            (Backend::DeltaComb, _) => false,
            (_, PeriodicPotential::DeltaComb { .. }) => false,
            (Backend::HighPrecision, PeriodicPotential::Sampled(_)) => false,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BackendMismatch { backend: self.name(), kind: potential.kind() })
        }
    }
}

/// `M(λ)` stored as `entries·e^{scale_exponent}`; entry `(k, j)` is `φⱼ⁽ᵏ⁾(1, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyMatrix {
    pub lambda: Complex64,
    pub entries: Mat4,
    pub scale_exponent: f64,
    /// `Tr Λ²M·e^{−2·scale_exponent}` when the backend computes the exterior square directly.
    pub wedge_trace: Option<Complex64>,
}

impl MonodromyMatrix {
    pub fn root(&self) -> QuarticRoot {
        principal_quartic_root(self.lambda)
    }

    /// Weight `max(1,|z|)^{j−k}` that puts all entries on the common scale `e^x`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.root().z.norm().max(1.0).powi(j as i32 - k as i32)
    }

    /// `max_{k,j} max(1,|z|)^{j−k}|A_kj − B_kj|`, unscaled.
    pub fn weighted_deviation(&self, other: &MonodromyMatrix) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..4 {
            for j in 0..4 {
                let a = self.entries[k][j] * self.scale_exponent.exp();
                let b = other.entries[k][j] * other.scale_exponent.exp();
                worst = worst.max(self.weight(k, j) * (a - b).norm());
            }
        }
        worst
    }

    /// Weighted deviation divided by `e^x`.
    pub fn scaled_deviation(&self, other: &MonodromyMatrix) -> f64 {
        let x = self.root().x;
        self.weighted_deviation(other) / x.exp()
    }

    /// Similarity-scaled entries `max(1,|z|)^{j−k}·entries`; same determinant and characteristic polynomial.
    pub fn balanced(&self) -> Mat4 {
        let mut b = self.entries;
        for (k, row) in b.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e *= self.weight(k, j);
            }
        }
        b
    }

    /// `[e₀, e₁, e₂, e₃, e₄]`: elementary symmetric functions of the balanced row norms.
    /// Natural magnitudes for the characteristic polynomial coefficients of the stored entries.
    pub fn coefficient_scales(&self) -> [f64; 5] {
        let b = self.balanced();
        let r: Vec<f64> = b.iter().map(|row| row.iter().map(|e| e.norm()).sum()).collect();
        let mut e = [1.0, 0.0, 0.0, 0.0, 0.0];
        for &ri in &r {
            for k in (1..5).rev() {
                e[k] += e[k - 1] * ri;
            }
        }
        e
    }

    /// Coefficients of `det(τI − entries) = Σ ξ_k τ^{4−k}`; with `s = 0` this is the characteristic polynomial of `M`.
    pub fn char_poly_coeffs(&self) -> [Complex64; 5] {
        let m = self.balanced();
        let one = Complex64::new(1.0, 0.0);
        let e1: Complex64 = (0..4).map(|i| m[i][i]).sum();
        let mut e2 = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                e2 += m[i][i] * m[j][j] - m[i][j] * m[j][i];
            }
        }
        let mut e3 = Complex64::new(0.0, 0.0);
        for skip in 0..4 {
            let idx: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
            e3 += det3(&m, &idx);
        }
        let e4 = det4(&m);
        [one, -e1, e2, -e3, e4]
    }

    pub fn det(&self) -> Complex64 {
        let d = det4(&self.balanced());
        if self.scale_exponent == 0.0 {
            d
        } else {
            (d.ln() + 4.0 * self.scale_exponent).exp()
        }
    }

    /// `Tr M / 4` (scaled by `e^{−s}`).
    pub fn t1(&self) -> Complex64 {
        0.25 * (0..4).map(|i| self.entries[i][i]).sum::<Complex64>()
    }

    /// `Tr M² / 4` (scaled by `e^{−2s}`).
    pub fn t2(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for l in 0..4 {
                acc += self.entries[i][l] * self.entries[l][i];
            }
        }
        0.25 * acc
    }
}

fn det3(m: &Mat4, idx: &[usize]) -> Complex64 {
    let a = |r: usize, c: usize| m[idx[r]][idx[c]];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn det4(m: &Mat4) -> Complex64 {
    let mut a = *m;
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    det
}

/// `M = J_γ·M⁰(1, λ)`, the jump `y‴(1⁺) − y‴(1⁻) = −γ y(1)` placed at the end of the cell.
pub fn monodromy_delta_comb(gamma: f64, lambda: Complex64) -> MonodromyMatrix {
    let root = principal_quartic_root(lambda);
    let shift = shift_for(root.x);
    let free = phi0_matrix_scaled(1.0, lambda, shift);
    let mut jump = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in jump.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    jump[3][0] = Complex64::new(-gamma, 0.0);
    MonodromyMatrix {
        lambda,
        entries: mat_mul(&jump, &free),
        scale_exponent: shift,
        wedge_trace: None,
    }
}

/// Unperturbed monodromy `M⁰(1, λ)`.
pub fn monodromy_free(lambda: Complex64) -> MonodromyMatrix {
    monodromy_delta_comb(0.0, lambda)
}

/// Dispatch to a backend. `tol` is the ODE tolerance or the series truncation target.
pub fn monodromy(potential: &PeriodicPotential, lambda: Complex64, backend: Backend, tol: f64) -> Result<MonodromyMatrix> {
    backend.check(potential)?;
    match backend {
        Backend::Ode => monodromy_ode(potential, lambda, tol),
        Backend::Series => {
            let n = series::terms_for(potential, lambda, tol);
            Ok(monodromy_series(potential, lambda, n)?.matrix)
        }
        Backend::HighPrecision => monodromy_high_precision(potential, lambda),
        Backend::DeltaComb => match potential {
            PeriodicPotential::DeltaComb { gamma } => Ok(monodromy_delta_comb(*gamma, lambda)),
            _ => unreachable!("checked above"),
        },
    }
}

/// `det(M − τI)` coefficients for an explicit matrix, `(ξ₀, …, ξ₄)`.
pub fn char_poly_coeffs(m: &MonodromyMatrix) -> [Complex64; 5] {
    m.char_poly_coeffs()
}
