//! Picard iterates `φ_{n+1,j}(t) = −∫₀ᵗ φ₃⁰(t−s) V(s) φ_{n,j}(s) ds` by nested quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::quadrature;
use crate::quartic_basis::{phi0_scaled, principal_quartic_root, Mat4};

use super::{shift_for, MonodromyMatrix};

pub const MAX_TERMS: usize = 16;
const DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMonodromy {
    pub matrix: MonodromyMatrix,
    /// Truncation bound `(ϰ)^{N+1}/(N+1)!·e^{x+ϰ}` on the weighted entries.
    pub bound: f64,
    pub terms: usize,
}

/// `ϰ = ‖V‖ / max(1,|λ|)^{3/4}`.
pub fn kappa(norm: f64, lambda: Complex64) -> f64 {
    norm / lambda.norm().max(1.0).powf(0.75)
}

/// `(ϰt)^{N+1}/(N+1)!·e^{xt+ϰ}` at `t = 1`.
pub fn picard_bound(norm: f64, lambda: Complex64, n: usize) -> f64 {
    let k = kappa(norm, lambda);
    let x = principal_quartic_root(lambda).x;
    let mut f = 1.0;
    for i in 1..=n + 1 {
        f *= k / i as f64;
    }
    f * (x + k).exp()
}

pub(crate) fn terms_for(potential: &PeriodicPotential, lambda: Complex64, tol: f64) -> usize {
    let norm = potential.mass();
    let x = principal_quartic_root(lambda).x;
    (0..=MAX_TERMS)
        .find(|&n| picard_bound(norm, lambda, n) <= tol * x.exp())
        .unwrap_or(MAX_TERMS)
}

/// Lagrange basis on the reference nodes, evaluated at `x`.
fn lagrange_row(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|l| {
            let mut v = 1.0;
            for (m, &xm) in nodes.iter().enumerate() {
                if m != l {
                    v *= (x - xm) / (nodes[l] - xm);
                }
            }
            v
        })
        .collect()
}

/// Sum of the first `N + 1` Picard iterates at `t = 1`, with the truncation bound.
pub fn monodromy_series(potential: &PeriodicPotential, lambda: Complex64, n_terms: usize) -> Result<SeriesMonodromy> {
    if matches!(potential, PeriodicPotential::DeltaComb { .. }) {
        return Err(Error::BackendMismatch { backend: "series", kind: "delta_comb" });
    }
    let n_terms = n_terms.min(MAX_TERMS);
    let root = principal_quartic_root(lambda);
    if shift_for(root.x) > 0.0 {
        return Err(Error::RangeExceeded { lambda });
    }
    let z = root.z;
    let harmonic = potential.as_trig().map_or(8, |t| t.max_harmonic());
    let panels = (2.0 * z.norm().max(2.0 * std::f64::consts::PI * harmonic as f64))
        .ceil()
        .max(16.0) as usize;
    let h = 1.0 / panels as f64;
    let rule = quadrature::rule(DEGREE);
    let xs: Vec<f64> = rule.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = rule.iter().map(|p| p.1).collect();
    let q = DEGREE;
    let n_nodes = panels * q;
    let node = |p: usize, i: usize| h * (p as f64 + 0.5 * (1.0 + xs[i]));
    let nodes: Vec<f64> = (0..n_nodes).map(|a| node(a / q, a % q)).collect();
    let weights: Vec<f64> = (0..n_nodes).map(|a| 0.5 * h * ws[a % q]).collect();
    let vals: Vec<f64> = nodes.iter().map(|&t| potential.value(t)).collect();
    let k3 = |t: f64| phi0_scaled(3, t, lambda, z, 0.0);

    // Partial-panel data: for target i, sub-nodes in [0, ξ_i] of the reference panel.
    let interp: Vec<Vec<Vec<f64>>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|m| {
                    let eta = -1.0 + 0.5 * (xs[i] + 1.0) * (1.0 + xs[m]);
                    lagrange_row(&xs, eta)
                })
                .collect()
        })
        .collect();
    // Kernel on the partial panel: K(t_i − u_m)·weight, same for every panel.
    let partial: Vec<Vec<Complex64>> = (0..q)
        .map(|i| {
            let len = 0.5 * h * (xs[i] + 1.0);
            (0..q)
                .map(|m| {
                    let off = 0.5 * len * (1.0 + xs[m]);
                    k3(len - off) * (0.5 * len * ws[m])
                })
                .collect()
        })
        .collect();
    // Kernel across complete panels depends only on the node offset.
    let mut full = vec![vec![Complex64::new(0.0, 0.0); n_nodes]; n_nodes];
    for a in 0..n_nodes {
        let pa = a / q;
        for b in 0..pa * q {
            full[a][b] = k3(nodes[a] - nodes[b]) * weights[b];
        }
    }
    let end: Vec<[Complex64; 4]> = (0..n_nodes)
        .map(|b| {
            let mut r = [Complex64::new(0.0, 0.0); 4];
            for (k, e) in r.iter_mut().enumerate() {
                *e = phi0_scaled(3 - k as i32, 1.0 - nodes[b], lambda, z, 0.0) * weights[b];
            }
            r
        })
        .collect();

    let mut entries: Mat4 = [[Complex64::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        let mut phi: Vec<Complex64> = nodes.iter().map(|&t| phi0_scaled(j as i32, t, lambda, z, 0.0)).collect();
        for k in 0..4 {
            entries[k][j] = phi0_scaled(j as i32 - k as i32, 1.0, lambda, z, 0.0);
        }
        for _ in 0..n_terms {
            let g: Vec<Complex64> = phi.iter().zip(&vals).map(|(p, v)| p * v).collect();
            for k in 0..4 {
                let s: Complex64 = (0..n_nodes).map(|b| end[b][k] * g[b]).sum();
                entries[k][j] -= s;
            }
            let mut next = vec![Complex64::new(0.0, 0.0); n_nodes];
            for a in 0..n_nodes {
                let (pa, i) = (a / q, a % q);
                let mut acc: Complex64 = (0..pa * q).map(|b| full[a][b] * g[b]).sum();
                let gp = &g[pa * q..pa * q + q];
                for m in 0..q {
                    let gi: Complex64 = interp[i][m].iter().zip(gp).map(|(l, v)| v * *l).sum();
                    acc += partial[i][m] * gi;
                }
                next[a] = -acc;
            }
            phi = next;
        }
    }
    let bound = picard_bound(potential.mass(), lambda, n_terms);
    Ok(SeriesMonodromy {
        matrix: MonodromyMatrix { lambda, entries, scale_exponent: 0.0, wedge_trace: None },
        bound,
        terms: n_terms,
    })
}
