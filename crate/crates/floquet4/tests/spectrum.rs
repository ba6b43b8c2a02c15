use std::f64::consts::PI;

use floquet4::spectrum::{band_scan, classify_bundle, classify_point, GapKind, Sign, SpectralSolver, DEFAULT_GRID, DEFAULT_TOL};
use floquet4::traces::{branches, trace_bundle, DEFAULT_TOL as ODE_TOL};
use floquet4::{Backend, PeriodicPotential};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use proptest::prelude::*;

/// Truncated Fourier (Hill) matrix of `d⁴ + V` on `e^{iπ(2k+shift)t}`, `|k| ≤ size`.
fn hill_eigenvalues(coeffs: &[f64], antiperiodic: bool, size: i64) -> Vec<f64> {
    let shift = if antiperiodic { 1.0 } else { 0.0 };
    let ks: Vec<i64> = (-size..=size).collect();
    let m = DMatrix::from_fn(ks.len(), ks.len(), |i, j| {
        let d = (ks[i] - ks[j]).unsigned_abs() as usize;
        if i == j {
            (PI * (2 * ks[i]) as f64 + PI * shift).powi(4)
        } else if d <= coeffs.len() {
            coeffs[d - 1]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(m.clone());
    // The eigensolver is accurate to ε‖M‖ only; the Rayleigh quotient of its eigenvector is
    // accurate to the square of that, which resolves the small low eigenvalues.
    let mut e: Vec<f64> = eig
        .eigenvectors
        .column_iter()
        .map(|v| (v.transpose() * &m * v)[(0, 0)] / v.norm_squared())
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

fn cosine(coeffs: &[f64]) -> PeriodicPotential {
    let terms: Vec<(u32, f64)> = coeffs.iter().enumerate().map(|(i, &c)| (i as u32 + 1, 2.0 * c)).collect();
    PeriodicPotential::cosine_series(&terms).unwrap()
}

fn check_against_hill(coeffs: &[f64], n_max: usize) {
    let v = cosine(coeffs);
    let eig = SpectralSolver::new(&v).eigenvalues(n_max).unwrap();
    let periodic = hill_eigenvalues(coeffs, false, 40);
    let anti = hill_eigenvalues(coeffs, true, 40);
    let mut computed_p = vec![eig.get(0, Sign::Plus).unwrap()];
    let mut computed_a = Vec::new();
    for n in 1..=n_max {
        let (lm, lp) = eig.pair(n).unwrap();
        if n % 2 == 0 { computed_p.extend([lm, lp]) } else { computed_a.extend([lm, lp]) }
    }
    for (a, b) in computed_p.iter().zip(&periodic).chain(computed_a.iter().zip(&anti)) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs Hill {b}");
    }
}

#[test]
fn eigenvalues_match_hill_matrix_for_single_cosine() {
    check_against_hill(&[1.0], 6);
}

#[test]
fn eigenvalues_match_hill_matrix_for_several_harmonics() {
    check_against_hill(&[1.0, 0.5, 1.0 / 3.0, 0.25], 5);
}

#[test]
fn lowest_resonances_of_single_cosine() {
    let v = cosine(&[1.0]);
    let res = SpectralSolver::new(&v).resonances(3).unwrap();
    let r0 = res.r0_minus().unwrap();
    assert!((r0 + 1.2832731733179847e-3).abs() < 1e-14);
    let (rp, rm) = res.pair(1).unwrap();
    assert!((rp.re + 388.2213134718528).abs() < 1e-8 && (rm.re + 391.0497465526769).abs() < 1e-8);
    assert!(rp.im == 0.0 && rm.im == 0.0);
    for r in res.all() {
        let b = trace_bundle(&v, r, Backend::HighPrecision, ODE_TOL).unwrap();
        assert!(b.rho.norm() <= 1e-18 * b.natural_scale(2), "ρ({r}) = {}", b.rho);
    }
    // every region count holds
    assert!(res.regions.iter().all(|c| c.found == c.expected && c.winding == c.expected));
}

#[test]
fn band_structure_of_single_cosine() {
    let v = cosine(&[1.0]);
    let bs = band_scan(&v, -3000.0, 5000.0, DEFAULT_GRID, DEFAULT_TOL).unwrap();
    let mults: Vec<u8> = bs.bands.iter().map(|b| b.multiplicity).collect();
    assert_eq!(mults, [4, 2, 2, 2]);
    let kinds: Vec<GapKind> = bs.gaps.iter().map(|g| g.kind).collect();
    assert_eq!(kinds, [GapKind::Resonance, GapKind::Stable, GapKind::Stable]);
    assert!((bs.gaps[1].lo - 96.40896272569124).abs() < 1e-8 && (bs.gaps[1].hi - 98.40896269275673).abs() < 1e-8);
    assert!(bs.bands.iter().all(|b| b.monotone == Some(true)));
    for l in [-1000.0, -1.0e-3, 50.0, 97.0, 2000.0] {
        assert_eq!(bs.multiplicity_at(l), Some(classify_point(&v, l).unwrap()), "λ = {l}");
    }
}

#[test]
fn spectral_report_is_finite() {
    let v = cosine(&[0.5, 0.25]);
    let report = SpectralSolver::new(&v).report(4, Some((-500.0, 3000.0))).unwrap();
    assert!(report.is_finite());
    assert_eq!(report.eigenvalues.periodic.len(), 5);
    assert_eq!(report.eigenvalues.antiperiodic.len(), 4);
}

#[test]
fn comb_eigenvalues_are_found() {
    let v = PeriodicPotential::delta_comb(5.0).unwrap();
    let eig = SpectralSolver::new(&v).eigenvalues(4).unwrap();
    // even eigenfunctions feel the comb; the odd ones vanish at t = 0 and stay free
    let (lm, lp) = eig.pair(2).unwrap();
    assert!((lm - (2.0 * PI).powi(4)).abs() < 1e-6 * lm);
    assert!(lp > lm + 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplicity_counts_stable_branches(a in -3.0..3.0f64, b in -1.0..1.0f64, l in -2.0e3..2.0e4f64) {
        let v = cosine(&[a, b]);
        let bundle = trace_bundle(&v, C::new(l, 0.0), Backend::HighPrecision, ODE_TOL).unwrap();
        let (d1, d2) = branches(&bundle);
        let unit = (-bundle.scale_exponent).exp();
        let stable = [d1, d2].iter().filter(|d| d.im == 0.0 && d.re.abs() <= unit).count() as u8;
        let margin = [d1, d2].iter().map(|d| (d.re.abs() - unit).abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(margin > 1e-9 && bundle.rho.re.abs() > 1e-12 * bundle.natural_scale(2));
        prop_assert_eq!(classify_bundle(&bundle), 2 * stable);
    }
}
