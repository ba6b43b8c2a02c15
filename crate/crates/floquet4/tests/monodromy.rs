use std::f64::consts::PI;

use floquet4::monodromy::{monodromy_delta_comb, monodromy_free, monodromy_series, picard_bound, SCALE_THRESHOLD};
use floquet4::quartic_basis::phi0_matrix;
use floquet4::traces::TraceBundle;
use floquet4::{monodromy, Backend, PeriodicPotential};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn potential(c1: (f64, f64), c2: (f64, f64), c3: (f64, f64)) -> PeriodicPotential {
    PeriodicPotential::trig(&[(1, C::new(c1.0, c1.1)), (2, C::new(c2.0, c2.1)), (3, C::new(c3.0, c3.1))]).unwrap()
}

fn lambda_from(r: f64, theta: f64) -> C {
    C::from_polar(r, theta).powi(4)
}

#[test]
fn free_monodromy_is_the_basis_matrix() {
    for l in [C::new(0.0, 0.0), C::new(3.0, -2.0), C::new(-500.0, 40.0), C::new(2.0e4, 0.0)] {
        let m = monodromy_free(l);
        let p = phi0_matrix(1.0, l);
        let scale = m.root().x.exp();
        for k in 0..4 {
            for j in 0..4 {
                let w = m.weight(k, j);
                assert!((m.entries[k][j] - p[k][j]).norm() * w <= 1e-13 * scale.max(1.0), "λ = {l}, entry ({k}, {j})");
            }
        }
    }
}

#[test]
fn zero_potential_on_every_backend() {
    let v = PeriodicPotential::zero();
    let l = C::new(-300.0, 75.0);
    let free = monodromy_free(l);
    for b in [Backend::Ode, Backend::Series, Backend::HighPrecision] {
        let m = monodromy(&v, l, b, 1e-12).unwrap();
        assert!(m.scaled_deviation(&free) < 1e-11, "{b:?}");
    }
}

#[test]
fn huge_lambda_is_stored_scaled() {
    let v = PeriodicPotential::cosine_series(&[(1, 2.0)]).unwrap();
    let z: f64 = 400.0;
    let m = monodromy(&v, C::new(z.powi(4), 0.0), Backend::HighPrecision, 1e-12).unwrap();
    assert!((m.scale_exponent - (z - SCALE_THRESHOLD)).abs() < 1e-9);
    let b = TraceBundle::from_monodromy(&m);
    assert!(b.t1.norm().is_finite() && b.rho.norm().is_finite());
    // T₁ ≈ cosh z / 2 ≈ e^z / 4, with relative correction O(‖V‖/z³)
    let expected = 0.25 * SCALE_THRESHOLD.exp();
    assert!((b.t1.re / expected - 1.0).abs() < 1e-6);
}

#[test]
fn series_bound_shrinks_with_terms() {
    let v = PeriodicPotential::cosine_series(&[(1, 1.0), (3, 0.5)]).unwrap();
    let l = C::new(120.0, 30.0);
    let mut last = f64::INFINITY;
    for n in 1..=12 {
        let s = monodromy_series(&v, l, n).unwrap();
        assert!(s.bound < last);
        assert!((s.bound - picard_bound(v.mass(), l, n)).abs() <= 1e-12 * s.bound);
        last = s.bound;
    }
}

#[test]
fn sampled_and_trig_forms_agree() {
    let trig = PeriodicPotential::cosine_series(&[(1, 1.5), (2, -0.5)]).unwrap();
    let values: Vec<f64> = (0..256).map(|i| trig.evaluate(i as f64 / 256.0).unwrap()).collect();
    let sampled = PeriodicPotential::sampled(values, 8).unwrap();
    for l in [C::new(50.0, 0.0), C::new(-2000.0, 10.0)] {
        let a = monodromy(&trig, l, Backend::Ode, 1e-12).unwrap();
        let b = monodromy(&sampled, l, Backend::Ode, 1e-12).unwrap();
        assert!(a.scaled_deviation(&b) < 1e-8, "λ = {l}: {}", a.scaled_deviation(&b));
    }
}

#[test]
fn backend_mismatches_are_refused() {
    let comb = PeriodicPotential::delta_comb(2.0).unwrap();
    assert!(monodromy(&comb, C::new(1.0, 0.0), Backend::Ode, 1e-12).is_err());
    let v = PeriodicPotential::cosine_series(&[(1, 1.0)]).unwrap();
    assert!(monodromy(&v, C::new(1.0, 0.0), Backend::DeltaComb, 1e-12).is_err());
    let sampled = PeriodicPotential::sampled(vec![1.0, -1.0, 1.0, -1.0], 2).unwrap();
    assert!(monodromy(&sampled, C::new(1.0, 0.0), Backend::HighPrecision, 1e-12).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unimodular_and_palindromic(
        c1 in (-1.0..1.0f64, -1.0..1.0f64), c2 in (-1.0..1.0f64, -1.0..1.0f64), c3 in (-1.0..1.0f64, -1.0..1.0f64),
        r in 0.0..20.0f64, theta in -0.78..0.78f64,
    ) {
        let v = potential(c1, c2, c3);
        let m = monodromy(&v, lambda_from(r, theta), Backend::Ode, 1e-12).unwrap();
        let xi = m.char_poly_coeffs();
        let e = m.coefficient_scales();
        prop_assert!((xi[4] - 1.0).norm() <= 1e-9 * e[4]);
        prop_assert!((xi[3] - xi[1]).norm() <= 1e-9 * e[3]);
    }

    #[test]
    fn ode_agrees_with_high_precision(
        c1 in (-2.0..2.0f64, -2.0..2.0f64), c2 in (-1.0..1.0f64, -1.0..1.0f64),
        r in 0.0..40.0f64, theta in -0.78..0.78f64,
    ) {
        let v = potential(c1, c2, (0.0, 0.0));
        let l = lambda_from(r, theta);
        let a = monodromy(&v, l, Backend::Ode, 1e-12).unwrap();
        let b = monodromy(&v, l, Backend::HighPrecision, 1e-12).unwrap();
        prop_assert!(a.scaled_deviation(&b) < 1e-8, "deviation {}", a.scaled_deviation(&b));
    }

    #[test]
    fn comb_jump_has_unit_determinant(gamma in -5.0e3..5.0e3f64, r in 0.0..30.0f64, theta in -0.78..0.78f64) {
        let m = monodromy_delta_comb(gamma, lambda_from(r, theta));
        let e = m.coefficient_scales();
        prop_assert!((m.det() - 1.0).norm() <= 1e-10 * e[4]);
    }
}

#[test]
fn real_potential_gives_conjugate_traces() {
    let v = potential((0.7, -0.3), (0.2, 0.4), (0.0, 0.1));
    for l in [C::new(30.0, 12.0), C::new(-800.0, 5.0), C::new(5.0, -PI)] {
        let a = TraceBundle::from_monodromy(&monodromy(&v, l, Backend::Ode, 1e-12).unwrap());
        let b = TraceBundle::from_monodromy(&monodromy(&v, l.conj(), Backend::Ode, 1e-12).unwrap());
        assert!((a.t1 - b.t1.conj()).norm() <= 1e-9 * a.natural_scale(1));
        assert!((a.rho - b.rho.conj()).norm() <= 1e-9 * a.natural_scale(2));
    }
}
