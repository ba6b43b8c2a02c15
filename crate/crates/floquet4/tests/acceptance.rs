//! Acceptance run: one line per criterion.
//!
//! A criterion that the implementation cannot meet as stated is reported as `FAIL` together with
//! the corrected check it is measured against. Such parts are marked through `Outcome::known_red`;
//! the process exits nonzero on any other failure, and also if a known-red part starts passing.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use floquet4::asymptotics::{asymptotic_constants, check_eigenvalue_asymptotics, check_resonance_asymptotics};
use floquet4::delta_comb::{critical_gamma, resonance_pair_with, trace_bundle_delta, PairKind};
use floquet4::monodromy::{monodromy_delta_comb, monodromy_series};
use floquet4::small_gamma::{self, gap_law, lowest_band, lowest_band_multiplicity};
use floquet4::spectrum::{Sign, SpectralFunction, SpectralSolver};
use floquet4::traces::{branches, free_traces, kappa, t_m2, trace_bundle, TraceBundle};
use floquet4::{monodromy, principal_quartic_root, Backend, PeriodicPotential, Result};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// Failing sub-check that is expected to stay red, with the reason.
    known_red: Option<(&'static str, bool)>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, known_red: None }
    }
}

fn run(id: u32, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let timed_out = limit.is_some_and(|l| elapsed > l);
    let (line, ok) = match out {
        Ok(o) => {
            let within = if timed_out { format!("; over the {:?} limit", limit.unwrap()) } else { String::new() };
            match o.known_red {
                Some((why, literal_pass)) => {
                    let pass = o.pass && literal_pass && !timed_out;
                    let note = if literal_pass { "known-red part passed unexpectedly" } else { why };
                    (
                        format!("{} {}; {}{}", if pass { "PASS" } else { "FAIL" }, o.detail, note, within),
                        o.pass && !literal_pass && !timed_out,
                    )
                }
                None => {
                    let pass = o.pass && !timed_out;
                    (format!("{} {}{}", if pass { "PASS" } else { "FAIL" }, o.detail, within), pass)
                }
            }
        }
        Err(e) => (format!("FAIL error: {e}"), false),
    };
    println!("criterion {id:>2} {title:<28} {line} [{:.1} s]", elapsed.as_secs_f64());
    ok
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_potential(rng: &mut ChaCha8Rng, amplitude: f64) -> PeriodicPotential {
    let harmonics = rng.gen_range(1..=3);
    let coeffs: Vec<(i64, C)> = (1..=harmonics)
        .map(|n| (n as i64, C::from_polar(amplitude * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>())))
        .collect();
    PeriodicPotential::trig(&coeffs).expect("random trig potential")
}

fn random_lambda(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> C {
    let z = C::from_polar(rng.gen_range(r_lo..r_hi), rng.gen_range(-0.25 * PI..0.25 * PI));
    z.powi(4)
}

fn criterion_1() -> Result<Outcome> {
    let v = PeriodicPotential::zero();
    let solver = SpectralSolver::new(&v);
    let eig = solver.eigenvalues(10)?;
    let res = solver.resonances(10)?;
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    let lambda0 = eig.get(0, Sign::Plus);
    let r0 = res.r0_minus();
    match (lambda0, r0) {
        (Some(a), Some(b)) => worst = worst.max(a.abs()).max(b.abs()),
        _ => missing += 1,
    }
    for n in 1..=10 {
        let exact = (PI * n as f64).powi(4);
        match eig.pair(n) {
            Some((lm, lp)) => worst = worst.max(rel(lm, exact)).max(rel(lp, exact)),
            None => missing += 1,
        }
        match res.pair(n) {
            Some((rp, rm)) => worst = worst.max((rp + 4.0 * exact).norm() / (4.0 * exact)).max((rm + 4.0 * exact).norm() / (4.0 * exact)),
            None => missing += 1,
        }
    }
    Ok(Outcome::new(
        missing == 0 && worst <= 1e-8,
        format!("max relative error {worst:.2e} over n ≤ 10, {missing} missing"),
    ))
}

/// Largest identity defect at one point, each relative to its natural scale.
fn identity_defects(v: &PeriodicPotential, lambda: C) -> Result<[f64; 6]> {
    let m = monodromy(v, lambda, Backend::Ode, 1e-12)?;
    let b = TraceBundle::from_monodromy(&m);
    let xi = m.char_poly_coeffs();
    let e = m.coefficient_scales();
    let one = C::new(1.0, 0.0);
    let det = ((m.det() - 1.0).norm()) / e[4];
    let palindromic = ((xi[3] - xi[1]).norm() / e[3]).max((xi[4] - xi[0]).norm() / e[4]);
    let xi1 = (xi[1] + 4.0 * b.t1).norm() / e[1];
    // D± = P(±1)/4 from the characteristic polynomial
    let p_at = |s: f64| xi[0] * s.powi(4) + xi[1] * s.powi(3) + xi[2] * s * s + xi[3] * s + xi[4];
    let d_scale = e.iter().sum::<f64>() / 4.0;
    let mut d = 0.0f64;
    for (s, d_pm) in [(1.0, b.d_plus), (-1.0, b.d_minus)] {
        let form1 = 0.5 * (b.t - 4.0 * s * b.t1 + one);
        let form2 = (b.t1 - s) * (b.t1 - s) - b.rho;
        let reference = 0.25 * p_at(s);
        d = d.max((form1 - reference).norm()).max((form2 - reference).norm()).max((d_pm - reference).norm());
    }
    d = d.max((b.d_plus - b.d_minus + 4.0 * b.t1).norm());
    d /= d_scale;
    let (d1, d2) = branches(&b);
    let s2 = e[2];
    let lyap = ((d1 + d2 - 2.0 * b.t1).norm() / e[1])
        .max((d1 * d2 - 0.5 * (b.t - one)).norm() / s2)
        .max((d1 * d1 + d2 * d2 - 1.0 - b.t2).norm() / s2);
    let sum = d1 + d2;
    let product = [one, -2.0 * sum, 2.0 + 4.0 * d1 * d2, -2.0 * sum, one];
    let factor = (0..5).map(|k| (product[k] - xi[k]).norm() / e[k]).fold(0.0, f64::max);
    Ok([det, palindromic, xi1, d, lyap, factor])
}

fn criterion_2() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 6];
    for _ in 0..200 {
        let v = random_potential(&mut rng, 2.0);
        let lambda = random_lambda(&mut rng, 0.0, 25.0);
        let d = identity_defects(&v, lambda)?;
        for k in 0..6 {
            worst[k] = worst[k].max(d[k]);
        }
    }
    let names = ["det", "palindrome", "xi1", "D±", "branches", "factorization"];
    let detail = names.iter().zip(worst).map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome::new(worst.iter().all(|&w| w <= 1e-8), format!("200 points: {detail}")))
}

fn criterion_3() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut qualifying, mut worst_agree, mut dominated, mut total) = (0, 0.0f64, 0, 0);
    for _ in 0..120 {
        let v = random_potential(&mut rng, 1.5);
        let lambda = random_lambda(&mut rng, 1.0, 12.0);
        let ode = monodromy(&v, lambda, Backend::Ode, 1e-13)?;
        let x = principal_quartic_root(lambda).x;
        // ODE error against the weighted entries, measured on the scale e^x
        let noise = 1e-10 * x.exp();
        for terms in [2, 4, 8, 16] {
            let s = monodromy_series(&v, lambda, terms)?;
            let dev = s.matrix.weighted_deviation(&ode);
            total += 1;
            if dev <= s.bound + noise {
                dominated += 1;
            }
            if terms == 16 && s.bound < 1e-10 {
                qualifying += 1;
                worst_agree = worst_agree.max(s.matrix.scaled_deviation(&ode));
            }
        }
    }
    Ok(Outcome::new(
        qualifying >= 20 && worst_agree <= 1e-8 && dominated == total,
        format!("{qualifying} points with bound < 1e-10, max scaled deviation {worst_agree:.1e}; bound dominates {dominated}/{total}"),
    ))
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = [0usize; 3];
    let mut margin = [f64::INFINITY; 3];
    for _ in 0..100 {
        let v = random_potential(&mut rng, 1.0);
        let lambda = random_lambda(&mut rng, 0.0, 15.0);
        let k = kappa(v.mass(), lambda);
        let x = principal_quartic_root(lambda).x;
        let b = trace_bundle(&v, lambda, Backend::Ode, 1e-13)?;
        let f = free_traces(lambda);
        let noise = |m: f64| 1e-10 * (m * x).exp().max(1.0);
        let mut record = |i: usize, lhs: f64, rhs: f64, m: f64| {
            if lhs > rhs + noise(m) {
                violations[i] += 1;
            }
            margin[i] = margin[i].min((rhs + noise(m)) / lhs.max(f64::MIN_POSITIVE));
        };
        record(0, (b.t1 - f.t1).norm(), 0.5 * k * k * (x + k).exp(), 1.0);
        for m in 1..=2u32 {
            let mf = m as f64;
            let (tm, tm0) = if m == 1 { (b.t1, f.t1) } else { (b.t2, f.t2) };
            let second = t_m2(&v, m, lambda)?;
            record(1, (tm - tm0 - second).norm(), (mf * k).powi(3) / 6.0 * (x * mf + k).exp(), mf);
        }
        record(2, (b.rho - f.rho).norm(), 3.0 * k * k * (2.0 * x + k).exp(), 2.0);
    }
    Ok(Outcome::new(
        violations == [0, 0, 0],
        format!(
            "violations T1 {}, second order {}, rho {}; smallest bound/deviation ratios {:.2}, {:.2}, {:.2}",
            violations[0], violations[1], violations[2], margin[0], margin[1], margin[2]
        ),
    ))
}

fn inverse_harmonics() -> Result<PeriodicPotential> {
    let terms: Vec<(u32, f64)> = (1..=12).map(|n| (n, 2.0 / n as f64)).collect();
    PeriodicPotential::cosine_series(&terms)
}

fn criterion_5() -> Result<Outcome> {
    let v = PeriodicPotential::cosine_series(&[(1, 2.0)])?;
    let first = check_eigenvalue_asymptotics(&v, (1, 1))?;
    let r1 = first.rows[0].residual;
    let t = check_eigenvalue_asymptotics(&inverse_harmonics()?, (4, 12))?;
    let worst = t.rows.iter().map(|r| r.gap_residual.abs() * (r.n as f64).powf(1.5)).fold(0.0, f64::max);
    Ok(Outcome::new(
        r1 <= 0.5 && worst <= 10.0,
        format!("n = 1 residual {r1:.3e}; max n^1.5·|gap − 2/n| over n = 4..12 is {worst:.2e}"),
    ))
}

fn criterion_6() -> Result<Outcome> {
    let t = check_resonance_asymptotics(&inverse_harmonics()?, (4, 12))?;
    let worst = t.rows.iter().map(|r| r.splitting_residual.abs() * (r.n as f64).powf(1.5)).fold(0.0, f64::max);
    let predicted_ok = t.rows.iter().all(|r| rel(r.predicted, SQRT_2 / r.n as f64) < 1e-9);
    Ok(Outcome::new(
        worst <= 10.0 && predicted_ok,
        format!("max n^1.5·|r⁺ − r⁻| − 2√2/n| over n = 4..12 is {worst:.2e}"),
    ))
}

fn criterion_7() -> Result<Outcome> {
    let v = PeriodicPotential::cosine_series(&[(1, 2.0), (2, 1.0)])?;
    let weights: f64 = [1.0f64, 0.5].iter().map(|a| 2.0 * a * a).sum();
    let (mut alpha_err, mut beta_literal, mut beta_signed) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..=6 {
        let pn = PI * n as f64;
        let vn = v.fourier_coefficient(n as i64)?.norm_sqr();
        let a = asymptotic_constants(&v, C::new(-4.0 * pn.powi(4), 0.0))?.alpha_combination();
        let a_pred = vn / (2.0 * pn).powi(6);
        let a_scale = if vn > 0.0 { a_pred } else { weights / (2.0 * pn).powi(6) };
        alpha_err = alpha_err.max((a - a_pred).norm() / a_scale);
        let b = asymptotic_constants(&v, C::new(pn.powi(4), 0.0))?.beta_combination();
        let b_pred = vn / (16.0 * pn.powi(6));
        let b_scale = if vn > 0.0 { b_pred } else { weights / (16.0 * pn.powi(6)) };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        beta_literal = beta_literal.max((b - b_pred).norm() / b_scale);
        beta_signed = beta_signed.max((b - sign * b_pred).norm() / b_scale);
    }
    let literal = alpha_err <= 1e-6 && beta_literal <= 1e-6;
    Ok(Outcome {
        pass: alpha_err <= 1e-6 && beta_signed <= 1e-6,
        detail: format!(
            "alpha rel err {alpha_err:.1e}; beta rel err {beta_literal:.1e} as stated, {beta_signed:.1e} with the sign (−1)ⁿ"
        ),
        known_red: Some(("beta carries a factor (−1)ⁿ, so the stated form fails at odd n", literal)),
    })
}

fn criterion_8() -> Result<Outcome> {
    let v = PeriodicPotential::cosine_series(&[(1, 2.0)])?;
    let k = small_gamma::constants(&v)?;
    let a_literal = rel(k.a_integral, k.a_fourier);
    let a_corrected = rel(k.a_integral, 2.0 * k.a_fourier);
    let mut ratios = Vec::new();
    let mut gaps_positive = true;
    for g in [0.4, 0.2, 0.1, 0.05] {
        let b = lowest_band(&v, g)?;
        let lead = k.leading_endpoint(g);
        ratios.push((((b.r0_minus - lead) / g.powi(3)).abs(), ((b.lambda0_plus - lead) / g.powi(3)).abs()));
        gaps_positive &= b.gap() > 0.0 && lowest_band(&v, -g)?.gap() > 0.0;
    }
    // bounded: no growth beyond rounding as γ halves
    let (first_r, first_l) = ratios[0];
    let bounded = ratios.iter().all(|&(r, l)| r <= 2.0 * first_r + 1e-6 && l <= 2.0 * first_l + 1e-6);
    let gammas: Vec<f64> = (0..=20).map(|i| 0.4 * 10f64.powf(-(i as f64) / 10.0)).collect();
    let law = gap_law(&v, &gammas)?;
    let slope = law.slope.unwrap_or(f64::NAN);
    let mult = lowest_band_multiplicity(&v, 0.5)?;
    let interior = mult.interior.iter().filter(|p| p.1 == 4).count();
    let rest = bounded && gaps_positive && (3.5..=4.5).contains(&slope) && mult.interior_all_four() && a_corrected <= 1e-8;
    let decade = law.decade.map(|(a, b)| format!("[{a:.3}, {b:.3}]")).unwrap_or_else(|| "none".into());
    Ok(Outcome {
        pass: rest,
        detail: format!(
            "A_integral/A_fourier − 1 = {a_literal:.2e} (against 2·A_fourier {a_corrected:.1e}); max residual/γ³ {:.1e}, {:.1e}; gap > 0 {gaps_positive}; slope {slope:.4} over {decade}; {interior}/32 interior points four-fold",
            ratios.iter().map(|r| r.0).fold(0.0, f64::max),
            ratios.iter().map(|r| r.1).fold(0.0, f64::max),
        ),
        known_red: Some(("the Fourier sum is half the integral constant", a_literal <= 1e-8)),
    })
}

fn criterion_9() -> Result<Outcome> {
    let v = PeriodicPotential::cosine_series(&[(1, 1.0)])?;
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 1..=4usize {
        let solver = SpectralSolver::new(&v).with_cutoff(n);
        let eig = solver.eigenvalues(2 * n + 2)?;
        let res = solver.resonances(2 * n + 2)?;
        for r in eig.regions.iter().chain(&res.regions) {
            checked += 1;
            let stated = match r.function {
                SpectralFunction::DMinus => 2 * n,
                _ => 2 * n + 1,
            };
            if r.found != r.expected || r.winding != r.expected || (r.index == 0 && r.expected != stated) {
                bad.push(format!("{:?}[{}] N={n}: found {} winding {} vs {}", r.function, r.index, r.found, r.winding, r.expected));
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{checked} region counts for N = 1..4, mismatches: {}", if bad.is_empty() { "none".into() } else { bad.join("; ") })))
}

fn criterion_10() -> Result<Outcome> {
    let tol = 1e-14;
    let (mut gamma_ok, mut fpp_ok, mut split_err, mut kinds_ok, mut trace_err) = (true, true, 0.0f64, true, 0.0f64);
    let (mut gamma_ratios, mut fpp_ratios) = (Vec::new(), Vec::new());
    for n in 2..=4u32 {
        let c = critical_gamma(n, tol)?;
        let (lo, hi) = floquet4::delta_comb::interval(n);
        gamma_ok &= c.z_n > lo && c.z_n < hi && (0.99..=1.01).contains(&c.gamma_ratio());
        fpp_ok &= (0.9..=1.1).contains(&c.fpp_ratio());
        gamma_ratios.push(format!("{:.6}", c.gamma_ratio()));
        fpp_ratios.push(format!("{:.3e}", c.fpp_ratio()));
        for s in [1.0, -1.0] {
            let p = resonance_pair_with(&c, c.gamma_n * (1.0 + s * 1e-3), tol)?;
            let predicted = p.predicted_split(&c);
            split_err = split_err.max((p.r_plus - p.r_minus - predicted).norm() / predicted.norm());
            kinds_ok &= if s > 0.0 {
                p.kind == PairKind::Real && p.r_plus.im == 0.0 && p.r_minus.im == 0.0
            } else {
                p.kind == PairKind::Conjugate && p.r_plus.im > 0.0 && p.r_minus == p.r_plus.conj()
            };
            kinds_ok &= p.residual() <= 1e-9;
        }
        let d = resonance_pair_with(&c, c.gamma_n, tol)?;
        kinds_ok &= d.kind == PairKind::Double && d.r_plus == d.r_minus && d.residual() <= 1e-9;
        // a double root of ρ is also a zero of its derivative
        let h = 1e-7 * d.r_plus.re;
        let slope = |l: f64| trace_bundle_delta(c.gamma_n, C::new(l, 0.0)).rho.re;
        let scale = trace_bundle_delta(c.gamma_n, d.r_plus).natural_scale(2);
        kinds_ok &= ((slope(d.r_plus.re + h) - slope(d.r_plus.re - h)) / (2.0 * h) * d.r_plus.re / scale).abs() < 1e-4;
        for lambda in [d.r_plus, C::new(0.5 * d.r_plus.re, 30.0), C::new(-d.r_plus.re, -10.0), C::new(3.0, 1.0)] {
            let closed = trace_bundle_delta(c.gamma_n, lambda);
            let direct = TraceBundle::from_monodromy(&monodromy_delta_comb(c.gamma_n, lambda));
            // at small |λ| the traces are of size (γ/|z|³)^m rather than e^{mx}
            let compare = |a: C, b: C, m: i32| (a - b).norm() / closed.natural_scale(m).max(a.norm());
            trace_err = trace_err
                .max(compare(closed.t1, direct.t1, 1))
                .max(compare(closed.t2, direct.t2, 2))
                .max(compare(closed.rho, direct.rho, 2));
        }
    }
    Ok(Outcome {
        pass: gamma_ok && split_err <= 0.1 && kinds_ok && trace_err <= 1e-10,
        detail: format!(
            "gamma ratios [{}], Fpp ratios [{}]; splitting rel err {split_err:.1e}; pair kinds {kinds_ok}; closed form vs monodromy {trace_err:.1e}",
            gamma_ratios.join(", "),
            fpp_ratios.join(", ")
        ),
        known_red: Some(("F+'' at the minimizer grows like e^{z}, not like 24z²", fpp_ok)),
    })
}

fn criterion_11() -> Result<Outcome> {
    let v = PeriodicPotential::cosine_series(&[(1, 2.0)])?;
    let solver = SpectralSolver::new(&v);
    let direct = solver.resonances(5)?;
    let recovered = solver.recovered_resonances(5)?;
    let key = |z: &C| (z.re, z.im);
    let mut a = direct.all();
    let mut b = recovered.all();
    a.sort_by(|p, q| key(p).partial_cmp(&key(q)).unwrap());
    b.sort_by(|p, q| key(p).partial_cmp(&key(q)).unwrap());
    let worst = a.iter().zip(&b).map(|(p, q)| (p - q).norm() / p.norm().max(1.0)).fold(0.0, f64::max);
    Ok(Outcome::new(
        a.len() == b.len() && !a.is_empty() && worst <= 1e-6,
        format!("{} direct, {} recovered, max relative difference {worst:.1e}", a.len(), b.len()),
    ))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        run(1, "free operator", Some(secs(5)), criterion_1),
        run(2, "identity suite", Some(secs(30)), criterion_2),
        run(3, "series oracle", None, criterion_3),
        run(4, "inequality suite", None, criterion_4),
        run(5, "eigenvalue asymptotics", Some(secs(120)), criterion_5),
        run(6, "resonance asymptotics", None, criterion_6),
        run(7, "second-order constants", None, criterion_7),
        run(8, "small coupling", Some(secs(120)), criterion_8),
        run(9, "zero counting", None, criterion_9),
        run(10, "delta comb", Some(secs(60)), criterion_10),
        run(11, "resonance recovery", None, criterion_11),
    ];
    if results.iter().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
