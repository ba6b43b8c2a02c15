use std::path::PathBuf;

use floquet4::asymptotics::{check_eigenvalue_asymptotics, check_resonance_asymptotics};
use floquet4::delta_comb::{critical_gamma, resonance_pair_with};
use floquet4::small_gamma::{self, gap_law};
use floquet4::spectrum::SpectralSolver;
use floquet4::traces::{self, branches, trace_bundle};
use floquet4::{Backend, PeriodicPotential};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{default_gammas, Quantity, RunConfig};
use crate::output::{OutDir, Table, Value};
use crate::Failure;

fn warn(message: &str) {
    eprintln!("{}", json!({ "level": "warning", "message": message }));
}

fn f(x: f64) -> Value {
    Value::Float(x)
}

pub fn trace(config: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    let v = config.potential()?;
    let backend = config.backend.unwrap_or_else(|| Backend::default_for(&v));
    let tol = config.tol.unwrap_or(traces::DEFAULT_TOL);
    let [lo, hi] = config.lambda_range.expect("validated");
    let n = config.points;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let lambda = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let b = trace_bundle(&v, Complex64::new(lambda, 0.0), backend, tol)?;
            let (d1, d2) = branches(&b);
            let s = b.scale_exponent.exp();
            Ok([
                lambda,
                b.t1_unscaled().re,
                b.rho_unscaled().re,
                d1.re * s,
                d1.im * s,
                d2.re * s,
                d2.im * s,
                b.d_plus_unscaled().re,
                b.d_minus_unscaled().re,
            ])
        })
        .collect::<floquet4::Result<Vec<_>>>()?;
    let mut table = Table::new(&["lambda", "T1", "rho", "Delta1_re", "Delta1_im", "Delta2_re", "Delta2_im", "Dplus", "Dminus"]);
    for r in rows {
        table.row(&r.map(f))?;
    }
    Ok(vec![out.csv("trace.csv", &table)?])
}

pub fn spectrum(config: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    let v = config.potential()?;
    let mut solver = SpectralSolver::new(&v);
    if let Some(t) = config.tol {
        solver = solver.with_tol(t);
    }
    if let Some(g) = config.grid {
        solver = solver.with_grid(g);
    }
    if let Some(b) = config.backend {
        solver = solver.with_backends(Backend::default_for(&v), b)?;
    }
    let range = config.lambda_range.map(|[lo, hi]| (lo, hi));
    let report = solver.report(config.n_max, range)?;
    if !report.is_finite() {
        return Err(Failure::numerical("non_finite", "spectral report contains non-finite values".into()));
    }
    Ok(vec![out.json("spectrum.json", &report)?])
}

pub fn asymptotics(config: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    let v = config.potential()?;
    if config.tol.is_some() {
        warn("asymptotics uses the solver's default tolerance; tol is ignored");
    }
    let range = (config.n_range[0], config.n_range[1]);
    let mut files = Vec::new();
    if matches!(config.quantity, Quantity::Eigenvalues | Quantity::Both) {
        let t = check_eigenvalue_asymptotics(&v, range)?;
        let mut table = Table::new(&[
            "n", "lambda_minus", "lambda_plus", "predicted", "residual", "normalized_residual", "gap", "gap_residual",
        ]);
        for r in &t.rows {
            table.row(&[
                r.n.into(),
                f(r.lambda_minus),
                f(r.lambda_plus),
                f(r.predicted),
                f(r.residual),
                f(r.normalized_residual),
                f(r.gap),
                f(r.gap_residual),
            ])?;
        }
        files.push(out.csv("asymptotics_eigenvalues.csv", &table)?);
    }
    if matches!(config.quantity, Quantity::Resonances | Quantity::Both) {
        let t = check_resonance_asymptotics(&v, range)?;
        let mut table = Table::new(&[
            "n",
            "r_minus_re",
            "r_minus_im",
            "r_plus_re",
            "r_plus_im",
            "predicted",
            "residual",
            "normalized_residual",
            "splitting",
            "splitting_residual",
        ]);
        for r in &t.rows {
            table.row(&[
                r.n.into(),
                f(r.r_minus[0]),
                f(r.r_minus[1]),
                f(r.r_plus[0]),
                f(r.r_plus[1]),
                f(r.predicted),
                f(r.residual),
                f(r.normalized_residual),
                f(r.splitting),
                f(r.splitting_residual),
            ])?;
        }
        files.push(out.csv("asymptotics_resonances.csv", &table)?);
    }
    Ok(files)
}

pub fn small_gamma(config: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    let v = config.potential()?;
    if config.tol.is_some() {
        warn("small-gamma refines endpoints to machine precision; tol is ignored");
    }
    let gammas = config.gammas.clone().unwrap_or_else(default_gammas);
    let law = gap_law(&v, &gammas)?;
    let constants = small_gamma::constants(&v)?;
    let mut table = Table::new(&["gamma", "r0_minus", "lambda0_plus", "gap", "predicted_leading"]);
    for r in &law.rows {
        table.row(&[f(r.gamma), f(r.r0_minus), f(r.lambda0_plus), f(r.gap), f(r.predicted_leading)])?;
    }
    let summary = json!({
        "constants": constants,
        "slope": law.slope.filter(|s| s.is_finite()),
        "decade": law.decade,
        "resolvable": law.resolvable,
    });
    Ok(vec![out.csv("small_gamma.csv", &table)?, out.json("small_gamma.json", &summary)?])
}

pub fn delta_comb(config: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    if let Some(spec) = &config.potential {
        if !matches!(PeriodicPotential::from_spec(spec)?, PeriodicPotential::DeltaComb { .. }) {
            return Err(Failure::validation("potential", "delta-comb sweeps the comb family; drop the potential or make it a delta_comb".into()));
        }
    }
    let tol = config.tol.unwrap_or(1e-14);
    let [lo, hi] = config.nu_range;
    let steps = config.steps;
    let mut files = Vec::new();
    for &n in &config.indices {
        let c = critical_gamma(n, tol)?;
        let rows = (0..steps)
            .into_par_iter()
            .map(|k| {
                let nu = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
                let p = resonance_pair_with(&c, c.gamma_n * (1.0 + nu), tol)?;
                Ok([p.gamma, p.r_plus.re, p.r_plus.im, p.r_minus.re, p.r_minus.im])
            })
            .collect::<floquet4::Result<Vec<_>>>()?;
        let mut table = Table::new(&["gamma", "r_plus_re", "r_plus_im", "r_minus_re", "r_minus_im"]);
        for r in rows {
            table.row(&r.map(f))?;
        }
        files.push(out.csv(&format!("delta_comb_n{n}.csv"), &table)?);
    }
    Ok(files)
}
