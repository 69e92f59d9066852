use crate::config::RunConfig;
use crate::CliError;
use serde::Serialize;
use std::path::Path;
use tomo_core::distance::{build_table, eikonal_oracle, z_field};
use tomo_core::experiments::{prior_pool, run_rate_experiment, stability_batch};
use tomo_core::geodesics::certify_simplicity;
use tomo_core::geometry::{ConformalField, FieldDocument};
use tomo_core::io::{write_chain, write_dataset, write_json, write_rate_report, write_table_binary, write_table_csv};
use tomo_core::mcmc::{l2_error, posterior_mean, run_chain, TableLikelihood, Target};
use tomo_core::rng::{sub_seed, TAG_CHAIN, TAG_DATA};
use tomo_core::stability::{append_ledger, MUKHOMETOV};
use tomo_core::statmodel::{sample_dataset, SampleOptions, ZMode};
use tomo_core::Table64;

#[derive(Serialize)]
struct FieldSummary {
    hash: String,
    document: FieldDocument,
    lambda: f64,
    big_lambda: f64,
    c3_bound: f64,
}

fn field_summary(f: &ConformalField<f64>) -> FieldSummary {
    FieldSummary {
        hash: f.hash().to_string(),
        document: f.document(),
        lambda: f.lambda(),
        big_lambda: f.big_lambda(),
        c3_bound: f.c3_bound(),
    }
}

#[derive(Serialize)]
struct OracleRow {
    source: usize,
    relative_l2: f64,
}

#[derive(Serialize)]
struct ForwardSummary {
    field_hash: String,
    k: usize,
    certified_ell: f64,
    certified_big_l: f64,
    max_residual: f64,
    invariant_violations: Vec<String>,
    oracle: Vec<OracleRow>,
}

/// Relative L2 distance between a table row and the fast-marching boundary values.
fn oracle_row(field: &ConformalField<f64>, table: &Table64, source: usize, h: f64) -> Result<f64, CliError> {
    let sol = eikonal_oracle(field, table.theta(source), h)?;
    let (mut num, mut den) = (0.0, 0.0);
    for j in (0..table.k).filter(|j| *j != source) {
        let g = table.gamma_at(source, j);
        num += (sol.boundary(table.theta(j)) - g).powi(2);
        den += g * g;
    }
    Ok((num / den).sqrt())
}

pub fn forward(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let basis = cfg.basis()?;
    let field = cfg.build_field(&basis)?;
    write_json(&out.join("field.json"), &field_summary(&field))?;
    let cert = certify_simplicity(&field, &cfg.certify)?;
    write_json(&out.join("certificate.json"), &cert)?;
    if !cert.is_simple {
        return Err(CliError::NonSimple(format!(
            "certification failed (min Jacobi determinant {:e})",
            cert.min_jacobi_det
        )));
    }
    let table = build_table(&field, cfg.k, &cfg.solver)?;
    write_table_csv(&out.join("table.csv"), &table)?;
    write_table_binary(out, "table", &table)?;
    let oracle = match cfg.grid_h {
        Some(h) => (0..4)
            .map(|q| {
                let source = q * cfg.k / 4;
                oracle_row(&field, &table, source, h).map(|relative_l2| OracleRow { source, relative_l2 })
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let summary = ForwardSummary {
        field_hash: field.hash().to_string(),
        k: table.k,
        certified_ell: cert.certified_ell(),
        certified_big_l: cert.certified_big_l(),
        max_residual: table.residuals.iter().copied().fold(0.0, f64::max),
        invariant_violations: table.check_invariants(&field),
        oracle,
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "forward: K = {}, ell = {:.4}, L = {:.4}, max residual {:.2e}, {} invariant violations",
        table.k,
        summary.certified_ell,
        summary.certified_big_l,
        summary.max_residual,
        summary.invariant_violations.len()
    );
    if !summary.invariant_violations.is_empty() {
        return Err(CliError::Solver(summary.invariant_violations.join("; ")));
    }
    Ok(())
}

pub fn stability(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let basis = cfg.basis()?;
    let n = cfg.stability.pairs;
    let draws = prior_pool(&cfg.prior, &basis, 2 * n, cfg.seed())?;
    let fields: Vec<_> = draws.into_iter().map(|d| d.field).collect();
    let pairs: Vec<_> = (0..n).map(|i| (2 * i, 2 * i + 1)).collect();
    let batch = stability_batch(&fields, &pairs, cfg.stability.k, &cfg.solver)?;
    let ledger = out.join("stability.csv");
    if ledger.exists() {
        std::fs::remove_file(&ledger)?;
    }
    append_ledger(&ledger, &batch.reports)?;
    write_json(&out.join("stability.json"), &batch.reports)?;
    println!("stability: max {MUKHOMETOV} ratio {:.4} over {n} pairs at K = {}", batch.max_ratio(MUKHOMETOV), cfg.stability.k);
    Ok(())
}

#[derive(Serialize)]
struct InvertSummary {
    truth_hash: String,
    n_obs: usize,
    l2_error: f64,
    acceptance_rate: f64,
    final_step_size: f64,
    min_ess: f64,
    warning: Option<String>,
    /// `||Z_mean - Z_truth||_{L2}` on a shooting table at the configured K, when the mean certifies.
    mean_z_l2: Option<f64>,
}

pub fn invert(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let basis = cfg.basis()?;
    let truth = cfg.build_field(&basis)?;
    let seed = cfg.seed();
    let table = build_table(&truth, cfg.k, &cfg.solver)?;
    let mode = if cfg.invert.exact_data { ZMode::Exact(cfg.solver) } else { ZMode::Fast };
    let data = sample_dataset(
        &truth,
        &table,
        cfg.invert.n_obs,
        sub_seed(seed, &[TAG_DATA]),
        &SampleOptions { mode, noiseless: false },
    )?;
    write_dataset(out, "dataset", &data)?;
    let sigmas = cfg.prior.mode_stddevs(&basis)?;
    let trunc = cfg.prior.truncation();
    let like = TableLikelihood { data, k: cfg.invert.likelihood_k, rays: cfg.invert.likelihood_rays, step: 1e-2 };
    let target = Target { basis: &basis, sigmas: &sigmas, likelihood: &like, truncation: &trunc };
    let chain = run_chain(&vec![0.0; basis.len()], &target, &cfg.invert.chain, sub_seed(seed, &[TAG_CHAIN]))?;
    write_chain(out, "chain", &chain)?;
    let mean = posterior_mean(&chain.samples, &basis)?;
    write_json(&out.join("posterior_mean.json"), &field_summary(&mean))?;
    let mean_z_l2 = if certify_simplicity(&mean, &cfg.certify)?.is_simple {
        let t = build_table(&mean, cfg.k, &cfg.solver)?;
        Some(z_field(&t).l2_diff(&z_field(&table))?)
    } else {
        None
    };
    let summary = InvertSummary {
        truth_hash: truth.hash().to_string(),
        n_obs: cfg.invert.n_obs,
        l2_error: l2_error(&mean, &truth)?,
        acceptance_rate: chain.acceptance_rate,
        final_step_size: chain.final_step_size,
        min_ess: chain.ess.iter().copied().fold(f64::INFINITY, f64::min),
        warning: chain.warning.clone(),
        mean_z_l2,
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "invert: N = {}, L2 error {:.4}, acceptance {:.3}{}",
        summary.n_obs,
        summary.l2_error,
        summary.acceptance_rate,
        summary.warning.as_deref().map(|w| format!(" (warning: {w})")).unwrap_or_default()
    );
    Ok(())
}

pub fn rate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let basis = cfg.basis()?;
    let truth = cfg.build_field(&basis)?;
    let report = run_rate_experiment(&truth, &cfg.rate, cfg.seed())?;
    write_rate_report(out, "rate", &report)?;
    println!(
        "rate: errors {:?}, slope {:.3} (r2 {:.3}), reference {:.3}, {} flagged",
        report.errors.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
        report.fitted_slope,
        report.r_squared,
        report.reference_slope,
        report.flagged
    );
    Ok(())
}
