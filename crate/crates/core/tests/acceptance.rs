//! Acceptance run: every criterion once, then a full rerun compared byte for byte.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde_json::json;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};
use tomo_core::distance::{build_table, eikonal_oracle, z_field, SolverConfig, SourceFan};
use tomo_core::experiments::{prior_pool, run_rate_experiment, RateConfig};
use tomo_core::geodesics::{shoot, CertifyConfig, JacobiCoords};
use tomo_core::geometry::{preset, Basis, ConformalField, DomainSpec};
use tomo_core::io::write_json;
use tomo_core::mcmc::{batch_means, run_chain, ConstantLikelihood, LogLikelihood, PcnConfig, Target};
use tomo_core::rng::{rng_for, sub_seed};
use tomo_core::stability::{mukhometov_check, MUKHOMETOV};
use tomo_core::statmodel::{
    gaussian_coefficients, hellinger, hellinger_sandwich, kl_divergence, variance_proxy, PriorSpec, ZInterpolator,
};
use tomo_core::{Field64, Table64, Vec2};

const MASTER_SEED: u64 = 20_240_611;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn basis(modes: usize) -> Arc<Basis<f64>> {
    Arc::new(Basis::new(DomainSpec::default(), modes).unwrap())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn save(dir: &Path, id: usize, value: serde_json::Value) {
    write_json(&dir.join(format!("criterion{id}.json")), &value).unwrap();
}

fn flat_exactness(dir: &Path) -> Outcome {
    let t0 = Instant::now();
    let f = ConformalField::zero(basis(4));
    let t = build_table(&f, 64, &SolverConfig::default()).unwrap();
    let elapsed = t0.elapsed();
    let mut worst = 0.0f64;
    for i in 0..64 {
        for j in 0..64 {
            let exact = 2.0 * ((t.theta(j) - t.theta(i)) / 2.0).sin().abs();
            worst = worst.max((t.gamma_at(i, j) - exact).abs());
        }
    }
    save(dir, 1, json!({ "k": 64, "max_abs_error": worst }));
    Outcome {
        id: 1,
        name: "flat exactness",
        pass: worst < 1e-6 && elapsed < Duration::from_secs(10),
        detail: format!("max |Gamma - chord| = {worst:.2e} (< 1e-6), {:.1} s (< 10 s)", secs(elapsed)),
    }
}

fn oracle_equivalence(dir: &Path) -> Outcome {
    let t0 = Instant::now();
    let b = basis(4);
    let cfg = SolverConfig::default();
    let mut errs = Vec::new();
    for name in ["bump", "bump-weak", "bump-offset"] {
        let f = preset(name, b.clone()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for s in 0..4 {
            let theta = 2.0 * PI * (s as f64 + 0.125) / 4.0;
            let sol = eikonal_oracle(&f, theta, 1.0 / 512.0).unwrap();
            let fan = SourceFan::new(&f, theta, cfg.fan_rays, cfg.step).unwrap();
            for j in 1..64 {
                let target = theta + 2.0 * PI * j as f64 / 64.0;
                let g = fan.solve(target, &cfg).unwrap().gamma;
                num += (sol.boundary(target) - g).powi(2);
                den += g * g;
            }
        }
        errs.push((name, (num / den).sqrt()));
    }
    let elapsed = t0.elapsed();
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    save(dir, 2, json!({ "h": 1.0 / 512.0, "relative_l2": errs.iter().map(|(n, e)| json!({ "preset": n, "error": e })).collect::<Vec<_>>() }));
    Outcome {
        id: 2,
        name: "shooting vs fast marching",
        pass: worst < 1e-3 && elapsed < Duration::from_secs(300),
        detail: format!(
            "relative L2 {} (< 1e-3), {:.1} s (< 300 s)",
            errs.iter().map(|(n, e)| format!("{n} {e:.2e}")).collect::<Vec<_>>().join(", "),
            secs(elapsed)
        ),
    }
}

/// Shared pool: prior draws on the full basis with their K = 64 tables.
struct Pool {
    fields: Vec<Field64>,
    tables: Vec<Table64>,
    spec: PriorSpec,
    table_time: Duration,
}

fn pool(seed: u64) -> Pool {
    let spec = PriorSpec::default();
    let b = basis(spec.num_modes);
    let t0 = Instant::now();
    let fields: Vec<Field64> = prior_pool(&spec, &b, 10, sub_seed(seed, &[3])).unwrap().into_iter().map(|d| d.field).collect();
    let tables = fields.iter().map(|f| build_table(f, 64, &SolverConfig::default()).unwrap()).collect();
    Pool { fields, tables, spec, table_time: t0.elapsed() }
}

fn pairs(count: usize, pool: usize) -> Vec<(usize, usize)> {
    (0..pool).flat_map(|i| (i + 1..pool).map(move |j| (i, j))).take(count).collect()
}

fn boundary_derivative(dir: &Path, p: &Pool) -> Outcome {
    let sups: Vec<f64> = p.tables.iter().map(|t| t.dgamma_dxi.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let worst = sups.iter().copied().fold(0.0, f64::max);
    save(dir, 3, json!({ "k": 64, "sup_abs_dgamma": sups }));
    Outcome {
        id: 3,
        name: "boundary derivative bound",
        pass: worst <= 1.0 + 1e-3,
        detail: format!("sup |d_xi Gamma| over 10 prior draws = {worst:.6} (<= 1 + 1e-3)"),
    }
}

fn mukhometov(dir: &Path, p: &Pool) -> Outcome {
    let t0 = Instant::now();
    let r64: Vec<f64> = pairs(20, 10)
        .into_iter()
        .map(|(a, b)| mukhometov_check(&p.tables[a], &p.tables[b], &p.fields[a], &p.fields[b]).unwrap().ratio)
        .collect();
    let big: Vec<Table64> = p.fields[..3].iter().map(|f| build_table(f, 128, &SolverConfig::default()).unwrap()).collect();
    let r128: Vec<f64> = pairs(3, 3)
        .into_iter()
        .map(|(a, b)| mukhometov_check(&big[a], &big[b], &p.fields[a], &p.fields[b]).unwrap().ratio)
        .collect();
    let elapsed = t0.elapsed() + p.table_time;
    let (m64, m128) = (r64.iter().copied().fold(0.0, f64::max), r128.iter().copied().fold(0.0, f64::max));
    save(dir, 4, json!({ "inequality": MUKHOMETOV, "ratios_k64": r64, "ratios_k128": r128 }));
    Outcome {
        id: 4,
        name: "Mukhometov stability",
        pass: m64 <= 1.02 && m128 <= 1.005 && elapsed < Duration::from_secs(1200),
        detail: format!(
            "max ratio {m64:.4} on 20 pairs at K=64 (<= 1.02), {m128:.4} on 3 pairs at K=128 (<= 1.005), {:.0} s (< 1200 s)",
            secs(elapsed)
        ),
    }
}

fn jacobi_growth(dir: &Path, p: &Pool, seed: u64) -> Outcome {
    let mut rng = rng_for(seed, &[5]);
    let curv: Vec<f64> = p.fields.iter().map(|f| f.curvature_sup(2)).collect();
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for k in 0..100 {
        let fi = k % p.fields.len();
        let a = rng.gen_range(0.0..2.0 * PI);
        let phi = rng.gen_range(-1.5..1.5);
        let xi = Vec2::from_angle(a);
        let v = Vec2::from_angle(a + PI + phi);
        let mut g = || rng.sample::<f64, _>(StandardNormal);
        let (j0, jd0) = (Vec2::new(g(), g()), Vec2::new(g(), g()));
        let t = shoot(&p.fields[fi], xi, v, 1e-3).unwrap();
        let jc = JacobiCoords::from_initial(t.log_n[0], t.velocity(0), j0, jd0);
        let (a0, b0) = jc.norms_sq(0.0, &t.normal_solutions[0]);
        for i in 0..t.len() {
            let (aa, bb) = jc.norms_sq(t.times[i], &t.normal_solutions[i]);
            let ratio = (aa + bb) / (((1.0 + curv[fi]) * t.times[i]).exp() * (a0 + b0));
            worst_ratio = worst_ratio.max(ratio);
            if ratio > 1.0 {
                violations += 1;
            }
        }
    }
    save(dir, 5, json!({ "triples": 100, "violations": violations, "max_ratio": worst_ratio, "curvature_sup": curv }));
    Outcome {
        id: 5,
        name: "Jacobi growth",
        pass: violations == 0,
        detail: format!("{violations} violations on 100 triples, largest lhs/rhs {worst_ratio:.4}"),
    }
}

/// Monte-Carlo `E[log p1/p2]`, Hellinger distance and `E[(log p1/p2)^2]` under the data law of field 1.
fn mc_functionals(t1: &Table64, t2: &Table64, samples: usize, seed: u64) -> (f64, f64, f64) {
    let (i1, i2) = (ZInterpolator::new(t1), ZInterpolator::new(t2));
    let mut rng = rng_for(seed, &[]);
    let (mut s1, mut s2, mut rho) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = rng.gen_range(0.0..2.0 * PI);
        let y = rng.gen_range(0.0..2.0 * PI);
        let eps: f64 = rng.sample(StandardNormal);
        let (z1, z2) = (i1.z(x, y), i2.z(x, y));
        let z = z1 + eps;
        let l = 0.5 * ((z - z2).powi(2) - (z - z1).powi(2));
        s1 += l;
        s2 += l * l;
        rho += (-0.5 * l).exp();
    }
    let n = samples as f64;
    (s1 / n, (2.0 * (1.0 - rho / n)).max(0.0).sqrt(), s2 / n)
}

fn information_distances(dir: &Path, p: &Pool, seed: u64) -> Outcome {
    let z: Vec<_> = p.tables.iter().map(z_field).collect();
    let all = pairs(20, 10);
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (k, &(a, b)) in all.iter().take(5).enumerate() {
        let closed = [
            kl_divergence(&z[a], &z[b]).unwrap(),
            hellinger(&z[a], &z[b]).unwrap(),
            variance_proxy(&z[a], &z[b]).unwrap(),
        ];
        let (kl, h, v) = mc_functionals(&p.tables[a], &p.tables[b], 1_000_000, sub_seed(seed, &[6, k as u64]));
        for (c, m) in closed.iter().zip([kl, h, v]) {
            worst = worst.max((c - m).abs());
        }
        rows.push(json!({ "pair": [a, b], "closed": closed, "monte_carlo": [kl, h, v] }));
    }
    let domain = *p.fields[0].domain();
    let sandwiches: Vec<_> =
        all.iter().map(|&(a, b)| hellinger_sandwich(&z[a], &z[b], p.spec.trunc_m, &domain).unwrap()).collect();
    let held = sandwiches.iter().filter(|s| s.holds()).count();
    save(
        dir,
        6,
        json!({
            "functionals": rows,
            "sandwich": sandwiches.iter().map(|s| [s.lower, s.h2, s.upper]).collect::<Vec<_>>(),
            "m": p.spec.trunc_m,
        }),
    );
    Outcome {
        id: 6,
        name: "KL / Hellinger / V closed forms",
        pass: worst < 1e-2 && held == all.len(),
        detail: format!("max |closed - MC| = {worst:.2e} at 1e6 samples (< 1e-2), sandwich holds on {held}/{} pairs", all.len()),
    }
}

/// Gaussian pseudo-likelihood in the coefficients.
struct Quadratic;

impl LogLikelihood for Quadratic {
    fn log_likelihood(&self, f: &ConformalField<f64>) -> tomo_core::Result<f64> {
        let c = f.coefficients();
        Ok(-0.5 * ((c[0] - 0.1) / 0.1).powi(2) - 0.5 * ((c[1] + 0.02) / 0.03).powi(2))
    }
}

fn sampler(dir: &Path, seed: u64) -> Outcome {
    let b = basis(2);
    let spec = PriorSpec {
        num_modes: 2,
        scale: 0.4,
        certify: CertifyConfig { step: 0.05, ..CertifyConfig::coarse() },
        ..PriorSpec::default()
    };
    let sigmas = spec.mode_stddevs(&b).unwrap();
    let trunc = spec.truncation();

    // Reference: direct rejection sampling of the truncated prior.
    let mut rng = rng_for(seed, &[7, 0]);
    let mut reference: Vec<Vec<f64>> = Vec::new();
    let mut tried = 0;
    while reference.len() < 10_000 {
        tried += 1;
        let f = ConformalField::new(b.clone(), gaussian_coefficients(&sigmas, &mut rng)).unwrap();
        if trunc.check(&f).unwrap().is_inside() {
            reference.push(f.coefficients().to_vec());
        }
    }
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &trunc };
    let cfg = PcnConfig { n_steps: 101_000, burn_in: 1000, ..PcnConfig::default() };
    let chain = run_chain(&[0.0, 0.0], &target, &cfg, sub_seed(seed, &[7, 1])).unwrap();
    let mut z_scores = Vec::new();
    for j in 0..2 {
        let bm = batch_means(&chain.samples.iter().map(|s| s[j]).collect::<Vec<_>>());
        let r: Vec<f64> = reference.iter().map(|s| s[j]).collect();
        let n = r.len() as f64;
        let mean = r.iter().sum::<f64>() / n;
        let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        z_scores.push((bm.mean - mean) / (bm.stderr.powi(2) + var / n).sqrt());
    }
    let moments_ok = z_scores.iter().all(|z| z.abs() < 3.0);

    // Detailed balance: transition counts between cells of a 3 x 3 partition.
    let target = Target { likelihood: &Quadratic, ..target };
    let cfg = PcnConfig { n_steps: 51_000, burn_in: 1000, ..PcnConfig::default() };
    let out = run_chain(&[0.0, 0.0], &target, &cfg, sub_seed(seed, &[7, 2])).unwrap();
    let edges: Vec<[f64; 2]> = (0..2)
        .map(|j| {
            let mut x: Vec<f64> = out.samples.iter().map(|s| s[j]).collect();
            x.sort_by(f64::total_cmp);
            [x[x.len() / 3], x[2 * x.len() / 3]]
        })
        .collect();
    let cell = |s: &[f64]| -> usize {
        (0..2).map(|j| (s[j] > edges[j][0]) as usize + (s[j] > edges[j][1]) as usize).fold(0, |acc, c| 3 * acc + c)
    };
    let mut counts = [[0usize; 9]; 9];
    for w in out.samples.windows(2) {
        let (a, c) = (cell(&w[0]), cell(&w[1]));
        if a != c {
            counts[a][c] += 1;
        }
    }
    let (mut chi2, mut df) = (0.0, 0usize);
    for a in 0..9 {
        for c in a + 1..9 {
            let n = counts[a][c] + counts[c][a];
            if n >= 10 {
                chi2 += (counts[a][c] as f64 - counts[c][a] as f64).powi(2) / n as f64;
                df += 1;
            }
        }
    }
    let limit = df as f64 + 4.0 * (2.0 * df as f64).sqrt();
    let balance_ok = df > 0 && chi2 < limit;
    save(
        dir,
        7,
        json!({
            "z_scores": z_scores,
            "reference_draws": reference.len(),
            "reference_attempts": tried,
            "chain_acceptance": chain.acceptance_rate,
            "flux_chi2": chi2,
            "flux_df": df,
            "counts": counts,
        }),
    );
    Outcome {
        id: 7,
        name: "prior invariance and detailed balance",
        pass: moments_ok && balance_ok,
        detail: format!(
            "mean z-scores [{:.2}, {:.2}] (|z| < 3), flux chi2 {chi2:.1} on {df} cell pairs (< {limit:.1})",
            z_scores[0], z_scores[1]
        ),
    }
}

fn contraction(dir: &Path, seed: u64) -> Outcome {
    let cfg = RateConfig::default();
    let truth = preset("two-lobe", basis(cfg.prior.num_modes)).unwrap();
    let r = run_rate_experiment(&truth, &cfg, sub_seed(seed, &[8])).unwrap();
    tomo_core::io::write_rate_report(dir, "criterion8", &r).unwrap();
    Outcome {
        id: 8,
        name: "posterior contraction",
        pass: r.strictly_decreasing() && r.fitted_slope <= -0.10,
        detail: format!(
            "mean errors {:?} at N = {:?}, slope {:.3} (<= -0.10), {} flagged",
            r.errors.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
            r.n_values,
            r.fitted_slope,
            r.flagged
        ),
    }
}

fn run_all(seed: u64, dir: &Path) -> Vec<Outcome> {
    let mut out = vec![flat_exactness(dir), oracle_equivalence(dir)];
    let p = pool(seed);
    out.push(boundary_derivative(dir, &p));
    out.push(mukhometov(dir, &p));
    out.push(jacobi_growth(dir, &p, seed));
    out.push(information_distances(dir, &p, seed));
    out.push(sampler(dir, seed));
    out.push(contraction(dir, seed));
    out
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn main() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut outcomes = run_all(MASTER_SEED, first.path());
    for o in &outcomes {
        println!("criterion {} [{}] {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    run_all(MASTER_SEED, second.path());
    let (a, b) = (files(first.path()), files(second.path()));
    let differing: Vec<&str> =
        a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let pass = a.len() == b.len() && !a.is_empty() && differing.is_empty();
    let o = Outcome {
        id: 9,
        name: "reproducibility",
        pass,
        detail: format!("{} result files, {} differ on rerun with the same master seed", a.len(), differing.len()),
    };
    println!("criterion {} [{}] {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    outcomes.push(o);
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
