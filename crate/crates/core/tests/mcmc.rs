use rand::Rng as _;
use rand_distr::StandardNormal;
use std::sync::Arc;
use tomo_core::distance::build_table_fast;
use tomo_core::geometry::{preset, Basis, ConformalField, DomainSpec};
use tomo_core::mcmc::{
    batch_means, l2_error, pcn_step, posterior_mean, run_chain, split_rhat, ChainState, ConstantLikelihood, LogLikelihood,
    PcnConfig, StepOutcome, TableLikelihood, Target, Unconstrained,
};
use tomo_core::rng::rng_for;
use tomo_core::statmodel::{log_likelihood, sample_dataset, PriorSpec, SampleOptions, ZInterpolator, ZMode};
use tomo_core::{TomoError, Vec2};

fn basis(modes: usize) -> Arc<Basis<f64>> {
    Arc::new(Basis::new(DomainSpec::default(), modes).unwrap())
}

#[test]
fn vanishing_step_keeps_the_state() {
    let b = basis(2);
    let sigmas = [0.1, 0.05];
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &Unconstrained };
    let mut state =
        ChainState { coefficients: vec![0.03, -0.02], log_like: 0.0, step_size: 1e-12, accepted: 0, proposed: 0 };
    let mut rng = rng_for(1, &[0]);
    for _ in 0..20 {
        assert_eq!(pcn_step(&mut state, &target, &mut rng).unwrap(), StepOutcome::Accepted);
    }
    assert!((state.coefficients[0] - 0.03).abs() < 1e-10 && (state.coefficients[1] + 0.02).abs() < 1e-10);
    assert_eq!((state.accepted, state.proposed), (20, 20));
}

#[test]
fn one_step_past_burn_in_gives_one_sample() {
    let b = basis(2);
    let sigmas = [0.1, 0.05];
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &Unconstrained };
    let cfg = PcnConfig { n_steps: 11, burn_in: 10, adapt_window: 5, ..PcnConfig::default() };
    let out = run_chain(&[0.0, 0.0], &target, &cfg, 3).unwrap();
    assert_eq!(out.samples.len(), 1);
    assert_eq!(out.step_schedule.len(), 2);
}

#[test]
fn chains_are_deterministic_per_seed() {
    let b = basis(2);
    let sigmas = [0.1, 0.05];
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &Unconstrained };
    let cfg = PcnConfig { n_steps: 200, burn_in: 50, ..PcnConfig::default() };
    let a = run_chain(&[0.0, 0.0], &target, &cfg, 8).unwrap();
    assert_eq!(a, run_chain(&[0.0, 0.0], &target, &cfg, 8).unwrap());
    assert_ne!(a.samples, run_chain(&[0.0, 0.0], &target, &cfg, 9).unwrap().samples);
}

#[test]
fn config_and_input_validation() {
    for bad in [
        PcnConfig { n_steps: 10, burn_in: 10, ..PcnConfig::default() },
        PcnConfig { thinning: 0, ..PcnConfig::default() },
        PcnConfig { initial_step: 1.0, ..PcnConfig::default() },
        PcnConfig { target_accept: 0.0, ..PcnConfig::default() },
    ] {
        assert!(matches!(bad.validate(), Err(TomoError::Config(_))), "{bad:?}");
    }
    let b = basis(2);
    let sigmas = [0.1, 0.05];
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &Unconstrained };
    let r = run_chain(&[0.0], &target, &PcnConfig::default(), 1);
    assert!(matches!(r, Err(TomoError::Validation(_))));
    let trunc = PriorSpec::default().truncation();
    let t2 = Target { truncation: &trunc, ..target };
    let r = run_chain(&[-3.0, 0.0], &t2, &PcnConfig::default(), 1);
    assert!(matches!(r, Err(TomoError::Validation(_))));
}

#[test]
fn unconstrained_prior_chain_matches_gaussian_moments() {
    let b = basis(2);
    let sigmas = [0.2, 0.1];
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &ConstantLikelihood, truncation: &Unconstrained };
    let cfg = PcnConfig { n_steps: 6000, burn_in: 1000, ..PcnConfig::default() };
    let out = run_chain(&[0.0, 0.0], &target, &cfg, 21).unwrap();
    // Constant likelihood: every proposal is accepted.
    assert_eq!(out.acceptance_rate, 1.0);
    for (j, s) in sigmas.iter().enumerate() {
        let x: Vec<f64> = out.samples.iter().map(|c| c[j]).collect();
        let bm = batch_means(&x);
        assert!(bm.mean.abs() < 3.0 * bm.stderr, "coefficient {j}: mean {} se {}", bm.mean, bm.stderr);
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let bv = batch_means(&sq);
        assert!((bv.mean - s * s).abs() < 3.0 * bv.stderr, "coefficient {j}: second moment {}", bv.mean);
    }
}

#[test]
fn posterior_mean_examples() {
    let b = basis(3);
    let theta = vec![0.1, -0.05, 0.02];
    let single = posterior_mean(std::slice::from_ref(&theta), &b).unwrap();
    assert_eq!(single.coefficients(), &theta[..]);
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    let m = posterior_mean(&[theta, neg], &b).unwrap();
    assert!(m.coefficients().iter().all(|c| *c == 0.0));
    assert!(matches!(posterior_mean(&[], &b), Err(TomoError::Validation(_))));
}

/// `||phi_j||_{L2}` by polar Gauss-free midpoint quadrature of the basis function.
fn mode_norm(b: &Basis<f64>, j: usize) -> f64 {
    let (nr, nt) = (600, 600);
    let r0 = b.domain().inner_radius;
    let mut s = 0.0;
    for a in 0..nr {
        let r = r0 * (a as f64 + 0.5) / nr as f64;
        for t in 0..nt {
            let th = 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / nt as f64;
            s += b.eval_modes(Vec2::from_angle(th) * r)[j].v.powi(2) * r;
        }
    }
    (s * (r0 / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64)).sqrt()
}

#[test]
fn l2_error_examples() {
    let b = basis(4);
    let zero = ConformalField::zero(b.clone());
    assert_eq!(l2_error(&zero, &zero).unwrap(), 0.0);
    for j in [0, 1, 3] {
        let mut c = vec![0.0; 4];
        c[j] = 1.0;
        let f = ConformalField::new(b.clone(), c).unwrap();
        let exact = mode_norm(&b, j);
        let e = l2_error(&f, &zero).unwrap();
        assert!((e - exact).abs() < 1e-3 * exact, "mode {j}: {e} vs {exact}");
    }
    let mut rng = rng_for(4, &[0]);
    for _ in 0..10 {
        let mut draw = || {
            let c: Vec<f64> = (0..4).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
            ConformalField::new(b.clone(), c).unwrap()
        };
        let (x, y, z) = (draw(), draw(), draw());
        let (xy, yz, xz) = (l2_error(&x, &y).unwrap(), l2_error(&y, &z).unwrap(), l2_error(&x, &z).unwrap());
        assert!(xz <= xy + yz + 1e-12);
    }
    let other = Arc::new(Basis::new(DomainSpec::new(0.6).unwrap(), 4).unwrap());
    assert!(l2_error(&ConformalField::zero(other), &zero).is_err());
}

#[test]
fn batch_means_on_known_processes() {
    let mut rng = rng_for(6, &[0]);
    let n = 40_000;
    let iid: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let bm = batch_means(&iid);
    assert!((bm.stderr * (n as f64).sqrt() - 1.0).abs() < 0.25, "{bm:?}");
    assert!(bm.ess > 0.6 * n as f64);
    // AR(1) with rho = 0.9: integrated autocorrelation time (1 + rho) / (1 - rho) = 19.
    let mut x = 0.0;
    let ar: Vec<f64> = (0..n)
        .map(|_| {
            x = 0.9 * x + (1.0f64 - 0.81).sqrt() * rng.sample::<f64, _>(StandardNormal);
            x
        })
        .collect();
    let ess = batch_means(&ar).ess;
    let expect = n as f64 / 19.0;
    assert!(ess > 0.5 * expect && ess < 2.0 * expect, "{ess} vs {expect}");
}

#[test]
fn split_rhat_separates_mixed_and_stuck_chains() {
    let mut rng = rng_for(7, &[0]);
    let mut chain = |shift: f64| (0..2000).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>();
    let mixed = [chain(0.0), chain(0.0)];
    assert!(split_rhat(&mixed) < 1.01);
    let stuck = [chain(0.0), chain(2.0)];
    assert!(split_rhat(&stuck) > 1.1);
    assert!(split_rhat(&[vec![1.0]]).is_nan());
}

#[test]
fn table_likelihood_uses_the_fast_table() {
    let b = basis(3);
    let truth = preset("bump-offset", b.clone()).unwrap();
    let t = build_table_fast(&truth, 32, 24, 1e-2).unwrap();
    let data = sample_dataset(&truth, &t, 50, 2, &SampleOptions { mode: ZMode::Fast, noiseless: false }).unwrap();
    let ip = ZInterpolator::new(&t);
    let expect = log_likelihood(|x, y| ip.z(x, y), &data);
    let lik = TableLikelihood::new(data);
    assert_eq!(lik.log_likelihood(&truth).unwrap(), expect);
}

/// Well-specified problem: truth in the prior support, 1000 fast-mode records.
fn small_problem(modes: usize, seed: u64) -> (Arc<Basis<f64>>, PriorSpec, TableLikelihood) {
    let b = basis(modes);
    let truth = preset("bump-offset", b.clone()).unwrap();
    let t = build_table_fast(&truth, 64, 48, 5e-3).unwrap();
    let data = sample_dataset(&truth, &t, 1000, seed, &SampleOptions { mode: ZMode::Fast, noiseless: false }).unwrap();
    let spec = PriorSpec { num_modes: modes, scale: 0.3, ..PriorSpec::default() };
    (b, spec, TableLikelihood::new(data))
}

#[test]
fn eight_mode_chain_reaches_fifty_effective_samples() {
    let (b, spec, lik) = small_problem(8, 31);
    let sigmas = spec.mode_stddevs(&b).unwrap();
    let trunc = spec.truncation();
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &lik, truncation: &trunc };
    let cfg = PcnConfig { n_steps: 20_000, burn_in: 2000, ..PcnConfig::default() };
    let out = run_chain(&[0.0; 8], &target, &cfg, 5).unwrap();
    assert!(out.warning.is_none(), "{:?}", out.warning);
    for (j, e) in out.ess.iter().enumerate() {
        assert!(*e >= 50.0, "coefficient {j}: ESS {e}");
    }
}

#[test]
fn overdispersed_chains_agree() {
    let (b, spec, lik) = small_problem(3, 32);
    let sigmas = spec.mode_stddevs(&b).unwrap();
    let trunc = spec.truncation();
    let target = Target { basis: &b, sigmas: &sigmas, likelihood: &lik, truncation: &trunc };
    let cfg = PcnConfig { n_steps: 3000, burn_in: 500, ..PcnConfig::default() };
    let a = run_chain(&[0.2, 0.1, 0.05], &target, &cfg, 1).unwrap();
    let c = run_chain(&[-0.2, -0.1, -0.05], &target, &cfg, 2).unwrap();
    for j in 0..3 {
        let pick = |o: &tomo_core::mcmc::ChainOutput| o.samples.iter().map(|s| s[j]).collect::<Vec<f64>>();
        let r = split_rhat(&[pick(&a), pick(&c)]);
        assert!(r < 1.1, "coefficient {j}: split R-hat {r}");
    }
}
