use std::sync::Arc;
use tomo_core::distance::{build_table, build_table_fast, SolverConfig};
use tomo_core::geometry::{preset, Basis, ConformalField, DomainSpec};
use tomo_core::stability::{
    append_ledger, c_l2_diff, forward_check, mukhometov_check, n_l2_diff, read_ledger, z_level_checks, DEFAULT_SLACK,
    MUKHOMETOV,
};
use tomo_core::{Field64, TomoError};

fn basis() -> Arc<Basis<f64>> {
    Arc::new(Basis::new(DomainSpec::default(), 4).unwrap())
}

fn solver() -> SolverConfig {
    SolverConfig { step: 1e-2, ..SolverConfig::default() }
}

fn pair() -> (Field64, Field64) {
    let b = basis();
    (preset("bump", b.clone()).unwrap(), preset("bump-offset", b).unwrap())
}

#[test]
fn identical_fields_give_zero_ratio() {
    let (f, _) = pair();
    let t = build_table_fast(&f, 32, 24, 1e-2).unwrap();
    let r = mukhometov_check(&t, &t, &f, &f).unwrap();
    assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
    assert!(r.passes(0.0));
}

#[test]
fn interior_norms_of_a_scaled_mode() {
    let b = basis();
    let zero = ConformalField::zero(b.clone());
    let f = ConformalField::new(b, vec![0.1, 0.0, 0.0, 0.0]).unwrap();
    let dc = c_l2_diff(&f, &zero);
    let dn = n_l2_diff(&f, &zero);
    assert!((c_l2_diff(&f.scaled(2.0), &zero) - 2.0 * dc).abs() < 1e-12);
    // exp(c) - 1 lies between c and c e^{max c} for c >= 0.
    assert!(dn > dc && dn < dc * 0.1f64.exp());
}

#[test]
fn mukhometov_and_forward_on_presets() {
    let (f1, f2) = pair();
    let t1 = build_table(&f1, 32, &solver()).unwrap();
    let t2 = build_table(&f2, 32, &solver()).unwrap();
    let m = mukhometov_check(&t1, &t2, &f1, &f2).unwrap();
    assert_eq!(m.inequality, MUKHOMETOV);
    assert!(m.lhs > 0.0 && m.passes(DEFAULT_SLACK), "{m:?}");
    let f = forward_check(&t1, &t2, &f1, &f2).unwrap();
    assert!(f.ratio.is_finite() && f.ratio > 0.0);
    assert!((f.meta.lambda - f1.lambda().min(f2.lambda())).abs() < 1e-15);
    let (zi, zf) = z_level_checks(&t1, &t2, &f1, &f2).unwrap();
    assert!(zi.ratio > 0.0 && zf.ratio > 0.0);
    assert_eq!(zi.lhs, zf.rhs);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (f1, f2) = pair();
    let t1 = build_table_fast(&f1, 32, 24, 1e-2).unwrap();
    let t2 = build_table_fast(&f2, 32, 24, 1e-2).unwrap();
    assert!(matches!(mukhometov_check(&t1, &t2, &f2, &f1), Err(TomoError::Validation(_))));
    let t3 = build_table_fast(&f2, 40, 24, 1e-2).unwrap();
    assert!(matches!(mukhometov_check(&t1, &t3, &f1, &f2), Err(TomoError::Validation(_))));
}

#[test]
fn ledger_appends_and_reads_back() {
    let (f1, f2) = pair();
    let t1 = build_table_fast(&f1, 32, 24, 1e-2).unwrap();
    let t2 = build_table_fast(&f2, 32, 24, 1e-2).unwrap();
    let r = mukhometov_check(&t1, &t2, &f1, &f2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ledger.csv");
    append_ledger(&p, &[r.clone()]).unwrap();
    append_ledger(&p, &[r.clone(), r.clone()]).unwrap();
    let rows = read_ledger(&p).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2].ratio, r.ratio);
    assert_eq!(rows[0].hash1, f1.hash());
}
