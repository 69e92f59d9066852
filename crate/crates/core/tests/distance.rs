use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;
use tomo_core::distance::{
    boundary_distance, build_table, build_table_fast, chord, eikonal_oracle, torus_l2, wrap_angle, z_field, SolverConfig,
    TableMethod,
};
use tomo_core::geometry::{preset, Basis, ConformalField, DomainSpec};
use tomo_core::{Field64, TomoError};

fn basis(modes: usize) -> Arc<Basis<f64>> {
    Arc::new(Basis::new(DomainSpec::default(), modes).unwrap())
}

fn flat() -> Field64 {
    ConformalField::zero(basis(4))
}

fn bump() -> Field64 {
    preset("bump", basis(4)).unwrap()
}

fn wavy() -> Field64 {
    ConformalField::new(basis(6), vec![0.1, 0.05, -0.04, 0.03, 0.02, -0.02]).unwrap()
}

fn coarse() -> SolverConfig {
    SolverConfig { step: 1e-2, ..SolverConfig::default() }
}

#[test]
fn chord_and_wrap() {
    assert!((chord(PI) - 2.0).abs() < 1e-15);
    assert!((chord(PI / 2.0) - SQRT_2).abs() < 1e-15);
    assert!((chord(-PI / 2.0) - SQRT_2).abs() < 1e-15);
    assert_eq!(chord(0.0), 0.0);
    assert!((wrap_angle(-0.5) - (2.0 * PI - 0.5)).abs() < 1e-15);
    assert!((wrap_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    assert_eq!(wrap_angle(0.0), 0.0);
}

#[test]
fn flat_quarter_chord_and_gradient() {
    let d = boundary_distance(&flat(), 0.0, PI / 2.0, &SolverConfig::default()).unwrap();
    assert!((d.gamma - SQRT_2).abs() < 1e-9);
    // d/d(theta_xi) of 2 sin((theta_eta - theta_xi) / 2) and its mirror.
    assert!((d.d_xi + FRAC_1_SQRT_2).abs() < 1e-8, "{}", d.d_xi);
    assert!((d.d_eta - FRAC_1_SQRT_2).abs() < 1e-8, "{}", d.d_eta);
    assert!(d.residual <= 1e-8);
}

#[test]
fn coincident_points_have_zero_distance() {
    let d = boundary_distance(&bump(), 1.0, 1.0, &SolverConfig::default()).unwrap();
    assert_eq!(d.gamma, 0.0);
    assert!(d.v_xi.is_none());
}

#[test]
fn flat_table_is_the_chord_table() {
    let t = build_table(&flat(), 32, &coarse()).unwrap();
    assert_eq!(t.method, TableMethod::Shooting);
    for i in 0..32 {
        for j in 0..32 {
            assert!((t.gamma_at(i, j) - t.chord(i, j)).abs() < 1e-9, "({i},{j})");
        }
    }
    let fast = build_table_fast(&flat(), 32, 24, 1e-2).unwrap();
    assert_eq!(fast.method, TableMethod::FanHermite);
    let worst = (0..32 * 32).map(|id| (fast.gamma[id] - t.gamma[id]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn bump_table_invariants() {
    let f = bump();
    let t = build_table(&f, 32, &coarse()).unwrap();
    assert!(t.check_invariants(&f).is_empty(), "{:?}", t.check_invariants(&f));
    for i in 0..32 {
        assert_eq!(t.gamma_at(i, i), 0.0);
        assert!(t.z[t.idx(i, i)].is_nan());
        for j in 0..32 {
            let id = t.idx(i, j);
            if t.band[id] {
                assert!((t.gamma[id] - t.chord(i, j)).abs() < 1e-8);
            }
            if i != j {
                assert!(t.gamma[id] >= t.chord(i, j) * f.lambda() - 1e-9);
                assert!(t.gamma[id] <= t.chord(i, j) * f.big_lambda() + 1e-9);
            }
        }
    }
    // Positive bump on the axis: opposite nodes are farther than the chord.
    assert!(t.gamma_at(0, 16) > 2.0);
}

#[test]
fn fast_table_tracks_shooting() {
    let f = wavy();
    let exact = build_table(&f, 32, &coarse()).unwrap();
    let fast = build_table_fast(&f, 32, 24, 1e-2).unwrap();
    let worst = (0..32 * 32).map(|id| (fast.gamma[id] - exact.gamma[id]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
    assert_eq!(fast.field_hash, exact.field_hash);
}

#[test]
fn small_tables_are_rejected() {
    assert!(matches!(build_table(&flat(), 16, &coarse()), Err(TomoError::Validation(_))));
    assert!(matches!(build_table_fast(&flat(), 31, 24, 1e-2), Err(TomoError::Validation(_))));
}

#[test]
fn solver_config_validation() {
    for bad in [
        SolverConfig { step: 0.0, ..SolverConfig::default() },
        SolverConfig { fan_rays: 4, ..SolverConfig::default() },
        SolverConfig { tolerance: 1e-6, max_residual: 1e-8, ..SolverConfig::default() },
    ] {
        assert!(matches!(bad.validate(), Err(TomoError::Config(_))), "{bad:?}");
    }
    SolverConfig::default().validate().unwrap();
}

#[test]
fn flat_eikonal_is_first_order_accurate() {
    let f = flat();
    let mut errs = Vec::new();
    for h in [1.0 / 128.0, 1.0 / 256.0] {
        let sol = eikonal_oracle(&f, 0.0, h).unwrap();
        assert_eq!(sol.max_order_violation, 0.0);
        let e = (1..32)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / 32.0;
                (sol.boundary(th) - chord(th)).abs()
            })
            .fold(0.0, f64::max);
        errs.push(e);
    }
    assert!(errs[1] < 1e-2, "{errs:?}");
    assert!(errs[1] <= errs[0] + 1e-12, "{errs:?}");
}

#[test]
fn eikonal_agrees_with_shooting_on_bump() {
    let f = bump();
    let sol = eikonal_oracle(&f, 0.0, 1.0 / 256.0).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..32 {
        let th = 2.0 * PI * j as f64 / 32.0;
        let g = boundary_distance(&f, 0.0, th, &coarse()).unwrap().gamma;
        num += (sol.boundary(th) - g).powi(2);
        den += g * g;
    }
    assert!((num / den).sqrt() < 2e-3, "{}", (num / den).sqrt());
}

#[test]
fn torus_norm_of_constant() {
    let k = 40;
    assert!((torus_l2(&vec![1.0; k * k], k) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn z_differences() {
    let a = z_field(&build_table_fast(&flat(), 32, 24, 1e-2).unwrap());
    let b = z_field(&build_table_fast(&bump(), 32, 24, 1e-2).unwrap());
    assert_eq!(a.l2_diff(&a).unwrap(), 0.0);
    assert_eq!(a.h2_seminorm_diff(&a).unwrap(), 0.0);
    let ab = a.l2_diff(&b).unwrap();
    assert!(ab > 0.0);
    assert!((ab - b.l2_diff(&a).unwrap()).abs() < 1e-12);
    let h1 = a.h1_diff(&b).unwrap();
    let (dx, dy) = (a.dxi_l2_diff(&b).unwrap(), a.deta_l2_diff(&b).unwrap());
    assert!((h1 * h1 - ab * ab - dx * dx - dy * dy).abs() < 1e-12);
    let (lo, hi) = b.off_band_range();
    assert!(lo <= hi && hi <= 2.0f64.ln() + 0.2);
    let c = z_field(&build_table_fast(&flat(), 48, 24, 1e-2).unwrap());
    assert!(matches!(a.l2_diff(&c), Err(TomoError::Validation(_))));
}

#[test]
fn single_precision_flat_table() {
    let b = Arc::new(Basis::<f32>::new(DomainSpec::default(), 4).unwrap());
    let t = build_table_fast(&ConformalField::zero(b), 32, 24, 1e-2).unwrap();
    for i in 0..32 {
        for j in 0..32 {
            assert!((t.gamma_at(i, j) - t.chord(i, j)).abs() < 1e-4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distance_is_symmetric_and_bounded(a in 0.0f64..6.28, b in 0.0f64..6.28) {
        let f = wavy();
        let cfg = coarse();
        let ab = boundary_distance(&f, a, b, &cfg).unwrap();
        let ba = boundary_distance(&f, b, a, &cfg).unwrap();
        prop_assert!((ab.gamma - ba.gamma).abs() < 1e-6);
        let c = chord(b - a);
        prop_assert!(ab.gamma >= f.lambda() * c - 1e-9 && ab.gamma <= f.big_lambda() * c + 1e-9);
        prop_assert!(ab.d_xi.abs() <= 1.0 + 1e-9);
    }
}
