mod common;

use common::stable_filter;
use multistep_core::theory::{closed_form_h2, f1h, f2h, loss, loss_table, best_combinations};
use multistep_core::{Method, UnitRootArModel};
use proptest::prelude::*;

fn alpha_at(model: &UnitRootArModel, j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    model.stationary().get(j - 1).copied().unwrap_or(0.0)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_step_closed_forms(alpha in stable_filter(4), s2 in 0.2f64..5.0) {
        let model = UnitRootArModel::from_stationary(alpha, s2).unwrap();
        for k in model.p1().max(2)..=6 {
            let f1 = f1h(&model, 2, k).unwrap();
            let f2 = f2h(&model, 2, k).unwrap();
            prop_assert!(rel_close(f1, closed_form_h2(&model, k, Method::PlugIn).unwrap(), 1e-8));
            prop_assert!(rel_close(f2, closed_form_h2(&model, k, Method::Direct).unwrap(), 1e-8));
            let a = alpha_at(&model, k - 1);
            prop_assert!(rel_close(f2 - f1, (1.0 - a * a) * s2, 1e-8));
        }
    }

    #[test]
    fn longer_horizons_widen_the_gap(alpha in stable_filter(4)) {
        let model = UnitRootArModel::from_stationary(alpha, 1.0).unwrap();
        for k in model.p1().max(2)..=6 {
            let base = f2h(&model, 2, k).unwrap() - f1h(&model, 2, k).unwrap();
            prop_assert!(base > 0.0);
            for h in 3..=6 {
                let gap = f2h(&model, h, k).unwrap() - f1h(&model, h, k).unwrap();
                prop_assert!(gap >= base - 1e-10, "h {} k {}: {} < {}", h, k, gap, base);
            }
        }
    }

    #[test]
    fn losses_are_infinite_exactly_below_minimal_orders(alpha in stable_filter(3), h in 1usize..=5) {
        let model = UnitRootArModel::from_stationary(alpha, 1.0).unwrap();
        let ph = model_ph(&model, h);
        for l in loss_table(&model, h, 6).unwrap() {
            let min = match l.method {
                Method::PlugIn => model.p1(),
                Method::Direct => ph,
            };
            prop_assert_eq!(l.value.is_finite(), l.k >= min);
            let single = loss(&model, h, l.k, l.method).unwrap();
            prop_assert!(single.value == l.value || rel_close(single.value, l.value, 1e-12));
        }
        let best = best_combinations(&model, h, 6).unwrap();
        prop_assert!(!best.is_empty());
    }
}

fn model_ph(model: &UnitRootArModel, h: usize) -> usize {
    multistep_core::model::direct_coefficients(model, h).p_h
}

#[test]
fn random_walk_one_step_loss_is_twice_the_variance() {
    for s2 in [1.0, 2.5, 25.0] {
        let rw = UnitRootArModel::new(vec![1.0], s2).unwrap();
        let l = loss(&rw, 1, 1, Method::PlugIn).unwrap();
        assert!((l.value - 2.0 * s2).abs() <= 1e-12 * s2);
    }
}

#[test]
fn unit_horizon_methods_agree() {
    let m = UnitRootArModel::new(vec![0.9, -0.81, 0.91], 1.0).unwrap();
    for k in 3..8 {
        let p = loss(&m, 1, k, Method::PlugIn).unwrap().value;
        let d = loss(&m, 1, k, Method::Direct).unwrap().value;
        assert!(rel_close(p, d, 1e-10));
    }
}
