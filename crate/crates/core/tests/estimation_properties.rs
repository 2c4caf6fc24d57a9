mod common;

use common::{brute_force_fit, noiseless, simulated, stable_filter, integrate};
use multistep_core::estimation::ExpandingRegression;
use multistep_core::model::direct_coefficients;
use multistep_core::prediction::iterate_one_step;
use multistep_core::{
    fit_direct, fit_one_step, fitted_ma_weights, plug_in_multi, predict, residual_mse, Method,
    TimeSeries, UnitRootArModel,
};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

#[test]
fn small_instances_match_elimination() {
    for seed in 0..50u64 {
        let x = simulated(vec![1.5, -0.5], 25.0, 12 + (seed as usize % 30), seed);
        let n = x.len();
        let k = 1 + (seed as usize % 3);
        let h = 1 + (seed as usize % 4);
        let one = fit_one_step(&x, k, n).unwrap();
        assert!(close(&one.coeffs, &brute_force_fit(x.values(), k, 1, n), 1e-9), "seed {seed}");
        if n >= 2 * k + h - 1 {
            let d = fit_direct(&x, k, h, n).unwrap();
            assert!(close(&d.coeffs, &brute_force_fit(x.values(), k, h, n), 1e-9), "seed {seed}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn expanding_fits_equal_fresh_fits(seed in any::<u64>(), k in 1usize..=4, h in 1usize..=3) {
        let x = simulated(vec![0.9, -0.81, 0.91], 25.0, 120, seed);
        let mut reg = ExpandingRegression::new(&x, k, h);
        for i in (2 * k + h + 2)..=x.len() {
            let inc = reg.fit_at(i).unwrap();
            let fresh = if h == 1 { fit_one_step(&x, k, i) } else { fit_direct(&x, k, h, i) }.unwrap();
            prop_assert!(close(&inc, &fresh.coeffs, 1e-9));
        }
    }

    #[test]
    fn iterated_forecasts_equal_plug_in(seed in any::<u64>(), k in 1usize..=4, h in 1usize..=6) {
        let x = simulated(vec![1.5, -0.5], 25.0, 80, seed);
        let n = x.len();
        let one = fit_one_step(&x, k, n).unwrap();
        let multi = plug_in_multi(&one, h).unwrap();
        let a = predict(&x, &multi, n).unwrap().value;
        let b = iterate_one_step(&x, &one.coeffs, n, h).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn plug_in_powers_match_substitution(alpha in stable_filter(3), h in 1usize..=6) {
        let levels = integrate(&alpha);
        let one = multistep_core::FittedCoefficients {
            coeffs: levels.clone(),
            h: 1,
            method: Method::PlugIn,
            sample_end: 0,
        };
        let got = plug_in_multi(&one, h).unwrap().coeffs;
        let oracle = common::substitution(&levels, h);
        prop_assert!(close(&got, &oracle, 1e-12));
    }
}

#[test]
fn noiseless_fits_recover_population_projection() {
    for levels in [vec![1.5, -0.5], vec![0.9, -0.81, 0.91], vec![0.9, -0.56, 0.66]] {
        let model = UnitRootArModel::new(levels.clone(), 1.0).unwrap();
        let x = noiseless(levels.clone(), 400);
        for h in 1..=3 {
            let truth = direct_coefficients(&model, h);
            let k = truth.p_h;
            let d = fit_direct(&x, k, h, 400).unwrap();
            assert!(close(&d.coeffs, &truth.truncated(k), 1e-6), "{levels:?} h {h}: {:?}", d.coeffs);
            let p1 = model.p1();
            let p = plug_in_multi(&fit_one_step(&x, p1, 400).unwrap(), h).unwrap();
            assert!(close(&p.coeffs, &truth.truncated(p1), 1e-6), "{levels:?} h {h}");
        }
    }
}

#[test]
fn residual_mean_square_matches_explicit_loop() {
    let x = simulated(vec![1.5, -0.5], 25.0, 500, 17);
    let n = 500;
    let big_k = 5;
    let fit = fit_one_step(&x, big_k, n).unwrap();
    let v = x.values();
    let mut ss = 0.0;
    for j in big_k..=n - 1 {
        let pred: f64 = (0..big_k).map(|l| fit.coeffs[l] * v[j - 1 - l]).sum();
        ss += (v[j] - pred).powi(2);
    }
    let expect = ss / (n - 1 - big_k) as f64;
    let got = residual_mse(&x, &fit.coeffs, 1, big_k).unwrap();
    assert!((got - expect).abs() <= 1e-10 * expect);
}

#[test]
fn residual_mean_square_ignores_plug_in_form() {
    let x = simulated(vec![0.9, -0.81, 0.91], 25.0, 300, 4);
    let n = x.len();
    let (k, h, big_k) = (3, 3, 6);
    let one = fit_one_step(&x, k, n).unwrap();
    let via_power = residual_mse(&x, &plug_in_multi(&one, h).unwrap().coeffs, h, big_k).unwrap();
    let mut ss = 0.0;
    for j in big_k..=n - h {
        let f = iterate_one_step(&x, &one.coeffs, j, h).unwrap();
        ss += (x.at(j + h) - f).powi(2);
    }
    let via_iteration = ss / (n - h - big_k) as f64;
    assert!((via_power - via_iteration).abs() <= 1e-10 * via_power);
}

#[test]
fn one_step_residual_variance_is_method_free() {
    let x = simulated(vec![0.3, -0.1, 0.8], 25.0, 400, 8);
    let n = x.len();
    let big_k = 10;
    let p = fit_one_step(&x, big_k, n).unwrap();
    let d = fit_direct(&x, big_k, 1, n).unwrap();
    let a = residual_mse(&x, &p.coeffs, 1, big_k).unwrap();
    let b = residual_mse(&x, &d.coeffs, 1, big_k).unwrap();
    assert!((a - b).abs() <= 1e-10 * a);
}

#[test]
fn fitted_weights_of_exact_coefficients() {
    let one = multistep_core::FittedCoefficients {
        coeffs: vec![0.9, -0.81, 0.91],
        h: 1,
        method: Method::PlugIn,
        sample_end: 0,
    };
    let b = fitted_ma_weights(&one, 6);
    let model = UnitRootArModel::new(one.coeffs.clone(), 1.0).unwrap();
    let truth = multistep_core::model::ma_weights(&model, 6).b;
    assert!(close(&b, &truth, 1e-12));
    assert!((b[1] - 0.9).abs() < 1e-15 && b[2].abs() < 1e-15);
}

#[test]
fn uninformative_designs_are_singular() {
    let z = TimeSeries::new(vec![0.0; 30]).unwrap();
    let err = fit_one_step(&z, 2, 30).unwrap_err();
    assert!(err.is_numerical());
    let c = TimeSeries::new(vec![1.0; 30]).unwrap();
    assert!(fit_one_step(&c, 2, 30).unwrap_err().is_numerical());
}
