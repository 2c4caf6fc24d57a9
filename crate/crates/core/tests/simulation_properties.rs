use multistep_core::simulation::{
    estimate_mspe, generate, run_frequency_experiment, run_job, run_replication, tally, DgpId, DgpSpec,
    ExperimentConfig, NoiseLaw, NoiseSampler,
};
use multistep_core::theory::autocovariances;
use multistep_core::{Method, PenaltyWeight, PredictorSpec, UnitRootArModel};
use proptest::prelude::*;

fn small_config(replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        dgps: vec![DgpSpec::from_id(DgpId::I), DgpSpec::from_id(DgpId::VII)],
        sample_sizes: vec![120, 200],
        penalties: PenaltyWeight::PRESETS.to_vec(),
        replications,
        master_seed: 99,
    }
}

#[test]
fn same_seed_same_series() {
    for id in DgpId::ALL {
        let spec = DgpSpec::from_id(id);
        assert_eq!(generate(&spec, 300, 7).unwrap(), generate(&spec, 300, 7).unwrap());
        assert_ne!(generate(&spec, 300, 7).unwrap(), generate(&spec, 300, 8).unwrap());
    }
}

#[test]
fn noiseless_impulse_follows_the_recursion() {
    let spec = DgpSpec::from_id(DgpId::X)
        .with_noise_variance(0.0)
        .with_initial_impulse(1.0);
    let x = generate(&spec, 6, 123).unwrap();
    // 1, 1.5, 1.75, 1.875, ...
    let hand = [1.0, 1.5, 1.75, 1.875, 1.9375, 1.96875];
    assert_eq!(x.values(), &hand);
}

#[test]
fn differenced_variance_matches_theory() {
    let id = DgpId::III;
    let x = generate(&DgpSpec::from_id(id), 100_000, 31).unwrap();
    let v = x.values();
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / d.len() as f64;
    let model = UnitRootArModel::new(id.levels(), 25.0).unwrap();
    let gamma0 = autocovariances(&model, 0).get(0);
    assert!((var / gamma0 - 1.0).abs() < 0.03, "{var} vs {gamma0}");
}

#[test]
fn uniform_noise_has_requested_variance() {
    let mut s = NoiseSampler::new(4, NoiseLaw::Uniform, 25.0);
    let draws: Vec<f64> = (0..200_000).map(|_| s.next_innovation()).collect();
    assert!(draws.iter().all(|e| e.abs() <= 5.0 * 3f64.sqrt()));
    let var = draws.iter().map(|e| e * e).sum::<f64>() / draws.len() as f64;
    assert!((var / 25.0 - 1.0).abs() < 0.02, "{var}");
}

#[test]
fn every_cell_sums_to_the_replication_count() {
    for r in [1, 7] {
        let table = run_frequency_experiment(&small_config(r)).unwrap();
        assert_eq!(table.cells.len(), 2 * 2 * 3);
        for c in &table.cells {
            assert_eq!(c.total(), r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tally_ignores_execution_order(perm in Just((0..small_config(5).jobs().len()).collect::<Vec<_>>()).prop_shuffle()) {
        let config = small_config(5);
        let jobs = config.jobs();
        let results: Vec<_> = jobs.iter().map(|j| run_job(&config, j)).collect();
        let ordered = tally(&config, &jobs, &results).unwrap();
        let shuffled_jobs: Vec<_> = perm.iter().map(|&i| jobs[i]).collect();
        let shuffled_results: Vec<_> = perm.iter().map(|&i| results[i].clone()).collect();
        prop_assert_eq!(tally(&config, &shuffled_jobs, &shuffled_results).unwrap(), ordered);
    }
}

#[test]
fn rescaling_the_noise_keeps_every_selection() {
    let penalties = PenaltyWeight::PRESETS;
    for id in [DgpId::III, DgpId::VIII, DgpId::X] {
        let base = DgpSpec::from_id(id);
        for rep in 0..20u64 {
            let reference = run_replication(&base, 300, &penalties, rep);
            for c in [0.5, 4.0, 0.1, 3.0, 17.0] {
                let scaled = base.clone().with_noise_variance(25.0 * c * c);
                assert_eq!(run_replication(&scaled, 300, &penalties, rep), reference, "{id} rep {rep} c {c}");
            }
        }
    }
}

#[test]
fn noiseless_forecasts_are_exact() {
    let spec = DgpSpec::from_id(DgpId::VII)
        .with_noise_variance(0.0)
        .with_initial_impulse(1.0);
    let est = estimate_mspe(&spec, PredictorSpec::new(3, Method::PlugIn, 3), 200, 5, 1).unwrap();
    assert!(est.mean < 1e-20 && est.conditional_mean < 1e-20, "{est:?}");
}

#[test]
fn mspe_is_reproducible_and_near_the_forecast_variance() {
    let spec = DgpSpec::from_id(DgpId::X).with_horizon(2);
    let p = PredictorSpec::new(2, Method::PlugIn, 2);
    let a = estimate_mspe(&spec, p, 500, 400, 3).unwrap();
    assert_eq!(a, estimate_mspe(&spec, p, 500, 400, 3).unwrap());
    let model = UnitRootArModel::new(spec.levels.clone(), 25.0).unwrap();
    let s2 = multistep_core::model::sigma_h_squared(&model, 2);
    assert!(a.conditional_mean > s2 && a.conditional_mean < 1.2 * s2, "{a:?} {s2}");
    assert!((a.mean - s2).abs() < 4.0 * a.std_error + 0.1 * s2, "{a:?} {s2}");
}
