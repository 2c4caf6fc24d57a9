//! Parallel drivers for the Monte Carlo experiments. Results are merged in
//! replication-index order, so output does not depend on the thread count.

use multistep_core::simulation::{
    mspe_replication, mspe_seed, run_job, tally, DgpSpec, ExperimentConfig, FrequencyTable,
    MspeEstimate, MspeSample, ReplicationResult,
};
use multistep_core::{PredictorSpec, Result};
use rayon::prelude::*;

fn pool(threads: Option<usize>) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool")
}

/// `threads = None` uses every available core.
pub fn run_frequency_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<FrequencyTable> {
    config.validate()?;
    let jobs = config.jobs();
    let results: Vec<ReplicationResult> =
        pool(threads).install(|| jobs.par_iter().map(|j| run_job(config, j)).collect());
    tally(config, &jobs, &results)
}

pub fn mspe_samples(
    dgp: &DgpSpec,
    spec: PredictorSpec,
    n: usize,
    replications: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<MspeSample>> {
    pool(threads).install(|| {
        (0..replications)
            .into_par_iter()
            .map(|rep| mspe_replication(dgp, spec, n, mspe_seed(dgp, n, seed, rep)))
            .collect()
    })
}

/// Same estimate as the single-threaded core routine, computed in parallel.
pub fn estimate_mspe(
    dgp: &DgpSpec,
    spec: PredictorSpec,
    n: usize,
    replications: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<MspeEstimate> {
    if replications < 2 {
        return Err(multistep_core::Error::InvalidInput(
            "an MSPE estimate needs at least 2 replications".into(),
        ));
    }
    MspeEstimate::from_samples(&mspe_samples(dgp, spec, n, replications, seed, threads)?)
}
