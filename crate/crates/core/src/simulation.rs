//! Seeded data generation and Monte Carlo experiments.
//!
//! Series follow `x_t = a_1 x_{t-1} + ... + a_p x_{t-p} + e_t` with
//! `x_t = 0` for `t <= 0`. Innovations come from ChaCha20 seeded per
//! replication; Gaussian draws use the Marsaglia polar method (pairs of
//! uniforms `u = 2U - 1` from the top 53 bits of `next_u64`, rejected unless
//! `0 < u1^2 + u2^2 < 1`, both outputs used in order). Changing any of this
//! bumps [`GENERATOR_VERSION`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::estimation::{fit_direct, fit_one_step, plug_in_multi};
use crate::linalg::{dot, CompensatedSum};
use crate::model::{companion_power_coefficients, impulse_response, ArModel};
use crate::prediction::predict;
use crate::predictor::{Method, PredictorSpec};
use crate::selection::{CriterionContext, PenaltyWeight};
use crate::series::TimeSeries;
use crate::theory::model_best_combinations;

pub const GENERATOR_VERSION: u32 = 1;
pub const DEFAULT_NOISE_VARIANCE: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DgpId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
    X,
}

impl DgpId {
    pub const ALL: [DgpId; 10] = [
        DgpId::I,
        DgpId::II,
        DgpId::III,
        DgpId::IV,
        DgpId::V,
        DgpId::VI,
        DgpId::VII,
        DgpId::VIII,
        DgpId::IX,
        DgpId::X,
    ];

    /// 1-based position in the registry.
    pub fn number(self) -> u64 {
        self as u64 + 1
    }

    pub fn roman(self) -> &'static str {
        const NAMES: [&str; 10] = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"];
        NAMES[self as usize]
    }

    pub fn levels(self) -> Vec<f64> {
        match self {
            DgpId::I => vec![0.0, -0.8],
            DgpId::II => vec![0.3, -0.8],
            DgpId::III => vec![0.0, 0.2, 0.8],
            DgpId::IV => vec![0.3, -0.1, 0.8],
            DgpId::V => vec![0.9, -0.81],
            DgpId::VI => vec![0.6, -0.36],
            DgpId::VII => vec![0.9, -0.81, 0.91],
            DgpId::VIII => vec![0.9, -0.56, 0.66],
            DgpId::IX => {
                let mut v = vec![0.0; 11];
                v[9] = 0.2;
                v[10] = 0.8;
                v
            }
            DgpId::X => vec![1.5, -0.5],
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            DgpId::I | DgpId::II | DgpId::III | DgpId::IV => 2,
            DgpId::V | DgpId::VI | DgpId::VII | DgpId::VIII => 3,
            DgpId::IX | DgpId::X => 10,
        }
    }

    pub fn default_max_order(self) -> usize {
        match self {
            DgpId::IX | DgpId::X => 20,
            _ => 10,
        }
    }
}

impl fmt::Display for DgpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

impl FromStr for DgpId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("DGP").map(str::trim).unwrap_or(&t);
        DgpId::ALL
            .into_iter()
            .find(|d| d.roman() == t || d.number().to_string() == t)
            .ok_or_else(|| Error::invalid(format!("unknown DGP '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseLaw {
    #[default]
    Gaussian,
    /// Uniform on `[-sqrt(3) sd, sqrt(3) sd]`.
    Uniform,
}

/// A data-generating process together with the selection problem posed on it.
#[derive(Clone, Debug, PartialEq)]
pub struct DgpSpec {
    pub id: Option<DgpId>,
    pub levels: Vec<f64>,
    pub unit_root: bool,
    pub noise_variance: f64,
    pub noise: NoiseLaw,
    /// Horizon of interest.
    pub h: usize,
    /// Largest candidate order `K`.
    pub max_order: usize,
    /// Observations generated and discarded before `x_1`.
    pub burn_in: usize,
    /// Added to the first innovation.
    pub initial_impulse: f64,
}

impl DgpSpec {
    pub fn from_id(id: DgpId) -> Self {
        let levels = id.levels();
        let unit_root = crate::model::polynomial_at_one(&levels).abs()
            <= crate::model::unit_root_tolerance(&levels);
        DgpSpec {
            id: Some(id),
            levels,
            unit_root,
            noise_variance: DEFAULT_NOISE_VARIANCE,
            noise: NoiseLaw::Gaussian,
            h: id.default_horizon(),
            max_order: id.default_max_order(),
            burn_in: 0,
            initial_impulse: 0.0,
        }
    }

    pub fn custom(levels: Vec<f64>, noise_variance: f64, h: usize, max_order: usize) -> Result<Self> {
        let model = ArModel::classify(levels.clone(), 1.0)?;
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::invalid("noise variance must be finite and nonnegative"));
        }
        if h == 0 || max_order == 0 {
            return Err(Error::invalid("h and K must be at least 1"));
        }
        Ok(DgpSpec {
            id: None,
            levels,
            unit_root: model.has_unit_root(),
            noise_variance,
            noise: NoiseLaw::Gaussian,
            h,
            max_order,
            burn_in: 0,
            initial_impulse: 0.0,
        })
    }

    pub fn with_noise_variance(mut self, v: f64) -> Self {
        self.noise_variance = v;
        self
    }

    pub fn with_noise_law(mut self, law: NoiseLaw) -> Self {
        self.noise = law;
        self
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn with_max_order(mut self, k: usize) -> Self {
        self.max_order = k;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_initial_impulse(mut self, impulse: f64) -> Self {
        self.initial_impulse = impulse;
        self
    }

    pub fn name(&self) -> String {
        match self.id {
            Some(id) => id.roman().into(),
            None => "custom".into(),
        }
    }

    /// The model with the spec's noise variance (unit variance if zero).
    pub fn model(&self) -> Result<ArModel> {
        let s2 = if self.noise_variance > 0.0 { self.noise_variance } else { 1.0 };
        ArModel::classify(self.levels.clone(), s2)
    }

    /// The optimal set `C_{h,K}` for this spec.
    pub fn best_combinations(&self) -> Result<Vec<(usize, Method)>> {
        model_best_combinations(&self.model()?, self.h, self.max_order)
    }

    fn seed_key(&self) -> u64 {
        self.id.map_or(0, DgpId::number)
    }
}

/// Innovation stream for one replication.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
    law: NoiseLaw,
    sd: f64,
}

impl NoiseSampler {
    pub fn new(seed: u64, law: NoiseLaw, variance: f64) -> Self {
        NoiseSampler {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
            law,
            sd: libm::sqrt(variance),
        }
    }

    fn uniform_pm1(&mut self) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * u - 1.0
    }

    /// A standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u1 = self.uniform_pm1();
            let u2 = self.uniform_pm1();
            let s = u1 * u1 + u2 * u2;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(u2 * f);
                return u1 * f;
            }
        }
    }

    pub fn next_innovation(&mut self) -> f64 {
        match self.law {
            NoiseLaw::Gaussian => self.sd * self.standard_normal(),
            NoiseLaw::Uniform => self.sd * libm::sqrt(3.0) * self.uniform_pm1(),
        }
    }
}

/// `x_t = sum_i levels_i x_{t-i} + innovations_t` from zero initial values.
pub fn simulate_recursion(levels: &[f64], innovations: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = Vec::with_capacity(innovations.len());
    for (t, e) in innovations.iter().enumerate() {
        let mut v = *e;
        for (i, a) in levels.iter().enumerate().take(t) {
            v += a * x[t - 1 - i];
        }
        x.push(v);
    }
    x
}

pub fn generate_with_innovations(dgp: &DgpSpec, innovations: &[f64]) -> Result<TimeSeries> {
    let mut x = simulate_recursion(&dgp.levels, innovations);
    x.drain(..dgp.burn_in.min(x.len()));
    TimeSeries::new(x)
}

/// `x_1..x_n` determined by `(dgp, n, seed)`.
pub fn generate(dgp: &DgpSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::invalid("series length must be at least 1"));
    }
    let mut sampler = NoiseSampler::new(seed, dgp.noise, dgp.noise_variance);
    let mut e: Vec<f64> = (0..n + dgp.burn_in).map(|_| sampler.next_innovation()).collect();
    e[0] += dgp.initial_impulse;
    generate_with_innovations(dgp, &e)
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep` in cell `(dgp, n)`.
pub fn replication_seed(master: u64, dgp: u64, n: usize, rep: usize) -> u64 {
    let mut s = splitmix64(master);
    for v in [dgp, n as u64, rep as u64] {
        s = splitmix64(s ^ v);
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dgps: Vec<DgpSpec>,
    pub sample_sizes: Vec<usize>,
    pub penalties: Vec<PenaltyWeight>,
    pub replications: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self.dgps.is_empty() || self.sample_sizes.is_empty() || self.penalties.is_empty() {
            return Err(Error::invalid("experiment needs DGPs, sample sizes and penalties"));
        }
        Ok(())
    }

    /// Every replication, ordered by DGP, sample size, then index.
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::with_capacity(self.dgps.len() * self.sample_sizes.len() * self.replications);
        for (d, dgp) in self.dgps.iter().enumerate() {
            for &n in &self.sample_sizes {
                for rep in 0..self.replications {
                    out.push(Job {
                        dgp: d,
                        n,
                        rep,
                        seed: replication_seed(self.master_seed, dgp.seed_key(), n, rep),
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Job {
    /// Index into [`ExperimentConfig::dgps`].
    pub dgp: usize,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
}

/// One selection per penalty, sharing the simulated series.
pub type ReplicationResult = Vec<Result<(usize, Method)>>;

pub fn run_replication(dgp: &DgpSpec, n: usize, penalties: &[PenaltyWeight], seed: u64) -> ReplicationResult {
    let terms = generate(dgp, n, seed).and_then(|series| {
        CriterionContext::new(&series, dgp.max_order, dgp.h)?.penalized_terms(dgp.h)
    });
    penalties
        .iter()
        .map(|p| match &terms {
            Ok(t) => {
                let o = t.outcome(*p);
                Ok((o.k, o.method))
            }
            Err(e) => Err(e.clone()),
        })
        .collect()
}

pub fn run_job(config: &ExperimentConfig, job: &Job) -> ReplicationResult {
    run_replication(&config.dgps[job.dgp], job.n, &config.penalties, job.seed)
}

/// Tallies for one `(dgp, n, penalty)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyCell {
    pub dgp: String,
    pub n: usize,
    pub h: usize,
    pub max_order: usize,
    pub penalty: PenaltyWeight,
    pub counts: BTreeMap<(usize, Method), usize>,
    pub failures: usize,
    pub first_failure: Option<String>,
    /// `C_{h,K}`, empty if the theory could not be evaluated.
    pub best: Vec<(usize, Method)>,
}

impl FrequencyCell {
    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.failures
    }

    pub fn count(&self, k: usize, method: Method) -> usize {
        self.counts.get(&(k, method)).copied().unwrap_or(0)
    }

    pub fn frequency(&self, k: usize, method: Method) -> f64 {
        self.count(k, method) as f64 / self.total() as f64
    }

    pub fn best_count(&self) -> usize {
        self.best.iter().map(|&(k, m)| self.count(k, m)).sum()
    }

    pub fn best_frequency(&self) -> f64 {
        self.best_count() as f64 / self.total() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    pub replications: usize,
    pub master_seed: u64,
    pub generator_version: u32,
    /// Ordered by DGP, sample size, then penalty.
    pub cells: Vec<FrequencyCell>,
}

impl FrequencyTable {
    pub fn cell(&self, dgp: &str, n: usize, penalty: PenaltyWeight) -> Option<&FrequencyCell> {
        self.cells
            .iter()
            .find(|c| c.dgp == dgp && c.n == n && c.penalty == penalty)
    }
}

/// Merges per-job results (in the order of `config.jobs()`) into a table.
pub fn tally(config: &ExperimentConfig, jobs: &[Job], results: &[ReplicationResult]) -> Result<FrequencyTable> {
    if jobs.len() != results.len() {
        return Err(Error::invalid("one result per job is required"));
    }
    let mut index: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut cells = Vec::new();
    for (d, dgp) in config.dgps.iter().enumerate() {
        let best = dgp.best_combinations().unwrap_or_default();
        for &n in &config.sample_sizes {
            for (p, penalty) in config.penalties.iter().enumerate() {
                index.insert((d, n, p), cells.len());
                cells.push(FrequencyCell {
                    dgp: dgp.name(),
                    n,
                    h: dgp.h,
                    max_order: dgp.max_order,
                    penalty: *penalty,
                    counts: BTreeMap::new(),
                    failures: 0,
                    first_failure: None,
                    best: best.clone(),
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| (jobs[i].dgp, jobs[i].n, jobs[i].rep));
    for i in order {
        let job = &jobs[i];
        for (p, r) in results[i].iter().enumerate() {
            let cell = &mut cells[index[&(job.dgp, job.n, p)]];
            match r {
                Ok(choice) => *cell.counts.entry(*choice).or_insert(0) += 1,
                Err(e) => {
                    cell.failures += 1;
                    if cell.first_failure.is_none() {
                        cell.first_failure = Some(format!("replication {}: {e}", job.rep));
                    }
                }
            }
        }
    }
    Ok(FrequencyTable {
        replications: config.replications,
        master_seed: config.master_seed,
        generator_version: GENERATOR_VERSION,
        cells,
    })
}

/// Single-threaded frequency experiment.
pub fn run_frequency_experiment(config: &ExperimentConfig) -> Result<FrequencyTable> {
    config.validate()?;
    let jobs = config.jobs();
    let results: Vec<ReplicationResult> = jobs.iter().map(|j| run_job(config, j)).collect();
    tally(config, &jobs, &results)
}

/// Squared h-step error of one replication, raw and conditional on `x_1..x_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MspeSample {
    /// `(x_{n+h} - forecast)^2`.
    pub raw: f64,
    /// `sigma_h^2 + (E[x_{n+h} | x_1..x_n] - forecast)^2`.
    pub conditional: f64,
}

/// Fits `spec` on `x_1..x_n` of a series of length `n + h` and scores the
/// forecast of `x_{n+h}`.
pub fn mspe_replication(dgp: &DgpSpec, spec: PredictorSpec, n: usize, seed: u64) -> Result<MspeSample> {
    let h = spec.h;
    if h == 0 || spec.k == 0 {
        return Err(Error::invalid("h and k must be at least 1"));
    }
    let full = generate(dgp, n + h, seed)?;
    let sample = full.truncated(n)?;
    let fitted = match spec.method {
        Method::PlugIn => plug_in_multi(&fit_one_step(&sample, spec.k, n)?, h)?,
        Method::Direct => fit_direct(&sample, spec.k, h, n)?,
    };
    let forecast = predict(&sample, &fitted, n)?.value;
    let e = full.at(n + h) - forecast;
    let p = dgp.levels.len();
    let projection = dot(&companion_power_coefficients(&dgp.levels, h), &sample.regressor(n, p));
    let b = impulse_response(&dgp.levels, h - 1);
    let sigma_h2 = dgp.noise_variance * b.iter().map(|w| w * w).sum::<f64>();
    let bias = projection - forecast;
    Ok(MspeSample {
        raw: e * e,
        conditional: sigma_h2 + bias * bias,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MspeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub conditional_mean: f64,
    pub conditional_std_error: f64,
    pub replications: usize,
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, r: usize) -> (f64, f64) {
    let mean = values.clone().collect::<CompensatedSum>().value() / r as f64;
    let ss = values.map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().value();
    (mean, libm::sqrt(ss / ((r - 1) * r) as f64))
}

impl MspeEstimate {
    pub fn from_samples(samples: &[MspeSample]) -> Result<Self> {
        let r = samples.len();
        if r < 2 {
            return Err(Error::invalid("an MSPE estimate needs at least 2 replications"));
        }
        let (mean, std_error) = mean_and_se(samples.iter().map(|s| s.raw), r);
        let (conditional_mean, conditional_std_error) = mean_and_se(samples.iter().map(|s| s.conditional), r);
        Ok(MspeEstimate {
            mean,
            std_error,
            conditional_mean,
            conditional_std_error,
            replications: r,
        })
    }
}

/// Single-threaded Monte Carlo MSPE.
pub fn estimate_mspe(dgp: &DgpSpec, spec: PredictorSpec, n: usize, replications: usize, seed: u64) -> Result<MspeEstimate> {
    if replications < 2 {
        return Err(Error::invalid("an MSPE estimate needs at least 2 replications"));
    }
    let samples = (0..replications)
        .map(|rep| mspe_replication(dgp, spec, n, replication_seed(seed, dgp.seed_key(), n, rep)))
        .collect::<Result<Vec<_>>>()?;
    MspeEstimate::from_samples(&samples)
}

/// Seed of MSPE replication `rep`; matches [`estimate_mspe`].
pub fn mspe_seed(dgp: &DgpSpec, n: usize, seed: u64, rep: usize) -> u64 {
    replication_seed(seed, dgp.seed_key(), n, rep)
}
