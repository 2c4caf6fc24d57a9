use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multistep_core::model::ArModel;
use multistep_core::simulation::{generate, DgpId, DgpSpec, ExperimentConfig};
use multistep_core::{
    fit_direct, fit_one_step, plug_in_multi, predict, procedure_i, procedure_ii, Method, PenaltyWeight,
    PredictorSpec,
};

use crate::error::{CliError, Result};
use crate::experiment;
use crate::io::{parse_coefficients, read_model, read_series, write_series};
use crate::report::{ForecastRow, Format, MspeReport, Report, SelectionReport, TheoryReport};

#[derive(Debug, Parser)]
#[command(name = "multistep", version, about = "Plug-in and direct multistep prediction for autoregressions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic losses and the optimal order/method set of a model.
    Theory(TheoryArgs),
    /// Select an order and method for a series.
    Select(SelectArgs),
    /// Plug-in and direct forecasts of a series.
    Forecast(ForecastArgs),
    /// Write a simulated series as a one-column file.
    Generate(GenerateArgs),
    /// Monte Carlo frequency tables or MSPE estimates.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Model file with `levels = ...` and `sigma2 = ...`.
    #[arg(long, conflicts_with = "levels")]
    pub model: Option<PathBuf>,
    /// Levels coefficients a_1..a_p, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long = "h")]
    pub h: usize,
    #[arg(long = "K", default_value_t = 10)]
    pub max_order: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    #[value(name = "I", alias = "i")]
    I,
    #[value(name = "II", alias = "ii")]
    II,
    #[value(name = "both")]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "C", alias = "c")]
    C,
}

impl From<Preset> for PenaltyWeight {
    fn from(p: Preset) -> Self {
        match p {
            Preset::A => PenaltyWeight::A,
            Preset::B => PenaltyWeight::B,
            Preset::C => PenaltyWeight::C,
        }
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: multistep_core::Error| e.to_string())
}

fn parse_dgp(s: &str) -> std::result::Result<DgpId, String> {
    s.parse().map_err(|e: multistep_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "h")]
    pub h: usize,
    #[arg(long = "K")]
    pub max_order: usize,
    #[arg(long, value_enum, default_value = "II")]
    pub procedure: ProcedureArg,
    #[arg(long, value_enum, conflicts_with = "cn_multiplier")]
    pub cn: Option<Preset>,
    /// C_n = multiplier * ln(n) / n.
    #[arg(long)]
    pub cn_multiplier: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "h")]
    pub h: usize,
    #[arg(long = "k")]
    pub k: usize,
    /// Only this method (default: both).
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Forecast origin (default: the last observation).
    #[arg(long)]
    pub origin: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DgpArgs {
    /// Registered DGP, I..X.
    #[arg(long, value_parser = parse_dgp, conflicts_with = "levels")]
    pub dgp: Option<DgpId>,
    /// Custom levels coefficients, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Innovation variance (default 25).
    #[arg(long)]
    pub noise_variance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Frequency,
    Mspe,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "frequency")]
    pub kind: Kind,
    /// DGPs (comma separated; default I..VIII for frequency tables).
    #[arg(long, value_parser = parse_dgp, value_delimiter = ',', conflicts_with = "levels")]
    pub dgp: Vec<DgpId>,
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    #[arg(long)]
    pub noise_variance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Penalty presets (default A,B,C).
    #[arg(long, value_enum, value_delimiter = ',', conflicts_with = "cn_multiplier")]
    pub cn: Vec<Preset>,
    #[arg(long)]
    pub cn_multiplier: Option<f64>,
    /// Override each DGP's horizon.
    #[arg(long = "h")]
    pub h: Option<usize>,
    /// Override each DGP's maximum order.
    #[arg(long = "K")]
    pub max_order: Option<usize>,
    /// Order for MSPE estimates.
    #[arg(long = "k")]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_method, default_value = "plug-in")]
    pub method: Method,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(usage(format!("--{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn levels_arg(s: &str) -> Result<Vec<f64>> {
    parse_coefficients(s).ok_or_else(|| usage(format!("cannot parse coefficients '{s}'")))
}

fn penalty_arg(cn: Option<Preset>, multiplier: Option<f64>) -> Result<PenaltyWeight> {
    match (cn, multiplier) {
        (_, Some(m)) => Ok(PenaltyWeight::new(m)?),
        (Some(p), None) => Ok(p.into()),
        (None, None) => Ok(PenaltyWeight::default()),
    }
}

fn dgp_spec(id: Option<DgpId>, levels: Option<&str>, noise: Option<f64>, burn_in: usize, h: usize, k: usize) -> Result<DgpSpec> {
    let spec = match (id, levels) {
        (Some(id), _) => DgpSpec::from_id(id),
        (None, Some(l)) => DgpSpec::custom(levels_arg(l)?, noise.unwrap_or(25.0), h, k)?,
        (None, None) => return Err(usage("one of --dgp or --levels is required")),
    };
    let spec = match noise {
        Some(v) if !(v.is_finite() && v >= 0.0) => return Err(usage("--noise-variance must be nonnegative")),
        Some(v) => spec.with_noise_variance(v),
        None => spec,
    };
    Ok(spec.with_burn_in(burn_in))
}

fn emit(text: String, output: &Output) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn theory(args: &TheoryArgs) -> Result<String> {
    check_positive("h", args.h)?;
    check_positive("K", args.max_order)?;
    let (levels, sigma2) = match (&args.model, &args.levels) {
        (Some(path), _) => {
            let m = read_model(path)?;
            (m.levels, m.sigma2)
        }
        (None, Some(l)) => (levels_arg(l)?, args.sigma2),
        (None, None) => return Err(usage("one of --model or --levels is required")),
    };
    let model = ArModel::classify(levels, sigma2)?;
    Ok(TheoryReport::new(&model, args.h, args.max_order)?.render(args.output.format))
}

fn select(args: &SelectArgs) -> Result<String> {
    check_positive("h", args.h)?;
    check_positive("K", args.max_order)?;
    let series = read_series(&args.input)?;
    let penalty = penalty_arg(args.cn, args.cn_multiplier)?;
    let n = series.len();
    let mut reports = Vec::new();
    if matches!(args.procedure, ProcedureArg::I | ProcedureArg::Both) {
        let o = procedure_i(&series, args.h, args.max_order)?;
        reports.push(SelectionReport::new(&o, n, None));
    }
    if matches!(args.procedure, ProcedureArg::II | ProcedureArg::Both) {
        let o = procedure_ii(&series, args.h, args.max_order, penalty)?;
        reports.push(SelectionReport::new(&o, n, Some(penalty.label())));
    }
    Ok(reports.render(args.output.format))
}

fn forecast(args: &ForecastArgs) -> Result<String> {
    check_positive("h", args.h)?;
    check_positive("k", args.k)?;
    let series = read_series(&args.input)?;
    let origin = args.origin.unwrap_or(series.len());
    if origin == 0 || origin > series.len() {
        return Err(usage(format!("--origin must lie in 1..={}", series.len())));
    }
    let methods: Vec<Method> = match args.method {
        Some(m) => vec![m],
        None => Method::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for m in methods {
        let fitted = match m {
            Method::PlugIn => plug_in_multi(&fit_one_step(&series, args.k, origin)?, args.h)?,
            Method::Direct => fit_direct(&series, args.k, args.h, origin)?,
        };
        let f = predict(&series, &fitted, origin)?;
        rows.push(ForecastRow::new(f.spec, origin, f.value));
    }
    Ok(rows.render(args.output.format))
}

fn generate_cmd(args: &GenerateArgs) -> Result<()> {
    check_positive("n", args.n)?;
    let d = &args.dgp;
    let spec = dgp_spec(d.dgp, d.levels.as_deref(), d.noise_variance, d.burn_in, 1, 1)?;
    let text = write_series(&generate(&spec, args.n, args.seed)?);
    emit(text, &Output { format: Format::Csv, out: args.out.clone() })
}

fn simulate(args: &SimulateArgs) -> Result<String> {
    for &n in &args.n {
        check_positive("n", n)?;
    }
    check_positive("reps", args.reps)?;
    if args.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let ids: Vec<Option<DgpId>> = match (&args.dgp[..], &args.levels, args.kind) {
        ([], None, Kind::Frequency) => DgpId::ALL[..8].iter().copied().map(Some).collect(),
        ([], None, Kind::Mspe) => return Err(usage("one of --dgp or --levels is required")),
        ([], Some(_), _) => vec![None],
        (ids, _, _) => ids.iter().copied().map(Some).collect(),
    };
    let mut dgps = Vec::new();
    for id in ids {
        let h = args.h.or(id.map(DgpId::default_horizon)).unwrap_or(1);
        let k = args.max_order.or(id.map(DgpId::default_max_order)).unwrap_or(10);
        let mut spec = dgp_spec(id, args.levels.as_deref(), args.noise_variance, args.burn_in, h, k)?;
        if let Some(h) = args.h {
            check_positive("h", h)?;
            spec = spec.with_horizon(h);
        }
        if let Some(k) = args.max_order {
            check_positive("K", k)?;
            spec = spec.with_max_order(k);
        }
        dgps.push(spec);
    }
    match args.kind {
        Kind::Frequency => {
            let penalties: Vec<PenaltyWeight> = match (args.cn_multiplier, args.cn.is_empty()) {
                (Some(m), _) => vec![PenaltyWeight::new(m)?],
                (None, true) => PenaltyWeight::PRESETS.to_vec(),
                (None, false) => args.cn.iter().map(|&p| p.into()).collect(),
            };
            let config = ExperimentConfig {
                dgps,
                sample_sizes: args.n.clone(),
                penalties,
                replications: args.reps,
                master_seed: args.seed,
            };
            let table = experiment::run_frequency_experiment(&config, args.threads)?;
            Ok(table.render(args.output.format))
        }
        Kind::Mspe => {
            if dgps.len() != 1 || args.n.len() != 1 {
                return Err(usage("MSPE estimation takes one DGP and one sample size"));
            }
            let dgp = &dgps[0];
            let k = args.k.ok_or_else(|| usage("--k is required for MSPE estimation"))?;
            check_positive("k", k)?;
            let spec = PredictorSpec::new(k, args.method, dgp.h);
            let n = args.n[0];
            let est = experiment::estimate_mspe(dgp, spec, n, args.reps, args.seed, args.threads)?;
            let b = multistep_core::model::impulse_response(&dgp.levels, dgp.h - 1);
            let sigma_h2 = dgp.noise_variance * b.iter().map(|w| w * w).sum::<f64>();
            Ok(MspeReport::new(dgp.name(), spec, n, args.seed, sigma_h2, &est).render(args.output.format))
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Theory(a) => emit(theory(a)?, &a.output),
        Command::Select(a) => emit(select(a)?, &a.output),
        Command::Forecast(a) => emit(forecast(a)?, &a.output),
        Command::Generate(a) => generate_cmd(a),
        Command::Simulate(a) => emit(simulate(a)?, &a.output),
    }
}
