//! Acceptance checks run by the `acceptance` test target.
//!
//! Each check returns a [`Verdict`]; a check that cannot run at all returns
//! an error, which the runner reports as a failure.

use std::time::{Duration, Instant};

use multistep::experiment;
use multistep_core::model::{direct_coefficients, sigma_h_squared, ArModel};
use multistep_core::selection::{ape_from, min_start_index};
use multistep_core::simulation::{
    generate, replication_seed, run_frequency_experiment, splitmix64, DgpId, DgpSpec, ExperimentConfig,
};
use multistep_core::theory::{closed_form_h2, f1h, f2h, loss, reduced_order_gap};
use multistep_core::{
    fit_direct, fit_one_step, plug_in_multi, FittedCoefficients, Method, PenaltyWeight, PredictorSpec, Result,
    UnitRootArModel,
};

#[derive(Clone, Debug)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: String) -> Self {
        Verdict { passed, detail }
    }
}

pub struct Check {
    pub id: u32,
    pub name: &'static str,
    /// Wall-clock budget; exceeding it fails the check.
    pub budget: Option<Duration>,
    pub run: fn() -> Result<Verdict>,
}

pub struct Report {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub detail: String,
}

impl Check {
    pub fn execute(&self) -> Report {
        let start = Instant::now();
        let result = (self.run)();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(b) = self.budget {
            if elapsed > b {
                passed = false;
                detail.push_str(&format!("; over the {:.0?} budget", b));
            }
        }
        Report {
            id: self.id,
            name: self.name,
            passed,
            elapsed,
            detail,
        }
    }
}

pub fn checks() -> Vec<Check> {
    let secs = |s: u64| Some(Duration::from_secs(s));
    vec![
        Check { id: 1, name: "reduced-order gap values", budget: secs(1), run: reduced_order_values },
        Check { id: 2, name: "random-walk loss constant", budget: None, run: random_walk_constant },
        Check { id: 3, name: "two-step closed forms", budget: None, run: two_step_closed_forms },
        Check { id: 4, name: "gap grows with the horizon", budget: secs(10), run: gap_monotone_in_h },
        Check { id: 5, name: "best order/method per DGP", budget: secs(5), run: best_pairs },
        Check { id: 6, name: "cubic direct coefficients", budget: None, run: cubic_direct_coefficients },
        Check { id: 7, name: "DGP III selection frequency", budget: secs(180), run: dgp_three_frequency },
        Check { id: 8, name: "DGP IX selection frequency", budget: secs(300), run: dgp_nine_frequency },
        Check { id: 9, name: "accumulated error per term", budget: None, run: accumulated_error_level },
        Check { id: 10, name: "random-walk MSPE expansion", budget: secs(600), run: random_walk_mspe },
        Check { id: 11, name: "thread-count determinism", budget: None, run: thread_determinism },
        Check { id: 12, name: "estimator oracles", budget: None, run: estimator_oracles },
    ]
}

/// Uniform draws on `[0, 1)` from a counter.
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(1);
        (splitmix64(self.0) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next() * n as f64) as usize).min(n - 1)
    }
}

/// Stable `alpha` of order 1..=4 from partial autocorrelations.
fn stable_models(count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = Stream(seed);
    (0..count)
        .map(|_| {
            let p = 1 + s.below(4);
            let mut phi: Vec<f64> = Vec::new();
            for i in 0..p {
                let mut r = s.range(-0.85, 0.85);
                if i + 1 == p && r.abs() < 1e-3 {
                    r = 0.5;
                }
                let prev = phi.clone();
                let m = prev.len();
                phi = (0..m).map(|j| prev[j] - r * prev[m - 1 - j]).collect();
                phi.push(r);
            }
            phi
        })
        .collect()
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn reduced_order_values() -> Result<Verdict> {
    let printed = [-0.378, -0.013, 0.197, 0.310, 0.354, 0.336, 0.247, 0.051, -0.321];
    let mut ok = true;
    let mut got = Vec::new();
    for (i, want) in printed.iter().enumerate() {
        let a1 = (i + 1) as f64 / 10.0;
        let v = reduced_order_gap(a1)?;
        ok &= (v - want).abs() <= 0.001;
        got.push(format!("{v:.4}"));
    }
    Ok(Verdict::new(
        ok,
        format!("computed [{}] against [{}]", got.join(", "), printed.map(|v| format!("{v:.3}")).join(", ")),
    ))
}

fn random_walk_constant() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for s2 in [1.0, 25.0, 0.3] {
        let model = UnitRootArModel::new(vec![1.0], s2)?;
        let l = loss(&model, 1, 1, Method::PlugIn)?.value;
        worst = worst.max((l - 2.0 * s2).abs() / s2);
    }
    Ok(Verdict::new(worst <= 1e-12, format!("max |L / sigma^2 - 2| = {worst:.1e}")))
}

fn two_step_closed_forms() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for alpha in stable_models(200, 11) {
        let model = UnitRootArModel::from_stationary(alpha, 1.0)?;
        for k in model.p1().max(2)..=6 {
            let f1 = f1h(&model, 2, k)?;
            let f2 = f2h(&model, 2, k)?;
            let a = model.stationary().get(k - 2).copied().unwrap_or(0.0);
            worst = worst
                .max(rel_gap(f1, closed_form_h2(&model, k, Method::PlugIn)?))
                .max(rel_gap(f2, closed_form_h2(&model, k, Method::Direct)?))
                .max(rel_gap(f2 - f1, 1.0 - a * a));
            cases += 1;
        }
    }
    Ok(Verdict::new(worst <= 1e-8, format!("{cases} cases, max relative error {worst:.1e}")))
}

fn gap_monotone_in_h() -> Result<Verdict> {
    let mut violations = 0;
    let mut cases = 0;
    let mut min_slack = f64::INFINITY;
    for alpha in stable_models(200, 11) {
        let model = UnitRootArModel::from_stationary(alpha, 1.0)?;
        for k in model.p1().max(2)..=6 {
            let base = f2h(&model, 2, k)? - f1h(&model, 2, k)?;
            if base <= 0.0 {
                violations += 1;
            }
            for h in 3..=6 {
                let gap = f2h(&model, h, k)? - f1h(&model, h, k)?;
                min_slack = min_slack.min(gap - base);
                if gap < base - 1e-10 {
                    violations += 1;
                }
                cases += 1;
            }
        }
    }
    Ok(Verdict::new(
        violations == 0,
        format!("{cases} cases, {violations} violations, smallest margin {min_slack:.3e}"),
    ))
}

fn best_pairs() -> Result<Verdict> {
    let expected = [
        (DgpId::I, false, (1, Method::Direct)),
        (DgpId::II, false, (2, Method::PlugIn)),
        (DgpId::III, true, (2, Method::Direct)),
        (DgpId::IV, true, (3, Method::PlugIn)),
        (DgpId::V, false, (1, Method::Direct)),
        (DgpId::VI, false, (2, Method::PlugIn)),
        (DgpId::VII, true, (2, Method::Direct)),
        (DgpId::VIII, true, (3, Method::PlugIn)),
        (DgpId::IX, true, (2, Method::Direct)),
        (DgpId::X, true, (2, Method::PlugIn)),
    ];
    let mut wrong = Vec::new();
    for (id, unit, pair) in expected {
        let spec = DgpSpec::from_id(id);
        let path_ok = matches!(spec.model()?, ArModel::UnitRoot(_)) == unit;
        let best = spec.best_combinations()?;
        if !path_ok || best != vec![pair] {
            wrong.push(format!("{id}: {best:?}"));
        }
    }
    Ok(Verdict::new(
        wrong.is_empty(),
        if wrong.is_empty() { "all ten DGPs match".into() } else { wrong.join("; ") },
    ))
}

/// Coefficients of `x_n, .., x_{n-p+1}` in the h-step projection, by
/// repeatedly substituting the recursion into itself.
pub fn substitution(levels: &[f64], h: usize) -> Vec<f64> {
    let p = levels.len();
    // rows[t] expresses x_{n+1-p+t}; the first p rows are the known values
    let mut rows: Vec<Vec<f64>> = (0..p)
        .map(|t| {
            let mut e = vec![0.0; p];
            e[p - 1 - t] = 1.0;
            e
        })
        .collect();
    for _ in 0..h {
        let t = rows.len();
        let mut next = vec![0.0; p];
        for (i, a) in levels.iter().enumerate() {
            for (c, v) in next.iter_mut().zip(&rows[t - 1 - i]) {
                *c += a * v;
            }
        }
        rows.push(next);
    }
    rows.pop().unwrap()
}

fn cubic_direct_coefficients() -> Result<Verdict> {
    let levels = vec![0.9, -0.81, 0.91];
    let model = UnitRootArModel::new(levels.clone(), 1.0)?;
    let d = direct_coefficients(&model, 3);
    let want = [0.181, 0.819, 0.0];
    let err = d.coeffs.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let oracle = substitution(&levels, 3);
    let oracle_err = d.coeffs.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Verdict::new(
        err <= 1e-12 && oracle_err <= 1e-12 && d.p_h == 2,
        format!("coefficients {:?}, p_3 = {}, substitution error {oracle_err:.1e}", d.coeffs, d.p_h),
    ))
}

fn frequency(id: DgpId, n: usize, replications: usize, seed: u64, threshold: f64) -> Result<Verdict> {
    let config = ExperimentConfig {
        dgps: vec![DgpSpec::from_id(id)],
        sample_sizes: vec![n],
        penalties: vec![PenaltyWeight::B],
        replications,
        master_seed: seed,
    };
    let table = experiment::run_frequency_experiment(&config, None)?;
    let cell = &table.cells[0];
    let f = cell.best_frequency();
    Ok(Verdict::new(
        f >= threshold,
        format!(
            "best {:?} chosen {}/{} (failed {}), need >= {threshold}",
            cell.best,
            cell.best_count(),
            cell.total(),
            cell.failures
        ),
    ))
}

fn dgp_three_frequency() -> Result<Verdict> {
    frequency(DgpId::III, 1000, 200, 20240601, 0.95)
}

fn dgp_nine_frequency() -> Result<Verdict> {
    frequency(DgpId::IX, 500, 100, 20240601, 0.97)
}

fn accumulated_error_level() -> Result<Verdict> {
    let spec = DgpSpec::from_id(DgpId::VII);
    let (n, h, k) = (5000, 3, 2);
    let mut total = 0.0;
    for seed in 0..20 {
        let x = generate(&spec, n, replication_seed(9, 7, n, seed))?;
        let start = min_start_index(&x, spec.max_order, h)?;
        total += ape_from(&x, k, h, Method::Direct, start)? / (n - h - start + 1) as f64;
    }
    let mean = total / 20.0;
    let target = sigma_h_squared(&UnitRootArModel::new(spec.levels.clone(), spec.noise_variance)?, h);
    let rel = mean / target - 1.0;
    Ok(Verdict::new(
        rel.abs() < 0.05,
        format!("mean APE per term {mean:.3}, sigma_3^2 = {target:.3}, relative {rel:+.4}"),
    ))
}

fn random_walk_mspe() -> Result<Verdict> {
    let s2 = 25.0;
    let spec = DgpSpec::custom(vec![1.0], s2, 1, 1)?;
    let n = 2000;
    let est = experiment::estimate_mspe(&spec, PredictorSpec::new(1, Method::PlugIn, 1), n, 100_000, 10, None)?;
    let scaled = n as f64 * (est.conditional_mean - s2) / s2;
    let scaled_se = n as f64 * est.conditional_std_error / s2;
    let raw = n as f64 * (est.mean - s2) / s2;
    let raw_se = n as f64 * est.std_error / s2;
    Ok(Verdict::new(
        (1.5..=2.5).contains(&scaled),
        format!(
            "n(MSPE - sigma^2)/sigma^2 = {scaled:.3} (se {scaled_se:.3}) conditional, {raw:.2} (se {raw_se:.2}) raw"
        ),
    ))
}

fn thread_determinism() -> Result<Verdict> {
    let config = ExperimentConfig {
        dgps: vec![
            DgpSpec::from_id(DgpId::II),
            DgpSpec::from_id(DgpId::VIII),
            DgpSpec::from_id(DgpId::X),
        ],
        sample_sizes: vec![150, 300],
        penalties: PenaltyWeight::PRESETS.to_vec(),
        replications: 20,
        master_seed: 31337,
    };
    let sequential = run_frequency_experiment(&config)?;
    let mut same = true;
    for threads in [1, 2, 4] {
        same &= experiment::run_frequency_experiment(&config, Some(threads))? == sequential;
    }
    Ok(Verdict::new(same, format!("{} cells compared at 1, 2 and 4 threads", sequential.cells.len())))
}

fn eliminate(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Normal equations over rows `j = k..=i-h`, built and solved explicitly.
fn brute_force(x: &[f64], k: usize, h: usize, i: usize) -> Vec<f64> {
    let mut g = vec![vec![0.0; k]; k];
    let mut c = vec![0.0; k];
    for j in k..=i - h {
        let r: Vec<f64> = (0..k).map(|l| x[j - 1 - l]).collect();
        for u in 0..k {
            for v in 0..k {
                g[u][v] += r[u] * r[v];
            }
            c[u] += r[u] * x[j + h - 1];
        }
    }
    eliminate(g, c)
}

fn estimator_oracles() -> Result<Verdict> {
    let mut s = Stream(5);
    let mut fit_err: f64 = 0.0;
    for inst in 0..50u64 {
        let alpha = stable_models(1, 100 + inst).remove(0);
        let model = UnitRootArModel::from_stationary(alpha, 1.0)?;
        let n = 15 + s.below(30);
        let spec = DgpSpec::custom(model.levels().to_vec(), 25.0, 1, 1)?;
        let x = generate(&spec, n, inst)?;
        let k = 1 + s.below(3);
        let h = 1 + s.below(4);
        let fits = [(fit_one_step(&x, k, n)?, 1), (fit_direct(&x, k, h, n)?, h)];
        for (fit, fh) in fits {
            let want = brute_force(x.values(), k, fh, n);
            for (a, b) in fit.coeffs.iter().zip(&want) {
                fit_err = fit_err.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    let mut power_err: f64 = 0.0;
    for coeffs in stable_models(100, 77) {
        let one = FittedCoefficients {
            coeffs: coeffs.clone(),
            h: 1,
            method: Method::PlugIn,
            sample_end: 0,
        };
        for h in 1..=6 {
            let got = plug_in_multi(&one, h)?.coeffs;
            for (a, b) in got.iter().zip(substitution(&coeffs, h)) {
                power_err = power_err.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    Ok(Verdict::new(
        fit_err <= 1e-9 && power_err <= 1e-12,
        format!("fit error {fit_err:.1e} over 50 instances, plug-in power error {power_err:.1e}"),
    ))
}
