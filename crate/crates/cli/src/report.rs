//! Rendering of results as CSV, aligned text or JSON lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use multistep_core::model::ArModel;
use multistep_core::simulation::{FrequencyTable, MspeEstimate};
use multistep_core::theory::{model_best_combinations, model_loss_table};
use multistep_core::{Method, PredictorSpec, Result, SelectionOutcome};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Text,
    Jsonl,
}

pub trait Report {
    fn csv(&self) -> String;
    fn text(&self) -> String;
    fn jsonl(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Text => self.text(),
            Format::Jsonl => self.jsonl(),
        }
    }
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report serializes");
    s.push('\n');
    s
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".into(), |v| format!("{v:.6}"))
}

fn plain(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".into(), |v| v.to_string())
}

fn pair(k: usize, m: Method) -> String {
    format!("({},{})", k, m.label())
}

/// Right-aligned columns separated by two spaces.
fn aligned(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(headers.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryRow {
    pub k: usize,
    pub method: &'static str,
    /// `None` when infinite (order below the minimal order).
    pub loss: Option<f64>,
    /// Loss without the unit-root term.
    pub f: Option<f64>,
    pub best: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub path: &'static str,
    pub levels: Vec<f64>,
    pub sigma2: f64,
    pub h: usize,
    pub max_order: usize,
    pub p1: usize,
    pub p_h: usize,
    pub b: Vec<f64>,
    pub sigma_h2: f64,
    pub unit_root_term: f64,
    pub best: Vec<String>,
    pub rows: Vec<TheoryRow>,
}

impl TheoryReport {
    pub fn new(model: &ArModel, h: usize, max_order: usize) -> Result<Self> {
        let losses = model_loss_table(model, h, max_order)?;
        let best = model_best_combinations(model, h, max_order)?;
        let unit_root_term = match model {
            ArModel::UnitRoot(m) => multistep_core::theory::unit_root_term(m, h),
            ArModel::Stationary(_) => 0.0,
        };
        let rows = losses
            .iter()
            .map(|l| TheoryRow {
                k: l.k,
                method: l.method.as_str(),
                loss: finite(l.value),
                f: finite(l.value - unit_root_term),
                best: best.contains(&(l.k, l.method)),
            })
            .collect();
        Ok(TheoryReport {
            path: if model.has_unit_root() { "unit-root" } else { "stationary" },
            levels: model.levels().to_vec(),
            sigma2: model.sigma2(),
            h,
            max_order,
            p1: model.p1(),
            p_h: model.direct_coefficients(h).p_h,
            b: model.forecast_error_weights(h - 1),
            sigma_h2: model.sigma_h_squared(h),
            unit_root_term,
            best: best.iter().map(|&(k, m)| pair(k, m)).collect(),
            rows,
        })
    }
}

impl Report for TheoryReport {
    fn csv(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "# path={}", self.path);
        let _ = writeln!(s, "# levels={}", join(&self.levels));
        let _ = writeln!(s, "# sigma2={}", self.sigma2);
        let _ = writeln!(s, "# h={} K={} p1={} p_h={}", self.h, self.max_order, self.p1, self.p_h);
        let _ = writeln!(s, "# b={}", join(&self.b));
        let _ = writeln!(s, "# sigma_h2={}", self.sigma_h2);
        let _ = writeln!(s, "# unit_root_term={}", self.unit_root_term);
        let _ = writeln!(s, "# best={}", self.best.join(" "));
        s.push_str("k,method,loss,f,best\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.k, r.method, plain(r.loss), plain(r.f), r.best);
        }
        s
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model path      {}", self.path);
        let _ = writeln!(s, "levels          {:?}", self.levels);
        let _ = writeln!(s, "sigma^2         {}", self.sigma2);
        let _ = writeln!(s, "h, K            {}, {}", self.h, self.max_order);
        let _ = writeln!(s, "p_1, p_h        {}, {}", self.p1, self.p_h);
        let _ = writeln!(s, "b_0..b_(h-1)    {:?}", self.b);
        let _ = writeln!(s, "sigma_h^2       {:.6}", self.sigma_h2);
        let _ = writeln!(s, "unit-root term  {:.6}", self.unit_root_term);
        let _ = writeln!(s, "best            {}", self.best.join(" "));
        s.push('\n');
        let mut by_k: BTreeMap<usize, [Option<&TheoryRow>; 2]> = BTreeMap::new();
        for r in &self.rows {
            let slot = if r.method == Method::PlugIn.as_str() { 0 } else { 1 };
            by_k.entry(r.k).or_default()[slot] = Some(r);
        }
        let rows: Vec<Vec<String>> = by_k
            .iter()
            .map(|(k, [p, d])| {
                let cell = |r: &Option<&TheoryRow>, f: fn(&TheoryRow) -> Option<f64>| {
                    r.map_or_else(String::new, |r| {
                        format!("{}{}", fixed(f(r)), if r.best { "*" } else { "" })
                    })
                };
                vec![
                    k.to_string(),
                    cell(p, |r| r.loss),
                    cell(d, |r| r.loss),
                    cell(p, |r| r.f),
                    cell(d, |r| r.f),
                ]
            })
            .collect();
        s.push_str(&aligned(&["k", "L plug-in", "L direct", "f plug-in", "f direct"], &rows));
        s
    }

    fn jsonl(&self) -> String {
        json_line(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub k: usize,
    pub method: &'static str,
    pub value: f64,
    pub searched: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionReport {
    pub procedure: String,
    pub penalty: Option<String>,
    pub n: usize,
    pub h: usize,
    pub max_order: usize,
    pub k: usize,
    pub method: &'static str,
    pub start_indices: Option<(usize, usize)>,
    pub one_step_order: usize,
    pub direct_order: usize,
    pub plug_in_order: usize,
    pub one_step_values: Vec<f64>,
    pub candidates: Vec<Candidate>,
}

impl SelectionReport {
    pub fn new(outcome: &SelectionOutcome, n: usize, penalty: Option<String>) -> Self {
        let candidates = outcome
            .criterion_values()
            .into_iter()
            .map(|((k, m), value)| Candidate {
                k,
                method: m.as_str(),
                value,
                searched: m == Method::Direct || k >= outcome.one_step_order,
            })
            .collect();
        SelectionReport {
            procedure: outcome.procedure.to_string(),
            penalty,
            n,
            h: outcome.h,
            max_order: outcome.max_order,
            k: outcome.k,
            method: outcome.method.as_str(),
            start_indices: outcome.start_indices,
            one_step_order: outcome.one_step_order,
            direct_order: outcome.direct_order,
            plug_in_order: outcome.plug_in_order,
            one_step_values: outcome.one_step_values.clone(),
            candidates,
        }
    }
}

fn reports_csv(reports: &[SelectionReport]) -> String {
    let mut s = String::from("procedure,penalty,h,k,method,criterion,one_step_criterion,searched,chosen\n");
    for r in reports {
        for c in &r.candidates {
            let chosen = c.k == r.k && c.method == r.method;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.procedure,
                r.penalty.as_deref().unwrap_or(""),
                r.h,
                c.k,
                c.method,
                c.value,
                r.one_step_values[c.k - 1],
                c.searched,
                chosen
            );
        }
    }
    s
}

fn reports_text(reports: &[SelectionReport]) -> String {
    let mut s = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let _ = write!(s, "procedure {}", r.procedure);
        if let Some(p) = &r.penalty {
            let _ = write!(s, " (C_n {p})");
        }
        let _ = writeln!(s, ", n = {}, h = {}, K = {}", r.n, r.h, r.max_order);
        if let Some((m1, mh)) = r.start_indices {
            let _ = writeln!(s, "start indices   m_1 = {m1}, m_h = {mh}");
        }
        let _ = writeln!(
            s,
            "step 1 order {}, step 2 direct order {}, plug-in order {}",
            r.one_step_order, r.direct_order, r.plug_in_order
        );
        let _ = writeln!(s, "selected        ({},{}) {}", r.k, if r.method == "plug-in" { 1 } else { 2 }, r.method);
        let mut rows = Vec::new();
        for k in 1..=r.max_order {
            let get = |m: &str| {
                r.candidates
                    .iter()
                    .find(|c| c.k == k && c.method == m)
                    .map(|c| {
                        let mark = if c.k == r.k && c.method == r.method { "*" } else if c.searched { "" } else { "-" };
                        format!("{:.6}{mark}", c.value)
                    })
                    .unwrap_or_default()
            };
            rows.push(vec![
                k.to_string(),
                format!("{:.6}", r.one_step_values[k - 1]),
                get("plug-in"),
                get("direct"),
            ]);
        }
        s.push_str(&aligned(&["k", "h = 1", "plug-in", "direct"], &rows));
    }
    s
}

impl Report for Vec<SelectionReport> {
    fn csv(&self) -> String {
        reports_csv(self)
    }

    fn text(&self) -> String {
        reports_text(self)
    }

    fn jsonl(&self) -> String {
        self.iter().map(json_line).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ForecastRow {
    pub k: usize,
    pub method: &'static str,
    pub h: usize,
    pub origin: usize,
    pub value: f64,
}

impl ForecastRow {
    pub fn new(spec: PredictorSpec, origin: usize, value: f64) -> Self {
        ForecastRow {
            k: spec.k,
            method: spec.method.as_str(),
            h: spec.h,
            origin,
            value,
        }
    }
}

impl Report for Vec<ForecastRow> {
    fn csv(&self) -> String {
        let mut s = String::from("k,method,h,origin,forecast\n");
        for r in self {
            let _ = writeln!(s, "{},{},{},{},{}", r.k, r.method, r.h, r.origin, r.value);
        }
        s
    }

    fn text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.method.to_string(),
                    r.h.to_string(),
                    r.origin.to_string(),
                    format!("{:.6}", r.value),
                ]
            })
            .collect();
        aligned(&["k", "method", "h", "origin", "forecast"], &rows)
    }

    fn jsonl(&self) -> String {
        self.iter().map(json_line).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
struct CellRecord<'a> {
    dgp: &'a str,
    n: usize,
    h: usize,
    max_order: usize,
    penalty: String,
    replications: usize,
    failures: usize,
    first_failure: Option<&'a str>,
    best: Vec<String>,
    best_count: usize,
    counts: Vec<(String, usize)>,
}

impl Report for FrequencyTable {
    fn csv(&self) -> String {
        let mut s = String::from("dgp,n,h,K,penalty,k,method,count,frequency,best\n");
        for c in &self.cells {
            let total = c.total() as f64;
            for (&(k, m), &count) in &c.counts {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    c.dgp,
                    c.n,
                    c.h,
                    c.max_order,
                    c.penalty.label(),
                    k,
                    m.as_str(),
                    count,
                    count as f64 / total,
                    c.best.contains(&(k, m))
                );
            }
            if c.failures > 0 {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},,failed,{},{},false",
                    c.dgp,
                    c.n,
                    c.h,
                    c.max_order,
                    c.penalty.label(),
                    c.failures,
                    c.failures as f64 / total
                );
            }
        }
        s
    }

    /// One row per (DGP, n), one column per penalty, each entry the count
    /// of minimal-loss selections.
    fn text(&self) -> String {
        let mut penalties: Vec<String> = Vec::new();
        let mut groups: Vec<(String, usize)> = Vec::new();
        for c in &self.cells {
            let label = c.penalty.label();
            if !penalties.contains(&label) {
                penalties.push(label);
            }
            if !groups.contains(&(c.dgp.clone(), c.n)) {
                groups.push((c.dgp.clone(), c.n));
            }
        }
        let mut rows = Vec::new();
        for (dgp, n) in &groups {
            let cells: Vec<_> = self.cells.iter().filter(|c| &c.dgp == dgp && c.n == *n).collect();
            let first = cells[0];
            let best = first.best.iter().map(|&(k, m)| pair(k, m)).collect::<Vec<_>>().join(" ");
            let mut row = vec![n.to_string(), dgp.clone(), first.h.to_string(), best];
            for p in &penalties {
                row.push(
                    cells
                        .iter()
                        .find(|c| &c.penalty.label() == p)
                        .map_or_else(String::new, |c| c.best_count().to_string()),
                );
            }
            row.push(cells.iter().map(|c| c.failures).sum::<usize>().to_string());
            rows.push(row);
        }
        let mut headers = vec!["n", "DGP", "h", "best"];
        headers.extend(penalties.iter().map(String::as_str));
        headers.push("failed");
        let mut s = format!(
            "Frequency of choosing predictors with minimal loss in {} replications (seed {})\n",
            self.replications, self.master_seed
        );
        s.push_str(&aligned(&headers, &rows));
        s
    }

    fn jsonl(&self) -> String {
        self.cells
            .iter()
            .map(|c| {
                json_line(&CellRecord {
                    dgp: &c.dgp,
                    n: c.n,
                    h: c.h,
                    max_order: c.max_order,
                    penalty: c.penalty.label(),
                    replications: c.total(),
                    failures: c.failures,
                    first_failure: c.first_failure.as_deref(),
                    best: c.best.iter().map(|&(k, m)| pair(k, m)).collect(),
                    best_count: c.best_count(),
                    counts: c.counts.iter().map(|(&(k, m), &v)| (pair(k, m), v)).collect(),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MspeReport {
    pub dgp: String,
    pub n: usize,
    pub k: usize,
    pub method: &'static str,
    pub h: usize,
    pub replications: usize,
    pub seed: u64,
    pub sigma_h2: f64,
    pub mspe: f64,
    pub std_error: f64,
    pub conditional_mspe: f64,
    pub conditional_std_error: f64,
    /// `n (MSPE - sigma_h^2)`.
    pub scaled_excess: f64,
    pub conditional_scaled_excess: f64,
}

impl MspeReport {
    pub fn new(dgp: String, spec: PredictorSpec, n: usize, seed: u64, sigma_h2: f64, est: &MspeEstimate) -> Self {
        let nf = n as f64;
        MspeReport {
            dgp,
            n,
            k: spec.k,
            method: spec.method.as_str(),
            h: spec.h,
            replications: est.replications,
            seed,
            sigma_h2,
            mspe: est.mean,
            std_error: est.std_error,
            conditional_mspe: est.conditional_mean,
            conditional_std_error: est.conditional_std_error,
            scaled_excess: nf * (est.mean - sigma_h2),
            conditional_scaled_excess: nf * (est.conditional_mean - sigma_h2),
        }
    }
}

impl Report for MspeReport {
    fn csv(&self) -> String {
        format!(
            "dgp,n,k,method,h,replications,seed,sigma_h2,mspe,std_error,conditional_mspe,conditional_std_error,scaled_excess,conditional_scaled_excess\n\
             {},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.dgp,
            self.n,
            self.k,
            self.method,
            self.h,
            self.replications,
            self.seed,
            self.sigma_h2,
            self.mspe,
            self.std_error,
            self.conditional_mspe,
            self.conditional_std_error,
            self.scaled_excess,
            self.conditional_scaled_excess
        )
    }

    fn text(&self) -> String {
        let nf = self.n as f64;
        let rows = vec![
            vec!["raw".into(), format!("{:.6}", self.mspe), format!("{:.6}", self.std_error), format!("{:.4}", self.scaled_excess), format!("{:.4}", nf * self.std_error)],
            vec![
                "conditional".into(),
                format!("{:.6}", self.conditional_mspe),
                format!("{:.6}", self.conditional_std_error),
                format!("{:.4}", self.conditional_scaled_excess),
                format!("{:.4}", nf * self.conditional_std_error),
            ],
        ];
        let mut s = format!(
            "DGP {}, n = {}, ({},{}) h = {}, {} replications, seed {}\nsigma_h^2 = {:.6}\n",
            self.dgp,
            self.n,
            self.k,
            if self.method == "plug-in" { 1 } else { 2 },
            self.h,
            self.replications,
            self.seed,
            self.sigma_h2
        );
        s.push_str(&aligned(&["estimator", "MSPE", "s.e.", "n(MSPE - sigma_h^2)", "s.e."], &rows));
        s
    }

    fn jsonl(&self) -> String {
        json_line(self)
    }
}
