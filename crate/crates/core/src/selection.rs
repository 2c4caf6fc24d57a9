//! Predictor selection: accumulated prediction errors (procedure I) and the
//! penalized criteria PMIC/DMIC (procedure II).
//!
//! Both procedures follow the same three steps:
//!
//! 1. choose a one-step order `k1` with the direct (= plug-in) criterion at `h = 1`;
//! 2. choose the best direct order `kd` over `1..=K` and the best plug-in
//!    order `kp` over `k1..=K` with the h-step criteria;
//! 3. pick plug-in `(kp, 1)` only if the direct value at `kd` is strictly
//!    larger than the plug-in value at `kp`; otherwise direct `(kd, 2)`.
//!
//! Inside each argmin the smallest order wins a tie.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::estimation::{fit_direct, fit_one_step, fitted_ma_weights, plug_in_multi, residual_mse, ExpandingRegression};
use crate::linalg::{dot, CompensatedSum, Matrix, SpdSolver};
use crate::model::companion_power_coefficients;
use crate::predictor::Method;
use crate::series::TimeSeries;
use crate::theory::weighted_companion_sum;

/// Penalty weight `C_n = multiplier * ln(n) / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyWeight {
    multiplier: f64,
}

impl PenaltyWeight {
    pub const A: PenaltyWeight = PenaltyWeight { multiplier: 1.0 };
    pub const B: PenaltyWeight = PenaltyWeight { multiplier: 2.0 };
    pub const C: PenaltyWeight = PenaltyWeight { multiplier: 3.0 };
    pub const PRESETS: [PenaltyWeight; 3] = [Self::A, Self::B, Self::C];

    pub fn new(multiplier: f64) -> Result<Self> {
        if !(multiplier.is_finite() && multiplier > 0.0) {
            return Err(Error::invalid(format!(
                "penalty multiplier must be positive and finite, got {multiplier}"
            )));
        }
        Ok(PenaltyWeight { multiplier })
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn value(&self, n: usize) -> f64 {
        let n = n as f64;
        self.multiplier * libm::log(n) / n
    }

    /// "A", "B" or "C" for the presets, otherwise the multiplier.
    pub fn label(&self) -> alloc::string::String {
        match self.multiplier {
            m if m == 1.0 => "A".into(),
            m if m == 2.0 => "B".into(),
            m if m == 3.0 => "C".into(),
            m => format!("{m}"),
        }
    }
}

impl Default for PenaltyWeight {
    fn default() -> Self {
        PenaltyWeight::B
    }
}

impl FromStr for PenaltyWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("unknown penalty '{other}'")))
                .and_then(PenaltyWeight::new),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Procedure {
    /// Accumulated prediction errors.
    Ape,
    /// PMIC / DMIC.
    Penalized,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Ape => "I",
            Procedure::Penalized => "II",
        })
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" | "ape" => Ok(Procedure::Ape),
            "II" | "ii" | "2" | "penalized" => Ok(Procedure::Penalized),
            other => Err(Error::invalid(format!("unknown procedure '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome {
    pub procedure: Procedure,
    pub k: usize,
    pub method: Method,
    pub h: usize,
    pub max_order: usize,
    /// `(m_1, m_h)` for procedure I.
    pub start_indices: Option<(usize, usize)>,
    /// Step 1 order.
    pub one_step_order: usize,
    /// Step 2 direct order, searched over `1..=K`.
    pub direct_order: usize,
    /// Step 2 plug-in order, searched over `one_step_order..=K`.
    pub plug_in_order: usize,
    /// Criterion values at horizon 1, index `k - 1`.
    pub one_step_values: Vec<f64>,
    /// Direct h-step criterion values, index `k - 1`.
    pub direct_values: Vec<f64>,
    /// Plug-in h-step criterion values for every order, index `k - 1`.
    pub plug_in_values: Vec<f64>,
}

impl SelectionOutcome {
    /// h-step criterion value of every `(k, method)` candidate.
    pub fn criterion_values(&self) -> BTreeMap<(usize, Method), f64> {
        let mut out = BTreeMap::new();
        for (i, v) in self.plug_in_values.iter().enumerate() {
            out.insert((i + 1, Method::PlugIn), *v);
        }
        for (i, v) in self.direct_values.iter().enumerate() {
            out.insert((i + 1, Method::Direct), *v);
        }
        out
    }

    pub fn chosen_value(&self) -> f64 {
        match self.method {
            Method::PlugIn => self.plug_in_values[self.k - 1],
            Method::Direct => self.direct_values[self.k - 1],
        }
    }
}

/// Smallest order in `from..=values.len()` attaining the minimum.
fn argmin_from(values: &[f64], from: usize) -> usize {
    let mut best = from;
    for k in from + 1..=values.len() {
        if values[k - 1] < values[best - 1] {
            best = k;
        }
    }
    best
}

fn decide(
    procedure: Procedure,
    h: usize,
    max_order: usize,
    start_indices: Option<(usize, usize)>,
    one_step_values: Vec<f64>,
    direct_values: Vec<f64>,
    plug_in_values: Vec<f64>,
) -> SelectionOutcome {
    let one_step_order = argmin_from(&one_step_values, 1);
    let direct_order = argmin_from(&direct_values, 1);
    let plug_in_order = argmin_from(&plug_in_values, one_step_order);
    let (k, method) = if direct_values[direct_order - 1] > plug_in_values[plug_in_order - 1] {
        (plug_in_order, Method::PlugIn)
    } else {
        (direct_order, Method::Direct)
    };
    SelectionOutcome {
        procedure,
        k,
        method,
        h,
        max_order,
        start_indices,
        one_step_order,
        direct_order,
        plug_in_order,
        one_step_values,
        direct_values,
        plug_in_values,
    }
}

fn check_orders(k: usize, h: usize, max_order: usize) -> Result<()> {
    if max_order == 0 || h == 0 {
        return Err(Error::invalid("K and h must be at least 1"));
    }
    if k == 0 || k > max_order {
        return Err(Error::invalid(format!("order {k} outside 1..={max_order}")));
    }
    Ok(())
}

/// `m_h`: the first sample end `i >= 2K + h - 1` at which both order-`K`
/// designs (one-step rows `K..=i-1`, direct rows `K..=i-h`) are invertible.
pub fn min_start_index(series: &TimeSeries, max_order: usize, h: usize) -> Result<usize> {
    check_orders(1, h, max_order)?;
    let n = series.len();
    let first = 2 * max_order + h - 1;
    if n < first + h {
        return Err(Error::SeriesTooShort {
            n,
            reason: format!("need at least {} observations for K = {max_order}, h = {h}", first + h),
        });
    }
    let mut one = ExpandingRegression::new(series, max_order, 1);
    let mut direct = ExpandingRegression::new(series, max_order, h);
    for i in first..=n - h {
        one.advance_to(i);
        direct.advance_to(i);
        if direct.accumulator().solver().is_ok() && one.accumulator().solver().is_ok() {
            return Ok(i);
        }
    }
    Err(Error::SeriesTooShort {
        n,
        reason: format!("no sample end up to {} gives invertible order-{max_order} designs", n - h),
    })
}

/// `sum_{i=start}^{n-h} (x_{i+h} - forecast_i)^2` with each forecast refitted
/// at sample end `i`.
pub fn ape_from(series: &TimeSeries, k: usize, h: usize, method: Method, start: usize) -> Result<f64> {
    let n = series.len();
    if k == 0 || h == 0 {
        return Err(Error::invalid("order and horizon must be at least 1"));
    }
    if start < k || start + h > n {
        return Err(Error::SeriesTooShort {
            n,
            reason: format!("no forecast origins between {start} and {}", n.saturating_sub(h)),
        });
    }
    let fit_h = match method {
        Method::PlugIn => 1,
        Method::Direct => h,
    };
    let mut reg = ExpandingRegression::new(series, k, fit_h);
    let mut regressor = vec![0.0; k];
    let mut sum = CompensatedSum::new();
    for i in start..=n - h {
        let fitted = reg.fit_at(i)?;
        let coeffs = match method {
            Method::PlugIn => companion_power_coefficients(&fitted, h),
            Method::Direct => fitted,
        };
        series.regressor_into(i, &mut regressor);
        let e = series.at(i + h) - dot(&coeffs, &regressor);
        sum.add(e * e);
    }
    Ok(sum.value())
}

/// `APEP_{n,h}(k)` or `APED_{n,h}(k)` starting at `m_h` computed at order `K`.
pub fn ape(series: &TimeSeries, k: usize, h: usize, method: Method, max_order: usize) -> Result<f64> {
    check_orders(k, h, max_order)?;
    let start = min_start_index(series, max_order, h)?;
    ape_from(series, k, h, method, start)
}

/// Procedure I.
pub fn procedure_i(series: &TimeSeries, h: usize, max_order: usize) -> Result<SelectionOutcome> {
    check_orders(1, h, max_order)?;
    let m1 = min_start_index(series, max_order, 1)?;
    let mh = if h == 1 { m1 } else { min_start_index(series, max_order, h)? };
    let orders = 1..=max_order;
    let one_step = orders
        .clone()
        .map(|k| ape_from(series, k, 1, Method::Direct, m1))
        .collect::<Result<Vec<_>>>()?;
    let direct = orders
        .clone()
        .map(|k| ape_from(series, k, h, Method::Direct, mh))
        .collect::<Result<Vec<_>>>()?;
    let plug_in = orders
        .map(|k| ape_from(series, k, h, Method::PlugIn, mh))
        .collect::<Result<Vec<_>>>()?;
    Ok(decide(Procedure::Ape, h, max_order, Some((m1, mh)), one_step, direct, plug_in))
}

/// The two parts of a penalized criterion value:
/// `fit + trace * sigma~^2 * C_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionTerms {
    /// Residual mean square over the common window.
    pub fit: f64,
    pub trace: f64,
    /// `sigma~^2_n`.
    pub scale: f64,
}

impl CriterionTerms {
    pub fn value(&self, c_n: f64) -> f64 {
        self.fit + self.trace * self.scale * c_n
    }
}

/// Quantities shared by every PMIC/DMIC evaluation on one series: the
/// one-step residual variance at order `K` and the fitted MA weights.
#[derive(Clone, Debug)]
pub struct CriterionContext<'a> {
    series: &'a TimeSeries,
    max_order: usize,
    sigma_tilde2: f64,
    b_hat: Vec<f64>,
}

impl<'a> CriterionContext<'a> {
    /// Supports horizons up to `max_h`.
    pub fn new(series: &'a TimeSeries, max_order: usize, max_h: usize) -> Result<Self> {
        check_orders(1, max_h, max_order)?;
        let n = series.len();
        // K rows in the order-K direct design, a residual window and a z window
        let needed = (2 * max_order + max_h - 1)
            .max(max_order + max_h + 1)
            .max(2 * max_h + max_order - 1);
        if n < needed {
            return Err(Error::SeriesTooShort {
                n,
                reason: format!("need at least {needed} observations for K = {max_order}, h = {max_h}"),
            });
        }
        let one = fit_one_step(series, max_order, n)?;
        let sigma_tilde2 = residual_mse(series, &one.coeffs, 1, max_order)?;
        let b_hat = fitted_ma_weights(&one, max_h - 1);
        Ok(CriterionContext {
            series,
            max_order,
            sigma_tilde2,
            b_hat,
        })
    }

    /// `sigma~^2_n`, the order-`K` one-step residual mean square.
    pub fn sigma_tilde2(&self) -> f64 {
        self.sigma_tilde2
    }

    pub fn b_hat(&self) -> &[f64] {
        &self.b_hat
    }

    fn check(&self, k: usize, h: usize) -> Result<()> {
        check_orders(k, h, self.max_order)?;
        if h > self.b_hat.len() {
            return Err(Error::invalid(format!(
                "criterion context built for horizons up to {}",
                self.b_hat.len()
            )));
        }
        Ok(())
    }

    fn gram(&self, k: usize, h: usize) -> Result<(Matrix, SpdSolver)> {
        let n = self.series.len();
        let mut reg = ExpandingRegression::new(self.series, k, h);
        reg.advance_to(n);
        let g = reg.accumulator().gram().clone();
        let solver = reg.accumulator().solver().map_err(|e| Error::SingularDesign {
            order: k,
            first_row: k,
            last_row: n.saturating_sub(h),
            rcond: e.rcond,
        })?;
        Ok((g, solver))
    }

    fn plug_in_trace_with(&self, one_step: &[f64], k: usize, h: usize) -> Result<f64> {
        let (g, solver) = self.gram(k, h)?;
        let l = weighted_companion_sum(one_step, &self.b_hat, h, k);
        let gl = g.mul(&l);
        let ginv_lt = solver.solve_mat(&l.transpose());
        Ok(gl.trace_of_product(&ginv_lt))
    }

    /// `tr{G L G^{-1} L'}` with `G = sum_{j=k}^{n-h} x_j(k) x_j(k)'` and
    /// `L = sum_j b^_j A^_n^{h-1-j}(k)`.
    pub fn plug_in_trace(&self, k: usize, h: usize) -> Result<f64> {
        self.check(k, h)?;
        let one = fit_one_step(self.series, k, self.series.len())?;
        self.plug_in_trace_with(&one.coeffs, k, h)
    }

    /// `tr{G^{-1} Z}` with `Z = sum_{j=k}^{n-2h+1} z_j z_j'` and
    /// `z_j = sum_i b^_i x_{j+i}(k)`.
    pub fn direct_trace(&self, k: usize, h: usize) -> Result<f64> {
        self.check(k, h)?;
        let n = self.series.len();
        if n + 1 < 2 * h + k {
            return Err(Error::WindowTooShort {
                needed: 2 * h + k - 1,
                available: n,
            });
        }
        let (_, solver) = self.gram(k, h)?;
        let mut z = Matrix::zeros(k, k);
        let mut zj = vec![0.0; k];
        let mut x = vec![0.0; k];
        for j in k..=n + 1 - 2 * h {
            zj.iter_mut().for_each(|v| *v = 0.0);
            for (i, b) in self.b_hat[..h].iter().enumerate() {
                self.series.regressor_into(j + i, &mut x);
                for (s, xv) in zj.iter_mut().zip(&x) {
                    *s += b * xv;
                }
            }
            z.add_outer(&zj, 1.0);
        }
        Ok(solver.solve_mat(&z).trace())
    }

    pub fn pmic_terms(&self, k: usize, h: usize) -> Result<CriterionTerms> {
        self.check(k, h)?;
        let one = fit_one_step(self.series, k, self.series.len())?;
        let multi = plug_in_multi(&one, h)?;
        Ok(CriterionTerms {
            fit: residual_mse(self.series, &multi.coeffs, h, self.max_order)?,
            trace: self.plug_in_trace_with(&one.coeffs, k, h)?,
            scale: self.sigma_tilde2,
        })
    }

    pub fn dmic_terms(&self, k: usize, h: usize) -> Result<CriterionTerms> {
        self.check(k, h)?;
        let direct = fit_direct(self.series, k, h, self.series.len())?;
        Ok(CriterionTerms {
            fit: residual_mse(self.series, &direct.coeffs, h, self.max_order)?,
            trace: self.direct_trace(k, h)?,
            scale: self.sigma_tilde2,
        })
    }

    /// `PMIC_{n,h}(k)`.
    pub fn pmic(&self, k: usize, h: usize, penalty: PenaltyWeight) -> Result<f64> {
        Ok(self.pmic_terms(k, h)?.value(penalty.value(self.series.len())))
    }

    /// `DMIC_{n,h}(k)`.
    pub fn dmic(&self, k: usize, h: usize, penalty: PenaltyWeight) -> Result<f64> {
        Ok(self.dmic_terms(k, h)?.value(penalty.value(self.series.len())))
    }

    /// Every criterion term procedure II needs at horizon `h`.
    pub fn penalized_terms(&self, h: usize) -> Result<PenalizedTerms> {
        let orders = 1..=self.max_order;
        let one_step = orders
            .clone()
            .map(|k| self.dmic_terms(k, 1))
            .collect::<Result<Vec<_>>>()?;
        let direct = if h == 1 {
            one_step.clone()
        } else {
            orders.clone().map(|k| self.dmic_terms(k, h)).collect::<Result<Vec<_>>>()?
        };
        let plug_in = orders.map(|k| self.pmic_terms(k, h)).collect::<Result<Vec<_>>>()?;
        Ok(PenalizedTerms {
            n: self.series.len(),
            h,
            max_order: self.max_order,
            one_step,
            direct,
            plug_in,
        })
    }
}

/// Penalty-free ingredients of procedure II, so several penalties can be
/// applied to one series without refitting.
#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedTerms {
    pub n: usize,
    pub h: usize,
    pub max_order: usize,
    /// DMIC at horizon 1, index `k - 1`.
    pub one_step: Vec<CriterionTerms>,
    pub direct: Vec<CriterionTerms>,
    pub plug_in: Vec<CriterionTerms>,
}

impl PenalizedTerms {
    pub fn outcome(&self, penalty: PenaltyWeight) -> SelectionOutcome {
        let c_n = penalty.value(self.n);
        let eval = |v: &[CriterionTerms]| v.iter().map(|t| t.value(c_n)).collect::<Vec<_>>();
        decide(
            Procedure::Penalized,
            self.h,
            self.max_order,
            None,
            eval(&self.one_step),
            eval(&self.direct),
            eval(&self.plug_in),
        )
    }
}

pub fn pmic(series: &TimeSeries, k: usize, h: usize, max_order: usize, penalty: PenaltyWeight) -> Result<f64> {
    CriterionContext::new(series, max_order, h)?.pmic(k, h, penalty)
}

pub fn dmic(series: &TimeSeries, k: usize, h: usize, max_order: usize, penalty: PenaltyWeight) -> Result<f64> {
    CriterionContext::new(series, max_order, h)?.dmic(k, h, penalty)
}

/// Procedure II.
pub fn procedure_ii(
    series: &TimeSeries,
    h: usize,
    max_order: usize,
    penalty: PenaltyWeight,
) -> Result<SelectionOutcome> {
    let ctx = CriterionContext::new(series, max_order, h)?;
    Ok(ctx.penalized_terms(h)?.outcome(penalty))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy(n: usize) -> TimeSeries {
        // deterministic pseudo-noise, no generator needed
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut prev = 0.0;
        let v = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let e = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                prev = 0.5 * prev + e;
                prev
            })
            .collect();
        TimeSeries::new(v).unwrap()
    }

    #[test]
    fn penalty_presets() {
        assert_eq!(PenaltyWeight::default(), PenaltyWeight::B);
        let n = 1000;
        assert!((PenaltyWeight::C.value(n) - 3.0 * (1000f64).ln() / 1000.0).abs() < 1e-15);
        assert_eq!("a".parse::<PenaltyWeight>().unwrap(), PenaltyWeight::A);
        assert_eq!("2.5".parse::<PenaltyWeight>().unwrap().multiplier(), 2.5);
        assert!("-1".parse::<PenaltyWeight>().is_err());
        assert_eq!(PenaltyWeight::C.label(), "C");
    }

    #[test]
    fn start_index_counts_rows() {
        let s = noisy(60);
        assert_eq!(min_start_index(&s, 2, 1).unwrap(), 4);
        assert_eq!(min_start_index(&s, 2, 3).unwrap(), 6);
        let z = TimeSeries::new(vec![0.0; 40]).unwrap();
        assert!(matches!(min_start_index(&z, 2, 1), Err(Error::SeriesTooShort { .. })));
        assert!(matches!(min_start_index(&noisy(10), 8, 1), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn argmin_prefers_smallest_order() {
        assert_eq!(argmin_from(&[3.0, 1.0, 1.0, 2.0], 1), 2);
        assert_eq!(argmin_from(&[3.0, 1.0, 1.0, 2.0], 3), 3);
        assert_eq!(argmin_from(&[5.0], 1), 1);
    }

    #[test]
    fn step_three_tie_selects_direct() {
        let out = decide(Procedure::Ape, 2, 2, None, vec![1.0, 2.0], vec![4.0, 3.0], vec![5.0, 3.0]);
        assert_eq!((out.k, out.method), (2, Method::Direct));
        let out = decide(Procedure::Ape, 2, 2, None, vec![1.0, 2.0], vec![4.0, 3.0], vec![2.5, 3.0]);
        assert_eq!((out.k, out.method), (1, Method::PlugIn));
        let out = decide(Procedure::Ape, 2, 2, None, vec![2.0, 1.0], vec![4.0, 3.0], vec![2.5, 3.0]);
        assert_eq!((out.plug_in_order, out.method), (2, Method::Direct));
    }

    #[test]
    fn unit_horizon_ape_methods_coincide() {
        let s = noisy(80);
        for k in 1..=3 {
            let p = ape(&s, k, 1, Method::PlugIn, 3).unwrap();
            let d = ape(&s, k, 1, Method::Direct, 3).unwrap();
            assert!((p - d).abs() <= 1e-10 * p.max(1.0));
        }
    }

    #[test]
    fn unit_horizon_pmic_trace_is_order() {
        let s = noisy(200);
        let ctx = CriterionContext::new(&s, 4, 1).unwrap();
        for k in 1..=4 {
            assert!((ctx.plug_in_trace(k, 1).unwrap() - k as f64).abs() < 1e-9);
            assert!((ctx.direct_trace(k, 1).unwrap() - k as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_series_is_singular() {
        let z = TimeSeries::new(vec![0.0; 50]).unwrap();
        assert!(dmic(&z, 1, 2, 3, PenaltyWeight::B).unwrap_err().is_numerical());
    }
}
