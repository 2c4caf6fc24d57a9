//! Asymptotic loss constants of plug-in and direct predictors.
//!
//! For a unit-root model and working order `k >= p_1` (plug-in) or
//! `k >= p_h` (direct),
//!
//! ```text
//! n (MSPE - sigma_h^2) -> 2 sigma^2 (b_0 + ... + b_{h-1})^2 + f(k-1)
//! ```
//!
//! where the order/method-dependent part `f` is a trace form in the
//! autocovariances `Gamma(k-1)` of the differenced process:
//!
//! * plug-in: `f_{1,h}(k-1) = tr(Gamma M_h Gamma^{-1} M_h') sigma^2`,
//!   `M_h = sum_j b_j S^{h-1-j}`, `S` the companion of `alpha` at dimension `k-1`;
//! * direct: `f_{2,h}(k-1) = tr(Gamma^{-1} cov(sum_j b_j s_{t+j}(k-1))) sigma^2`.
//!
//! Below the minimal order the loss is `+inf`. Stationary models use the same
//! trace forms with the levels coefficients, MA weights of `1/A(z)` and
//! dimension `k`, and no unit-root term.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, Matrix, SpdSolver};
use crate::model::{
    companion_padded, converged_impulse_response, impulse_response, ma_weights, minimal_order,
    companion_power_coefficients, ArModel, StationaryArModel, UnitRootArModel,
};
use crate::predictor::Method;

/// Relative gap under which two losses are reported as tied.
pub const LOSS_TIE_TOL: f64 = 1e-10;

/// Autocovariances `gamma(0..=L)` of a stationary process.
#[derive(Clone, Debug, PartialEq)]
pub struct AutocovarianceTable {
    gamma: Vec<f64>,
}

impl AutocovarianceTable {
    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    /// `gamma(m)` for any integer lag (symmetric; zero past the table).
    pub fn get(&self, m: isize) -> f64 {
        self.gamma.get(m.unsigned_abs()).copied().unwrap_or(0.0)
    }

    /// `Gamma(dim)`, the Toeplitz matrix `gamma(u - v)`.
    pub fn toeplitz(&self, dim: usize) -> Matrix {
        self.lagged(0, dim)
    }

    /// The `dim x dim` matrix with `(u, v)` entry `gamma(m - u + v)`, i.e.
    /// `E[s_t(dim) s_{t+m}(dim)']`.
    pub fn lagged(&self, m: isize, dim: usize) -> Matrix {
        Matrix::from_fn(dim, dim, |u, v| self.get(m - u as isize + v as isize))
    }
}

/// `gamma(m) = sigma^2 sum_i w_i w_{i+m}` with `w` the MA weights of
/// `1 / (1 - sum coeffs_l z^l)`.
pub fn autocovariances_of(coeffs: &[f64], sigma2: f64, max_lag: usize) -> AutocovarianceTable {
    let w = converged_impulse_response(coeffs);
    let gamma = (0..=max_lag)
        .map(|m| {
            if m >= w.len() {
                return 0.0;
            }
            let s: CompensatedSum = w[..w.len() - m]
                .iter()
                .zip(&w[m..])
                .map(|(a, b)| a * b)
                .collect();
            sigma2 * s.value()
        })
        .collect();
    AutocovarianceTable { gamma }
}

/// Autocovariances of the differenced series `s_t = x_t - x_{t-1}`.
pub fn autocovariances(model: &UnitRootArModel, max_lag: usize) -> AutocovarianceTable {
    autocovariances_of(model.stationary(), model.sigma2(), max_lag)
}

/// `sum_{j=0}^{h-1} w_j S^{h-1-j}` by Horner's rule.
pub(crate) fn weighted_companion_sum(ar: &[f64], weights: &[f64], h: usize, dim: usize) -> Matrix {
    let s = companion_padded(ar, dim);
    let mut m = Matrix::identity(dim);
    m.scale(weights[0]);
    for w in weights.iter().take(h).skip(1) {
        m = m.mul(&s);
        m.add_diagonal(*w);
    }
    m
}

/// `M_h(dim) = sum_{j=0}^{h-1} b_j S_M^{h-1-j}(dim)`.
pub fn m_h_matrix(model: &UnitRootArModel, h: usize, dim: usize) -> Result<Matrix> {
    if h == 0 || dim == 0 {
        return Err(Error::invalid("m_h_matrix needs h >= 1 and dim >= 1"));
    }
    let b = ma_weights(model, h - 1).b;
    Ok(weighted_companion_sum(model.stationary(), &b, h, dim))
}

/// Evaluates both trace forms for one stationary filter, weight sequence
/// and horizon, sharing the autocovariance table across dimensions.
struct TraceForms<'a> {
    ar: &'a [f64],
    weights: Vec<f64>,
    sigma2: f64,
    h: usize,
    gamma: AutocovarianceTable,
}

impl<'a> TraceForms<'a> {
    fn new(ar: &'a [f64], weights: Vec<f64>, sigma2: f64, h: usize, max_dim: usize) -> Self {
        debug_assert!(weights.len() >= h);
        // gamma(m - u + v) with |m| <= h-1 and |u - v| <= dim-1
        let gamma = autocovariances_of(ar, sigma2, max_dim + h);
        TraceForms {
            ar,
            weights,
            sigma2,
            h,
            gamma,
        }
    }

    fn gamma_solver(&self, dim: usize) -> Result<SpdSolver> {
        SpdSolver::new(&self.gamma.toeplitz(dim)).map_err(|_| Error::SingularGamma { dim })
    }

    fn plug_in(&self, dim: usize) -> Result<f64> {
        if dim == 0 {
            return Ok(0.0);
        }
        let gamma = self.gamma.toeplitz(dim);
        let solver = self.gamma_solver(dim)?;
        let m = weighted_companion_sum(self.ar, &self.weights, self.h, dim);
        let x = solver.solve_mat(&m.transpose());
        Ok(gamma.mul(&m).trace_of_product(&x) * self.sigma2)
    }

    /// Limiting covariance of `sum_j w_j s_{t+j}(dim)`.
    fn weighted_covariance(&self, dim: usize) -> Matrix {
        let mut c = Matrix::zeros(dim, dim);
        for j in 0..self.h {
            for l in 0..self.h {
                let w = self.weights[j] * self.weights[l];
                if w != 0.0 {
                    c.add_scaled(&self.gamma.lagged(j as isize - l as isize, dim), w);
                }
            }
        }
        c
    }

    fn direct(&self, dim: usize) -> Result<f64> {
        if dim == 0 {
            return Ok(0.0);
        }
        let solver = self.gamma_solver(dim)?;
        let c = self.weighted_covariance(dim);
        Ok(solver.solve_mat(&c).trace() * self.sigma2)
    }
}

fn unit_root_forms(model: &UnitRootArModel, h: usize, max_dim: usize) -> TraceForms<'_> {
    let b = ma_weights(model, h - 1).b;
    TraceForms::new(model.stationary(), b, model.sigma2(), h, max_dim)
}

fn check_hk(h: usize, k: usize) -> Result<()> {
    if h == 0 || k == 0 {
        Err(Error::invalid("horizon and order must be at least 1"))
    } else {
        Ok(())
    }
}

/// `f_{1,h}(k-1)`; zero for `k = 1`.
pub fn f1h(model: &UnitRootArModel, h: usize, k: usize) -> Result<f64> {
    check_hk(h, k)?;
    unit_root_forms(model, h, k - 1).plug_in(k - 1)
}

/// `f_{2,h}(k-1)`; zero for `k = 1`.
pub fn f2h(model: &UnitRootArModel, h: usize, k: usize) -> Result<f64> {
    check_hk(h, k)?;
    unit_root_forms(model, h, k - 1).direct(k - 1)
}

/// The printed two-step closed forms, with `alpha_j = 0` for `j > p`:
///
/// * plug-in: `{(k-2) + alpha_{k-1}^2 + 2 alpha_1 b_1 + b_1^2 (k-1)} sigma^2`
/// * direct: `{(k-1)(1 + b_1^2) + 2 alpha_1 b_1} sigma^2`
pub fn closed_form_h2(model: &UnitRootArModel, k: usize, method: Method) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("two-step closed forms need k >= 2"));
    }
    let alpha = |j: usize| model.stationary().get(j - 1).copied().unwrap_or(0.0);
    let a1 = alpha(1);
    let b1 = 1.0 + a1;
    let km1 = (k - 1) as f64;
    let value = match method {
        Method::PlugIn => (km1 - 1.0) + alpha(k - 1) * alpha(k - 1) + 2.0 * a1 * b1 + b1 * b1 * km1,
        Method::Direct => km1 * (1.0 + b1 * b1) + 2.0 * a1 * b1,
    };
    Ok(value * model.sigma2())
}

/// `L_{j,h}(k)`: asymptotic loss of a candidate, possibly `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoreticalLoss {
    pub value: f64,
    pub k: usize,
    pub method: Method,
    pub h: usize,
}

impl TheoreticalLoss {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `2 sigma^2 (b_0 + ... + b_{h-1})^2`, shared by every correctly specified predictor.
pub fn unit_root_term(model: &UnitRootArModel, h: usize) -> f64 {
    let b = ma_weights(model, h.saturating_sub(1)).b;
    let s: f64 = b.iter().take(h).sum();
    2.0 * model.sigma2() * s * s
}

/// Losses of every `(k, method)` with `1 <= k <= max_order`, plug-in first
/// within each order.
pub fn loss_table(model: &UnitRootArModel, h: usize, max_order: usize) -> Result<Vec<TheoreticalLoss>> {
    check_hk(h, max_order)?;
    let forms = unit_root_forms(model, h, max_order - 1);
    let common = unit_root_term(model, h);
    let p1 = model.p1();
    let ph = minimal_order(&companion_power_coefficients(model.levels(), h));
    let mut out = Vec::with_capacity(2 * max_order);
    for k in 1..=max_order {
        for method in Method::ALL {
            let value = match method {
                Method::PlugIn if k < p1 => f64::INFINITY,
                Method::Direct if k < ph => f64::INFINITY,
                Method::PlugIn => common + forms.plug_in(k - 1)?,
                Method::Direct => common + forms.direct(k - 1)?,
            };
            out.push(TheoreticalLoss { value, k, method, h });
        }
    }
    Ok(out)
}

/// `L_{1,h}(k)` or `L_{2,h}(k)` for a unit-root model.
pub fn loss(model: &UnitRootArModel, h: usize, k: usize, method: Method) -> Result<TheoreticalLoss> {
    check_hk(h, k)?;
    let min_order = match method {
        Method::PlugIn => model.p1(),
        Method::Direct => minimal_order(&companion_power_coefficients(model.levels(), h)),
    };
    let value = if k < min_order {
        f64::INFINITY
    } else {
        let forms = unit_root_forms(model, h, k - 1);
        let f = match method {
            Method::PlugIn => forms.plug_in(k - 1)?,
            Method::Direct => forms.direct(k - 1)?,
        };
        unit_root_term(model, h) + f
    };
    Ok(TheoreticalLoss { value, k, method, h })
}

fn stationary_forms(model: &StationaryArModel, h: usize, max_dim: usize) -> TraceForms<'_> {
    let psi = impulse_response(model.coeffs(), h - 1);
    TraceForms::new(model.coeffs(), psi, model.sigma2(), h, max_dim)
}

/// Loss of a candidate predictor for a stationary AR model.
///
/// Same trace forms as the unit-root case, built from the levels
/// coefficients at dimension `k` with the MA weights of `1/A(z)`. There is
/// no unit-root term.
pub fn loss_stationary(
    model: &StationaryArModel,
    h: usize,
    k: usize,
    method: Method,
) -> Result<TheoreticalLoss> {
    check_hk(h, k)?;
    let min_order = match method {
        Method::PlugIn => model.p1(),
        Method::Direct => minimal_order(&companion_power_coefficients(model.coeffs(), h)),
    };
    let value = if k < min_order {
        f64::INFINITY
    } else {
        let forms = stationary_forms(model, h, k);
        match method {
            Method::PlugIn => forms.plug_in(k)?,
            Method::Direct => forms.direct(k)?,
        }
    };
    Ok(TheoreticalLoss { value, k, method, h })
}

pub fn loss_table_stationary(
    model: &StationaryArModel,
    h: usize,
    max_order: usize,
) -> Result<Vec<TheoreticalLoss>> {
    check_hk(h, max_order)?;
    let forms = stationary_forms(model, h, max_order);
    let p1 = model.p1();
    let ph = minimal_order(&companion_power_coefficients(model.coeffs(), h));
    let mut out = Vec::with_capacity(2 * max_order);
    for k in 1..=max_order {
        out.push(TheoreticalLoss {
            value: if k < p1 { f64::INFINITY } else { forms.plug_in(k)? },
            k,
            method: Method::PlugIn,
            h,
        });
        out.push(TheoreticalLoss {
            value: if k < ph { f64::INFINITY } else { forms.direct(k)? },
            k,
            method: Method::Direct,
            h,
        });
    }
    Ok(out)
}

/// Every `(k, method)` whose loss is within [`LOSS_TIE_TOL`] (relative) of
/// the minimum, ordered by `k` then plug-in before direct.
pub fn minimizers(losses: &[TheoreticalLoss]) -> Vec<(usize, Method)> {
    let best = losses.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Vec::new();
    }
    let tol = LOSS_TIE_TOL * best.abs().max(f64::MIN_POSITIVE);
    let mut out: Vec<(usize, Method)> = losses
        .iter()
        .filter(|l| l.value - best <= tol)
        .map(|l| (l.k, l.method))
        .collect();
    out.sort();
    out
}

fn check_max_order(max_order: usize, p1: usize) -> Result<()> {
    if max_order < p1 {
        Err(Error::invalid(alloc::format!(
            "maximum order {max_order} is below the one-step minimal order {p1}"
        )))
    } else {
        Ok(())
    }
}

/// The optimal set `C_{h,K}` for a unit-root model.
pub fn best_combinations(
    model: &UnitRootArModel,
    h: usize,
    max_order: usize,
) -> Result<Vec<(usize, Method)>> {
    check_max_order(max_order, model.p1())?;
    Ok(minimizers(&loss_table(model, h, max_order)?))
}

pub fn best_combinations_stationary(
    model: &StationaryArModel,
    h: usize,
    max_order: usize,
) -> Result<Vec<(usize, Method)>> {
    check_max_order(max_order, model.p1())?;
    Ok(minimizers(&loss_table_stationary(model, h, max_order)?))
}

/// Dispatches to the unit-root or stationary loss path.
pub fn model_loss_table(model: &ArModel, h: usize, max_order: usize) -> Result<Vec<TheoreticalLoss>> {
    match model {
        ArModel::UnitRoot(m) => loss_table(m, h, max_order),
        ArModel::Stationary(m) => loss_table_stationary(m, h, max_order),
    }
}

pub fn model_best_combinations(
    model: &ArModel,
    h: usize,
    max_order: usize,
) -> Result<Vec<(usize, Method)>> {
    match model {
        ArModel::UnitRoot(m) => best_combinations(m, h, max_order),
        ArModel::Stationary(m) => best_combinations_stationary(m, h, max_order),
    }
}

/// The AR(4) family `(1 - B)(1 + a1 B)(1 + a2 B^2)` with `a2 = a1^2 - a1 + 1`,
/// for which `p_3 = 3 = p_1 - 1`.
pub fn reduced_order_model(a1: f64) -> Result<UnitRootArModel> {
    if !(a1 > 0.0 && a1 < 1.0) {
        return Err(Error::invalid("a1 must lie in (0, 1)"));
    }
    let a2 = a1 * a1 - a1 + 1.0;
    UnitRootArModel::new(
        alloc::vec![1.0 - a1, a1 - a2, a2 * (1.0 - a1), a1 * a2],
        1.0,
    )
}

/// `f_{2,3}(2) - f_{1,3}(3)` for [`reduced_order_model`] with unit innovation variance.
pub fn reduced_order_gap(a1: f64) -> Result<f64> {
    let model = reduced_order_model(a1)?;
    let forms = unit_root_forms(&model, 3, 3);
    Ok(forms.direct(2)? - forms.plug_in(3)?)
}
