//! Exact algebra of autoregressions with a single unit root.
//!
//! The levels model is `x_{t+1} = a_1 x_t + ... + a_{p+1} x_{t-p} + e_{t+1}`
//! with characteristic polynomial `A(z) = 1 - a_1 z - ... - a_{p+1} z^{p+1}`
//! factoring as `(1 - z) alpha(z)`, where `alpha` is stable. Companion
//! matrices use the column layout `( a | I ; 0' )`: the first column holds the
//! coefficients and the identity block sits above a zero row.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Points on the unit circle used by the stability check.
pub const STABILITY_GRID_POINTS: usize = 720;
/// `|alpha(z)|` must exceed this on every grid point.
pub const STABILITY_MODULUS_FLOOR: f64 = 1e-8;
/// The companion spectral radius must stay below `1 - STABILITY_RADIUS_MARGIN`.
pub const STABILITY_RADIUS_MARGIN: f64 = 1e-8;
/// Relative tolerance under which a direct coefficient counts as zero.
pub const ZERO_COEFF_TOL: f64 = 1e-9;
/// Target size of the first neglected MA weight.
pub const MA_TAIL_TOL: f64 = 1e-14;
pub const MAX_MA_TERMS: usize = 100_000;

/// Default tolerance on `|A(1)|` for accepting a unit root.
pub fn unit_root_tolerance(levels: &[f64]) -> f64 {
    1e-9 * (1.0 + levels.iter().map(|a| a.abs()).sum::<f64>())
}

/// `1 - sum(coeffs)`, i.e. the characteristic polynomial at `z = 1`.
pub fn polynomial_at_one(coeffs: &[f64]) -> f64 {
    1.0 - coeffs.iter().sum::<f64>()
}

/// Step-down (inverse Levinson) test: are all eigenvalues of the companion
/// of `coeffs` strictly inside the disc of radius `radius`?
fn eigenvalues_within(coeffs: &[f64], radius: f64) -> bool {
    let mut a: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c / libm::pow(radius, (i + 1) as f64))
        .collect();
    for m in (1..=a.len()).rev() {
        let kappa = a[m - 1];
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (1..m)
            .map(|i| (a[i - 1] + kappa * a[m - i - 1]) / denom)
            .collect();
        a.truncate(m - 1);
        a.copy_from_slice(&prev);
    }
    true
}

/// Spectral radius of the companion matrix of `coeffs` (equivalently the
/// reciprocal of the smallest root modulus of `1 - sum coeffs_i z^i`),
/// located by bisection on the step-down test. Returns an upper bound
/// accurate to about 1e-15 relative.
pub fn spectral_radius(coeffs: &[f64]) -> f64 {
    if coeffs.iter().all(|c| *c == 0.0) {
        return 0.0;
    }
    let mut lo = 0.0_f64;
    let mut hi = coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0) * (1.0 + 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eigenvalues_within(coeffs, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Smallest `|1 - sum coeffs_i z^i|` over the equispaced grid on `|z| = 1`.
pub fn unit_circle_min_modulus(coeffs: &[f64]) -> f64 {
    (0..STABILITY_GRID_POINTS)
        .map(|m| {
            let theta = 2.0 * PI * m as f64 / STABILITY_GRID_POINTS as f64;
            let (mut re, mut im) = (1.0, 0.0);
            for (i, c) in coeffs.iter().enumerate() {
                let w = theta * (i + 1) as f64;
                re -= c * libm::cos(w);
                im -= c * libm::sin(w);
            }
            libm::hypot(re, im)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `true` when `1 - sum coeffs_i z^i` has every root strictly outside the
/// unit circle, with the margins given by the module constants.
pub fn is_stable(coeffs: &[f64]) -> bool {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return false;
    }
    if coeffs.is_empty() {
        return true;
    }
    unit_circle_min_modulus(coeffs) > STABILITY_MODULUS_FLOOR
        && spectral_radius(coeffs) < 1.0 - STABILITY_RADIUS_MARGIN
}

/// Divides the levels polynomial by `(1 - z)` and returns the stationary
/// coefficients `alpha_1..alpha_p`.
pub fn deflate_unit_root(levels: &[f64], tol: f64) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(Error::invalid("levels coefficients must be nonempty"));
    }
    let at_one = polynomial_at_one(levels);
    if at_one.abs() > tol {
        return Err(Error::NotUnitRoot {
            value: at_one,
            tol,
        });
    }
    // alpha_i = a_1 + ... + a_i - 1
    let mut acc = -1.0;
    let alpha: Vec<f64> = levels[..levels.len() - 1]
        .iter()
        .map(|a| {
            acc += a;
            acc
        })
        .collect();
    if !is_stable(&alpha) {
        return Err(Error::UnstableStationaryPart);
    }
    Ok(alpha)
}

/// Levels coefficients of `(1 - z) alpha(z)`.
pub fn integrate_unit_root(alpha: &[f64]) -> Vec<f64> {
    let p = alpha.len();
    (0..=p)
        .map(|i| {
            let cur = if i < p { alpha[i] } else { 0.0 };
            let prev = if i == 0 { -1.0 } else { alpha[i - 1] };
            cur - prev
        })
        .collect()
}

/// `( coeffs | I_{k-1} ; 0'_{k-1} )`.
pub fn companion_matrix(coeffs: &[f64]) -> Result<Matrix> {
    if coeffs.is_empty() {
        return Err(Error::invalid("companion matrix needs at least one coefficient"));
    }
    Ok(companion(coeffs))
}

pub(crate) fn companion(coeffs: &[f64]) -> Matrix {
    let k = coeffs.len();
    let mut m = Matrix::zeros(k, k);
    for i in 0..k {
        m[(i, 0)] = coeffs[i];
        if i + 1 < k {
            m[(i, i + 1)] = 1.0;
        }
    }
    m
}

/// Companion of `coeffs` truncated or zero-padded to dimension `dim`.
pub(crate) fn companion_padded(coeffs: &[f64], dim: usize) -> Matrix {
    let padded: Vec<f64> = (0..dim).map(|i| coeffs.get(i).copied().unwrap_or(0.0)).collect();
    companion(&padded)
}

/// `(companion of coeffs) * v` without forming the matrix.
pub(crate) fn companion_apply(coeffs: &[f64], v: &[f64]) -> Vec<f64> {
    let k = coeffs.len();
    (0..k)
        .map(|i| coeffs[i] * v[0] + if i + 1 < k { v[i + 1] } else { 0.0 })
        .collect()
}

/// `A^{h-1} a`: the coefficients of the exact h-step projection on
/// `x_t(k)`. Horizon 1 returns `coeffs` unchanged.
pub fn companion_power_coefficients(coeffs: &[f64], h: usize) -> Vec<f64> {
    let mut v = coeffs.to_vec();
    for _ in 1..h {
        v = companion_apply(coeffs, &v);
    }
    v
}

/// Largest index whose coefficient is not numerically zero (at least 1).
pub fn minimal_order(coeffs: &[f64]) -> usize {
    let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let tol = ZERO_COEFF_TOL * scale;
    coeffs
        .iter()
        .rposition(|c| c.abs() > tol)
        .map_or(1, |j| j + 1)
}

/// Impulse response of `1 / (1 - sum coeffs_l z^l)` up to lag `len`:
/// `w_0 = 1`, `w_j = sum_{l=1}^{min(j,p)} coeffs_l w_{j-l}`.
pub fn impulse_response(coeffs: &[f64], len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len + 1);
    w.push(1.0);
    for j in 1..=len {
        let upto = j.min(coeffs.len());
        let v: f64 = (1..=upto).map(|l| coeffs[l - 1] * w[j - l]).sum();
        w.push(v);
    }
    w
}

/// Truncation length after which the impulse response of a stable filter
/// is below [`MA_TAIL_TOL`], from the geometric bound `rho^J`.
pub fn default_ma_truncation(coeffs: &[f64]) -> usize {
    let p = coeffs.len();
    if p == 0 {
        return 0;
    }
    let rho = spectral_radius(coeffs);
    if rho >= 1.0 {
        return MAX_MA_TERMS;
    }
    if rho == 0.0 {
        return p;
    }
    let c = 1.0 + coeffs.iter().map(|a| a.abs()).sum::<f64>();
    let j = libm::ceil(libm::log(MA_TAIL_TOL / c) / libm::log(rho));
    (j as usize).saturating_add(p).min(MAX_MA_TERMS)
}

/// Impulse response long enough that the last `p` weights are negligible
/// relative to the largest one (repeated roots slow the decay below `rho^J`).
pub fn converged_impulse_response(coeffs: &[f64]) -> Vec<f64> {
    let p = coeffs.len().max(1);
    let mut len = default_ma_truncation(coeffs);
    loop {
        let w = impulse_response(coeffs, len);
        let peak = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tail = w[w.len().saturating_sub(p)..]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if len == 0 || tail <= MA_TAIL_TOL * peak || len >= MAX_MA_TERMS {
            return w;
        }
        len = (len * 2).min(MAX_MA_TERMS);
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("innovation variance must be positive and finite"))
    }
}

fn check_leading(levels: &[f64]) -> Result<()> {
    match levels.last() {
        None => Err(Error::invalid("levels coefficients must be nonempty")),
        Some(a) if *a == 0.0 => Err(Error::invalid("last levels coefficient must be nonzero")),
        Some(_) if levels.iter().any(|a| !a.is_finite()) => {
            Err(Error::invalid("levels coefficients must be finite"))
        }
        Some(_) => Ok(()),
    }
}

/// Autoregression with exactly one unit root at `z = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitRootArModel {
    levels: Vec<f64>,
    stationary: Vec<f64>,
    sigma2: f64,
}

impl UnitRootArModel {
    pub fn new(levels: Vec<f64>, sigma2: f64) -> Result<Self> {
        let tol = unit_root_tolerance(&levels);
        Self::with_tolerance(levels, sigma2, tol)
    }

    pub fn with_tolerance(levels: Vec<f64>, sigma2: f64, tol: f64) -> Result<Self> {
        check_leading(&levels)?;
        check_sigma2(sigma2)?;
        let stationary = deflate_unit_root(&levels, tol)?;
        Ok(UnitRootArModel {
            levels,
            stationary,
            sigma2,
        })
    }

    /// Builds the model from its stationary part `alpha`.
    pub fn from_stationary(alpha: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        if !is_stable(&alpha) {
            return Err(Error::UnstableStationaryPart);
        }
        let levels = integrate_unit_root(&alpha);
        check_leading(&levels)?;
        Ok(UnitRootArModel {
            levels,
            stationary: alpha,
            sigma2,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `alpha_1..alpha_p`; empty for a random walk.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn p(&self) -> usize {
        self.stationary.len()
    }

    /// Minimal correct order for one-step prediction, `p + 1`.
    pub fn p1(&self) -> usize {
        self.levels.len()
    }
}

/// Stable autoregression in levels (no unit root).
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryArModel {
    coeffs: Vec<f64>,
    sigma2: f64,
}

impl StationaryArModel {
    pub fn new(coeffs: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_leading(&coeffs)?;
        check_sigma2(sigma2)?;
        if !is_stable(&coeffs) {
            return Err(Error::NotStationary);
        }
        Ok(StationaryArModel { coeffs, sigma2 })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn p1(&self) -> usize {
        self.coeffs.len()
    }
}

/// Either kind of autoregression accepted by the theory and simulation code.
#[derive(Clone, Debug, PartialEq)]
pub enum ArModel {
    UnitRoot(UnitRootArModel),
    Stationary(StationaryArModel),
}

impl ArModel {
    /// Unit-root model when `A(1)` vanishes within the default tolerance,
    /// otherwise a stationary model (which must then be stable).
    pub fn classify(levels: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_leading(&levels)?;
        if polynomial_at_one(&levels).abs() <= unit_root_tolerance(&levels) {
            UnitRootArModel::new(levels, sigma2).map(ArModel::UnitRoot)
        } else {
            StationaryArModel::new(levels, sigma2).map(ArModel::Stationary)
        }
    }

    pub fn levels(&self) -> &[f64] {
        match self {
            ArModel::UnitRoot(m) => m.levels(),
            ArModel::Stationary(m) => m.coeffs(),
        }
    }

    pub fn sigma2(&self) -> f64 {
        match self {
            ArModel::UnitRoot(m) => m.sigma2(),
            ArModel::Stationary(m) => m.sigma2(),
        }
    }

    pub fn has_unit_root(&self) -> bool {
        matches!(self, ArModel::UnitRoot(_))
    }

    pub fn p1(&self) -> usize {
        self.levels().len()
    }

    /// MA weights of `1 / A(z)` up to lag `len` (the `b_j` for unit-root models).
    pub fn forecast_error_weights(&self, len: usize) -> Vec<f64> {
        impulse_response(self.levels(), len)
    }

    pub fn direct_coefficients(&self, h: usize) -> DirectCoefficients {
        DirectCoefficients::from_levels(self.levels(), h)
    }

    /// `sigma^2 sum_{j<h} w_j^2` with `w` the MA weights of `1 / A(z)`.
    pub fn sigma_h_squared(&self, h: usize) -> f64 {
        let w = self.forecast_error_weights(h.saturating_sub(1));
        self.sigma2() * w.iter().take(h).map(|b| b * b).sum::<f64>()
    }
}

/// MA weights of the differenced process (`c`) and of the levels (`b`).
#[derive(Clone, Debug, PartialEq)]
pub struct MaWeights {
    pub c: Vec<f64>,
    pub b: Vec<f64>,
}

impl MaWeights {
    pub fn len(&self) -> usize {
        self.c.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `c_0..c_J` from `1 / alpha(z)` and their partial sums `b_j = c_0 + ... + c_j`.
pub fn ma_weights(model: &UnitRootArModel, len: usize) -> MaWeights {
    let c = impulse_response(model.stationary(), len);
    let mut acc = 0.0;
    let b = c
        .iter()
        .map(|ci| {
            acc += ci;
            acc
        })
        .collect();
    MaWeights { c, b }
}

/// `sigma_h^2 = sigma^2 sum_{j=0}^{h-1} b_j^2`.
pub fn sigma_h_squared(model: &UnitRootArModel, h: usize) -> f64 {
    let w = ma_weights(model, h.saturating_sub(1));
    model.sigma2() * w.b.iter().take(h).map(|b| b * b).sum::<f64>()
}

/// Exact h-step direct coefficients `a(h, p+1)` and the minimal direct order.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectCoefficients {
    pub h: usize,
    pub coeffs: Vec<f64>,
    pub p_h: usize,
}

impl DirectCoefficients {
    pub fn from_levels(levels: &[f64], h: usize) -> Self {
        let coeffs = companion_power_coefficients(levels, h.max(1));
        let p_h = minimal_order(&coeffs);
        DirectCoefficients { h, coeffs, p_h }
    }

    /// Coefficients of the order-`k` direct predictor, zero-padded or truncated.
    pub fn truncated(&self, k: usize) -> Vec<f64> {
        (0..k).map(|i| self.coeffs.get(i).copied().unwrap_or(0.0)).collect()
    }

    /// `a(h,p+1)' x_t(p+1)`, the optimal h-step forecast from `x_t(p+1)`.
    pub fn project(&self, regressor: &[f64]) -> f64 {
        dot(&self.coeffs, regressor)
    }
}

pub fn direct_coefficients(model: &UnitRootArModel, h: usize) -> DirectCoefficients {
    DirectCoefficients::from_levels(model.levels(), h)
}

/// Coefficient of `z^i` in `prod` of the given polynomials (ascending powers).
pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
