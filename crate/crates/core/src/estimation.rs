//! Least-squares fits of one-step and direct h-step autoregressions.
//!
//! With sample end `i`, the order-`k` regression for horizon `h` uses the
//! regressor rows `x_j(k)` for `j = k..=i-h` and targets `x_{j+h}`. The
//! one-step fit is the `h = 1` case. Plug-in h-step coefficients come from
//! powering the companion matrix of the one-step fit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, Matrix, NotPositiveDefinite, SpdSolver};
use crate::model::{companion_power_coefficients, impulse_response};
use crate::predictor::Method;
use crate::series::TimeSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct FittedCoefficients {
    pub coeffs: Vec<f64>,
    /// Horizon the coefficients forecast.
    pub h: usize,
    pub method: Method,
    /// Last observation index available to the fit.
    pub sample_end: usize,
}

impl FittedCoefficients {
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }
}

/// Running normal-equation sums `sum x_j(k) x_j(k)'` and `sum x_j(k) y_j`.
#[derive(Clone, Debug)]
pub struct GramAccumulator {
    gram: Matrix,
    cross: Vec<f64>,
    count: usize,
}

impl GramAccumulator {
    pub fn new(k: usize) -> Self {
        GramAccumulator {
            gram: Matrix::zeros(k, k),
            cross: vec![0.0; k],
            count: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.cross.len()
    }

    pub fn push(&mut self, regressor: &[f64], target: f64) {
        self.gram.add_outer(regressor, 1.0);
        for (c, x) in self.cross.iter_mut().zip(regressor) {
            *c += x * target;
        }
        self.count += 1;
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn cross(&self) -> &[f64] {
        &self.cross
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn solver(&self) -> Result<SpdSolver, NotPositiveDefinite> {
        if self.count < self.order() {
            return Err(NotPositiveDefinite { rcond: 0.0 });
        }
        SpdSolver::new(&self.gram)
    }

    pub fn solve(&self) -> Result<Vec<f64>, NotPositiveDefinite> {
        self.solver().map(|s| s.solve_vec(&self.cross))
    }
}

/// Order-`k`, horizon-`h` regression whose sample end only moves forward.
///
/// Rows are added to the Gram sums as the sample end advances; each fit is
/// a fresh factorization of the accumulated sums.
#[derive(Clone, Debug)]
pub struct ExpandingRegression<'a> {
    series: &'a TimeSeries,
    h: usize,
    acc: GramAccumulator,
    next_row: usize,
    buf: Vec<f64>,
}

impl<'a> ExpandingRegression<'a> {
    pub fn new(series: &'a TimeSeries, k: usize, h: usize) -> Self {
        assert!(k >= 1 && h >= 1, "order and horizon must be positive");
        ExpandingRegression {
            series,
            h,
            acc: GramAccumulator::new(k),
            next_row: k,
            buf: vec![0.0; k],
        }
    }

    pub fn order(&self) -> usize {
        self.acc.order()
    }

    pub fn accumulator(&self) -> &GramAccumulator {
        &self.acc
    }

    /// Adds every row available at sample end `i` (rows `j <= i - h`).
    pub fn advance_to(&mut self, i: usize) {
        assert!(i <= self.series.len(), "sample end past the series");
        while self.next_row + self.h <= i {
            let j = self.next_row;
            self.series.regressor_into(j, &mut self.buf);
            self.acc.push(&self.buf, self.series.at(j + self.h));
            self.next_row += 1;
        }
    }

    /// Coefficients at sample end `i`.
    pub fn fit_at(&mut self, i: usize) -> Result<Vec<f64>> {
        self.advance_to(i);
        let k = self.order();
        self.acc.solve().map_err(|e| Error::SingularDesign {
            order: k,
            first_row: k,
            last_row: (i + 1).saturating_sub(self.h + 1),
            rcond: e.rcond,
        })
    }
}

fn check_fit_args(series: &TimeSeries, k: usize, h: usize, i: usize) -> Result<()> {
    if k == 0 || h == 0 {
        return Err(Error::invalid("order and horizon must be at least 1"));
    }
    if i == 0 || i > series.len() {
        return Err(Error::invalid(alloc::format!(
            "sample end {i} outside 1..={}",
            series.len()
        )));
    }
    Ok(())
}

/// `a_i(1, k)`: solves `(sum_{j=k}^{i-1} x_j x_j') a = sum_{j=k}^{i-1} x_j x_{j+1}`.
pub fn fit_one_step(series: &TimeSeries, k: usize, i: usize) -> Result<FittedCoefficients> {
    check_fit_args(series, k, 1, i)?;
    let coeffs = ExpandingRegression::new(series, k, 1).fit_at(i)?;
    Ok(FittedCoefficients {
        coeffs,
        h: 1,
        method: Method::PlugIn,
        sample_end: i,
    })
}

/// Direct `a_i(h, k)`: regression of `x_{j+h}` on `x_j(k)` over `j = k..=i-h`.
pub fn fit_direct(series: &TimeSeries, k: usize, h: usize, i: usize) -> Result<FittedCoefficients> {
    check_fit_args(series, k, h, i)?;
    let coeffs = ExpandingRegression::new(series, k, h).fit_at(i)?;
    Ok(FittedCoefficients {
        coeffs,
        h,
        method: Method::Direct,
        sample_end: i,
    })
}

/// Plug-in `a_i(h, k) = A_i^{h-1}(k) a_i(1, k)`.
pub fn plug_in_multi(one_step: &FittedCoefficients, h: usize) -> Result<FittedCoefficients> {
    if one_step.h != 1 || one_step.method != Method::PlugIn {
        return Err(Error::invalid("plug-in coefficients need a one-step plug-in fit"));
    }
    if h == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    Ok(FittedCoefficients {
        coeffs: companion_power_coefficients(&one_step.coeffs, h),
        h,
        method: Method::PlugIn,
        sample_end: one_step.sample_end,
    })
}

/// h-step residual mean square over the common window `j = K..=n-h`:
/// `(n - h - K)^{-1} sum (x_{j+h} - coeffs' x_j(k))^2`.
///
/// The window and divisor depend only on `max_order`, so every candidate
/// order is scored on the same observations.
pub fn residual_mse(series: &TimeSeries, coeffs: &[f64], h: usize, max_order: usize) -> Result<f64> {
    let n = series.len();
    let k = coeffs.len();
    if k == 0 || k > max_order || h == 0 {
        return Err(Error::invalid("need 1 <= k <= K and h >= 1"));
    }
    if n < h + max_order + 1 {
        return Err(Error::WindowTooShort {
            needed: h + max_order + 1,
            available: n,
        });
    }
    let mut buf = vec![0.0; k];
    let mut sum = CompensatedSum::new();
    for j in max_order..=n - h {
        series.regressor_into(j, &mut buf);
        let e = series.at(j + h) - crate::linalg::dot(coeffs, &buf);
        sum.add(e * e);
    }
    Ok(sum.value() / (n - h - max_order) as f64)
}

/// `b_0 = 1`, `b_j = sum_{l=1}^{j} b_{j-l} a_l(1, K)` with `a_l = 0` past `K`.
pub fn fitted_ma_weights(one_step: &FittedCoefficients, len: usize) -> Vec<f64> {
    impulse_response(&one_step.coeffs, len)
}
