use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimation::FittedCoefficients;
use crate::linalg::dot;
use crate::predictor::PredictorSpec;
use crate::series::TimeSeries;

/// Point forecast of `x_{origin + horizon}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Forecast {
    pub value: f64,
    pub origin: usize,
    pub horizon: usize,
    pub spec: PredictorSpec,
}

/// `x_n(k)' coeffs` at origin `n`.
pub fn predict(series: &TimeSeries, coeffs: &FittedCoefficients, origin: usize) -> Result<Forecast> {
    let k = coeffs.k();
    if origin > series.len() {
        return Err(Error::invalid(alloc::format!(
            "forecast origin {origin} past the end of a series of length {}",
            series.len()
        )));
    }
    if origin < k || k == 0 {
        return Err(Error::InsufficientHistory { origin, order: k });
    }
    let value = dot(&coeffs.coeffs, &series.regressor(origin, k));
    if !value.is_finite() {
        return Err(Error::invalid("forecast is not finite"));
    }
    Ok(Forecast {
        value,
        origin,
        horizon: coeffs.h,
        spec: PredictorSpec::new(k, coeffs.method, coeffs.h),
    })
}

/// Iterates one-step forecasts `h` times, feeding each back as a
/// pseudo-observation. Returns the final forecast.
pub fn iterate_one_step(series: &TimeSeries, one_step: &[f64], origin: usize, h: usize) -> Result<f64> {
    let k = one_step.len();
    if origin < k || k == 0 || origin > series.len() {
        return Err(Error::InsufficientHistory { origin, order: k });
    }
    // newest first
    let mut window: Vec<f64> = series.regressor(origin, k);
    let mut next = 0.0;
    for _ in 0..h {
        next = dot(one_step, &window);
        window.rotate_right(1);
        window[0] = next;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::Method;
    use alloc::vec;

    fn fitted(c: Vec<f64>, h: usize) -> FittedCoefficients {
        FittedCoefficients {
            coeffs: c,
            h,
            method: Method::PlugIn,
            sample_end: 0,
        }
    }

    #[test]
    fn random_walk_forecast_is_last_value() {
        let s = TimeSeries::new(vec![2.0, 5.0, 7.0]).unwrap();
        for h in 1..4 {
            assert_eq!(predict(&s, &fitted(vec![1.0], h), 3).unwrap().value, 7.0);
        }
    }

    #[test]
    fn dot_product_with_tail() {
        let s = TimeSeries::new(vec![9.0, 3.0, 2.0, 1.0]).unwrap();
        let f = predict(&s, &fitted(vec![0.181, 0.819, 0.0], 3), 4).unwrap();
        assert!((f.value - 1.819).abs() < 1e-12);
        assert_eq!(f.horizon, 3);
        let z = TimeSeries::new(vec![0.0; 5]).unwrap();
        assert_eq!(predict(&z, &fitted(vec![0.3, 0.2], 1), 5).unwrap().value, 0.0);
    }

    #[test]
    fn short_history_is_rejected() {
        let s = TimeSeries::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            predict(&s, &fitted(vec![0.1, 0.2, 0.3], 1), 2),
            Err(Error::InsufficientHistory { origin: 2, order: 3 })
        ));
    }

    #[test]
    fn iterating_matches_companion_power() {
        let s = TimeSeries::new(vec![0.4, -1.0, 2.5, 0.7, 1.1]).unwrap();
        let a = vec![0.9, -0.81, 0.91];
        for h in 1..6 {
            let power = crate::model::companion_power_coefficients(&a, h);
            let direct = dot(&power, &s.regressor(5, 3));
            let iter = iterate_one_step(&s, &a, 5, h).unwrap();
            assert!((direct - iter).abs() < 1e-12);
        }
    }
}
