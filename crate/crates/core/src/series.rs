use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Observations `x_1, ..., x_n`.
///
/// Time indices are 1-based throughout the public API. Every value before
/// the sample (`t <= 0`) is zero, which is the initial condition the model
/// recursion starts from.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("time series must contain at least one observation"));
        }
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "observation {} is not finite",
                t + 1
            )));
        }
        Ok(TimeSeries { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `x_t`, zero for `t == 0`. Panics past the end of the sample.
    #[inline]
    pub fn at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.values[t - 1]
        }
    }

    /// Writes `x_j(k) = (x_j, x_{j-1}, ..., x_{j-k+1})` into `out[..k]`,
    /// with pre-sample values read as zero.
    #[inline]
    pub fn regressor_into(&self, j: usize, out: &mut [f64]) {
        for (l, slot) in out.iter_mut().enumerate() {
            *slot = if l >= j { 0.0 } else { self.at(j - l) };
        }
    }

    pub fn regressor(&self, j: usize, k: usize) -> Vec<f64> {
        let mut v = alloc::vec![0.0; k];
        self.regressor_into(j, &mut v);
        v
    }

    /// The first `n` observations.
    pub fn truncated(&self, n: usize) -> Result<TimeSeries> {
        if n == 0 || n > self.len() {
            return Err(Error::invalid(alloc::format!(
                "cannot truncate a series of length {} to {}",
                self.len(),
                n
            )));
        }
        Ok(TimeSeries {
            values: self.values[..n].to_vec(),
        })
    }

    /// `s_t = x_t - x_{t-1}` for `t = 1..n`; `s_1 = x_1`.
    pub fn difference(&self) -> TimeSeries {
        let mut prev = 0.0;
        let values = self
            .values
            .iter()
            .map(|&x| {
                let d = x - prev;
                prev = x;
                d
            })
            .collect();
        TimeSeries { values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn difference_uses_zero_presample() {
        let s = TimeSeries::new(vec![3.0]).unwrap().difference();
        assert_eq!(s.values(), &[3.0]);
        let s = TimeSeries::new(vec![1.0, 3.0, 2.0]).unwrap().difference();
        assert_eq!(s.values(), &[1.0, 2.0, -1.0]);
    }

    #[test]
    fn difference_inverts_cumulative_sum() {
        let steps = vec![0.5, -1.25, 2.0, 0.0, 3.5];
        let mut acc = 0.0;
        let levels: Vec<f64> = steps
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        let d = TimeSeries::new(levels).unwrap().difference();
        assert_eq!(d.values(), steps.as_slice());
    }

    #[test]
    fn regressor_pads_before_sample() {
        let x = TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.regressor(3, 2), vec![3.0, 2.0]);
        assert_eq!(x.regressor(2, 3), vec![2.0, 1.0, 0.0]);
        assert_eq!(x.at(0), 0.0);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
    }
}
