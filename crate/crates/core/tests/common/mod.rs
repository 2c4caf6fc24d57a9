#![allow(dead_code)]

use multistep_core::simulation::{generate, DgpSpec};
use multistep_core::TimeSeries;
use proptest::prelude::*;

/// Step-up recursion from partial autocorrelations in (-1, 1) to the
/// coefficients of a stable `1 - sum phi_i z^i`.
pub fn from_reflection(pacf: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::new();
    for &r in pacf {
        let prev = phi.clone();
        let m = prev.len();
        phi = (0..m).map(|i| prev[i] - r * prev[m - 1 - i]).collect();
        phi.push(r);
    }
    phi
}

pub fn stable_filter(max_p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.85f64..0.85, 1..=max_p)
        .prop_filter("last coefficient nonzero", |r| r.last().unwrap().abs() > 1e-3)
        .prop_map(|r| from_reflection(&r))
}

/// Levels coefficients of `(1 - z) alpha(z)`.
pub fn integrate(alpha: &[f64]) -> Vec<f64> {
    let p = alpha.len();
    (0..=p)
        .map(|i| {
            let cur = if i < p { alpha[i] } else { 0.0 };
            let prev = if i == 0 { -1.0 } else { alpha[i - 1] };
            cur - prev
        })
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn eliminate(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
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

/// Normal equations of `x_{j+h}` on `x_j(k)` for `j = k..=i-h`, built with
/// explicit loops and solved by elimination.
pub fn brute_force_fit(x: &[f64], k: usize, h: usize, i: usize) -> Vec<f64> {
    let at = |t: usize| x[t - 1];
    let mut g = vec![vec![0.0; k]; k];
    let mut c = vec![0.0; k];
    for j in k..=i - h {
        for u in 0..k {
            for v in 0..k {
                g[u][v] += at(j - u) * at(j - v);
            }
            c[u] += at(j - u) * at(j + h);
        }
    }
    eliminate(g, c)
}

/// Coefficients of `x_{t+h}` on `x_t, ..., x_{t-p+1}` obtained by
/// substituting the recursion for every future value.
pub fn substitution(a: &[f64], h: usize) -> Vec<f64> {
    let p = a.len();
    // slot s holds the weight of x_{t+h-1-s}; slots h-1.. are the regressors
    let mut w = vec![0.0; h - 1 + p];
    for (i, ai) in a.iter().enumerate() {
        w[i] += ai;
    }
    for s in 0..h - 1 {
        let c = w[s];
        w[s] = 0.0;
        for (i, ai) in a.iter().enumerate() {
            w[s + 1 + i] += c * ai;
        }
    }
    w[h - 1..].to_vec()
}

pub fn simulated(levels: Vec<f64>, variance: f64, n: usize, seed: u64) -> TimeSeries {
    let spec = DgpSpec::custom(levels, variance, 1, 1).unwrap();
    generate(&spec, n, seed).unwrap()
}

pub fn noiseless(levels: Vec<f64>, n: usize) -> TimeSeries {
    let spec = DgpSpec::custom(levels, 0.0, 1, 1)
        .unwrap()
        .with_initial_impulse(1.0);
    generate(&spec, n, 0).unwrap()
}
