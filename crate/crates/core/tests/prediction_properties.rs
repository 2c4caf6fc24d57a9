use multistep_core::{predict, Error, FittedCoefficients, Method, TimeSeries};

fn coeffs(c: Vec<f64>, h: usize, method: Method) -> FittedCoefficients {
    FittedCoefficients {
        coeffs: c,
        h,
        method,
        sample_end: 0,
    }
}

#[test]
fn forecast_is_inner_product_with_recent_values() {
    let x = TimeSeries::new(vec![5.0, 3.0, 2.0, 1.0]).unwrap();
    let f = predict(&x, &coeffs(vec![0.181, 0.819, 0.0], 3, Method::Direct), 4).unwrap();
    assert!((f.value - 1.819).abs() < 1e-12);
    assert_eq!((f.origin, f.horizon, f.spec.k, f.spec.method), (4, 3, 3, Method::Direct));
    let f = predict(&x, &coeffs(vec![1.0], 7, Method::PlugIn), 2).unwrap();
    assert_eq!(f.value, 3.0);
}

#[test]
fn origin_needs_k_observations() {
    let x = TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
    let err = predict(&x, &coeffs(vec![0.5; 3], 1, Method::PlugIn), 2).unwrap_err();
    assert_eq!(err, Error::InsufficientHistory { origin: 2, order: 3 });
}
