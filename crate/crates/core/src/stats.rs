//! Small statistics helpers with order-fixed reductions.

use crate::scalar::Real;

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().fold(T::zero(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean<T: Real>(xs: &[T]) -> T {
    pairwise_sum(xs) / T::from_usize(xs.len()).expect("length fits")
}

/// Unbiased sample variance; `None` for fewer than two samples.
pub fn sample_variance<T: Real>(xs: &[T]) -> Option<T> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let dev: Vec<T> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    Some(pairwise_sum(&dev) / T::from_usize(xs.len() - 1).expect("length fits"))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// Number of combined standard errors separating two estimates.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        (self.value - other.value).abs() / se
    }
}

/// Sample variance with standard error from the spread of squared deviations.
pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    let var = sample_variance(xs).unwrap_or(0.0);
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    let se = sample_variance(&sq).map_or(0.0, |v| (v / n as f64).sqrt());
    Estimate {
        value: var,
        std_error: se,
        n_samples: n,
    }
}

/// Sample mean with its standard error.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    Estimate {
        value: mean(xs),
        std_error: sample_variance(xs).map_or(0.0, |v| (v / n as f64).sqrt()),
        n_samples: n,
    }
}

/// Ordinary least squares `y = slope x + intercept` with Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        correlation,
    })
}
