use alloc::format;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::series::{AnalyticSeries, ZERO_TOL};

/// Absolute tolerance for the `f(0) = 0`, `f'(0) = 1` normalization.
const NORMALIZATION_TOL: f64 = 1e-12;

/// A series of the form `z + a_{n+1} z^{n+1} + ...`, i.e. a member of the
/// class `A_n` with `n = n_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedFunction {
    series: AnalyticSeries,
    n_index: usize,
}

impl NormalizedFunction {
    /// Checks `c_0 = 0`, `c_1 = 1` and the gap `c_2 = ... = c_n = 0`, then
    /// snaps those coefficients to their exact values.
    pub fn new(series: AnalyticSeries, n_index: usize) -> Result<Self> {
        if n_index == 0 {
            return Err(CoreError::NotNormalized("class index must be positive".into()));
        }
        if series.order() < 1 {
            return Err(CoreError::NotNormalized("order must be at least 1".into()));
        }
        if series.coeff(0).norm() > NORMALIZATION_TOL {
            return Err(CoreError::NotNormalized(format!("f(0) = {} != 0", series.coeff(0))));
        }
        if (series.coeff(1) - Complex64::new(1.0, 0.0)).norm() > NORMALIZATION_TOL {
            return Err(CoreError::NotNormalized(format!("f'(0) = {} != 1", series.coeff(1))));
        }
        let gap_tol = NORMALIZATION_TOL * series.max_abs_coeff().max(1.0);
        let gap_end = n_index.min(series.order());
        if let Some(k) = (2..=gap_end).find(|&k| series.coeff(k).norm() > gap_tol) {
            return Err(CoreError::NotNormalized(format!(
                "coefficient of z^{k} is {} but the class index is {n_index}",
                series.coeff(k)
            )));
        }
        let mut coeffs = series.coeffs().to_vec();
        coeffs[0] = Complex64::new(0.0, 0.0);
        coeffs[1] = Complex64::new(1.0, 0.0);
        for c in coeffs.iter_mut().take(gap_end + 1).skip(2) {
            *c = Complex64::new(0.0, 0.0);
        }
        Ok(Self { series: AnalyticSeries::from_raw(coeffs), n_index })
    }

    /// Normalizes a series and assigns the largest class index its
    /// coefficients support (capped at the truncation order).
    pub fn detect(series: AnalyticSeries) -> Result<Self> {
        let n_index = detect_index(&series);
        Self::new(series, n_index)
    }

    /// `f(z) = z`.
    pub fn identity(order: usize) -> Self {
        let order = order.max(1);
        Self { series: AnalyticSeries::identity(order), n_index: order }
    }

    pub fn series(&self) -> &AnalyticSeries {
        &self.series
    }

    pub fn n_index(&self) -> usize {
        self.n_index
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }
}

fn detect_index(series: &AnalyticSeries) -> usize {
    let n = series.order();
    let tol = ZERO_TOL * series.max_abs_coeff().max(1.0);
    match (2..=n).find(|&k| series.coeff(k).norm() > tol) {
        Some(k) => k - 1,
        None => n.max(1),
    }
}
