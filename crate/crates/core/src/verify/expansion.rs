//! Empirical expansion constants from periodic multipliers.

use crate::error::{Error, Result};
use crate::julia::boxdim::least_squares;
use crate::thermo::PeriodicData;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionEstimate {
    pub c: f64,
    pub lambda: f64,
    /// `(n, min log multiplier)` for each period with data.
    pub minima: Vec<(usize, f64)>,
    /// Smallest `s >= 0` with `min_n >= log C + n log λ - s` at every sample.
    pub slack: f64,
}

impl ExpansionEstimate {
    pub fn is_expanding(&self) -> bool {
        self.lambda > 1.0
    }
}

/// Fits `min_n log m = log C + n log λ` over the per-period minima.
pub fn estimate_expansion(data: &PeriodicData) -> Result<ExpansionEstimate> {
    let minima: Vec<(usize, f64)> = data
        .log_multipliers
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(k, l)| (k + 1, l.iter().cloned().fold(f64::INFINITY, f64::min)))
        .collect();
    expansion_from_minima(minima)
}

pub fn expansion_from_minima(minima: Vec<(usize, f64)>) -> Result<ExpansionEstimate> {
    if minima.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "expansion fit needs three periods, have {}",
            minima.len()
        )));
    }
    let xs: Vec<f64> = minima.iter().map(|m| m.0 as f64).collect();
    let ys: Vec<f64> = minima.iter().map(|m| m.1).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let slack = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| intercept + slope * x - y)
        .fold(0.0, f64::max);
    Ok(ExpansionEstimate {
        c: intercept.exp(),
        lambda: slope.exp(),
        minima,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::power_system;
    use crate::periodic::PeriodicSettings;

    #[test]
    fn square_map_constants() {
        let sys = power_system(2).unwrap();
        let data = PeriodicData::compute(&sys, 5, &PeriodicSettings::default(), None).unwrap();
        let est = estimate_expansion(&data).unwrap();
        assert!((est.lambda - 2.0).abs() < 1e-9);
        assert!((est.c - 1.0).abs() < 1e-9);
        assert!(est.slack < 1e-9);
    }

    #[test]
    fn too_few_periods() {
        let sys = power_system(2).unwrap();
        let data = PeriodicData::compute(&sys, 1, &PeriodicSettings::default(), None).unwrap();
        assert!(matches!(estimate_expansion(&data), Err(Error::InsufficientData(_))));
    }
}
