//! Box-counting dimension of a planar point set.

use super::{JuliaCloud, VertexSelector};
use crate::error::{Error, Result};
use crate::ratmap::SpherePoint;
use std::collections::HashSet;

/// Samples farther out than this are left out of the planar count.
pub const CHART_BOUND: f64 = 1e6;
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    /// Root-mean-square deviation of the log–log fit.
    pub residual: f64,
    /// Samples outside the chart bound.
    pub excluded: usize,
}

/// `side * 2^-k` for `k = 2..=9`: eight scales over about 2.1 decades.
pub fn default_scales(side: f64) -> Vec<f64> {
    (2..=9).map(|k| side * 0.5f64.powi(k)).collect()
}

pub fn box_counting_dim(cloud: &JuliaCloud, selector: VertexSelector, scales: Option<&[f64]>) -> Result<BoxDimEstimate> {
    let pts = selector.points(cloud);
    box_counting_points(&pts, scales)
}

/// Box counting over the bounding square of the finite samples. With
/// `scales = None` the default list relative to the square's side is used.
pub fn box_counting_points(points: &[SpherePoint], scales: Option<&[f64]>) -> Result<BoxDimEstimate> {
    if points.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: points.len(),
        });
    }
    let mut excluded = 0;
    let mut planar = Vec::with_capacity(points.len());
    for p in points {
        match p.finite() {
            Some(z) if z.norm() <= CHART_BOUND => planar.push((z.re, z.im)),
            _ => excluded += 1,
        }
    }
    if planar.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: 0,
        });
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &planar {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let mut side = (x1 - x0).max(y1 - y0);
    if side <= 0.0 {
        side = 1.0;
    }
    let scales = match scales {
        Some(s) => s.to_vec(),
        None => default_scales(side),
    };
    if scales.len() < 2 || scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::DomainError("box counting needs at least two positive scales".into()));
    }
    let counts: Vec<usize> = scales
        .iter()
        .map(|&eps| {
            let mut boxes = HashSet::with_capacity(planar.len().min(1 << 20));
            for &(x, y) in &planar {
                boxes.insert((((x - x0) / eps).floor() as i64, ((y - y0) / eps).floor() as i64));
            }
            boxes.len()
        })
        .collect();
    let xs: Vec<f64> = scales.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(BoxDimEstimate {
        scales,
        counts,
        slope,
        residual,
        excluded,
    })
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_dimension_zero() {
        let pts = vec![SpherePoint::from_re_im(0.5, 0.5); MIN_SAMPLES];
        let est = box_counting_points(&pts, None).unwrap();
        assert!(est.slope.abs() < 0.05);
    }

    #[test]
    fn filled_square_has_dimension_two() {
        let pts: Vec<SpherePoint> = (0..300 * 300)
            .map(|k| SpherePoint::from_re_im((k % 300) as f64 / 300.0, (k / 300) as f64 / 300.0))
            .collect();
        let est = box_counting_points(&pts, Some(&default_scales(1.0)[..6])).unwrap();
        assert!((est.slope - 2.0).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            box_counting_points(&[SpherePoint::ZERO], None),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn far_points_are_excluded() {
        let mut pts = vec![SpherePoint::ZERO; MIN_SAMPLES];
        pts.push(SpherePoint::Infinity);
        pts.push(SpherePoint::from_re_im(1e7, 0.0));
        assert_eq!(box_counting_points(&pts, None).unwrap().excluded, 2);
    }
}
