//! Transfer operator on a Julia cloud.
//!
//! The potential depends only on the head symbol and the fibre point, so the
//! operator acts on functions of `(vertex, z)`:
//!
//! `(Lψ)(j, z) = Σ_{t(e) = j} Σ_{g ∈ Γ_e} Σ_{g(w) = z} ‖g′(w)‖^{-t} ψ(i(e), w)`.
//!
//! Roots `w` are exact; `ψ(i(e), w)` is read off the nearest sample of the
//! cloud at `i(e)`.

use crate::error::{Error, Result};
use crate::gdms::GdmsSystem;
use crate::julia::{JuliaCloud, SphereIndex};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSettings {
    /// Target for `‖λ⁻¹Lh − h‖∞ / ‖h‖∞`.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Residual above which the result is rejected.
    pub fail_residual: f64,
}

impl Default for OperatorSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 500,
            fail_residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorEigenData {
    pub lambda: f64,
    pub log_lambda: f64,
    /// Eigenfunction per vertex and sample, sup-normalised.
    pub h: Vec<Vec<f64>>,
    /// Left eigenvector masses, summing to one.
    pub weights: Vec<Vec<f64>>,
    pub residual: f64,
    pub sweeps: usize,
    /// Largest and mean distance from an exact preimage to the sample it reads.
    pub interpolation_radius: f64,
    pub mean_interpolation: f64,
}

/// Preimage fans of every cloud sample in compressed row form.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    log_norms: Vec<f64>,
    interpolation_radius: f64,
    mean_interpolation: f64,
}

impl TransferOperator {
    pub fn build(sys: &GdmsSystem, cloud: &JuliaCloud) -> Result<Self> {
        let nv = sys.vertex_count();
        if cloud.vertex_count() != nv {
            return Err(Error::BrokenLinks(format!(
                "cloud has {} vertices, system has {nv}",
                cloud.vertex_count()
            )));
        }
        if let Some(v) = (0..nv).find(|&v| cloud.vertices[v].is_empty()) {
            return Err(Error::BrokenLinks(format!("no samples at vertex {}", v + 1)));
        }
        let sizes: Vec<usize> = cloud.vertices.iter().map(Vec::len).collect();
        let mut offsets = vec![0; nv + 1];
        for v in 0..nv {
            offsets[v + 1] = offsets[v] + sizes[v];
        }
        let indices: Vec<SphereIndex> = (0..nv).map(|v| cloud.index(v)).collect();
        // symbols entering each vertex, grouped by identical map so each root solve happens once
        let groups: Vec<Vec<(usize, Vec<usize>)>> = (0..nv)
            .map(|j| {
                let mut g: Vec<(usize, Vec<usize>)> = Vec::new();
                for s in sys.symbols_into(j) {
                    match g.iter_mut().find(|(rep, _)| sys.map_of(*rep) == sys.map_of(s)) {
                        Some((_, members)) => members.push(sys.initial_vertex(s)),
                        None => g.push((s, vec![sys.initial_vertex(s)])),
                    }
                }
                g
            })
            .collect();
        let rows: Vec<Result<Vec<(u32, f64, f64)>>> = (0..nv)
            .flat_map(|j| cloud.vertices[j].iter().map(move |s| (j, s.z)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(j, z)| {
                let mut fan = Vec::new();
                for (rep, targets) in &groups[j] {
                    let g = sys.map_of(*rep);
                    let roots = g
                        .preimages(z)
                        .map_err(|e| Error::BrokenLinks(format!("preimages of {z} at vertex {}: {e}", j + 1)))?;
                    for w in roots {
                        let norm = g.spherical_deriv_norm(w);
                        if !(norm > 0.0) || !norm.is_finite() {
                            return Err(Error::BrokenLinks(format!("critical preimage {w} of {z}")));
                        }
                        for &i in targets {
                            let (k, d) = indices[i]
                                .nearest(&w)
                                .ok_or_else(|| Error::BrokenLinks(format!("empty index at vertex {}", i + 1)))?;
                            fan.push(((offsets[i] + k) as u32, norm.ln(), d));
                        }
                    }
                }
                Ok(fan)
            })
            .collect();
        let mut row_start = Vec::with_capacity(offsets[nv] + 1);
        let mut cols = Vec::new();
        let mut log_norms = Vec::new();
        let (mut max_d, mut sum_d) = (0.0f64, 0.0);
        row_start.push(0);
        for row in rows {
            for (c, l, d) in row? {
                cols.push(c);
                log_norms.push(l);
                max_d = max_d.max(d);
                sum_d += d;
            }
            row_start.push(cols.len());
        }
        let mean = if cols.is_empty() { 0.0 } else { sum_d / cols.len() as f64 };
        Ok(Self {
            sizes,
            offsets,
            row_start,
            cols,
            log_norms,
            interpolation_radius: max_d,
            mean_interpolation: mean,
        })
    }

    pub fn dimension(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn links(&self) -> usize {
        self.cols.len()
    }

    fn apply(&self, weights: &[f64], h: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(r, o)| {
            let (a, b) = (self.row_start[r], self.row_start[r + 1]);
            *o = (a..b).map(|k| weights[k] * h[self.cols[k] as usize]).sum();
        });
    }

    fn apply_adjoint(&self, weights: &[f64], nu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for r in 0..self.dimension() {
            let m = nu[r];
            if m == 0.0 {
                continue;
            }
            for k in self.row_start[r]..self.row_start[r + 1] {
                out[self.cols[k] as usize] += weights[k] * m;
            }
        }
    }

    fn split(&self, flat: &[f64]) -> Vec<Vec<f64>> {
        (0..self.sizes.len())
            .map(|v| flat[self.offsets[v]..self.offsets[v + 1]].to_vec())
            .collect()
    }

    /// Leading eigen-data at parameter `t`; `warm` seeds the right iteration.
    pub fn eigen(&self, t: f64, settings: &OperatorSettings, warm: Option<&[Vec<f64>]>) -> Result<OperatorEigenData> {
        let n = self.dimension();
        let weights: Vec<f64> = self.log_norms.iter().map(|l| (-t * l).exp()).collect();
        let mut h: Vec<f64> = match warm {
            Some(w) if w.iter().map(Vec::len).sum::<usize>() == n => w.concat(),
            _ => vec![1.0; n],
        };
        let mut lh = vec![0.0; n];
        let mut lambda = f64::NAN;
        let mut residual = f64::INFINITY;
        let mut sweeps = 0;
        while sweeps < settings.max_sweeps {
            sweeps += 1;
            self.apply(&weights, &h, &mut lh);
            let hmax = h.iter().cloned().fold(0.0, f64::max);
            let lmax = lh.iter().cloned().fold(0.0, f64::max);
            if !(lmax > 0.0) || !lmax.is_finite() {
                return Err(Error::NonConvergence(format!("operator iterate degenerated at t = {t}")));
            }
            lambda = lmax / hmax;
            residual = h
                .iter()
                .zip(&lh)
                .map(|(a, b)| (b / lambda - a).abs())
                .fold(0.0, f64::max)
                / hmax;
            for (a, b) in h.iter_mut().zip(&lh) {
                *a = b / lmax;
            }
            if residual < settings.tol {
                break;
            }
        }
        if !(residual <= settings.fail_residual) {
            return Err(Error::NonConvergence(format!(
                "operator residual {residual:e} after {sweeps} sweeps at t = {t}"
            )));
        }
        let mut nu = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..sweeps.max(50) {
            self.apply_adjoint(&weights, &nu, &mut next);
            let total: f64 = next.iter().sum();
            let mut change: f64 = 0.0;
            for (a, b) in nu.iter_mut().zip(&next) {
                let v = b / total;
                change = change.max((v - *a).abs());
                *a = v;
            }
            if change < 1e-15 {
                break;
            }
        }
        let total: f64 = nu.iter().sum();
        nu.iter_mut().for_each(|x| *x /= total);
        Ok(OperatorEigenData {
            lambda,
            log_lambda: lambda.ln(),
            h: self.split(&h),
            weights: self.split(&nu),
            residual,
            sweeps,
            interpolation_radius: self.interpolation_radius,
            mean_interpolation: self.mean_interpolation,
        })
    }
}

/// Builds the operator on `cloud` and returns its eigen-data at `t`.
pub fn pressure_operator(
    sys: &GdmsSystem,
    t: f64,
    cloud: &JuliaCloud,
    settings: &OperatorSettings,
) -> Result<OperatorEigenData> {
    TransferOperator::build(sys, cloud)?.eigen(t, settings, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::power_system;
    use crate::julia::{inverse_iteration, CloudParams};
    use crate::ratmap::SpherePoint;

    #[test]
    fn circle_eigenvalues() {
        let sys = power_system(2).unwrap();
        let params = CloudParams {
            samples: 4000,
            ..CloudParams::default()
        };
        let cloud = inverse_iteration(&sys, &[vec![SpherePoint::from_re_im(1.0, 0.0)]], &params).unwrap();
        let op = TransferOperator::build(&sys, &cloud).unwrap();
        assert_eq!(op.links(), 8000);
        let e0 = op.eigen(0.0, &OperatorSettings::default(), None).unwrap();
        assert!((e0.lambda - 2.0).abs() < 1e-2, "{}", e0.lambda);
        let e1 = op.eigen(1.0, &OperatorSettings::default(), None).unwrap();
        assert!((e1.lambda - 1.0).abs() < 5e-3, "{}", e1.lambda);
        let total: f64 = e1.weights.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(e1.h.iter().flatten().all(|&x| x > 0.0));
    }

    #[test]
    fn empty_vertex_is_broken() {
        let sys = power_system(2).unwrap();
        let cloud = JuliaCloud::from_points(vec![vec![]]);
        assert!(matches!(TransferOperator::build(&sys, &cloud), Err(Error::BrokenLinks(_))));
    }
}
