//! Simultaneous root finding by the Aberth-Ehrlich iteration.
//!
//! The solver only needs values and derivatives of the target, so it works
//! both for coefficient polynomials and for fixed-point equations of long
//! word maps that are evaluated pointwise.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Something with a known number of roots in the plane.
pub trait RootTarget {
    fn degree(&self) -> usize;

    /// Value and derivative at `z`. Both may carry a common nonzero factor.
    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64);

    /// Scale-free residual used to accept a root.
    fn relative_residual(&self, z: Complex64) -> f64;

    /// Radius of the starting circle.
    fn initial_radius(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberthSettings {
    /// Acceptance threshold on [`RootTarget::relative_residual`].
    pub tol: f64,
    pub max_sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AberthSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_sweeps: 200,
            restarts: 4,
            seed: 0x5eed,
        }
    }
}

/// Finds all `target.degree()` roots, counted with multiplicity.
pub fn aberth<T: RootTarget + ?Sized>(target: &T, settings: &AberthSettings) -> Result<Vec<Complex64>> {
    let n = target.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let base_radius = {
        let r = target.initial_radius();
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    };
    let mut worst = f64::INFINITY;
    for attempt in 0..=settings.restarts {
        let (radius, offset) = if attempt == 0 {
            (base_radius, 0.4)
        } else {
            (base_radius * rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU))
        };
        let mut roots: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(radius, offset + TAU * k as f64 / n as f64))
            .collect();
        if attempt > 0 {
            for z in roots.iter_mut() {
                *z += Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3)) * radius;
            }
        }
        sweep_until_converged(target, &mut roots, settings);
        worst = roots
            .iter()
            .map(|&z| target.relative_residual(z))
            .fold(0.0, f64::max);
        if worst < settings.tol && roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Ok(roots);
        }
    }
    Err(Error::NonConvergence(format!(
        "Aberth iteration on degree {n}: worst residual {worst:e} after {} restarts",
        settings.restarts
    )))
}

/// Finds the `target.degree() - known.len()` roots not already in `known`.
/// The known roots stay frozen and only repel the moving ones, which
/// deflates them implicitly without touching coefficients.
pub fn aberth_completing<T: RootTarget + ?Sized>(
    target: &T,
    known: &[Complex64],
    settings: &AberthSettings,
) -> Result<Vec<Complex64>> {
    let n = target.degree();
    if known.len() > n {
        return Err(Error::DomainError(format!("{} known roots exceed degree {n}", known.len())));
    }
    let missing = n - known.len();
    if missing == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let radius = {
        let r = target.initial_radius();
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    };
    let mut worst = f64::INFINITY;
    for _ in 0..=settings.restarts {
        let offset = rng.gen_range(0.0..TAU);
        let r = radius * rng.gen_range(0.7..1.4);
        let mut roots: Vec<Complex64> = known.to_vec();
        roots.extend((0..missing).map(|k| Complex64::from_polar(r, offset + TAU * k as f64 / missing as f64)));
        let mut done = vec![true; known.len()];
        done.resize(n, false);
        sweep_with_mask(target, &mut roots, &mut done, settings);
        let fresh = roots.split_off(known.len());
        worst = fresh.iter().map(|&z| target.relative_residual(z)).fold(0.0, f64::max);
        if worst < settings.tol && fresh.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Ok(fresh);
        }
    }
    Err(Error::NonConvergence(format!(
        "deflated Aberth iteration for {missing} of {n} roots: worst residual {worst:e}"
    )))
}

fn sweep_until_converged<T: RootTarget + ?Sized>(target: &T, roots: &mut [Complex64], settings: &AberthSettings) {
    let mut done = vec![false; roots.len()];
    sweep_with_mask(target, roots, &mut done, settings);
}

fn sweep_with_mask<T: RootTarget + ?Sized>(
    target: &T,
    roots: &mut [Complex64],
    done: &mut [bool],
    settings: &AberthSettings,
) {
    let n = roots.len();
    for _ in 0..settings.max_sweeps {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let z = roots[k];
            let (p, dp) = target.eval_with_derivative(z);
            if p == Complex64::new(0.0, 0.0) {
                done[k] = true;
                continue;
            }
            let ratio = if dp == Complex64::new(0.0, 0.0) {
                // stationary point: nudge off it
                Complex64::new(1e-8 * (1.0 + z.norm()), 0.0)
            } else {
                p / dp
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != k {
                    let diff = z - zj;
                    if diff != Complex64::new(0.0, 0.0) {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 && denom.re.is_finite() { ratio / denom } else { ratio };
            if !(step.re.is_finite() && step.im.is_finite()) {
                all_done = false;
                continue;
            }
            let next = z - step;
            roots[k] = next;
            if step.norm() <= 1e-14 * (1.0 + next.norm()) || target.relative_residual(next) < settings.tol * 1e-3 {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
}
