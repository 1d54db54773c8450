//! Geometric pressure `P(t)` and its zero.
//!
//! Two estimators: Gibbs sums over repelling periodic points, and the
//! leading eigenvalue of a transfer operator discretised on a Julia cloud.
//! Both are strictly decreasing in `t` for expanding systems, and the zero
//! is found by bisection.

mod operator;

pub use operator::{pressure_operator, OperatorEigenData, OperatorSettings, TransferOperator};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::gdms::{GdmsSystem, SkewPoint};
use crate::julia::JuliaCloud;
use crate::periodic::{find_repelling, PeriodicSettings};
use crate::ratmap::SpherePoint;
use std::fmt::Write as _;

/// `−log ‖g′(z)‖` for the head map `g` of a skew point's address.
pub fn potential(sys: &GdmsSystem, symbol: usize, z: SpherePoint) -> f64 {
    -sys.map_of(symbol).spherical_deriv_norm(z).ln()
}

/// Birkhoff sum of the potential over the word carried by `p`.
pub fn birkhoff_sum(sys: &GdmsSystem, p: &SkewPoint) -> f64 {
    let mut z = p.z;
    let mut sum = 0.0;
    for &s in p.word.symbols() {
        let (next, norm) = sys.map_of(s).eval_with_norm(z);
        sum -= norm.ln();
        z = next;
    }
    sum
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-multipliers of the repelling points of periods `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicData {
    /// `log_multipliers[n - 1]` holds period `n`.
    pub log_multipliers: Vec<Vec<f64>>,
    pub seeded: bool,
    pub failed_words: usize,
}

impl PeriodicData {
    pub fn compute(
        sys: &GdmsSystem,
        n_max: usize,
        settings: &PeriodicSettings,
        cloud: Option<&JuliaCloud>,
    ) -> Result<Self> {
        let mut data = PeriodicData {
            log_multipliers: Vec::with_capacity(n_max),
            seeded: false,
            failed_words: 0,
        };
        for n in 1..=n_max {
            let rep = find_repelling(sys, n, settings, cloud)?;
            data.seeded |= rep.is_seeded();
            data.failed_words += rep.failures.len();
            data.log_multipliers.push(rep.points.iter().map(|p| p.multiplier.ln()).collect());
        }
        Ok(data)
    }

    pub fn n_max(&self) -> usize {
        self.log_multipliers.len()
    }

    pub fn count(&self, n: usize) -> usize {
        self.log_multipliers.get(n.wrapping_sub(1)).map_or(0, Vec::len)
    }

    /// `(1/n) log Σ m^{-t}` over the period-`n` points.
    pub fn pressure(&self, t: f64, n: usize) -> Result<f64> {
        let logs = self
            .log_multipliers
            .get(n.wrapping_sub(1))
            .filter(|l| !l.is_empty())
            .ok_or(Error::EmptyOrbitSet(n))?;
        Ok(log_sum_exp(logs.iter().map(|l| -t * l)) / n as f64)
    }

    /// Aitken's Δ² over the last three periods, `P_n - (ΔP_n)² / Δ²P_n`.
    /// Falls back to `P_n` when fewer than three periods are available or
    /// the second difference vanishes.
    pub fn extrapolated(&self, t: f64) -> Result<f64> {
        let n = self.n_max();
        if n < 3 {
            return self.pressure(t, n);
        }
        let (a, b, c) = (self.pressure(t, n - 2)?, self.pressure(t, n - 1)?, self.pressure(t, n)?);
        let second = (c - b) - (b - a);
        let corrected = c - (c - b) * (c - b) / second;
        Ok(if second.abs() > 1e-300 && corrected.is_finite() {
            corrected
        } else {
            c
        })
    }
}

/// `(1/n) log Σ ‖(g_w)′(z)‖^{-t}` over the repelling points of period `n`.
pub fn pressure_periodic(sys: &GdmsSystem, t: f64, n: usize) -> Result<f64> {
    let rep = find_repelling(sys, n, &PeriodicSettings::default(), None)?;
    if rep.points.is_empty() {
        return Err(Error::EmptyOrbitSet(n));
    }
    Ok(log_sum_exp(rep.points.iter().map(|p| -t * p.multiplier.ln())) / n as f64)
}

/// Result of [`find_delta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRecord {
    pub delta: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    /// Initial bracket after any expansion.
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

const MAX_EXPANSIONS: usize = 6;

/// Bisection for the zero of a decreasing pressure function. If the bracket
/// does not change sign it is widened by its own width, a few times, on the
/// offending side.
pub fn find_delta<F>(mut pressure: F, lo: f64, hi: f64, tol: f64) -> Result<DeltaRecord>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::DomainError(format!("bad bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let mut evaluations = 0;
    let mut eval = |t: f64| -> Result<f64> {
        evaluations += 1;
        pressure(t)
    };
    if lo == hi {
        let p = eval(lo)?;
        return if p.abs() < tol {
            Ok(DeltaRecord {
                delta: lo,
                lo,
                hi,
                p_lo: p,
                p_hi: p,
                bracket: (lo, hi),
                evaluations: 1,
            })
        } else {
            Err(Error::BracketFailure { lo, hi })
        };
    }
    let (mut a, mut b) = (lo, hi);
    let mut pa = eval(a)?;
    let mut pb = eval(b)?;
    let mut expansions = 0;
    while !(pa > 0.0 && pb < 0.0) {
        if expansions == MAX_EXPANSIONS || !pa.is_finite() || !pb.is_finite() {
            return Err(Error::BracketFailure { lo: a, hi: b });
        }
        let width = b - a;
        if pa <= 0.0 {
            a -= width;
            pa = eval(a)?;
        }
        if pb >= 0.0 {
            b += width;
            pb = eval(b)?;
        }
        expansions += 1;
    }
    let bracket = (a, b);
    while b - a >= tol {
        let m = 0.5 * (a + b);
        let pm = eval(m)?;
        if pm > 0.0 {
            a = m;
            pa = pm;
        } else {
            b = m;
            pb = pm;
        }
    }
    Ok(DeltaRecord {
        delta: 0.5 * (a + b),
        lo: a,
        hi: b,
        p_lo: pa,
        p_hi: pb,
        bracket,
        evaluations,
    })
}

/// Bowen zero of the operator estimator; each eigen-solve starts from the
/// previous eigenfunction.
pub fn delta_operator(
    op: &TransferOperator,
    lo: f64,
    hi: f64,
    tol: f64,
    settings: &OperatorSettings,
) -> Result<DeltaRecord> {
    let mut warm: Option<Vec<Vec<f64>>> = None;
    find_delta(
        |t| {
            let e = op.eigen(t, settings, warm.as_deref())?;
            warm = Some(e.h);
            Ok(e.log_lambda)
        },
        lo,
        hi,
        tol,
    )
}

/// `1 + log((3 + √5)/2) / log n`, the closed-form upper bound for the
/// three-vertex example.
pub fn analytic_bound_section3(n: usize) -> Result<f64> {
    if n < 5 {
        return Err(Error::DomainError(format!("the bound needs n >= 5, got {n}")));
    }
    let lambda = (3.0 + 5f64.sqrt()) / 2.0;
    Ok(1.0 + lambda.ln() / (n as f64).ln())
}

/// Evenly spaced grid with `points` entries over `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
    }
}

pub fn is_strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    pub periodic: Option<f64>,
    pub periodic_extrapolated: Option<f64>,
    pub operator: Option<f64>,
    pub n: usize,
    pub operator_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile {
    pub rows: Vec<ProfileRow>,
    pub delta: Option<DeltaRecord>,
    /// Which estimator produced `delta`.
    pub delta_source: String,
}

impl PressureProfile {
    /// Samples both estimators on a grid of `t` values.
    pub fn sample(periodic: Option<&PeriodicData>, operator: Option<&TransferOperator>, ts: &[f64]) -> Result<Self> {
        let mut rows = Vec::with_capacity(ts.len());
        let mut warm: Option<Vec<Vec<f64>>> = None;
        for &t in ts {
            let (op, res) = match operator {
                Some(o) => {
                    let e = o.eigen(t, &OperatorSettings::default(), warm.as_deref())?;
                    warm = Some(e.h.clone());
                    (Some(e.log_lambda), Some(e.residual))
                }
                None => (None, None),
            };
            rows.push(ProfileRow {
                t,
                periodic: periodic.map(|p| p.pressure(t, p.n_max())).transpose()?,
                periodic_extrapolated: periodic.map(|p| p.extrapolated(t)).transpose()?,
                operator: op,
                n: periodic.map_or(0, |p| p.n_max()),
                operator_residual: res,
            });
        }
        Ok(Self {
            rows,
            delta: None,
            delta_source: String::new(),
        })
    }

    /// Tab-separated table `t  P_periodic  P_extrapolated  P_operator  n  residual`
    /// followed by the δ record as comment lines.
    pub fn to_tsv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), sig12);
        let mut out = String::from("t\tP_periodic\tP_extrapolated\tP_operator\tn\tresidual\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                sig12(r.t),
                opt(r.periodic),
                opt(r.periodic_extrapolated),
                opt(r.operator),
                r.n,
                opt(r.operator_residual)
            );
        }
        if let Some(d) = &self.delta {
            let _ = writeln!(
                out,
                "# delta\t{}\tbracket\t{}\t{}\testimator\t{}",
                sig12(d.delta),
                sig12(d.lo),
                sig12(d.hi),
                self.delta_source
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::power_system;

    #[test]
    fn square_map_closed_form() {
        let sys = power_system(2).unwrap();
        let data = PeriodicData::compute(&sys, 6, &PeriodicSettings::default(), None).unwrap();
        for n in 1..=6 {
            for t in [0.0, 0.5, 1.0, 1.7] {
                let exact = ((2f64.powi(n as i32) - 1.0).ln()) / n as f64 - t * 2f64.ln();
                assert!((data.pressure(t, n).unwrap() - exact).abs() < 1e-12);
            }
        }
        let p = |n: i32| (1.0 - 2f64.powi(-n)).ln() / n as f64;
        let aitken = p(6) - (p(6) - p(5)).powi(2) / (p(6) - 2.0 * p(5) + p(4));
        let e = data.extrapolated(1.0).unwrap();
        assert!((e - aitken).abs() < 1e-12);
        // the true pressure at t = 1 is zero
        assert!(e.abs() < p(6).abs());
        assert_eq!(data.pressure(0.0, 7).unwrap_err(), Error::EmptyOrbitSet(7));
    }

    #[test]
    fn bisection_on_a_line() {
        let rec = find_delta(|t| Ok(1.3 - t), 0.0, 2.0, 1e-6).unwrap();
        assert!((rec.delta - 1.3).abs() < 1e-6);
        // needs expansion on the right
        let rec = find_delta(|t| Ok(3.0 - t), 0.0, 2.0, 1e-6).unwrap();
        assert!((rec.delta - 3.0).abs() < 1e-6);
        assert!(matches!(find_delta(|_| Ok(1.0), 0.0, 2.0, 1e-3), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn degenerate_bracket() {
        assert_eq!(find_delta(|t| Ok(1.0 - t), 1.0, 1.0, 1e-3).unwrap().delta, 1.0);
        assert!(matches!(find_delta(|t| Ok(1.0 - t), 0.5, 0.5, 1e-3), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn analytic_bound_values() {
        let b5 = analytic_bound_section3(5).unwrap();
        assert!(b5 > 1.59 && b5 < 1.6);
        assert!((analytic_bound_section3(10).unwrap() - 1.418).abs() < 1e-3);
        assert!(analytic_bound_section3(4).is_err());
        assert!(analytic_bound_section3(100).unwrap() < analytic_bound_section3(50).unwrap());
    }

}
