//! Screens for the standing hypotheses other than separation.

use crate::error::{Error, Result};
use crate::gdms::{GdmsSystem, SymbolicWord};
use crate::julia::JuliaCloud;
use crate::periodic::{find_repelling, PeriodicSettings, RepellingPoint};
use crate::ratmap::{MobiusKind, RationalMap, SpherePoint};
use num_complex::Complex64;

/// Outcome of a check that may be unable to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            CheckOutcome::Pass => "PASS",
            CheckOutcome::Fail => "FAIL",
            CheckOutcome::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Minimum chordal separation for points to count as distinct.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Per vertex: `Pass` once three distinct repelling points are known
/// (they all lie in the vertex Julia set), `Inconclusive` otherwise.
pub fn check_non_elementary(sys: &GdmsSystem, points: &[RepellingPoint]) -> Vec<CheckOutcome> {
    let mut distinct: Vec<Vec<SpherePoint>> = vec![Vec::new(); sys.vertex_count()];
    for p in points {
        let found = &mut distinct[p.vertex(sys)];
        if found.len() < 3 && found.iter().all(|q| q.chordal_distance(&p.z) > DISTINCT_TOL) {
            found.push(p.z);
        }
    }
    distinct
        .iter()
        .map(|f| if f.len() >= 3 { CheckOutcome::Pass } else { CheckOutcome::Inconclusive })
        .collect()
}

/// Searches periods `1..=max_period` until every vertex passes.
pub fn non_elementary_search(sys: &GdmsSystem, max_period: usize, settings: &PeriodicSettings) -> Result<Vec<CheckOutcome>> {
    let mut points = Vec::new();
    let mut outcome = vec![CheckOutcome::Inconclusive; sys.vertex_count()];
    for p in 1..=max_period {
        points.extend(find_repelling(sys, p, settings, None)?.points);
        outcome = check_non_elementary(sys, &points);
        if outcome.iter().all(|o| *o == CheckOutcome::Pass) {
            break;
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicReport {
    /// Smallest chordal distance from the sampled post-critical set of each
    /// vertex to its Julia cloud; infinity when nothing lands there.
    pub min_distance: Vec<f64>,
    pub orbit_samples: usize,
    /// The orbit cap stopped the enumeration early.
    pub truncated: bool,
    pub gap: f64,
    pub outcome: CheckOutcome,
}

/// HEURISTIC. Forward orbits of the critical values, up to `depth` further
/// steps along admissible edges, are compared with the Julia cloud; the
/// check passes when they keep at least `gap` away at every vertex. A finite
/// orbit sample says nothing about the closure, so a pass is evidence only.
pub fn check_hyperbolic_heuristic(
    sys: &GdmsSystem,
    cloud: &JuliaCloud,
    depth: usize,
    gap: f64,
    cap: usize,
) -> Result<HyperbolicReport> {
    let nv = sys.vertex_count();
    let mut frontier: Vec<(usize, SpherePoint)> = Vec::new();
    for s in 0..sys.symbols().len() {
        for v in sys.map_of(s).critical_values()? {
            frontier.push((sys.terminal_vertex(s), v));
        }
    }
    let mut buckets: Vec<Vec<SpherePoint>> = vec![Vec::new(); nv];
    let mut truncated = false;
    let mut total = 0;
    'outer: for level in 0..=depth {
        for &(v, z) in &frontier {
            buckets[v].push(z);
            total += 1;
            if total >= cap {
                truncated = true;
                break 'outer;
            }
        }
        if level == depth {
            break;
        }
        let mut next = Vec::new();
        for &(v, z) in &frontier {
            for s in sys.symbols_from(v) {
                next.push((sys.terminal_vertex(s), sys.map_of(s).eval(z)));
            }
        }
        // orbits that reach a common point continue identically
        next.sort_by(|a, b| (a.0, key(&a.1)).partial_cmp(&(b.0, key(&b.1))).unwrap_or(std::cmp::Ordering::Equal));
        next.dedup_by(|a, b| a.0 == b.0 && a.1.chordal_distance(&b.1) < 1e-12);
        frontier = next;
    }
    let mut min_distance = vec![f64::INFINITY; nv];
    for v in 0..nv {
        let index = cloud.index(v);
        for z in &buckets[v] {
            if let Some((_, d)) = index.nearest(z) {
                min_distance[v] = min_distance[v].min(d);
            }
        }
    }
    let outcome = if min_distance.iter().all(|&d| d >= gap) {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    };
    Ok(HyperbolicReport {
        min_distance,
        orbit_samples: total,
        truncated,
        gap,
        outcome,
    })
}

fn key(z: &SpherePoint) -> [f64; 3] {
    z.to_unit_vector()
}

fn mobius_matrix(g: &RationalMap) -> [Complex64; 4] {
    [g.num().coeff(1), g.num().coeff(0), g.den().coeff(1), g.den().coeff(0)]
}

fn mat_mul(a: [Complex64; 4], b: [Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoxodromicReport {
    pub holds: bool,
    /// Number of degree-one loop words examined.
    pub checked: usize,
    /// First degree-one loop word that is not loxodromic.
    pub offender: Option<(SymbolicWord, MobiusKind)>,
    /// No generator has degree one, so no word can.
    pub vacuous: bool,
}

/// Every degree-one composition along a loop of length at most `max_len`
/// must be loxodromic. Only words built from degree-one generators can have
/// degree one, so the search runs over those.
pub fn check_loxodromic_condition(sys: &GdmsSystem, max_len: usize) -> Result<LoxodromicReport> {
    if max_len == 0 {
        return Err(Error::DomainError("word length cap must be at least 1".into()));
    }
    let unit: Vec<usize> = (0..sys.symbols().len()).filter(|&s| sys.map_of(s).degree() == 1).collect();
    if unit.is_empty() {
        return Ok(LoxodromicReport {
            holds: true,
            checked: 0,
            offender: None,
            vacuous: true,
        });
    }
    let mut checked = 0;
    // depth-first over admissible words of unit symbols; matrices compose as outer * inner
    let mut stack: Vec<(Vec<usize>, [Complex64; 4])> =
        unit.iter().map(|&s| (vec![s], mobius_matrix(sys.map_of(s)))).collect();
    while let Some((word, m)) = stack.pop() {
        let (first, last) = (word[0], *word.last().unwrap());
        if sys.terminal_vertex(last) == sys.initial_vertex(first) {
            checked += 1;
            let g = RationalMap::mobius(m[0], m[1], m[2], m[3])?;
            let kind = g.classify_mobius()?.kind;
            if kind != MobiusKind::Loxodromic {
                return Ok(LoxodromicReport {
                    holds: false,
                    checked,
                    offender: Some((sys.word(word)?, kind)),
                    vacuous: false,
                });
            }
        }
        if word.len() < max_len {
            for &s in &unit {
                if sys.initial_vertex(s) == sys.terminal_vertex(last) {
                    let mut w = word.clone();
                    w.push(s);
                    // normalise to keep entries bounded
                    let p = mat_mul(mobius_matrix(sys.map_of(s)), m);
                    let scale = p.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    stack.push((w, p.map(|x| x / scale)));
                }
            }
        }
    }
    Ok(LoxodromicReport {
        holds: true,
        checked,
        offender: None,
        vacuous: false,
    })
}

/// Totally invariant points of a single generator: fixed points whose only
/// preimage is themselves (for a Möbius map, all fixed points).
pub fn totally_invariant_points(g: &RationalMap) -> Result<Vec<SpherePoint>> {
    let mut candidates: Vec<SpherePoint> = if g.degree() == 1 {
        let [a, b, c, d] = mobius_matrix(g);
        if c.norm() == 0.0 {
            let mut v = vec![SpherePoint::Infinity];
            if (a - d).norm() > 0.0 {
                v.push(SpherePoint::new(b / (d - a)));
            }
            v
        } else {
            // c z² + (d - a) z - b = 0
            let disc = ((d - a) * (d - a) + 4.0 * b * c).sqrt();
            vec![
                SpherePoint::new((a - d + disc) / (2.0 * c)),
                SpherePoint::new((a - d - disc) / (2.0 * c)),
            ]
        }
    } else {
        g.critical_points()?
            .into_iter()
            .filter(|c| g.eval(*c).chordal_distance(c) < 1e-9)
            .collect()
    };
    if g.degree() > 1 {
        candidates.retain(|z| {
            g.preimages(*z)
                .map(|pre| pre.iter().all(|w| w.chordal_distance(z) < 1e-6))
                .unwrap_or(false)
        });
    }
    let mut out: Vec<SpherePoint> = Vec::new();
    for z in candidates {
        if out.iter().all(|q| q.chordal_distance(&z) > DISTINCT_TOL) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Generator-level screen for exceptional points: per vertex, the totally
/// invariant points of the maps leaving it, with how many of those maps
/// share each one. A point shared by every map is a genuine exceptional
/// candidate; the full semigroup exceptional set is not computed.
pub fn exceptional_screen(sys: &GdmsSystem) -> Result<Vec<Vec<(SpherePoint, usize)>>> {
    let mut out = Vec::with_capacity(sys.vertex_count());
    for v in 0..sys.vertex_count() {
        let mut tally: Vec<(SpherePoint, usize)> = Vec::new();
        for s in sys.symbols_from(v) {
            for z in totally_invariant_points(sys.map_of(s))? {
                match tally.iter_mut().find(|(q, _)| q.chordal_distance(&z) <= DISTINCT_TOL) {
                    Some((_, n)) => *n += 1,
                    None => tally.push((z, 1)),
                }
            }
        }
        out.push(tally);
    }
    Ok(out)
}
