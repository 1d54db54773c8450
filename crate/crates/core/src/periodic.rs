//! Repelling periodic points of the skew product.
//!
//! For a cyclic word `w` the fixed points of `g_w` are the zeros of the
//! homogeneous form `H(x, y) = X(x, y) y - Y(x, y) x`, where `(X, Y)` is the
//! lift of `g_w`. `H` is evaluated by pushing a jet along the word, so long
//! words never need their (badly conditioned) coefficients. To make sure `H`
//! has exactly `deg g_w + 1` zeros in the working chart, the chart is moved by
//! a fixed unitary Möbius map that keeps every fixed point away from infinity.

use crate::error::{Error, Result};
use crate::gdms::{GdmsSystem, SymbolicWord};
use crate::julia::{JuliaCloud, SphereIndex};
use crate::ratmap::aberth::{aberth, aberth_completing, AberthSettings, RootTarget};
use crate::ratmap::{Jet, SpherePoint, DEFAULT_DEGREE_CAP};
use crate::symbolic::DEFAULT_WORD_CAP;
use num_complex::Complex64;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::fmt::Write as _;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct RepellingPoint {
    pub word: SymbolicWord,
    pub z: SpherePoint,
    /// Spherical derivative norm of `g_w` at `z`.
    pub multiplier: f64,
    /// Chordal distance between `g_w(z)` and `z`.
    pub residual: f64,
}

impl RepellingPoint {
    /// The vertex whose Julia set contains the point.
    pub fn vertex(&self, sys: &GdmsSystem) -> usize {
        self.word.initial_vertex(sys)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicSettings {
    /// Words of larger degree are handled in seeded mode.
    pub degree_cap: u128,
    pub word_cap: u128,
    pub seeds_per_word: usize,
    pub newton_tol: f64,
    pub newton_budget: usize,
    /// Points with multiplier at or below `1 + margin` are discarded.
    pub repelling_margin: f64,
    pub max_residual: f64,
    pub dedup_tol: f64,
    pub aberth: AberthSettings,
}

impl Default for PeriodicSettings {
    fn default() -> Self {
        Self {
            degree_cap: DEFAULT_DEGREE_CAP,
            word_cap: DEFAULT_WORD_CAP,
            seeds_per_word: 512,
            newton_tol: 1e-13,
            newton_budget: 100,
            repelling_margin: 1e-6,
            max_residual: 1e-9,
            dedup_tol: 1e-8,
            aberth: AberthSettings {
                tol: 1e-8,
                ..AberthSettings::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicReport {
    pub period: usize,
    pub points: Vec<RepellingPoint>,
    /// Words whose fixed points could not be computed, with the reason.
    pub failures: Vec<(SymbolicWord, Error)>,
    /// Words handled by Newton from cloud seeds; their point lists may be incomplete.
    pub seeded_words: usize,
    pub words: usize,
}

impl PeriodicReport {
    pub fn is_seeded(&self) -> bool {
        self.seeded_words > 0
    }

    pub fn points_of<'a>(&'a self, word: &'a SymbolicWord) -> impl Iterator<Item = &'a RepellingPoint> + 'a {
        self.points.iter().filter(move |p| &p.word == word)
    }

    /// One line per point: word symbols, re, im, multiplier, residual.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let (re, im) = match p.z {
                SpherePoint::Finite(z) => (crate::format::sig12(z.re), crate::format::sig12(z.im)),
                SpherePoint::Infinity => ("inf".to_string(), "inf".to_string()),
            };
            let word: Vec<String> = p.word.symbols().iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "{}\t{re}\t{im}\t{}\t{}",
                word.join(" "),
                crate::format::sig12(p.multiplier),
                crate::format::sig12(p.residual)
            );
        }
        out
    }
}

// Unitary Möbius chart ζ -> (a ζ + b) / (-conj(b) ζ + conj(a)), |a|^2 + |b|^2 = 1.
#[derive(Debug, Clone, Copy)]
struct Chart {
    a: Complex64,
    b: Complex64,
}

impl Chart {
    fn identity() -> Self {
        Chart { a: ONE, b: ZERO }
    }

    // z -> 1/z up to a sign, used for points near infinity
    fn flip() -> Self {
        Chart { a: ZERO, b: ONE }
    }

    fn rotation(theta: f64, phi: f64) -> Self {
        Chart {
            a: Complex64::from_polar(theta.cos(), phi),
            b: Complex64::from_polar(theta.sin(), 0.3 * phi + 1.0),
        }
    }

    fn jet(&self, zeta: Complex64) -> Jet {
        let (c, d) = (-self.b.conj(), self.a.conj());
        Jet {
            x: self.a * zeta + self.b,
            y: c * zeta + d,
            dx: self.a,
            dy: c,
        }
    }

    fn to_sphere(&self, zeta: Complex64) -> SpherePoint {
        let j = self.jet(zeta);
        SpherePoint::from_homogeneous(j.x, j.y)
    }

    fn from_sphere(&self, p: SpherePoint) -> SpherePoint {
        // the inverse of a unitary matrix is its adjoint
        let (x, y) = p.homogeneous();
        SpherePoint::from_homogeneous(self.a.conj() * x - self.b * y, self.b.conj() * x + self.a * y)
    }
}

/// `H ∘ chart` for one word.
struct FixedPointForm<'a> {
    sys: &'a GdmsSystem,
    word: &'a SymbolicWord,
    chart: Chart,
    degree: usize,
}

impl FixedPointForm<'_> {
    /// `(H, dH/dζ, |(X, Y)|·|(x, y)|)`; the first two share one scale factor with the third.
    fn eval_full(&self, zeta: Complex64) -> (Complex64, Complex64, f64) {
        let start = self.chart.jet(zeta);
        let s = start.x.norm().max(start.y.norm());
        let (x, y, dx, dy) = (start.x / s, start.y / s, start.dx / s, start.dy / s);
        let out = self.word.apply_jet(self.sys, Jet { x, y, dx, dy });
        let h = out.x * y - out.y * x;
        let dh = out.dx * y + out.x * dy - out.dy * x - out.y * dx;
        let scale = out.x.norm().max(out.y.norm()) * x.norm().max(y.norm());
        (h, dh, scale)
    }
}

impl RootTarget for FixedPointForm<'_> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let (h, dh, _) = self.eval_full(z);
        (h, dh)
    }

    fn relative_residual(&self, z: Complex64) -> f64 {
        let (h, _, scale) = self.eval_full(z);
        if scale == 0.0 {
            f64::INFINITY
        } else {
            h.norm() / scale
        }
    }
}

/// Newton's method for `g_w(z) = z`, evaluated pointwise along the word.
pub fn refine_newton(sys: &GdmsSystem, w: &SymbolicWord, z0: SpherePoint, tol: f64) -> Result<SpherePoint> {
    refine_with_budget(sys, w, z0, tol, 100)
}

fn refine_with_budget(sys: &GdmsSystem, w: &SymbolicWord, z0: SpherePoint, tol: f64, budget: usize) -> Result<SpherePoint> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let residual = |p: SpherePoint| {
        let (image, m) = w.eval_with_norm(sys, p);
        (image.chordal_distance(&p), m)
    };
    let mut z = z0;
    let (mut res, mut mult) = residual(z);
    if res < tol {
        return Ok(z);
    }
    for _ in 0..budget {
        let chart = match z {
            SpherePoint::Finite(c) if c.norm() <= 1.0 => Chart::identity(),
            _ => Chart::flip(),
        };
        let form = FixedPointForm {
            sys,
            word: w,
            chart,
            degree: 0,
        };
        let zeta = chart
            .from_sphere(z)
            .finite()
            .ok_or_else(|| Error::NonConvergence("Newton iterate left the chart".into()))?;
        let (h, dh, scale) = form.eval_full(zeta);
        if dh.norm() <= 1e-14 * scale || !dh.norm().is_finite() {
            return Err(Error::DerivativeSingular);
        }
        let next = chart.to_sphere(zeta - h / dh);
        let (next_res, next_mult) = residual(next);
        let moved = next.chordal_distance(&z);
        z = next;
        res = next_res;
        mult = next_mult;
        if res < tol || moved < 1e-15 {
            break;
        }
    }
    if res < tol.max(1e-12) || (res < residual_floor(1e-9, mult) && res.is_finite()) {
        Ok(z)
    } else {
        Err(Error::NonConvergence(format!(
            "Newton on word {w} stopped at residual {res:e} after {budget} steps"
        )))
    }
}

/// Residual bound for a point with the given multiplier: rounding the
/// point itself shifts its image by about `ε·m`, so for strongly expanding
/// words the bound grows with `m`.
pub fn residual_floor(bound: f64, multiplier: f64) -> f64 {
    bound.max(1e-13 * multiplier)
}

fn point_order(a: &SpherePoint, b: &SpherePoint) -> Ordering {
    match (a, b) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => Ordering::Equal,
        (SpherePoint::Infinity, _) => Ordering::Greater,
        (_, SpherePoint::Infinity) => Ordering::Less,
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => {
            x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
        }
    }
}

/// Below this degree a plain Aberth solve is cheap enough.
const EXTRA_BASES: usize = 4;
const TREE_MIN_DEGREE: u128 = 64;

/// Iterated preimages of `base` along the word, last letter first: every
/// leaf `u` satisfies `g_w(u) = base`. Each leaf is returned with its chain
/// `[u, g_{e_1}(u), ..., base]`. For an expanding system every inverse branch
/// contracts, so each chain shadows one periodic orbit. Levels wider than
/// `limit` are thinned evenly.
fn backward_chains(sys: &GdmsSystem, w: &SymbolicWord, base: SpherePoint, limit: usize) -> Result<Vec<Vec<SpherePoint>>> {
    // levels[k] holds (point, index of its image in levels[k - 1])
    let mut levels: Vec<Vec<(SpherePoint, usize)>> = vec![vec![(base, 0)]];
    for &s in w.symbols().iter().rev() {
        let g = sys.map_of(s);
        let prev = levels.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * g.degree());
        for (k, (z, _)) in prev.iter().enumerate() {
            next.extend(g.preimages(*z)?.into_iter().map(|u| (u, k)));
        }
        if next.len() > limit {
            let stride = next.len() as f64 / limit as f64;
            next = (0..limit).map(|k| next[(k as f64 * stride) as usize]).collect();
        }
        levels.push(next);
    }
    let depth = levels.len() - 1;
    Ok((0..levels[depth].len())
        .map(|leaf| {
            let mut chain = Vec::with_capacity(depth + 1);
            let mut k = leaf;
            for level in levels.iter().rev() {
                chain.push(level[k].0);
                k = level[k].1;
            }
            chain
        })
        .collect())
}

/// The solution of `g(u) = y` on the branch through `u0`: Newton when `u0`
/// is already close, otherwise the exact preimage nearest to `u0`.
fn local_preimage(g: &crate::ratmap::RationalMap, y: SpherePoint, u0: SpherePoint) -> Option<SpherePoint> {
    if g.eval(u0).chordal_distance(&y) < 1e-3 {
        if let Some(u) = newton_preimage(g, y, u0, 8) {
            if g.eval(u).chordal_distance(&y) < 1e-12 {
                return Some(u);
            }
        }
    }
    g.preimages(y)
        .ok()?
        .into_iter()
        .min_by(|a, b| a.chordal_distance(&u0).total_cmp(&b.chordal_distance(&u0)))
}

fn newton_preimage(g: &crate::ratmap::RationalMap, y: SpherePoint, u0: SpherePoint, iters: usize) -> Option<SpherePoint> {
    let (y1, y2) = y.homogeneous();
    let mut u = u0;
    for _ in 0..iters {
        let flip = !matches!(u, SpherePoint::Finite(c) if c.norm() <= 1.0);
        let zeta = if flip { u.recip() } else { u }.finite()?;
        let jet = if flip {
            Jet { x: ONE, y: zeta, dx: ZERO, dy: ONE }
        } else {
            Jet::identity_at(zeta)
        };
        let out = g.apply_jet(&jet);
        let h = out.x * y2 - out.y * y1;
        let dh = out.dx * y2 - out.dy * y1;
        if dh == ZERO {
            return None;
        }
        let step = h / dh;
        let next_zeta = zeta - step;
        let next = if flip {
            SpherePoint::new(next_zeta).recip()
        } else {
            SpherePoint::new(next_zeta)
        };
        u = next;
        if step.norm() < 1e-14 * (1.0 + zeta.norm()) {
            break;
        }
    }
    Some(u)
}

/// Point at fraction `s` of the way from `a` to `b`, interpolated in homogeneous coordinates.
fn interpolate(a: SpherePoint, b: SpherePoint, s: f64) -> SpherePoint {
    let (ax, ay) = a.homogeneous();
    let (mut bx, mut by) = b.homogeneous();
    // align phases so the interpolation does not pass near the zero vector
    let dot = ax.conj() * bx + ay.conj() * by;
    if dot.norm() > 0.0 {
        let phase = dot.conj() / dot.norm();
        bx *= phase;
        by *= phase;
    }
    SpherePoint::from_homogeneous(ax * (1.0 - s) + bx * s, ay * (1.0 - s) + by * s)
}

/// Critical points of every generator, indexed by symbol; `None` if a
/// solve failed, which disables the continuation guard's step acceptance.
fn critical_sets(sys: &GdmsSystem) -> Vec<Option<Vec<SpherePoint>>> {
    (0..sys.symbols().len()).map(|s| sys.map_of(s).critical_points().ok()).collect()
}

fn critical_distance(crit: &Option<Vec<SpherePoint>>, u: SpherePoint) -> f64 {
    match crit {
        Some(c) => c.iter().map(|p| p.chordal_distance(&u)).fold(2.0, f64::min),
        None => 0.0,
    }
}

/// Moves the end of `chain` to `target`, continuing every preimage along
/// the way. A step is accepted only if each preimage moves by less than a
/// quarter of its distance to the critical points of its map, which keeps
/// Newton on the same branch; otherwise the step is halved.
fn lift_chain(
    sys: &GdmsSystem,
    crit: &[Option<Vec<SpherePoint>>],
    w: &SymbolicWord,
    chain: &mut [SpherePoint],
    target: SpherePoint,
) -> Option<()> {
    let mut budget = LIFT_BUDGET;
    lift_segment(sys, crit, w, chain, target, true, 24, &mut budget)
}

/// Continuation steps allowed per lift; past it the nearest exact
/// preimages are taken, as at full bisection depth.
const LIFT_BUDGET: usize = 2048;

#[allow(clippy::too_many_arguments)]
fn lift_segment(
    sys: &GdmsSystem,
    crit: &[Option<Vec<SpherePoint>>],
    w: &SymbolicWord,
    chain: &mut [SpherePoint],
    target: SpherePoint,
    last: bool,
    depth: usize,
    budget: &mut usize,
) -> Option<()> {
    *budget = budget.saturating_sub(1);
    let n = w.len();
    let (iters, tol) = if last { (8, 1e-12) } else { (4, 1e-8) };
    let mut trial = chain.to_vec();
    trial[n] = target;
    let mut ok = true;
    for k in (0..n).rev() {
        let sym = w.symbols()[k];
        let g = sys.map_of(sym);
        match newton_preimage(g, trial[k + 1], chain[k], iters) {
            Some(u)
                if g.eval(u).chordal_distance(&trial[k + 1]) < tol
                    && u.chordal_distance(&chain[k]) <= 0.25 * critical_distance(&crit[sym], chain[k]) =>
            {
                trial[k] = u
            }
            _ => {
                ok = false;
                break;
            }
        }
    }
    if ok {
        chain.copy_from_slice(&trial);
        return Some(());
    }
    if depth == 0 || *budget == 0 {
        // give up on continuation for this step and take the nearest exact preimages
        chain[n] = target;
        for k in (0..n).rev() {
            chain[k] = local_preimage(sys.map_of(w.symbols()[k]), chain[k + 1], chain[k])?;
        }
        return Some(());
    }
    let mid = interpolate(chain[n], target, 0.5);
    lift_segment(sys, crit, w, chain, mid, false, depth - 1, budget)?;
    lift_segment(sys, crit, w, chain, target, last, depth - 1, budget)
}

/// Fixed point of the inverse branch that a backward chain follows: the
/// end of the chain is dragged onto its leaf until the leaf stops moving.
fn branch_fixed_point(
    sys: &GdmsSystem,
    crit: &[Option<Vec<SpherePoint>>],
    w: &SymbolicWord,
    mut chain: Vec<SpherePoint>,
) -> Option<SpherePoint> {
    for _ in 0..30 {
        let leaf = chain[0];
        lift_chain(sys, crit, w, &mut chain, leaf)?;
        if chain[0].chordal_distance(&leaf) < 1e-13 {
            break;
        }
    }
    Some(chain[0])
}

/// Drops points within `tol` (chordal) of an earlier one.
fn dedup_points(points: Vec<SpherePoint>, tol: f64) -> Vec<SpherePoint> {
    let mut keyed: Vec<(f64, usize, SpherePoint)> = points
        .into_iter()
        .enumerate()
        .map(|(k, p)| (p.to_unit_vector()[0], k, p))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut keep = vec![true; keyed.len()];
    for a in 0..keyed.len() {
        if !keep[a] {
            continue;
        }
        for b in a + 1..keyed.len() {
            if keyed[b].0 - keyed[a].0 > tol {
                break;
            }
            if keep[b] && keyed[a].2.chordal_distance(&keyed[b].2) < tol {
                keep[b] = false;
            }
        }
    }
    let mut out: Vec<(usize, SpherePoint)> = keyed
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((_, k, p), _)| (k, p))
        .collect();
    out.sort_by_key(|(k, _)| *k);
    out.into_iter().map(|(_, p)| p).collect()
}

/// A chart in which infinity is not a fixed point of `g_w`.
fn pick_chart(sys: &GdmsSystem, w: &SymbolicWord) -> Result<Chart> {
    for k in 0..8 {
        let chart = Chart::rotation(0.37 + 0.61 * k as f64, 1.3 + 2.1 * k as f64);
        let at_infinity = SpherePoint::from_homogeneous(chart.a, -chart.b.conj());
        if w.eval_with_norm(sys, at_infinity).0.chordal_distance(&at_infinity) >= 1e-6 {
            return Ok(chart);
        }
    }
    Err(Error::RootFailure(format!("no usable chart for word {w}")))
}

/// All `deg g_w + 1` fixed points. Long words start from Newton limits of
/// the backward tree of `base`; whatever those miss (attracting and neutral
/// points, mostly) is completed by a deflated Aberth solve.
fn all_fixed_points(
    sys: &GdmsSystem,
    w: &SymbolicWord,
    settings: &PeriodicSettings,
    base: Option<SpherePoint>,
) -> Result<Vec<SpherePoint>> {
    let degree = w.degree(sys) as usize;
    let chart = pick_chart(sys, w)?;
    let form = FixedPointForm {
        sys,
        word: w,
        chart,
        degree: degree + 1,
    };
    let aberth_settings = AberthSettings {
        max_sweeps: settings.aberth.max_sweeps.max(50 + 2 * degree),
        ..settings.aberth
    };
    let mut found: Vec<SpherePoint> = Vec::new();
    if let (Some(base), true) = (base, degree as u128 >= TREE_MIN_DEGREE) {
        // Straight paths from one base wind differently around the critical
        // values, so some branches collide; fixed points already found serve
        // as further bases with different windings.
        let crit = critical_sets(sys);
        let mut bases = vec![base];
        for _ in 0..EXTRA_BASES + 1 {
            let b = *bases.last().unwrap();
            for chain in backward_chains(sys, w, b, usize::MAX)? {
                let Some(start) = branch_fixed_point(sys, &crit, w, chain) else { continue };
                if let Ok(z) = refine_with_budget(sys, w, start, settings.newton_tol, 30) {
                    found.push(z);
                }
            }
            found = dedup_points(found, 1e-10);
            if found.len() > degree {
                break;
            }
            let next = found
                .iter()
                .max_by(|a, b| {
                    let da = bases.iter().map(|q| q.chordal_distance(a)).fold(2.0, f64::min);
                    let db = bases.iter().map(|q| q.chordal_distance(b)).fold(2.0, f64::min);
                    da.total_cmp(&db)
                })
                .copied();
            match next {
                Some(n) => bases.push(n),
                None => break,
            }
        }
        if found.len() > degree + 1 {
            found.clear();
        }
    }
    let known: Vec<Complex64> = found.iter().filter_map(|p| chart.from_sphere(*p).finite()).collect();
    if known.len() != found.len() {
        found.clear();
    }
    let rest = if found.is_empty() {
        aberth(&form, &aberth_settings)?
    } else {
        match aberth_completing(&form, &known, &aberth_settings) {
            Ok(r) => r,
            Err(_) => {
                found.clear();
                aberth(&form, &aberth_settings)?
            }
        }
    };
    found.extend(rest.into_iter().map(|r| chart.to_sphere(r)));
    Ok(found)
}

/// Candidate fixed points of one word: all of them in explicit mode, Newton
/// seeds (backward-tree leaves and cloud samples) in seeded mode.
fn word_candidates(
    sys: &GdmsSystem,
    w: &SymbolicWord,
    settings: &PeriodicSettings,
    base: Option<SpherePoint>,
    cloud_seeds: Option<&[SpherePoint]>,
) -> Result<(Vec<SpherePoint>, bool)> {
    let degree = w.degree(sys);
    if degree <= settings.degree_cap {
        return Ok((all_fixed_points(sys, w, settings, base)?, false));
    }
    let limit = settings.seeds_per_word.max(1);
    let mut seeds = match base {
        Some(b) => {
            let crit = critical_sets(sys);
            backward_chains(sys, w, b, limit)?
                .into_iter()
                .filter_map(|c| branch_fixed_point(sys, &crit, w, c))
                .collect()
        }
        None => Vec::new(),
    };
    if let Some(cloud) = cloud_seeds {
        let step = (cloud.len() / limit).max(1);
        seeds.extend(cloud.iter().step_by(step).take(limit).copied());
    }
    if seeds.is_empty() {
        return Err(Error::RootFailure(format!(
            "word {w} has degree {degree} above the cap and no seeds are available"
        )));
    }
    Ok((seeds, true))
}

/// Refined candidates of one word, before filtering.
fn word_points(
    sys: &GdmsSystem,
    w: &SymbolicWord,
    settings: &PeriodicSettings,
    base: Option<SpherePoint>,
    cloud_seeds: Option<&[SpherePoint]>,
) -> Result<(Vec<SpherePoint>, bool)> {
    let (candidates, seeded) = word_candidates(sys, w, settings, base, cloud_seeds)?;
    let mut out = Vec::with_capacity(candidates.len());
    for c in candidates {
        match refine_with_budget(sys, w, c, settings.newton_tol, settings.newton_budget) {
            Ok(z) => out.push(z),
            // a root that Newton cannot improve is kept as is; the filters decide
            Err(_) if !seeded => out.push(c),
            Err(_) => {}
        }
    }
    Ok((out, seeded))
}

/// Keeps the repelling fixed points of `w` among `zs`, sorted and deduplicated.
fn finalize(sys: &GdmsSystem, w: &SymbolicWord, zs: &[SpherePoint], settings: &PeriodicSettings) -> Vec<RepellingPoint> {
    let mut kept: Vec<RepellingPoint> = Vec::new();
    for &z in zs {
        let (image, multiplier) = w.eval_with_norm(sys, z);
        let residual = image.chordal_distance(&z);
        if residual >= residual_floor(settings.max_residual, multiplier) || !(multiplier > 1.0 + settings.repelling_margin) {
            continue;
        }
        kept.push(RepellingPoint {
            word: w.clone(),
            z,
            multiplier,
            residual,
        });
    }
    kept.sort_by(|a, b| point_order(&a.z, &b.z));
    let zs = dedup_points(kept.iter().map(|p| p.z).collect(), settings.dedup_tol);
    let mut unique: Vec<RepellingPoint> = Vec::with_capacity(zs.len());
    let mut next = 0;
    for p in kept {
        if next < zs.len() && p.z == zs[next] {
            unique.push(p);
            next += 1;
        }
    }
    unique
}

type WordOutcome = (SymbolicWord, Result<(Vec<RepellingPoint>, bool)>);

/// Solves the rotations of one cyclic word together. If `z` is fixed by
/// `w`, then `g_{w_1}(z)` is fixed by `w` rotated once, so points found for
/// any rotation are carried around the cycle and the union is kept. Further
/// rotations are solved only while the class is still short of points.
fn solve_class(
    sys: &GdmsSystem,
    class: &[SymbolicWord],
    settings: &PeriodicSettings,
    bases: Option<&[Option<SpherePoint>]>,
    seed_lists: Option<&[Vec<SpherePoint>]>,
) -> Vec<WordOutcome> {
    let k = class.len();
    let degree = class[0].degree(sys);
    let mut sets: Vec<Vec<SpherePoint>> = vec![Vec::new(); k];
    let mut errors: Vec<Option<Error>> = vec![None; k];
    let mut seeded = false;
    for j in 0..k {
        if j > 0 && finalize(sys, &class[0], &sets[0], settings).len() as u128 >= degree {
            break;
        }
        let w = &class[j];
        let v = w.initial_vertex(sys);
        let seeds = seed_lists.and_then(|s| s.get(v)).map(|v| v.as_slice());
        let base = bases.and_then(|b| b.get(v).copied().flatten());
        match word_points(sys, w, settings, base, seeds) {
            Ok((pts, s)) => {
                seeded |= s;
                sets[j].extend(pts);
                sets[j] = dedup_points(std::mem::take(&mut sets[j]), settings.dedup_tol);
            }
            Err(e) => errors[j] = Some(e),
        }
        // two laps carry every set to every rotation
        for step in 0..2 * k - 1 {
            let a = (j + step) % k;
            let b = (a + 1) % k;
            let g = sys.map_of(class[a].symbols()[0]);
            let pushed: Vec<SpherePoint> = sets[a]
                .iter()
                .map(|&z| {
                    let y = g.eval(z);
                    refine_with_budget(sys, &class[b], y, settings.newton_tol, settings.newton_budget).unwrap_or(y)
                })
                .collect();
            let mut merged = std::mem::take(&mut sets[b]);
            merged.extend(pushed);
            sets[b] = dedup_points(merged, settings.dedup_tol);
        }
    }
    class
        .iter()
        .zip(sets)
        .zip(errors)
        .map(|((w, zs), err)| {
            let r = match err {
                Some(e) if zs.is_empty() => Err(e),
                _ => Ok((finalize(sys, w, &zs, settings), seeded)),
            };
            (w.clone(), r)
        })
        .collect()
}

/// Groups cyclic words into rotation classes, each listed from its least rotation.
fn rotation_classes(words: &[SymbolicWord]) -> Vec<Vec<SymbolicWord>> {
    let mut seen = std::collections::HashSet::new();
    let mut classes = Vec::new();
    for w in words {
        let least = (0..w.len()).map(|k| w.rotated(k)).min().unwrap();
        if !seen.insert(least.clone()) {
            continue;
        }
        let mut class = vec![least.clone()];
        for k in 1..w.len() {
            let r = least.rotated(k);
            if r == least {
                break;
            }
            class.push(r);
        }
        classes.push(class);
    }
    classes
}

/// One point of each vertex's Julia set to grow backward trees from.
fn base_points(sys: &GdmsSystem, settings: &PeriodicSettings) -> Vec<Option<SpherePoint>> {
    let mut bases = vec![None; sys.vertex_count()];
    for p in 1..=2 {
        if bases.iter().all(Option::is_some) {
            break;
        }
        if let Ok(rep) = find_repelling_with(sys, p, settings, None, None) {
            for pt in rep.points {
                let v = pt.vertex(sys);
                bases[v].get_or_insert(pt.z);
            }
        }
    }
    bases
}

/// Repelling fixed points of `g_w` for every cyclic word of length `period`.
/// `cloud` supplies Newton seeds for words whose degree exceeds the cap.
pub fn find_repelling(
    sys: &GdmsSystem,
    period: usize,
    settings: &PeriodicSettings,
    cloud: Option<&JuliaCloud>,
) -> Result<PeriodicReport> {
    if period == 0 {
        return Err(Error::DomainError("period must be at least 1".into()));
    }
    let words = sys.words(period, true, settings.word_cap)?;
    let bases = if words.iter().any(|w| w.degree(sys) >= TREE_MIN_DEGREE) {
        Some(base_points(sys, settings))
    } else {
        None
    };
    find_repelling_with(sys, period, settings, cloud, bases.as_deref())
}

fn find_repelling_with(
    sys: &GdmsSystem,
    period: usize,
    settings: &PeriodicSettings,
    cloud: Option<&JuliaCloud>,
    bases: Option<&[Option<SpherePoint>]>,
) -> Result<PeriodicReport> {
    let words = sys.words(period, true, settings.word_cap)?;
    let seed_lists: Option<Vec<Vec<SpherePoint>>> = cloud.map(|c| (0..c.vertex_count()).map(|v| c.points(v)).collect());
    let mut results: Vec<WordOutcome> = rotation_classes(&words)
        .par_iter()
        .flat_map_iter(|class| solve_class(sys, class, settings, bases, seed_lists.as_deref()))
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut report = PeriodicReport {
        period,
        points: Vec::new(),
        failures: Vec::new(),
        seeded_words: 0,
        words: words.len(),
    };
    for (w, r) in results {
        match r {
            Ok((pts, seeded)) => {
                report.points.extend(pts);
                report.seeded_words += seeded as usize;
            }
            Err(e) => report.failures.push((w, e)),
        }
    }
    Ok(report)
}

/// Repelling periodic points of periods `1..=max_period`, grouped by the
/// vertex they belong to. Stops early once every vertex has at least one.
pub fn seed_points(sys: &GdmsSystem, max_period: usize, settings: &PeriodicSettings) -> Result<Vec<Vec<SpherePoint>>> {
    let mut seeds = vec![Vec::new(); sys.vertex_count()];
    for p in 1..=max_period {
        let report = find_repelling(sys, p, settings, None)?;
        for pt in &report.points {
            seeds[pt.vertex(sys)].push(pt.z);
        }
        if seeds.iter().all(|s| !s.is_empty()) {
            return Ok(seeds);
        }
    }
    match seeds.iter().position(|s| s.is_empty()) {
        Some(v) => Err(Error::NoSeed(v)),
        None => Ok(seeds),
    }
}

/// Largest distance from a cloud sample to the nearest periodic point of
/// the same vertex. Vertices without samples are ignored; a vertex with
/// samples but no periodic points gives infinity.
pub fn density_gap(sys: &GdmsSystem, points: &[RepellingPoint], cloud: &JuliaCloud) -> f64 {
    let mut per_vertex = vec![Vec::new(); cloud.vertex_count()];
    for p in points {
        let v = p.vertex(sys);
        if v < per_vertex.len() {
            per_vertex[v].push(p.z);
        }
    }
    density_gap_points(&per_vertex, cloud)
}

/// [`density_gap`] with the periodic points already grouped by vertex.
pub fn density_gap_points(per_vertex: &[Vec<SpherePoint>], cloud: &JuliaCloud) -> f64 {
    let mut gap: f64 = 0.0;
    for (v, samples) in cloud.vertices.iter().enumerate() {
        if samples.is_empty() {
            continue;
        }
        let pts = per_vertex.get(v).map(|p| p.as_slice()).unwrap_or(&[]);
        if pts.is_empty() {
            return f64::INFINITY;
        }
        let index = SphereIndex::new(pts);
        let g = samples
            .par_iter()
            .map(|s| index.nearest(&s.z).map_or(f64::INFINITY, |(_, d)| d))
            .reduce(|| 0.0, f64::max);
        gap = gap.max(g);
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::power_system;

    #[test]
    fn square_map_period_one() {
        let sys = power_system(2).unwrap();
        let rep = find_repelling(&sys, 1, &PeriodicSettings::default(), None).unwrap();
        assert_eq!(rep.points.len(), 1);
        let p = &rep.points[0];
        assert!(p.z.chordal_distance(&SpherePoint::from_re_im(1.0, 0.0)) < 1e-12);
        assert!((p.multiplier - 2.0).abs() < 1e-9);
    }

    #[test]
    fn square_map_period_two() {
        let sys = power_system(2).unwrap();
        let rep = find_repelling(&sys, 2, &PeriodicSettings::default(), None).unwrap();
        assert_eq!(rep.points.len(), 3);
        for p in &rep.points {
            let z = p.z.finite().unwrap();
            assert!((z.powu(3) - ONE).norm() < 1e-10);
            assert!((p.multiplier - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn newton_examples() {
        let sys = power_system(2).unwrap();
        let w = sys.word(vec![0]).unwrap();
        let z = refine_newton(&sys, &w, SpherePoint::from_re_im(0.9, 0.1), 1e-13).unwrap();
        assert!(z.chordal_distance(&SpherePoint::from_re_im(1.0, 0.0)) < 1e-12);
        let fixed = SpherePoint::from_re_im(1.0, 0.0);
        assert_eq!(refine_newton(&sys, &w, fixed, 1e-13).unwrap(), fixed);
        // F(z) = z^2 - z has F'(1/2) = 0
        assert_eq!(
            refine_newton(&sys, &w, SpherePoint::from_re_im(0.5, 0.0), 1e-13).unwrap_err(),
            Error::DerivativeSingular
        );
    }

    #[test]
    fn chart_round_trip() {
        let c = Chart::rotation(0.8, 2.0);
        let p = SpherePoint::from_re_im(0.3, -1.7);
        let zeta = c.from_sphere(p).finite().unwrap();
        assert!(c.to_sphere(zeta).chordal_distance(&p) < 1e-14);
    }

    #[test]
    fn gap_against_itself_is_zero() {
        let sys = power_system(2).unwrap();
        let rep = find_repelling(&sys, 4, &PeriodicSettings::default(), None).unwrap();
        let cloud = JuliaCloud::from_points(vec![rep.points.iter().map(|p| p.z).collect()]);
        assert_eq!(density_gap(&sys, &rep.points, &cloud), 0.0);
    }
}
