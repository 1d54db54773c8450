//! Per-vertex Julia set approximation by random backward iteration.
//!
//! A walker sits at vertex `j` with a point `z`. Each step picks a symbol
//! `(e, g)` with `t(e) = j`, a solution `w` of `g(w) = z`, and moves to
//! `(i(e), w)`. Julia sets are backward invariant, so starting from
//! repelling periodic points every visited point lies on the Julia set of
//! its vertex.

pub mod boxdim;
pub mod index;
pub mod render;

pub use boxdim::{box_counting_dim, box_counting_points, default_scales, BoxDimEstimate};
pub use index::SphereIndex;
pub use render::{render, render_colored, Raster, Viewport};

use crate::error::{Error, Result};
use crate::gdms::GdmsSystem;
use crate::ratmap::SpherePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the walker chooses among the symbols entering its vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchWeighting {
    /// Uniform over symbols, then uniform over the preimages.
    Uniform,
    /// Symbols weighted by the degree of their map.
    DegreeWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudParams {
    /// Samples recorded per vertex.
    pub samples: usize,
    pub burn_in: usize,
    pub rng_seed: u64,
    /// Independent walkers; fixed so results do not depend on the thread count.
    pub walkers: usize,
    pub weighting: BranchWeighting,
}

impl Default for CloudParams {
    fn default() -> Self {
        Self {
            samples: 100_000,
            burn_in: 50,
            rng_seed: 42,
            walkers: 8,
            weighting: BranchWeighting::Uniform,
        }
    }
}

/// Which vertices' samples an operation looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSelector {
    All,
    Vertex(usize),
}

impl VertexSelector {
    pub fn points(&self, cloud: &JuliaCloud) -> Vec<SpherePoint> {
        match *self {
            VertexSelector::All => cloud.all_points(),
            VertexSelector::Vertex(v) if v < cloud.vertex_count() => cloud.points(v),
            VertexSelector::Vertex(_) => Vec::new(),
        }
    }
}

/// Where a sample came from: `map_of(symbol)(sample) = parent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub symbol: usize,
    pub parent: SpherePoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudSample {
    pub z: SpherePoint,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone)]
pub struct JuliaCloud {
    pub vertices: Vec<Vec<CloudSample>>,
    pub params: CloudParams,
    /// Seed points per vertex the walkers started from.
    pub seeds: Vec<Vec<SpherePoint>>,
}

impl JuliaCloud {
    /// A cloud without provenance, e.g. for externally generated point sets.
    pub fn from_points(vertices: Vec<Vec<SpherePoint>>) -> Self {
        Self {
            vertices: vertices
                .into_iter()
                .map(|v| v.into_iter().map(|z| CloudSample { z, provenance: None }).collect())
                .collect(),
            params: CloudParams::default(),
            seeds: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn points(&self, v: usize) -> Vec<SpherePoint> {
        self.vertices[v].iter().map(|s| s.z).collect()
    }

    pub fn all_points(&self) -> Vec<SpherePoint> {
        self.vertices.iter().flatten().map(|s| s.z).collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, v: usize) -> SphereIndex {
        SphereIndex::new(&self.points(v))
    }

    /// Plain-text point list, one `vertex re im` row per sample (1-based vertex).
    pub fn to_point_list(&self, v: usize) -> String {
        let mut out = String::new();
        for s in &self.vertices[v] {
            match s.z {
                SpherePoint::Finite(z) => out.push_str(&format!("{} {:e} {:e}\n", v + 1, z.re, z.im)),
                SpherePoint::Infinity => out.push_str(&format!("{} inf inf\n", v + 1)),
            }
        }
        out
    }
}

/// Runs the backward walk from the given per-vertex seeds.
pub fn inverse_iteration(sys: &GdmsSystem, seeds: &[Vec<SpherePoint>], params: &CloudParams) -> Result<JuliaCloud> {
    let nv = sys.vertex_count();
    if params.samples == 0 || params.walkers == 0 {
        return Err(Error::DomainError("samples and walkers must be positive".into()));
    }
    for v in 0..nv {
        if seeds.get(v).map_or(true, |s| s.is_empty()) {
            return Err(Error::NoSeed(v));
        }
    }
    let quota = params.samples.div_ceil(params.walkers);
    let per_walker: Vec<Vec<Vec<CloudSample>>> = (0..params.walkers)
        .into_par_iter()
        .map(|k| walk(sys, seeds, params, k, quota))
        .collect::<Result<_>>()?;
    let mut vertices = vec![Vec::with_capacity(params.samples); nv];
    for walker in per_walker {
        for (v, samples) in walker.into_iter().enumerate() {
            vertices[v].extend(samples);
        }
    }
    for v in vertices.iter_mut() {
        v.truncate(params.samples);
    }
    Ok(JuliaCloud {
        vertices,
        params: *params,
        seeds: seeds.to_vec(),
    })
}

fn walker_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn walk(
    sys: &GdmsSystem,
    seeds: &[Vec<SpherePoint>],
    params: &CloudParams,
    k: usize,
    quota: usize,
) -> Result<Vec<Vec<CloudSample>>> {
    let nv = sys.vertex_count();
    let mut rng = walker_rng(params.rng_seed, k);
    let incoming: Vec<Vec<usize>> = (0..nv).map(|v| sys.symbols_into(v)).collect();
    let start_vertex = k % nv;
    let start = seeds[start_vertex][(k / nv) % seeds[start_vertex].len()];
    let mut out: Vec<Vec<CloudSample>> = vec![Vec::with_capacity(quota); nv];
    let (mut vertex, mut z) = (start_vertex, start);
    let mut since_restart = 0usize;
    let max_steps = params.burn_in + 1000 * quota * nv + 10_000;
    for _ in 0..max_steps {
        if out.iter().all(|v| v.len() >= quota) {
            return Ok(out);
        }
        let candidates = &incoming[vertex];
        if candidates.is_empty() {
            return Err(Error::NoSeed(vertex));
        }
        let symbol = match params.weighting {
            BranchWeighting::Uniform => candidates[rng.gen_range(0..candidates.len())],
            BranchWeighting::DegreeWeighted => {
                let total: usize = candidates.iter().map(|&s| sys.map_of(s).degree()).sum();
                let mut pick = rng.gen_range(0..total);
                let mut chosen = candidates[0];
                for &s in candidates {
                    let d = sys.map_of(s).degree();
                    if pick < d {
                        chosen = s;
                        break;
                    }
                    pick -= d;
                }
                chosen
            }
        };
        let pre = match sys.map_of(symbol).preimages(z) {
            Ok(p) => p,
            Err(_) => {
                (vertex, z) = (start_vertex, start);
                since_restart = 0;
                continue;
            }
        };
        let w = pre[rng.gen_range(0..pre.len())];
        let parent = z;
        vertex = sys.initial_vertex(symbol);
        z = w;
        since_restart += 1;
        if since_restart > params.burn_in && out[vertex].len() < quota {
            out[vertex].push(CloudSample {
                z,
                provenance: Some(Provenance { symbol, parent }),
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "walker {k} did not fill its per-vertex quota of {quota}"
    )))
}

/// Outcome of [`forward_consistency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub checked: usize,
    pub passed: usize,
    pub fraction: f64,
    pub worst: f64,
}

/// For each sample with provenance `(e, g)`, checks that `g(sample)` lies
/// within `eps` (chordal) of the cloud at `t(e)`.
pub fn forward_consistency(sys: &GdmsSystem, cloud: &JuliaCloud, eps: f64) -> ConsistencyReport {
    let indices: Vec<SphereIndex> = (0..cloud.vertex_count()).map(|v| cloud.index(v)).collect();
    let dists: Vec<f64> = cloud
        .vertices
        .par_iter()
        .flat_map_iter(|samples| {
            samples.iter().filter_map(|s| {
                let p = s.provenance?;
                let image = sys.map_of(p.symbol).eval(s.z);
                let target = sys.terminal_vertex(p.symbol);
                Some(indices[target].nearest(&image).map_or(f64::INFINITY, |(_, d)| d))
            })
        })
        .collect();
    let checked = dists.len();
    let passed = dists.iter().filter(|&&d| d <= eps).count();
    ConsistencyReport {
        checked,
        passed,
        fraction: if checked == 0 { 1.0 } else { passed as f64 / checked as f64 },
        worst: dists.iter().cloned().fold(0.0, f64::max),
    }
}

/// Largest chordal distance between `g(sample)` and the recorded parent.
pub fn provenance_defect(sys: &GdmsSystem, cloud: &JuliaCloud) -> f64 {
    cloud
        .vertices
        .iter()
        .flatten()
        .filter_map(|s| {
            let p = s.provenance?;
            Some(sys.map_of(p.symbol).eval(s.z).chordal_distance(&p.parent))
        })
        .fold(0.0, f64::max)
}

/// Symmetric mismatch between two point sets: the larger of the two
/// one-sided `max_a min_b d(a, b)` values.
pub fn hausdorff_mismatch(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    let one_sided = |from: &[SpherePoint], to: &[SpherePoint]| {
        let index = SphereIndex::new(to);
        from.par_iter()
            .map(|p| index.nearest(p).map_or(f64::INFINITY, |(_, d)| d))
            .reduce(|| 0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::{power_system, single_loop};
    use crate::ratmap::{ComplexPolynomial, RationalMap};

    fn small(samples: usize) -> CloudParams {
        CloudParams {
            samples,
            ..CloudParams::default()
        }
    }

    #[test]
    fn circle_cloud_lies_on_circle() {
        let sys = power_system(2).unwrap();
        let cloud = inverse_iteration(&sys, &[vec![SpherePoint::from_re_im(1.0, 0.0)]], &small(5000)).unwrap();
        assert_eq!(cloud.vertices[0].len(), 5000);
        for s in &cloud.vertices[0] {
            assert!((s.z.finite().unwrap().norm() - 1.0).abs() < 1e-6);
        }
        assert!(provenance_defect(&sys, &cloud) < 1e-9);
    }

    #[test]
    fn chebyshev_cloud_is_real_segment() {
        let g = RationalMap::polynomial(ComplexPolynomial::from_real(&[-2.0, 0.0, 1.0])).unwrap();
        let sys = single_loop(g).unwrap();
        let cloud = inverse_iteration(&sys, &[vec![SpherePoint::from_re_im(2.0, 0.0)]], &small(5000)).unwrap();
        for s in &cloud.vertices[0] {
            let z = s.z.finite().unwrap();
            assert!(z.im.abs() < 1e-6 && z.re.abs() <= 2.0 + 1e-9, "{z}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let sys = power_system(2).unwrap();
        let seeds = [vec![SpherePoint::from_re_im(1.0, 0.0)]];
        let a = inverse_iteration(&sys, &seeds, &small(2000)).unwrap();
        let b = inverse_iteration(&sys, &seeds, &small(2000)).unwrap();
        assert_eq!(a.vertices, b.vertices);
    }

    #[test]
    fn missing_seed_is_an_error() {
        let sys = power_system(2).unwrap();
        assert_eq!(inverse_iteration(&sys, &[vec![]], &small(10)).unwrap_err(), Error::NoSeed(0));
    }

    #[test]
    fn circle_is_forward_consistent() {
        let sys = power_system(2).unwrap();
        let cloud = inverse_iteration(&sys, &[vec![SpherePoint::from_re_im(1.0, 0.0)]], &small(20000)).unwrap();
        let rep = forward_consistency(&sys, &cloud, 1e-3);
        assert_eq!(rep.checked, 20000);
        assert!(rep.fraction > 0.999, "{rep:?}");
    }

    #[test]
    fn empty_provenance_passes_vacuously() {
        let sys = power_system(2).unwrap();
        let cloud = JuliaCloud::from_points(vec![vec![SpherePoint::from_re_im(1.0, 0.0)]]);
        let rep = forward_consistency(&sys, &cloud, 1e-4);
        assert_eq!(rep.checked, 0);
        assert_eq!(rep.fraction, 1.0);
    }
}
