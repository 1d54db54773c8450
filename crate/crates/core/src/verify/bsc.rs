//! Disc enclosures of preimages and the backward separating condition.
//!
//! For a reference disc `U` containing every vertex Julia set, the
//! separation `g₁⁻¹(J) ∩ g₂⁻¹(J) = ∅` follows from `g₁⁻¹(U) ∩ g₂⁻¹(U) = ∅`.
//! Preimages of `U` are enclosed in discs exactly for shifted powers
//! `a (z - p)^n + q` and Möbius maps; anything else gets a hull of sampled
//! preimages and cannot certify.

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::gdms::GdmsSystem;
use crate::julia::JuliaCloud;
use crate::ratmap::{RationalMap, SpherePoint};
use num_complex::Complex64;
use std::fmt::Write as _;

// Relative padding on every computed radius, absorbing rounding in the
// recovered map parameters.
const PAD: f64 = 1e-9;

/// Euclidean disc in the `z` chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    pub fn contains_disc(&self, other: &Disc) -> bool {
        (other.center - self.center).norm() + other.radius <= self.radius
    }

    /// Strict separation of the closed discs.
    pub fn disjoint(&self, other: &Disc) -> bool {
        (self.center - other.center).norm() > self.radius + other.radius
    }

    fn padded(self) -> Self {
        Self {
            center: self.center,
            radius: self.radius * (1.0 + PAD) + 1e-12 * (1.0 + self.center.norm()),
        }
    }
}

/// Shapes for which preimage enclosures are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertifiedForm {
    /// `a (z - p)^n + q`
    ShiftedPower { a: Complex64, p: Complex64, n: usize, q: Complex64 },
    /// `(a z + b) / (c z + d)`
    Mobius { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Recognises a shifted power or a Möbius map from the coefficients.
pub fn certified_form(g: &RationalMap) -> Option<CertifiedForm> {
    let (num, den) = (g.num(), g.den());
    if g.degree() == 1 {
        return Some(CertifiedForm::Mobius {
            a: num.coeff(1),
            b: num.coeff(0),
            c: den.coeff(1),
            d: den.coeff(0),
        });
    }
    if den.degree() != 0 {
        return None;
    }
    let n = num.degree();
    let c: Vec<Complex64> = (0..=n).map(|k| num.coeff(k) / den.coeff(0)).collect();
    let a = c[n];
    let p = -c[n - 1] / (a * n as f64);
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for k in 1..n {
        let expected = a * binomial(n, k) * (-p).powu((n - k) as u32);
        if (c[k] - expected).norm() > 1e-10 * scale.max(1.0) {
            return None;
        }
    }
    let q = c[0] - a * (-p).powu(n as u32);
    Some(CertifiedForm::ShiftedPower { a, p, n, q })
}

fn mobius_apply(m: [Complex64; 4], z: Complex64) -> Complex64 {
    (m[0] * z + m[1]) / (m[2] * z + m[3])
}

fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> Option<Disc> {
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    if d.abs() < 1e-300 {
        return None;
    }
    let (a2, b2, c2) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
    let ux = (a2 * (b.im - c.im) + b2 * (c.im - a.im) + c2 * (a.im - b.im)) / d;
    let uy = (a2 * (c.re - b.re) + b2 * (a.re - c.re) + c2 * (b.re - a.re)) / d;
    let center = Complex64::new(ux, uy);
    Some(Disc::new(center, (a - center).norm()))
}

/// Disc containing `g⁻¹(U)`, or `None` when the preimage is unbounded.
pub fn preimage_enclosure(form: &CertifiedForm, u: &Disc) -> Option<Disc> {
    match *form {
        CertifiedForm::ShiftedPower { a, p, n, q } => {
            // |a (z-p)^n + q - c| <= r  implies  |z - p|^n <= (r + |c - q|) / |a|
            let r = ((u.radius + (u.center - q).norm()) / a.norm()).powf(1.0 / n as f64);
            Some(Disc::new(p, r).padded())
        }
        CertifiedForm::Mobius { a, b, c, d } => {
            // g⁻¹ = (d z - b) / (-c z + a), with a pole at a / c
            let inv = [d, -b, -c, a];
            if c != Complex64::new(0.0, 0.0) && (a / c - u.center).norm() <= u.radius * (1.0 + PAD) {
                return None;
            }
            let on = |t: f64| mobius_apply(inv, u.center + Complex64::from_polar(u.radius, t));
            let disc = circumcircle(on(0.0), on(2.0 * std::f64::consts::FRAC_PI_3), on(4.0 * std::f64::consts::FRAC_PI_3))?;
            Some(disc.padded())
        }
    }
}

/// One `(edge, map)` pair leaving a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub symbol: usize,
    pub label: String,
    pub disc: Option<Disc>,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BscVerdict {
    /// Every required pair has disjoint certified enclosures.
    Certified,
    /// Disjoint, but some enclosure or the containment `J ⊂ U` rests on samples.
    SampledOnly,
    /// Some required pair has overlapping enclosures.
    Overlap,
    /// Some enclosure could not be formed at all.
    Undecided,
}

impl BscVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            BscVerdict::Certified => "CERTIFIED",
            BscVerdict::SampledOnly => "SAMPLED-ONLY",
            BscVerdict::Overlap => "FAILED",
            BscVerdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BscCertificate {
    pub u: Disc,
    /// Enclosures grouped by initial vertex.
    pub per_vertex: Vec<Vec<Enclosure>>,
    /// `disjoint[v][a][b]` for enclosures `a`, `b` of vertex `v`; the
    /// diagonal is the exempt self-pair and reads `true`.
    pub disjoint: Vec<Vec<Vec<bool>>>,
    /// `J ⊂ U` shown by `g⁻¹(U) ⊂ U` for every generator.
    pub containment_certified: bool,
    /// Messages about maps handled without certification.
    pub uncertified: Vec<String>,
    pub verdict: BscVerdict,
}

impl BscCertificate {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, BscVerdict::Certified | BscVerdict::SampledOnly)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "U: center {} {} radius {}",
            sig12(self.u.center.re),
            sig12(self.u.center.im),
            sig12(self.u.radius)
        );
        let _ = writeln!(
            out,
            "containment: {}",
            if self.containment_certified { "CERTIFIED" } else { "SAMPLED" }
        );
        for (v, encs) in self.per_vertex.iter().enumerate() {
            let _ = writeln!(out, "vertex {}", v + 1);
            for e in encs {
                let flag = if e.certified { "CERTIFIED" } else { "NON-CERTIFIED" };
                match e.disc {
                    Some(d) => {
                        let _ = writeln!(
                            out,
                            "  {}: center {} {} radius {} {flag}",
                            e.label,
                            sig12(d.center.re),
                            sig12(d.center.im),
                            sig12(d.radius)
                        );
                    }
                    None => {
                        let _ = writeln!(out, "  {}: no enclosure {flag}", e.label);
                    }
                }
            }
        }
        for m in &self.uncertified {
            let _ = writeln!(out, "note: {m}");
        }
        let _ = writeln!(out, "BSC: {}", self.verdict.label());
        out
    }
}

// Bounding disc of sampled preimages of the target cloud.
fn sampled_enclosure(g: &RationalMap, targets: &[SpherePoint]) -> Option<Disc> {
    let mut pts = Vec::new();
    for t in targets {
        for w in g.preimages(*t).ok()? {
            pts.push(w.finite()?);
        }
    }
    if pts.is_empty() {
        return None;
    }
    let center = pts.iter().sum::<Complex64>() / pts.len() as f64;
    let radius = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    Some(Disc::new(center, radius))
}

/// Checks the backward separating condition through enclosures of `g⁻¹(U)`.
///
/// `J ⊂ U` is certified when every enclosure lies inside `U` (then the
/// outside of `U` is forward invariant and omits `U`, hence Fatou). Failing
/// that, the cloud must lie inside `U`; a sample outside is an error. Without
/// a cloud the containment stays unverified and the verdict is at best
/// sampled-only.
pub fn check_bsc_certified(sys: &GdmsSystem, u: Disc, cloud: Option<&JuliaCloud>) -> Result<BscCertificate> {
    let nv = sys.vertex_count();
    let mut per_vertex: Vec<Vec<Enclosure>> = vec![Vec::new(); nv];
    let mut uncertified = Vec::new();
    for s in 0..sys.symbols().len() {
        let g = sys.map_of(s);
        let label = sys.symbol_label(s);
        let (disc, certified) = match certified_form(g) {
            Some(form) => match preimage_enclosure(&form, &u) {
                Some(d) => (Some(d), true),
                None => {
                    uncertified.push(format!("{label}: preimage of U is unbounded"));
                    (None, false)
                }
            },
            None => {
                uncertified.push(format!("{label}: not a shifted power or Möbius map"));
                let targets = cloud.map(|c| c.points(sys.terminal_vertex(s)));
                (targets.and_then(|t| sampled_enclosure(g, &t)), false)
            }
        };
        per_vertex[sys.initial_vertex(s)].push(Enclosure {
            symbol: s,
            label,
            disc,
            certified,
        });
    }
    let containment_certified = per_vertex
        .iter()
        .flatten()
        .all(|e| e.certified && e.disc.is_some_and(|d| u.contains_disc(&d)));
    if !containment_certified {
        if let Some(c) = cloud {
            let outside = c
                .all_points()
                .iter()
                .filter(|p| p.finite().map_or(true, |z| !u.contains(z)))
                .count();
            if outside > 0 {
                return Err(Error::CloudEscapesU { count: outside });
            }
        }
    }
    let mut disjoint = Vec::with_capacity(nv);
    let (mut overlap, mut missing) = (false, false);
    for encs in &per_vertex {
        let k = encs.len();
        let mut m = vec![vec![true; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                let ok = match (encs[a].disc, encs[b].disc) {
                    (Some(x), Some(y)) => x.disjoint(&y),
                    _ => {
                        missing = true;
                        false
                    }
                };
                overlap |= !ok && encs[a].disc.is_some() && encs[b].disc.is_some();
                m[a][b] = ok;
                m[b][a] = ok;
            }
        }
        disjoint.push(m);
    }
    let all_certified = per_vertex.iter().flatten().all(|e| e.certified);
    let verdict = if overlap {
        BscVerdict::Overlap
    } else if missing {
        BscVerdict::Undecided
    } else if all_certified && containment_certified {
        BscVerdict::Certified
    } else if cloud.is_some() || containment_certified {
        BscVerdict::SampledOnly
    } else {
        BscVerdict::Undecided
    };
    Ok(BscCertificate {
        u,
        per_vertex,
        disjoint,
        containment_certified,
        uncertified,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::{example_section3, single_loop};
    use crate::symbolic::{DirectedGraph, Edge};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn recognises_shifted_powers() {
        let g = RationalMap::shifted_power(c(2.0, 1.0), c(0.5, -1.0), 4, c(3.0, 0.0)).unwrap();
        match certified_form(&g).unwrap() {
            CertifiedForm::ShiftedPower { a, p, n, q } => {
                assert_eq!(n, 4);
                assert!((a - c(2.0, 1.0)).norm() < 1e-12);
                assert!((p - c(0.5, -1.0)).norm() < 1e-12);
                assert!((q - c(3.0, 0.0)).norm() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
        let h = RationalMap::polynomial(crate::ComplexPolynomial::from_real(&[0.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(certified_form(&h).is_none());
    }

    #[test]
    fn mobius_enclosure_is_the_image_disc() {
        // g(z) = 2z, so g⁻¹(D(1, 1)) = D(1/2, 1/2)
        let form = CertifiedForm::Mobius {
            a: c(2.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(1.0, 0.0),
        };
        let d = preimage_enclosure(&form, &Disc::new(c(1.0, 0.0), 1.0)).unwrap();
        assert!((d.center - c(0.5, 0.0)).norm() < 1e-9);
        assert!((d.radius - 0.5).abs() < 1e-8);
        // 1/z has its pole inside D(0, 1): the preimage is unbounded
        let inv = CertifiedForm::Mobius {
            a: c(0.0, 0.0),
            b: c(1.0, 0.0),
            c: c(1.0, 0.0),
            d: c(0.0, 0.0),
        };
        assert!(preimage_enclosure(&inv, &Disc::new(c(0.0, 0.0), 1.0)).is_none());
    }

    #[test]
    fn three_vertex_example_is_certified() {
        let sys = example_section3(5).unwrap();
        let cert = check_bsc_certified(&sys, Disc::new(c(0.0, 0.0), 5.0), None).unwrap();
        assert_eq!(cert.verdict, BscVerdict::Certified);
        assert!(cert.containment_certified);
        for e in cert.per_vertex.iter().flatten() {
            let d = e.disc.unwrap();
            if d.center.norm() < 1e-12 {
                assert!(d.radius < 1.4);
            } else {
                assert!(d.radius < 1.55);
            }
        }
    }

    #[test]
    fn duplicated_map_overlaps() {
        let g = RationalMap::shifted_power(c(1.0, 0.0), c(3.0, 0.0), 5, c(3.0, 0.0)).unwrap();
        let edges = vec![
            Edge { id: "1-2".into(), from: 0, to: 1 },
            Edge { id: "1-3".into(), from: 0, to: 2 },
            Edge { id: "2-1".into(), from: 1, to: 0 },
            Edge { id: "3-1".into(), from: 2, to: 0 },
        ];
        let z5 = RationalMap::shifted_power(c(1.0, 0.0), c(0.0, 0.0), 5, c(0.0, 0.0)).unwrap();
        let sys = GdmsSystem::new(
            DirectedGraph::new(3, edges).unwrap(),
            vec![vec![g.clone()], vec![g], vec![z5.clone()], vec![z5]],
        )
        .unwrap();
        let cert = check_bsc_certified(&sys, Disc::new(c(0.0, 0.0), 5.0), None).unwrap();
        assert_eq!(cert.verdict, BscVerdict::Overlap);
        assert!(!cert.disjoint[0][0][1]);
    }

    #[test]
    fn single_map_is_vacuous() {
        let sys = single_loop(RationalMap::shifted_power(c(1.0, 0.0), c(0.0, 0.0), 2, c(0.0, 0.0)).unwrap()).unwrap();
        let cert = check_bsc_certified(&sys, Disc::new(c(0.0, 0.0), 2.0), None).unwrap();
        assert_eq!(cert.verdict, BscVerdict::Certified);
    }
}
