//! Rational maps of the Riemann sphere.
//!
//! Maps are stored as coprime numerator/denominator pairs and evaluated in
//! homogeneous coordinates, which handles the point at infinity without
//! special cases. The spherical derivative uses the chordal metric.

pub mod aberth;
pub mod poly;
pub mod sphere;

pub use aberth::{aberth, AberthSettings, RootTarget};
pub use poly::ComplexPolynomial;
pub use sphere::SpherePoint;

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Largest degree for which [`compose`] builds coefficients explicitly.
pub const DEFAULT_DEGREE_CAP: u128 = 4096;

/// Relative root separation below which numerator and denominator are taken to share a root.
const COPRIME_TOL: f64 = 1e-8;

/// A homogeneous point `(x : y)` carrying its derivative `(dx, dy)` along a
/// one-parameter curve. The four components share one scale factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub x: Complex64,
    pub y: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
}

impl Jet {
    /// The jet of the identity curve `s -> s` at `z`.
    pub fn identity_at(z: Complex64) -> Self {
        Jet { x: z, y: ONE, dx: ONE, dy: ZERO }
    }

    /// Divides all components by the same constant so the point has max-modulus 1.
    pub fn normalized(self) -> Self {
        let s = self.x.norm().max(self.y.norm());
        if s == 0.0 || !s.is_finite() {
            return self;
        }
        let inv = 1.0 / s;
        Jet {
            x: self.x * inv,
            y: self.y * inv,
            dx: self.dx * inv,
            dy: self.dy * inv,
        }
    }

    pub fn point(&self) -> SpherePoint {
        SpherePoint::from_homogeneous(self.x, self.y)
    }
}

/// Conjugacy class of a degree-one map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MobiusKind {
    Loxodromic,
    Parabolic,
    Elliptic,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusClass {
    pub kind: MobiusKind,
    /// `tr^2` after normalising to determinant one.
    pub trace_squared: Complex64,
}

/// A non-constant rational map `num / den`.
#[derive(Debug, Clone)]
pub struct RationalMap {
    num: ComplexPolynomial,
    den: ComplexPolynomial,
    degree: usize,
    hnum: Vec<Complex64>,
    hden: Vec<Complex64>,
    /// Factored form when the map is `a (z - p)^n + q`, which evaluates
    /// without the cancellation of the expanded coefficients.
    shifted: Option<ShiftedPower>,
    critical: OnceLock<Result<Vec<SpherePoint>>>,
}

/// `a (z - p)^n + q`, constant denominator already divided out.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ShiftedPower {
    a: Complex64,
    p: Complex64,
    n: usize,
    q: Complex64,
}

impl ShiftedPower {
    fn detect(num: &ComplexPolynomial, den: &ComplexPolynomial) -> Option<Self> {
        let n = num.degree();
        if den.degree() != 0 || n < 2 {
            return None;
        }
        let c: Vec<Complex64> = (0..=n).map(|k| num.coeff(k) / den.coeff(0)).collect();
        let a = c[n];
        let p = -c[n - 1] / (a * n as f64);
        let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut binom = 1.0;
        for k in (1..n).rev() {
            // binom = C(n, k)
            binom = binom * (k + 1) as f64 / (n - k) as f64;
            let expected = a * binom * (-p).powu((n - k) as u32);
            if !((c[k] - expected).norm() <= 1e-12 * scale) {
                return None;
            }
        }
        let q = c[0] - a * (-p).powu(n as u32);
        Some(Self { a, p, n, q })
    }
}

impl PartialEq for RationalMap {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl RationalMap {
    /// Validates degree and coprimality and computes the critical points.
    pub fn new(num: ComplexPolynomial, den: ComplexPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidMap("zero denominator".into()));
        }
        if num.is_zero() {
            return Err(Error::InvalidMap("constant map (zero numerator)".into()));
        }
        let degree = num.degree().max(den.degree());
        if degree == 0 {
            return Err(Error::InvalidMap("constant map".into()));
        }
        if num.degree() >= 1 && den.degree() >= 1 {
            let nr = num.roots(1e-12).map_err(|e| Error::InvalidMap(format!("numerator roots: {e}")))?;
            let dr = den.roots(1e-12).map_err(|e| Error::InvalidMap(format!("denominator roots: {e}")))?;
            for a in &nr {
                for b in &dr {
                    if (a - b).norm() <= COPRIME_TOL * (1.0 + a.norm().max(b.norm())) {
                        return Err(Error::InvalidMap(format!(
                            "numerator and denominator share the root {a}"
                        )));
                    }
                }
            }
        }
        let map = Self::from_parts(num, den);
        let cps = map.critical_points()?;
        if cps.len() != 2 * degree - 2 {
            return Err(Error::InvalidMap(format!(
                "found {} critical points, expected {}",
                cps.len(),
                2 * degree - 2
            )));
        }
        Ok(map)
    }

    /// Builds the map without the coprimality check. Callers guarantee coprimality.
    pub(crate) fn from_parts(num: ComplexPolynomial, den: ComplexPolynomial) -> Self {
        let degree = num.degree().max(den.degree());
        let hnum = num.padded(degree);
        let hden = den.padded(degree);
        let shifted = ShiftedPower::detect(&num, &den);
        Self {
            num,
            den,
            degree,
            hnum,
            hden,
            shifted,
            critical: OnceLock::new(),
        }
    }

    pub fn polynomial(p: ComplexPolynomial) -> Result<Self> {
        Self::new(p, ComplexPolynomial::constant(ONE))
    }

    /// `(a z + b) / (c z + d)`
    pub fn mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if a * d - b * c == ZERO {
            return Err(Error::InvalidMap("degenerate Mobius map (ad - bc = 0)".into()));
        }
        Self::new(ComplexPolynomial::new(vec![b, a]), ComplexPolynomial::new(vec![d, c]))
    }

    /// `a (z - p)^n + q`
    pub fn shifted_power(a: Complex64, p: Complex64, n: usize, q: Complex64) -> Result<Self> {
        let body = ComplexPolynomial::linear_factor(p).pow(n).scale(a);
        Self::polynomial(body.add(&ComplexPolynomial::constant(q)))
    }

    pub fn identity() -> Self {
        Self::from_parts(ComplexPolynomial::monomial(ONE, 1), ComplexPolynomial::constant(ONE))
    }

    pub fn num(&self) -> &ComplexPolynomial {
        &self.num
    }

    pub fn den(&self) -> &ComplexPolynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// Homogeneous lift `(P(x, y), Q(x, y))` with its Jacobian `[[Px, Py], [Qx, Qy]]`.
    pub fn eval_homogeneous(&self, x: Complex64, y: Complex64) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
        let d = self.degree;
        let df = d as f64;
        if let Some(ShiftedPower { a, p, n, q }) = self.shifted {
            // P = a (x - p y)^n + q y^n,  Q = y^n
            let s = x - p * y;
            let (s1, y1) = (s.powu(n as u32 - 1), y.powu(n as u32 - 1));
            let (sn, yn) = (s1 * s, y1 * y);
            let ds = a * df * s1;
            return (
                [a * sn + q * yn, yn],
                [[ds, -p * ds + q * df * y1], [ZERO, df * y1]],
            );
        }
        if x.norm() <= y.norm() {
            let u = x / y;
            let ypow = y.powu(d as u32 - 1);
            let (n, dn) = horner(&self.hnum, u);
            let (q, dq) = horner(&self.hden, u);
            (
                [n * ypow * y, q * ypow * y],
                [[dn * ypow, (n * df - u * dn) * ypow], [dq * ypow, (q * df - u * dq) * ypow]],
            )
        } else {
            let v = y / x;
            let xpow = x.powu(d as u32 - 1);
            let (n, dn) = horner_reversed(&self.hnum, v);
            let (q, dq) = horner_reversed(&self.hden, v);
            (
                [n * xpow * x, q * xpow * x],
                [[(n * df - v * dn) * xpow, dn * xpow], [(q * df - v * dq) * xpow, dq * xpow]],
            )
        }
    }

    /// Pushes a jet through the map (chain rule in homogeneous coordinates), renormalised.
    pub fn apply_jet(&self, jet: &Jet) -> Jet {
        let jet = jet.normalized();
        let ([p, q], j) = self.eval_homogeneous(jet.x, jet.y);
        Jet {
            x: p,
            y: q,
            dx: j[0][0] * jet.dx + j[0][1] * jet.dy,
            dy: j[1][0] * jet.dx + j[1][1] * jet.dy,
        }
        .normalized()
    }

    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        let (x, y) = z.homogeneous();
        let ([p, q], _) = self.eval_homogeneous(x, y);
        SpherePoint::from_homogeneous(p, q)
    }

    /// Value and spherical derivative norm `|g'(z)| (1 + |z|^2) / (1 + |g(z)|^2)`.
    pub fn eval_with_norm(&self, z: SpherePoint) -> (SpherePoint, f64) {
        let (x, y) = z.homogeneous();
        let ([p, q], j) = self.eval_homogeneous(x, y);
        let s = p.norm().max(q.norm());
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let norm = if s == 0.0 {
            0.0
        } else {
            let (ps, qs) = (p / s, q / s);
            (det.norm() / (s * s)) * (x.norm_sqr() + y.norm_sqr())
                / (self.degree as f64 * (ps.norm_sqr() + qs.norm_sqr()))
        };
        (SpherePoint::from_homogeneous(p, q), norm)
    }

    pub fn spherical_deriv_norm(&self, z: SpherePoint) -> f64 {
        self.eval_with_norm(z).1
    }

    /// Complex derivative at a finite point with finite image.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let (n, dn) = self.num.eval_with_derivative(z);
        let (d, dd) = self.den.eval_with_derivative(z);
        if d == ZERO {
            return None;
        }
        Some((dn * d - n * dd) / (d * d))
    }

    /// Critical points with multiplicity (`2 deg - 2` of them).
    pub fn critical_points(&self) -> Result<Vec<SpherePoint>> {
        self.critical.get_or_init(|| self.compute_critical_points()).clone()
    }

    fn compute_critical_points(&self) -> Result<Vec<SpherePoint>> {
        let total = 2 * self.degree - 2;
        if let Some(sp) = self.shifted {
            let mut out = vec![SpherePoint::Finite(sp.p); sp.n - 1];
            out.extend(std::iter::repeat(SpherePoint::Infinity).take(sp.n - 1));
            return Ok(out);
        }
        let wronskian = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        let mut out = Vec::with_capacity(total);
        if wronskian.degree() >= 1 {
            let roots = wronskian.roots(1e-12)?;
            for (c, m) in cluster_roots(&wronskian, &roots) {
                out.extend(std::iter::repeat(SpherePoint::Finite(c)).take(m));
            }
        }
        let finite = out.len();
        out.extend(std::iter::repeat(SpherePoint::Infinity).take(total.saturating_sub(finite)));
        Ok(out)
    }

    /// Critical values `g(c)` with multiplicity.
    pub fn critical_values(&self) -> Result<Vec<SpherePoint>> {
        Ok(self.critical_points()?.into_iter().map(|c| self.eval(c)).collect())
    }

    /// All `deg` solutions `w` of `g(w) = z`, with multiplicity.
    pub fn preimages(&self, z: SpherePoint) -> Result<Vec<SpherePoint>> {
        if let Some(ShiftedPower { a, p, n, q }) = self.shifted {
            return Ok(match z.finite() {
                None => vec![SpherePoint::Infinity; n],
                Some(w) => {
                    let r = ((w - q) / a).powf(1.0 / n as f64);
                    let turn = Complex64::from_polar(1.0, std::f64::consts::TAU / n as f64);
                    std::iter::successors(Some(r), |&u| Some(u * turn))
                        .take(n)
                        .map(|u| SpherePoint::new(p + u))
                        .collect()
                }
            });
        }
        let (x, y) = z.homogeneous();
        // y N(w) - x D(w) = 0
        let eq = self.num.scale(y).sub(&self.den.scale(x));
        if eq.is_zero() {
            return Err(Error::RootFailure("preimage equation vanishes identically".into()));
        }
        let mut out = Vec::with_capacity(self.degree);
        if eq.degree() >= 1 {
            let roots = eq.roots(1e-12).map_err(|e| Error::RootFailure(e.to_string()))?;
            out.extend(roots.into_iter().map(SpherePoint::new));
        }
        while out.len() < self.degree {
            out.push(SpherePoint::Infinity);
        }
        Ok(out)
    }

    /// Classifies a degree-one map by its normalised trace.
    pub fn classify_mobius(&self) -> Result<MobiusClass> {
        if self.degree != 1 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                actual: self.degree,
            });
        }
        let (b, a) = (self.hnum[0], self.hnum[1]);
        let (d, c) = (self.hden[0], self.hden[1]);
        let det = a * d - b * c;
        let tr2 = (a + d) * (a + d) / det;
        let tol = 1e-9;
        let scale = a.norm().max(d.norm());
        let kind = if b.norm() <= tol * scale && c.norm() <= tol * scale && (a - d).norm() <= tol * scale {
            MobiusKind::Identity
        } else if tr2.im.abs() > tol || tr2.re < -tol || tr2.re > 4.0 + tol {
            MobiusKind::Loxodromic
        } else if (tr2.re - 4.0).abs() <= tol {
            MobiusKind::Parabolic
        } else {
            MobiusKind::Elliptic
        };
        Ok(MobiusClass { kind, trace_squared: tr2 })
    }
}

/// `outer ∘ inner` with explicit coefficients.
pub fn compose(outer: &RationalMap, inner: &RationalMap) -> Result<RationalMap> {
    compose_capped(outer, inner, DEFAULT_DEGREE_CAP)
}

pub fn compose_capped(outer: &RationalMap, inner: &RationalMap, cap: u128) -> Result<RationalMap> {
    let degree = outer.degree as u128 * inner.degree as u128;
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }
    let d1 = outer.degree;
    // P(N, D) = sum a_k N^k D^(d1 - k), built by Horner in the ratio N/D
    let homog = |coeffs: &[Complex64]| -> ComplexPolynomial {
        let mut acc = ComplexPolynomial::zero();
        let mut dpow = ComplexPolynomial::constant(ONE);
        let mut dpows = Vec::with_capacity(d1 + 1);
        for _ in 0..=d1 {
            dpows.push(dpow.clone());
            dpow = dpow.mul(&inner.den);
        }
        let mut npow = ComplexPolynomial::constant(ONE);
        for (k, &a) in coeffs.iter().enumerate() {
            if a != ZERO {
                acc = acc.add(&npow.mul(&dpows[d1 - k]).scale(a));
            }
            npow = npow.mul(&inner.num);
        }
        acc
    };
    let num = homog(&outer.hnum);
    let den = homog(&outer.hden);
    Ok(RationalMap::from_parts(num, den))
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Evaluates `sum a_k v^(d - k)` and its derivative in `v`.
fn horner_reversed(coeffs: &[Complex64], v: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter() {
        dp = dp * v + p;
        p = p * v + c;
    }
    (p, dp)
}

/// Groups numerically split multiple roots into `(centre, multiplicity)` pairs.
///
/// A root of multiplicity `m` is only resolved to about `eps^(1/m)`, so
/// clusters are grown by single linkage at a relative radius of `1e-3`. The
/// centre is then refined by Newton on the `(m-1)`-th derivative, where the
/// root is simple.
fn cluster_roots(p: &ComplexPolynomial, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let close = (roots[i] - roots[j]).norm() < 1e-3 * (1.0 + roots[i].norm());
                if close && label[i] != label[j] {
                    let m = label[i].min(label[j]);
                    label[i] = m;
                    label[j] = m;
                    changed = true;
                }
            }
        }
    }
    let mut out = Vec::new();
    for l in 0..n {
        let members: Vec<usize> = (0..n).filter(|&k| label[k] == l).collect();
        match members.len() {
            0 => {}
            1 => out.push((roots[members[0]], 1)),
            m => {
                let mut c = members.iter().map(|&k| roots[k]).sum::<Complex64>() / m as f64;
                let spread = members.iter().map(|&k| (roots[k] - c).norm()).fold(0.0, f64::max);
                let dm = (0..m - 1).fold(p.clone(), |q, _| q.derivative());
                let start = c;
                for _ in 0..5 {
                    let (v, dv) = dm.eval_with_derivative(c);
                    if dv == ZERO {
                        break;
                    }
                    c -= v / dv;
                }
                if !((c - start).norm() <= 2.0 * spread + 1e-12) {
                    c = start;
                }
                out.push((c, m));
            }
        }
    }
    out
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let poly = |p: &ComplexPolynomial| {
            p.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != ZERO)
                .map(|(k, c)| format!("({}{:+}i)z^{k}", c.re, c.im))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        if self.is_polynomial() && self.den.coeff(0) == ONE {
            write!(f, "{}", poly(&self.num))
        } else {
            write!(f, "[{}] / [{}]", poly(&self.num), poly(&self.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fin(re: f64, im: f64) -> SpherePoint {
        SpherePoint::from_re_im(re, im)
    }

    fn power(n: usize) -> RationalMap {
        RationalMap::polynomial(ComplexPolynomial::monomial(ONE, n)).unwrap()
    }

    #[test]
    fn eval_basics() {
        assert_eq!(power(5).eval(fin(2.0, 0.0)), fin(32.0, 0.0));
        assert!(power(5).eval(SpherePoint::Infinity).is_infinite());
        let inv = RationalMap::mobius(ZERO, ONE, ONE, ZERO).unwrap();
        assert!(inv.eval(SpherePoint::ZERO).is_infinite());
        assert_eq!(inv.eval(SpherePoint::Infinity), SpherePoint::ZERO);
    }

    #[test]
    fn spherical_norm_of_square() {
        let sq = power(2);
        assert!((sq.spherical_deriv_norm(fin(1.0, 0.0)) - 2.0).abs() < 1e-14);
        assert_eq!(sq.spherical_deriv_norm(SpherePoint::ZERO), 0.0);
        assert_eq!(sq.spherical_deriv_norm(SpherePoint::Infinity), 0.0);
    }

    #[test]
    fn spherical_norm_matches_finite_difference() {
        let g = RationalMap::shifted_power(ONE, c(3.0, 0.0), 5, c(3.0, 0.0)).unwrap();
        let z = fin(4.0, 0.0);
        let h = 1e-7;
        let zh = fin(4.0 + h, 0.0);
        let fd = g.eval(z).chordal_distance(&g.eval(zh)) / z.chordal_distance(&zh);
        let exact = g.spherical_deriv_norm(z);
        assert!((fd - exact).abs() < 1e-6 * exact.max(1.0), "{fd} vs {exact}");
    }

    #[test]
    fn critical_points_of_power_and_mobius() {
        let cps = power(5).critical_points().unwrap();
        assert_eq!(cps.iter().filter(|p| **p == SpherePoint::ZERO).count(), 4);
        assert_eq!(cps.iter().filter(|p| p.is_infinite()).count(), 4);
        let m = RationalMap::mobius(c(2.0, 0.0), ONE, ZERO, ONE).unwrap();
        assert!(m.critical_points().unwrap().is_empty());
        let g = RationalMap::shifted_power(ONE, c(0.0, 3.0), 5, c(0.0, 3.0)).unwrap();
        let cps = g.critical_points().unwrap();
        assert_eq!(cps.len(), 8);
        let near = cps
            .iter()
            .filter(|p| p.chordal_distance(&fin(0.0, 3.0)) < 1e-8)
            .count();
        assert_eq!(near, 4);
        assert_eq!(cps.iter().filter(|p| p.is_infinite()).count(), 4);
    }

    #[test]
    fn critical_points_of_rational_map() {
        // (z^2 + 1) / (z^2 - 4): degree 2, critical points 0 and inf
        let g = RationalMap::new(
            ComplexPolynomial::from_real(&[1.0, 0.0, 1.0]),
            ComplexPolynomial::from_real(&[-4.0, 0.0, 1.0]),
        )
        .unwrap();
        let cps = g.critical_points().unwrap();
        assert_eq!(cps.len(), 2);
        assert!(cps.iter().any(|p| p.chordal_distance(&SpherePoint::ZERO) < 1e-10));
        assert!(cps.iter().any(|p| p.is_infinite()));
    }

    #[test]
    fn rejects_common_root_and_constants() {
        let lin = ComplexPolynomial::linear_factor(c(1.0, 0.0));
        let e = RationalMap::new(lin.mul(&lin), lin.clone());
        assert!(matches!(e, Err(Error::InvalidMap(_))));
        let e = RationalMap::new(ComplexPolynomial::constant(ONE), ComplexPolynomial::constant(ONE));
        assert!(matches!(e, Err(Error::InvalidMap(_))));
    }

    #[test]
    fn mobius_classes() {
        let k = |a, b, cc, d| RationalMap::mobius(a, b, cc, d).unwrap().classify_mobius().unwrap();
        let lox = k(c(2.0, 0.0), ZERO, ZERO, ONE);
        assert_eq!(lox.kind, MobiusKind::Loxodromic);
        assert!((lox.trace_squared - c(4.5, 0.0)).norm() < 1e-12);
        assert_eq!(k(ONE, ONE, ZERO, ONE).kind, MobiusKind::Parabolic);
        let rot = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        assert_eq!(k(rot, ZERO, ZERO, ONE).kind, MobiusKind::Elliptic);
        assert_eq!(k(ONE, ZERO, ZERO, ONE).kind, MobiusKind::Identity);
        assert!(matches!(power(2).classify_mobius(), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn compose_examples() {
        let sq = power(2);
        assert_eq!(compose(&sq, &sq).unwrap(), power(4));
        let g = RationalMap::shifted_power(ONE, c(3.0, 0.0), 5, c(3.0, 0.0)).unwrap();
        assert_eq!(compose(&RationalMap::identity(), &g).unwrap(), g);
        let big = compose_capped(&power(5), &g, 20);
        assert!(matches!(big, Err(Error::DegreeCapExceeded { degree: 25, cap: 20 })));
    }

    #[test]
    fn compose_pointwise_agreement() {
        let outer = power(5);
        let inner = RationalMap::shifted_power(ONE, c(3.0, 0.0), 5, c(3.0, 0.0)).unwrap();
        let composed = compose(&outer, &inner).unwrap();
        assert_eq!(composed.degree(), 25);
        // uniformly distributed points of the sphere; the coefficient form loses
        // accuracy only in a thin neighbourhood of the Julia set
        for k in 0..5 {
            let (u, v) = (0.137 + 0.19 * k as f64, 0.71 * k as f64);
            let r = ((1.0 + (2.0 * u - 1.0)) / (1.0 - (2.0 * u - 1.0))).sqrt();
            let z = SpherePoint::Finite(Complex64::from_polar(r, std::f64::consts::TAU * v));
            let seq = outer.eval(inner.eval(z));
            assert!(composed.eval(z).chordal_distance(&seq) < 1e-9, "{z}");
        }
    }

    #[test]
    fn preimages_solve_the_equation() {
        let g = RationalMap::shifted_power(ONE, c(0.0, 3.0), 5, c(0.0, 3.0)).unwrap();
        let z = fin(1.0, -2.0);
        let pre = g.preimages(z).unwrap();
        assert_eq!(pre.len(), 5);
        for w in pre {
            assert!(g.eval(w).chordal_distance(&z) < 1e-12);
        }
        let pre_inf = g.preimages(SpherePoint::Infinity).unwrap();
        assert!(pre_inf.iter().all(|p| p.is_infinite()));
    }

    #[test]
    fn shifted_powers_use_the_factored_form() {
        let (p, q) = (c(3.0, 0.0), c(3.0, 0.0));
        let g = RationalMap::shifted_power(c(2.0, 0.0), p, 10, q).unwrap();
        assert!(g.shifted.is_some());
        let plain = RationalMap::polynomial(ComplexPolynomial::from_real(&[0.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(plain.shifted.is_none());
        for k in 0..12 {
            let z = p + Complex64::from_polar(1.0 + 0.05 * k as f64, 0.7 * k as f64);
            let exact = c(2.0, 0.0) * (z - p).powu(10) + q;
            let got = g.eval(SpherePoint::new(z)).finite().unwrap();
            assert!((got - exact).norm() <= 1e-14 * exact.norm());
            // near |z - p| = 1 the expanded coefficients cancel to about 1e-10
            for w in g.preimages(SpherePoint::new(exact)).unwrap() {
                assert!(g.eval(w).chordal_distance(&SpherePoint::new(exact)) < 1e-13);
            }
        }
        let crit = g.critical_points().unwrap();
        assert_eq!(crit.iter().filter(|c| **c == SpherePoint::new(p)).count(), 9);
    }

    #[test]
    fn chart_consistency_near_unit_circle() {
        let g = RationalMap::new(
            ComplexPolynomial::from_real(&[1.0, -2.0, 0.0, 1.0]),
            ComplexPolynomial::from_real(&[0.5, 0.0, 3.0]),
        )
        .unwrap();
        for k in 0..20 {
            let z = Complex64::from_polar(0.98 + 0.002 * k as f64, 0.3 * k as f64);
            let ([p1, q1], _) = g.eval_homogeneous(z, ONE);
            let ([p2, q2], _) = g.eval_homogeneous(ONE, z.inv());
            let a = SpherePoint::from_homogeneous(p1, q1);
            let b = SpherePoint::from_homogeneous(p2, q2);
            assert!(a.chordal_distance(&b) < 1e-10);
        }
    }
}
