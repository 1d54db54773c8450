use super::aberth::{aberth, AberthSettings, RootTarget};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Complex polynomial with coefficients in ascending degree.
///
/// Trailing zero coefficients are trimmed on construction, so the degree is
/// the index of the last stored coefficient. The zero polynomial stores no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `z - a`
    pub fn linear_factor(a: Complex64) -> Self {
        Self::new(vec![-a, ONE])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(Self::constant(ONE), |acc, &r| acc.mul(&Self::linear_factor(r)))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Sum of coefficient moduli.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Bound on the rounding error of Horner evaluation at `z`, up to a unit roundoff factor.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self(inner(z))` by Horner substitution.
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| acc.mul(inner).add(&Self::constant(c)))
    }

    /// Coefficients padded with zeros up to length `d + 1`.
    pub fn padded(&self, d: usize) -> Vec<Complex64> {
        (0..=d).map(|k| self.coeff(k)).collect()
    }

    /// All roots with multiplicity, with residual `|p(r)| < tol * scale(r)`.
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex64>> {
        self.roots_with(&AberthSettings {
            tol,
            ..AberthSettings::default()
        })
    }

    pub fn roots_with(&self, settings: &AberthSettings) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::DomainError("roots of the zero polynomial".into()));
        }
        if self.degree() == 0 {
            return Err(Error::DomainError("roots of a constant polynomial".into()));
        }
        // exact zero roots are split off first; Aberth converges only linearly on them
        let zeros = self.coeffs.iter().take_while(|&&c| c == ZERO).count();
        let deflated = Self::new(self.coeffs[zeros..].to_vec());
        let mut out = vec![ZERO; zeros];
        match deflated.degree() {
            0 => {}
            1 => out.push(-deflated.coeffs[0] / deflated.coeffs[1]),
            _ => {
                let mut roots = aberth(&deflated, settings)?;
                for r in roots.iter_mut() {
                    *r = deflated.polish(*r);
                }
                out.extend(roots);
            }
        }
        Ok(out)
    }

    /// A few guarded Newton steps; keeps the input if they do not reduce the residual.
    fn polish(&self, z: Complex64) -> Complex64 {
        let mut best = z;
        let mut best_res = self.eval(z).norm();
        let mut cur = z;
        for _ in 0..3 {
            let (p, dp) = self.eval_with_derivative(cur);
            if dp == ZERO {
                break;
            }
            cur -= p / dp;
            let res = self.eval(cur).norm();
            if res < best_res {
                best = cur;
                best_res = res;
            } else {
                break;
            }
        }
        best
    }
}

impl RootTarget for ComplexPolynomial {
    fn degree(&self) -> usize {
        ComplexPolynomial::degree(self)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        ComplexPolynomial::eval_with_derivative(self, z)
    }

    fn relative_residual(&self, z: Complex64) -> f64 {
        let scale = self.eval_scale(z);
        if scale == 0.0 {
            return 0.0;
        }
        self.eval(z).norm() / scale
    }

    fn initial_radius(&self) -> f64 {
        let n = ComplexPolynomial::degree(self) as f64;
        (self.coeff(0).norm() / self.leading().norm()).powf(1.0 / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = ComplexPolynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), ZERO, ZERO]);
        assert_eq!(p.degree(), 1);
        assert!(ComplexPolynomial::new(vec![ZERO]).is_zero());
    }

    #[test]
    fn roots_of_z2_minus_1() {
        let p = ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]);
        let r = sorted(p.roots(1e-12).unwrap());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_z5_are_zero() {
        let p = ComplexPolynomial::monomial(ONE, 5);
        let r = p.roots(1e-12).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn roots_of_cubic_by_residual() {
        let p = ComplexPolynomial::from_real(&[2.0, -2.0, 0.0, 1.0]);
        let r = p.roots(1e-12).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!(p.eval(z).norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn roots_of_a_cluster() {
        // (z - 3)^4 * (z + 1)
        let p = ComplexPolynomial::linear_factor(c(3.0, 0.0))
            .pow(4)
            .mul(&ComplexPolynomial::linear_factor(c(-1.0, 0.0)));
        let r = p.roots(1e-12).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r.iter().filter(|z| (**z - c(3.0, 0.0)).norm() < 1e-3).count(), 4);
    }

    #[test]
    fn compose_and_pow() {
        let sq = ComplexPolynomial::monomial(ONE, 2);
        assert_eq!(sq.compose(&sq), ComplexPolynomial::monomial(ONE, 4));
        let shifted = ComplexPolynomial::linear_factor(c(3.0, 0.0)).pow(5);
        assert_eq!(shifted.coeff(0), c(-243.0, 0.0));
        assert_eq!(shifted.coeff(4), c(-15.0, 0.0));
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(ComplexPolynomial::constant(ONE).roots(1e-12).is_err());
    }
}
