use num_complex::Complex64;
use proptest::prelude::*;
use rgdms::gdms::{example_section3, word_map};
use rgdms::ratmap::compose;
use rgdms::symbolic::IncidenceMatrix;
use rgdms::verify::{certified_form, check_bsc_certified, preimage_enclosure, BscVerdict, Disc};
use rgdms::{ComplexPolynomial, RationalMap, SpherePoint};

fn c64() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn poly(max_deg: usize) -> impl Strategy<Value = ComplexPolynomial> {
    prop::collection::vec(c64(), 1..=max_deg + 1).prop_map(ComplexPolynomial::new)
}

/// Rational maps of degree 1..=3 with well-separated leading data.
fn rational() -> impl Strategy<Value = RationalMap> {
    (poly(3), poly(2)).prop_filter_map("degenerate", |(n, d)| {
        let g = RationalMap::new(n, d).ok()?;
        (g.degree() >= 1).then_some(g)
    })
}

fn spherical_oracle(g: &RationalMap, z: Complex64) -> Option<f64> {
    let w = g.eval(SpherePoint::new(z)).finite()?;
    let d = g.derivative(z)?;
    Some(d.norm() * (1.0 + z.norm_sqr()) / (1.0 + w.norm_sqr()))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spherical_chain_rule(g in rational(), h in rational(), z in c64()) {
        let gh = compose(&g, &h).unwrap();
        let p = SpherePoint::new(z);
        let lhs = gh.spherical_deriv_norm(p);
        let rhs = g.spherical_deriv_norm(h.eval(p)) * h.spherical_deriv_norm(p);
        prop_assert!(close(lhs, rhs, 1e-8), "{lhs} vs {rhs}");
        if let Some(o) = spherical_oracle(&h, z) {
            prop_assert!(close(h.spherical_deriv_norm(p), o, 1e-8));
        }
    }

    #[test]
    fn aperiodicity_criteria_agree(n in 1usize..7, bits in prop::collection::vec(any::<bool>(), 36)) {
        let rows: Vec<Vec<u8>> = (0..n).map(|i| (0..n).map(|j| bits[i * 6 + j] as u8).collect()).collect();
        let a = IncidenceMatrix::new(rows.clone()).unwrap();
        prop_assume!(a.is_irreducible());
        let by_period = a.is_aperiodic().unwrap();
        let by_power = a.is_primitive_by_power().unwrap();
        prop_assert_eq!(by_period, by_power);
        // period = gcd of closed-walk lengths; lengths up to 2n suffice here
        let mut m = rows.iter().map(|r| r.iter().map(|&x| x as u64).collect::<Vec<_>>()).collect::<Vec<_>>();
        let mut g = 0u64;
        for k in 1..=2 * n as u64 {
            if (0..n).any(|i| m[i][i] > 0) {
                g = gcd(g, k);
            }
            m = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|l| m[i][l] > 0 && rows[l][j] > 0) as u64).collect())
                .collect();
        }
        prop_assert_eq!(by_period, g == 1);
    }

    /// Every preimage of a point of U lies in the enclosure of `g⁻¹(U)`.
    #[test]
    fn power_enclosures_contain_preimages(
        a in c64(), p in c64(), q in c64(), n in 2usize..6,
        center in c64(), r in 0.1..3.0f64, s in 0.0..1.0f64, theta in 0.0..6.3f64,
    ) {
        prop_assume!(a.norm() > 0.1);
        let g = RationalMap::shifted_power(a, p, n, q).unwrap();
        let form = certified_form(&g).expect("shifted power recognised");
        let u = Disc::new(center, r);
        let enc = preimage_enclosure(&form, &u).unwrap();
        let target = center + Complex64::from_polar(r * s, theta);
        for y in g.preimages(SpherePoint::new(target)).unwrap() {
            let y = y.finite().unwrap();
            prop_assert!(enc.contains(y), "{y} outside {enc:?}");
        }
    }

    #[test]
    fn mobius_enclosures_contain_preimages(
        m in (c64(), c64(), c64(), c64()),
        center in c64(), r in 0.1..2.0f64, s in 0.0..1.0f64, theta in 0.0..6.3f64,
    ) {
        let (a, b, c, d) = m;
        prop_assume!((a * d - b * c).norm() > 0.1);
        let g = RationalMap::mobius(a, b, c, d).unwrap();
        let form = certified_form(&g).unwrap();
        let u = Disc::new(center, r);
        // None means the preimage contains infinity: nothing to check
        if let Some(enc) = preimage_enclosure(&form, &u) {
            let target = center + Complex64::from_polar(r * s, theta);
            for y in g.preimages(SpherePoint::new(target)).unwrap() {
                if let Some(y) = y.finite() {
                    prop_assert!(enc.contains(y), "{y} outside {enc:?}");
                }
            }
        }
    }

    #[test]
    fn disjointness_is_symmetric(c1 in c64(), c2 in c64(), r1 in 0.0..2.0f64, r2 in 0.0..2.0f64) {
        let (a, b) = (Disc::new(c1, r1), Disc::new(c2, r2));
        prop_assert_eq!(a.disjoint(&b), b.disjoint(&a));
        if a.disjoint(&b) {
            prop_assert!(!a.contains(c2));
        }
    }

    #[test]
    fn word_degrees_multiply(symbols in prop::collection::vec(0usize..8, 1..5)) {
        let sys = example_section3(5).unwrap();
        // keep only admissible words
        let Ok(w) = sys.word(symbols.clone()) else { return Ok(()) };
        let expected = symbols.iter().map(|&s| sys.map_of(s).degree() as u128).product::<u128>();
        prop_assert_eq!(w.degree(&sys), expected);
        let wm = word_map(&sys, &w);
        prop_assert_eq!(wm.degree, expected);
        if let Some(g) = wm.explicit() {
            prop_assert_eq!(g.degree() as u128, expected);
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn section3_certificate_is_stable_under_vertex_order() {
    let sys = example_section3(5).unwrap();
    let cert = check_bsc_certified(&sys, Disc::new(Complex64::new(0.0, 0.0), 5.0), None).unwrap();
    assert_eq!(cert.verdict, BscVerdict::Certified);
    // disjointness is checked for every unordered pair at each vertex
    for encl in &cert.per_vertex {
        for (i, a) in encl.iter().enumerate() {
            for b in &encl[i + 1..] {
                let (a, b) = (a.disc.unwrap(), b.disc.unwrap());
                assert!(a.disjoint(&b) && b.disjoint(&a));
            }
        }
    }
}
