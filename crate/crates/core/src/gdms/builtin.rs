//! Built-in systems.

use super::GdmsSystem;
use crate::error::{Error, Result};
use crate::ratmap::{ComplexPolynomial, RationalMap};
use crate::symbolic::{DirectedGraph, Edge};
use num_complex::Complex64;

/// Three vertices, every edge except `1 -> 2`, and `Γ_e = {g_{t(e)}}` with
/// `g_1 = z^n`, `g_2 = (z - 3i)^n + 3i`, `g_3 = (z - 3)^n + 3`. Requires `n >= 5`.
pub fn example_section3(n: usize) -> Result<GdmsSystem> {
    if n < 5 {
        return Err(Error::DomainError(format!("the three-vertex example needs n >= 5, got {n}")));
    }
    let centers = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 3.0),
        Complex64::new(3.0, 0.0),
    ];
    let maps = centers
        .iter()
        .map(|&p| RationalMap::shifted_power(Complex64::new(1.0, 0.0), p, n, p))
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    let mut families = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if (i, j) == (0, 1) {
                continue;
            }
            edges.push(Edge {
                id: format!("{}-{}", i + 1, j + 1),
                from: i,
                to: j,
            });
            families.push(vec![maps[j].clone()]);
        }
    }
    GdmsSystem::new(DirectedGraph::new(3, edges)?, families)
}

/// One vertex with one self-loop carrying a single map.
pub fn single_loop(map: RationalMap) -> Result<GdmsSystem> {
    let edges = vec![Edge {
        id: "loop".into(),
        from: 0,
        to: 0,
    }];
    GdmsSystem::new(DirectedGraph::new(1, edges)?, vec![vec![map]])
}

/// Single self-loop carrying `z^d`.
pub fn power_system(d: usize) -> Result<GdmsSystem> {
    if d < 1 {
        return Err(Error::DomainError("power map needs d >= 1".into()));
    }
    single_loop(RationalMap::polynomial(ComplexPolynomial::monomial(Complex64::new(1.0, 0.0), d))?)
}

/// Resolves `section3:N` or `power:D`.
pub fn builtin(spec: &str) -> Result<GdmsSystem> {
    let (name, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::Schema(format!("builtin '{spec}' must look like name:N")))?;
    let n: usize = arg
        .parse()
        .map_err(|_| Error::Schema(format!("builtin argument '{arg}' is not an integer")))?;
    match name {
        "section3" => example_section3(n),
        "power" => power_system(n),
        _ => Err(Error::Schema(format!("unknown builtin '{name}'"))),
    }
}
