//! JSON configuration documents.
//!
//! ```json
//! {
//!   "vertices": 1,
//!   "edges": [ { "id": "loop", "from": 1, "to": 1,
//!                "maps": [ { "num": [[0,0],[0,0],[1,0]], "den": [[1,0]] } ] } ]
//! }
//! ```
//!
//! Vertices are 1-based in documents and 0-based inside the library.
//! Coefficients are `[re, im]` pairs in ascending degree.

use super::GdmsSystem;
use crate::error::{Error, Result};
use crate::ratmap::{ComplexPolynomial, RationalMap};
use crate::symbolic::{DirectedGraph, Edge};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub vertices: usize,
    pub edges: Vec<EdgeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub maps: Vec<MapConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl MapConfig {
    pub fn from_map(map: &RationalMap) -> Self {
        let pairs = |p: &ComplexPolynomial| p.coeffs().iter().map(|c| [c.re, c.im]).collect();
        Self {
            num: pairs(map.num()),
            den: pairs(map.den()),
        }
    }

    pub fn to_map(&self) -> Result<RationalMap> {
        let poly = |v: &[[f64; 2]]| -> Result<ComplexPolynomial> {
            if v.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Schema("non-finite coefficient".into()));
            }
            Ok(ComplexPolynomial::new(v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
        };
        RationalMap::new(poly(&self.num)?, poly(&self.den)?)
    }
}

/// Parses and validates a configuration document.
pub fn load_system(document: &str) -> Result<GdmsSystem> {
    let cfg: SystemConfig = serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    system_from_config(&cfg)
}

pub fn system_from_config(cfg: &SystemConfig) -> Result<GdmsSystem> {
    let mut edges = Vec::with_capacity(cfg.edges.len());
    let mut families = Vec::with_capacity(cfg.edges.len());
    for e in &cfg.edges {
        for v in [e.from, e.to] {
            if v == 0 || v > cfg.vertices {
                return Err(Error::Schema(format!(
                    "edge {} references vertex {v}, outside 1..={}",
                    e.id, cfg.vertices
                )));
            }
        }
        if e.maps.is_empty() {
            return Err(Error::EmptyFamily(e.id.clone()));
        }
        let maps = e
            .maps
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.to_map()
                    .map_err(|err| Error::InvalidMap(format!("edge {} map {k}: {err}", e.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        edges.push(Edge {
            id: e.id.clone(),
            from: e.from - 1,
            to: e.to - 1,
        });
        families.push(maps);
    }
    GdmsSystem::new(DirectedGraph::new(cfg.vertices, edges)?, families)
}

pub fn config_of(sys: &GdmsSystem) -> SystemConfig {
    SystemConfig {
        vertices: sys.vertex_count(),
        edges: sys
            .graph()
            .edges()
            .iter()
            .zip(sys.families())
            .map(|(e, fam)| EdgeConfig {
                id: e.id.clone(),
                from: e.from + 1,
                to: e.to + 1,
                maps: fam.iter().map(MapConfig::from_map).collect(),
            })
            .collect(),
    }
}

/// Canonical JSON text of a system.
pub fn to_json(sys: &GdmsSystem) -> String {
    serde_json::to_string_pretty(&config_of(sys)).expect("config serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{ "vertices": 1, "edges": [ { "id": "a", "from": 1, "to": 1,
        "maps": [ { "num": [[0,0],[0,0],[1,0]], "den": [[1,0]] } ] } ] }"#;

    #[test]
    fn loads_elementary_system() {
        let sys = load_system(SQUARE).unwrap();
        assert_eq!(sys.vertex_count(), 1);
        assert_eq!(sys.symbols().len(), 1);
        assert!(sys.is_irreducible());
    }

    #[test]
    fn empty_family_is_rejected() {
        let doc = r#"{ "vertices": 1, "edges": [ { "id": "a", "from": 1, "to": 1, "maps": [] } ] }"#;
        assert_eq!(load_system(doc).unwrap_err(), Error::EmptyFamily("a".into()));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(load_system("{"), Err(Error::Schema(_))));
        let bad_vertex = SQUARE.replace("\"to\": 1", "\"to\": 2");
        assert!(matches!(load_system(&bad_vertex), Err(Error::Schema(_))));
        let extra = SQUARE.replace("\"vertices\": 1", "\"vertices\": 1, \"colour\": 3");
        assert!(matches!(load_system(&extra), Err(Error::Schema(_))));
    }

    #[test]
    fn invalid_map_is_rejected() {
        // (z^2 - 1) / (z - 1) shares the root 1
        let doc = r#"{ "vertices": 1, "edges": [ { "id": "a", "from": 1, "to": 1,
            "maps": [ { "num": [[-1,0],[0,0],[1,0]], "den": [[-1,0],[1,0]] } ] } ] }"#;
        assert!(matches!(load_system(doc), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn serialization_round_trips() {
        let sys = load_system(SQUARE).unwrap();
        let text = to_json(&sys);
        let again = to_json(&load_system(&text).unwrap());
        assert_eq!(text, again);
    }
}
