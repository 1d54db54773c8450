//! The assembled graph-directed system, its words and the skew product.
//!
//! Symbols of the shift are `(edge, map)` pairs, one per element of each
//! edge family, so two equal maps on different edges are different symbols.
//! A word `[(g_1, e_1), ..., (g_N, e_N)]` is admissible when
//! `t(e_n) = i(e_{n+1})`, and its map is `g_N ∘ ... ∘ g_1`.

pub mod builtin;
pub mod config;

pub use builtin::{builtin, example_section3, power_system, single_loop};
pub use config::{load_system, to_json};

use crate::error::{Error, Result};
use crate::ratmap::{compose_capped, Jet, RationalMap, SpherePoint, DEFAULT_DEGREE_CAP};
use crate::symbolic::{DirectedGraph, IncidenceMatrix, WordSpace};
use std::fmt;

/// One letter of the shift alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub edge: usize,
    pub map: usize,
}

#[derive(Debug, Clone)]
pub struct GdmsSystem {
    graph: DirectedGraph,
    families: Vec<Vec<RationalMap>>,
    symbols: Vec<Symbol>,
    incidence: IncidenceMatrix,
    irreducible: bool,
    aperiodic: bool,
}

impl GdmsSystem {
    pub fn new(graph: DirectedGraph, families: Vec<Vec<RationalMap>>) -> Result<Self> {
        if families.len() != graph.edges().len() {
            return Err(Error::Schema("one map family per edge is required".into()));
        }
        for (e, fam) in graph.edges().iter().zip(&families) {
            if fam.is_empty() {
                return Err(Error::EmptyFamily(e.id.clone()));
            }
        }
        let symbols: Vec<Symbol> = families
            .iter()
            .enumerate()
            .flat_map(|(edge, fam)| (0..fam.len()).map(move |map| Symbol { edge, map }))
            .collect();
        let incidence = IncidenceMatrix::from_fn(symbols.len(), |a, b| {
            graph.edge(symbols[a].edge).to == graph.edge(symbols[b].edge).from
        });
        let irreducible = incidence.is_irreducible();
        let aperiodic = irreducible && incidence.is_aperiodic()?;
        Ok(Self {
            graph,
            families,
            symbols,
            incidence,
            irreducible,
            aperiodic,
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn families(&self) -> &[Vec<RationalMap>] {
        &self.families
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn map_of(&self, symbol: usize) -> &RationalMap {
        let s = self.symbols[symbol];
        &self.families[s.edge][s.map]
    }

    /// `i(e)` of the symbol's edge.
    pub fn initial_vertex(&self, symbol: usize) -> usize {
        self.graph.edge(self.symbols[symbol].edge).from
    }

    /// `t(e)` of the symbol's edge.
    pub fn terminal_vertex(&self, symbol: usize) -> usize {
        self.graph.edge(self.symbols[symbol].edge).to
    }

    /// Symbols whose edge starts at `v`.
    pub fn symbols_from(&self, v: usize) -> Vec<usize> {
        (0..self.symbols.len()).filter(|&s| self.initial_vertex(s) == v).collect()
    }

    /// Symbols whose edge ends at `v`.
    pub fn symbols_into(&self, v: usize) -> Vec<usize> {
        (0..self.symbols.len()).filter(|&s| self.terminal_vertex(s) == v).collect()
    }

    pub fn max_generator_degree(&self) -> usize {
        self.families.iter().flatten().map(|g| g.degree()).max().unwrap_or(0)
    }

    /// Human-readable symbol label `edge#map`.
    pub fn symbol_label(&self, symbol: usize) -> String {
        let s = self.symbols[symbol];
        format!("{}#{}", self.graph.edge(s.edge).id, s.map)
    }

    /// Checked construction of a word.
    pub fn word(&self, symbols: Vec<usize>) -> Result<SymbolicWord> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= self.symbols.len()) {
            return Err(Error::NotAdmissible(format!("unknown symbol {bad}")));
        }
        for pair in symbols.windows(2) {
            if !self.incidence.get(pair[0], pair[1]) {
                return Err(Error::NotAdmissible(format!(
                    "{} cannot be followed by {}",
                    self.symbol_label(pair[0]),
                    self.symbol_label(pair[1])
                )));
            }
        }
        Ok(SymbolicWord(symbols))
    }

    /// All admissible words of length `len` (cyclic: also closing up).
    pub fn words(&self, len: usize, cyclic: bool, cap: u128) -> Result<Vec<SymbolicWord>> {
        let space = WordSpace::new(&self.incidence, len, cyclic, cap)?;
        Ok(space.iter().map(SymbolicWord).collect())
    }

    /// Words of length `len` from vertex `i` to vertex `j`.
    pub fn words_between(&self, i: usize, j: usize, len: usize, cyclic: bool, cap: u128) -> Result<Vec<SymbolicWord>> {
        let tails = (0..self.symbols.len()).map(|s| self.terminal_vertex(s) == j).collect();
        let space = WordSpace::restricted(&self.incidence, len, cyclic, self.symbols_from(i), Some(tails), cap)?;
        Ok(space.iter().map(SymbolicWord).collect())
    }
}

/// A finite admissible word over the symbol alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicWord(Vec<usize>);

impl SymbolicWord {
    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn initial_vertex(&self, sys: &GdmsSystem) -> usize {
        sys.initial_vertex(self.0[0])
    }

    pub fn terminal_vertex(&self, sys: &GdmsSystem) -> usize {
        sys.terminal_vertex(*self.0.last().unwrap())
    }

    /// Whether the word can be repeated periodically.
    pub fn is_cyclic(&self, sys: &GdmsSystem) -> bool {
        sys.incidence().get(*self.0.last().unwrap(), self.0[0])
    }

    /// Cyclic shift by `k` letters to the left.
    pub fn rotated(&self, k: usize) -> SymbolicWord {
        let mut v = self.0.clone();
        let n = v.len();
        v.rotate_left(k % n);
        SymbolicWord(v)
    }

    pub fn concat(&self, other: &SymbolicWord, sys: &GdmsSystem) -> Result<SymbolicWord> {
        sys.word(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    /// Product of generator degrees, saturating.
    pub fn degree(&self, sys: &GdmsSystem) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(sys.map_of(s).degree() as u128))
    }

    pub fn label(&self, sys: &GdmsSystem) -> String {
        self.0.iter().map(|&s| sys.symbol_label(s)).collect::<Vec<_>>().join(",")
    }

    /// Pushes a jet along the word, first letter first.
    pub fn apply_jet(&self, sys: &GdmsSystem, jet: Jet) -> Jet {
        self.0.iter().fold(jet, |j, &s| sys.map_of(s).apply_jet(&j))
    }

    /// Sequential evaluation with the product of spherical derivative norms.
    pub fn eval_with_norm(&self, sys: &GdmsSystem, z: SpherePoint) -> (SpherePoint, f64) {
        self.0.iter().fold((z, 1.0), |(w, m), &s| {
            let (next, n) = sys.map_of(s).eval_with_norm(w);
            (next, m * n)
        })
    }
}

impl fmt::Display for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// A point of the skew product: a tracked finite prefix of the address, the
/// fibre coordinate, and the accumulated spherical derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewPoint {
    pub word: SymbolicWord,
    pub z: SpherePoint,
    pub vertex: usize,
    pub derivative: f64,
    pub hit_critical: bool,
}

impl SkewPoint {
    pub fn new(sys: &GdmsSystem, word: SymbolicWord, z: SpherePoint) -> Self {
        let vertex = word.initial_vertex(sys);
        Self {
            word,
            z,
            vertex,
            derivative: 1.0,
            hit_critical: false,
        }
    }
}

/// One step `(ξ, z) -> (σξ, g_1(z))` of the skew product.
pub fn skew_step(sys: &GdmsSystem, p: &SkewPoint) -> Result<SkewPoint> {
    let (&head, rest) = p.word.0.split_first().ok_or(Error::EmptyWord)?;
    let (z, norm) = sys.map_of(head).eval_with_norm(p.z);
    Ok(SkewPoint {
        word: SymbolicWord(rest.to_vec()),
        z,
        vertex: sys.terminal_vertex(head),
        derivative: p.derivative * norm,
        hit_critical: p.hit_critical || norm == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Explicit,
    Pointwise,
}

/// The composed map of a word. Evaluation is always sequential; an explicit
/// coefficient form is kept alongside when the degree is within the cap.
#[derive(Debug, Clone)]
pub struct WordMap {
    pub word: SymbolicWord,
    pub initial_vertex: usize,
    pub terminal_vertex: usize,
    pub degree: u128,
    maps: Vec<RationalMap>,
    explicit: Option<RationalMap>,
}

impl WordMap {
    pub fn mode(&self) -> EvalMode {
        if self.explicit.is_some() {
            EvalMode::Explicit
        } else {
            EvalMode::Pointwise
        }
    }

    pub fn explicit(&self) -> Option<&RationalMap> {
        self.explicit.as_ref()
    }

    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        self.eval_with_norm(z).0
    }

    pub fn eval_with_norm(&self, z: SpherePoint) -> (SpherePoint, f64) {
        self.maps.iter().fold((z, 1.0), |(w, m), g| {
            let (next, n) = g.eval_with_norm(w);
            (next, m * n)
        })
    }

    pub fn spherical_deriv_norm(&self, z: SpherePoint) -> f64 {
        self.eval_with_norm(z).1
    }

    /// `h ∈ H_i^j(S)` membership.
    pub fn in_h_class(&self, i: usize, j: usize) -> bool {
        self.initial_vertex == i && self.terminal_vertex == j
    }
}

pub fn word_map(sys: &GdmsSystem, w: &SymbolicWord) -> WordMap {
    word_map_capped(sys, w, DEFAULT_DEGREE_CAP)
}

pub fn word_map_capped(sys: &GdmsSystem, w: &SymbolicWord, cap: u128) -> WordMap {
    let maps: Vec<RationalMap> = w.0.iter().map(|&s| sys.map_of(s).clone()).collect();
    let degree = w.degree(sys);
    let explicit = if degree <= cap {
        let mut acc = maps[0].clone();
        for g in &maps[1..] {
            match compose_capped(g, &acc, cap) {
                Ok(m) => acc = m,
                Err(_) => unreachable!("degree checked against the cap"),
            }
        }
        Some(acc)
    } else {
        None
    };
    WordMap {
        word: w.clone(),
        initial_vertex: w.initial_vertex(sys),
        terminal_vertex: w.terminal_vertex(sys),
        degree,
        maps,
        explicit,
    }
}

/// All word maps in `H_i^j(S)` of length `1..=max_len`.
pub fn enumerate_h_class(
    sys: &GdmsSystem,
    i: usize,
    j: usize,
    max_len: usize,
    cap: u128,
) -> Result<impl Iterator<Item = WordMap> + '_> {
    if max_len == 0 {
        return Err(Error::DomainError("max_len must be at least 1".into()));
    }
    let mut words = Vec::new();
    let mut total: u128 = 0;
    for len in 1..=max_len {
        let batch = sys.words_between(i, j, len, false, cap.saturating_sub(total))?;
        total += batch.len() as u128;
        words.extend(batch);
    }
    Ok(words.into_iter().map(move |w| word_map(sys, &w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::DEFAULT_WORD_CAP;

    #[test]
    fn section3_structure() {
        let sys = example_section3(5).unwrap();
        assert_eq!(sys.vertex_count(), 3);
        assert_eq!(sys.graph().edges().len(), 8);
        assert!(sys.is_irreducible() && sys.is_aperiodic());
        assert!(!sys.graph().edges().iter().any(|e| (e.from, e.to) == (0, 1)));
        assert!(example_section3(4).is_err());
    }

    #[test]
    fn skew_step_applies_head() {
        let sys = example_section3(5).unwrap();
        // edge 1-1 is symbol 0 and carries z^5
        let w = sys.word(vec![0, 0]).unwrap();
        let p = SkewPoint::new(&sys, w, SpherePoint::from_re_im(2.0, 0.0));
        let q = skew_step(&sys, &p).unwrap();
        assert_eq!(q.z, SpherePoint::from_re_im(32.0, 0.0));
        assert_eq!(q.vertex, 0);
        assert_eq!(q.word.len(), 1);
        let r = skew_step(&sys, &q).unwrap();
        assert!(matches!(skew_step(&sys, &r), Err(Error::EmptyWord)));
    }

    #[test]
    fn skew_step_at_critical_point() {
        let sys = example_section3(5).unwrap();
        let p = SkewPoint::new(&sys, sys.word(vec![0]).unwrap(), SpherePoint::ZERO);
        let q = skew_step(&sys, &p).unwrap();
        assert_eq!(q.derivative, 0.0);
        assert!(q.hit_critical);
    }

    #[test]
    fn word_map_of_square_word() {
        let sys = example_section3(5).unwrap();
        let wm = word_map(&sys, &sys.word(vec![0, 0]).unwrap());
        assert_eq!(wm.degree, 25);
        let ex = wm.explicit().unwrap();
        assert_eq!(ex.num().degree(), 25);
        assert_eq!(ex.num().coeff(25), num_complex::Complex64::new(1.0, 0.0));
        assert_eq!(ex.num().coeffs().iter().filter(|c| c.norm() != 0.0).count(), 1);
        let single = word_map(&sys, &sys.word(vec![3]).unwrap());
        assert_eq!(single.explicit().unwrap(), sys.map_of(3));
    }

    #[test]
    fn rejects_inadmissible_words() {
        let sys = example_section3(5).unwrap();
        // 1-1 then 2-2: t(1-1) = 1 but i(2-2) = 2
        let s11 = 0;
        let s22 = sys.graph().edges().iter().position(|e| e.id == "2-2").unwrap();
        assert!(matches!(sys.word(vec![s11, s22]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn h_class_examples() {
        let sys = example_section3(5).unwrap();
        assert_eq!(enumerate_h_class(&sys, 0, 0, 1, DEFAULT_WORD_CAP).unwrap().count(), 1);
        assert_eq!(enumerate_h_class(&sys, 0, 1, 1, DEFAULT_WORD_CAP).unwrap().count(), 0);
        let sq = power_system(2).unwrap();
        let lens: Vec<usize> = enumerate_h_class(&sq, 0, 0, 3, DEFAULT_WORD_CAP)
            .unwrap()
            .map(|w| w.word.len())
            .collect();
        assert_eq!(lens, vec![1, 2, 3]);
    }
}
