//! Directed graphs, incidence matrices and the associated subshift of finite type.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on the number of words an enumeration may produce.
pub const DEFAULT_WORD_CAP: u128 = 10_000_000;

/// Directed edge between 0-based vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    vertices: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::Schema("vertex set is empty".into()));
        }
        if edges.is_empty() {
            return Err(Error::Schema("edge set is empty".into()));
        }
        for e in &edges {
            if e.from >= vertices || e.to >= vertices {
                return Err(Error::Schema(format!("edge {} references a missing vertex", e.id)));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }
}

/// Square 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl IncidenceMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Schema("empty incidence matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Schema("incidence matrix is not square".into()));
            }
            if row.iter().any(|&a| a > 1) {
                return Err(Error::Schema("incidence entries must be 0 or 1".into()));
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let entries = (0..n * n).map(|k| u8::from(f(k / n, k % n))).collect();
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j] == 1
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.get(i, j))
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.successors(i).count()).collect()
    }

    fn reachable(&self, start: usize, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.n {
                let edge = if reverse { self.get(j, i) } else { self.get(i, j) };
                if edge && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the transition digraph.
    pub fn is_irreducible(&self) -> bool {
        self.reachable(0, false).iter().all(|&b| b) && self.reachable(0, true).iter().all(|&b| b)
    }

    /// Period of an irreducible matrix: gcd of cycle lengths, via BFS levels.
    pub fn period(&self) -> Result<usize> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let mut level = vec![usize::MAX; self.n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut g = 0usize;
        while let Some(i) = queue.pop_front() {
            for j in self.successors(i) {
                if level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    queue.push_back(j);
                } else {
                    g = gcd(g, (level[i] + 1).abs_diff(level[j]));
                }
            }
        }
        Ok(g)
    }

    /// Primitivity via `A^N > 0` for some `N` up to the Wielandt bound `(n-1)^2 + 1`.
    pub fn is_primitive_by_power(&self) -> Result<bool> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let bound = (self.n - 1) * (self.n - 1) + 1;
        let mut power: Vec<bool> = self.entries.iter().map(|&a| a == 1).collect();
        for _ in 1..=bound {
            if power.iter().all(|&b| b) {
                return Ok(true);
            }
            power = bool_mul(&power, &self.entries, self.n);
        }
        Ok(power.iter().all(|&b| b))
    }

    /// Aperiodicity of an irreducible matrix (period one).
    pub fn is_aperiodic(&self) -> Result<bool> {
        let by_period = self.period()? == 1;
        debug_assert_eq!(Ok(by_period), self.is_primitive_by_power());
        Ok(by_period)
    }

    /// Perron root with a positive eigenvector.
    ///
    /// Power iteration on `A + I` (primitive whenever `A` is irreducible);
    /// the Collatz-Wielandt bounds `min (Ax)_i / x_i <= rho <= max (Ax)_i / x_i`
    /// bracket the root, and iteration stops once the bracket is narrower than `tol`.
    pub fn spectral_radius(&self, tol: f64) -> Result<(f64, Vec<f64>)> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = self.n;
        let mut x = vec![1.0; n];
        for _ in 0..100_000 {
            let ax: Vec<f64> = (0..n).map(|i| self.successors(i).map(|j| x[j]).sum()).collect();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..n {
                let r = ax[i] / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if hi - lo < tol {
                return Ok((0.5 * (lo + hi), x));
            }
            let next: Vec<f64> = (0..n).map(|i| ax[i] + x[i]).collect();
            let m = next.iter().cloned().fold(0.0, f64::max);
            x = next.into_iter().map(|v| v / m).collect();
        }
        Err(Error::NonConvergence("Perron root power iteration".into()))
    }

    /// `log` of the Perron root.
    pub fn topological_entropy(&self) -> Result<f64> {
        Ok(self.spectral_radius(1e-13)?.0.ln())
    }

    /// Number of admissible words of length `len`, with allowed first symbols
    /// `heads` and allowed last symbols `tails`; cyclic words must also close up.
    pub fn count_words(&self, len: usize, cyclic: bool, heads: &[usize], tails: Option<&[bool]>) -> u128 {
        if len == 0 {
            return 0;
        }
        let n = self.n;
        let tail_ok = |j: usize| tails.map_or(true, |t| t[j]);
        let mut total: u128 = 0;
        if cyclic {
            for &h in heads {
                let mut v = vec![0u128; n];
                v[h] = 1;
                for _ in 0..len - 1 {
                    v = self.step_counts(&v);
                }
                // closing transition from the last symbol back to h
                let closing: u128 = (0..n)
                    .filter(|&j| tail_ok(j) && self.get(j, h))
                    .fold(0u128, |acc, j| acc.saturating_add(v[j]));
                total = total.saturating_add(closing);
            }
        } else {
            let mut v = vec![0u128; n];
            for &h in heads {
                v[h] = 1;
            }
            for _ in 0..len - 1 {
                v = self.step_counts(&v);
            }
            total = (0..n).filter(|&j| tail_ok(j)).fold(0u128, |acc, j| acc.saturating_add(v[j]));
        }
        total
    }

    fn step_counts(&self, v: &[u128]) -> Vec<u128> {
        let n = self.n;
        let mut out = vec![0u128; n];
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            for j in self.successors(i) {
                out[j] = out[j].saturating_add(v[i]);
            }
        }
        out
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn bool_mul(a: &[bool], b: &[u8], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    if b[k * n + j] == 1 {
                        out[i * n + j] = true;
                    }
                }
            }
        }
    }
    out
}

/// A set of admissible words of fixed length over the symbols of an
/// incidence matrix. Splitting by head symbol partitions the space so
/// workers can enumerate disjoint parts.
#[derive(Debug, Clone)]
pub struct WordSpace<'a> {
    matrix: &'a IncidenceMatrix,
    len: usize,
    cyclic: bool,
    heads: Vec<usize>,
    tails: Option<Vec<bool>>,
}

impl<'a> WordSpace<'a> {
    /// All words of length `len`; fails with the exact count when above `cap`.
    pub fn new(matrix: &'a IncidenceMatrix, len: usize, cyclic: bool, cap: u128) -> Result<Self> {
        Self::restricted(matrix, len, cyclic, (0..matrix.dim()).collect(), None, cap)
    }

    pub fn restricted(
        matrix: &'a IncidenceMatrix,
        len: usize,
        cyclic: bool,
        heads: Vec<usize>,
        tails: Option<Vec<bool>>,
        cap: u128,
    ) -> Result<Self> {
        if len == 0 {
            return Err(Error::DomainError("word length must be at least 1".into()));
        }
        let space = Self {
            matrix,
            len,
            cyclic,
            heads,
            tails,
        };
        let count = space.count();
        if count > cap {
            return Err(Error::CountCapExceeded { count, cap });
        }
        Ok(space)
    }

    pub fn count(&self) -> u128 {
        self.matrix
            .count_words(self.len, self.cyclic, &self.heads, self.tails.as_deref())
    }

    pub fn split_by_head(&self) -> Vec<WordSpace<'a>> {
        self.heads
            .iter()
            .map(|&h| WordSpace {
                heads: vec![h],
                ..self.clone()
            })
            .collect()
    }

    pub fn iter(&self) -> WordIter<'_> {
        WordIter {
            space: self,
            word: Vec::with_capacity(self.len),
            cursor: Vec::with_capacity(self.len),
            started: false,
            head_idx: 0,
        }
    }
}

/// Depth-first enumeration of a [`WordSpace`] in lexicographic order.
pub struct WordIter<'s> {
    space: &'s WordSpace<'s>,
    word: Vec<usize>,
    // next candidate successor to try at each depth > 0
    cursor: Vec<usize>,
    started: bool,
    head_idx: usize,
}

impl WordIter<'_> {
    fn accept_last(&self) -> bool {
        let s = self.space;
        let last = *self.word.last().unwrap();
        if let Some(t) = &s.tails {
            if !t[last] {
                return false;
            }
        }
        !s.cyclic || s.matrix.get(last, self.word[0])
    }

    /// Advances to the next complete word (depth-first with backtracking).
    fn advance(&mut self) -> bool {
        let s = self.space;
        let n = s.matrix.dim();
        loop {
            if self.word.is_empty() {
                if self.head_idx >= s.heads.len() {
                    return false;
                }
                self.word.push(s.heads[self.head_idx]);
                self.head_idx += 1;
                self.cursor.clear();
                self.cursor.push(0);
                if self.word.len() == s.len {
                    if self.accept_last() {
                        return true;
                    }
                    self.word.pop();
                }
                continue;
            }
            if self.word.len() == s.len {
                // backtrack from a complete word
                self.word.pop();
                self.cursor.pop();
                continue;
            }
            let depth = self.word.len();
            let prev = self.word[depth - 1];
            let mut next = None;
            let cur = self.cursor.last_mut().unwrap();
            while *cur < n {
                let j = *cur;
                *cur += 1;
                if s.matrix.get(prev, j) {
                    next = Some(j);
                    break;
                }
            }
            match next {
                Some(j) => {
                    self.word.push(j);
                    self.cursor.push(0);
                    if self.word.len() == s.len && self.accept_last() {
                        return true;
                    }
                }
                None => {
                    self.word.pop();
                    self.cursor.pop();
                }
            }
        }
    }
}

impl Iterator for WordIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if !self.started {
            self.started = true;
        }
        if self.advance() {
            Some(self.word.clone())
        } else {
            None
        }
    }
}
