//! Labeled multigraphs and their canonical forms.
//!
//! Vertices are `1..=n`; the first `k` of them are labeled and fixed, the
//! rest are interchangeable. Two graphs are considered the same element of
//! the algebra when one arises from the other by permuting the unlabeled
//! vertices; `canonical_form` picks the lexicographically least
//! representative of that orbit so representatives can be compared with `==`.

use crate::error::{Error, Result};
use itertools::Itertools;
use num::bigint::BigUint;
use num::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

/// Coefficient reduction rule for graph products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Edge multiplicities are clamped to 1 after every operation.
    Simple,
    /// Multiplicities add freely.
    Multi,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Simple => write!(f, "simple"),
            Mode::Multi => write!(f, "multi"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "simple" => Ok(Mode::Simple),
            "multi" => Ok(Mode::Multi),
            other => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown mode `{other}` (expected simple or multi)"),
            }),
        }
    }
}

/// Hard cap on vertex count; canonicalization enumerates all (n-k)!
/// placements of the unlabeled vertices, so larger graphs are rejected
/// outright instead of hanging.
pub const MAX_VERTICES: usize = 12;

/// A loopless multigraph on vertices `1..=n` whose first `k` vertices are
/// labeled. Edge multiplicities are arbitrary-precision positive integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledMultigraph {
    n: usize,
    k: usize,
    edges: BTreeMap<(usize, usize), BigUint>,
}

impl LabeledMultigraph {
    /// Builds a graph after validating every invariant. Edge endpoints may
    /// come in either order; repeated pairs accumulate multiplicity.
    pub fn new(
        n: usize,
        k: usize,
        edges: impl IntoIterator<Item = ((usize, usize), BigUint)>,
    ) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices { n, max: MAX_VERTICES });
        }
        if k > n {
            return Err(Error::LabelsExceedVertices { k, n });
        }
        let mut map: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for ((a, b), m) in edges {
            if a == b {
                return Err(Error::LoopEdge { v: a });
            }
            let (u, v) = (a.min(b), a.max(b));
            if u < 1 || v > n {
                let bad = if u < 1 { u } else { v };
                return Err(Error::VertexOutOfRange { v: bad, n });
            }
            if m.is_zero() {
                return Err(Error::ZeroMultiplicity { u, v });
            }
            *map.entry((u, v)).or_insert_with(BigUint::zero) += m;
        }
        Ok(LabeledMultigraph { n, k, edges: map })
    }

    /// Convenience constructor for simple graphs (all multiplicities 1).
    pub fn simple(n: usize, k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, k, edges.iter().map(|&e| (e, BigUint::one())))
    }

    /// The fully labeled edgeless graph on `k` vertices, the unit for gluing.
    pub fn unit(k: usize) -> Self {
        LabeledMultigraph { n: k, k, edges: BTreeMap::new() }
    }

    /// Two unlabeled vertices joined by `j` parallel edges (`j = 0` gives the
    /// edgeless two-vertex graph).
    pub fn parallel_edges(j: &BigUint) -> Self {
        let mut edges = BTreeMap::new();
        if !j.is_zero() {
            edges.insert((1, 2), j.clone());
        }
        LabeledMultigraph { n: 2, k: 0, edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_labels(&self) -> usize {
        self.k
    }

    /// Grading degree: number of unlabeled vertices.
    pub fn degree(&self) -> usize {
        self.n - self.k
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), BigUint> {
        &self.edges
    }

    pub fn multiplicity(&self, a: usize, b: usize) -> BigUint {
        let key = (a.min(b), a.max(b));
        self.edges.get(&key).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn is_simple(&self) -> bool {
        self.edges.values().all(|m| m.is_one())
    }

    pub fn total_edge_multiplicity(&self) -> BigUint {
        self.edges.values().sum()
    }

    /// Same graph with every multiplicity clamped to 1.
    pub fn clamped(&self) -> Self {
        LabeledMultigraph {
            n: self.n,
            k: self.k,
            edges: self.edges.keys().map(|&e| (e, BigUint::one())).collect(),
        }
    }

    fn vertex_is_isolated(&self, v: usize) -> bool {
        self.edges.keys().all(|&(a, b)| a != v && b != v)
    }

    /// Rebuilds the edge map under a vertex renumbering `old -> map[old-1]`.
    fn renumber(&self, n: usize, k: usize, map: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|(&(a, b), m)| {
                let (u, v) = (map[a - 1], map[b - 1]);
                ((u.min(v), u.max(v)), m.clone())
            })
            .collect();
        LabeledMultigraph { n, k, edges }
    }

    /// Lexicographically least representative over all placements of the
    /// unlabeled vertices. Labeled vertices stay put. Results are memoized
    /// because products revisit the same raw graphs over and over.
    pub fn canonical_form(&self) -> Self {
        if self.n - self.k <= 1 || self.edges.is_empty() {
            return self.clone();
        }
        let cache = canon_cache().lock().unwrap();
        if let Some(hit) = cache.get(self) {
            return hit.clone();
        }
        drop(cache);
        let canon = self.canonical_form_uncached();
        canon_cache().lock().unwrap().insert(self.clone(), canon.clone());
        canon
    }

    fn canonical_form_uncached(&self) -> Self {
        let free: Vec<usize> = (self.k + 1..=self.n).collect();
        let zero = BigUint::zero();
        let mut best_enc: Option<Vec<BigUint>> = None;
        let mut best_map: Vec<usize> = Vec::new();
        let mut map = vec![0usize; self.n];
        for v in 1..=self.k {
            map[v - 1] = v;
        }
        for perm in free.iter().copied().permutations(free.len()) {
            for (i, &target) in perm.iter().enumerate() {
                map[self.k + i] = target;
            }
            let mut enc = vec![&zero; self.n * (self.n - 1) / 2];
            for (&(a, b), m) in &self.edges {
                let (u, v) = (map[a - 1].min(map[b - 1]), map[a - 1].max(map[b - 1]));
                enc[pair_index(u, v, self.n)] = m;
            }
            let better = match &best_enc {
                None => true,
                Some(best) => enc.iter().map(|m| *m).lt(best.iter()),
            };
            if better {
                best_enc = Some(enc.into_iter().cloned().collect());
                best_map = map.clone();
            }
        }
        self.renumber(self.n, self.k, &best_map)
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical_form()
    }

    /// Gluing product: disjoint union followed by identification of equal
    /// labels. Multiplicities add; in simple mode they are clamped to 1.
    /// The result is returned in canonical form.
    pub fn glue(&self, other: &Self, mode: Mode) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::LabelMismatch { left: self.k, right: other.k });
        }
        let k = self.k;
        let n = self.n + other.n - k;
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices { n, max: MAX_VERTICES });
        }
        let mut edges: BTreeMap<(usize, usize), BigUint> = self.edges.clone();
        let shift = self.n - k;
        for (&(a, b), m) in &other.edges {
            let f = |v: usize| if v <= k { v } else { v + shift };
            let (u, v) = (f(a).min(f(b)), f(a).max(f(b)));
            *edges.entry((u, v)).or_insert_with(BigUint::zero) += m;
        }
        if mode == Mode::Simple {
            for m in edges.values_mut() {
                *m = BigUint::one();
            }
        }
        Ok(LabeledMultigraph { n, k, edges }.canonical_form())
    }

    /// Forgets all labels (`k := 0`) and recanonicalizes.
    pub fn unlabel(&self) -> Self {
        LabeledMultigraph { n: self.n, k: 0, edges: self.edges.clone() }.canonical_form()
    }

    /// Removes isolated vertices from an unlabeled graph.
    pub fn strip_isolated(&self) -> Result<Self> {
        if self.k > 0 {
            return Err(Error::LabeledInput { k: self.k });
        }
        let kept: Vec<usize> = (1..=self.n).filter(|&v| !self.vertex_is_isolated(v)).collect();
        let mut map = vec![0usize; self.n];
        for (new, &old) in kept.iter().enumerate() {
            map[old - 1] = new + 1;
        }
        Ok(self.renumber(kept.len(), 0, &map).canonical_form())
    }

    /// Relabels by `sigma`: the vertex carrying label `i` carries `sigma[i-1]`
    /// afterwards. `sigma` must be a bijection on `1..=k`.
    pub fn permute_labels(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.k {
            return Err(Error::NotABijection { k: self.k });
        }
        let mut seen = vec![false; self.k];
        for &s in sigma {
            if s < 1 || s > self.k || seen[s - 1] {
                return Err(Error::NotABijection { k: self.k });
            }
            seen[s - 1] = true;
        }
        let mut map: Vec<usize> = (1..=self.n).collect();
        for i in 0..self.k {
            map[i] = sigma[i];
        }
        Ok(self.renumber(self.n, self.k, &map).canonical_form())
    }

    /// Adjoins a fresh isolated vertex carrying the new label `k+1`. The new
    /// vertex is numbered `k+1` and the unlabeled vertices shift up by one.
    pub fn add_labeled_vertex(&self) -> Result<Self> {
        if self.n + 1 > MAX_VERTICES {
            return Err(Error::TooManyVertices { n: self.n + 1, max: MAX_VERTICES });
        }
        let mut map: Vec<usize> = Vec::with_capacity(self.n);
        for v in 1..=self.n {
            map.push(if v <= self.k { v } else { v + 1 });
        }
        Ok(self.renumber(self.n + 1, self.k + 1, &map).canonical_form())
    }

    /// Parses the `MG <n> <k> : <edges>` line format. See [`fmt::Display`]
    /// for the grammar; `#` starts a comment. The result is canonical.
    pub fn parse(input: &str) -> Result<Self> {
        let mut p = GraphParser::new(input);
        let g = p.graph()?;
        p.finish()?;
        Ok(g.canonical_form())
    }
}

fn pair_index(u: usize, v: usize, n: usize) -> usize {
    debug_assert!(1 <= u && u < v && v <= n);
    (u - 1) * n - u * (u - 1) / 2 + (v - u) - 1
}

fn canon_cache() -> &'static Mutex<HashMap<LabeledMultigraph, LabeledMultigraph>> {
    static CACHE: OnceLock<Mutex<HashMap<LabeledMultigraph, LabeledMultigraph>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl fmt::Display for LabeledMultigraph {
    /// `MG <n> <k> : u-v*m, ...` with `*m` omitted when the multiplicity is 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MG {} {} :", self.n, self.k)?;
        let mut first = true;
        for (&(u, v), m) in &self.edges {
            if first {
                write!(f, " ")?;
                first = false;
            } else {
                write!(f, ", ")?;
            }
            write!(f, "{u}-{v}")?;
            if !m.is_one() {
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for LabeledMultigraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

struct GraphParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> GraphParser<'a> {
    fn new(src: &'a str) -> Self {
        GraphParser { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        loop {
            while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos] == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn number(&mut self) -> Result<BigUint> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(BigUint::from_str(text).unwrap())
    }

    fn small_number(&mut self) -> Result<usize> {
        let n = self.number()?;
        n.try_into().map_err(|_| Error::Parse { pos: self.pos, msg: "number too large".into() })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected `{}`", c as char))
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    fn graph(&mut self) -> Result<LabeledMultigraph> {
        self.skip_ws();
        if !self.src[self.pos..].starts_with(b"MG") {
            return self.err("expected `MG`");
        }
        self.pos += 2;
        let n = self.small_number()?;
        let k = self.small_number()?;
        self.expect(b':')?;
        let mut edges = Vec::new();
        if !self.at_end() {
            loop {
                let u = self.small_number()?;
                self.expect(b'-')?;
                let v = self.small_number()?;
                let mut m = BigUint::one();
                self.skip_ws();
                if self.pos < self.src.len() && self.src[self.pos] == b'*' {
                    self.pos += 1;
                    m = self.number()?;
                }
                if m.is_zero() {
                    return Err(Error::ZeroMultiplicity { u: u.min(v), v: u.max(v) });
                }
                edges.push(((u, v), m));
                self.skip_ws();
                if self.pos < self.src.len() && self.src[self.pos] == b',' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        LabeledMultigraph::new(n, k, edges)
    }

    fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }
}
