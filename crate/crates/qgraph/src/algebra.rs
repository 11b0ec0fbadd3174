//! Quantum graphs: finite rational linear combinations of canonical
//! k-labeled multigraphs at a fixed label count and mode, multiplied by
//! gluing. The module also provides the grading by unlabeled-vertex count,
//! the Reynolds symmetrization, the normal form that identifies graphs up
//! to labels and isolated vertices, the bridge to polynomials in edge
//! variables for fully labeled graphs, and the two perturbation schemes
//! used by certificate checks.

use crate::error::{Error, Result};
use crate::graph::{LabeledMultigraph, Mode};
use crate::poly::{rational_pow, Monomial, Poly, Var};
use itertools::Itertools;
use num::bigint::BigUint;
use num::{BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Perturbation orders beyond this are past desk scale (1/30! annihilates
/// any meaningful epsilon).
pub const PERTURB_ORDER_CAP: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumGraph {
    k: usize,
    mode: Mode,
    terms: BTreeMap<LabeledMultigraph, BigRational>,
}

impl QuantumGraph {
    pub fn zero(k: usize, mode: Mode) -> Self {
        QuantumGraph { k, mode, terms: BTreeMap::new() }
    }

    /// The multiplicative unit: the fully labeled edgeless graph.
    pub fn one(k: usize, mode: Mode) -> Self {
        Self::from_graph(LabeledMultigraph::unit(k), mode)
    }

    pub fn from_graph(g: LabeledMultigraph, mode: Mode) -> Self {
        let mut q = Self::zero(g.num_labels(), mode);
        q.insert(g, BigRational::one());
        q
    }

    pub fn from_terms(
        k: usize,
        mode: Mode,
        terms: impl IntoIterator<Item = (LabeledMultigraph, BigRational)>,
    ) -> Result<Self> {
        let mut q = Self::zero(k, mode);
        for (g, c) in terms {
            if g.num_labels() != k {
                return Err(Error::LabelMismatch { left: k, right: g.num_labels() });
            }
            q.insert(g, c);
        }
        Ok(q)
    }

    /// Keys are clamped in simple mode and always canonical.
    fn insert(&mut self, g: LabeledMultigraph, c: BigRational) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(g.num_labels(), self.k);
        let g = match self.mode {
            Mode::Simple => g.clamped().canonical_form(),
            Mode::Multi => g.canonical_form(),
        };
        use std::collections::btree_map::Entry;
        match self.terms.entry(g) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn num_labels(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending basis-graph order.
    pub fn terms(&self) -> impl Iterator<Item = (&LabeledMultigraph, &BigRational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &LabeledMultigraph) -> BigRational {
        let g = match self.mode {
            Mode::Simple => g.clamped().canonical_form(),
            Mode::Multi => g.canonical_form(),
        };
        self.terms.get(&g).cloned().unwrap_or_else(BigRational::zero)
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::LabelMismatch { left: self.k, right: other.k });
        }
        if self.mode != other.mode {
            return Err(Error::ModeMismatch { left: self.mode, right: other.mode });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.insert(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuantumGraph {
            k: self.k,
            mode: self.mode,
            terms: self.terms.iter().map(|(g, c)| (g.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.k, self.mode);
        }
        QuantumGraph {
            k: self.k,
            mode: self.mode,
            terms: self.terms.iter().map(|(g, q)| (g.clone(), q * c)).collect(),
        }
    }

    /// `alpha*a + beta*b`.
    pub fn linear(alpha: &BigRational, a: &Self, beta: &BigRational, b: &Self) -> Result<Self> {
        a.scale(alpha).add(&b.scale(beta))
    }

    /// Bilinear extension of gluing.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = Self::zero(self.k, self.mode);
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                out.insert(ga.glue(gb, self.mode)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Result<Self> {
        let mut acc = Self::one(self.k, self.mode);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The part supported on basis graphs with exactly `d` unlabeled
    /// vertices. Summing over all degrees recovers the element.
    pub fn degree_component(&self, d: usize) -> Self {
        QuantumGraph {
            k: self.k,
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .filter(|(g, _)| g.degree() == d)
                .map(|(g, c)| (g.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|g| g.degree()).max()
    }

    /// Averages over all label permutations; the projection onto the
    /// symmetric subalgebra.
    pub fn reynolds(&self) -> Self {
        if self.k <= 1 {
            return self.clone();
        }
        let mut out = Self::zero(self.k, self.mode);
        let perms: Vec<Vec<usize>> = (1..=self.k).permutations(self.k).collect();
        let weight = BigRational::new(1.into(), (perms.len() as i64).into());
        for sigma in &perms {
            for (g, c) in &self.terms {
                // sigma is a bijection on 1..=k by construction
                out.insert(g.permute_labels(sigma).unwrap(), c * &weight);
            }
        }
        out
    }

    pub fn permute_labels(&self, sigma: &[usize]) -> Result<Self> {
        let mut out = Self::zero(self.k, self.mode);
        for (g, c) in &self.terms {
            out.insert(g.permute_labels(sigma)?, c.clone());
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.reynolds()
    }

    /// Adjoins a fresh isolated vertex labeled `k+1` to every basis graph.
    pub fn add_labeled_vertex(&self) -> Result<Self> {
        let mut out = Self::zero(self.k + 1, self.mode);
        for (g, c) in &self.terms {
            out.insert(g.add_labeled_vertex()?, c.clone());
        }
        Ok(out)
    }

    /// Symmetrized label extension: Reynolds after `add_labeled_vertex`.
    pub fn add_labeled_vertex_sym(&self) -> Result<Self> {
        Ok(self.add_labeled_vertex()?.reynolds())
    }

    /// Forgets labels and isolated vertices. Two elements agree up to labels
    /// and isolated vertices exactly when their normal forms are equal. The
    /// result always has zero labels.
    pub fn iso_normal_form(&self) -> Self {
        let mut out = Self::zero(0, self.mode);
        for (g, c) in &self.terms {
            // unlabel yields k = 0, so strip_isolated cannot fail
            out.insert(g.unlabel().strip_isolated().unwrap(), c.clone());
        }
        out
    }

    /// Writes a fully labeled element as a polynomial in the edge variables
    /// `z_ij`, multiplicities becoming exponents.
    pub fn to_z_poly(&self) -> Result<Poly> {
        let mut p = Poly::zero();
        for (g, c) in &self.terms {
            if g.num_vertices() != g.num_labels() {
                return Err(Error::NotFullyLabeled { n: g.num_vertices(), k: g.num_labels() });
            }
            let mono = Monomial::from_powers(
                g.edges().iter().map(|(&(u, v), m)| (Var::Z(u as u32, v as u32), m.clone())),
            );
            p.add_term(mono, c.clone());
        }
        Ok(p)
    }

    /// Inverse of [`to_z_poly`]: each monomial `z^e` becomes the fully
    /// labeled graph on `k` vertices with multiplicity `e_ij` on pair
    /// `{i,j}`. Simple mode reduces every exponent to 1 first.
    ///
    /// [`to_z_poly`]: QuantumGraph::to_z_poly
    pub fn from_z_poly(p: &Poly, k: usize, mode: Mode) -> Result<Self> {
        let mut out = Self::zero(k, mode);
        for (m, c) in p.terms() {
            let mut edges = Vec::new();
            for (v, e) in m.powers() {
                let Var::Z(i, j) = v else {
                    return Err(Error::WrongNamespace { ns: 'z', var: v.to_string() });
                };
                if j as usize > k {
                    return Err(Error::VarOutOfRange { var: v.to_string(), k });
                }
                edges.push(((i as usize, j as usize), e.clone()));
            }
            out.insert(LabeledMultigraph::new(k, k, edges)?, c.clone());
        }
        Ok(out)
    }

    /// The unlabeled two-vertex graph with a `j`-fold edge, as a multi-mode
    /// element. `j = 0` gives the edgeless two-vertex graph, whose normal
    /// form is the empty graph.
    pub fn k2_power(j: u64) -> Self {
        Self::from_graph(LabeledMultigraph::parallel_edges(&BigUint::from(j)), Mode::Multi)
    }

    fn check_perturbable(&self, eps: &BigRational, r: u32) -> Result<()> {
        if self.k != 0 {
            return Err(Error::LabeledInput { k: self.k });
        }
        if self.mode != Mode::Multi {
            return Err(Error::PerturbNeedsMulti);
        }
        if !eps.is_positive() {
            return Err(Error::NonpositiveEpsilon);
        }
        if r > PERTURB_ORDER_CAP {
            return Err(Error::PerturbOrderCap { r, cap: PERTURB_ORDER_CAP });
        }
        Ok(())
    }

    /// `a + eps * sum_{i=0}^{r} (1/i!) K2^{2i}`, the slowly-growing
    /// perturbation. Factorials stay exact.
    pub fn perturb_slow(&self, eps: &BigRational, r: u32) -> Result<Self> {
        self.check_perturbable(eps, r)?;
        let mut out = self.clone();
        let mut factorial = BigRational::one();
        for i in 0..=r {
            if i > 0 {
                factorial *= BigRational::from_integer(i.into());
            }
            out.insert(
                LabeledMultigraph::parallel_edges(&BigUint::from(2 * i)),
                eps / &factorial,
            );
        }
        Ok(out)
    }

    /// `a + eps * (1 + d^{-2r} K2^{2r})`, the d-bounded perturbation; `1`
    /// is the empty graph.
    pub fn perturb_bounded(&self, eps: &BigRational, d: &BigRational, r: u32) -> Result<Self> {
        self.check_perturbable(eps, r)?;
        if *d < BigRational::one() {
            return Err(Error::BoundBelowOne);
        }
        let mut out = self.clone();
        out.insert(LabeledMultigraph::unit(0), eps.clone());
        let dpow = rational_pow(d, &BigUint::from(2 * r));
        out.insert(LabeledMultigraph::parallel_edges(&BigUint::from(2 * r)), eps / dpow);
        Ok(out)
    }

    /// Parses the `.qg` text format: a `mode:` header line, then one
    /// `<rational> | <graph>` term per line. `#` starts a comment. All
    /// terms must share a label count; an empty term list is the zero
    /// element with `k = 0`.
    pub fn parse(input: &str) -> Result<Self> {
        let mut mode: Option<Mode> = None;
        let mut q: Option<QuantumGraph> = None;
        let mut terms: Vec<(BigRational, LabeledMultigraph)> = Vec::new();
        for (idx, raw) in input.lines().enumerate() {
            let line = match raw.find('#') {
                Some(cut) => &raw[..cut],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { pos: idx + 1, msg: msg.to_string() };
            if mode.is_none() {
                let rest = line.strip_prefix("mode:").ok_or_else(|| err("expected `mode: simple` or `mode: multi` header"))?;
                mode = Some(rest.trim().parse::<Mode>().map_err(|_| err("mode must be `simple` or `multi`"))?);
                continue;
            }
            let (coeff_text, graph_text) =
                line.split_once('|').ok_or_else(|| err("expected `<rational> | <graph>`"))?;
            let coeff = BigRational::from_str(coeff_text.trim())
                .map_err(|e| err(&format!("bad coefficient `{}`: {e}", coeff_text.trim())))?;
            let g = LabeledMultigraph::parse(graph_text)?;
            if mode == Some(Mode::Simple) && !g.is_simple() {
                let (&(u, v), m) =
                    g.edges().iter().find(|(_, m)| !m.is_one()).expect("non-simple graph");
                return Err(Error::NotSimple { u, v, m: m.to_string() });
            }
            terms.push((coeff, g));
        }
        let mode = mode.ok_or(Error::Parse { pos: 1, msg: "missing `mode:` header".to_string() })?;
        for (coeff, g) in terms {
            let q = q.get_or_insert_with(|| Self::zero(g.num_labels(), mode));
            if g.num_labels() != q.k {
                return Err(Error::LabelMismatch { left: q.k, right: g.num_labels() });
            }
            q.insert(g, coeff);
        }
        Ok(q.unwrap_or_else(|| Self::zero(0, mode)))
    }
}

impl fmt::Display for QuantumGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        for (g, c) in &self.terms {
            writeln!(f, "{c} | {g}")?;
        }
        Ok(())
    }
}

impl FromStr for QuantumGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
