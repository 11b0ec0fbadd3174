//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Three variable namespaces are supported: vertex weights `x_i`, symmetric
//! pair weights `y_ij` (diagonal allowed), and edge indicators `z_ij`
//! (strictly off-diagonal). Monomials are ordered graded-lexicographically
//! with namespace order X < Y < Z; display lists terms from the largest
//! monomial down so output is deterministic.

use crate::error::{Error, Result};
use num::bigint::{BigInt, BigUint};
use num::traits::Pow;
use num::{BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Vertex weight `x_i`, `i >= 1`.
    X(u32),
    /// Pair weight `y_ij` with `i <= j`.
    Y(u32, u32),
    /// Edge indicator `z_ij` with `i < j`.
    Z(u32, u32),
}

impl Var {
    pub fn x(i: u32) -> Var {
        Var::X(i)
    }

    pub fn y(i: u32, j: u32) -> Var {
        Var::Y(i.min(j), i.max(j))
    }

    /// `z` requires two distinct endpoints.
    pub fn z(i: u32, j: u32) -> Result<Var> {
        if i == j {
            return Err(Error::LoopEdge { v: i as usize });
        }
        Ok(Var::Z(i.min(j), i.max(j)))
    }
}

fn fmt_pair(f: &mut fmt::Formatter<'_>, ns: char, i: u32, j: u32) -> fmt::Result {
    if i <= 9 && j <= 9 {
        write!(f, "{ns}{i}{j}")
    } else {
        write!(f, "{ns}{i}_{j}")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Y(i, j) => fmt_pair(f, 'y', i, j),
            Var::Z(i, j) => fmt_pair(f, 'z', i, j),
        }
    }
}

/// A power product with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(BTreeMap<Var, BigUint>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: Var) -> Self {
        Self::power(v, BigUint::one())
    }

    pub fn power(v: Var, e: BigUint) -> Self {
        let mut m = BTreeMap::new();
        if !e.is_zero() {
            m.insert(v, e);
        }
        Monomial(m)
    }

    pub fn from_powers(it: impl IntoIterator<Item = (Var, BigUint)>) -> Self {
        let mut m = Monomial::one();
        for (v, e) in it {
            m.push(v, e);
        }
        m
    }

    fn push(&mut self, v: Var, e: BigUint) {
        if e.is_zero() {
            return;
        }
        *self.0.entry(v).or_insert_with(BigUint::zero) += e;
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: Var) -> BigUint {
        self.0.get(&v).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn degree(&self) -> BigUint {
        self.0.values().sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    pub fn powers(&self) -> impl Iterator<Item = (Var, &BigUint)> + '_ {
        self.0.iter().map(|(v, e)| (*v, e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.clone();
        for (v, e) in &other.0 {
            m.push(*v, e.clone());
        }
        m
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first; ties broken by the earliest
    /// variable (in `Var` order) where exponents differ, the larger exponent
    /// winning.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    // the side that still has the earlier variable has a
                    // larger exponent there
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            a.next();
                            b.next();
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{v}")?;
            if !e.is_one() {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over the rationals. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v), BigRational::one());
        p
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
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

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> + '_ {
        self.terms.iter()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, q)| (m.clone(), q * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e == 0 {
                return acc;
            }
            base = base.mul(&base);
        }
    }

    pub fn total_degree(&self) -> BigUint {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or_else(BigUint::zero)
    }

    /// True when every term has the same total degree (the zero polynomial
    /// counts as homogeneous).
    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Replaces each assigned variable by a polynomial; unassigned variables
    /// stay symbolic.
    pub fn substitute(&self, assignment: &BTreeMap<Var, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (v, e) in m.powers() {
                match assignment.get(&v) {
                    None => term = term.mul(&Poly::monomial(Monomial::power(v, e.clone()), BigRational::one())),
                    Some(p) => {
                        let exp = usize::try_from(e).expect("exponent exceeds addressable size");
                        term = term.mul(&p.pow(exp));
                    }
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates at a total assignment of every variable that occurs.
    pub fn eval(&self, point: &BTreeMap<Var, BigRational>) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, e) in m.powers() {
                let val = point
                    .get(&v)
                    .ok_or_else(|| Error::UnassignedVariable { var: v.to_string() })?;
                term *= rational_pow(val, e);
            }
            total += term;
        }
        Ok(total)
    }

    pub fn parse(input: &str) -> Result<Poly> {
        PolyParser::new(input).parse()
    }
}

pub fn rational_pow(base: &BigRational, e: &BigUint) -> BigRational {
    if e.is_zero() {
        return BigRational::one();
    }
    let numer: BigInt = Pow::pow(base.numer(), e);
    let denom: BigInt = Pow::pow(base.denom(), e);
    BigRational::new(numer, denom)
}

impl fmt::Display for Poly {
    /// Terms from the largest monomial down; unit coefficients are omitted
    /// in front of a nontrivial monomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Poly::parse(s)
    }
}

struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> PolyParser<'a> {
    fn new(src: &'a str) -> Self {
        PolyParser { src: src.as_bytes(), pos: 0 }
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

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn natural(&mut self) -> Result<BigUint> {
        self.skip_ws();
        Ok(BigUint::from_str(self.digits()?).unwrap())
    }

    fn rational(&mut self) -> Result<BigRational> {
        let numer = BigInt::from(self.natural()?);
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let denom = BigInt::from(self.natural()?);
            if denom.is_zero() {
                return self.err("zero denominator");
            }
            Ok(BigRational::new(numer, denom))
        } else {
            Ok(BigRational::from_integer(numer))
        }
    }

    /// `x<i>` or `y<i><j>`/`z<i><j>`; indices over 9 use the `y<i>_<j>` form.
    fn variable(&mut self) -> Result<Var> {
        let ns = self.src[self.pos] as char;
        self.pos += 1;
        self.skip_ws();
        let first = self.digits()?;
        if ns == 'x' {
            let i: u32 = first.parse().map_err(|_| Error::Parse { pos: self.pos, msg: "index too large".into() })?;
            if i == 0 {
                return self.err("x index must be at least 1");
            }
            return Ok(Var::X(i));
        }
        let (i, j) = if self.src.get(self.pos) == Some(&b'_') {
            self.pos += 1;
            let second = self.digits()?;
            (first.parse::<u32>(), second.parse::<u32>())
        } else {
            if first.len() != 2 {
                return self.err("pair index needs the underscore form when an index exceeds 9");
            }
            (first[..1].parse::<u32>(), first[1..].parse::<u32>())
        };
        let (i, j) = match (i, j) {
            (Ok(i), Ok(j)) => (i, j),
            _ => return self.err("index too large"),
        };
        if i == 0 || j == 0 {
            return self.err("pair indices start at 1");
        }
        match ns {
            'y' => {
                if i > j {
                    self.err("y indices must satisfy i <= j")
                } else {
                    Ok(Var::Y(i, j))
                }
            }
            'z' => {
                if i >= j {
                    self.err("z indices must satisfy i < j")
                } else {
                    Ok(Var::Z(i, j))
                }
            }
            _ => unreachable!(),
        }
    }

    fn factor(&mut self, coeff: &mut BigRational, mono: &mut Monomial) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                *coeff *= self.rational()?;
                Ok(())
            }
            Some(b'x') | Some(b'y') | Some(b'z') => {
                let v = self.variable()?;
                let mut e = BigUint::one();
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    e = self.natural()?;
                    if e.is_zero() {
                        return self.err("exponent must be positive");
                    }
                }
                *mono = mono.mul(&Monomial::power(v, e));
                Ok(())
            }
            _ => self.err("expected a coefficient or a variable"),
        }
    }

    fn parse(&mut self) -> Result<Poly> {
        let mut poly = Poly::zero();
        self.skip_ws();
        if self.pos >= self.src.len() {
            return self.err("empty polynomial");
        }
        loop {
            let mut sign = BigRational::one();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -sign;
                    self.pos += 1;
                }
                _ => {}
            }
            let mut coeff = sign;
            let mut mono = Monomial::one();
            self.factor(&mut coeff, &mut mono)?;
            while self.peek() == Some(b'*') {
                self.pos += 1;
                self.factor(&mut coeff, &mut mono)?;
            }
            poly.add_term(mono, coeff);
            match self.peek() {
                None => break,
                Some(b'+') | Some(b'-') => continue,
                _ => return self.err("expected `+`, `-`, or end of input"),
            }
        }
        Ok(poly)
    }
}

/// Outcome of the Pólya multiplier scan.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyaOutcome {
    /// Least `N` such that `(Σ x_i)^N · p` has only nonnegative coefficients,
    /// together with the expanded product.
    Success { n: u32, product: Poly },
    /// One negative coefficient per scanned `N`, smallest offending monomial
    /// in graded-lex order first.
    Failure { witnesses: Vec<PolyaWitness> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyaWitness {
    pub n: u32,
    pub monomial: Monomial,
    pub coeff: BigRational,
}

fn first_negative(p: &Poly) -> Option<(Monomial, BigRational)> {
    p.terms().find(|(_, c)| c.is_negative()).map(|(m, c)| (m.clone(), c.clone()))
}

fn require_x_homogeneous(p: &Poly) -> Result<()> {
    for v in p.vars() {
        if !matches!(v, Var::X(_)) {
            return Err(Error::WrongNamespace { ns: 'x', var: v.to_string() });
        }
    }
    if !p.is_homogeneous() {
        return Err(Error::NonHomogeneous);
    }
    Ok(())
}

/// Scans `N = 0..=n_max` for the Pólya property of a homogeneous polynomial
/// in the `x` namespace: all coefficients of `(Σ x_i)^N · p` nonnegative.
/// The linear form runs over the variables occurring in `p`.
pub fn polya_test(p: &Poly, n_max: u32) -> Result<PolyaOutcome> {
    require_x_homogeneous(p)?;
    let mut g = Poly::zero();
    for v in p.vars() {
        g = g.add(&Poly::var(v));
    }
    let mut product = p.clone();
    let mut witnesses = Vec::new();
    for n in 0..=n_max {
        if n > 0 {
            product = product.mul(&g);
        }
        match first_negative(&product) {
            None => return Ok(PolyaOutcome::Success { n, product }),
            Some((monomial, coeff)) => witnesses.push(PolyaWitness { n, monomial, coeff }),
        }
    }
    Ok(PolyaOutcome::Failure { witnesses })
}

/// Does the homogeneous `x`-polynomial vanish at a strictly positive point?
/// A nonzero nonnegative homogeneous polynomial with such a zero can never
/// acquire nonnegative coefficients under any Pólya multiplier.
pub fn orthant_zero_check(p: &Poly, point: &[BigRational]) -> Result<bool> {
    require_x_homogeneous(p)?;
    for (i, c) in point.iter().enumerate() {
        if !c.is_positive() {
            return Err(Error::NonpositiveCoordinate { i: i + 1 });
        }
    }
    let mut assignment = BTreeMap::new();
    for v in p.vars() {
        let Var::X(i) = v else { unreachable!() };
        let Some(c) = point.get((i - 1) as usize) else {
            return Err(Error::MissingCoordinate { got: point.len(), need: i });
        };
        assignment.insert(v, c.clone());
    }
    Ok(p.eval(&assignment)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let x1 = Monomial::var(Var::X(1));
        let x2 = Monomial::var(Var::X(2));
        let x1x1 = x1.mul(&x1);
        let x1x2 = x1.mul(&x2);
        let x2x2 = x2.mul(&x2);
        assert!(x1x1 > x1x2 && x1x2 > x2x2);
        assert!(x2x2 > x1, "degree dominates");
        let z = Monomial::var(Var::Z(1, 2));
        let y = Monomial::var(Var::Y(1, 2));
        // within a degree the earlier variable wins, so x > y > z monomials
        assert!(x1 > y && y > z);
        assert!(x1 > x2, "x1 precedes x2 lexicographically");
    }

    #[test]
    fn parse_and_display_round_trip() {
        let cases = [
            "x1^3*x2 - 2*x1^2*x2^2 + x1*x2^3",
            "1/2*y12 + z13^3 - 7",
            "y10_11*x3 + 3/4",
            "0 + x1 - x1", // cancels to zero
        ];
        for s in cases {
            let poly = p(s);
            let shown = poly.to_string();
            assert_eq!(p(&shown), poly, "{s} -> {shown}");
        }
        assert_eq!(p("x1 - x1").to_string(), "0");
    }

    #[test]
    fn display_orders_terms_descending() {
        assert_eq!(p("x2^2 + x1^2 + 2*x1*x2").to_string(), "x1^2 + 2*x1*x2 + x2^2");
    }

    #[test]
    fn parse_rejects_bad_variables() {
        for bad in ["z11", "z21", "y21", "x0", "y123", "q1", "z1_1", "x1^0", "1/0"] {
            assert!(Poly::parse(bad).is_err(), "accepted {bad}");
        }
        // underscore form accepts large indices
        assert!(Poly::parse("z1_23").is_ok());
        assert!(Poly::parse("y2_2").is_ok());
    }

    #[test]
    fn arithmetic_expands_products() {
        let lhs = p("x1 + x2").mul(&p("x1^2 - x1*x2 + x2^2"));
        assert_eq!(lhs, p("x1^3 + x2^3"));
        assert_eq!(p("x1 - x2").pow(2), p("x1^2 - 2*x1*x2 + x2^2"));
    }

    #[test]
    fn substitute_replaces_variables() {
        let f = p("x1^2*x2");
        let mut assign = BTreeMap::new();
        assign.insert(Var::X(1), p("x3 + 1"));
        assert_eq!(f.substitute(&assign), p("x3^2*x2 + 2*x3*x2 + x2"));
        let mut point = BTreeMap::new();
        point.insert(Var::X(1), q("2"));
        point.insert(Var::X(2), q("1/2"));
        assert_eq!(f.eval(&point).unwrap(), q("2"));
    }

    #[test]
    fn polya_finds_the_multiplier_for_a_positive_form() {
        // x1^2 - x1*x2 + x2^2 needs exactly one factor of (x1+x2)
        match polya_test(&p("x1^2 - x1*x2 + x2^2"), 5).unwrap() {
            PolyaOutcome::Success { n, product } => {
                assert_eq!(n, 1);
                assert_eq!(product, p("x1^3 + x2^3"));
            }
            other => panic!("expected success, got {other:?}"),
        }
    }

    #[test]
    fn polya_failure_reports_one_witness_per_n() {
        let f = p("x1^3*x2 - 2*x1^2*x2^2 + x1*x2^3");
        match polya_test(&f, 4).unwrap() {
            PolyaOutcome::Failure { witnesses } => {
                assert_eq!(witnesses.len(), 5);
                assert_eq!(witnesses[0].n, 0);
                assert_eq!(witnesses[0].monomial, Monomial::from_powers([
                    (Var::X(1), BigUint::from(2u32)),
                    (Var::X(2), BigUint::from(2u32)),
                ]));
                assert_eq!(witnesses[0].coeff, q("-2"));
                for (i, w) in witnesses.iter().enumerate() {
                    assert_eq!(w.n as usize, i);
                    assert!(w.coeff.is_negative());
                }
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn polya_rejects_wrong_inputs() {
        assert!(matches!(polya_test(&p("x1 + x2^2"), 3), Err(Error::NonHomogeneous)));
        assert!(matches!(polya_test(&p("y12"), 3), Err(Error::WrongNamespace { .. })));
    }

    #[test]
    fn orthant_zero_check_detects_interior_zeros() {
        let f = p("x1^3*x2 - 2*x1^2*x2^2 + x1*x2^3");
        assert!(orthant_zero_check(&f, &[q("1"), q("1")]).unwrap());
        assert!(!orthant_zero_check(&f, &[q("2"), q("1")]).unwrap());
        assert!(matches!(
            orthant_zero_check(&f, &[q("1"), q("0")]),
            Err(Error::NonpositiveCoordinate { i: 2 })
        ));
        assert!(matches!(
            orthant_zero_check(&f, &[q("1")]),
            Err(Error::MissingCoordinate { .. })
        ));
    }

    #[test]
    fn zero_polynomial_passes_polya_at_n_zero() {
        let zero = Poly::zero();
        assert!(matches!(polya_test(&zero, 2).unwrap(), PolyaOutcome::Success { n: 0, .. }));
    }
}
