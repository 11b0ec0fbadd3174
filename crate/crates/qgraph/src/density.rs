//! Homomorphism counts and densities, exact throughout.
//!
//! Multigraph semantics are weighted: a pattern edge of multiplicity `m`
//! mapped onto a target pair of multiplicity `t` contributes the factor
//! `t^m`, so a collapsed edge (both endpoints to one target vertex)
//! contributes 0 and simple-into-simple recovers the ordinary count. This
//! convention makes the parametrized densities below specialize correctly
//! and gives bounded parameters their expected growth.
//!
//! The parametrized densities return a [`RationalFn`]: a polynomial
//! numerator over the power `g^p` of the vertex-weight sum
//! `g = x_1 + ... + x_s` for the target size `s`.

use crate::algebra::QuantumGraph;
use crate::error::{Error, Result};
use crate::graph::LabeledMultigraph;
use crate::poly::{rational_pow, Monomial, Poly, Var};
use itertools::Itertools;
use num::bigint::{BigInt, BigUint};
use num::traits::Pow;
use num::{BigRational, One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Visits every map from `count` positions into `1..=base` in odometer
/// order (first position cycles fastest).
fn for_each_map(count: usize, base: usize, mut visit: impl FnMut(&[usize])) {
    if base == 0 {
        if count == 0 {
            visit(&[]);
        }
        return;
    }
    let mut phi = vec![1usize; count];
    loop {
        visit(&phi);
        let mut i = 0;
        loop {
            if i == count {
                return;
            }
            if phi[i] < base {
                phi[i] += 1;
                break;
            }
            phi[i] = 1;
            i += 1;
        }
    }
}

fn require_unlabeled(g: &LabeledMultigraph) -> Result<()> {
    if g.num_labels() > 0 {
        return Err(Error::LabeledInput { k: g.num_labels() });
    }
    Ok(())
}

fn require_simple(g: &LabeledMultigraph) -> Result<()> {
    if let Some((&(u, v), m)) = g.edges().iter().find(|(_, m)| !m.is_one()) {
        return Err(Error::NotSimple { u, v, m: m.to_string() });
    }
    Ok(())
}

/// Weight of one vertex map: product over pattern edges of the target
/// multiplicity raised to the pattern multiplicity. Zero on any collapse
/// or missing target pair.
fn map_weight(f: &LabeledMultigraph, g: &LabeledMultigraph, phi: &[usize]) -> BigUint {
    let mut w = BigUint::one();
    for (&(a, b), m) in f.edges() {
        let t = g.multiplicity(phi[a - 1], phi[b - 1]);
        if t.is_zero() {
            return BigUint::zero();
        }
        w *= Pow::pow(&t, m);
    }
    w
}

/// Weighted homomorphism count of `f` into `g`; both unlabeled.
pub fn hom_count(f: &LabeledMultigraph, g: &LabeledMultigraph) -> Result<BigRational> {
    require_unlabeled(f)?;
    require_unlabeled(g)?;
    let mut total = BigUint::zero();
    for_each_map(f.num_vertices(), g.num_vertices(), |phi| {
        total += map_weight(f, g, phi);
    });
    Ok(BigRational::from_integer(total.into()))
}

/// Weighted count over injective vertex maps only.
pub fn inj_count(f: &LabeledMultigraph, g: &LabeledMultigraph) -> Result<BigUint> {
    require_unlabeled(f)?;
    require_unlabeled(g)?;
    let mut total = BigUint::zero();
    for phi in (1..=g.num_vertices()).permutations(f.num_vertices()) {
        total += map_weight(f, g, &phi);
    }
    Ok(total)
}

/// `hom(f,g) / |V_g|^{|V_f|}`.
pub fn t_density(f: &LabeledMultigraph, g: &LabeledMultigraph) -> Result<BigRational> {
    let (nf, ng) = (f.num_vertices(), g.num_vertices());
    if ng == 0 && nf > 0 {
        return Err(Error::EmptyTarget);
    }
    let denom = Pow::pow(&BigInt::from(ng), nf as u32);
    Ok(hom_count(f, g)? / BigRational::from_integer(denom))
}

/// Injective density: `inj(f,g)` over the falling factorial
/// `|V_g| (|V_g|-1) ... (|V_g|-|V_f|+1)`.
pub fn t_inj_density(f: &LabeledMultigraph, g: &LabeledMultigraph) -> Result<BigRational> {
    let (nf, ng) = (f.num_vertices(), g.num_vertices());
    if ng < nf {
        return Err(Error::TargetTooSmall { ng, nf });
    }
    let mut denom = BigInt::one();
    for i in 0..nf {
        denom *= BigInt::from(ng - i);
    }
    Ok(BigRational::new(BigInt::from(inj_count(f, g)?), denom))
}

/// Linear extension of [`t_density`] to quantum graphs.
pub fn t_quantum(a: &QuantumGraph, g: &LabeledMultigraph) -> Result<BigRational> {
    if a.num_labels() != 0 {
        return Err(Error::LabeledInput { k: a.num_labels() });
    }
    let mut total = BigRational::zero();
    for (basis, c) in a.terms() {
        total += c * t_density(basis, g)?;
    }
    Ok(total)
}

/// A polynomial divided by a power of the vertex-weight sum
/// `g = x_1 + ... + x_{target_size}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    numerator: Poly,
    denom_power: usize,
    target_size: usize,
}

impl RationalFn {
    pub fn new(numerator: Poly, denom_power: usize, target_size: usize) -> Self {
        RationalFn { numerator, denom_power, target_size }
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denom_power(&self) -> usize {
        self.denom_power
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    /// The denominator base `g = x_1 + ... + x_{target_size}`.
    pub fn denominator_base(&self) -> Poly {
        vertex_weight_sum(self.target_size)
    }

    /// Exact value at the all-ones vertex weights; the numerator must not
    /// mention any other variables.
    pub fn at_ones(&self) -> Result<BigRational> {
        let point: BTreeMap<Var, BigRational> =
            (1..=self.target_size).map(|i| (Var::X(i as u32), BigRational::one())).collect();
        let num = self.numerator.eval(&point)?;
        if self.target_size == 0 {
            return if self.denom_power == 0 { Ok(num) } else { Err(Error::EmptyTarget) };
        }
        let g = BigRational::from_integer(self.target_size.into());
        Ok(num / rational_pow(&g, &BigUint::from(self.denom_power)))
    }

    /// Substitutes the uniform weights `x_i = 1/n` (and `y_ii = 0` when
    /// `zero_diag`); the denominator becomes exactly 1, so a plain
    /// polynomial remains.
    pub fn specialize_uniform(&self, n: usize, zero_diag: bool) -> Result<Poly> {
        if n != self.target_size {
            return Err(Error::MismatchedTargetSize { built: self.target_size, given: n });
        }
        if n == 0 {
            return Err(Error::EmptyTarget);
        }
        let uniform = BigRational::new(BigInt::one(), BigInt::from(n));
        let mut assignment: BTreeMap<Var, Poly> = (1..=n)
            .map(|i| (Var::X(i as u32), Poly::constant(uniform.clone())))
            .collect();
        if zero_diag {
            for i in 1..=n {
                assignment.insert(Var::Y(i as u32, i as u32), Poly::zero());
            }
        }
        Ok(self.numerator.substitute(&assignment))
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom_power == 0 {
            return write!(f, "{}", self.numerator);
        }
        write!(f, "({}) / ({})", self.numerator, self.denominator_base())?;
        if self.denom_power > 1 {
            write!(f, "^{}", self.denom_power)?;
        }
        Ok(())
    }
}

fn vertex_weight_sum(s: usize) -> Poly {
    let mut g = Poly::zero();
    for i in 1..=s {
        g = g.add(&Poly::var(Var::X(i as u32)));
    }
    g
}

fn check_label_map(k: usize, size: usize, psi: &[usize]) -> Result<()> {
    if psi.len() != k || psi.iter().any(|&w| w < 1 || w > size) {
        return Err(Error::BadLabelMap { k, n: size });
    }
    Ok(())
}

/// Relative parametrized density into a simple graph target: sums, over
/// homomorphisms extending the label map `psi`, the product of `x_{φ(v)}`
/// over the unlabeled vertices of `f`.
pub fn param_density_rel(
    f: &LabeledMultigraph,
    g: &LabeledMultigraph,
    psi: &[usize],
) -> Result<RationalFn> {
    require_simple(f)?;
    require_simple(g)?;
    require_unlabeled(g)?;
    let k = f.num_labels();
    check_label_map(k, g.num_vertices(), psi)?;
    let free = f.num_vertices() - k;
    let mut numerator = Poly::zero();
    for_each_map(free, g.num_vertices(), |tail| {
        let phi =
            |v: usize| if v <= k { psi[v - 1] } else { tail[v - k - 1] };
        for (&(a, b), _) in f.edges() {
            if !g.multiplicity(phi(a), phi(b)).is_one() {
                return;
            }
        }
        let mono = Monomial::from_powers(
            (k + 1..=f.num_vertices()).map(|v| (Var::X(phi(v) as u32), BigUint::one())),
        );
        numerator.add_term(mono, BigRational::one());
    });
    Ok(RationalFn::new(numerator, free, g.num_vertices()))
}

/// Absolute parametrized density into a simple graph target.
pub fn param_density(f: &LabeledMultigraph, g: &LabeledMultigraph) -> Result<RationalFn> {
    require_unlabeled(f)?;
    param_density_rel(f, g, &[])
}

/// Relative parametrized density into the complete weighted target on
/// `[n]`: every vertex map contributes, with `x` factors for unlabeled
/// vertices and `y_{φ(a)φ(b)}^m` for each pattern edge (diagonal `y_ii`
/// included; specialize it away for loopless targets).
pub fn param_density_n_rel(f: &LabeledMultigraph, n: usize, psi: &[usize]) -> Result<RationalFn> {
    if n < 1 {
        return Err(Error::EmptyTarget);
    }
    let k = f.num_labels();
    check_label_map(k, n, psi)?;
    let free = f.num_vertices() - k;
    let mut numerator = Poly::zero();
    for_each_map(free, n, |tail| {
        let phi = |v: usize| if v <= k { psi[v - 1] } else { tail[v - k - 1] };
        let mut powers: Vec<(Var, BigUint)> = (k + 1..=f.num_vertices())
            .map(|v| (Var::X(phi(v) as u32), BigUint::one()))
            .collect();
        for (&(a, b), m) in f.edges() {
            powers.push((Var::y(phi(a) as u32, phi(b) as u32), m.clone()));
        }
        numerator.add_term(Monomial::from_powers(powers), BigRational::one());
    });
    Ok(RationalFn::new(numerator, free, n))
}

/// Absolute parametrized density into the complete weighted target.
pub fn param_density_n(f: &LabeledMultigraph, n: usize) -> Result<RationalFn> {
    require_unlabeled(f)?;
    param_density_n_rel(f, n, &[])
}

/// Lifts a per-graph parametrized density linearly to a quantum graph,
/// bringing all terms over the common denominator `g^max`.
fn lift_quantum(
    a: &QuantumGraph,
    target_size: usize,
    mut per_graph: impl FnMut(&LabeledMultigraph) -> Result<RationalFn>,
) -> Result<RationalFn> {
    if a.num_labels() != 0 {
        return Err(Error::LabeledInput { k: a.num_labels() });
    }
    let mut parts: Vec<(BigRational, RationalFn)> = Vec::new();
    for (basis, c) in a.terms() {
        parts.push((c.clone(), per_graph(basis)?));
    }
    let max_power = parts.iter().map(|(_, r)| r.denom_power).max().unwrap_or(0);
    let g = vertex_weight_sum(target_size);
    let mut numerator = Poly::zero();
    for (c, r) in &parts {
        let lifted = r.numerator.mul(&g.pow(max_power - r.denom_power)).scale(c);
        numerator = numerator.add(&lifted);
    }
    Ok(RationalFn::new(numerator, max_power, target_size))
}

/// Linear extension of [`param_density`] to quantum graphs.
pub fn param_density_quantum(a: &QuantumGraph, g: &LabeledMultigraph) -> Result<RationalFn> {
    lift_quantum(a, g.num_vertices(), |basis| param_density(basis, g))
}

/// Linear extension of [`param_density_n`] to quantum graphs.
pub fn param_density_n_quantum(a: &QuantumGraph, n: usize) -> Result<RationalFn> {
    if n < 1 {
        return Err(Error::EmptyTarget);
    }
    lift_quantum(a, n, |basis| param_density_n(basis, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mode;
    use num::Signed;
    use std::str::FromStr;

    fn mg(s: &str) -> LabeledMultigraph {
        LabeledMultigraph::parse(s).unwrap()
    }

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn plain_counts_and_densities() {
        let k2 = mg("MG 2 0 : 1-2");
        let k3 = mg("MG 3 0 : 1-2, 1-3, 2-3");
        assert_eq!(hom_count(&k2, &k3).unwrap(), q("6"));
        assert_eq!(t_density(&k2, &k3).unwrap(), q("2/3"));
        assert_eq!(t_density(&k3, &k3).unwrap(), q("2/9"));
        assert_eq!(inj_count(&k2, &k3).unwrap(), BigUint::from(6u32));
        assert_eq!(t_inj_density(&k2, &k3).unwrap(), q("1"));

        let k1 = mg("MG 1 0 :");
        assert_eq!(hom_count(&k1, &k3).unwrap(), q("3"));
        assert_eq!(t_density(&k1, &k3).unwrap(), q("1"));
        let empty = mg("MG 0 0 :");
        assert_eq!(hom_count(&empty, &k3).unwrap(), q("1"));
        assert_eq!(hom_count(&empty, &empty).unwrap(), q("1"));
        assert_eq!(t_density(&empty, &empty).unwrap(), q("1"));
        assert_eq!(hom_count(&k2, &empty).unwrap(), q("0"));
    }

    #[test]
    fn weighted_multigraph_counts() {
        let k2 = mg("MG 2 0 : 1-2");
        let bond = mg("MG 2 0 : 1-2*2");
        // each of the two vertex-swapped maps picks up weight 2
        assert_eq!(hom_count(&k2, &bond).unwrap(), q("4"));
        // pattern multiplicity becomes an exponent
        assert_eq!(hom_count(&bond, &bond).unwrap(), q("8"));
        assert_eq!(hom_count(&bond, &k2).unwrap(), q("2"));
    }

    #[test]
    fn density_error_cases() {
        let k2 = mg("MG 2 0 : 1-2");
        let k1 = mg("MG 1 0 :");
        let empty = mg("MG 0 0 :");
        assert!(matches!(t_density(&k2, &empty), Err(Error::EmptyTarget)));
        assert!(matches!(t_inj_density(&k2, &k1), Err(Error::TargetTooSmall { ng: 1, nf: 2 })));
        let labeled = mg("MG 2 1 : 1-2");
        assert!(matches!(hom_count(&labeled, &k2), Err(Error::LabeledInput { k: 1 })));
    }

    #[test]
    fn densities_are_multiplicative_and_isolate_indifferent() {
        let k2 = mg("MG 2 0 : 1-2");
        let k3 = mg("MG 3 0 : 1-2, 1-3, 2-3");
        let two_edges = mg("MG 4 0 : 1-2, 3-4");
        assert_eq!(
            t_density(&two_edges, &k3).unwrap(),
            t_density(&k2, &k3).unwrap() * t_density(&k2, &k3).unwrap()
        );
        let with_isolate = mg("MG 3 0 : 1-2");
        assert_eq!(t_density(&with_isolate, &k3).unwrap(), t_density(&k2, &k3).unwrap());
    }

    #[test]
    fn goodman_combination_vanishes_on_the_triangle() {
        let a = QuantumGraph::from_terms(
            0,
            Mode::Simple,
            [
                (mg("MG 3 0 : 1-2, 1-3, 2-3"), q("1")),
                (mg("MG 4 0 : 1-2, 3-4"), q("-2")),
                (mg("MG 2 0 : 1-2"), q("1")),
            ],
        )
        .unwrap();
        let k3 = mg("MG 3 0 : 1-2, 1-3, 2-3");
        assert_eq!(t_quantum(&a, &k3).unwrap(), q("0"));
        assert_eq!(t_quantum(&QuantumGraph::zero(0, Mode::Simple), &k3).unwrap(), q("0"));
    }

    #[test]
    fn param_density_small_cases() {
        let k2 = mg("MG 2 0 : 1-2");
        let r = param_density(&k2, &k2).unwrap();
        assert_eq!(r.numerator(), &p("2*x1*x2"));
        assert_eq!(r.denom_power(), 2);
        assert_eq!(r.target_size(), 2);
        assert_eq!(r.at_ones().unwrap(), t_density(&k2, &k2).unwrap());

        let k1 = mg("MG 1 0 :");
        let r1 = param_density(&k1, &k2).unwrap();
        assert_eq!(r1.numerator(), &p("x1 + x2"));
        assert_eq!(r1.denom_power(), 1);
    }

    #[test]
    fn clearing_denominators_gives_the_quartic_obstruction() {
        let a = QuantumGraph::from_terms(
            0,
            Mode::Simple,
            [(mg("MG 3 0 : 1-3, 2-3"), q("1")), (mg("MG 4 0 : 1-4, 2-3"), q("-1"))],
        )
        .unwrap();
        let k2 = mg("MG 2 0 : 1-2");
        let r = param_density_quantum(&a, &k2).unwrap();
        assert_eq!(r.denom_power(), 4);
        assert_eq!(r.numerator(), &p("x1^3*x2 - 2*x1^2*x2^2 + x1*x2^3"));
        assert_eq!(r.at_ones().unwrap(), q("0"));
    }

    #[test]
    fn relative_density_unit_and_decomposition() {
        let k2 = mg("MG 2 0 : 1-2");
        let e2 = LabeledMultigraph::unit(2);
        let r = param_density_rel(&e2, &k2, &[1, 2]).unwrap();
        assert_eq!(r.numerator(), &Poly::one());
        assert_eq!(r.denom_power(), 0);

        // summing the relative versions weighted by their label placement
        // recovers the absolute density of the unlabeled pattern
        let f = mg("MG 2 1 : 1-2");
        let mut total = Poly::zero();
        for psi in 1..=2usize {
            let rel = param_density_rel(&f, &k2, &[psi]).unwrap();
            assert_eq!(rel.denom_power(), 1);
            let weight = Poly::var(Var::X(psi as u32));
            total = total.add(&rel.numerator().mul(&weight));
        }
        let absolute = param_density(&f.unlabel(), &k2).unwrap();
        assert_eq!(total, absolute.numerator().clone());
        assert_eq!(absolute.denom_power(), 2);
    }

    #[test]
    fn complete_target_density_lists_all_maps() {
        let k2 = mg("MG 2 0 : 1-2");
        let r = param_density_n(&k2, 2).unwrap();
        assert_eq!(r.numerator(), &p("x1^2*y11 + 2*x1*x2*y12 + x2^2*y22"));
        assert_eq!(r.denom_power(), 2);

        let labeled_bond = mg("MG 2 2 : 1-2*3");
        let rel = param_density_n_rel(&labeled_bond, 4, &[1, 2]).unwrap();
        assert_eq!(rel.numerator(), &p("y12^3"));
        assert_eq!(rel.denom_power(), 0);
    }

    #[test]
    fn complete_target_density_evaluates_to_hom_count() {
        let f = mg("MG 3 0 : 1-2*2, 2-3");
        let g = mg("MG 3 0 : 1-2, 1-3*3");
        let r = param_density_n(&f, 3).unwrap();
        let mut point: BTreeMap<Var, BigRational> = BTreeMap::new();
        for i in 1..=3u32 {
            point.insert(Var::X(i), q("1"));
            for j in i..=3u32 {
                point.insert(
                    Var::Y(i, j),
                    BigRational::from_integer(g.multiplicity(i as usize, j as usize).into()),
                );
            }
        }
        assert_eq!(r.numerator().eval(&point).unwrap(), hom_count(&f, &g).unwrap());
    }

    #[test]
    fn uniform_specialization_clears_the_denominator() {
        let k2 = mg("MG 2 0 : 1-2");
        let r = param_density_n(&k2, 2).unwrap();
        assert_eq!(
            r.specialize_uniform(2, false).unwrap(),
            p("1/4*y11 + 1/2*y12 + 1/4*y22")
        );
        assert_eq!(r.specialize_uniform(2, true).unwrap(), p("1/2*y12"));
        assert!(matches!(
            r.specialize_uniform(3, true),
            Err(Error::MismatchedTargetSize { built: 2, given: 3 })
        ));

        let empty = mg("MG 0 0 :");
        let re = param_density_n(&empty, 3).unwrap();
        assert_eq!(re.specialize_uniform(3, true).unwrap(), Poly::one());
    }

    #[test]
    fn bounded_parameters_grow_at_most_geometrically() {
        // a target with maximum multiplicity d keeps |t(K2^j)| below d^j
        let g = mg("MG 3 0 : 1-2*3, 1-3, 2-3*2");
        let d = q("3");
        let mut dpow = q("1");
        for j in 0..=8u64 {
            let t = t_density(&LabeledMultigraph::parallel_edges(&BigUint::from(j)), &g).unwrap();
            assert!(t.abs() <= dpow, "j = {j}");
            dpow *= &d;
        }
    }

    #[test]
    fn rational_fn_displays_compactly() {
        let k2 = mg("MG 2 0 : 1-2");
        let r = param_density(&k2, &k2).unwrap();
        assert_eq!(r.to_string(), "(2*x1*x2) / (x1 + x2)^2");
        let unit = RationalFn::new(Poly::one(), 0, 2);
        assert_eq!(unit.to_string(), "1");
    }
}
