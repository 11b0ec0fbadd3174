//! Randomized structural laws. The acceptance suite pins exact values on
//! known instances; these tests throw arbitrary small graphs at the shape
//! invariants instead: canonical forms must ignore vertex numbering, gluing
//! must be a commutative monoid, densities must factor the way the algebra
//! says they do.

use num::{BigRational, BigUint};
use proptest::prelude::*;
use qgraph::{hom_count, param_density, t_density, LabeledMultigraph, Mode, QuantumGraph};

/// Construction data kept alongside the graph so tests can renumber
/// vertices and rebuild from scratch.
#[derive(Clone, Debug)]
struct RawGraph {
    n: usize,
    k: usize,
    edges: Vec<((usize, usize), u64)>,
}

impl RawGraph {
    fn build(&self) -> LabeledMultigraph {
        LabeledMultigraph::new(
            self.n,
            self.k,
            self.edges.iter().map(|&(e, m)| (e, BigUint::from(m))),
        )
        .unwrap()
    }
}

fn arb_raw_k(max_n: usize, k: usize, max_mult: u64) -> impl Strategy<Value = RawGraph> {
    (k.max(1)..=max_n).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> =
            (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        let mults = proptest::collection::vec(0..=max_mult, pairs.len());
        mults.prop_map(move |ms| RawGraph {
            n,
            k,
            edges: pairs
                .iter()
                .zip(&ms)
                .filter(|&(_, &m)| m > 0)
                .map(|(&e, &m)| (e, m))
                .collect(),
        })
    })
}

fn arb_raw(max_n: usize, max_k: usize, max_mult: u64) -> impl Strategy<Value = RawGraph> {
    (0..=max_k).prop_flat_map(move |k| arb_raw_k(max_n, k, max_mult))
}

/// A raw graph plus a permutation of its unlabeled vertex numbers.
fn arb_raw_with_shuffle(
    max_n: usize,
    max_k: usize,
    max_mult: u64,
) -> impl Strategy<Value = (RawGraph, Vec<usize>)> {
    arb_raw(max_n, max_k, max_mult).prop_flat_map(|raw| {
        let free: Vec<usize> = (raw.k + 1..=raw.n).collect();
        (Just(raw), Just(free).prop_shuffle())
    })
}

fn arb_quantum(k: usize, mode: Mode) -> impl Strategy<Value = QuantumGraph> {
    proptest::collection::vec((arb_raw_k(k + 2, k, 2), -3i64..=3), 1..=3).prop_map(
        move |terms| {
            QuantumGraph::from_terms(
                k,
                mode,
                terms
                    .iter()
                    .map(|(raw, c)| (raw.build(), BigRational::from_integer((*c).into()))),
            )
            .unwrap()
        },
    )
}

fn disjoint_union(a: &LabeledMultigraph, b: &LabeledMultigraph) -> LabeledMultigraph {
    let shift = a.num_vertices();
    let mut edges: Vec<((usize, usize), BigUint)> =
        a.edges().iter().map(|(&e, m)| (e, m.clone())).collect();
    edges.extend(b.edges().iter().map(|(&(u, v), m)| ((u + shift, v + shift), m.clone())));
    LabeledMultigraph::new(a.num_vertices() + b.num_vertices(), 0, edges).unwrap()
}

proptest! {
    /// Renumbering the unlabeled vertices never changes the canonical form,
    /// and canonicalization is an idempotent projection.
    #[test]
    fn canonical_form_ignores_unlabeled_numbering(
        (raw, perm) in arb_raw_with_shuffle(6, 3, 3),
    ) {
        let g = raw.build();
        let relocate = |v: usize| if v <= raw.k { v } else { perm[v - raw.k - 1] };
        let moved = RawGraph {
            n: raw.n,
            k: raw.k,
            edges: raw
                .edges
                .iter()
                .map(|&((a, b), m)| ((relocate(a), relocate(b)), m))
                .collect(),
        }
        .build();
        let c = g.canonical_form();
        prop_assert_eq!(&moved.canonical_form(), &c);
        prop_assert!(c.is_canonical());
        prop_assert_eq!(&c.canonical_form(), &c);
        prop_assert_eq!(c.num_vertices(), g.num_vertices());
        prop_assert_eq!(c.num_labels(), g.num_labels());
        prop_assert_eq!(c.total_edge_multiplicity(), g.total_edge_multiplicity());
    }

    /// The line format prints exactly what it parses.
    #[test]
    fn graph_display_parse_roundtrip(raw in arb_raw(6, 3, 3)) {
        let g = raw.build().canonical_form();
        prop_assert_eq!(&LabeledMultigraph::parse(&g.to_string()).unwrap(), &g);
    }

    /// Gluing is a commutative monoid on graphs sharing a label set, with
    /// the fully labeled edgeless graph as unit.
    #[test]
    fn glue_is_a_commutative_monoid(
        (k, a, b, c) in (1usize..=2).prop_flat_map(|k| {
            (Just(k), arb_raw_k(k + 2, k, 2), arb_raw_k(k + 2, k, 2), arb_raw_k(k + 2, k, 2))
        }),
        simple in any::<bool>(),
    ) {
        let mode = if simple { Mode::Simple } else { Mode::Multi };
        let (a, b, c) = (a.build(), b.build(), c.build());
        let unit = LabeledMultigraph::unit(k);
        let expect = if simple { a.clamped().canonical_form() } else { a.canonical_form() };
        prop_assert_eq!(&a.glue(&unit, mode).unwrap(), &expect);
        prop_assert_eq!(&a.glue(&b, mode).unwrap(), &b.glue(&a, mode).unwrap());
        prop_assert_eq!(
            &a.glue(&b, mode).unwrap().glue(&c, mode).unwrap(),
            &a.glue(&b.glue(&c, mode).unwrap(), mode).unwrap()
        );
    }

    /// Simple-mode gluing is multigraph gluing with multiplicities clamped.
    #[test]
    fn simple_glue_clamps_multi_glue(
        (a, b) in (0usize..=2).prop_flat_map(|k| {
            (arb_raw_k(k + 2, k, 3), arb_raw_k(k + 2, k, 3))
        }),
    ) {
        let (a, b) = (a.build(), b.build());
        prop_assert_eq!(
            &a.glue(&b, Mode::Simple).unwrap(),
            &a.glue(&b, Mode::Multi).unwrap().clamped().canonical_form()
        );
    }

    /// Removing isolated vertices is idempotent and only rescales
    /// homomorphism counts by the target size, leaving densities alone.
    #[test]
    fn isolated_vertices_only_rescale(f in arb_raw_k(4, 0, 3), g in arb_raw_k(4, 0, 2)) {
        let (f, g) = (f.build(), g.build());
        let s = f.strip_isolated().unwrap();
        prop_assert_eq!(&s.strip_isolated().unwrap(), &s);
        let dropped = f.num_vertices() - s.num_vertices();
        let scale = BigRational::from_integer(g.num_vertices().pow(dropped as u32).into());
        prop_assert_eq!(hom_count(&f, &g).unwrap(), hom_count(&s, &g).unwrap() * scale);
        prop_assert_eq!(t_density(&f, &g).unwrap(), t_density(&s, &g).unwrap());
    }

    /// Plain densities multiply over disjoint unions of patterns.
    #[test]
    fn density_multiplies_over_disjoint_union(
        f1 in arb_raw_k(3, 0, 2),
        f2 in arb_raw_k(3, 0, 2),
        g in arb_raw_k(4, 0, 2),
    ) {
        let (f1, f2, g) = (f1.build(), f2.build(), g.build());
        prop_assert_eq!(
            t_density(&disjoint_union(&f1, &f2), &g).unwrap(),
            t_density(&f1, &g).unwrap() * t_density(&f2, &g).unwrap()
        );
    }

    /// Substituting 1 for every vertex variable collapses the parametrized
    /// density to the plain one.
    #[test]
    fn parametrized_density_at_ones_is_plain(
        f in arb_raw_k(4, 0, 1),
        g in arb_raw_k(4, 0, 1),
    ) {
        let (f, g) = (f.build(), g.build());
        prop_assert_eq!(
            param_density(&f, &g).unwrap().at_ones().unwrap(),
            t_density(&f, &g).unwrap()
        );
    }

    /// Quantum graphs print exactly what they parse, in both modes.
    #[test]
    fn quantum_display_parse_roundtrip(
        a in (0usize..=2, any::<bool>()).prop_flat_map(|(k, simple)| {
            arb_quantum(k, if simple { Mode::Simple } else { Mode::Multi })
        }),
    ) {
        prop_assume!(!a.is_zero());
        prop_assert_eq!(&QuantumGraph::parse(&a.to_string()).unwrap(), &a);
    }
}
