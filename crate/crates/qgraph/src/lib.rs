//! Exact computation with labeled multigraphs and their quantum algebras.
//!
//! A *quantum graph* is a formal rational linear combination of labeled
//! multigraphs, multiplied by gluing along labels. This crate provides the
//! algebra itself, homomorphism densities (plain, injective, parametrized),
//! the Pólya nonnegativity scan, and two exact certificate formats for
//! nonnegativity (sums of squares and preorder certificates) together with
//! numeric search routines whose results are only ever reported after an
//! exact rational re-verification.
//!
//! ```
//! use qgraph::{hom_count, t_density, LabeledMultigraph};
//!
//! let k2 = LabeledMultigraph::parse("MG 2 0 : 1-2").unwrap();
//! let k3 = LabeledMultigraph::parse("MG 3 0 : 1-2, 1-3, 2-3").unwrap();
//! assert_eq!(hom_count(&k2, &k3).unwrap().to_string(), "6");
//! assert_eq!(t_density(&k2, &k3).unwrap().to_string(), "2/3");
//! ```

pub mod algebra;
pub mod cert;
pub mod density;
pub mod error;
pub mod graph;
pub mod poly;
pub mod sdp;

pub use crate::algebra::QuantumGraph;
pub use crate::cert::{
    is_sos_poly, preorder_search, rationalize_gram, sos_search_multi, sos_search_simple,
    verify_preorder, verify_sos, CertFile, Certificate, MultiSearchOutcome, PerturbSpec,
    PreorderBlock, PreorderCert, PreorderOutcome, SearchOptions, Sign, SimpleSearchOutcome,
    SosCert, SosPolyOutcome, VerifyOutcome,
};
pub use crate::density::{
    hom_count, inj_count, param_density, param_density_n, param_density_n_quantum,
    param_density_n_rel, param_density_quantum, param_density_rel, t_density, t_inj_density,
    t_quantum, RationalFn,
};
pub use crate::error::{Error, Result};
pub use crate::graph::{LabeledMultigraph, Mode};
pub use crate::poly::{
    orthant_zero_check, polya_test, Monomial, Poly, PolyaOutcome, PolyaWitness, Var,
};
pub use crate::sdp::{
    in_convex_hull, psd_check_exact, sdp_solve, solve_or_certify, LinearOutcome, PsdOutcome,
    SdpOptions, SdpProblem, SdpSolution, SdpStatus,
};

/// Exact rational scalar used throughout the algebra layer.
pub type Rational = num::BigRational;
