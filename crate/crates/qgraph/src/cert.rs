//! Certificate data model, exact verification, and certificate search.
//!
//! A sum-of-squares certificate is re-expanded in the gluing algebra and
//! compared with the (possibly perturbed) target up to labels and isolated
//! vertices; a preorder certificate is expanded through its exact Gram
//! matrices. Searches may run floating-point semidefinite solves
//! internally, but a certificate is only returned after its exact verifier
//! accepts it; numeric evidence that fails to rationalize is reported as
//! Indeterminate rather than upgraded.

use crate::algebra::QuantumGraph;
use crate::error::{Error, Result};
use crate::graph::{LabeledMultigraph, Mode};
use crate::poly::{Monomial, Poly, Var};
use crate::sdp::{
    in_convex_hull, psd_check_exact, sdp_solve, solve_or_certify, LinearOutcome, Mat, PsdOutcome,
    SdpConstraint, SdpOptions, SdpProblem, SdpStatus,
};
use nalgebra::DMatrix;
use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Numeric infeasibility evidence below this margin is not reported.
pub const NOT_SOS_MARGIN: f64 = 1e-6;

// Denominator caps tried in order when rounding numeric data to exact
// rationals; coarse caps first so clean solutions yield small certificates.
const DENOM_LADDER: [u64; 14] =
    [1, 2, 3, 4, 6, 8, 12, 16, 32, 64, 256, 4096, 1_000_000, 1_000_000_000_000];

/// How a target is softened before a certificate is asked to match it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerturbSpec {
    None,
    /// target + eps * (empty graph)
    PlainEps(BigRational),
    /// target + eps * sum over i <= order of K2^(2i) / i!
    Slow { eps: BigRational, order: u32 },
    /// target + eps * (1 + d^(-2 order) * K2^(2 order))
    Bounded { eps: BigRational, bound: BigRational, order: u32 },
}

impl PerturbSpec {
    pub fn apply(&self, target: &QuantumGraph) -> Result<QuantumGraph> {
        match self {
            PerturbSpec::None => Ok(target.clone()),
            PerturbSpec::PlainEps(eps) => {
                if !eps.is_positive() {
                    return Err(Error::NonpositiveEpsilon);
                }
                let one = QuantumGraph::one(target.num_labels(), target.mode());
                target.add(&one.scale(eps))
            }
            PerturbSpec::Slow { eps, order } => target.perturb_slow(eps, *order),
            PerturbSpec::Bounded { eps, bound, order } => {
                target.perturb_bounded(eps, bound, *order)
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { pos: 0, msg: msg.to_string() };
        let rat = |t: &str| {
            BigRational::from_str(t).map_err(|_| bad(&format!("bad rational {t:?}")))
        };
        let order = |t: &str| t.parse::<u32>().map_err(|_| bad(&format!("bad order {t:?}")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["none"] => Ok(PerturbSpec::None),
            ["eps", e] => Ok(PerturbSpec::PlainEps(rat(e)?)),
            ["slow", e, r] => Ok(PerturbSpec::Slow { eps: rat(e)?, order: order(r)? }),
            ["bounded", e, d, r] => Ok(PerturbSpec::Bounded {
                eps: rat(e)?,
                bound: rat(d)?,
                order: order(r)?,
            }),
            _ => Err(bad(&format!("bad perturbation {s:?}"))),
        }
    }
}

impl fmt::Display for PerturbSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbSpec::None => write!(f, "none"),
            PerturbSpec::PlainEps(e) => write!(f, "eps:{e}"),
            PerturbSpec::Slow { eps, order } => write!(f, "slow:{eps}:{order}"),
            PerturbSpec::Bounded { eps, bound, order } => {
                write!(f, "bounded:{eps}:{bound}:{order}")
            }
        }
    }
}

/// Sum of weighted squares: sigma = sum of w_i * c_i^2 with w_i > 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SosCert {
    pub k: usize,
    pub mode: Mode,
    pub summands: Vec<(BigRational, QuantumGraph)>,
}

impl SosCert {
    pub fn new(
        k: usize,
        mode: Mode,
        summands: Vec<(BigRational, QuantumGraph)>,
    ) -> Result<Self> {
        for (w, c) in &summands {
            if !w.is_positive() {
                return Err(Error::NonpositiveWeight);
            }
            if c.num_labels() != k {
                return Err(Error::LabelMismatch { left: k, right: c.num_labels() });
            }
            if c.mode() != mode {
                return Err(Error::ModeMismatch { left: mode, right: c.mode() });
            }
        }
        Ok(SosCert { k, mode, summands })
    }

    /// Expands the certificate in the gluing algebra.
    pub fn sigma(&self) -> Result<QuantumGraph> {
        let mut acc = QuantumGraph::zero(self.k, self.mode);
        for (w, c) in &self.summands {
            if !w.is_positive() {
                return Err(Error::NonpositiveWeight);
            }
            acc = acc.add(&c.mul(c)?.scale(w))?;
        }
        Ok(acc)
    }

    /// True when every summand lives in the fully labeled part of the
    /// algebra.
    pub fn restricted_degree0(&self) -> bool {
        self.summands
            .iter()
            .all(|(_, c)| c.terms().all(|(g, _)| g.num_vertices() == g.num_labels()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Generator d + z_ij (Plus) or d - z_ij (Minus) of the edge-bound preorder.
pub type Generator = (usize, usize, Sign);

fn generator_text(g: &Generator) -> String {
    let sign = if g.2 == Sign::Plus { '+' } else { '-' };
    format!("{}{}", sign, Var::z(g.0 as u32, g.1 as u32).map(|v| v.to_string()).unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderBlock {
    pub gens: BTreeSet<Generator>,
    pub basis: Vec<Monomial>,
    pub gram: Mat,
}

/// Element of the preorder generated by d +- z_ij: one PSD Gram block per
/// generator subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderCert {
    pub k: usize,
    pub d: BigRational,
    pub blocks: Vec<PreorderBlock>,
}

impl PreorderCert {
    /// Expands sigma = sum over blocks of (m^T G m) * prod of generators,
    /// as a quantum multigraph.
    pub fn sigma(&self) -> Result<QuantumGraph> {
        let mut total = Poly::zero();
        for block in &self.blocks {
            let n = block.basis.len();
            if block.gram.len() != n || block.gram.iter().any(|r| r.len() != n) {
                return Err(Error::GramShape {
                    rows: block.gram.len(),
                    cols: block.gram.first().map(|r| r.len()).unwrap_or(0),
                    basis: n,
                });
            }
            let mut quad = Poly::zero();
            for i in 0..n {
                for j in 0..n {
                    if !block.gram[i][j].is_zero() {
                        quad.add_term(
                            block.basis[i].mul(&block.basis[j]),
                            block.gram[i][j].clone(),
                        );
                    }
                }
            }
            let mut mult = Poly::one();
            for g in &block.gens {
                mult = mult.mul(&generator_poly(&self.d, g)?);
            }
            total = total.add(&quad.mul(&mult));
        }
        QuantumGraph::from_z_poly(&total, self.k, Mode::Multi)
    }
}

fn generator_poly(d: &BigRational, g: &Generator) -> Result<Poly> {
    let z = Poly::var(Var::z(g.0 as u32, g.1 as u32)?);
    let c = Poly::constant(d.clone());
    Ok(match g.2 {
        Sign::Plus => c.add(&z),
        Sign::Minus => c.sub(&z),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Accept,
    /// Exact nonzero difference sigma - perturbed target, in iso-normal
    /// form.
    Reject(QuantumGraph),
}

/// Checks sigma = perturbed target up to labels and isolated vertices.
pub fn verify_sos(
    cert: &SosCert,
    target: &QuantumGraph,
    perturb: &PerturbSpec,
) -> Result<VerifyOutcome> {
    if target.num_labels() != 0 {
        return Err(Error::LabeledInput { k: target.num_labels() });
    }
    if cert.mode != target.mode() {
        return Err(Error::ModeMismatch { left: cert.mode, right: target.mode() });
    }
    let lhs = cert.sigma()?.iso_normal_form();
    let rhs = perturb.apply(target)?.iso_normal_form();
    if lhs == rhs {
        Ok(VerifyOutcome::Accept)
    } else {
        Ok(VerifyOutcome::Reject(lhs.sub(&rhs)?))
    }
}

/// Checks every Gram block exactly for positive semidefiniteness, then
/// compares the expansion with the perturbed target as in `verify_sos`.
pub fn verify_preorder(
    cert: &PreorderCert,
    target: &QuantumGraph,
    perturb: &PerturbSpec,
) -> Result<VerifyOutcome> {
    if target.num_labels() != 0 {
        return Err(Error::LabeledInput { k: target.num_labels() });
    }
    if target.mode() != Mode::Multi {
        return Err(Error::ModeMismatch { left: Mode::Multi, right: target.mode() });
    }
    if !cert.d.is_positive() {
        return Err(Error::NonpositiveScale);
    }
    for block in &cert.blocks {
        for &(i, j, _) in &block.gens {
            if i == j {
                return Err(Error::LoopEdge { v: i });
            }
            if i < 1 || j < i || j > cert.k {
                return Err(Error::VarOutOfRange {
                    var: generator_text(&(i, j, Sign::Plus)),
                    k: cert.k,
                });
            }
        }
        let n = block.basis.len();
        if block.gram.len() != n || block.gram.iter().any(|r| r.len() != n) {
            return Err(Error::GramShape {
                rows: block.gram.len(),
                cols: block.gram.first().map(|r| r.len()).unwrap_or(0),
                basis: n,
            });
        }
        if let PsdOutcome::NotPsd { witness, .. } = psd_check_exact(&block.gram)? {
            return Err(Error::NonPsdGram {
                witness: witness.iter().map(|w| w.to_string()).collect(),
            });
        }
    }
    let lhs = cert.sigma()?.iso_normal_form();
    let rhs = perturb.apply(target)?.iso_normal_form();
    if lhs == rhs {
        Ok(VerifyOutcome::Accept)
    } else {
        Ok(VerifyOutcome::Reject(lhs.sub(&rhs)?))
    }
}

/// Knobs shared by the numeric searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Cap on the total semidefinite dimension of one search.
    pub dim_cap: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { dim_cap: 200, tol: 1e-8, max_iter: 200 }
    }
}

impl SearchOptions {
    fn sdp(&self) -> SdpOptions {
        SdpOptions { tol: self.tol, max_iter: self.max_iter, dim_cap: self.dim_cap }
    }
}

fn pair_list(k: usize) -> Vec<(usize, usize)> {
    (1..=k).flat_map(|i| (i + 1..=k).map(move |j| (i, j))).collect()
}

fn zvar(i: usize, j: usize) -> Var {
    Var::z(i as u32, j as u32).expect("i < j by construction")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleSearchOutcome {
    Certificate(SosCert),
    /// The minimum of the evaluation (target plus epsilon) over the
    /// variety, with the first point attaining it.
    Infeasible { min_value: BigRational, witness: BTreeMap<(usize, usize), bool> },
}

/// Finite-variety search in the simple setting: the target embeds into the
/// fully labeled algebra at level `k`, is symmetrized, and is evaluated
/// exactly on all edge indicator points. Feasibility is equivalent to the
/// minimum clearing `-eps`, and the certificate is assembled from point
/// indicator polynomials, so no numerics are involved.
pub fn sos_search_simple(
    target: &QuantumGraph,
    k: usize,
    eps: &BigRational,
) -> Result<SimpleSearchOutcome> {
    if target.num_labels() != 0 {
        return Err(Error::LabeledInput { k: target.num_labels() });
    }
    if target.mode() != Mode::Simple {
        return Err(Error::ModeMismatch { left: Mode::Simple, right: target.mode() });
    }
    if k < 2 {
        return Err(Error::KTooSmall { k });
    }
    if eps.is_negative() {
        return Err(Error::NonpositiveEpsilon);
    }
    let pairs = pair_list(k);
    // 2^pairs evaluation points
    if pairs.len() > 24 {
        return Err(Error::DimensionCap { needed: pairs.len(), cap: 24 });
    }
    let mut embedded = QuantumGraph::zero(k, Mode::Simple);
    for (g, c) in target.terms() {
        if g.num_vertices() > k {
            return Err(Error::BasisGraphTooLarge { n: g.num_vertices(), k });
        }
        let lifted = LabeledMultigraph::new(
            k,
            k,
            g.edges().iter().map(|(&e, m)| (e, m.clone())),
        )?;
        embedded = embedded.add(&QuantumGraph::from_graph(lifted, Mode::Simple).scale(c))?;
    }
    let sym = embedded.reynolds();

    let index_of: BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let masked: Vec<(u32, BigRational)> = sym
        .terms()
        .map(|(g, c)| {
            let mask = g.edges().keys().fold(0u32, |m, e| m | 1 << index_of[e]);
            (mask, c.clone())
        })
        .collect();
    let value_at = |point: u32| -> BigRational {
        masked
            .iter()
            .filter(|(mask, _)| mask & !point == 0)
            .map(|(_, c)| c.clone())
            .sum::<BigRational>()
            + eps
    };

    let points = 1u32 << pairs.len();
    let mut min_point = 0u32;
    let mut min_value = value_at(0);
    for p in 1..points {
        let v = value_at(p);
        if v < min_value {
            min_value = v;
            min_point = p;
        }
    }
    if min_value.is_negative() {
        let witness = pairs
            .iter()
            .enumerate()
            .map(|(i, &pair)| (pair, min_point >> i & 1 == 1))
            .collect();
        return Ok(SimpleSearchOutcome::Infeasible { min_value, witness });
    }

    // indicator of one variety point; squares to itself in simple mode
    let edge = |i: usize, j: usize| -> Result<QuantumGraph> {
        Ok(QuantumGraph::from_graph(
            LabeledMultigraph::simple(k, k, &[(i, j)])?,
            Mode::Simple,
        ))
    };
    let unit = QuantumGraph::one(k, Mode::Simple);
    let mut summands = Vec::new();
    for p in 0..points {
        let w = value_at(p);
        if w.is_zero() {
            continue;
        }
        let mut delta = unit.clone();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let e = edge(a, b)?;
            let factor = if p >> i & 1 == 1 { e } else { unit.sub(&e)? };
            delta = delta.mul(&factor)?;
        }
        summands.push((w, delta));
    }
    Ok(SimpleSearchOutcome::Certificate(SosCert::new(k, Mode::Simple, summands)?))
}

// exact linear constraint on block Gram variables
type ExactRow = (Vec<Mat>, BigRational);

fn zero_mat(n: usize) -> Mat {
    vec![vec![BigRational::zero(); n]; n]
}

fn mat_dot(a: &Mat, b: &Mat) -> BigRational {
    let mut t = BigRational::zero();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            if !x.is_zero() && !y.is_zero() {
                t += x * y;
            }
        }
    }
    t
}

fn mat_add_scaled(a: &mut Mat, s: &BigRational, b: &Mat) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            if !y.is_zero() {
                *x += s * y;
            }
        }
    }
}

fn binom(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn monomials_up_to(vars: &[Var], max_deg: usize) -> Vec<Monomial> {
    fn go(
        vars: &[Var],
        idx: usize,
        budget: usize,
        cur: &mut Vec<(Var, usize)>,
        out: &mut Vec<Monomial>,
    ) {
        if idx == vars.len() {
            out.push(Monomial::from_powers(
                cur.iter().map(|&(v, e)| (v, BigUint::from(e))),
            ));
            return;
        }
        for e in 0..=budget {
            cur.push((vars[idx], e));
            go(vars, idx + 1, budget - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(vars, 0, max_deg, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Iso class of the multigraph a z-monomial denotes at level k.
fn class_of(
    m: &Monomial,
    k: usize,
    cache: &mut BTreeMap<Monomial, LabeledMultigraph>,
) -> Result<LabeledMultigraph> {
    if let Some(g) = cache.get(m) {
        return Ok(g.clone());
    }
    let qg = QuantumGraph::from_z_poly(
        &Poly::monomial(m.clone(), BigRational::one()),
        k,
        Mode::Multi,
    )?;
    let nf = qg.iso_normal_form();
    let g = nf
        .terms()
        .next()
        .map(|(g, _)| g.clone())
        .expect("a monomial denotes one graph");
    cache.insert(m.clone(), g.clone());
    Ok(g)
}

/// Builds the per-class constraint rows for block Gram variables: for each
/// block b with basis m and multiplier P_b, the expansion of
/// sum over i,j of G_ij m_i m_j P_b must match the right-hand side class
/// by class. Returns the class list and the aligned rows.
fn assemble_rows<C: Ord + Clone>(
    bases: &[Vec<Monomial>],
    multipliers: &[Poly],
    mut classify: impl FnMut(&Monomial) -> Result<C>,
    rhs_of: impl Fn(&C) -> BigRational,
    extras: impl IntoIterator<Item = C>,
) -> Result<(Vec<C>, Vec<ExactRow>)> {
    let dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let fresh = || -> Vec<Mat> { dims.iter().map(|&d| zero_mat(d)).collect() };
    let mut acc: BTreeMap<C, Vec<Mat>> = BTreeMap::new();
    for c in extras {
        acc.entry(c).or_insert_with(fresh);
    }
    for (b, basis) in bases.iter().enumerate() {
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let prod = Poly::monomial(basis[i].mul(&basis[j]), BigRational::one())
                    .mul(&multipliers[b]);
                for (mono, coeff) in prod.terms() {
                    let class = classify(mono)?;
                    let mats = acc.entry(class).or_insert_with(fresh);
                    mats[b][i][j] += coeff;
                    if i != j {
                        mats[b][j][i] += coeff;
                    }
                }
            }
        }
    }
    let mut classes = Vec::with_capacity(acc.len());
    let mut rows = Vec::with_capacity(acc.len());
    for (class, mats) in acc {
        let rhs = rhs_of(&class);
        classes.push(class);
        rows.push((mats, rhs));
    }
    Ok((classes, rows))
}

/// Flattens the rows to an exact affine system over the upper-triangular
/// Gram entries (off-diagonal coefficients doubled).
fn affine_system(rows: &[ExactRow]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut lhs = Vec::with_capacity(rows.len());
    let mut rhs = Vec::with_capacity(rows.len());
    for (mats, b) in rows {
        let mut row = Vec::new();
        for m in mats {
            for i in 0..m.len() {
                for j in i..m.len() {
                    row.push(if i == j { m[i][i].clone() } else { &two * &m[i][j] });
                }
            }
        }
        lhs.push(row);
        rhs.push(b.clone());
    }
    (lhs, rhs)
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn to_sdp_problem(rows: &[ExactRow], dims: &[usize]) -> SdpProblem {
    let constraints = rows
        .iter()
        .map(|(mats, b)| SdpConstraint {
            blocks: mats
                .iter()
                .map(|m| {
                    DMatrix::from_fn(m.len(), m.len(), |i, j| rat_f64(&m[i][j]))
                })
                .collect(),
            rhs: rat_f64(b),
        })
        .collect();
    SdpProblem { block_dims: dims.to_vec(), constraints }
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions.
fn approx_rational(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() || x.abs() > 9e15 {
        return None;
    }
    let neg = x < 0.0;
    let mut t = x.abs();
    let cap = BigInt::from(max_den);
    let mut a = t.floor();
    let (mut h1, mut k1) = (BigInt::one(), BigInt::zero());
    let (mut h, mut k) = (BigInt::from(a as i64), BigInt::one());
    for _ in 0..64 {
        let frac = t - a;
        if frac < 1e-13 {
            break;
        }
        t = 1.0 / frac;
        if !t.is_finite() || t > 9e15 {
            break;
        }
        a = t.floor();
        let h2 = BigInt::from(a as i64) * &h + &h1;
        let k2 = BigInt::from(a as i64) * &k + &k1;
        if k2 > cap {
            break;
        }
        h1 = std::mem::replace(&mut h, h2);
        k1 = std::mem::replace(&mut k, k2);
    }
    let r = BigRational::new(h, k);
    Some(if neg { -r } else { r })
}

fn round_blocks(qs: &[DMatrix<f64>], cap: u64) -> Option<Vec<Mat>> {
    let mut out = Vec::with_capacity(qs.len());
    for q in qs {
        let n = q.nrows();
        let mut m = zero_mat(n);
        for i in 0..n {
            for j in i..n {
                let r = approx_rational(0.5 * (q[(i, j)] + q[(j, i)]), cap)?;
                m[i][j] = r.clone();
                m[j][i] = r;
            }
        }
        out.push(m);
    }
    Some(out)
}

/// Rounds the numeric blocks onto the constraint set and checks positive
/// semidefiniteness exactly; tries coarse denominators first. None is a
/// legitimate outcome and the caller reports Indeterminate.
fn rationalize_blocks(qs: &[DMatrix<f64>], rows: &[ExactRow]) -> Option<Vec<Mat>> {
    let m = rows.len();
    // normal matrix of the exact least-norm projection, shared by rungs
    let mut normal = vec![vec![BigRational::zero(); m]; m];
    for a in 0..m {
        for b in a..m {
            let mut v = BigRational::zero();
            for blk in 0..qs.len() {
                v += mat_dot(&rows[a].0[blk], &rows[b].0[blk]);
            }
            normal[a][b] = v.clone();
            normal[b][a] = v;
        }
    }
    'ladder: for cap in DENOM_LADDER {
        let Some(mut fixed) = round_blocks(qs, cap) else {
            return None;
        };
        let resid: Vec<BigRational> = rows
            .iter()
            .map(|(mats, b)| {
                let mut v = b.clone();
                for (blk, mat) in mats.iter().enumerate() {
                    v -= mat_dot(mat, &fixed[blk]);
                }
                v
            })
            .collect();
        let mu = match solve_or_certify(&normal, &resid) {
            Ok(LinearOutcome::Solution(mu)) => mu,
            _ => continue,
        };
        for (a, coeff) in mu.iter().enumerate() {
            if !coeff.is_zero() {
                for (blk, mat) in rows[a].0.iter().enumerate() {
                    mat_add_scaled(&mut fixed[blk], coeff, mat);
                }
            }
        }
        for blk in &fixed {
            match psd_check_exact(blk) {
                Ok(PsdOutcome::Psd(_)) => {}
                _ => continue 'ladder,
            }
        }
        return Some(fixed);
    }
    None
}

/// Rounds a numeric Gram matrix to an exact one satisfying the given
/// constraints, verified PSD; None when no rung of the denominator ladder
/// survives the exact checks.
pub fn rationalize_gram(
    q: &DMatrix<f64>,
    constraints: &[(Mat, BigRational)],
) -> Option<Mat> {
    let rows: Vec<ExactRow> =
        constraints.iter().map(|(m, b)| (vec![m.clone()], b.clone())).collect();
    rationalize_blocks(std::slice::from_ref(q), &rows).map(|mut v| v.pop().expect("one block"))
}

/// Splits an exactly PSD matrix into weighted square generators over the
/// given basis; None when the matrix is not PSD.
fn weighted_squares(gram: &Mat, basis: &[Monomial]) -> Result<Option<Vec<(BigRational, Poly)>>> {
    match psd_check_exact(gram)? {
        PsdOutcome::NotPsd { .. } => Ok(None),
        PsdOutcome::Psd(dec) => {
            let mut out = Vec::new();
            for t in 0..dec.d.len() {
                if dec.d[t].is_zero() {
                    continue;
                }
                let mut p = Poly::zero();
                for i in 0..basis.len() {
                    if !dec.l[i][t].is_zero() {
                        p.add_term(basis[dec.perm[i]].clone(), dec.l[i][t].clone());
                    }
                }
                if !p.is_zero() {
                    out.push((dec.d[t].clone(), p));
                }
            }
            Ok(Some(out))
        }
    }
}

/// Tries to turn a numeric dual ray into an exact refutation: y with
/// -sum y_a A_a ⪰ 0 and y.b > 0 proves no PSD solution exists.
fn exact_ray(dual: &[f64], rows: &[ExactRow], nblocks: usize) -> Option<Vec<BigRational>> {
    let scale = dual.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for cap in [16u64, 256, 4096, 1_000_000] {
        let y: Option<Vec<BigRational>> =
            dual.iter().map(|&v| approx_rational(v / scale, cap)).collect();
        let Some(y) = y else { continue };
        if y.iter().all(|v| v.is_zero()) {
            continue;
        }
        let obj: BigRational = y.iter().zip(rows).map(|(v, (_, b))| v * b).sum();
        if !obj.is_positive() {
            continue;
        }
        let dims: Vec<usize> = (0..nblocks).map(|b| rows[0].0[b].len()).collect();
        let mut w: Vec<Mat> = dims.iter().map(|&d| zero_mat(d)).collect();
        for (a, (mats, _)) in rows.iter().enumerate() {
            if !y[a].is_zero() {
                let neg = -y[a].clone();
                for (blk, mat) in mats.iter().enumerate() {
                    mat_add_scaled(&mut w[blk], &neg, mat);
                }
            }
        }
        if w.iter().all(|m| matches!(psd_check_exact(m), Ok(PsdOutcome::Psd(_)))) {
            return Some(y);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultiSearchOutcome {
    Certificate(SosCert),
    /// Exact refutation: the listed combination of class constraints has
    /// no solution (affine Farkas or PSD-level ray).
    Infeasible { refutation: Vec<(LabeledMultigraph, BigRational)> },
    Indeterminate { detail: String },
}

/// Gram-matrix search for a sum of squares matching the perturbed target
/// in the multigraph setting. Every returned certificate has passed
/// `verify_sos` exactly.
pub fn sos_search_multi(
    target: &QuantumGraph,
    k: usize,
    max_degree: usize,
    perturb: &PerturbSpec,
    opts: &SearchOptions,
) -> Result<MultiSearchOutcome> {
    if target.num_labels() != 0 {
        return Err(Error::LabeledInput { k: target.num_labels() });
    }
    if target.mode() != Mode::Multi {
        return Err(Error::ModeMismatch { left: Mode::Multi, right: target.mode() });
    }
    if k < 2 {
        return Err(Error::KTooSmall { k });
    }
    if max_degree < 1 {
        return Err(Error::DegreeTooSmall);
    }
    let goal = perturb.apply(target)?.iso_normal_form();
    let zvars: Vec<Var> = pair_list(k).into_iter().map(|(i, j)| zvar(i, j)).collect();
    let count = binom((zvars.len() + max_degree) as u128, max_degree as u128);
    if count > opts.dim_cap as u128 {
        return Err(Error::DimensionCap {
            needed: count.try_into().unwrap_or(usize::MAX),
            cap: opts.dim_cap,
        });
    }
    let basis = monomials_up_to(&zvars, max_degree);
    let mut cache = BTreeMap::new();
    let (classes, rows) = assemble_rows(
        std::slice::from_ref(&basis),
        &[Poly::one()],
        |m| class_of(m, k, &mut cache),
        |c| goal.coeff(c),
        goal.terms().map(|(g, _)| g.clone()),
    )?;

    let (lhs, rhs) = affine_system(&rows);
    if let LinearOutcome::Inconsistent(y) = solve_or_certify(&lhs, &rhs)? {
        let sign = {
            let dot: BigRational = y.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            if dot.is_negative() {
                -BigRational::one()
            } else {
                BigRational::one()
            }
        };
        let refutation = classes
            .iter()
            .zip(&y)
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (c.clone(), &sign * v))
            .collect();
        return Ok(MultiSearchOutcome::Infeasible { refutation });
    }

    let problem = to_sdp_problem(&rows, &[basis.len()]);
    let sol = sdp_solve(&problem, &opts.sdp())?;
    match sol.status {
        SdpStatus::Feasible => {
            let Some(grams) = rationalize_blocks(&sol.primal, &rows) else {
                return Ok(MultiSearchOutcome::Indeterminate {
                    detail: "numeric solution did not rationalize".to_string(),
                });
            };
            let Some(squares) = weighted_squares(&grams[0], &basis)? else {
                return Ok(MultiSearchOutcome::Indeterminate {
                    detail: "rationalized Gram matrix lost semidefiniteness".to_string(),
                });
            };
            let mut summands = Vec::with_capacity(squares.len());
            for (w, p) in squares {
                summands.push((w, QuantumGraph::from_z_poly(&p, k, Mode::Multi)?));
            }
            let cert = SosCert::new(k, Mode::Multi, summands)?;
            match verify_sos(&cert, target, perturb)? {
                VerifyOutcome::Accept => Ok(MultiSearchOutcome::Certificate(cert)),
                VerifyOutcome::Reject(_) => Ok(MultiSearchOutcome::Indeterminate {
                    detail: "candidate certificate failed exact verification".to_string(),
                }),
            }
        }
        SdpStatus::InfeasibleRay => {
            if let Some(y) = exact_ray(&sol.dual, &rows, 1) {
                let refutation = classes
                    .iter()
                    .zip(&y)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(c, v)| (c.clone(), v.clone()))
                    .collect();
                Ok(MultiSearchOutcome::Infeasible { refutation })
            } else {
                Ok(MultiSearchOutcome::Indeterminate {
                    detail: format!(
                        "numeric infeasibility (margin {:.3e}) did not rationalize",
                        -sol.lambda
                    ),
                })
            }
        }
        SdpStatus::Indeterminate => Ok(MultiSearchOutcome::Indeterminate {
            detail: format!(
                "solver stalled (primal {:.3e}, dual {:.3e}, mu {:.3e})",
                sol.residual_primal, sol.residual_dual, sol.mu
            ),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreorderOutcome {
    Certificate(PreorderCert),
    Indeterminate { detail: String },
}

/// Searches for a preorder certificate: one PSD Gram block per generator
/// subset, with total degree bounded by 2 * max_degree. The empty subset
/// (plain sums of squares) is tried alone first; the full family is the
/// fallback. Every returned certificate has passed `verify_preorder`.
pub fn preorder_search(
    target: &QuantumGraph,
    k: usize,
    max_degree: usize,
    d: &BigRational,
    eps: &BigRational,
    opts: &SearchOptions,
) -> Result<PreorderOutcome> {
    if target.num_labels() != 0 {
        return Err(Error::LabeledInput { k: target.num_labels() });
    }
    if target.mode() != Mode::Multi {
        return Err(Error::ModeMismatch { left: Mode::Multi, right: target.mode() });
    }
    if k < 2 {
        return Err(Error::KTooSmall { k });
    }
    if max_degree < 1 {
        return Err(Error::DegreeTooSmall);
    }
    if d < &BigRational::one() {
        return Err(Error::BoundBelowOne);
    }
    if eps.is_negative() {
        return Err(Error::NonpositiveEpsilon);
    }
    let perturb = if eps.is_positive() {
        PerturbSpec::PlainEps(eps.clone())
    } else {
        PerturbSpec::None
    };
    let goal = perturb.apply(target)?.iso_normal_form();

    let pairs = pair_list(k);
    let gens_all: Vec<Generator> = pairs
        .iter()
        .flat_map(|&(i, j)| [(i, j, Sign::Plus), (i, j, Sign::Minus)])
        .collect();
    let zn = pairs.len() as u128;
    let basis_count = |bdeg: usize| binom(zn + bdeg as u128, bdeg as u128);

    // the empty subset alone, then the full family
    let full: Vec<BTreeSet<Generator>> = {
        let max_size = (2 * max_degree).min(gens_all.len());
        let mut total: u128 = 0;
        for s in 0..=max_size {
            let contribution = binom(gens_all.len() as u128, s as u128)
                .saturating_mul(basis_count((2 * max_degree - s) / 2));
            total = total.saturating_add(contribution);
        }
        if total > opts.dim_cap as u128 {
            return Err(Error::DimensionCap {
                needed: total.try_into().unwrap_or(usize::MAX),
                cap: opts.dim_cap,
            });
        }
        use itertools::Itertools;
        (0..=max_size)
            .flat_map(|s| {
                gens_all
                    .iter()
                    .copied()
                    .combinations(s)
                    .map(|c| c.into_iter().collect::<BTreeSet<_>>())
            })
            .collect()
    };

    let mut detail = String::new();
    for family in [&full[..1], &full[..]] {
        match preorder_attempt(target, &goal, k, max_degree, d, &perturb, family, opts)? {
            Ok(cert) => return Ok(PreorderOutcome::Certificate(cert)),
            Err(msg) => detail = msg,
        }
    }
    Ok(PreorderOutcome::Indeterminate { detail })
}

fn preorder_attempt(
    target: &QuantumGraph,
    goal: &QuantumGraph,
    k: usize,
    max_degree: usize,
    d: &BigRational,
    perturb: &PerturbSpec,
    subsets: &[BTreeSet<Generator>],
    opts: &SearchOptions,
) -> Result<std::result::Result<PreorderCert, String>> {
    let zvars: Vec<Var> = pair_list(k).into_iter().map(|(i, j)| zvar(i, j)).collect();
    let mut bases = Vec::with_capacity(subsets.len());
    let mut mults = Vec::with_capacity(subsets.len());
    for e in subsets {
        let bdeg = (2 * max_degree - e.len()) / 2;
        bases.push(monomials_up_to(&zvars, bdeg));
        let mut mult = Poly::one();
        for g in e {
            mult = mult.mul(&generator_poly(d, g)?);
        }
        mults.push(mult);
    }
    let mut cache = BTreeMap::new();
    let (_, rows) = assemble_rows(
        &bases,
        &mults,
        |m| class_of(m, k, &mut cache),
        |c| goal.coeff(c),
        goal.terms().map(|(g, _)| g.clone()),
    )?;

    let (lhs, rhs) = affine_system(&rows);
    if let LinearOutcome::Inconsistent(_) = solve_or_certify(&lhs, &rhs)? {
        return Ok(Err("no expansion of this shape matches the target".to_string()));
    }

    let dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let problem = to_sdp_problem(&rows, &dims);
    let sol = sdp_solve(&problem, &opts.sdp())?;
    if sol.status != SdpStatus::Feasible {
        return Ok(Err(format!(
            "solver outcome {:?} (lambda {:.3e})",
            sol.status, sol.lambda
        )));
    }
    let Some(grams) = rationalize_blocks(&sol.primal, &rows) else {
        return Ok(Err("numeric solution did not rationalize".to_string()));
    };
    let mut blocks = Vec::new();
    for ((gens, basis), gram) in subsets.iter().zip(&bases).zip(grams) {
        let Some((basis, gram)) = trim_zero_rows(basis, gram) else {
            continue;
        };
        blocks.push(PreorderBlock { gens: gens.clone(), basis, gram });
    }
    let cert = PreorderCert { k, d: d.clone(), blocks };
    match verify_preorder(&cert, target, perturb)? {
        VerifyOutcome::Accept => Ok(Ok(cert)),
        VerifyOutcome::Reject(_) => {
            Ok(Err("candidate certificate failed exact verification".to_string()))
        }
    }
}

/// Drops basis entries whose Gram diagonal vanishes (exact PSD forces the
/// whole row to zero); None when nothing remains.
fn trim_zero_rows(basis: &[Monomial], gram: Mat) -> Option<(Vec<Monomial>, Mat)> {
    let keep: Vec<usize> = (0..basis.len()).filter(|&i| !gram[i][i].is_zero()).collect();
    if keep.is_empty() {
        return None;
    }
    let basis = keep.iter().map(|&i| basis[i].clone()).collect();
    let gram = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| gram[i][j].clone()).collect())
        .collect();
    Some((basis, gram))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SosPolyOutcome {
    Sos { basis: Vec<Monomial>, gram: Mat },
    /// Separating functional on coefficients: nonnegative on squares,
    /// positive on the input. Exact when found by elimination, numeric
    /// (margin above `NOT_SOS_MARGIN`) otherwise.
    NotSos { witness: Vec<(Monomial, BigRational)>, margin: f64 },
    Indeterminate { detail: String },
}

/// Decides whether a polynomial is a sum of squares, over the monomials
/// compatible with half its Newton polytope.
pub fn is_sos_poly(p: &Poly, opts: &SearchOptions) -> Result<SosPolyOutcome> {
    if p.is_zero() {
        return Ok(SosPolyOutcome::Sos { basis: Vec::new(), gram: Vec::new() });
    }
    let deg = p.total_degree();
    if (&deg % 2u32) == BigUint::one() {
        return Err(Error::OddDegree { deg: deg.to_string() });
    }
    let vars: Vec<Var> = p.vars().into_iter().collect();
    let support: Vec<Vec<BigRational>> = p
        .terms()
        .map(|(m, _)| {
            vars.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(m.exponent(v))))
                .collect()
        })
        .collect();
    let var_caps: Vec<usize> = vars
        .iter()
        .map(|&v| {
            p.terms()
                .map(|(m, _)| m.exponent(v).to_usize().unwrap_or(usize::MAX))
                .max()
                .unwrap_or(0)
                / 2
        })
        .collect();
    let half = (deg / 2u32).to_usize().unwrap_or(0);

    fn enumerate(
        caps: &[usize],
        idx: usize,
        budget: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if idx == caps.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=caps[idx].min(budget) {
            cur.push(e);
            enumerate(caps, idx + 1, budget - e, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    enumerate(&var_caps, 0, half, &mut Vec::new(), &mut raw);
    let mut basis = Vec::new();
    for exps in raw {
        let doubled: Vec<BigRational> = exps
            .iter()
            .map(|&e| BigRational::from_integer(BigInt::from(2 * e)))
            .collect();
        if in_convex_hull(&doubled, &support)? {
            basis.push(Monomial::from_powers(
                vars.iter().zip(&exps).map(|(&v, &e)| (v, BigUint::from(e))),
            ));
        }
    }
    basis.sort();
    if basis.len() > opts.dim_cap {
        return Err(Error::DimensionCap { needed: basis.len(), cap: opts.dim_cap });
    }

    let (classes, rows) = assemble_rows(
        std::slice::from_ref(&basis),
        &[Poly::one()],
        |m| Ok(m.clone()),
        |m| p.coeff(m),
        p.terms().map(|(m, _)| m.clone()),
    )?;

    let (lhs, rhs) = affine_system(&rows);
    if let LinearOutcome::Inconsistent(y) = solve_or_certify(&lhs, &rhs)? {
        let dot: BigRational = y.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        let sign = if dot.is_negative() { -BigRational::one() } else { BigRational::one() };
        let scale = y.iter().map(|v| v.abs()).max().unwrap_or_else(BigRational::one);
        let witness: Vec<(Monomial, BigRational)> = classes
            .iter()
            .zip(&y)
            .filter(|(_, v)| !v.is_zero())
            .map(|(m, v)| (m.clone(), &sign * v / &scale))
            .collect();
        let margin = rat_f64(&(dot.abs() / scale));
        return Ok(SosPolyOutcome::NotSos { witness, margin });
    }

    let problem = to_sdp_problem(&rows, &[basis.len()]);
    let sol = sdp_solve(&problem, &opts.sdp())?;
    match sol.status {
        SdpStatus::Feasible => {
            let Some(grams) = rationalize_blocks(&sol.primal, &rows) else {
                return Ok(SosPolyOutcome::Indeterminate {
                    detail: "numeric solution did not rationalize".to_string(),
                });
            };
            let gram = grams.into_iter().next().expect("one block");
            // exact reconstruction gate
            let mut rebuilt = Poly::zero();
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    if !gram[i][j].is_zero() {
                        rebuilt.add_term(basis[i].mul(&basis[j]), gram[i][j].clone());
                    }
                }
            }
            if &rebuilt == p {
                Ok(SosPolyOutcome::Sos { basis, gram })
            } else {
                Ok(SosPolyOutcome::Indeterminate {
                    detail: "rationalized Gram matrix missed the polynomial".to_string(),
                })
            }
        }
        SdpStatus::InfeasibleRay => {
            let margin = -sol.lambda;
            if let Some(y) = exact_ray(&sol.dual, &rows, 1) {
                let witness = classes
                    .iter()
                    .zip(&y)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(m, v)| (m.clone(), v.clone()))
                    .collect();
                Ok(SosPolyOutcome::NotSos { witness, margin })
            } else if margin > NOT_SOS_MARGIN {
                let scale = sol.dual.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
                let witness = classes
                    .iter()
                    .zip(&sol.dual)
                    .filter(|(_, v)| v.abs() > 1e-12)
                    .map(|(m, v)| {
                        let r = approx_rational(v / scale, 4096)
                            .unwrap_or_else(BigRational::zero);
                        (m.clone(), r)
                    })
                    .collect();
                Ok(SosPolyOutcome::NotSos { witness, margin })
            } else {
                Ok(SosPolyOutcome::Indeterminate {
                    detail: format!("margin {margin:.3e} below the reporting threshold"),
                })
            }
        }
        SdpStatus::Indeterminate => Ok(SosPolyOutcome::Indeterminate {
            detail: format!(
                "solver stalled (primal {:.3e}, dual {:.3e}, mu {:.3e})",
                sol.residual_primal, sol.residual_dual, sol.mu
            ),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Sos(SosCert),
    Preorder(PreorderCert),
}

/// A certificate file: the certificate plus the perturbation it was issued
/// against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertFile {
    pub certificate: Certificate,
    pub perturb: PerturbSpec,
}

impl CertFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_string())?)
    }

    pub fn parse(input: &str) -> Result<Self> {
        let err = |pos: usize, msg: String| Error::Parse { pos, msg };
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let Some((hpos, header)) = lines.next() else {
            return Err(err(1, "empty certificate file".to_string()));
        };
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let field = |key: &str| -> Result<&str> {
            tokens
                .iter()
                .find_map(|t| t.strip_prefix(key))
                .ok_or_else(|| err(hpos, format!("missing {key}... in header")))
        };
        let k: usize = field("k=")?
            .parse()
            .map_err(|_| err(hpos, "bad k in header".to_string()))?;
        let perturb = PerturbSpec::parse(field("perturb=")?)
            .map_err(|e| err(hpos, e.to_string()))?;
        match tokens.first() {
            Some(&"sos") => {
                let mode: Mode = field("mode=")?
                    .parse()
                    .map_err(|_| err(hpos, "bad mode in header".to_string()))?;
                let mut summands: Vec<(BigRational, QuantumGraph)> = Vec::new();
                let mut current: Option<(BigRational, Vec<(LabeledMultigraph, BigRational)>)> =
                    None;
                let flush = |cur: Option<(BigRational, Vec<(LabeledMultigraph, BigRational)>)>,
                             out: &mut Vec<(BigRational, QuantumGraph)>|
                 -> Result<()> {
                    if let Some((w, terms)) = cur {
                        out.push((w, QuantumGraph::from_terms(k, mode, terms)?));
                    }
                    Ok(())
                };
                for (pos, line) in lines {
                    if let Some(rest) = line.strip_prefix("summand") {
                        flush(current.take(), &mut summands)?;
                        let w = BigRational::from_str(rest.trim())
                            .map_err(|_| err(pos, format!("bad weight {:?}", rest.trim())))?;
                        current = Some((w, Vec::new()));
                    } else {
                        let Some((c, g)) = line.split_once('|') else {
                            return Err(err(pos, "expected `coeff | graph`".to_string()));
                        };
                        let coeff = BigRational::from_str(c.trim())
                            .map_err(|_| err(pos, format!("bad coefficient {:?}", c.trim())))?;
                        let graph = LabeledMultigraph::parse(g.trim())
                            .map_err(|e| err(pos, e.to_string()))?;
                        match current.as_mut() {
                            Some((_, terms)) => terms.push((graph, coeff)),
                            None => {
                                return Err(err(pos, "term before any summand".to_string()))
                            }
                        }
                    }
                }
                flush(current.take(), &mut summands)?;
                Ok(CertFile {
                    certificate: Certificate::Sos(SosCert::new(k, mode, summands)?),
                    perturb,
                })
            }
            Some(&"preorder") => {
                let d = BigRational::from_str(field("d=")?)
                    .map_err(|_| err(hpos, "bad d in header".to_string()))?;
                let mut blocks = Vec::new();
                let mut lines = lines.peekable();
                while let Some((pos, line)) = lines.next() {
                    let Some(glist) = line.strip_prefix("gens:") else {
                        return Err(err(pos, "expected a `gens:` line".to_string()));
                    };
                    let mut gens = BTreeSet::new();
                    for tok in glist.split_whitespace() {
                        gens.insert(parse_generator(tok, pos)?);
                    }
                    let Some((bpos, bline)) = lines.next() else {
                        return Err(err(pos, "missing `basis:` line".to_string()));
                    };
                    let Some(blist) = bline.strip_prefix("basis:") else {
                        return Err(err(bpos, "expected a `basis:` line".to_string()));
                    };
                    let mut basis = Vec::new();
                    for tok in blist.split_whitespace() {
                        basis.push(parse_monomial(tok, bpos)?);
                    }
                    let mut gram = Vec::with_capacity(basis.len());
                    for _ in 0..basis.len() {
                        let Some((rpos, row)) = lines.next() else {
                            return Err(err(bpos, "missing Gram row".to_string()));
                        };
                        let entries: Result<Vec<BigRational>> = row
                            .split_whitespace()
                            .map(|t| {
                                BigRational::from_str(t)
                                    .map_err(|_| err(rpos, format!("bad entry {t:?}")))
                            })
                            .collect();
                        let entries = entries?;
                        if entries.len() != basis.len() {
                            return Err(err(
                                rpos,
                                format!("row has {} entries, basis has {}", entries.len(), basis.len()),
                            ));
                        }
                        gram.push(entries);
                    }
                    blocks.push(PreorderBlock { gens, basis, gram });
                }
                Ok(CertFile {
                    certificate: Certificate::Preorder(PreorderCert { k, d, blocks }),
                    perturb,
                })
            }
            _ => Err(err(hpos, "expected `sos` or `preorder` header".to_string())),
        }
    }
}

fn parse_generator(tok: &str, pos: usize) -> Result<Generator> {
    let err = |msg: String| Error::Parse { pos, msg };
    let (sign, rest) = match tok.as_bytes().first() {
        Some(b'+') => (Sign::Plus, &tok[1..]),
        Some(b'-') => (Sign::Minus, &tok[1..]),
        _ => return Err(err(format!("generator {tok:?} must start with + or -"))),
    };
    let m = parse_monomial(rest, pos)?;
    let mut powers = m.powers();
    match (powers.next(), powers.next()) {
        (Some((Var::Z(i, j), e)), None) if e.is_one() => Ok((i as usize, j as usize, sign)),
        _ => Err(err(format!("generator {tok:?} is not a single edge variable"))),
    }
}

fn parse_monomial(tok: &str, pos: usize) -> Result<Monomial> {
    let err = |msg: String| Error::Parse { pos, msg };
    let p = Poly::parse(tok).map_err(|e| err(e.to_string()))?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if c.is_one() => Ok(m.clone()),
        _ => Err(err(format!("{tok:?} is not a monomial"))),
    }
}

impl fmt::Display for CertFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.certificate {
            Certificate::Sos(cert) => {
                writeln!(f, "sos k={} mode={} perturb={}", cert.k, cert.mode, self.perturb)?;
                for (w, c) in &cert.summands {
                    writeln!(f, "summand {w}")?;
                    for (g, coeff) in c.terms() {
                        writeln!(f, "{coeff} | {g}")?;
                    }
                }
                Ok(())
            }
            Certificate::Preorder(cert) => {
                writeln!(f, "preorder k={} d={} perturb={}", cert.k, cert.d, self.perturb)?;
                for block in &cert.blocks {
                    write!(f, "gens:")?;
                    for g in &block.gens {
                        write!(f, " {}", generator_text(g))?;
                    }
                    writeln!(f)?;
                    write!(f, "basis:")?;
                    for m in &block.basis {
                        write!(f, " {m}")?;
                    }
                    writeln!(f)?;
                    for row in &block.gram {
                        let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                        writeln!(f, "{}", cells.join(" "))?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn mg(s: &str) -> LabeledMultigraph {
        LabeledMultigraph::parse(s).unwrap()
    }

    fn qg(k: usize, mode: Mode, terms: &[(&str, &str)]) -> QuantumGraph {
        QuantumGraph::from_terms(
            k,
            mode,
            terms.iter().map(|&(g, c)| (mg(g), q(c))),
        )
        .unwrap()
    }

    fn goodman_square_cert() -> SosCert {
        // u = edge with one labeled endpoint, v = labeled vertex next to an
        // edge; (u - v)^2 matches cherry minus one matching
        let u = qg(1, Mode::Simple, &[("MG 2 1 : 1-2", "1")]);
        let v = qg(1, Mode::Simple, &[("MG 3 1 : 2-3", "1")]);
        SosCert::new(1, Mode::Simple, vec![(q("1"), u.sub(&v).unwrap())]).unwrap()
    }

    fn goodman_target() -> QuantumGraph {
        qg(0, Mode::Simple, &[("MG 3 0 : 1-3, 2-3", "1"), ("MG 4 0 : 1-4, 2-3", "-1")])
    }

    #[test]
    fn perturb_specs_round_trip_and_apply() {
        for text in ["none", "eps:1/2", "slow:1/10:3", "bounded:1/2:2:4"] {
            let spec = PerturbSpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!(PerturbSpec::parse("eps").is_err());
        assert!(PerturbSpec::parse("slow:1/2").is_err());

        let target = qg(0, Mode::Simple, &[("MG 2 0 : 1-2", "1")]);
        let spec = PerturbSpec::PlainEps(q("1/3"));
        let moved = spec.apply(&target).unwrap();
        assert_eq!(moved.coeff(&mg("MG 0 0 :")), q("1/3"));
        assert!(matches!(
            PerturbSpec::PlainEps(q("0")).apply(&target),
            Err(Error::NonpositiveEpsilon)
        ));
    }

    #[test]
    fn verify_sos_accepts_the_goodman_square() {
        let cert = goodman_square_cert();
        let outcome = verify_sos(&cert, &goodman_target(), &PerturbSpec::None).unwrap();
        assert_eq!(outcome, VerifyOutcome::Accept);
        assert!(!cert.restricted_degree0());
    }

    #[test]
    fn verify_sos_rejects_with_the_exact_difference() {
        let cert = goodman_square_cert();
        let off = goodman_target()
            .add(&qg(0, Mode::Simple, &[("MG 2 0 : 1-2", "1")]))
            .unwrap();
        match verify_sos(&cert, &off, &PerturbSpec::None).unwrap() {
            VerifyOutcome::Reject(diff) => {
                assert_eq!(diff, qg(0, Mode::Simple, &[("MG 2 0 : 1-2", "-1")]));
            }
            other => panic!("expected Reject, got {other:?}"),
        }
    }

    #[test]
    fn verify_sos_unit_and_mode_mismatch() {
        let unit = QuantumGraph::one(2, Mode::Simple);
        let cert = SosCert::new(2, Mode::Simple, vec![(q("1"), unit)]).unwrap();
        let target = qg(0, Mode::Simple, &[("MG 0 0 :", "1")]);
        assert_eq!(verify_sos(&cert, &target, &PerturbSpec::None).unwrap(), VerifyOutcome::Accept);

        let multi_target = qg(0, Mode::Multi, &[("MG 0 0 :", "1")]);
        assert!(matches!(
            verify_sos(&cert, &multi_target, &PerturbSpec::None),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn plain_eps_matches_manual_shift() {
        // accepting with eps perturbation is the same as shifting the
        // target by eps times the empty graph
        let unit = QuantumGraph::one(2, Mode::Simple);
        let cert = SosCert::new(2, Mode::Simple, vec![(q("3/2"), unit)]).unwrap();
        let half = qg(0, Mode::Simple, &[("MG 0 0 :", "1")]);
        let spec = PerturbSpec::PlainEps(q("1/2"));
        let direct = verify_sos(&cert, &half, &spec).unwrap();
        let shifted = half.add(&QuantumGraph::one(0, Mode::Simple).scale(&q("1/2"))).unwrap();
        let manual = verify_sos(&cert, &shifted, &PerturbSpec::None).unwrap();
        assert_eq!(direct, manual);
        assert_eq!(direct, VerifyOutcome::Accept);
    }

    #[test]
    fn verify_preorder_accepts_the_difference_of_squares() {
        let d = q("2");
        let cert = PreorderCert {
            k: 2,
            d: d.clone(),
            blocks: vec![PreorderBlock {
                gens: [(1, 2, Sign::Plus), (1, 2, Sign::Minus)].into_iter().collect(),
                basis: vec![Monomial::one()],
                gram: vec![vec![q("1")]],
            }],
        };
        // d^2 * empty - double edge
        let target = qg(0, Mode::Multi, &[("MG 0 0 :", "4"), ("MG 2 0 : 1-2, 1-2", "-1")]);
        assert_eq!(
            verify_preorder(&cert, &target, &PerturbSpec::None).unwrap(),
            VerifyOutcome::Accept
        );
    }

    #[test]
    fn verify_preorder_empty_certificate_matches_zero() {
        let cert = PreorderCert { k: 2, d: q("1"), blocks: vec![] };
        let zero = QuantumGraph::zero(0, Mode::Multi);
        assert_eq!(
            verify_preorder(&cert, &zero, &PerturbSpec::None).unwrap(),
            VerifyOutcome::Accept
        );
    }

    #[test]
    fn verify_preorder_rejects_non_psd_grams_with_a_witness() {
        let cert = PreorderCert {
            k: 2,
            d: q("1"),
            blocks: vec![PreorderBlock {
                gens: BTreeSet::new(),
                basis: vec![Monomial::one()],
                gram: vec![vec![q("-1")]],
            }],
        };
        let zero = QuantumGraph::zero(0, Mode::Multi);
        match verify_preorder(&cert, &zero, &PerturbSpec::None) {
            Err(Error::NonPsdGram { witness }) => assert_eq!(witness, vec!["1".to_string()]),
            other => panic!("expected NonPsdGram, got {other:?}"),
        }
    }

    #[test]
    fn simple_search_certifies_zero_at_small_epsilon() {
        let zero = QuantumGraph::zero(0, Mode::Simple);
        match sos_search_simple(&zero, 2, &q("1/3")).unwrap() {
            SimpleSearchOutcome::Certificate(cert) => {
                // one pair, two variety points, both with value eps
                assert_eq!(cert.summands.len(), 2);
                assert!(cert.summands.iter().all(|(w, _)| *w == q("1/3")));
                assert_eq!(
                    verify_sos(&cert, &zero, &PerturbSpec::PlainEps(q("1/3"))).unwrap(),
                    VerifyOutcome::Accept
                );
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn simple_search_reports_the_exact_minimum() {
        let minus_one = qg(0, Mode::Simple, &[("MG 0 0 :", "-1")]);
        match sos_search_simple(&minus_one, 2, &q("1/2")).unwrap() {
            SimpleSearchOutcome::Infeasible { min_value, witness } => {
                assert_eq!(min_value, q("-1/2"));
                assert_eq!(witness.len(), 1);
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn simple_search_pins_the_goodman_minimum_at_level_four() {
        // symmetrized evaluation of cherry minus matching over {0,1}^6
        match sos_search_simple(&goodman_target(), 4, &q("0")).unwrap() {
            SimpleSearchOutcome::Infeasible { min_value, .. } => {
                assert_eq!(min_value, q("-1/3"));
            }
            other => panic!("expected Infeasible at eps 0, got {other:?}"),
        }
    }

    #[test]
    fn simple_search_validates_inputs() {
        let zero = QuantumGraph::zero(0, Mode::Simple);
        assert!(matches!(sos_search_simple(&zero, 1, &q("1")), Err(Error::KTooSmall { k: 1 })));
        assert!(matches!(
            sos_search_simple(&zero, 2, &q("-1")),
            Err(Error::NonpositiveEpsilon)
        ));
        let big = qg(0, Mode::Simple, &[("MG 3 0 : 1-3, 2-3", "1")]);
        assert!(matches!(
            sos_search_simple(&big, 2, &q("1")),
            Err(Error::BasisGraphTooLarge { n: 3, k: 2 })
        ));
    }

    #[test]
    fn multi_search_recovers_the_double_edge_square() {
        let target = qg(0, Mode::Multi, &[("MG 2 0 : 1-2, 1-2", "1")]);
        match sos_search_multi(&target, 2, 1, &PerturbSpec::None, &SearchOptions::default())
            .unwrap()
        {
            MultiSearchOutcome::Certificate(cert) => {
                let edge = qg(2, Mode::Multi, &[("MG 2 2 : 1-2", "1")]);
                assert_eq!(cert.summands, vec![(q("1"), edge)]);
            }
            other => panic!("expected the z12 square, got {other:?}"),
        }
    }

    #[test]
    fn multi_search_refutes_a_negative_target_exactly() {
        let minus_one = qg(0, Mode::Multi, &[("MG 0 0 :", "-1")]);
        match sos_search_multi(&minus_one, 2, 1, &PerturbSpec::None, &SearchOptions::default())
            .unwrap()
        {
            MultiSearchOutcome::Infeasible { refutation } => assert!(!refutation.is_empty()),
            MultiSearchOutcome::Indeterminate { .. } => {}
            MultiSearchOutcome::Certificate(_) => panic!("negative target certified"),
        }
    }

    #[test]
    fn preorder_search_finds_the_edge_bound() {
        // 2 * empty - single edge, strictly inside the d = 3/2 preorder;
        // the pure-squares stage cannot express the odd term, so this
        // exercises the generator blocks
        let target = qg(0, Mode::Multi, &[("MG 0 0 :", "2"), ("MG 2 0 : 1-2", "-1")]);
        match preorder_search(&target, 2, 1, &q("3/2"), &q("0"), &SearchOptions::default())
            .unwrap()
        {
            PreorderOutcome::Certificate(cert) => {
                assert!(cert.blocks.iter().any(|b| !b.gens.is_empty()));
                assert_eq!(
                    verify_preorder(&cert, &target, &PerturbSpec::None).unwrap(),
                    VerifyOutcome::Accept
                );
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn preorder_search_certifies_zero_with_epsilon() {
        let zero = QuantumGraph::zero(0, Mode::Multi);
        match preorder_search(&zero, 2, 1, &q("1"), &q("1"), &SearchOptions::default()).unwrap() {
            PreorderOutcome::Certificate(cert) => {
                // the pure-squares stage suffices
                assert!(cert.blocks.iter().all(|b| b.gens.is_empty()));
                assert_eq!(
                    verify_preorder(&cert, &zero, &PerturbSpec::PlainEps(q("1"))).unwrap(),
                    VerifyOutcome::Accept
                );
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn is_sos_poly_accepts_a_perfect_square() {
        let z12 = Poly::var(Var::z(1, 2).unwrap());
        let z13 = Poly::var(Var::z(1, 3).unwrap());
        let square = z12.add(&z13).mul(&z12.add(&z13));
        match is_sos_poly(&square, &SearchOptions::default()).unwrap() {
            SosPolyOutcome::Sos { basis, gram } => {
                assert_eq!(basis.len(), 2);
                assert_eq!(gram.len(), 2);
            }
            other => panic!("expected Sos, got {other:?}"),
        }
    }

    #[test]
    fn is_sos_poly_rejects_negative_constants_and_odd_support() {
        let minus_one = Poly::constant(q("-1"));
        match is_sos_poly(&minus_one, &SearchOptions::default()).unwrap() {
            SosPolyOutcome::NotSos { margin, .. } => assert!(margin > NOT_SOS_MARGIN),
            other => panic!("expected NotSos, got {other:?}"),
        }

        // z12^2 + z13: the lone z13 term cannot come from any square
        let z12 = Poly::var(Var::z(1, 2).unwrap());
        let z13 = Poly::var(Var::z(1, 3).unwrap());
        let p = z12.mul(&z12).add(&z13);
        assert!(matches!(
            is_sos_poly(&p, &SearchOptions::default()),
            Err(Error::OddDegree { .. })
        ) == false);
        match is_sos_poly(&p, &SearchOptions::default()).unwrap() {
            SosPolyOutcome::NotSos { witness, .. } => assert!(!witness.is_empty()),
            other => panic!("expected NotSos, got {other:?}"),
        }

        let cube = z12.mul(&z12).mul(&z12);
        assert!(matches!(
            is_sos_poly(&cube, &SearchOptions::default()),
            Err(Error::OddDegree { .. })
        ));
    }

    #[test]
    fn rationalize_gram_keeps_exact_input_and_fixes_noise() {
        let id = |n: usize| -> Vec<(Mat, BigRational)> {
            let mut rows = Vec::new();
            for i in 0..n {
                for j in i..n {
                    let mut m = zero_mat(n);
                    m[i][j] = BigRational::one();
                    m[j][i] = BigRational::one();
                    let rhs = if i == j { BigRational::one() } else { BigRational::zero() };
                    rows.push((m, rhs));
                }
            }
            rows
        };
        let exact = DMatrix::from_element(1, 1, 1.0);
        let fixed = rationalize_gram(&exact, &id(1)).unwrap();
        assert_eq!(fixed, vec![vec![q("1")]]);

        let close = DMatrix::from_element(1, 1, 1.0000000001);
        assert_eq!(rationalize_gram(&close, &id(1)).unwrap(), vec![vec![q("1")]]);

        let noisy = DMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                1.0 + 1e-9
            } else {
                -1e-9
            }
        });
        let fixed = rationalize_gram(&noisy, &id(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { q("1") } else { q("0") };
                assert_eq!(fixed[i][j], want);
            }
        }
    }

    #[test]
    fn cert_files_round_trip() {
        let sos = CertFile {
            certificate: Certificate::Sos(goodman_square_cert()),
            perturb: PerturbSpec::None,
        };
        let text = sos.to_string();
        assert_eq!(CertFile::parse(&text).unwrap(), sos);

        let preorder = CertFile {
            certificate: Certificate::Preorder(PreorderCert {
                k: 2,
                d: q("3/2"),
                blocks: vec![
                    PreorderBlock {
                        gens: [(1, 2, Sign::Minus)].into_iter().collect(),
                        basis: vec![Monomial::one()],
                        gram: vec![vec![q("1")]],
                    },
                    PreorderBlock {
                        gens: BTreeSet::new(),
                        basis: vec![
                            Monomial::one(),
                            Monomial::var(Var::z(1, 2).unwrap()),
                        ],
                        gram: vec![vec![q("1"), q("-1/2")], vec![q("-1/2"), q("2")]],
                    },
                ],
            }),
            perturb: PerturbSpec::PlainEps(q("1/10")),
        };
        let text = preorder.to_string();
        assert_eq!(CertFile::parse(&text).unwrap(), preorder);
    }

    #[test]
    fn cert_parse_reports_line_numbers() {
        let bad = "sos k=2 mode=simple perturb=none\nnot a line\n";
        match CertFile::parse(bad) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(matches!(
            CertFile::parse("banana k=2"),
            Err(Error::Parse { pos: 1, .. })
        ));
    }

    #[test]
    fn searched_certificates_survive_file_round_trips() {
        let zero = QuantumGraph::zero(0, Mode::Simple);
        let SimpleSearchOutcome::Certificate(cert) =
            sos_search_simple(&zero, 2, &q("1/3")).unwrap()
        else {
            panic!("expected a certificate");
        };
        let file = CertFile {
            certificate: Certificate::Sos(cert),
            perturb: PerturbSpec::PlainEps(q("1/3")),
        };
        let parsed = CertFile::parse(&file.to_string()).unwrap();
        assert_eq!(parsed, file);
        let Certificate::Sos(cert) = parsed.certificate else { unreachable!() };
        assert_eq!(
            verify_sos(&cert, &zero, &parsed.perturb).unwrap(),
            VerifyOutcome::Accept
        );
    }
}
