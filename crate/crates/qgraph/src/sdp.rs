//! Dense block-diagonal semidefinite feasibility at desk scale, plus the
//! exact rational kernels behind certificate verification: a PSD check
//! with witnesses, a linear solver that produces refutation vectors, and
//! an exact convex-hull membership test.
//!
//! The numeric solver maximizes a uniform margin `lambda` with
//! `X = Z + lambda*I`, `Z ⪰ 0`, so the optimum separates strictly
//! feasible, boundary, and infeasible instances; a dual ray at a negative
//! optimum is an approximate refutation. Nothing numeric is ever trusted
//! by callers without an exact recheck.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num::{BigRational, One, Signed, Zero};

pub type Mat = Vec<Vec<BigRational>>;

/// `M = P L D L^T P^T` with unit lower-triangular `L` in pivot order
/// `perm` (row `i` of `L` describes original row `perm[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Ldlt {
    pub perm: Vec<usize>,
    pub l: Mat,
    pub d: Vec<BigRational>,
}

impl Ldlt {
    /// Rebuilds the matrix entry at original indices `(r, c)`.
    pub fn reconstruct(&self) -> Mat {
        let n = self.perm.len();
        let mut m = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut v = BigRational::zero();
                for t in 0..n {
                    v += &self.l[i][t] * &self.d[t] * &self.l[j][t];
                }
                m[self.perm[i]][self.perm[j]] = v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsdOutcome {
    Psd(Ldlt),
    /// `witness` is an exact vector with `witness^T M witness = value < 0`.
    NotPsd { witness: Vec<BigRational>, value: BigRational },
}

fn quadratic_form(m: &[Vec<BigRational>], v: &[BigRational]) -> BigRational {
    let mut total = BigRational::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            total += &v[i] * entry * &v[j];
        }
    }
    total
}

fn check_square_symmetric(m: &[Vec<BigRational>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::ShapeMismatch);
    }
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(Error::ShapeMismatch);
            }
        }
    }
    Ok(n)
}

/// Exact PSD test by rational LDL^T with diagonal pivoting. Either a full
/// decomposition certifying `M ⪰ 0` or a rational witness vector with a
/// strictly negative quadratic form.
pub fn psd_check_exact(m: &[Vec<BigRational>]) -> Result<PsdOutcome> {
    let n = check_square_symmetric(m)?;
    // Schur complement over the original index set, shrinking as pivots
    // are chosen.
    let mut a: Mat = m.to_vec();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut d: Vec<BigRational> = Vec::with_capacity(n);
    // multipliers[t] maps original index -> L entry in pivot column t
    let mut multipliers: Vec<Vec<(usize, BigRational)>> = Vec::with_capacity(n);

    let witness_from_schur = |perm: &[usize],
                              remaining: &[usize],
                              u: Vec<(usize, BigRational)>|
     -> Result<PsdOutcome> {
        // extend a Schur-complement witness u to the full matrix by
        // solving the pivot block: v_piv = -A_piv^{-1} B u
        let t = perm.len();
        let mut rhs = vec![BigRational::zero(); t];
        for (i, &p) in perm.iter().enumerate() {
            for (q, uq) in &u {
                rhs[i] -= &m[p][*q] * uq;
            }
        }
        let block: Mat = perm.iter().map(|&p| perm.iter().map(|&q| m[p][q].clone()).collect()).collect();
        let x = match solve_or_certify(&block, &rhs)? {
            LinearOutcome::Solution(x) => x,
            // the pivot block is positive definite, so this cannot happen
            LinearOutcome::Inconsistent(_) => return Err(Error::ShapeMismatch),
        };
        let n = remaining.len() + t;
        debug_assert_eq!(n, m.len());
        let mut witness = vec![BigRational::zero(); n];
        for (i, &p) in perm.iter().enumerate() {
            witness[p] = x[i].clone();
        }
        for (q, uq) in u {
            witness[q] = uq;
        }
        let value = quadratic_form(m, &witness);
        debug_assert!(value.is_negative());
        Ok(PsdOutcome::NotPsd { witness, value })
    };

    while !remaining.is_empty() {
        // deterministic pivoting: the largest positive diagonal, earliest
        // index on ties
        let pivot = remaining
            .iter()
            .copied()
            .filter(|&p| a[p][p].is_positive())
            .max_by(|&p, &q| a[p][p].cmp(&a[q][q]).then(q.cmp(&p)));
        let Some(p) = pivot else {
            if let Some(&q) = remaining.iter().find(|&&q| a[q][q].is_negative()) {
                return witness_from_schur(&perm, &remaining, vec![(q, BigRational::one())]);
            }
            // all remaining diagonals are zero; any nonzero off-diagonal
            // entry b gives the indefinite 2x2 form 2*b*t with t = -sign(b)
            let off = remaining.iter().enumerate().find_map(|(qi, &q)| {
                remaining[qi + 1..]
                    .iter()
                    .find(|&&r| !a[q][r].is_zero())
                    .map(|&r| (q, r))
            });
            match off {
                Some((q, r)) => {
                    let sign = if a[q][r].is_positive() { -BigRational::one() } else { BigRational::one() };
                    return witness_from_schur(&perm, &remaining, vec![(q, sign), (r, BigRational::one())]);
                }
                None => break, // zero Schur complement: PSD, rank reached
            }
        };
        let pd = a[p][p].clone();
        remaining.retain(|&q| q != p);
        let mult: Vec<(usize, BigRational)> =
            remaining.iter().map(|&q| (q, &a[q][p] / &pd)).collect();
        for &q in &remaining {
            for &r in &remaining {
                let delta = &a[q][p] * &a[p][r] / &pd;
                a[q][r] -= delta;
            }
        }
        perm.push(p);
        d.push(pd);
        multipliers.push(mult);
    }
    // pad the decomposition for the zero Schur complement
    for &q in &remaining {
        perm.push(q);
        d.push(BigRational::zero());
        multipliers.push(Vec::new());
    }
    let mut pos = vec![0usize; n];
    for (i, &p) in perm.iter().enumerate() {
        pos[p] = i;
    }
    let mut l = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        l[i][i] = BigRational::one();
    }
    for (t, col) in multipliers.iter().enumerate() {
        for (q, lam) in col {
            l[pos[*q]][t] = lam.clone();
        }
    }
    Ok(PsdOutcome::Psd(Ldlt { perm, l, d }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearOutcome {
    Solution(Vec<BigRational>),
    /// A row combination `y` with `y^T A = 0` but `y^T b != 0`.
    Inconsistent(Vec<BigRational>),
}

/// Exact Gaussian elimination for `A x = b`; returns a particular solution
/// (free variables set to zero) or a refutation combination of the rows.
pub fn solve_or_certify(a: &[Vec<BigRational>], b: &[BigRational]) -> Result<LinearOutcome> {
    let rows = a.len();
    if b.len() != rows {
        return Err(Error::ShapeMismatch);
    }
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch);
    }
    // augmented [A | b | I] so refutations fall out of elimination
    let width = cols + 1 + rows;
    let mut t: Mat = (0..rows)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().cloned());
            row.push(b[i].clone());
            for j in 0..rows {
                row.push(if i == j { BigRational::one() } else { BigRational::zero() });
            }
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut next_row = 0usize;
    for col in 0..cols {
        let Some(r) = (next_row..rows).find(|&r| !t[r][col].is_zero()) else {
            continue;
        };
        t.swap(next_row, r);
        let inv = t[next_row][col].clone();
        for entry in t[next_row].iter_mut() {
            *entry /= &inv;
        }
        for r2 in 0..rows {
            if r2 != next_row && !t[r2][col].is_zero() {
                let factor = t[r2][col].clone();
                for c in 0..width {
                    let delta = &factor * &t[next_row][c];
                    t[r2][c] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    for r in 0..rows {
        let lhs_zero = (0..cols).all(|c| t[r][c].is_zero());
        if lhs_zero && !t[r][cols].is_zero() {
            return Ok(LinearOutcome::Inconsistent(
                (0..rows).map(|i| t[r][cols + 1 + i].clone()).collect(),
            ));
        }
    }
    let mut x = vec![BigRational::zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_of_col[col] {
            x[col] = t[r][cols].clone();
        }
    }
    Ok(LinearOutcome::Solution(x))
}

/// Exact membership of `point` in the convex hull of `vertices`, by
/// phase-1 simplex with Bland's rule.
pub fn in_convex_hull(point: &[BigRational], vertices: &[Vec<BigRational>]) -> Result<bool> {
    let dim = point.len();
    if vertices.iter().any(|v| v.len() != dim) {
        return Err(Error::ShapeMismatch);
    }
    if vertices.is_empty() {
        return Ok(false);
    }
    let nv = vertices.len();
    let rows = dim + 1;
    // constraints: sum_i lambda_i v_i = p, sum_i lambda_i = 1, lambda >= 0,
    // one artificial per row after sign normalization
    let mut a: Mat = Vec::with_capacity(rows);
    let mut b: Vec<BigRational> = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut row: Vec<BigRational> = (0..nv)
            .map(|i| if r < dim { vertices[i][r].clone() } else { BigRational::one() })
            .collect();
        let mut rhs = if r < dim { point[r].clone() } else { BigRational::one() };
        if rhs.is_negative() {
            for e in row.iter_mut() {
                *e = -e.clone();
            }
            rhs = -rhs;
        }
        a.push(row);
        b.push(rhs);
    }
    let ncols = nv + rows; // lambdas then artificials
    let get = |a: &Mat, r: usize, c: usize| -> BigRational {
        if c < nv {
            a[r][c].clone()
        } else if c - nv == r {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    };
    // dense simplex tableau with objective = sum of artificials
    let mut tab: Mat = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = (0..ncols).map(|c| get(&a, r, c)).collect();
            row.push(b[r].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (0..rows).map(|r| nv + r).collect();
    // reduced costs for min sum-of-artificials with the artificial basis:
    // c_j minus the column sum; value cell holds minus the objective
    let mut obj: Vec<BigRational> = vec![BigRational::zero(); ncols + 1];
    for c in nv..ncols {
        obj[c] = BigRational::one();
    }
    for r in 0..rows {
        for c in 0..=ncols {
            let t = tab[r][c].clone();
            obj[c] -= t;
        }
    }
    loop {
        // Bland: entering = lowest-index column with negative reduced cost
        let Some(enter) = (0..ncols).find(|&c| obj[c].is_negative()) else {
            break;
        };
        // leaving: minimum ratio, lowest basis index on ties
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..rows {
            if tab[r][enter].is_positive() {
                let ratio = &tab[r][ncols] / &tab[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((lr, _)) = leave else {
            // unbounded phase-1 cannot happen; treat as failure
            return Err(Error::ShapeMismatch);
        };
        let inv = tab[lr][enter].clone();
        for c in 0..=ncols {
            tab[lr][c] /= &inv;
        }
        for r in 0..rows {
            if r != lr && !tab[r][enter].is_zero() {
                let f = tab[r][enter].clone();
                for c in 0..=ncols {
                    let delta = &f * &tab[lr][c];
                    tab[r][c] -= delta;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for c in 0..=ncols {
                let delta = &f * &tab[lr][c];
                obj[c] -= delta;
            }
        }
        basis[lr] = enter;
    }
    // optimum of phase 1 is -obj[ncols]; membership iff it is zero
    Ok(obj[ncols].is_zero())
}

/// One linear equality over the block variable: `sum_b <blocks[b], Z_b> = rhs`.
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub blocks: Vec<DMatrix<f64>>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub dim_cap: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-8, max_iter: 200, dim_cap: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Feasible,
    InfeasibleRay,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Feasible: `X = Z + lambda I` per block.
    pub primal: Vec<DMatrix<f64>>,
    /// Margin optimum: positive means strictly feasible, near zero means
    /// boundary, negative means infeasible by that margin.
    pub lambda: f64,
    /// Constraint multipliers; on InfeasibleRay this is the refutation ray
    /// `y` with `-sum y_i A_i ⪰ 0` and `b^T y > 0`.
    pub dual: Vec<f64>,
    pub residual_primal: f64,
    pub residual_dual: f64,
    pub mu: f64,
    pub iterations: usize,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn block_dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// `(M^{1/2}, M^{-1/2})` for a symmetric positive definite matrix.
fn sqrt_pair(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let u = &eig.eigenvectors;
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_root = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Some((u * root * u.transpose(), u * inv_root * u.transpose()))
}

/// Nesterov-Todd scaling point: the unique SPD `W` with `W S W = Z`.
fn nt_scaling(z: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (s_half, s_inv_half) = sqrt_pair(s)?;
    let inner = sym(&(&s_half * z * &s_half));
    let (inner_half, _) = sqrt_pair(&inner)?;
    Some(sym(&(&s_inv_half * inner_half * &s_inv_half)))
}

/// Largest alpha with `Z + alpha dZ ⪰ 0`, via the Cholesky-whitened
/// eigenvalue bound; `f64::INFINITY` when unrestricted.
fn max_step(z: &DMatrix<f64>, dz: &DMatrix<f64>) -> f64 {
    if z.nrows() == 0 {
        return f64::INFINITY;
    }
    let Some(chol) = z.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(y) = l.clone().solve_lower_triangular(dz) else {
        return 0.0;
    };
    let yt = y.transpose();
    let Some(t) = l.solve_lower_triangular(&yt) else {
        return 0.0;
    };
    let t = sym(&t.transpose());
    let min_eig = t.symmetric_eigen().eigenvalues.min();
    if min_eig >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min_eig
    }
}

struct BlockVar(Vec<DMatrix<f64>>);

impl BlockVar {
    fn identity(dims: &[usize]) -> Self {
        BlockVar(dims.iter().map(|&d| DMatrix::identity(d, d)).collect())
    }

    fn zeros(dims: &[usize]) -> Self {
        BlockVar(dims.iter().map(|&d| DMatrix::zeros(d, d)).collect())
    }

    fn scale(&self, f: f64) -> Self {
        BlockVar(self.0.iter().map(|m| m * f).collect())
    }

    fn add(&self, other: &Self) -> Self {
        BlockVar(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Margin-formulation interior-point solve: maximize `lambda` subject to
/// `<A_i, Z> + lambda tr(A_i) = b_i`, `Z ⪰ 0`, with `lambda` capped by a
/// slack row so the problem stays bounded. Deterministic.
pub fn sdp_solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let total: usize = problem.block_dims.iter().sum();
    if total > opts.dim_cap {
        return Err(Error::DimensionCap { needed: total, cap: opts.dim_cap });
    }
    if problem.block_dims.iter().any(|&d| d == 0) {
        return Err(Error::ShapeMismatch);
    }
    for c in &problem.constraints {
        if c.blocks.len() != problem.block_dims.len()
            || c.blocks.iter().zip(&problem.block_dims).any(|(m, &d)| m.nrows() != d || m.ncols() != d)
        {
            return Err(Error::ShapeMismatch);
        }
    }
    let m = problem.constraints.len();
    let b_norm = problem.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let cap = 10.0 * (1.0 + b_norm);

    // uniform data over problem blocks plus a 1x1 slack block for the cap
    // row `lambda + s = cap`
    let mut dims = problem.block_dims.clone();
    dims.push(1);
    let nb = dims.len();
    let mats: Vec<BlockVar> = problem
        .constraints
        .iter()
        .map(|c| {
            let mut blocks: Vec<DMatrix<f64>> = c.blocks.iter().map(sym).collect();
            blocks.push(DMatrix::zeros(1, 1));
            BlockVar(blocks)
        })
        .chain(std::iter::once({
            let mut blocks: Vec<DMatrix<f64>> =
                problem.block_dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
            blocks.push(DMatrix::from_element(1, 1, 1.0));
            BlockVar(blocks)
        }))
        .collect();
    let traces: Vec<f64> = mats.iter().map(|a| a.0.iter().map(|blk| blk.trace()).sum()).collect();
    let rhs: Vec<f64> =
        problem.constraints.iter().map(|c| c.rhs).chain(std::iter::once(cap)).collect();
    let rows = m + 1;
    let nu = (total + 1) as f64;

    let beta = (1.0 + b_norm).sqrt();
    let mut z = BlockVar::identity(&dims).scale(beta);
    let mut s = BlockVar::identity(&dims).scale(beta);
    let mut y = vec![0.0f64; rows];
    let mut lambda = 0.0f64;

    let mut rp = vec![0.0; rows];
    let mut best: Option<SdpSolution> = None;
    let ray_band = (100.0 * opts.tol).max(1e-6);
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter;
        // residuals
        for i in 0..rows {
            rp[i] = rhs[i] - block_dot(&mats[i].0, &z.0) - traces[i] * lambda;
        }
        let mut rd = BlockVar::zeros(&dims);
        for i in 0..rows {
            rd = rd.add(&mats[i].scale(-y[i]));
        }
        let rd = rd.add(&s.scale(-1.0)); // want S = -sum y_i A_i, so rd -> 0
        let r_free: f64 = -1.0 - (0..rows).map(|i| y[i] * traces[i]).sum::<f64>();
        let mu = block_dot(&z.0, &s.0) / nu;

        let rel_p = rp.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / (1.0 + b_norm);
        let rel_d = rd.0.iter().map(|mm| mm.norm()).fold(0.0f64, f64::max) / (1.0 + beta);
        let rel_f = r_free.abs();
        let mu_rel = mu / (1.0 + b_norm);

        let snapshot = |status: SdpStatus| SdpSolution {
            status,
            primal: problem
                .block_dims
                .iter()
                .enumerate()
                .map(|(bi, &d)| &z.0[bi] + DMatrix::<f64>::identity(d, d) * lambda)
                .collect(),
            lambda,
            dual: y[..m].to_vec(),
            residual_primal: rel_p,
            residual_dual: rel_d,
            mu: mu_rel,
            iterations: iter,
        };

        if rel_p <= opts.tol && rel_d <= opts.tol && rel_f <= opts.tol && mu_rel <= opts.tol {
            if lambda >= -ray_band {
                return Ok(snapshot(SdpStatus::Feasible));
            }
            // validate the dual refutation ray before reporting it
            let mut w = BlockVar::zeros(&dims);
            for i in 0..m {
                w = w.add(&BlockVar(mats[i].0.clone()).scale(-y[i]));
            }
            let obj: f64 = (0..m).map(|i| y[i] * rhs[i]).sum();
            let min_eig = w.0[..problem.block_dims.len()]
                .iter()
                .filter(|mm| mm.nrows() > 0)
                .map(|mm| sym(mm).symmetric_eigen().eigenvalues.min())
                .fold(f64::INFINITY, f64::min);
            if obj > 0.0 && min_eig >= -1e-6 * (1.0 + b_norm) {
                return Ok(snapshot(SdpStatus::InfeasibleRay));
            }
            return Ok(snapshot(SdpStatus::Indeterminate));
        }
        best = Some(snapshot(SdpStatus::Indeterminate));

        // NT scaling per block
        let mut wmats = Vec::with_capacity(nb);
        let mut ok = true;
        for bi in 0..nb {
            match nt_scaling(&z.0[bi], &s.0[bi]) {
                Some(w) => wmats.push(w),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }

        // Schur matrix M_jl = <A_j, W A_l W> and the lambda border
        let scaled: Vec<BlockVar> = mats
            .iter()
            .map(|a| {
                BlockVar(
                    (0..nb).map(|bi| sym(&(&wmats[bi] * &a.0[bi] * &wmats[bi]))).collect(),
                )
            })
            .collect();
        let mut big = DMatrix::<f64>::zeros(rows + 1, rows + 1);
        for j in 0..rows {
            for l in j..rows {
                let v = block_dot(&mats[j].0, &scaled[l].0);
                big[(j, l)] = v;
                big[(l, j)] = v;
            }
            big[(j, rows)] = traces[j];
            big[(rows, j)] = traces[j];
        }
        let lu = big.clone().lu();

        let s_inv: Option<Vec<DMatrix<f64>>> = (0..nb)
            .map(|bi| s.0[bi].clone().cholesky().map(|c| c.inverse()))
            .collect();
        let Some(s_inv) = s_inv else {
            break;
        };

        // one Newton solve for a given centering target sigma*mu
        let solve_direction = |sigma_mu: f64| -> Option<(BlockVar, BlockVar, Vec<f64>, f64)> {
            // complementarity target: dZ + W dS W = sigma*mu*S^{-1} - Z
            let rc = BlockVar(
                (0..nb)
                    .map(|bi| &s_inv[bi] * sigma_mu - &z.0[bi])
                    .collect(),
            );
            // dS = rd - sum dy_i A_i, dZ = rc - W dS W
            // => sum_l <A_j, W A_l W> dy_l + t_j dlam = rp_j - <A_j, rc - W rd W>
            let mut rhs_v = DVector::<f64>::zeros(rows + 1);
            for j in 0..rows {
                let mut w_rd_w = 0.0;
                for bi in 0..nb {
                    let t = sym(&(&wmats[bi] * &rd.0[bi] * &wmats[bi]));
                    w_rd_w += mats[j].0[bi].dot(&t);
                }
                rhs_v[j] = rp[j] - block_dot(&mats[j].0, &rc.0) + w_rd_w;
            }
            rhs_v[rows] = r_free;
            let sol = lu.solve(&rhs_v)?;
            let dy: Vec<f64> = (0..rows).map(|i| sol[i]).collect();
            let dlam = sol[rows];
            let mut ds = BlockVar::zeros(&dims);
            for i in 0..rows {
                ds = ds.add(&mats[i].scale(-dy[i]));
            }
            let ds = ds.add(&rd);
            let dz = BlockVar(
                (0..nb)
                    .map(|bi| {
                        let wdw = sym(&(&wmats[bi] * &ds.0[bi] * &wmats[bi]));
                        &rc.0[bi] - wdw
                    })
                    .collect(),
            );
            Some((dz, ds, dy, dlam))
        };

        let Some((dz_aff, ds_aff, _, _)) = solve_direction(0.0) else {
            break;
        };
        let step_limit = |var: &BlockVar, dir: &BlockVar| -> f64 {
            (0..nb).map(|bi| max_step(&var.0[bi], &dir.0[bi])).fold(f64::INFINITY, f64::min)
        };
        let ap_aff = step_limit(&z, &dz_aff).min(1.0);
        let ad_aff = step_limit(&s, &ds_aff).min(1.0);
        let z_aff = z.add(&dz_aff.scale(0.99 * ap_aff));
        let s_aff = s.add(&ds_aff.scale(0.99 * ad_aff));
        let mu_aff = block_dot(&z_aff.0, &s_aff.0) / nu;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-4, 0.9);

        let Some((dz, ds, dy, dlam)) = solve_direction(sigma * mu) else {
            break;
        };
        let tau = 0.98;
        let ap = (tau * step_limit(&z, &dz)).min(1.0);
        let ad = (tau * step_limit(&s, &ds)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        z = z.add(&dz.scale(ap));
        lambda += ap * dlam;
        s = s.add(&ds.scale(ad));
        for i in 0..rows {
            y[i] += ad * dy[i];
        }
    }
    let mut out = best.unwrap_or_else(|| SdpSolution {
        status: SdpStatus::Indeterminate,
        primal: problem.block_dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
        lambda,
        dual: y[..m].to_vec(),
        residual_primal: f64::INFINITY,
        residual_dual: f64::INFINITY,
        mu: f64::INFINITY,
        iterations,
    });
    out.status = SdpStatus::Indeterminate;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|e| q(e)).collect()).collect()
    }

    #[test]
    fn psd_check_accepts_identity_and_zero() {
        let id = mat(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
        match psd_check_exact(&id).unwrap() {
            PsdOutcome::Psd(dec) => assert_eq!(dec.reconstruct(), id),
            other => panic!("expected PSD, got {other:?}"),
        }
        let zero = mat(&[&["0", "0"], &["0", "0"]]);
        assert!(matches!(psd_check_exact(&zero).unwrap(), PsdOutcome::Psd(_)));
    }

    #[test]
    fn psd_check_reconstructs_semidefinite_input() {
        // A^T A for A = [[1,2,0],[0,1,1]] has rank 2
        let m = mat(&[&["1", "2", "0"], &["2", "5", "1"], &["0", "1", "1"]]);
        match psd_check_exact(&m).unwrap() {
            PsdOutcome::Psd(dec) => {
                assert_eq!(dec.reconstruct(), m);
                assert_eq!(dec.d.iter().filter(|v| v.is_zero()).count(), 1);
            }
            other => panic!("expected PSD, got {other:?}"),
        }
    }

    #[test]
    fn psd_check_produces_exact_witnesses() {
        let cases = [
            mat(&[&["1", "2"], &["2", "1"]]),
            mat(&[&["0", "1"], &["1", "0"]]),
            mat(&[&["-1"]]),
            mat(&[&["2", "0", "0"], &["0", "0", "3"], &["0", "3", "0"]]),
        ];
        for m in cases {
            match psd_check_exact(&m).unwrap() {
                PsdOutcome::NotPsd { witness, value } => {
                    assert!(value.is_negative());
                    assert_eq!(quadratic_form(&m, &witness), value, "{m:?}");
                }
                other => panic!("expected NotPsd for {m:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn psd_check_rejects_bad_shapes() {
        let asym = mat(&[&["1", "2"], &["3", "1"]]);
        assert!(matches!(psd_check_exact(&asym), Err(Error::ShapeMismatch)));
        let ragged = vec![vec![q("1")], vec![q("1"), q("2")]];
        assert!(matches!(psd_check_exact(&ragged), Err(Error::ShapeMismatch)));
    }

    #[test]
    fn linear_solver_finds_solutions_and_refutations() {
        let a = mat(&[&["1", "1"], &["1", "-1"]]);
        let b = vec![q("3"), q("1")];
        match solve_or_certify(&a, &b).unwrap() {
            LinearOutcome::Solution(x) => assert_eq!(x, vec![q("2"), q("1")]),
            other => panic!("expected solution, got {other:?}"),
        }

        // x + y = 1, 2x + 2y = 3 is inconsistent
        let a = mat(&[&["1", "1"], &["2", "2"]]);
        let b = vec![q("1"), q("3")];
        match solve_or_certify(&a, &b).unwrap() {
            LinearOutcome::Inconsistent(y) => {
                for c in 0..2 {
                    let dot: BigRational = (0..2).map(|r| &y[r] * &a[r][c]).sum();
                    assert!(dot.is_zero());
                }
                let dot: BigRational = (0..2).map(|r| &y[r] * &b[r]).sum();
                assert!(!dot.is_zero());
            }
            other => panic!("expected refutation, got {other:?}"),
        }

        // underdetermined: free variable pinned to zero
        let a = mat(&[&["1", "1"]]);
        let b = vec![q("5")];
        match solve_or_certify(&a, &b).unwrap() {
            LinearOutcome::Solution(x) => assert_eq!(x, vec![q("5"), q("0")]),
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn convex_hull_membership_is_exact() {
        let tri = vec![
            vec![q("0"), q("0")],
            vec![q("1"), q("0")],
            vec![q("0"), q("1")],
        ];
        assert!(in_convex_hull(&[q("1/4"), q("1/4")], &tri).unwrap());
        assert!(in_convex_hull(&[q("1/2"), q("1/2")], &tri).unwrap(), "boundary point");
        assert!(in_convex_hull(&[q("0"), q("0")], &tri).unwrap(), "vertex");
        assert!(!in_convex_hull(&[q("3/4"), q("3/4")], &tri).unwrap());
        assert!(!in_convex_hull(&[q("-1/100"), q("0")], &tri).unwrap());
        let segment = vec![vec![q("2")], vec![q("4")]];
        assert!(in_convex_hull(&[q("3")], &segment).unwrap());
        assert!(!in_convex_hull(&[q("5")], &segment).unwrap());
    }

    fn eye_constraint(i: usize, j: usize, dim: usize, rhs: f64) -> SdpConstraint {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        if i == j {
            m[(i, i)] = 1.0;
        } else {
            m[(i, j)] = 0.5;
            m[(j, i)] = 0.5;
        }
        SdpConstraint { blocks: vec![m], rhs }
    }

    #[test]
    fn sdp_feasible_scalar_instance() {
        let p = SdpProblem {
            block_dims: vec![1],
            constraints: vec![eye_constraint(0, 0, 1, 2.0)],
        };
        let sol = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!((sol.primal[0][(0, 0)] - 2.0).abs() < 1e-6);
        assert!((sol.lambda - 2.0).abs() < 1e-5, "margin should reach the value");
    }

    #[test]
    fn sdp_infeasible_scalar_instance_returns_a_ray() {
        let p = SdpProblem {
            block_dims: vec![1],
            constraints: vec![eye_constraint(0, 0, 1, -1.0)],
        };
        let sol = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::InfeasibleRay);
        // ray: -y*A ⪰ 0 and b^T y > 0 refute feasibility
        assert!(sol.dual[0] < 0.0);
        assert!(sol.lambda < -1e-6);
    }

    #[test]
    fn sdp_two_by_two_correlation_instance() {
        let p = SdpProblem {
            block_dims: vec![2],
            constraints: vec![
                eye_constraint(0, 0, 2, 1.0),
                eye_constraint(1, 1, 2, 1.0),
                eye_constraint(0, 1, 2, 0.9),
            ],
        };
        let sol = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!((sol.lambda - 0.1).abs() < 1e-5, "lambda = {}", sol.lambda);
        let x = &sol.primal[0];
        assert!((x[(0, 0)] - 1.0).abs() < 1e-6 && (x[(0, 1)] - 0.9).abs() < 1e-6);
    }

    #[test]
    fn sdp_block_diagonal_feasible_instance() {
        // two blocks sharing a budget: X1 + X2 = 3 with both diagonal
        let a1 = SdpConstraint {
            blocks: vec![DMatrix::identity(1, 1), DMatrix::zeros(2, 2)],
            rhs: 1.0,
        };
        let mut second = DMatrix::<f64>::zeros(2, 2);
        second[(0, 0)] = 1.0;
        second[(1, 1)] = 1.0;
        let a2 = SdpConstraint { blocks: vec![DMatrix::zeros(1, 1), second], rhs: 3.0 };
        let p = SdpProblem { block_dims: vec![1, 2], constraints: vec![a1, a2] };
        let sol = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!(sol.lambda > 0.5);
    }

    #[test]
    fn sdp_respects_the_dimension_cap() {
        let p = SdpProblem { block_dims: vec![5, 6], constraints: vec![] };
        let opts = SdpOptions { dim_cap: 10, ..Default::default() };
        assert!(matches!(
            sdp_solve(&p, &opts),
            Err(Error::DimensionCap { needed: 11, cap: 10 })
        ));
    }
}
