//! Smallest eigenpairs of `K x = λ M x` with `K` symmetric positive
//! semidefinite and `M` symmetric positive definite.
//!
//! Shift-invert subspace iteration: the operator `(K - σM)^{-1} M` is applied
//! through a sparse LDLᵀ factorization, the search space is kept
//! M-orthonormal by classical Gram-Schmidt with one reorthogonalization pass,
//! and Ritz pairs are extracted by Rayleigh-Ritz on `K` after each block
//! expansion. The space is thick-restarted on the best Ritz vectors.

use std::ops::Range;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymmetricOrdering,
};
use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::sparse::{dot, norm2, CsrMatrix};

/// Below this size the problem is solved densely.
const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub k: usize,
    /// Bound on `‖Kx - λMx‖₂ / ‖Mx‖₂`.
    pub tol: f64,
    /// Maximum number of block expansions.
    pub max_iter: usize,
    /// Spectral shift. `None` picks a small negative shift, which keeps
    /// `K - σM` definite even when `K` is singular.
    pub shift: Option<f64>,
    pub seed: u64,
    pub block_size: usize,
    pub exec: Exec,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            k: 6,
            tol: 1e-9,
            max_iter: 1000,
            shift: None,
            seed: 0,
            block_size: 4,
            exec: Exec::default(),
        }
    }
}

impl EigOptions {
    pub fn with_k(k: usize) -> Self {
        EigOptions { k, ..Default::default() }
    }
}

/// Eigenpairs in ascending order. Vectors are M-orthonormal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub shift: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clusters(&self, rel_gap: f64) -> Vec<Range<usize>> {
        clusters(&self.values, rel_gap)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

/// Groups sorted values into runs whose consecutive gaps are at most
/// `rel_gap` relative to the larger magnitude. Values within
/// `rel_gap * max|v|` of zero count as equal.
pub fn clusters(values: &[f64], rel_gap: f64) -> Vec<Range<usize>> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            let mag = a.abs().max(b.abs()).max(1e-3 * scale);
            (b - a).abs() > rel_gap * mag
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// `‖Kx - λMx‖₂ / ‖Mx‖₂`.
pub fn residual(k: &CsrMatrix, m: &CsrMatrix, lambda: f64, x: &[f64]) -> f64 {
    let kx = k.mul(x);
    let mx = m.mul(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    norm2(&r) / norm2(&mx)
}

pub fn smallest_eigs(k: &CsrMatrix, m: &CsrMatrix, opts: &EigOptions) -> Result<Spectrum> {
    let n = k.nrows;
    if k.ncols != n || m.nrows != n || m.ncols != n {
        return Err(Error::InvalidInput("stiffness and mass must be square and of equal size".into()));
    }
    if opts.k == 0 || opts.k > n {
        return Err(Error::InvalidInput(format!("requested {} eigenpairs of a problem of size {n}", opts.k)));
    }
    if !(opts.tol > 0.0) || opts.block_size == 0 {
        return Err(Error::InvalidInput("tolerance and block size must be positive".into()));
    }
    for (name, a) in [("stiffness", k), ("mass", m)] {
        let e = a.symmetry_error();
        if e > 1e-10 {
            return Err(Error::InvalidInput(format!("{name} matrix is not symmetric (error {e:.3e})")));
        }
    }
    let mut spec = if n <= DENSE_LIMIT {
        dense_eigs(k, m, opts)?
    } else {
        sparse_eigs(k, m, opts)?
    };
    for x in &mut spec.vectors {
        fix_sign(x);
    }
    Ok(spec)
}

/// First entry of significant size is made positive.
fn fix_sign(x: &mut [f64]) {
    let big = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-6 * big) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn auto_shift(k: &CsrMatrix, m: &CsrMatrix) -> f64 {
    let kd = k.diagonal();
    let md = m.diagonal();
    let n = kd.len() as f64;
    let mean: f64 = kd.iter().zip(&md).map(|(a, b)| a / b).sum::<f64>() / n;
    -1e-4 * mean.max(1e-300)
}

fn dense_eigs(k: &CsrMatrix, m: &CsrMatrix, opts: &EigOptions) -> Result<Spectrum> {
    let n = k.nrows;
    let kd = k.to_dense();
    let mut l = m.to_dense();
    // M = L Lᵀ
    for j in 0..n {
        let mut d = l[j][j];
        for p in 0..j {
            d -= l[j][p] * l[j][p];
        }
        if !(d > 0.0) {
            return Err(Error::InvalidInput("mass matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = l[i][j];
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            l[i][j] = s / d;
        }
        for p in j + 1..n {
            l[j][p] = 0.0;
        }
    }
    let lower_solve = |b: &mut [f64]| {
        for i in 0..n {
            let mut s = b[i];
            for p in 0..i {
                s -= l[i][p] * b[p];
            }
            b[i] = s / l[i][i];
        }
    };
    // C = L^{-1} K L^{-T}, built column by column
    let mut w = vec![vec![0.0; n]; n]; // rows of L^{-1} K
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| kd[i][j]).collect();
        lower_solve(&mut col);
        for i in 0..n {
            w[i][j] = col[i];
        }
    }
    let mut c = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut row = w[i].clone();
        lower_solve(&mut row);
        for j in 0..n {
            c[(i, j)] = row[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = s;
            c[(j, i)] = s;
        }
    }
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonConvergence { iterations: 0, best_residual: f64::NAN })?;
    let s = eig.S();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let mut values = Vec::with_capacity(opts.k);
    let mut vectors = Vec::with_capacity(opts.k);
    let mut residuals = Vec::with_capacity(opts.k);
    for &j in order.iter().take(opts.k) {
        // x = L^{-T} y
        let mut x: Vec<f64> = (0..n).map(|i| u[(i, j)]).collect();
        for i in (0..n).rev() {
            let mut t = x[i];
            for p in i + 1..n {
                t -= l[p][i] * x[p];
            }
            x[i] = t / l[i][i];
        }
        let lam = s[j];
        residuals.push(residual(k, m, lam, &x));
        values.push(lam);
        vectors.push(x);
    }
    Ok(Spectrum { values, vectors, residuals, iterations: 1, shift: 0.0 })
}

fn sparse_eigs(k: &CsrMatrix, m: &CsrMatrix, opts: &EigOptions) -> Result<Spectrum> {
    let base = opts.shift.unwrap_or_else(|| auto_shift(k, m));
    let scale = base.abs().max(1e-12);
    let mut last_err = None;
    for attempt in 0..4 {
        let sigma = base - 1e-3 * attempt as f64 * scale;
        match shift_invert(k, m, sigma, opts) {
            Ok(s) => return Ok(s),
            Err(Error::Factorization { .. }) => last_err = Some(sigma),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Factorization { attempts: 4, shift: last_err.unwrap_or(base) })
}

fn combine(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols[0].len()];
    for (c, &a) in cols.iter().zip(y) {
        if a != 0.0 {
            for (o, x) in out.iter_mut().zip(c) {
                *o += a * x;
            }
        }
    }
    out
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Symmetric eigendecomposition, eigenvalues in descending order.
pub(crate) fn sym_eig_desc(h: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let p = h.len();
    let mut a = Mat::<f64>::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] = 0.5 * (h[i][j] + h[j][i]);
        }
    }
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonConvergence { iterations: 0, best_residual: f64::NAN })?;
    let s = eig.S();
    let u = eig.U();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let vals = order.iter().map(|&j| s[j]).collect();
    let vecs = order.iter().map(|&j| (0..p).map(|i| u[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

/// M-orthonormal Krylov basis `V` with `T V = V H + Q B`, where
/// `T = (K - σM)^{-1} M`, `H = Vᵀ M T V` and `Q` is the next block.
struct Krylov {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    mq: Vec<Vec<f64>>,
    /// `b × m` coupling of the next block.
    coupling: Vec<Vec<f64>>,
}

fn shift_invert(k: &CsrMatrix, m: &CsrMatrix, sigma: f64, opts: &EigOptions) -> Result<Spectrum> {
    let n = k.nrows;
    let nev = opts.k;
    let b = opts.block_size.min(n);
    let exec = opts.exec;
    let fail = || Error::Factorization { attempts: 1, shift: sigma };

    let a = k.lin_comb(1.0, m, -sigma).to_faer()?;
    let sym = factorize_symbolic_cholesky(
        a.symbolic(),
        Side::Lower,
        SymmetricOrdering::Amd,
        CholeskySymbolicParams::default(),
    )
    .map_err(|_| fail())?;
    let mut vals = vec![0.0; sym.len_val()];
    let mut mem = MemBuffer::new(sym.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()));
    let ldlt = sym
        .factorize_numeric_ldlt(
            &mut vals,
            a.as_ref(),
            Side::Lower,
            LdltRegularization::default(),
            Par::Seq,
            MemStack::new(&mut mem),
            Default::default(),
        )
        .map_err(|_| fail())?;
    drop(a);
    let mut solve_mem = MemBuffer::new(sym.solve_in_place_scratch::<f64>(b, Par::Seq));

    // T applied to vectors whose M-products are already known
    let mut apply = |mx: &[Vec<f64>]| -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(mx.len());
        for chunk in mx.chunks(b) {
            let mut rhs = Mat::<f64>::zeros(n, chunk.len());
            for (j, x) in chunk.iter().enumerate() {
                for i in 0..n {
                    rhs[(i, j)] = x[i];
                }
            }
            ldlt.solve_in_place_with_conj(faer::Conj::No, rhs.as_mut(), Par::Seq, MemStack::new(&mut solve_mem));
            for j in 0..chunk.len() {
                let col: Vec<f64> = (0..n).map(|i| rhs[(i, j)]).collect();
                if col.iter().any(|v| !v.is_finite()) {
                    return Err(fail());
                }
                out.push(col);
            }
        }
        Ok(out)
    };

    let m_max = (nev + (2 * b).max(nev / 2) + b).max(3 * b).min(n);
    let keep = (nev + b).min(m_max.saturating_sub(b)).max(nev.min(m_max));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_vec = move || -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect() };

    // M-orthonormalizes `w` against `basis` (with M-products `mbasis`) and
    // the already accepted `q`; returns coefficients and the new vector, or
    // `None` when nothing is left.
    let orth = |w: &mut Vec<f64>,
                basis: &[Vec<f64>],
                mbasis: &[Vec<f64>],
                q: &[Vec<f64>],
                mq: &[Vec<f64>]|
     -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
        let mut cv = vec![0.0; basis.len()];
        let mut cq = vec![0.0; q.len()];
        for _ in 0..2 {
            let c1: Vec<f64> = mbasis.iter().map(|x| dot(x, w)).collect();
            let c2: Vec<f64> = mq.iter().map(|x| dot(x, w)).collect();
            for (j, c) in c1.iter().enumerate() {
                axpy(w, -c, &basis[j]);
                cv[j] += c;
            }
            for (j, c) in c2.iter().enumerate() {
                axpy(w, -c, &q[j]);
                cq[j] += c;
            }
        }
        let mut mw = vec![0.0; n];
        m.matvec_with(exec, w, &mut mw);
        let nrm = dot(w, &mw).max(0.0).sqrt();
        let before = (nrm * nrm + cv.iter().chain(&cq).map(|c| c * c).sum::<f64>()).sqrt();
        if !(nrm > 1e-10 * before) {
            return (cv, cq, None);
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        mw.iter_mut().for_each(|x| *x /= nrm);
        cq.push(nrm);
        (cv, cq, Some(mw))
    };

    // orthonormal block of `count` fresh random vectors against `basis` and `q`
    let fresh = |count: usize,
                 basis: &[Vec<f64>],
                 mbasis: &[Vec<f64>],
                 q: &mut Vec<Vec<f64>>,
                 mq: &mut Vec<Vec<f64>>,
                 random_vec: &mut dyn FnMut() -> Vec<f64>| {
        let mut tries = 0;
        while q.len() < count && tries < 10 * count + 10 {
            tries += 1;
            let mut w = random_vec();
            if let (_, _, Some(mw)) = orth(&mut w, basis, mbasis, q, mq) {
                q.push(w);
                mq.push(mw);
            }
        }
    };

    let mut kr = Krylov { v: Vec::new(), mv: Vec::new(), h: Vec::new(), q: Vec::new(), mq: Vec::new(), coupling: Vec::new() };
    fresh(b, &[], &[], &mut kr.q, &mut kr.mq, &mut random_vec);
    let mut best = f64::INFINITY;

    for it in 1..=opts.max_iter {
        if kr.q.is_empty() {
            break;
        }
        // append the pending block; its coupling rows become H entries
        let m0 = kr.v.len();
        let bq = kr.q.len();
        for row in kr.h.iter_mut() {
            row.resize(m0 + bq, 0.0);
        }
        for i in 0..bq {
            let mut row = vec![0.0; m0 + bq];
            for j in 0..m0 {
                row[j] = kr.coupling[i][j];
                kr.h[j][m0 + i] = kr.coupling[i][j];
            }
            kr.h.push(row);
        }
        let new_mq = std::mem::take(&mut kr.mq);
        let w = apply(&new_mq)?;
        kr.v.append(&mut kr.q);
        kr.mv.extend(new_mq);
        let mt = kr.v.len();

        // orthogonalize T Q against V and within the block
        let mut coupling = vec![vec![0.0; mt]; 0];
        let mut q = Vec::new();
        let mut mq = Vec::new();
        let mut rcols: Vec<Vec<f64>> = Vec::new();
        for (j, mut wj) in w.into_iter().enumerate() {
            let (cv, cq, mw) = orth(&mut wj, &kr.v, &kr.mv, &q, &mq);
            for (i, c) in cv.iter().enumerate() {
                kr.h[i][m0 + j] = *c;
                if i < m0 {
                    kr.h[m0 + j][i] = *c;
                }
            }
            let mut col = cq;
            if let Some(mw) = mw {
                q.push(wj);
                mq.push(mw);
            } else {
                col.push(0.0);
                let mut w2 = Vec::new();
                let mut mw2 = Vec::new();
                let need = q.len() + 1;
                let mut tmpq = q.clone();
                let mut tmpmq = mq.clone();
                fresh(need, &kr.v, &kr.mv, &mut tmpq, &mut tmpmq, &mut random_vec);
                if tmpq.len() == need {
                    w2 = tmpq.pop().unwrap();
                    mw2 = tmpmq.pop().unwrap();
                }
                if !w2.is_empty() {
                    q.push(w2);
                    mq.push(mw2);
                }
            }
            rcols.push(col);
        }
        // symmetrize the new diagonal block
        for i in 0..bq {
            for j in 0..i {
                let s = 0.5 * (kr.h[m0 + i][m0 + j] + kr.h[m0 + j][m0 + i]);
                kr.h[m0 + i][m0 + j] = s;
                kr.h[m0 + j][m0 + i] = s;
            }
        }
        for i in 0..q.len() {
            let mut row = vec![0.0; mt];
            for (j, col) in rcols.iter().enumerate() {
                if i < col.len() {
                    row[m0 + j] = col[i];
                }
            }
            coupling.push(row);
        }
        kr.q = q;
        kr.mq = mq;
        kr.coupling = coupling;

        if mt < nev {
            continue;
        }
        let (nu, y) = sym_eig_desc(&kr.h)?;

        // residual estimates: K x - λ M x = -(1/ν) (K - σM) Q (B y)
        let aq: Vec<Vec<f64>> = kr
            .q
            .iter()
            .zip(&kr.mq)
            .map(|(q, mq)| {
                let mut r = k.mul(q);
                axpy(&mut r, -sigma, mq);
                r
            })
            .collect();
        let mut est = Vec::with_capacity(nev);
        for i in 0..nev {
            let mut r = vec![0.0; n];
            for (row, aqr) in kr.coupling.iter().zip(&aq) {
                let s = dot(row, &y[i]);
                if s != 0.0 {
                    axpy(&mut r, s / nu[i], aqr);
                }
            }
            let mx = combine(&kr.mv, &y[i]);
            est.push(norm2(&r) / norm2(&mx));
        }
        let worst = est.iter().fold(0.0f64, |a, &r| a.max(r));
        best = best.min(worst);
        if worst <= opts.tol || kr.q.is_empty() {
            let mut values = Vec::with_capacity(nev);
            let mut vectors = Vec::with_capacity(nev);
            let mut residuals = Vec::with_capacity(nev);
            for yi in y.iter().take(nev) {
                let x = combine(&kr.v, yi);
                let kx = k.mul(&x);
                let mx = m.mul(&x);
                let lam = dot(&x, &kx) / dot(&x, &mx);
                let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, c)| a - lam * c).collect();
                residuals.push(norm2(&r) / norm2(&mx));
                values.push(lam);
                vectors.push(x);
            }
            let fresh_worst = residuals.iter().fold(0.0f64, |a, &r| a.max(r));
            if fresh_worst <= opts.tol {
                let mut order: Vec<usize> = (0..nev).collect();
                order.sort_by(|&a, &c| values[a].total_cmp(&values[c]));
                return Ok(Spectrum {
                    values: order.iter().map(|&i| values[i]).collect(),
                    vectors: order.iter().map(|&i| std::mem::take(&mut vectors[i])).collect(),
                    residuals: order.iter().map(|&i| residuals[i]).collect(),
                    iterations: it,
                    shift: sigma,
                });
            }
            best = best.min(fresh_worst);
            if kr.q.is_empty() {
                break;
            }
        }

        // thick restart on the leading Ritz vectors
        if mt + kr.q.len() > m_max {
            let p = keep.min(mt);
            let v: Vec<Vec<f64>> = (0..p).map(|i| combine(&kr.v, &y[i])).collect();
            let mv: Vec<Vec<f64>> = (0..p).map(|i| combine(&kr.mv, &y[i])).collect();
            let mut h = vec![vec![0.0; p]; p];
            for (i, row) in h.iter_mut().enumerate() {
                row[i] = nu[i];
            }
            let coupling = kr.coupling.iter().map(|row| (0..p).map(|i| dot(row, &y[i])).collect()).collect();
            kr.v = v;
            kr.mv = mv;
            kr.h = h;
            kr.coupling = coupling;
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, best_residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> (CsrMatrix, CsrMatrix) {
        // Dirichlet finite differences on (0, π) with identity mass scaled by h
        let h = std::f64::consts::PI / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 / h));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 / h));
                t.push((i + 1, i, -1.0 / h));
            }
        }
        let k = CsrMatrix::from_triplets(n, n, &t);
        let m = CsrMatrix::from_diagonal(&vec![h; n]);
        (k, m)
    }

    fn exact(n: usize, j: usize) -> f64 {
        let h = std::f64::consts::PI / (n + 1) as f64;
        (2.0 / h * (j as f64 * h / 2.0).sin()).powi(2)
    }

    #[test]
    fn diagonal_problem() {
        let k = CsrMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let m = CsrMatrix::identity(3);
        let s = smallest_eigs(&k, &m, &EigOptions::with_k(2)).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-14);
        assert!((s.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sparse_path_matches_closed_form() {
        let n = 1500;
        let (k, m) = laplace_1d(n);
        let s = smallest_eigs(&k, &m, &EigOptions::with_k(8)).unwrap();
        for j in 0..8 {
            let e = exact(n, j + 1);
            assert!((s.values[j] - e).abs() < 1e-9 * e, "{j}: {} vs {e}", s.values[j]);
            assert!(s.residuals[j] <= 1e-9);
        }
        for i in 0..8 {
            for j in 0..8 {
                let g = dot(&s.vectors[i], &m.mul(&s.vectors[j]));
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_and_sparse_agree() {
        let n = 380;
        let (k, m) = laplace_1d(n);
        let d = smallest_eigs(&k, &m, &EigOptions::with_k(5)).unwrap();
        let s = shift_invert(&k, &m, -1e-3, &EigOptions::with_k(5)).unwrap();
        for j in 0..5 {
            assert!((d.values[j] - s.values[j]).abs() < 1e-10 * d.values[j]);
        }
    }

    #[test]
    fn cluster_grouping() {
        let c = clusters(&[0.0, 1e-13, 1.0, 1.0 + 1e-9, 2.0], 1e-6);
        assert_eq!(c, vec![0..2, 2..4, 4..5]);
    }

    #[test]
    fn rejects_oversized_request() {
        let k = CsrMatrix::identity(3);
        assert!(matches!(
            smallest_eigs(&k, &k, &EigOptions::with_k(4)),
            Err(Error::InvalidInput(_))
        ));
    }
}
