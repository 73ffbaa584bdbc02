//! The vector Laplacian on fields whose trace is tangential on Neumann faces
//! and normal on the Dirichlet face, with the shape-operator boundary term.
//!
//! Constraints are nodal: at each boundary vertex the admissible values form
//! a subspace of `R^d` spanned by an orthonormal basis `Z_v`, and the
//! eigenproblem is solved for the coefficients in these bases.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigensolve::{smallest_eigs, EigOptions};
use crate::error::{Error, Result};
use crate::fem_scalar::{assemble_full, recovered_gradient, ScalarEigenfunction};
use crate::geometry::{Bc, FaceGeometry, FaceId};
use crate::linalg::{self, Vec3};
use crate::mesh::Mesh;
use crate::par::{map_indexed, Exec};
use crate::sparse::{dot, CsrMatrix};

/// Rows whose remaining norm falls below this are dropped.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct VectorSystem {
    pub dim: usize,
    /// Scalar P1 stiffness and mass over all vertices; the block operators
    /// are `d` copies of these.
    pub scalar_stiffness: CsrMatrix,
    pub scalar_mass: CsrMatrix,
    /// The boundary term `-∫<Lu, v>` over the unconstrained `(n d)` dofs,
    /// interleaved per vertex.
    pub boundary_term: CsrMatrix,
    /// Orthonormal constraint rows per vertex.
    pub constraints: Vec<Vec<Vec3>>,
    /// Orthonormal basis of the admissible values per vertex.
    pub basis: Vec<Vec<Vec3>>,
    pub offsets: Vec<usize>,
    /// Reduced operators `Zᵀ K Z` and `Zᵀ M Z`.
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub boundary_vertices: usize,
    /// Boundary vertices where every component is fixed.
    pub clamped_vertices: usize,
}

impl VectorSystem {
    pub fn num_vertices(&self) -> usize {
        self.basis.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.stiffness.nrows
    }

    pub fn boundary_form_active(&self) -> bool {
        self.boundary_term.values.iter().any(|&v| v != 0.0)
    }

    /// Largest absolute entry of the boundary term.
    pub fn boundary_form_size(&self) -> f64 {
        self.boundary_term.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Fraction of boundary vertices that are fully clamped.
    pub fn clamped_fraction(&self) -> f64 {
        if self.boundary_vertices == 0 {
            0.0
        } else {
            self.clamped_vertices as f64 / self.boundary_vertices as f64
        }
    }

    /// `u = Z y`, interleaved per vertex.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut u = vec![0.0; self.num_vertices() * d];
        for (v, b) in self.basis.iter().enumerate() {
            for (p, z) in b.iter().enumerate() {
                let c = y[self.offsets[v] + p];
                for i in 0..d {
                    u[v * d + i] += c * z[i];
                }
            }
        }
        u
    }

    /// `Zᵀ u`.
    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y = vec![0.0; self.num_dofs()];
        for (v, b) in self.basis.iter().enumerate() {
            for (p, z) in b.iter().enumerate() {
                y[self.offsets[v] + p] = (0..d).map(|i| z[i] * u[v * d + i]).sum();
            }
        }
        y
    }

    /// `max |B u|` over all constraint rows.
    pub fn constraint_violation(&self, u: &[f64]) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for (v, rows) in self.constraints.iter().enumerate() {
            for r in rows {
                let s: f64 = (0..d).map(|i| r[i] * u[v * d + i]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Constraint matrix `B` with one row per constraint over the `(n d)`
    /// unconstrained dofs.
    pub fn constraint_matrix(&self) -> CsrMatrix {
        let d = self.dim;
        let mut t = Vec::new();
        let mut row = 0;
        for (v, rows) in self.constraints.iter().enumerate() {
            for r in rows {
                for i in 0..d {
                    if r[i] != 0.0 {
                        t.push((row, v * d + i, r[i]));
                    }
                }
                row += 1;
            }
        }
        CsrMatrix::from_triplets(row, self.num_vertices() * d, &t)
    }

    /// Block stiffness (componentwise Laplacian plus boundary term) over the
    /// `(n d)` unconstrained dofs.
    pub fn block_stiffness(&self) -> CsrMatrix {
        let blocks = block_diag(&self.scalar_stiffness, self.dim);
        blocks.lin_comb(1.0, &self.boundary_term, 1.0)
    }

    pub fn block_mass(&self) -> CsrMatrix {
        block_diag(&self.scalar_mass, self.dim)
    }

    /// `(Ku, u) / (Mu, u)` for an admissible field `u`.
    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        let y = self.restrict(u);
        dot(&y, &self.stiffness.mul(&y)) / dot(&y, &self.mass.mul(&y))
    }

    /// `‖u‖²_M` for the unconstrained block mass.
    pub fn mass_norm_sq(&self, u: &[f64]) -> f64 {
        block_inner(&self.scalar_mass, self.dim, u, u)
    }
}

fn block_diag(a: &CsrMatrix, d: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(a.nnz() * d);
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            for c in 0..d {
                t.push((i * d + c, j * d + c, v));
            }
        }
    }
    CsrMatrix::from_triplets(a.nrows * d, a.ncols * d, &t)
}

/// `uᵀ (I_d ⊗ A) w` for interleaved vectors.
pub fn block_inner(a: &CsrMatrix, d: usize, u: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            for c in 0..d {
                s += u[i * d + c] * v * w[j * d + c];
            }
        }
    }
    s
}

/// Orthonormalizes `rows` with column pivoting (largest remaining norm
/// first), dropping rows below [`PIVOT_TOL`].
fn orthonormalize(rows: &[Vec3], dim: usize) -> Vec<Vec3> {
    let mut rest: Vec<Vec3> = rows.to_vec();
    let mut out: Vec<Vec3> = Vec::new();
    while out.len() < dim {
        let (best, norm) = rest
            .iter()
            .enumerate()
            .map(|(i, r)| (i, linalg::norm(*r)))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || norm < PIVOT_TOL {
            break;
        }
        let q = linalg::scale(rest.swap_remove(best), 1.0 / norm);
        for r in rest.iter_mut() {
            // two passes keep the result orthogonal to rounding
            for _ in 0..2 {
                let c = linalg::dot(*r, q);
                *r = linalg::sub(*r, linalg::scale(q, c));
            }
        }
        out.push(q);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `rows` (orthonormal).
fn complement(rows: &[Vec3], dim: usize) -> Vec<Vec3> {
    let mut cand: Vec<Vec3> = (0..dim)
        .map(|i| {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            for q in rows {
                for _ in 0..2 {
                    let c = linalg::dot(e, *q);
                    e = linalg::sub(e, linalg::scale(*q, c));
                }
            }
            e
        })
        .collect();
    let n = dim - rows.len();
    let mut out = orthonormalize(&cand, dim);
    out.truncate(n);
    cand.clear();
    out
}

fn tangent_basis(n: Vec3, dim: usize) -> Vec<Vec3> {
    complement(&[n], dim)
}

/// Outward normal of face `face` at vertex `p`.
fn face_normal_at(
    geometry: &BTreeMap<FaceId, FaceGeometry>,
    fallback: &BTreeMap<FaceId, Vec3>,
    face: FaceId,
    p: Vec3,
) -> Vec3 {
    match geometry.get(&face) {
        Some(g) => g.normal_at(p),
        None => linalg::normalize(fallback[&face]),
    }
}

pub fn assemble_vector(mesh: &Mesh) -> Result<VectorSystem> {
    assemble_vector_with(mesh, Exec::default())
}

pub fn assemble_vector_with(mesh: &Mesh, exec: Exec) -> Result<VectorSystem> {
    let d = mesh.dim;
    if d < 2 {
        return Err(Error::InvalidInput("vector problems need dimension 2 or 3".into()));
    }
    let nv = mesh.num_vertices();
    for f in &mesh.boundary_facets {
        if !mesh.bc_labels.contains_key(&f.face_id) {
            return Err(Error::Validation(format!(
                "boundary facet tagged with face {} which has no bc label",
                f.face_id
            )));
        }
    }

    // exact face geometry when the domain is known
    let mut geometry = BTreeMap::new();
    if let Some(dom) = &mesh.domain {
        let flat = dom.flattened()?;
        for f in &mesh.boundary_facets {
            if let std::collections::btree_map::Entry::Vacant(e) = geometry.entry(f.face_id) {
                e.insert(flat.face_geometry(f.face_id)?);
            }
        }
    }
    for (&face, g) in &geometry {
        if g.is_curved()
            && mesh
                .boundary_facets
                .iter()
                .any(|f| f.face_id == face && f.shape_samples.iter().all(|s| *s == linalg::ZERO3))
        {
            return Err(Error::Validation(format!("curved face {face} has facets without shape samples")));
        }
    }

    // incident faces per vertex and fallback normals accumulated per (vertex, face)
    let mut incident: Vec<BTreeMap<FaceId, Vec3>> = vec![BTreeMap::new(); nv];
    for f in &mesh.boundary_facets {
        for &v in f.verts(d) {
            let acc = incident[v].entry(f.face_id).or_insert([0.0; 3]);
            *acc = linalg::add(*acc, f.normal);
        }
    }

    let per_vertex = map_indexed(exec, nv, |v| {
        let faces = &incident[v];
        if faces.is_empty() {
            let basis: Vec<Vec3> = (0..d)
                .map(|i| {
                    let mut e = [0.0; 3];
                    e[i] = 1.0;
                    e
                })
                .collect();
            return (Vec::new(), basis);
        }
        let p = mesh.vertices[v];
        let mut rows = Vec::new();
        for &face in faces.keys() {
            let n = face_normal_at(&geometry, faces, face, p);
            match mesh.bc(face) {
                Bc::Neumann => rows.push(n),
                Bc::Dirichlet => rows.extend(tangent_basis(n, d)),
            }
        }
        let q = orthonormalize(&rows, d);
        let basis = complement(&q, d);
        (q, basis)
    });
    let (constraints, basis): (Vec<Vec<Vec3>>, Vec<Vec<Vec3>>) = per_vertex.into_iter().unzip();

    let boundary_vertices = incident.iter().filter(|f| !f.is_empty()).count();
    let clamped_vertices = basis.iter().zip(&incident).filter(|(b, f)| b.is_empty() && !f.is_empty()).count();

    let mut offsets = Vec::with_capacity(nv + 1);
    let mut total = 0;
    for b in &basis {
        offsets.push(total);
        total += b.len();
    }
    offsets.push(total);

    let (scalar_stiffness, scalar_mass) = assemble_full(mesh, exec);

    // boundary term: -∫<L u, v> with P1 traces and one shape sample per facet
    let mut bt = Vec::new();
    for f in &mesh.boundary_facets {
        let nonzero: Vec<_> = f.shape_samples.iter().filter(|s| **s != linalg::ZERO3).collect();
        if nonzero.is_empty() {
            continue;
        }
        let mut l = linalg::ZERO3;
        for s in &nonzero {
            for i in 0..3 {
                for j in 0..3 {
                    l[i][j] += s[i][j] / nonzero.len() as f64;
                }
            }
        }
        let meas = mesh.facet_measure(f);
        let fv = f.verts(d);
        let denom = (d * (d + 1)) as f64;
        for (a, &va) in fv.iter().enumerate() {
            for (b, &vb) in fv.iter().enumerate() {
                let w = meas * if a == b { 2.0 } else { 1.0 } / denom;
                for i in 0..d {
                    for j in 0..d {
                        if l[i][j] != 0.0 {
                            bt.push((va * d + i, vb * d + j, -w * l[i][j]));
                        }
                    }
                }
            }
        }
    }
    let boundary_term = CsrMatrix::from_triplets(nv * d, nv * d, &bt);

    // reduced operators, row by row
    let rows = map_indexed(exec, nv, |v| {
        let mut tk = Vec::new();
        let mut tm = Vec::new();
        if basis[v].is_empty() {
            return (tk, tm);
        }
        let kr: BTreeMap<usize, f64> = scalar_stiffness.row(v).collect();
        for (w, mval) in scalar_mass.row(v) {
            if basis[w].is_empty() {
                continue;
            }
            let kval = kr.get(&w).copied().unwrap_or(0.0);
            for (p, zp) in basis[v].iter().enumerate() {
                for (q, zq) in basis[w].iter().enumerate() {
                    let g = linalg::dot(*zp, *zq);
                    if g == 0.0 {
                        continue;
                    }
                    tk.push((offsets[v] + p, offsets[w] + q, kval * g));
                    tm.push((offsets[v] + p, offsets[w] + q, mval * g));
                }
            }
        }
        for i in 0..d {
            for (col, val) in boundary_term.row(v * d + i) {
                let (w, j) = (col / d, col % d);
                for (p, zp) in basis[v].iter().enumerate() {
                    for (q, zq) in basis[w].iter().enumerate() {
                        let x = zp[i] * val * zq[j];
                        if x != 0.0 {
                            tk.push((offsets[v] + p, offsets[w] + q, x));
                        }
                    }
                }
            }
        }
        (tk, tm)
    });
    let mut tk = Vec::new();
    let mut tm = Vec::new();
    for (a, b) in rows {
        tk.extend(a);
        tm.extend(b);
    }
    let stiffness = CsrMatrix::from_triplets(total, total, &tk);
    let mass = CsrMatrix::from_triplets(total, total, &tm);

    Ok(VectorSystem {
        dim: d,
        scalar_stiffness,
        scalar_mass,
        boundary_term,
        constraints,
        basis,
        offsets,
        stiffness,
        mass,
        boundary_vertices,
        clamped_vertices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum FieldClass {
    GradientType { scalar_index: usize, mismatch: f64 },
    DivFreeType { divergence: f64 },
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: FieldClass,
    /// Distance to the span of matched scalar gradients (mass norm).
    pub mismatch: f64,
    /// Normalized weak divergence plus normal-trace violation.
    pub divergence: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct VectorEigenfield {
    /// `d` values per vertex, interleaved.
    pub values: Vec<f64>,
    pub eigenvalue: f64,
    pub residual: f64,
    pub classification: Option<Classification>,
}

impl VectorEigenfield {
    pub fn component(&self, dim: usize, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(dim).copied().collect()
    }
}

pub fn solve_vector_spectrum(system: &VectorSystem, opts: &EigOptions) -> Result<Vec<VectorEigenfield>> {
    if opts.k > system.num_dofs() {
        return Err(Error::InvalidInput(format!(
            "requested {} eigenpairs but the reduced system has {} dofs",
            opts.k,
            system.num_dofs()
        )));
    }
    let spec = smallest_eigs(&system.stiffness, &system.mass, opts)?;
    Ok(spec
        .vectors
        .iter()
        .zip(spec.values.iter().zip(&spec.residuals))
        .map(|(y, (&eta, &res))| VectorEigenfield {
            values: system.lift(y),
            eigenvalue: eta,
            residual: res,
            classification: None,
        })
        .collect())
}

/// Thresholds of the Helmholtz classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyTolerances {
    /// Relative eigenvalue window for matching scalar eigenvalues.
    pub tol_eig: f64,
    pub class_tol: f64,
    /// Relative gap below which neighbouring eigenvalues are treated as one
    /// cluster before classification.
    pub cluster_gap: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances { tol_eig: 0.05, class_tol: 0.1, cluster_gap: 0.01 }
    }
}

/// Nodal gradient fields of scalar eigenfunctions, reused across
/// classifications.
#[derive(Debug, Clone)]
pub struct GradientBank {
    pub eigenvalues: Vec<f64>,
    /// Interleaved nodal fields (volume-weighted recovery of the cell
    /// gradients).
    pub fields: Vec<Vec<f64>>,
}

impl GradientBank {
    /// Eigenfunctions with eigenvalue at most `1e-8 · max μ` (constants) are
    /// skipped.
    pub fn new(mesh: &Mesh, scalar: &[ScalarEigenfunction]) -> Self {
        let d = mesh.dim;
        let top = scalar.iter().fold(0.0f64, |m, s| m.max(s.eigenvalue.abs()));
        let mut eigenvalues = Vec::new();
        let mut fields = Vec::new();
        for s in scalar {
            if s.eigenvalue <= 1e-8 * top.max(1.0) {
                eigenvalues.push(s.eigenvalue);
                fields.push(Vec::new());
                continue;
            }
            let g = recovered_gradient(mesh, &s.gradients);
            let mut f = Vec::with_capacity(g.len() * d);
            for x in g {
                f.extend_from_slice(&x[..d]);
            }
            eigenvalues.push(s.eigenvalue);
            fields.push(f);
        }
        GradientBank { eigenvalues, fields }
    }
}

/// Normalized weak divergence `‖div_h u‖ / √η` (lumped L² projection of
/// the cellwise divergence onto P1) plus the normal-trace violation on
/// Neumann facets, `‖u·ν‖_{L²(Γ_N)} η^{-1/4}`.
pub fn divergence_measure(mesh: &Mesh, u: &[f64], eta: f64) -> f64 {
    let d = mesh.dim;
    let nv = mesh.num_vertices();
    let mut b = vec![0.0; nv];
    let mut lumped = vec![0.0; nv];
    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c);
        let (g, vol) = linalg::barycentric_gradients(d, &pts);
        let cell = mesh.cell(c);
        let mut div = 0.0;
        for (a, &v) in cell.iter().enumerate() {
            for i in 0..d {
                div += g[a][i] * u[v * d + i];
            }
        }
        let share = vol / (d + 1) as f64;
        for &v in cell {
            b[v] += div * share;
            lumped[v] += share;
        }
    }
    let div_sq: f64 = b.iter().zip(&lumped).map(|(bv, m)| bv * bv / m).sum();
    let mut trace_sq = 0.0;
    for f in &mesh.boundary_facets {
        if mesh.bc(f.face_id) != Bc::Neumann {
            continue;
        }
        let meas = mesh.facet_measure(f);
        let fv = f.verts(d);
        let mean: f64 = fv
            .iter()
            .map(|&v| {
                let s: f64 = (0..d).map(|i| u[v * d + i] * f.normal[i]).sum();
                s * s
            })
            .sum::<f64>()
            / fv.len() as f64;
        trace_sq += meas * mean;
    }
    let eta = eta.abs().max(1e-300);
    div_sq.sqrt() / eta.sqrt() + trace_sq.sqrt() / eta.powf(0.25)
}

/// Helmholtz type of an eigenfield: gradient of a scalar eigenfunction with
/// eigenvalue within the window, divergence-free, or neither.
pub fn classify_eigenfield(
    mesh: &Mesh,
    system: &VectorSystem,
    u: &VectorEigenfield,
    bank: &GradientBank,
    tol: &ClassifyTolerances,
) -> Classification {
    let d = mesh.dim;
    let eta = u.eigenvalue;
    let unorm = system.mass_norm_sq(&u.values).sqrt();
    let window: Vec<usize> = (0..bank.eigenvalues.len())
        .filter(|&i| !bank.fields[i].is_empty() && (bank.eigenvalues[i] - eta).abs() <= tol.tol_eig * eta.abs())
        .collect();

    let mut mismatch = 1.0;
    let mut matched = None;
    if !window.is_empty() && unorm > 0.0 {
        let m = window.len();
        let mut gram = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for (a, &i) in window.iter().enumerate() {
            rhs[a] = block_inner(&system.scalar_mass, d, &bank.fields[i], &u.values) / unorm;
            for (b, &j) in window.iter().enumerate().take(a + 1) {
                let g = block_inner(&system.scalar_mass, d, &bank.fields[i], &bank.fields[j]);
                gram[a][b] = g;
                gram[b][a] = g;
            }
        }
        let coef = solve_spd(&gram, &rhs);
        let captured: f64 = coef.iter().zip(&rhs).map(|(c, r)| c * r).sum();
        mismatch = (1.0 - captured).max(0.0).sqrt();
        let best = (0..m)
            .max_by(|&a, &b| (rhs[a] * rhs[a] / gram[a][a]).total_cmp(&(rhs[b] * rhs[b] / gram[b][b])))
            .unwrap();
        matched = Some(window[best]);
    }
    let divergence = if unorm > 0.0 {
        let scaled: Vec<f64> = u.values.iter().map(|x| x / unorm).collect();
        divergence_measure(mesh, &scaled, eta)
    } else {
        f64::INFINITY
    };
    let grad_ok = mismatch <= tol.class_tol && matched.is_some();
    let div_ok = divergence <= tol.class_tol;
    let (class, note) = match (grad_ok, div_ok) {
        (true, both) => (
            FieldClass::GradientType { scalar_index: matched.unwrap(), mismatch },
            both.then(|| "both gradient and divergence-free tests passed".to_string()),
        ),
        (false, true) => (FieldClass::DivFreeType { divergence }, None),
        (false, false) => (FieldClass::Unclassified, None),
    };
    Classification { class, mismatch, divergence, note }
}

/// Classifies a computed spectrum cluster by cluster. Inside a cluster of
/// nearly equal eigenvalues the eigenbasis is arbitrary, so it is first
/// rotated to diagonalize the projection onto the matching scalar gradients;
/// gradient and divergence-free directions then separate. Rotated fields
/// carry their Rayleigh quotient and true residual. Singleton clusters are
/// returned unchanged apart from the classification.
pub fn classify_spectrum(
    mesh: &Mesh,
    system: &VectorSystem,
    fields: &[VectorEigenfield],
    bank: &GradientBank,
    tol: &ClassifyTolerances,
) -> Result<Vec<VectorEigenfield>> {
    let d = system.dim;
    let mut out = Vec::with_capacity(fields.len());
    let mut start = 0;
    while start < fields.len() {
        let mut end = start + 1;
        while end < fields.len() {
            let (a, b) = (fields[end - 1].eigenvalue, fields[end].eigenvalue);
            if (b - a).abs() > tol.cluster_gap * a.abs().max(b.abs()) {
                break;
            }
            end += 1;
        }
        let group = &fields[start..end];
        let mean = group.iter().map(|f| f.eigenvalue).sum::<f64>() / group.len() as f64;
        let window: Vec<usize> = (0..bank.eigenvalues.len())
            .filter(|&i| !bank.fields[i].is_empty() && (bank.eigenvalues[i] - mean).abs() <= tol.tol_eig * mean.abs())
            .collect();
        let rotated: Vec<VectorEigenfield> = if group.len() == 1 || window.is_empty() {
            group.to_vec()
        } else {
            let m = window.len();
            let mut gram = vec![vec![0.0; m]; m];
            for (a, &i) in window.iter().enumerate() {
                for (b, &j) in window.iter().enumerate().take(a + 1) {
                    let g = block_inner(&system.scalar_mass, d, &bank.fields[i], &bank.fields[j]);
                    gram[a][b] = g;
                    gram[b][a] = g;
                }
            }
            // cross[p][a] = (u_p, g_a)_M
            let cross: Vec<Vec<f64>> = group
                .iter()
                .map(|u| window.iter().map(|&i| block_inner(&system.scalar_mass, d, &u.values, &bank.fields[i])).collect())
                .collect();
            let solved: Vec<Vec<f64>> = cross.iter().map(|c| solve_spd(&gram, c)).collect();
            let p = group.len();
            let proj: Vec<Vec<f64>> = (0..p)
                .map(|i| (0..p).map(|j| dot(&cross[i], &solved[j])).collect())
                .collect();
            let (_, vecs) = crate::eigensolve::sym_eig_desc(&proj)?;
            vecs.iter()
                .map(|q| {
                    let mut values = vec![0.0; group[0].values.len()];
                    for (c, u) in q.iter().zip(group) {
                        for (x, y) in values.iter_mut().zip(&u.values) {
                            *x += c * y;
                        }
                    }
                    let y = system.restrict(&values);
                    let eta = dot(&y, &system.stiffness.mul(&y)) / dot(&y, &system.mass.mul(&y));
                    let residual = crate::eigensolve::residual(&system.stiffness, &system.mass, eta, &y);
                    VectorEigenfield { values, eigenvalue: eta, residual, classification: None }
                })
                .collect()
        };
        for mut f in rotated {
            f.classification = Some(classify_eigenfield(mesh, system, &f, bank, tol));
            out.push(f);
        }
        start = end;
    }
    Ok(out)
}

/// Small dense SPD solve with a diagonal shift against round-off.
fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let scale = (0..n).fold(0.0f64, |m, i| m.max(a[i][i]));
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut s = a[j][j] + 1e-14 * scale;
        for p in 0..j {
            s -= l[j][p] * l[j][p];
        }
        let s = s.max(1e-300).sqrt();
        l[j][j] = s;
        for i in j + 1..n {
            let mut t = a[i][j];
            for p in 0..j {
                t -= l[i][p] * l[j][p];
            }
            l[i][j] = t / s;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for p in 0..i {
            y[i] -= l[i][p] * y[p];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for p in i + 1..n {
            y[i] -= l[p][i] * y[p];
        }
        y[i] /= l[i][i];
    }
    y
}

/// Deterministic random admissible fields, lifted to all vertices.
pub fn random_admissible(system: &VectorSystem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let y: Vec<f64> = (0..system.num_dofs()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            system.lift(&y)
        })
        .collect()
}

/// Projects a nodal field onto the admissible space (`Z Zᵀ u`).
pub fn project_admissible(system: &VectorSystem, u: &[f64]) -> Vec<f64> {
    system.lift(&system.restrict(u))
}

/// Per-vertex CSV `x y [z] u1 u2 [u3]` with a comment header.
pub fn eigenfield_csv(mesh: &Mesh, u: &[f64]) -> String {
    let d = mesh.dim;
    let names = ["x", "y", "z"];
    let mut s = String::new();
    let head: Vec<String> = names[..d]
        .iter()
        .map(|n| n.to_string())
        .chain((1..=d).map(|i| format!("u{i}")))
        .collect();
    let _ = writeln!(s, "# {}", head.join(" "));
    for (v, p) in mesh.vertices.iter().enumerate() {
        let vals: Vec<String> = p[..d]
            .iter()
            .chain(&u[v * d..(v + 1) * d])
            .map(|x| format!("{x:.16e}"))
            .collect();
        let _ = writeln!(s, "{}", vals.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormalize_drops_dependent_rows() {
        let q = orthonormalize(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3);
        assert_eq!(q.len(), 2);
        let c = complement(&q, 3);
        assert_eq!(c, vec![[0.0, 0.0, 1.0]]);
    }

    #[test]
    fn spanning_rows_clamp() {
        let q = orthonormalize(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 2);
        assert!(complement(&q, 2).is_empty());
    }
}
