//! P1 Lagrange discretization of the scalar Laplacian with Neumann or mixed
//! Neumann-Dirichlet conditions.

use crate::eigensolve::{smallest_eigs, EigOptions};
use crate::error::{Error, Result};
use crate::geometry::Bc;
use crate::linalg::{self, Vec3};
use crate::mesh::Mesh;
use crate::par::{map_indexed, Exec};
use crate::sparse::CsrMatrix;

/// Element stiffness and mass of one simplex, `(d+1)^2` entries each in
/// row-major order.
#[derive(Debug, Clone, Copy)]
pub struct ElementMatrices {
    pub stiffness: [f64; 16],
    pub mass: [f64; 16],
}

pub fn element_matrices(dim: usize, p: &[Vec3]) -> ElementMatrices {
    let (g, vol) = linalg::barycentric_gradients(dim, p);
    let n = dim + 1;
    let mut stiffness = [0.0; 16];
    let mut mass = [0.0; 16];
    let mscale = vol / ((n * (n + 1)) as f64);
    for a in 0..n {
        for b in 0..n {
            stiffness[a * n + b] = vol * linalg::dot(g[a], g[b]);
            mass[a * n + b] = if a == b { 2.0 * mscale } else { mscale };
        }
    }
    ElementMatrices { stiffness, mass }
}

#[derive(Debug, Clone)]
pub struct ScalarSystem {
    pub dim: usize,
    /// Over all vertices, before Dirichlet rows are removed.
    pub full_stiffness: CsrMatrix,
    pub full_mass: CsrMatrix,
    /// Restricted to the free dofs.
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Vertex index of each free dof.
    pub free_dofs: Vec<usize>,
    /// Dof index of each vertex, `None` on Dirichlet vertices.
    pub dof_of_vertex: Vec<Option<usize>>,
}

impl ScalarSystem {
    pub fn num_dofs(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.free_dofs.len() < self.dof_of_vertex.len()
    }

    /// Extends a dof vector by zero to all vertices.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dof_of_vertex.len()];
        for (k, &v) in self.free_dofs.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&v| values[v]).collect()
    }
}

/// Vertices lying on a Dirichlet facet (closure of the Dirichlet face).
pub fn dirichlet_vertices(mesh: &Mesh) -> Result<Vec<bool>> {
    let mut mask = vec![false; mesh.num_vertices()];
    for f in &mesh.boundary_facets {
        let bc = mesh.bc_labels.get(&f.face_id).ok_or_else(|| {
            Error::Validation(format!("boundary facet tagged with face {} which has no bc label", f.face_id))
        })?;
        if *bc == Bc::Dirichlet {
            for &v in f.verts(mesh.dim) {
                mask[v] = true;
            }
        }
    }
    Ok(mask)
}

/// Assembles `(K, M)` over all vertices. Element matrices are computed
/// according to `exec`; accumulation follows cell order, so the result is
/// bitwise independent of the policy.
pub fn assemble_full(mesh: &Mesh, exec: Exec) -> (CsrMatrix, CsrMatrix) {
    let d = mesh.dim;
    let n = d + 1;
    let elems = map_indexed(exec, mesh.num_cells(), |c| element_matrices(d, &mesh.cell_points(c)));
    let mut tk = Vec::with_capacity(mesh.num_cells() * n * n);
    let mut tm = Vec::with_capacity(mesh.num_cells() * n * n);
    for (c, e) in elems.iter().enumerate() {
        let cell = mesh.cell(c);
        for a in 0..n {
            for b in 0..n {
                tk.push((cell[a], cell[b], e.stiffness[a * n + b]));
                tm.push((cell[a], cell[b], e.mass[a * n + b]));
            }
        }
    }
    let nv = mesh.num_vertices();
    (CsrMatrix::from_triplets(nv, nv, &tk), CsrMatrix::from_triplets(nv, nv, &tm))
}

pub fn assemble_scalar(mesh: &Mesh) -> Result<ScalarSystem> {
    assemble_scalar_with(mesh, Exec::default())
}

pub fn assemble_scalar_with(mesh: &Mesh, exec: Exec) -> Result<ScalarSystem> {
    let dir = dirichlet_vertices(mesh)?;
    let (full_stiffness, full_mass) = assemble_full(mesh, exec);
    let mut dof_of_vertex = vec![None; mesh.num_vertices()];
    let mut free_dofs = Vec::new();
    for (v, &fixed) in dir.iter().enumerate() {
        if !fixed {
            dof_of_vertex[v] = Some(free_dofs.len());
            free_dofs.push(v);
        }
    }
    if free_dofs.is_empty() {
        return Err(Error::Validation("every vertex lies on the Dirichlet face".into()));
    }
    let (stiffness, mass) = if free_dofs.len() == mesh.num_vertices() {
        (full_stiffness.clone(), full_mass.clone())
    } else {
        (full_stiffness.submatrix(&free_dofs), full_mass.submatrix(&free_dofs))
    };
    Ok(ScalarSystem {
        dim: mesh.dim,
        full_stiffness,
        full_mass,
        stiffness,
        mass,
        free_dofs,
        dof_of_vertex,
    })
}

#[derive(Debug, Clone)]
pub struct ScalarEigenfunction {
    /// Value at every vertex (zero on Dirichlet vertices).
    pub values: Vec<f64>,
    pub eigenvalue: f64,
    pub residual: f64,
    pub gradients: Vec<Vec3>,
}

pub fn solve_scalar_spectrum(
    mesh: &Mesh,
    system: &ScalarSystem,
    opts: &EigOptions,
) -> Result<Vec<ScalarEigenfunction>> {
    if opts.k > system.num_dofs() {
        return Err(Error::InvalidInput(format!(
            "requested {} eigenpairs but the system has {} dofs",
            opts.k,
            system.num_dofs()
        )));
    }
    let spec = smallest_eigs(&system.stiffness, &system.mass, opts)?;
    Ok(spec
        .vectors
        .iter()
        .zip(spec.values.iter().zip(&spec.residuals))
        .map(|(x, (&mu, &res))| {
            let values = system.lift(x);
            let gradients = gradient_field_with(mesh, &values, opts.exec);
            ScalarEigenfunction { values, eigenvalue: mu, residual: res, gradients }
        })
        .collect())
}

/// Exact per-cell gradient of the P1 interpolant of `values`.
pub fn gradient_field(mesh: &Mesh, values: &[f64]) -> Vec<Vec3> {
    gradient_field_with(mesh, values, Exec::default())
}

pub fn gradient_field_with(mesh: &Mesh, values: &[f64], exec: Exec) -> Vec<Vec3> {
    let d = mesh.dim;
    map_indexed(exec, mesh.num_cells(), |c| {
        let (g, _) = linalg::barycentric_gradients(d, &mesh.cell_points(c));
        let mut out = [0.0; 3];
        for (a, &v) in mesh.cell(c).iter().enumerate() {
            out = linalg::add(out, linalg::scale(g[a], values[v]));
        }
        out
    })
}

/// Rotates a cluster of (numerically) equal eigenpairs to the basis that
/// diagonalizes `Σ_i (d - i) ∫ ∂_i ψ_a ∂_i ψ_b`. Separable eigenspaces then
/// come out one coordinate direction at a time, `x` first. Eigenvalues become
/// the Rayleigh quotients of the rotated functions.
pub fn align_cluster(mesh: &Mesh, cluster: &mut [ScalarEigenfunction]) -> Result<()> {
    let p = cluster.len();
    if p < 2 {
        return Ok(());
    }
    let d = mesh.dim;
    let vols: Vec<f64> = (0..mesh.num_cells()).map(|c| mesh.cell_volume(c)).collect();
    let mut w = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in a..p {
            let mut s = 0.0;
            for (c, vol) in vols.iter().enumerate() {
                let (ga, gb) = (cluster[a].gradients[c], cluster[b].gradients[c]);
                s += vol * (0..d).map(|i| (d - i) as f64 * ga[i] * gb[i]).sum::<f64>();
            }
            w[a][b] = s;
            w[b][a] = s;
        }
    }
    let (_, rot) = crate::eigensolve::sym_eig_desc(&w)?;
    let old: Vec<ScalarEigenfunction> = cluster.to_vec();
    let residual = old.iter().map(|f| f.residual).fold(0.0, f64::max);
    for (f, col) in cluster.iter_mut().zip(&rot) {
        // deterministic sign: largest coefficient positive
        let big = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let s = if big < 0.0 { -1.0 } else { 1.0 };
        let mut values = vec![0.0; old[0].values.len()];
        let mut gradients = vec![[0.0; 3]; old[0].gradients.len()];
        let mut eigenvalue = 0.0;
        for (r, g) in col.iter().zip(&old) {
            let r = s * r;
            values.iter_mut().zip(&g.values).for_each(|(v, x)| *v += r * x);
            gradients.iter_mut().zip(&g.gradients).for_each(|(v, x)| *v = linalg::add(*v, linalg::scale(*x, r)));
            eigenvalue += r * r * g.eigenvalue;
        }
        *f = ScalarEigenfunction { values, eigenvalue, residual, gradients };
    }
    Ok(())
}

/// Volume-weighted average of the cell gradients around each vertex.
pub fn recovered_gradient(mesh: &Mesh, gradients: &[Vec3]) -> Vec<Vec3> {
    let mut acc = vec![[0.0; 3]; mesh.num_vertices()];
    let mut w = vec![0.0; mesh.num_vertices()];
    for (c, g) in gradients.iter().enumerate() {
        let vol = mesh.cell_volume(c);
        for &v in mesh.cell(c) {
            acc[v] = linalg::add(acc[v], linalg::scale(*g, vol));
            w[v] += vol;
        }
    }
    acc.iter().zip(&w).map(|(a, &wv)| linalg::scale(*a, 1.0 / wv)).collect()
}
