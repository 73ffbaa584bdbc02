//! Simplicial meshes with tagged boundary facets.
//!
//! Cells are stored as `[usize; 4]` and boundary facets as `[usize; 3]`; only
//! the first `dim + 1` (resp. `dim`) entries are meaningful.

mod generate;
mod io;
mod reflect;
mod refine;

pub use generate::{generate_mesh, generate_mesh_with, BoxPattern, MeshOptions};
pub use io::{parse_mesh, read_mesh, write_mesh, write_mesh_to};
pub use reflect::{reflect_mesh, VertexOrigin};
pub use refine::refine;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Bc, DomainKind, DomainSpec, FaceId, FaceShape};
use crate::linalg::{self, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    /// Ordered so that the induced normal points out of the mesh.
    pub vertices: [usize; 3],
    pub face_id: FaceId,
    pub normal: Vec3,
    /// Shape operator at the facet quadrature points (one midpoint sample).
    pub shape_samples: Vec<Mat3>,
}

impl BoundaryFacet {
    pub fn verts(&self, dim: usize) -> &[usize] {
        &self.vertices[..dim]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Vec3>,
    pub cells: Vec<[usize; 4]>,
    pub boundary_facets: Vec<BoundaryFacet>,
    /// Largest cell diameter.
    pub h: f64,
    pub bc_labels: BTreeMap<FaceId, Bc>,
    /// The domain the mesh was generated from, if known.
    pub domain: Option<Arc<DomainSpec>>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.vertices == other.vertices
            && self.cells == other.cells
            && self.boundary_facets == other.boundary_facets
            && self.h == other.h
            && self.bc_labels == other.bc_labels
    }
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    pub fn cell_points(&self, c: usize) -> Vec<Vec3> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        linalg::simplex_volume(self.dim, &self.cell_points(c))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn facet_points(&self, f: &BoundaryFacet) -> Vec<Vec3> {
        f.verts(self.dim).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn facet_measure(&self, f: &BoundaryFacet) -> f64 {
        linalg::facet_measure(self.dim, &self.facet_points(f))
    }

    pub fn boundary_measure(&self) -> f64 {
        self.boundary_facets.iter().map(|f| self.facet_measure(f)).sum()
    }

    /// `true` for vertices on some boundary facet.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for f in &self.boundary_facets {
            for &v in f.verts(self.dim) {
                mask[v] = true;
            }
        }
        mask
    }

    pub fn bc(&self, face: FaceId) -> Bc {
        self.bc_labels.get(&face).copied().unwrap_or(Bc::Neumann)
    }

    pub fn compute_h(&self) -> f64 {
        let d = self.dim;
        let mut h: f64 = 0.0;
        for c in &self.cells {
            for a in 0..=d {
                for b in a + 1..=d {
                    h = h.max(linalg::dist(self.vertices[c[a]], self.vertices[c[b]]));
                }
            }
        }
        h
    }

    /// Checks positivity of cell volumes and that the stored boundary facets
    /// are exactly the facets with a single incident cell.
    pub fn validate(&self) -> Result<()> {
        for c in 0..self.cells.len() {
            if let Some(&v) = self.cell(c).iter().find(|&&v| v >= self.vertices.len()) {
                return Err(Error::Validation(format!("cell {c} references missing vertex {v}")));
            }
            let vol = self.cell_volume(c);
            if !(vol > 0.0) {
                return Err(Error::Validation(format!(
                    "cell {c} has non-positive volume {vol:e}"
                )));
            }
        }
        let computed = facet_incidence(self.dim, &self.cells);
        let mut boundary: HashMap<Vec<usize>, ()> = HashMap::new();
        for (key, inc) in &computed {
            match inc.count {
                1 => {
                    boundary.insert(key.clone(), ());
                }
                2 => {}
                n => {
                    return Err(Error::Validation(format!(
                        "facet {key:?} is shared by {n} cells"
                    )))
                }
            }
        }
        if boundary.len() != self.boundary_facets.len() {
            return Err(Error::Validation(format!(
                "{} boundary facets listed but the cells have {}",
                self.boundary_facets.len(),
                boundary.len()
            )));
        }
        for (i, f) in self.boundary_facets.iter().enumerate() {
            let mut key = f.verts(self.dim).to_vec();
            key.sort_unstable();
            if !boundary.contains_key(&key) {
                return Err(Error::Validation(format!(
                    "boundary facet {i} {:?} is not a boundary facet of the cells",
                    f.verts(self.dim)
                )));
            }
        }
        Ok(())
    }
}

pub(crate) struct Incidence {
    pub count: usize,
    pub cell: usize,
    /// Local index (in the cell) of the vertex opposite the facet.
    pub opposite: usize,
}

pub(crate) fn facet_incidence(dim: usize, cells: &[[usize; 4]]) -> HashMap<Vec<usize>, Incidence> {
    let mut map: HashMap<Vec<usize>, Incidence> = HashMap::with_capacity(cells.len() * (dim + 1));
    for (ci, c) in cells.iter().enumerate() {
        for opp in 0..=dim {
            let mut key: Vec<usize> = (0..=dim).filter(|&k| k != opp).map(|k| c[k]).collect();
            key.sort_unstable();
            map.entry(key)
                .and_modify(|e| e.count += 1)
                .or_insert(Incidence { count: 1, cell: ci, opposite: opp });
        }
    }
    map
}

/// Boundary facets of a cell complex, sorted by vertex key, each oriented
/// outward. Tags are filled in by [`tag_facets`].
pub(crate) fn extract_boundary(dim: usize, vertices: &[Vec3], cells: &[[usize; 4]]) -> Vec<[usize; 3]> {
    let inc = facet_incidence(dim, cells);
    let mut keys: Vec<(&Vec<usize>, &Incidence)> = inc.iter().filter(|(_, i)| i.count == 1).collect();
    keys.sort_by(|a, b| a.0.cmp(b.0));
    keys.into_iter()
        .map(|(key, i)| {
            let opp = vertices[cells[i.cell][i.opposite]];
            let mut f = [0usize; 3];
            f[..dim].copy_from_slice(key);
            orient_outward(dim, vertices, &mut f, opp);
            f
        })
        .collect()
}

fn orient_outward(dim: usize, vertices: &[Vec3], f: &mut [usize; 3], interior: Vec3) {
    let n = raw_normal(dim, vertices, &f[..dim]);
    let c = linalg::centroid(&f[..dim].iter().map(|&v| vertices[v]).collect::<Vec<_>>());
    if linalg::dot(n, linalg::sub(c, interior)) < 0.0 {
        match dim {
            1 => {}
            2 => f.swap(0, 1),
            _ => f.swap(1, 2),
        }
    }
}

/// Unnormalised normal induced by the facet's vertex order (1D: +e1).
pub(crate) fn raw_normal(dim: usize, vertices: &[Vec3], f: &[usize]) -> Vec3 {
    match dim {
        1 => [1.0, 0.0, 0.0],
        2 => {
            let d = linalg::sub(vertices[f[1]], vertices[f[0]]);
            [d[1], -d[0], 0.0]
        }
        _ => linalg::cross(
            linalg::sub(vertices[f[1]], vertices[f[0]]),
            linalg::sub(vertices[f[2]], vertices[f[0]]),
        ),
    }
}

/// Outward normal of a facet computed from the mesh alone.
pub(crate) fn geometric_normal(dim: usize, vertices: &[Vec3], f: &[usize], interior: Vec3) -> Vec3 {
    if dim == 1 {
        let s = if vertices[f[0]][0] >= interior[0] { 1.0 } else { -1.0 };
        return [s, 0.0, 0.0];
    }
    let n = linalg::normalize(raw_normal(dim, vertices, f));
    let c = linalg::centroid(&f.iter().map(|&v| vertices[v]).collect::<Vec<_>>());
    if linalg::dot(n, linalg::sub(c, interior)) < 0.0 {
        linalg::scale(n, -1.0)
    } else {
        n
    }
}

/// Finds the domain face carrying each boundary facet and attaches the exact
/// normal and shape-operator sample.
pub(crate) fn tag_facets(
    dim: usize,
    vertices: &[Vec3],
    facets: &[[usize; 3]],
    domain: &DomainSpec,
) -> Result<Vec<BoundaryFacet>> {
    let flat = domain.flattened()?;
    let tol = 1e-9 * flat.diameter().max(1.0);
    let nfaces = flat.face_count();
    let geoms: Vec<_> = (0..nfaces).map(|f| flat.face_geometry(f)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(facets.len());
    for f in facets {
        let pts: Vec<Vec3> = f[..dim].iter().map(|&v| vertices[v]).collect();
        let mid = linalg::centroid(&pts);
        let mut found = None;
        // planar faces first: a clip segment of a disk touches the arc at its ends
        for g in geoms.iter().filter(|g| matches!(g.shape, FaceShape::Plane { .. })) {
            let FaceShape::Plane { normal, offset } = g.shape else { unreachable!() };
            if pts.iter().all(|p| (linalg::dot(normal, *p) - offset).abs() <= tol)
                && inside_face(&flat, g.face_id, mid, tol)
            {
                found = Some(g);
                break;
            }
        }
        if found.is_none() {
            for g in geoms.iter().filter(|g| matches!(g.shape, FaceShape::Circle { .. })) {
                let FaceShape::Circle { radius } = g.shape else { unreachable!() };
                if pts.iter().all(|p| (linalg::norm(*p) - radius).abs() <= 1e-9 * radius) {
                    found = Some(g);
                    break;
                }
            }
        }
        let g = found.ok_or_else(|| {
            Error::Validation(format!(
                "boundary facet at {mid:?} does not lie on any face of {}",
                domain.name
            ))
        })?;
        out.push(BoundaryFacet {
            vertices: *f,
            face_id: g.face_id,
            normal: g.normal_at(mid),
            shape_samples: vec![g.shape_operator_at(g.project(mid))],
        });
    }
    Ok(out)
}

/// Whether `p` (already on the face's plane) lies within the face polygon.
fn inside_face(domain: &DomainSpec, face: FaceId, p: Vec3, tol: f64) -> bool {
    let DomainKind::Polytope { vertices, faces } = &domain.kind else {
        // disk clip segments: the point must be within the radius
        if let DomainKind::Disk { radius, .. } = &domain.kind {
            return linalg::norm(p) <= radius + tol;
        }
        return true;
    };
    let f = &faces[face];
    match domain.dim {
        1 => true,
        2 => {
            let a = vertices[f.vertices[0]];
            let b = vertices[f.vertices[1]];
            let d = linalg::sub(b, a);
            let t = linalg::dot(linalg::sub(p, a), d) / linalg::dot(d, d);
            t >= -tol && t <= 1.0 + tol
        }
        _ => {
            // crossing test in the projection dropping the dominant normal axis
            let n = f.normal;
            let k = (0..3).max_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs())).unwrap();
            let (u, w) = match k {
                0 => (1, 2),
                1 => (2, 0),
                _ => (0, 1),
            };
            let poly: Vec<(f64, f64)> = f.vertices.iter().map(|&v| (vertices[v][u], vertices[v][w])).collect();
            let (px, py) = (p[u], p[w]);
            let mut inside = false;
            let m = poly.len();
            for i in 0..m {
                let (x1, y1) = poly[i];
                let (x2, y2) = poly[(i + 1) % m];
                if (y1 > py) != (y2 > py) {
                    let x = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
                    if px < x {
                        inside = !inside;
                    }
                }
            }
            inside
        }
    }
}

/// Assembles a mesh from cells, extracting and tagging the boundary.
pub(crate) fn build_mesh(
    dim: usize,
    vertices: Vec<Vec3>,
    cells: Vec<[usize; 4]>,
    domain: &DomainSpec,
) -> Result<Mesh> {
    let facets = extract_boundary(dim, &vertices, &cells);
    let boundary_facets = tag_facets(dim, &vertices, &facets, domain)?;
    let mut mesh = Mesh {
        dim,
        vertices,
        cells,
        boundary_facets,
        h: 0.0,
        bc_labels: domain.flattened()?.bc_labels,
        domain: Some(Arc::new(domain.clone())),
    };
    mesh.h = mesh.compute_h();
    Ok(mesh)
}

/// Orders the vertices of every cell so that its signed volume is positive.
pub(crate) fn fix_orientation(dim: usize, vertices: &[Vec3], cells: &mut [[usize; 4]]) {
    for c in cells.iter_mut() {
        let pts: Vec<Vec3> = c[..=dim].iter().map(|&v| vertices[v]).collect();
        if linalg::simplex_volume(dim, &pts) < 0.0 {
            c.swap(0, 1);
        }
    }
}
