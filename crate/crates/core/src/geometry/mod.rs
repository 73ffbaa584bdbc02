//! Declarative domain descriptions and the geometric predicates used by the
//! verification layer.
//!
//! A [`DomainSpec`] is either a polytope (vertices plus oriented planar faces),
//! a disk possibly clipped to half-planes through the origin, or a product of
//! two lower-dimensional domains. Faces are identified by their index; the
//! boundary-condition labels, declared curvature and symmetry data are keyed by
//! that index.
//!
//! Internally all points are `[f64; 3]`; coordinates beyond `dim` are zero.
//! Coordinate axes are 0-based in the API and 1-based in files and reports.

mod builtin;
mod file;
mod lip;
mod polytope;
pub(crate) mod symmetry;

pub use builtin::{builtin_domain, Builtin};
pub use file::{parse_domain, read_domain, write_domain};
pub use lip::{
    is_lip, normal_sublattice_ok, FaceClass, LipVerdict, RotationApplied, SignedPermutation,
};
pub use polytope::{convex_from_halfspaces, Halfspace};
pub use symmetry::{
    detect_symmetries, detect_symmetries_with_tol, half_restriction, orthant_restriction, orthants,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3, ZERO3};

pub type FaceId = usize;

/// Tolerance for planarity and axis-alignment checks, relative to the diameter.
pub const PLANARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Neumann,
    Dirichlet,
}

/// A planar face `n . x = offset` with outward unit normal `n`. Vertex indices
/// are ordered counter-clockwise when viewed from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFace {
    pub vertices: Vec<usize>,
    pub normal: Vec3,
    pub offset: f64,
}

/// Restriction of a disk to the half-plane `sign * x[axis] >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisClip {
    pub axis: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Polytope {
        vertices: Vec<Vec3>,
        faces: Vec<PolyFace>,
    },
    /// Disk of the given radius centred at the origin. Face 0 is the arc; face
    /// `1 + i` is the straight edge produced by `clips[i]`.
    Disk { radius: f64, clips: Vec<AxisClip> },
    Product {
        left: Box<DomainSpec>,
        right: Box<DomainSpec>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub dim: usize,
    pub kind: DomainKind,
    pub bc_labels: BTreeMap<FaceId, Bc>,
    /// User assertion of the uniform exterior ball condition. Never computed.
    pub exterior_ball_declared: bool,
    /// Declared reflection symmetries (0-based axes).
    pub symmetry_planes: Vec<usize>,
    /// Analytic curvature supplied for curved faces (positive = convex).
    pub curvature: BTreeMap<FaceId, f64>,
    /// Human-readable provenance, e.g. `rectangle(1,2)`.
    pub name: String,
    pub builtin: Option<Builtin>,
}

/// Shape of one boundary face as seen by the discretisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceShape {
    Plane { normal: Vec3, offset: f64 },
    Circle { radius: f64 },
}

/// Exact geometric data of a face: outward normal and the shape operator
/// `L_p` (defined by `L df = -d nu` on tangent vectors and extended by zero in
/// the normal direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub face_id: FaceId,
    pub dim: usize,
    pub shape: FaceShape,
    /// Declared curvature for faces that are planar in the discretisation.
    pub curvature: f64,
}

impl FaceGeometry {
    pub fn normal_at(&self, p: Vec3) -> Vec3 {
        match self.shape {
            FaceShape::Plane { normal, .. } => normal,
            FaceShape::Circle { .. } => {
                let mut q = p;
                q[2] = 0.0;
                linalg::normalize(q)
            }
        }
    }

    /// For an outward normal on a convex circle of radius `R` this is
    /// `-(1/R) (I - nu nu^T)`, so the boundary term `-int <L u, u>` is
    /// nonnegative.
    pub fn shape_operator_at(&self, p: Vec3) -> Mat3 {
        let kappa = match self.shape {
            FaceShape::Plane { .. } => self.curvature,
            FaceShape::Circle { radius } => 1.0 / radius,
        };
        if kappa == 0.0 {
            return ZERO3;
        }
        let n = self.normal_at(p);
        linalg::mat_scale(&linalg::tangential_projector(n, self.dim), -kappa)
    }

    /// Closest point on the face's carrier (plane or circle).
    pub fn project(&self, p: Vec3) -> Vec3 {
        match self.shape {
            FaceShape::Plane { normal, offset } => {
                let d = linalg::dot(normal, p) - offset;
                linalg::sub(p, linalg::scale(normal, d))
            }
            FaceShape::Circle { radius } => {
                let n = self.normal_at(p);
                linalg::scale(n, radius)
            }
        }
    }

    pub fn is_curved(&self) -> bool {
        matches!(self.shape, FaceShape::Circle { .. }) || self.curvature != 0.0
    }
}

impl DomainSpec {
    /// Builds a polytope from vertices and face vertex lists, computing outward
    /// normals and fixing the face orientation. Every face is labelled Neumann
    /// unless `bc` says otherwise.
    pub fn polytope(
        dim: usize,
        vertices: Vec<Vec3>,
        faces: Vec<Vec<usize>>,
        bc: &BTreeMap<FaceId, Bc>,
    ) -> Result<Self> {
        let faces = polytope::orient_faces(dim, &vertices, faces)?;
        let mut labels = BTreeMap::new();
        for f in 0..faces.len() {
            labels.insert(f, bc.get(&f).copied().unwrap_or(Bc::Neumann));
        }
        let spec = DomainSpec {
            dim,
            kind: DomainKind::Polytope { vertices, faces },
            bc_labels: labels,
            exterior_ball_declared: true,
            symmetry_planes: Vec::new(),
            curvature: BTreeMap::new(),
            name: "polytope".into(),
            builtin: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn disk(radius: f64, clips: Vec<AxisClip>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("disk radius must be positive, got {radius}")));
        }
        let mut labels = BTreeMap::new();
        for f in 0..=clips.len() {
            labels.insert(f, Bc::Neumann);
        }
        let mut curvature = BTreeMap::new();
        curvature.insert(0, 1.0 / radius);
        Ok(DomainSpec {
            dim: 2,
            kind: DomainKind::Disk { radius, clips },
            bc_labels: labels,
            exterior_ball_declared: true,
            symmetry_planes: Vec::new(),
            curvature,
            name: format!("disk({radius})"),
            builtin: None,
        })
    }

    pub fn product(left: DomainSpec, right: DomainSpec) -> Result<Self> {
        let dim = left.dim + right.dim;
        if dim > 3 {
            return Err(Error::InvalidInput(format!(
                "product dimension {dim} exceeds 3"
            )));
        }
        let mut spec = DomainSpec {
            dim,
            kind: DomainKind::Product {
                left: Box::new(left),
                right: Box::new(right),
            },
            bc_labels: BTreeMap::new(),
            exterior_ball_declared: true,
            symmetry_planes: Vec::new(),
            curvature: BTreeMap::new(),
            name: String::new(),
            builtin: None,
        };
        let flat = spec.flattened()?;
        spec.bc_labels = flat.bc_labels.clone();
        if let DomainKind::Product { left, right } = &spec.kind {
            spec.exterior_ball_declared = left.exterior_ball_declared && right.exterior_ball_declared;
            spec.name = format!("product({},{})", left.name, right.name);
        }
        Ok(spec)
    }

    /// Resolves products into an explicit polytope; other kinds are returned
    /// unchanged.
    pub fn flattened(&self) -> Result<DomainSpec> {
        match &self.kind {
            DomainKind::Product { left, right } => polytope::product_polytope(
                &left.flattened()?,
                &right.flattened()?,
            )
            .map(|mut p| {
                p.name = self.name.clone();
                p.builtin = self.builtin.clone();
                p.exterior_ball_declared = self.exterior_ball_declared;
                p
            }),
            _ => Ok(self.clone()),
        }
    }

    pub fn face_count(&self) -> usize {
        match &self.kind {
            DomainKind::Polytope { faces, .. } => faces.len(),
            DomainKind::Disk { clips, .. } => clips.len() + 1,
            DomainKind::Product { .. } => self.flattened().map(|f| f.face_count()).unwrap_or(0),
        }
    }

    pub fn face_geometry(&self, face: FaceId) -> Result<FaceGeometry> {
        let curvature = self.curvature.get(&face).copied().unwrap_or(0.0);
        match &self.kind {
            DomainKind::Polytope { faces, .. } => {
                let f = faces.get(face).ok_or_else(|| {
                    Error::InvalidInput(format!("face {face} does not exist"))
                })?;
                Ok(FaceGeometry {
                    face_id: face,
                    dim: self.dim,
                    shape: FaceShape::Plane {
                        normal: f.normal,
                        offset: f.offset,
                    },
                    curvature,
                })
            }
            DomainKind::Disk { radius, clips } => {
                if face == 0 {
                    Ok(FaceGeometry {
                        face_id: 0,
                        dim: 2,
                        shape: FaceShape::Circle { radius: *radius },
                        curvature: 1.0 / radius,
                    })
                } else {
                    let clip = clips.get(face - 1).ok_or_else(|| {
                        Error::InvalidInput(format!("face {face} does not exist"))
                    })?;
                    let mut normal = [0.0; 3];
                    normal[clip.axis] = -(clip.sign as f64);
                    Ok(FaceGeometry {
                        face_id: face,
                        dim: 2,
                        shape: FaceShape::Plane { normal, offset: 0.0 },
                        curvature: 0.0,
                    })
                }
            }
            DomainKind::Product { .. } => self.flattened()?.face_geometry(face),
        }
    }

    pub fn bc(&self, face: FaceId) -> Bc {
        self.bc_labels.get(&face).copied().unwrap_or(Bc::Neumann)
    }

    pub fn dirichlet_faces(&self) -> Vec<FaceId> {
        self.bc_labels
            .iter()
            .filter(|(_, b)| **b == Bc::Dirichlet)
            .map(|(f, _)| *f)
            .collect()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.bc_labels.values().any(|b| *b == Bc::Dirichlet)
    }

    /// Sets the label of one face, validating the single-flat-face rule.
    pub fn with_bc(mut self, face: FaceId, bc: Bc) -> Result<Self> {
        if face >= self.face_count() {
            return Err(Error::InvalidInput(format!("face {face} does not exist")));
        }
        self.bc_labels.insert(face, bc);
        self.validate()?;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Largest distance between two points of the domain (vertex-based for
    /// polytopes).
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Polytope { vertices, .. } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(linalg::dist(*a, *b));
                    }
                }
                d
            }
            DomainKind::Disk { radius, clips } => {
                if clips.is_empty() {
                    2.0 * radius
                } else {
                    let quadrant = clips.iter().map(|c| c.axis).collect::<std::collections::BTreeSet<_>>().len() == 2;
                    if quadrant {
                        radius * 2f64.sqrt()
                    } else {
                        2.0 * radius
                    }
                }
            }
            DomainKind::Product { .. } => self.flattened().map(|f| f.diameter()).unwrap_or(0.0),
        }
    }

    /// Exact volume (area in 2D).
    pub fn volume(&self) -> f64 {
        match &self.kind {
            DomainKind::Polytope { vertices, faces } => polytope::polytope_volume(self.dim, vertices, faces),
            DomainKind::Disk { radius, clips } => PI * radius * radius / (1u32 << distinct_axes(clips)) as f64,
            DomainKind::Product { .. } => self.flattened().map(|f| f.volume()).unwrap_or(0.0),
        }
    }

    /// Exact boundary measure (perimeter in 2D).
    pub fn boundary_measure(&self) -> f64 {
        match &self.kind {
            DomainKind::Polytope { vertices, faces } => faces
                .iter()
                .map(|f| polytope::face_area(self.dim, vertices, f))
                .sum(),
            DomainKind::Disk { radius, clips } => {
                let k = distinct_axes(clips);
                let arc = 2.0 * PI * radius / (1u32 << k) as f64;
                let segments = match k {
                    0 => 0.0,
                    1 => 2.0 * radius,
                    _ => 2.0 * radius,
                };
                arc + segments
            }
            DomainKind::Product { .. } => self.flattened().map(|f| f.boundary_measure()).unwrap_or(0.0),
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            DomainKind::Polytope { vertices, faces } => {
                let tol = 1e-10 * self.diameter().max(1e-300);
                faces.iter().all(|f| {
                    vertices
                        .iter()
                        .all(|v| linalg::dot(f.normal, *v) - f.offset <= tol)
                })
            }
            DomainKind::Disk { .. } => true,
            DomainKind::Product { left, right } => left.is_convex() && right.is_convex(),
        }
    }

    /// Checks the structural invariants: planar faces, closed oriented
    /// boundary, at most one Dirichlet face which must be flat and
    /// perpendicular to a coordinate axis.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidInput(format!("dimension {} not supported", self.dim)));
        }
        if let DomainKind::Polytope { vertices, faces } = &self.kind {
            let diam = self.diameter();
            for (fi, f) in faces.iter().enumerate() {
                for &v in &f.vertices {
                    let p = vertices.get(v).ok_or_else(|| {
                        Error::InvalidGeometry(format!("face {fi} references missing vertex {v}"))
                    })?;
                    let d = (linalg::dot(f.normal, *p) - f.offset).abs();
                    if d > PLANARITY_TOL * diam.max(1.0) * 10.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "face {fi} is not planar (vertex {v} deviates by {d:e})"
                        )));
                    }
                }
            }
        }
        let dirichlet = self.dirichlet_faces();
        if dirichlet.len() > 1 {
            return Err(Error::InvalidInput(format!(
                "at most one Dirichlet face is allowed, got {}",
                dirichlet.len()
            )));
        }
        if let Some(&f) = dirichlet.first() {
            let g = self.face_geometry(f)?;
            match g.shape {
                FaceShape::Plane { normal, .. } if g.curvature == 0.0 => {
                    if axis_of(normal, self.dim).is_none() {
                        return Err(Error::InvalidInput(format!(
                            "Dirichlet face {f} must be perpendicular to a coordinate axis (normal {normal:?})"
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "Dirichlet face {f} must be flat"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Returns `(axis, sign)` if `n` equals `sign * e_axis` within [`PLANARITY_TOL`].
pub fn axis_of(n: Vec3, dim: usize) -> Option<(usize, i8)> {
    for j in 0..dim {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        if linalg::dist(n, e) <= PLANARITY_TOL {
            return Some((j, 1));
        }
        e[j] = -1.0;
        if linalg::dist(n, e) <= PLANARITY_TOL {
            return Some((j, -1));
        }
    }
    None
}

fn distinct_axes(clips: &[AxisClip]) -> u32 {
    clips
        .iter()
        .map(|c| c.axis)
        .collect::<std::collections::BTreeSet<_>>()
        .len() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_shape_operator_annihilates_normal() {
        let d = DomainSpec::disk(2.0, vec![]).unwrap();
        let g = d.face_geometry(0).unwrap();
        let p = [1.2, -1.6, 0.0];
        let l = g.shape_operator_at(p);
        let n = g.normal_at(p);
        let ln = linalg::mat_vec(&l, n);
        assert!(linalg::norm(ln) < 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l[i][j], l[j][i]);
            }
        }
        // tangent eigenvalue -1/R
        let t = [-n[1], n[0], 0.0];
        let lt = linalg::mat_vec(&l, t);
        assert!((linalg::dot(lt, t) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn planar_faces_have_zero_shape_operator() {
        let b = builtin_domain(&Builtin::DoublePrism).unwrap();
        for f in 0..b.face_count() {
            let g = b.face_geometry(f).unwrap();
            assert_eq!(g.shape_operator_at([0.3, 0.3, 0.1]), ZERO3);
        }
    }

    #[test]
    fn rejects_two_dirichlet_faces() {
        let r = builtin_domain(&Builtin::Rectangle { a: 1.0, b: 1.0, centered: false }).unwrap();
        let r = r.with_bc(0, Bc::Dirichlet).unwrap();
        assert!(r.with_bc(1, Bc::Dirichlet).is_err());
    }

    #[test]
    fn rejects_slanted_dirichlet_face() {
        let p = builtin_domain(&Builtin::DoublePrism).unwrap();
        let slanted = (0..p.face_count())
            .find(|&f| axis_of(p.face_geometry(f).unwrap().normal_at([0.0; 3]), 3).is_none())
            .unwrap();
        assert!(p.with_bc(slanted, Bc::Dirichlet).is_err());
    }

    #[test]
    fn disk_measures() {
        let d = DomainSpec::disk(1.0, vec![]).unwrap();
        assert!((d.volume() - PI).abs() < 1e-15);
        let q = DomainSpec::disk(1.0, vec![AxisClip { axis: 0, sign: 1 }, AxisClip { axis: 1, sign: 1 }]).unwrap();
        assert!((q.volume() - PI / 4.0).abs() < 1e-15);
        assert!((q.boundary_measure() - (PI / 2.0 + 2.0)).abs() < 1e-15);
    }
}
