//! Polytope construction: orientation of user-supplied faces, vertex
//! enumeration from halfspaces, and products of convex factors.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{Bc, DomainKind, DomainSpec, FaceId, PolyFace};
use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};

/// The halfspace `normal . x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub normal: Vec3,
    pub offset: f64,
}

impl Halfspace {
    /// Normalises `normal`; `offset` is rescaled accordingly.
    pub fn new(normal: Vec3, offset: f64) -> Self {
        let n = linalg::norm(normal);
        Halfspace {
            normal: linalg::scale(normal, 1.0 / n),
            offset: offset / n,
        }
    }

    fn eval(&self, p: Vec3) -> f64 {
        linalg::dot(self.normal, p) - self.offset
    }
}

/// Vertex enumeration of a bounded intersection of halfspaces. Returns the
/// vertices and, for each halfspace that carries a facet, the index of the
/// halfspace together with the facet (vertex list ordered counter-clockwise
/// seen from outside).
pub fn convex_from_halfspaces(
    dim: usize,
    hs: &[Halfspace],
) -> Result<(Vec<Vec3>, Vec<(usize, PolyFace)>)> {
    let scale = hs.iter().fold(1.0f64, |m, h| m.max(h.offset.abs()));
    let feas_tol = 1e-10 * scale;
    let mut vertices: Vec<Vec3> = Vec::new();
    let push = |p: Vec3, vertices: &mut Vec<Vec3>| {
        if !vertices.iter().any(|q| linalg::dist(*q, p) <= 1e-9 * scale) {
            vertices.push(p);
        }
    };
    let m = hs.len();
    match dim {
        1 => {
            for h in hs {
                if h.normal[0] != 0.0 {
                    let p = [h.offset / h.normal[0], 0.0, 0.0];
                    if hs.iter().all(|g| g.eval(p) <= feas_tol) {
                        push(p, &mut vertices);
                    }
                }
            }
        }
        2 => {
            for i in 0..m {
                for j in i + 1..m {
                    let (a, b) = (hs[i], hs[j]);
                    let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (a.offset * b.normal[1] - a.normal[1] * b.offset) / det;
                    let y = (a.normal[0] * b.offset - a.offset * b.normal[0]) / det;
                    let p = [x, y, 0.0];
                    if hs.iter().all(|g| g.eval(p) <= feas_tol) {
                        push(p, &mut vertices);
                    }
                }
            }
        }
        3 => {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        if let Some(p) = solve3(&hs[i], &hs[j], &hs[k]) {
                            if hs.iter().all(|g| g.eval(p) <= feas_tol) {
                                push(p, &mut vertices);
                            }
                        }
                    }
                }
            }
        }
        _ => return Err(Error::InvalidInput(format!("dimension {dim} not supported"))),
    }
    if vertices.len() < dim + 1 {
        return Err(Error::InvalidGeometry(
            "halfspace intersection is empty or degenerate".into(),
        ));
    }
    // exact coordinates on axis-aligned planes
    for h in hs {
        if let Some((axis, sign)) = super::axis_of(h.normal, dim) {
            let val = h.offset * sign as f64;
            for v in vertices.iter_mut() {
                if (v[axis] - val).abs() <= 1e-9 * scale {
                    v[axis] = val;
                }
            }
        }
    }
    for v in vertices.iter_mut() {
        for c in v.iter_mut() {
            if c.abs() < 1e-14 * scale {
                *c = 0.0;
            }
        }
    }

    let on_tol = 1e-9 * scale;
    let mut faces: Vec<(usize, PolyFace)> = Vec::new();
    for (k, h) in hs.iter().enumerate() {
        let on: Vec<usize> = (0..vertices.len())
            .filter(|&v| h.eval(vertices[v]).abs() <= on_tol)
            .collect();
        let ordered = match dim {
            1 => {
                if on.len() == 1 {
                    Some(on)
                } else {
                    None
                }
            }
            2 => order_edge(&vertices, &on, h.normal),
            _ => order_polygon(&vertices, &on, h.normal, scale),
        };
        let Some(ordered) = ordered else { continue };
        let mut key = ordered.clone();
        key.sort_unstable();
        let duplicate = faces.iter().any(|(_, f)| {
            let mut other = f.vertices.clone();
            other.sort_unstable();
            other == key
        });
        if duplicate {
            continue;
        }
        faces.push((
            k,
            PolyFace {
                vertices: ordered,
                normal: h.normal,
                offset: h.offset,
            },
        ));
    }
    Ok((vertices, faces))
}

fn solve3(a: &Halfspace, b: &Halfspace, c: &Halfspace) -> Option<Vec3> {
    let (na, nb, nc) = (a.normal, b.normal, c.normal);
    let det = linalg::dot(na, linalg::cross(nb, nc));
    if det.abs() < 1e-12 {
        return None;
    }
    let p = linalg::add(
        linalg::add(
            linalg::scale(linalg::cross(nb, nc), a.offset),
            linalg::scale(linalg::cross(nc, na), b.offset),
        ),
        linalg::scale(linalg::cross(na, nb), c.offset),
    );
    Some(linalg::scale(p, 1.0 / det))
}

fn order_edge(vertices: &[Vec3], on: &[usize], n: Vec3) -> Option<Vec<usize>> {
    if on.len() < 2 {
        return None;
    }
    let t = [-n[1], n[0], 0.0];
    let mut lo = on[0];
    let mut hi = on[0];
    for &v in on {
        if linalg::dot(vertices[v], t) < linalg::dot(vertices[lo], t) {
            lo = v;
        }
        if linalg::dot(vertices[v], t) > linalg::dot(vertices[hi], t) {
            hi = v;
        }
    }
    if lo == hi {
        return None;
    }
    // outward normal of the directed edge (a -> b) is (dy, -dx)
    Some(vec![lo, hi])
}

fn order_polygon(vertices: &[Vec3], on: &[usize], n: Vec3, scale: f64) -> Option<Vec<usize>> {
    if on.len() < 3 {
        return None;
    }
    let pts: Vec<Vec3> = on.iter().map(|&v| vertices[v]).collect();
    let c = linalg::centroid(&pts);
    let far = pts
        .iter()
        .copied()
        .max_by(|a, b| linalg::dist(*a, c).total_cmp(&linalg::dist(*b, c)))?;
    let u = linalg::normalize(linalg::sub(far, c));
    let w = linalg::cross(n, u);
    let mut with_angle: Vec<(f64, usize)> = on
        .iter()
        .map(|&v| {
            let d = linalg::sub(vertices[v], c);
            (linalg::dot(d, w).atan2(linalg::dot(d, u)), v)
        })
        .collect();
    with_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ordered: Vec<usize> = with_angle.into_iter().map(|(_, v)| v).collect();
    let area = linalg::norm(newell(vertices, &ordered)) / 2.0;
    if area <= 1e-12 * scale * scale {
        return None;
    }
    Some(ordered)
}

/// Unnormalised polygon normal; its length is twice the area.
pub(crate) fn newell(vertices: &[Vec3], face: &[usize]) -> Vec3 {
    let mut n = [0.0; 3];
    let k = face.len();
    for i in 0..k {
        let a = vertices[face[i]];
        let b = vertices[face[(i + 1) % k]];
        n = linalg::add(n, linalg::cross(a, b));
    }
    n
}

pub(crate) fn face_area(dim: usize, vertices: &[Vec3], f: &PolyFace) -> f64 {
    match dim {
        1 => 1.0,
        2 => linalg::dist(vertices[f.vertices[0]], vertices[f.vertices[1]]),
        _ => linalg::norm(newell(vertices, &f.vertices)) / 2.0,
    }
}

/// Divergence theorem: `|Omega| = (1/d) sum_f offset_f |f|`.
pub(crate) fn polytope_volume(dim: usize, vertices: &[Vec3], faces: &[PolyFace]) -> f64 {
    faces
        .iter()
        .map(|f| f.offset * face_area(dim, vertices, f))
        .sum::<f64>()
        / dim as f64
}

/// Orients user-supplied faces consistently outward and computes their
/// normals.
pub(crate) fn orient_faces(
    dim: usize,
    vertices: &[Vec3],
    faces: Vec<Vec<usize>>,
) -> Result<Vec<PolyFace>> {
    for (fi, f) in faces.iter().enumerate() {
        if f.len() < dim {
            return Err(Error::InvalidGeometry(format!(
                "face {fi} has {} vertices, need at least {dim}",
                f.len()
            )));
        }
        if let Some(&v) = f.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::InvalidGeometry(format!(
                "face {fi} references missing vertex {v}"
            )));
        }
    }
    let mut diam: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            diam = diam.max(linalg::dist(*a, *b));
        }
    }
    if diam == 0.0 {
        return Err(Error::InvalidGeometry("polytope has zero extent".into()));
    }
    let mut faces = faces;
    match dim {
        1 => {
            if faces.len() != 2 || faces.iter().any(|f| f.len() != 1) {
                return Err(Error::InvalidGeometry(
                    "an interval needs exactly two point faces".into(),
                ));
            }
            let a = vertices[faces[0][0]][0];
            let b = vertices[faces[1][0]][0];
            if a == b {
                return Err(Error::InvalidGeometry("degenerate interval".into()));
            }
            let sa = if a > b { 1.0 } else { -1.0 };
            return Ok(vec![
                PolyFace { vertices: faces[0].clone(), normal: [sa, 0.0, 0.0], offset: sa * a },
                PolyFace { vertices: faces[1].clone(), normal: [-sa, 0.0, 0.0], offset: -sa * b },
            ]);
        }
        2 => {
            if faces.iter().any(|f| f.len() != 2) {
                return Err(Error::InvalidGeometry("2D faces must be edges".into()));
            }
            orient_2d(&mut faces)?;
            let area2: f64 = faces
                .iter()
                .map(|f| {
                    let (a, b) = (vertices[f[0]], vertices[f[1]]);
                    a[0] * b[1] - b[0] * a[1]
                })
                .sum();
            if area2 < 0.0 {
                faces.iter_mut().for_each(|f| f.reverse());
            }
        }
        3 => {
            orient_3d(&mut faces)?;
            let vol6: f64 = faces
                .iter()
                .map(|f| linalg::dot(newell(vertices, f), vertices[f[0]]))
                .sum();
            if vol6 < 0.0 {
                faces.iter_mut().for_each(|f| f.reverse());
            }
        }
        _ => return Err(Error::InvalidInput(format!("dimension {dim} not supported"))),
    }
    let mut out = Vec::with_capacity(faces.len());
    for (fi, f) in faces.into_iter().enumerate() {
        let raw = if dim == 2 {
            let d = linalg::sub(vertices[f[1]], vertices[f[0]]);
            [d[1], -d[0], 0.0]
        } else {
            newell(vertices, &f)
        };
        let meas = if dim == 2 { linalg::norm(raw) } else { linalg::norm(raw) / 2.0 };
        if meas <= 1e-14 * diam.powi(dim as i32 - 1) {
            return Err(Error::InvalidGeometry(format!("face {fi} is degenerate")));
        }
        let normal = linalg::normalize(raw);
        let offset = f.iter().map(|&v| linalg::dot(normal, vertices[v])).sum::<f64>() / f.len() as f64;
        out.push(PolyFace { vertices: f, normal, offset });
    }
    Ok(out)
}

fn orient_2d(faces: &mut [Vec<usize>]) -> Result<()> {
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            incident.entry(v).or_default().push(fi);
        }
    }
    if incident.values().any(|l| l.len() != 2) {
        return Err(Error::InvalidGeometry(
            "boundary is not closed: every vertex must lie on exactly two edges".into(),
        ));
    }
    let mut visited = vec![false; faces.len()];
    let mut cur = 0;
    visited[0] = true;
    for _ in 1..faces.len() {
        let end = faces[cur][1];
        let next = *incident[&end].iter().find(|&&g| g != cur).unwrap();
        if visited[next] {
            break;
        }
        if faces[next][0] != end {
            faces[next].reverse();
        }
        visited[next] = true;
        cur = next;
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::InvalidGeometry("boundary is not connected".into()));
    }
    Ok(())
}

fn orient_3d(faces: &mut [Vec<usize>]) -> Result<()> {
    let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for i in 0..f.len() {
            let (a, b) = (f[i], f[(i + 1) % f.len()]);
            edges.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    if edges.values().any(|l| l.len() != 2) {
        return Err(Error::InvalidGeometry(
            "boundary is not closed: every edge must be shared by exactly two faces".into(),
        ));
    }
    let directed = |f: &[usize], a: usize, b: usize| -> bool {
        (0..f.len()).any(|i| f[i] == a && f[(i + 1) % f.len()] == b)
    };
    let mut state: Vec<Option<bool>> = vec![None; faces.len()];
    state[0] = Some(false);
    let mut queue = VecDeque::from([0usize]);
    while let Some(fi) = queue.pop_front() {
        let f = faces[fi].clone();
        for i in 0..f.len() {
            let (a, b) = (f[i], f[(i + 1) % f.len()]);
            for &g in &edges[&(a.min(b), a.max(b))] {
                if g == fi {
                    continue;
                }
                // neighbouring faces must traverse the shared edge in opposite directions
                let same = directed(&faces[g], a, b);
                match state[g] {
                    None => {
                        if same {
                            faces[g].reverse();
                        }
                        state[g] = Some(same);
                        queue.push_back(g);
                    }
                    Some(_) => {
                        if same {
                            return Err(Error::InvalidGeometry(
                                "boundary is not orientable".into(),
                            ));
                        }
                    }
                }
            }
        }
    }
    if state.iter().any(|s| s.is_none()) {
        return Err(Error::InvalidGeometry("boundary is not connected".into()));
    }
    Ok(())
}

/// Builds a convex polytope domain from halfspaces with per-halfspace labels.
/// Returns the domain and, for each face, the index of its halfspace.
pub(crate) fn convex_domain(
    dim: usize,
    hs: &[Halfspace],
    bcs: &[Bc],
) -> Result<(DomainSpec, Vec<usize>)> {
    let (vertices, faces) = convex_from_halfspaces(dim, hs)?;
    let mut labels = BTreeMap::new();
    let mut source = Vec::with_capacity(faces.len());
    let mut polys = Vec::with_capacity(faces.len());
    for (fi, (k, f)) in faces.into_iter().enumerate() {
        labels.insert(fi as FaceId, bcs.get(k).copied().unwrap_or(Bc::Neumann));
        source.push(k);
        polys.push(f);
    }
    let spec = DomainSpec {
        dim,
        kind: DomainKind::Polytope { vertices, faces: polys },
        bc_labels: labels,
        exterior_ball_declared: true,
        symmetry_planes: Vec::new(),
        curvature: BTreeMap::new(),
        name: "polytope".into(),
        builtin: None,
    };
    spec.validate()?;
    Ok((spec, source))
}

/// Halfspace representation of a convex polytope domain with the labels of
/// the corresponding faces.
pub(crate) fn halfspaces_of(d: &DomainSpec) -> Result<(Vec<Halfspace>, Vec<Bc>)> {
    match &d.kind {
        DomainKind::Polytope { faces, .. } => {
            if !d.is_convex() {
                return Err(Error::UnsupportedDomain(
                    "operation requires a convex polytope".into(),
                ));
            }
            Ok((
                faces
                    .iter()
                    .map(|f| Halfspace { normal: f.normal, offset: f.offset })
                    .collect(),
                (0..faces.len()).map(|f| d.bc(f)).collect(),
            ))
        }
        DomainKind::Product { .. } => halfspaces_of(&d.flattened()?),
        DomainKind::Disk { .. } => Err(Error::UnsupportedDomain(
            "a disk has no halfspace representation".into(),
        )),
    }
}

pub(crate) fn product_polytope(left: &DomainSpec, right: &DomainSpec) -> Result<DomainSpec> {
    let (hl, bl) = halfspaces_of(left)?;
    let (hr, br) = halfspaces_of(right)?;
    let dl = left.dim;
    let mut hs = hl.clone();
    for h in &hr {
        let mut n = [0.0; 3];
        for i in 0..right.dim {
            n[dl + i] = h.normal[i];
        }
        hs.push(Halfspace { normal: n, offset: h.offset });
    }
    let mut bcs = bl;
    bcs.extend(br);
    let (mut spec, _) = convex_domain(dl + right.dim, &hs, &bcs)?;
    spec.exterior_ball_declared = left.exterior_ball_declared && right.exterior_ball_declared;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube_hs() -> Vec<Halfspace> {
        let mut hs = Vec::new();
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            hs.push(Halfspace::new(e, 1.0));
            e[j] = -1.0;
            hs.push(Halfspace::new(e, 0.0));
        }
        hs
    }

    #[test]
    fn cube_from_halfspaces() {
        let (v, f) = convex_from_halfspaces(3, &unit_cube_hs()).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(f.len(), 6);
        let faces: Vec<PolyFace> = f.into_iter().map(|(_, f)| f).collect();
        assert!((polytope_volume(3, &v, &faces) - 1.0).abs() < 1e-14);
        for face in &faces {
            let n = linalg::normalize(newell(&v, &face.vertices));
            assert!(linalg::dist(n, face.normal) < 1e-14);
        }
    }

    #[test]
    fn orientation_is_repaired() {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        // mixed orientations on purpose
        let faces = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 3, 2], vec![1, 2, 3]];
        let out = orient_faces(3, &v, faces).unwrap();
        assert!((polytope_volume(3, &v, &out) - 1.0 / 6.0).abs() < 1e-15);
        let c = [0.25, 0.25, 0.25];
        for f in &out {
            assert!(linalg::dot(f.normal, c) < f.offset);
        }
    }

    #[test]
    fn open_surface_is_rejected() {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let faces = vec![vec![0, 2, 1], vec![0, 1, 3], vec![0, 3, 2]];
        assert!(matches!(orient_faces(3, &v, faces), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn square_edges_are_oriented_ccw() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let faces = vec![vec![1, 0], vec![1, 2], vec![3, 2], vec![3, 0]];
        let out = orient_faces(2, &v, faces).unwrap();
        assert!((polytope_volume(2, &v, &out) - 1.0).abs() < 1e-15);
    }
}
