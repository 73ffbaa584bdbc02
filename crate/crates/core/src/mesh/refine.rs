use std::collections::HashMap;

use super::{extract_boundary, fix_orientation, geometric_normal, BoundaryFacet, Mesh};
use crate::geometry::FaceShape;
use crate::linalg::{self, Vec3};

/// Uniform red refinement. Triangles split into 4, tetrahedra into 8 with the
/// interior octahedron cut along the diagonal joining the midpoints of edges
/// `(x0,x2)` and `(x1,x3)`, where `x0 < x1 < x2 < x3` are the global vertex
/// indices. New vertices on a circular face are projected onto the circle.
pub fn refine(mesh: &Mesh) -> Mesh {
    let d = mesh.dim;
    let mut vertices = mesh.vertices.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();

    // boundary edges on curved faces, with the circle radius
    let mut curved: HashMap<(usize, usize), f64> = HashMap::new();
    if d == 2 {
        if let Some(dom) = &mesh.domain {
            if let Ok(flat) = dom.flattened() {
                for f in &mesh.boundary_facets {
                    if let Ok(g) = flat.face_geometry(f.face_id) {
                        if let FaceShape::Circle { radius } = g.shape {
                            let (a, b) = (f.vertices[0], f.vertices[1]);
                            curved.insert((a.min(b), a.max(b)), radius);
                        }
                    }
                }
            }
        }
    }

    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = mids.get(&key) {
            return m;
        }
        let mut p = linalg::scale(linalg::add(vertices[key.0], vertices[key.1]), 0.5);
        if let Some(&r) = curved.get(&key) {
            p = linalg::scale(linalg::normalize(p), r);
        }
        let m = vertices.len();
        vertices.push(p);
        mids.insert(key, m);
        m
    };

    let mut cells = Vec::with_capacity(mesh.cells.len() << d);
    for c in &mesh.cells {
        match d {
            1 => {
                let m = mid(c[0], c[1], &mut vertices);
                cells.push([c[0], m, 0, 0]);
                cells.push([m, c[1], 0, 0]);
            }
            2 => {
                let (a, b, e) = (c[0], c[1], c[2]);
                let ab = mid(a, b, &mut vertices);
                let be = mid(b, e, &mut vertices);
                let ea = mid(e, a, &mut vertices);
                cells.push([a, ab, ea, 0]);
                cells.push([ab, b, be, 0]);
                cells.push([ea, be, e, 0]);
                cells.push([ab, be, ea, 0]);
            }
            _ => {
                let mut x = [c[0], c[1], c[2], c[3]];
                x.sort_unstable();
                let mut m = [[0usize; 4]; 4];
                for i in 0..4 {
                    for j in i + 1..4 {
                        let v = mid(x[i], x[j], &mut vertices);
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                cells.push([x[0], m[0][1], m[0][2], m[0][3]]);
                cells.push([m[0][1], x[1], m[1][2], m[1][3]]);
                cells.push([m[0][2], m[1][2], x[2], m[2][3]]);
                cells.push([m[0][3], m[1][3], m[2][3], x[3]]);
                cells.push([m[0][1], m[0][2], m[0][3], m[1][3]]);
                cells.push([m[0][1], m[0][2], m[1][2], m[1][3]]);
                cells.push([m[0][2], m[0][3], m[1][3], m[2][3]]);
                cells.push([m[0][2], m[1][2], m[1][3], m[2][3]]);
            }
        }
    }
    fix_orientation(d, &vertices, &mut cells);

    // children of each parent facet, keyed by sorted vertex list
    let mut parent: HashMap<Vec<usize>, usize> = HashMap::new();
    for (pi, f) in mesh.boundary_facets.iter().enumerate() {
        let v = f.verts(d);
        let children: Vec<Vec<usize>> = match d {
            1 => vec![vec![v[0]]],
            2 => {
                let m = mids[&(v[0].min(v[1]), v[0].max(v[1]))];
                vec![vec![v[0], m], vec![m, v[1]]]
            }
            _ => {
                let e = |a: usize, b: usize| mids[&(a.min(b), a.max(b))];
                let (a, b, c) = (v[0], v[1], v[2]);
                let (ab, bc, ca) = (e(a, b), e(b, c), e(c, a));
                vec![vec![a, ab, ca], vec![ab, b, bc], vec![ca, bc, c], vec![ab, bc, ca]]
            }
        };
        for mut ch in children {
            ch.sort_unstable();
            parent.insert(ch, pi);
        }
    }

    let flat = mesh.domain.as_ref().and_then(|dom| dom.flattened().ok());
    let raw = extract_boundary(d, &vertices, &cells);
    let mut facets = Vec::with_capacity(raw.len());
    for f in raw {
        let mut key = f[..d].to_vec();
        key.sort_unstable();
        let p = &mesh.boundary_facets[parent[&key]];
        let pts: Vec<Vec3> = f[..d].iter().map(|&v| vertices[v]).collect();
        let midpoint = linalg::centroid(&pts);
        let geom = flat.as_ref().and_then(|fl| fl.face_geometry(p.face_id).ok());
        let (normal, shape_samples) = match geom {
            Some(g) => (g.normal_at(midpoint), vec![g.shape_operator_at(g.project(midpoint))]),
            None => {
                let interior = linalg::add(midpoint, linalg::scale(p.normal, -1.0));
                let n = if linalg::dot(p.normal, p.normal) > 0.0 {
                    p.normal
                } else {
                    geometric_normal(d, &vertices, &f[..d], interior)
                };
                (n, p.shape_samples.clone())
            }
        };
        facets.push(BoundaryFacet {
            vertices: f,
            face_id: p.face_id,
            normal,
            shape_samples,
        });
    }

    let mut out = Mesh {
        dim: d,
        vertices,
        cells,
        boundary_facets: facets,
        h: 0.0,
        bc_labels: mesh.bc_labels.clone(),
        domain: mesh.domain.clone(),
    };
    out.h = out.compute_h();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, Builtin, DomainSpec};
    use crate::mesh::{build_mesh, generate_mesh};
    use std::collections::BTreeMap;

    #[test]
    fn reference_tetrahedron() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let dom = DomainSpec::polytope(
            3,
            v.clone(),
            vec![vec![0, 2, 1], vec![0, 1, 3], vec![0, 3, 2], vec![1, 2, 3]],
            &BTreeMap::new(),
        )
        .unwrap();
        let m = build_mesh(3, v, vec![[0, 1, 2, 3]], &dom).unwrap();
        let r = refine(&m);
        assert_eq!(r.num_cells(), 8);
        assert!((r.total_volume() - 1.0 / 6.0).abs() < 1e-14 / 6.0);
        assert_eq!(r.boundary_facets.len(), 16);
        r.validate().unwrap();
    }

    #[test]
    fn square_refinement_halves_h() {
        let d = builtin_domain(&Builtin::Rectangle { a: 1.0, b: 1.0, centered: false }).unwrap();
        let m = generate_mesh(&d, 0.25).unwrap();
        let r = refine(&m);
        assert_eq!(r.num_cells(), 4 * m.num_cells());
        assert!((r.h - m.h / 2.0).abs() < 1e-15);
    }
}
