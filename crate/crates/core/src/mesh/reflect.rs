use super::generate::reflect_raw;
use super::{build_mesh, Mesh};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Where a vertex of a mirrored mesh comes from: the source vertex and the
/// axes across which it was reflected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexOrigin {
    pub source: usize,
    pub flipped: [bool; 3],
}

impl VertexOrigin {
    /// `(-1)^(number of flips across axis)`; `+1` when not flipped.
    pub fn sign(&self, axis: usize) -> f64 {
        if self.flipped[axis] {
            -1.0
        } else {
            1.0
        }
    }
}

/// Mirrors `mesh` successively across `{x_a = 0}` for each `a` in `axes` and
/// tags the result against `target`, which must be the union of the images.
pub fn reflect_mesh(
    mesh: &Mesh,
    axes: &[usize],
    target: &DomainSpec,
) -> Result<(Mesh, Vec<VertexOrigin>)> {
    if target.dim != mesh.dim {
        return Err(Error::InvalidInput("target domain dimension differs from mesh".into()));
    }
    let mut vertices = mesh.vertices.clone();
    let mut cells = mesh.cells.clone();
    let mut origin: Vec<VertexOrigin> = (0..vertices.len())
        .map(|v| VertexOrigin { source: v, flipped: [false; 3] })
        .collect();
    for &axis in axes {
        if axis >= mesh.dim {
            return Err(Error::InvalidInput(format!("axis {} out of range", axis + 1)));
        }
        let (v, c, o) = reflect_raw(mesh.dim, &vertices, &cells, axis);
        let mut next = Vec::with_capacity(v.len());
        for (src, mirrored) in o {
            let mut vo = origin[src];
            if mirrored {
                vo.flipped[axis] = !vo.flipped[axis];
            }
            next.push(vo);
        }
        vertices = v;
        cells = c;
        origin = next;
    }
    let m = build_mesh(mesh.dim, vertices, cells, target)?;
    Ok((m, origin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, orthant_restriction, Builtin};
    use crate::mesh::generate_mesh;

    #[test]
    fn quarter_square_to_full() {
        let full = builtin_domain(&Builtin::Rectangle { a: 2.0, b: 2.0, centered: true }).unwrap();
        let q = orthant_restriction(&full, &[1, 1], 0).unwrap();
        let mq = generate_mesh(&q, 0.25).unwrap();
        let (m, origin) = reflect_mesh(&mq, &[1, 0], &full).unwrap();
        assert!((m.total_volume() - 4.0).abs() < 1e-13);
        assert_eq!(m.num_cells(), 4 * mq.num_cells());
        for (v, o) in origin.iter().enumerate() {
            let p = m.vertices[v];
            let s = mq.vertices[o.source];
            assert_eq!(p[0], o.sign(0) * s[0]);
            assert_eq!(p[1], o.sign(1) * s[1]);
        }
        m.validate().unwrap();
    }
}
