//! Reflection symmetries and restriction to orthants / half-spaces.

use super::polytope::{convex_domain, halfspaces_of, Halfspace};
use super::{AxisClip, Bc, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::linalg;

/// Axes `j` (0-based) such that the reflection `x_j -> -x_j` maps the domain,
/// including its boundary labels, onto itself.
pub fn detect_symmetries(domain: &DomainSpec) -> Result<Vec<usize>> {
    detect_symmetries_with_tol(domain, 1e-11)
}

/// As [`detect_symmetries`] with vertex matching tolerance `tol` relative to
/// the diameter.
pub fn detect_symmetries_with_tol(domain: &DomainSpec, tol: f64) -> Result<Vec<usize>> {
    match &domain.kind {
        DomainKind::Polytope { vertices, faces } => {
            let tol = tol * domain.diameter().max(1.0);
            let mut axes = Vec::new();
            'axis: for j in 0..domain.dim {
                let mut image = Vec::with_capacity(vertices.len());
                for v in vertices {
                    let mut r = *v;
                    r[j] = -r[j];
                    match vertices.iter().position(|w| linalg::dist(*w, r) <= tol) {
                        Some(k) => image.push(k),
                        None => continue 'axis,
                    }
                }
                for (fi, f) in faces.iter().enumerate() {
                    let mut mapped: Vec<usize> = f.vertices.iter().map(|&v| image[v]).collect();
                    mapped.sort_unstable();
                    let partner = faces.iter().position(|g| {
                        let mut s = g.vertices.clone();
                        s.sort_unstable();
                        s == mapped
                    });
                    match partner {
                        Some(g) if domain.bc(g) == domain.bc(fi) => {}
                        _ => continue 'axis,
                    }
                }
                axes.push(j);
            }
            Ok(axes)
        }
        DomainKind::Disk { clips, .. } => Ok((0..2)
            .filter(|&j| clips.iter().all(|c| c.axis != j))
            .collect()),
        DomainKind::Product { .. } => detect_symmetries_with_tol(&domain.flattened()?, tol),
    }
}

/// All sign vectors of length `dim`, `+` before `-` in lexicographic order.
pub fn orthants(dim: usize) -> Vec<Vec<i8>> {
    (0..(1u32 << dim))
        .map(|m| {
            (0..dim)
                .map(|i| if m & (1 << (dim - 1 - i)) == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

fn sign_str(s: &[i8]) -> String {
    s.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

/// Intersects the domain with `{sign * x_axis >= 0}` for each clip. The new
/// coordinate face on `dirichlet_axis` is labelled Dirichlet, the others
/// Neumann.
fn restrict(domain: &DomainSpec, clips: &[AxisClip], dirichlet_axis: Option<usize>) -> Result<DomainSpec> {
    if domain.has_dirichlet() {
        return Err(Error::Precondition(
            "restriction expects a domain without Dirichlet faces".into(),
        ));
    }
    let mut out = match &domain.kind {
        DomainKind::Disk { radius, clips: existing } => {
            if !existing.is_empty() {
                return Err(Error::UnsupportedDomain("disk is already clipped".into()));
            }
            let mut d = DomainSpec::disk(*radius, clips.to_vec())?;
            for (i, c) in clips.iter().enumerate() {
                if Some(c.axis) == dirichlet_axis {
                    d.bc_labels.insert(i + 1, Bc::Dirichlet);
                }
            }
            d.validate()?;
            d
        }
        _ => {
            let (mut hs, mut bcs) = halfspaces_of(domain)?;
            for c in clips {
                let mut n = [0.0; 3];
                n[c.axis] = -(c.sign as f64);
                hs.push(Halfspace { normal: n, offset: 0.0 });
                bcs.push(if Some(c.axis) == dirichlet_axis { Bc::Dirichlet } else { Bc::Neumann });
            }
            convex_domain(domain.dim, &hs, &bcs)?.0
        }
    };
    out.exterior_ball_declared = domain.exterior_ball_declared;
    Ok(out)
}

/// `domain` intersected with `{x_i >= 0}` for each listed axis, all faces
/// Neumann. Used to build mirror-symmetric meshes.
pub(crate) fn positive_piece(domain: &DomainSpec, axes: &[usize]) -> Result<DomainSpec> {
    let new: Vec<AxisClip> = axes.iter().map(|&axis| AxisClip { axis, sign: 1 }).collect();
    match &domain.kind {
        DomainKind::Disk { radius, clips } => {
            let mut all = clips.clone();
            all.extend(new);
            DomainSpec::disk(*radius, all)
        }
        _ => {
            let (mut hs, _) = halfspaces_of(domain)?;
            for c in &new {
                let mut n = [0.0; 3];
                n[c.axis] = -1.0;
                hs.push(Halfspace { normal: n, offset: 0.0 });
            }
            Ok(convex_domain(domain.dim, &hs, &[])?.0)
        }
    }
}

/// The piece of a fully symmetric domain in the given orthant, with Dirichlet
/// data on `{x_j = 0}` and Neumann data elsewhere.
pub fn orthant_restriction(domain: &DomainSpec, orthant: &[i8], j: usize) -> Result<DomainSpec> {
    let dim = domain.dim;
    if orthant.len() != dim || orthant.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidInput(format!(
            "orthant must be {dim} signs of +-1, got {orthant:?}"
        )));
    }
    if j >= dim {
        return Err(Error::InvalidInput(format!("axis {} out of range", j + 1)));
    }
    let sym = detect_symmetries(domain)?;
    if sym.len() != dim {
        return Err(Error::Precondition(format!(
            "domain must be symmetric in every coordinate, found symmetric axes {:?}",
            sym.iter().map(|a| a + 1).collect::<Vec<_>>()
        )));
    }
    let clips: Vec<AxisClip> = orthant
        .iter()
        .enumerate()
        .map(|(axis, &sign)| AxisClip { axis, sign })
        .collect();
    let out = restrict(domain, &clips, Some(j))?;
    Ok(out.with_name(format!("{}|orthant({})", domain.name, sign_str(orthant))))
}

/// `{x in domain : sign * x_j > 0}` with Dirichlet data on `{x_j = 0}`.
pub fn half_restriction(domain: &DomainSpec, j: usize, sign: i8) -> Result<DomainSpec> {
    if j >= domain.dim {
        return Err(Error::InvalidInput(format!("axis {} out of range", j + 1)));
    }
    if !detect_symmetries(domain)?.contains(&j) {
        return Err(Error::Precondition(format!(
            "domain is not symmetric in x{}",
            j + 1
        )));
    }
    let out = restrict(domain, &[AxisClip { axis: j, sign }], Some(j))?;
    Ok(out.with_name(format!(
        "{}|half(x{}{}0)",
        domain.name,
        j + 1,
        if sign > 0 { ">" } else { "<" }
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, is_lip, Builtin};

    #[test]
    fn centred_square_is_symmetric() {
        let d = builtin_domain(&Builtin::Rectangle { a: 2.0, b: 2.0, centered: true }).unwrap();
        assert_eq!(detect_symmetries(&d).unwrap(), vec![0, 1]);
        let u = builtin_domain(&Builtin::Rectangle { a: 1.0, b: 1.0, centered: false }).unwrap();
        assert!(detect_symmetries(&u).unwrap().is_empty());
    }

    #[test]
    fn orthant_order() {
        assert_eq!(orthants(2), vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
    }

    #[test]
    fn octahedron_lip_orthant() {
        let d = builtin_domain(&Builtin::Octahedron { a: 2.0, b: 2.0, h: 1.0 }).unwrap();
        assert_eq!(detect_symmetries(&d).unwrap(), vec![0, 1, 2]);
        let q = orthant_restriction(&d, &[1, 1, -1], 0).unwrap();
        assert!(is_lip(&q, false).unwrap().is_lip);
        assert!((q.volume() - 1.0 / 3.0).abs() < 1e-14);
        // the positive orthant piece is lip only after the reflection z -> -z
        let pos = orthant_restriction(&d, &[1, 1, 1], 0).unwrap();
        assert!(!is_lip(&pos, false).unwrap().is_lip);
        assert!(is_lip(&pos, true).unwrap().is_lip);
    }

    #[test]
    fn asymmetric_domain_is_rejected() {
        let d = builtin_domain(&Builtin::DoublePrism).unwrap();
        assert!(matches!(orthant_restriction(&d, &[1, 1, 1], 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn disk_quadrant() {
        let d = builtin_domain(&Builtin::Disk { r: 1.0 }).unwrap();
        let q = orthant_restriction(&d, &[1, -1], 1).unwrap();
        assert_eq!(q.dirichlet_faces(), vec![2]);
        assert!(is_lip(&q, false).unwrap().is_lip);
        assert!(!is_lip(&orthant_restriction(&d, &[1, 1], 1).unwrap(), false).unwrap().is_lip);
    }
}
