//! The normal-sublattice test and the lip classification of a domain.

use serde::Serialize;

use super::{AxisClip, DomainKind, DomainSpec, FaceId};
use crate::error::{Error, Result};
use crate::linalg::Vec3;

/// True if `nu` has exactly one nonzero component, or exactly two nonzero
/// components of opposite sign. Components with `|nu_i| <= tol` count as zero.
///
/// Errors if `nu` is not a unit vector (within 1e-6) or if `tol` lies outside
/// `(0, 1e-6]`.
pub fn normal_sublattice_ok(nu: &[f64], tol: f64) -> Result<bool> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidInput(format!(
            "tolerance must lie in (0, 1e-6], got {tol:e}"
        )));
    }
    let len = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((len - 1.0).abs() <= 1e-6) {
        return Err(Error::InvalidInput(format!(
            "normal must be a unit vector, has length {len}"
        )));
    }
    let nz: Vec<f64> = nu.iter().copied().filter(|x| x.abs() > tol).collect();
    Ok(match nz.len() {
        1 => true,
        2 => nz[0] * nz[1] < 0.0,
        _ => false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FaceClass {
    /// Normal parallel to `sign * e_axis`.
    Axis { axis: usize, sign: i8 },
    /// Normal in the span of `e_i, e_j` with components of opposite sign.
    OppositePair { axes: (usize, usize), signs: (i8, i8) },
    Violating,
}

/// `(P x)_i = signs[i] * x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(dim: usize) -> Self {
        SignedPermutation {
            perm: (0..dim).collect(),
            signs: vec![1; dim],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&p, &s)| s as f64 * x[p])
            .collect()
    }

    /// All `2^d d!` signed permutations, identity first.
    pub fn all(dim: usize) -> Vec<SignedPermutation> {
        let mut perms = Vec::new();
        permutations(&mut (0..dim).collect::<Vec<_>>(), 0, &mut perms);
        perms.sort();
        let mut out = Vec::new();
        for p in &perms {
            for mask in 0..(1u32 << dim) {
                let signs = (0..dim)
                    .map(|i| if mask & (1 << i) == 0 { 1 } else { -1 })
                    .collect();
                out.push(SignedPermutation { perm: p.clone(), signs });
            }
        }
        out
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationApplied {
    None,
    PermutationReflection(SignedPermutation),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipVerdict {
    pub is_lip: bool,
    pub witness_faces: Vec<(FaceId, FaceClass)>,
    pub rotation_applied: RotationApplied,
}

fn classify_normal(nu: &[f64]) -> Result<FaceClass> {
    let max = nu.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * max;
    if !normal_sublattice_ok(nu, tol)? {
        return Ok(FaceClass::Violating);
    }
    let nz: Vec<usize> = (0..nu.len()).filter(|&i| nu[i].abs() > tol).collect();
    let sgn = |x: f64| if x > 0.0 { 1 } else { -1 };
    Ok(if nz.len() == 1 {
        FaceClass::Axis { axis: nz[0], sign: sgn(nu[nz[0]]) }
    } else {
        FaceClass::OppositePair {
            axes: (nz[0], nz[1]),
            signs: (sgn(nu[nz[0]]), sgn(nu[nz[1]])),
        }
    })
}

/// Representative normals of each face. A planar face has one; the disk arc
/// contributes one per quadrant it covers (its normal stays within a single
/// sign pattern on each quadrant).
fn face_normals(domain: &DomainSpec) -> Result<Vec<(FaceId, Vec<Vec3>)>> {
    let mut out = Vec::new();
    match &domain.kind {
        DomainKind::Polytope { faces, .. } => {
            for (i, f) in faces.iter().enumerate() {
                out.push((i, vec![f.normal]));
            }
        }
        DomainKind::Disk { clips, .. } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let covered = |q: [i8; 2], clips: &[AxisClip]| clips.iter().all(|c| q[c.axis] == c.sign);
            let samples: Vec<Vec3> = [[1i8, 1], [-1, 1], [-1, -1], [1, -1]]
                .into_iter()
                .filter(|q| covered(*q, clips))
                .map(|q| [q[0] as f64 * s, q[1] as f64 * s, 0.0])
                .collect();
            out.push((0, samples));
            for (i, c) in clips.iter().enumerate() {
                let mut n = [0.0; 3];
                n[c.axis] = -(c.sign as f64);
                out.push((i + 1, vec![n]));
            }
        }
        DomainKind::Product { .. } => return face_normals(&domain.flattened()?),
    }
    Ok(out)
}

fn classify_under(
    dim: usize,
    normals: &[(FaceId, Vec<Vec3>)],
    p: &SignedPermutation,
) -> Result<Vec<(FaceId, FaceClass)>> {
    let mut out = Vec::with_capacity(normals.len());
    for (f, samples) in normals {
        let mut class = None;
        for n in samples {
            let c = classify_normal(&p.apply(&n[..dim]))?;
            match (&class, &c) {
                (_, FaceClass::Violating) => {
                    class = Some(FaceClass::Violating);
                    break;
                }
                (None, _) => class = Some(c),
                // several samples on a curved face: report the pair of axes
                (Some(FaceClass::Axis { .. }), FaceClass::OppositePair { .. }) => class = Some(c),
                _ => {}
            }
        }
        out.push((*f, class.unwrap_or(FaceClass::Violating)));
    }
    Ok(out)
}

/// Decides whether the domain is lip, optionally after a signed permutation
/// of the coordinates. The identity is tried first.
pub fn is_lip(domain: &DomainSpec, search_orientations: bool) -> Result<LipVerdict> {
    let dim = domain.dim;
    let normals = face_normals(domain)?;
    let candidates = if search_orientations {
        SignedPermutation::all(dim)
    } else {
        vec![SignedPermutation::identity(dim)]
    };
    let mut first = None;
    for p in candidates {
        let classes = classify_under(dim, &normals, &p)?;
        let ok = classes.iter().all(|(_, c)| *c != FaceClass::Violating);
        if ok {
            return Ok(LipVerdict {
                is_lip: true,
                witness_faces: classes,
                rotation_applied: if p.is_identity() {
                    RotationApplied::None
                } else {
                    RotationApplied::PermutationReflection(p)
                },
            });
        }
        if first.is_none() {
            first = Some(classes);
        }
    }
    Ok(LipVerdict {
        is_lip: false,
        witness_faces: first.unwrap_or_default(),
        rotation_applied: RotationApplied::None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sublattice_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(normal_sublattice_ok(&[1.0, 0.0, 0.0], 1e-9).unwrap());
        assert!(normal_sublattice_ok(&[-s, 0.0, s], 1e-9).unwrap());
        assert!(!normal_sublattice_ok(&[s, 0.0, s], 1e-9).unwrap());
        let t = 1.0 / 3f64.sqrt();
        assert!(!normal_sublattice_ok(&[t, -t, t], 1e-9).unwrap());
        assert!(normal_sublattice_ok(&[1.0, 1e-12, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn sublattice_errors() {
        assert!(normal_sublattice_ok(&[1.0, 1.0], 1e-9).is_err());
        assert!(normal_sublattice_ok(&[1.0, 0.0], 0.0).is_err());
        assert!(normal_sublattice_ok(&[1.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn signed_permutation_count() {
        assert_eq!(SignedPermutation::all(3).len(), 48);
        assert!(SignedPermutation::all(3)[0].is_identity());
        assert_eq!(SignedPermutation::all(2).len(), 8);
    }
}
