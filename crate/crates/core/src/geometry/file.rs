//! Line-oriented domain description files.
//!
//! ```text
//! # unit square with a Dirichlet side
//! dim 2
//! vertex 0 0
//! vertex 1 0
//! vertex 1 1
//! vertex 0 1
//! face 0 1
//! face 1 2
//! face 2 3
//! face 3 0 bc=dirichlet
//! exterior_ball yes
//! ```
//!
//! Symmetry axes are 1-based. Face ids follow the order of `face` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Bc, DomainKind, DomainSpec};
use crate::error::{parse_err, Error, Result};

pub fn read_domain(path: &Path) -> Result<DomainSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut d = parse_domain(&text)?;
    d.name = path.display().to_string();
    Ok(d)
}

pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let mut dim: Option<usize> = None;
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut bc = BTreeMap::new();
    let mut symmetry = Vec::new();
    let mut exterior = true;
    let mut curvature = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let key = tok.next().unwrap();
        let rest: Vec<&str> = tok.collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line_no, format!("invalid number '{s}'")))
        };
        let index = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("invalid index '{s}'")))
        };
        match key {
            "dim" => {
                if rest.len() != 1 {
                    return Err(parse_err(line_no, "expected 'dim <d>'"));
                }
                let d = index(rest[0])?;
                if !(1..=3).contains(&d) {
                    return Err(parse_err(line_no, format!("dimension {d} not supported")));
                }
                if dim.replace(d).is_some() {
                    return Err(parse_err(line_no, "duplicate 'dim'"));
                }
            }
            "vertex" => {
                let d = dim.ok_or_else(|| parse_err(line_no, "'dim' must precede vertices"))?;
                if rest.len() != d {
                    return Err(parse_err(
                        line_no,
                        format!("vertex needs {d} coordinates, got {}", rest.len()),
                    ));
                }
                let mut p = [0.0; 3];
                for (i, s) in rest.iter().enumerate() {
                    p[i] = num(s)?;
                }
                vertices.push(p);
            }
            "face" => {
                let mut ids = Vec::new();
                let mut label = Bc::Neumann;
                for s in &rest {
                    if let Some(v) = s.strip_prefix("bc=") {
                        label = match v {
                            "neumann" => Bc::Neumann,
                            "dirichlet" => Bc::Dirichlet,
                            other => {
                                return Err(parse_err(line_no, format!("unknown bc '{other}'")))
                            }
                        };
                    } else {
                        ids.push(index(s)?);
                    }
                }
                if ids.is_empty() {
                    return Err(parse_err(line_no, "face without vertices"));
                }
                bc.insert(faces.len(), label);
                faces.push((line_no, ids));
            }
            "symmetry" => {
                for s in &rest {
                    let j = index(s)?;
                    if j == 0 {
                        return Err(parse_err(line_no, "symmetry axes are 1-based"));
                    }
                    symmetry.push(j - 1);
                }
            }
            "exterior_ball" => {
                exterior = match rest.as_slice() {
                    ["yes"] => true,
                    ["no"] => false,
                    _ => return Err(parse_err(line_no, "expected 'exterior_ball yes|no'")),
                };
            }
            "curvature" => {
                if rest.len() != 2 {
                    return Err(parse_err(line_no, "expected 'curvature <face_id> <kappa>'"));
                }
                curvature.insert(index(rest[0])?, num(rest[1])?);
            }
            other => return Err(parse_err(line_no, format!("unknown keyword '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| parse_err(0, "missing 'dim'"))?;
    for (line_no, ids) in &faces {
        if let Some(&v) = ids.iter().find(|&&v| v >= vertices.len()) {
            return Err(parse_err(
                *line_no,
                format!("face references missing vertex {v} ({} vertices declared)", vertices.len()),
            ));
        }
    }
    for &j in &symmetry {
        if j >= dim {
            return Err(Error::InvalidInput(format!("symmetry axis {} exceeds dimension", j + 1)));
        }
    }
    let face_lists = faces.into_iter().map(|(_, f)| f).collect();
    let mut spec = DomainSpec::polytope(dim, vertices, face_lists, &bc)?;
    for f in curvature.keys() {
        if *f >= spec.face_count() {
            return Err(Error::InvalidInput(format!("curvature given for missing face {f}")));
        }
    }
    spec.curvature = curvature;
    spec.exterior_ball_declared = exterior;
    symmetry.sort_unstable();
    symmetry.dedup();
    spec.symmetry_planes = symmetry;
    spec.name = "file".into();
    spec.validate()?;
    Ok(spec)
}

/// Serialises a polytope domain (products are flattened first).
pub fn write_domain(domain: &DomainSpec) -> Result<String> {
    let flat = domain.flattened()?;
    let DomainKind::Polytope { vertices, faces } = &flat.kind else {
        return Err(Error::UnsupportedDomain(
            "only polytopes can be written as domain files".into(),
        ));
    };
    let mut s = String::new();
    let _ = writeln!(s, "dim {}", flat.dim);
    for v in vertices {
        let coords: Vec<String> = v[..flat.dim].iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(s, "vertex {}", coords.join(" "));
    }
    for (i, f) in faces.iter().enumerate() {
        let ids: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
        let bc = match flat.bc(i) {
            Bc::Neumann => "",
            Bc::Dirichlet => " bc=dirichlet",
        };
        let _ = writeln!(s, "face {}{bc}", ids.join(" "));
    }
    if !domain.symmetry_planes.is_empty() {
        let axes: Vec<String> = domain.symmetry_planes.iter().map(|j| (j + 1).to_string()).collect();
        let _ = writeln!(s, "symmetry {}", axes.join(" "));
    }
    let _ = writeln!(
        s,
        "exterior_ball {}",
        if domain.exterior_ball_declared { "yes" } else { "no" }
    );
    for (f, k) in &flat.curvature {
        let _ = writeln!(s, "curvature {f} {k:.16e}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, Builtin};

    const SQUARE: &str = "# square\ndim 2\nvertex 0 0\nvertex 1 0\nvertex 1 1\nvertex 0 1\nface 0 1\nface 1 2\nface 2 3\nface 3 0 bc=dirichlet\n";

    #[test]
    fn parses_square() {
        let d = parse_domain(SQUARE).unwrap();
        assert_eq!(d.face_count(), 4);
        assert_eq!(d.dirichlet_faces(), vec![3]);
        assert!((d.volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_vertex_names_line() {
        let text = SQUARE.replace("face 2 3", "face 2 7");
        match parse_domain(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_double_prism() {
        let d = builtin_domain(&Builtin::DoublePrism).unwrap();
        let back = parse_domain(&write_domain(&d).unwrap()).unwrap();
        assert!((back.volume() - 1.0).abs() < 1e-14);
        assert_eq!(back.face_count(), 6);
    }
}
