//! Plain-text mesh files.
//!
//! ```text
//! mesh <dim> <nv> <nc> <nbf>
//! v x y [z]
//! c i j k [l]
//! b i j [k] <face_id>
//! bn <facet> n1 n2 [n3]          outward unit normal
//! bs <facet> <d*d entries>       shape operator, row-major
//! bc <face_id> neumann|dirichlet
//! ```
//!
//! Indices are 0-based. Floats are written with 17 significant digits, so a
//! write/read round trip is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{facet_incidence, geometric_normal, BoundaryFacet, Mesh};
use crate::error::{parse_err, Error, Result};
use crate::geometry::Bc;
use crate::linalg::{Mat3, ZERO3};

pub fn write_mesh(mesh: &Mesh) -> String {
    let d = mesh.dim;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mesh {d} {} {} {}",
        mesh.vertices.len(),
        mesh.cells.len(),
        mesh.boundary_facets.len()
    );
    for v in &mesh.vertices {
        let c: Vec<String> = v[..d].iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(s, "v {}", c.join(" "));
    }
    for c in &mesh.cells {
        let ids: Vec<String> = c[..=d].iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "c {}", ids.join(" "));
    }
    for f in &mesh.boundary_facets {
        let ids: Vec<String> = f.verts(d).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "b {} {}", ids.join(" "), f.face_id);
    }
    for (i, f) in mesh.boundary_facets.iter().enumerate() {
        let n: Vec<String> = f.normal[..d].iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(s, "bn {i} {}", n.join(" "));
    }
    for (i, f) in mesh.boundary_facets.iter().enumerate() {
        for m in &f.shape_samples {
            if *m == ZERO3 {
                continue;
            }
            let mut e = Vec::with_capacity(d * d);
            for row in m.iter().take(d) {
                for x in row.iter().take(d) {
                    e.push(format!("{x:.16e}"));
                }
            }
            let _ = writeln!(s, "bs {i} {}", e.join(" "));
        }
    }
    for (f, bc) in &mesh.bc_labels {
        let name = match bc {
            Bc::Neumann => "neumann",
            Bc::Dirichlet => "dirichlet",
        };
        let _ = writeln!(s, "bc {f} {name}");
    }
    s
}

/// Writes atomically (temporary file in the same directory, then rename).
pub fn write_mesh_to(mesh: &Mesh, path: &Path) -> Result<()> {
    crate::util::write_atomic(path, write_mesh(mesh).as_bytes())
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != "mesh" {
        return Err(parse_err(hl, "expected 'mesh <dim> <nv> <nc> <nbf>'"));
    }
    let uint = |line: usize, s: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| parse_err(line, format!("invalid integer '{s}'")))
    };
    let float = |line: usize, s: &str| -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_err(line, format!("invalid number '{s}'")))
    };
    let d = uint(hl, h[1])?;
    if !(1..=3).contains(&d) {
        return Err(parse_err(hl, format!("dimension {d} not supported")));
    }
    let (nv, nc, nbf) = (uint(hl, h[2])?, uint(hl, h[3])?, uint(hl, h[4])?);
    let mut vertices = Vec::with_capacity(nv);
    let mut cells = Vec::with_capacity(nc);
    let mut facets: Vec<BoundaryFacet> = Vec::with_capacity(nbf);
    let mut normals: Vec<Option<[f64; 3]>> = vec![None; nbf];
    let mut samples: Vec<Vec<Mat3>> = vec![Vec::new(); nbf];
    let mut labels = BTreeMap::new();
    let mut vertex_lines = Vec::new();

    for (ln, line) in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "v" => {
                if tok.len() != d + 1 {
                    return Err(parse_err(ln, format!("vertex needs {d} coordinates")));
                }
                let mut p = [0.0; 3];
                for k in 0..d {
                    p[k] = float(ln, tok[k + 1])?;
                }
                vertices.push(p);
            }
            "c" => {
                if tok.len() != d + 2 {
                    return Err(parse_err(ln, format!("cell needs {} vertex indices", d + 1)));
                }
                let mut c = [0usize; 4];
                for k in 0..=d {
                    c[k] = uint(ln, tok[k + 1])?;
                    if c[k] >= nv {
                        return Err(parse_err(ln, format!("cell references missing vertex {}", c[k])));
                    }
                }
                cells.push(c);
            }
            "b" => {
                if tok.len() != d + 2 {
                    return Err(parse_err(ln, format!("facet needs {d} vertex indices and a face id")));
                }
                let mut f = [0usize; 3];
                for k in 0..d {
                    f[k] = uint(ln, tok[k + 1])?;
                    if f[k] >= nv {
                        return Err(parse_err(ln, format!("facet references missing vertex {}", f[k])));
                    }
                }
                facets.push(BoundaryFacet {
                    vertices: f,
                    face_id: uint(ln, tok[d + 1])?,
                    normal: [0.0; 3],
                    shape_samples: Vec::new(),
                });
                vertex_lines.push(ln);
            }
            "bn" => {
                if tok.len() != d + 2 {
                    return Err(parse_err(ln, format!("normal needs a facet index and {d} components")));
                }
                let i = uint(ln, tok[1])?;
                if i >= nbf {
                    return Err(parse_err(ln, format!("normal for missing facet {i}")));
                }
                let mut n = [0.0; 3];
                for k in 0..d {
                    n[k] = float(ln, tok[k + 2])?;
                }
                normals[i] = Some(n);
            }
            "bs" => {
                if tok.len() != d * d + 2 {
                    return Err(parse_err(ln, format!("shape sample needs a facet index and {} entries", d * d)));
                }
                let i = uint(ln, tok[1])?;
                if i >= nbf {
                    return Err(parse_err(ln, format!("shape sample for missing facet {i}")));
                }
                let mut m = ZERO3;
                for r in 0..d {
                    for c in 0..d {
                        m[r][c] = float(ln, tok[2 + r * d + c])?;
                    }
                }
                samples[i].push(m);
            }
            "bc" => {
                if tok.len() != 3 {
                    return Err(parse_err(ln, "expected 'bc <face_id> neumann|dirichlet'"));
                }
                let bc = match tok[2] {
                    "neumann" => Bc::Neumann,
                    "dirichlet" => Bc::Dirichlet,
                    other => return Err(parse_err(ln, format!("unknown bc '{other}'"))),
                };
                labels.insert(uint(ln, tok[1])?, bc);
            }
            other => return Err(parse_err(ln, format!("unknown record '{other}'"))),
        }
    }
    if vertices.len() != nv || cells.len() != nc || facets.len() != nbf {
        return Err(Error::Validation(format!(
            "header announces {nv}/{nc}/{nbf} vertices/cells/facets, file has {}/{}/{}",
            vertices.len(),
            cells.len(),
            facets.len()
        )));
    }

    let incidence = facet_incidence(d, &cells);
    for (i, f) in facets.iter_mut().enumerate() {
        f.normal = match normals[i] {
            Some(n) => n,
            None => {
                let mut key = f.verts(d).to_vec();
                key.sort_unstable();
                let inc = incidence.get(&key).ok_or_else(|| {
                    Error::Validation(format!("facet on line {} is not a face of any cell", vertex_lines[i]))
                })?;
                let interior = vertices[cells[inc.cell][inc.opposite]];
                geometric_normal(d, &vertices, f.verts(d), interior)
            }
        };
        f.shape_samples = if samples[i].is_empty() {
            vec![ZERO3]
        } else {
            std::mem::take(&mut samples[i])
        };
    }
    for f in &facets {
        labels.entry(f.face_id).or_insert(Bc::Neumann);
    }
    let mut mesh = Mesh {
        dim: d,
        vertices,
        cells,
        boundary_facets: facets,
        h: 0.0,
        bc_labels: labels,
        domain: None,
    };
    mesh.h = mesh.compute_h();
    mesh.validate()?;
    Ok(mesh)
}
