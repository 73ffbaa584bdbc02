//! Mesh generators: structured boxes, polar disk sectors and edgewise
//! subdivision of a coarse simplicial decomposition for other polytopes.
//! Domains with reflection symmetries are meshed on the positive piece and
//! mirrored, so the result is exactly symmetric.

use std::collections::HashMap;

use super::{build_mesh, fix_orientation, Mesh};
use crate::error::{Error, Result};
use crate::geometry::symmetry::positive_piece;
use crate::geometry::{axis_of, detect_symmetries, DomainKind, DomainSpec};
use crate::linalg::{self, Vec3};

pub const DEFAULT_EDGE_GRADING: f64 = 2.5;

/// Fraction of each lattice unit over which the edge grading acts.
const GRADING_REACH: f64 = 0.5;

/// Splitting of the cells of a structured box grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxPattern {
    /// Cell-centred split (4 triangles / 24 tetrahedra per cell). Invariant
    /// under the reflections of every cell, so separable eigenfunctions stay
    /// exactly separable.
    #[default]
    Symmetric,
    /// Freudenthal/Kuhn split (2 triangles / 6 tetrahedra per cell).
    Kuhn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub target_h: f64,
    pub box_pattern: BoxPattern,
    /// Multiplies the resolution chosen for `target_h`; used for nested
    /// convergence studies (1, 2, 4, ...).
    pub scale: usize,
    /// Mesh one symmetric piece and mirror it.
    pub use_symmetry: bool,
    /// Exponent of the power grading applied towards obtuse edges of lattice
    /// polytopes; 1 disables grading.
    pub edge_grading: f64,
}

impl MeshOptions {
    pub fn new(target_h: f64) -> Self {
        MeshOptions {
            target_h,
            box_pattern: BoxPattern::Symmetric,
            scale: 1,
            use_symmetry: true,
            edge_grading: DEFAULT_EDGE_GRADING,
        }
    }
}

/// Mesh with largest cell diameter at most `1.5 * target_h`.
pub fn generate_mesh(domain: &DomainSpec, target_h: f64) -> Result<Mesh> {
    generate_mesh_with(domain, &MeshOptions::new(target_h))
}

pub fn generate_mesh_with(domain: &DomainSpec, opts: &MeshOptions) -> Result<Mesh> {
    if !(opts.target_h > 0.0 && opts.target_h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "target mesh size must be positive, got {}",
            opts.target_h
        )));
    }
    if opts.scale == 0 {
        return Err(Error::InvalidInput("mesh scale must be at least 1".into()));
    }
    let flat = domain.flattened()?;
    let axes = match &flat.kind {
        // disks are always built from quarter sectors
        DomainKind::Disk { .. } => detect_symmetries(&flat)?,
        DomainKind::Polytope { .. } if opts.use_symmetry && flat.is_convex() => detect_symmetries(&flat)?,
        _ => Vec::new(),
    };
    let (mut vertices, mut cells) = if axes.is_empty() {
        mesh_piece(&flat, opts)?
    } else {
        mesh_piece(&positive_piece(&flat, &axes)?, opts)?
    };
    for &axis in &axes {
        let (v, c, _) = reflect_raw(flat.dim, &vertices, &cells, axis);
        vertices = v;
        cells = c;
    }
    build_mesh(flat.dim, vertices, cells, domain)
}

type Raw = (Vec<Vec3>, Vec<[usize; 4]>);

fn mesh_piece(domain: &DomainSpec, opts: &MeshOptions) -> Result<Raw> {
    let target = opts.target_h;
    match &domain.kind {
        DomainKind::Disk { radius, clips } => {
            let mut signs = [0i8; 2];
            for c in clips {
                signs[c.axis] = c.sign;
            }
            if signs.contains(&0) {
                return Err(Error::UnsupportedDomain(
                    "disk pieces other than quadrants are meshed by reflection".into(),
                ));
            }
            let mut n = (radius / target).ceil().max(1.0) as usize;
            loop {
                let (v, c) = polar_quadrant(*radius, signs, n);
                if h_of(2, &v, &c) <= 1.5 * target || n > 100_000 {
                    break;
                }
                n += 1;
            }
            Ok(polar_quadrant(*radius, signs, n * opts.scale))
        }
        DomainKind::Polytope { vertices, faces } => {
            if let Some((lo, hi)) = axis_box(domain) {
                let d = domain.dim;
                let mut n = [1usize; 3];
                for i in 0..d {
                    n[i] = ((hi[i] - lo[i]) / target).ceil().max(1.0) as usize;
                }
                loop {
                    let hmax = structured_h(d, lo, hi, n, opts.box_pattern);
                    if hmax <= 1.5 * target {
                        break;
                    }
                    for k in n.iter_mut().take(d) {
                        *k += 1;
                    }
                }
                for k in n.iter_mut().take(d) {
                    *k *= opts.scale;
                }
                return Ok(structured_box(d, lo, hi, n, opts.box_pattern));
            }
            if let Some(lat) = Lattice::detect(domain, opts.edge_grading) {
                return Ok(lat.mesh(target, opts.scale));
            }
            let (cv, cc) = coarse_simplices(domain, vertices, faces)?;
            // for n >= 2 the subdivision uses a fixed set of edge vectors
            // scaled by 1/n, so h(n) = 2 h(2) / n
            let (v2, c2) = freudenthal(domain.dim, &cv, &cc, 2);
            let unit_h = 2.0 * h_of(domain.dim, &v2, &c2);
            let mut n = (unit_h / (1.5 * target)).ceil().max(1.0) as usize;
            if n == 1 && h_of(domain.dim, &cv, &cc) > 1.5 * target {
                n = 2;
            }
            Ok(freudenthal(domain.dim, &cv, &cc, n * opts.scale))
        }
        DomainKind::Product { .. } => mesh_piece(&domain.flattened()?, opts),
    }
}

fn h_of(dim: usize, v: &[Vec3], cells: &[[usize; 4]]) -> f64 {
    let mut h: f64 = 0.0;
    for c in cells {
        for a in 0..=dim {
            for b in a + 1..=dim {
                h = h.max(linalg::dist(v[c[a]], v[c[b]]));
            }
        }
    }
    h
}

/// Bounds of an axis-aligned box, if every face is perpendicular to an axis
/// and there are exactly `2 * dim` of them.
fn axis_box(domain: &DomainSpec) -> Option<([f64; 3], [f64; 3])> {
    let DomainKind::Polytope { vertices, faces } = &domain.kind else { return None };
    let d = domain.dim;
    if faces.len() != 2 * d || faces.iter().any(|f| axis_of(f.normal, d).is_none()) {
        return None;
    }
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for i in 0..d {
        lo[i] = vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
        hi[i] = vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
    }
    if vertices.len() != 1 << d {
        return None;
    }
    Some((lo, hi))
}

fn structured_h(d: usize, lo: [f64; 3], hi: [f64; 3], n: [usize; 3], pattern: BoxPattern) -> f64 {
    let s: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / n[i] as f64).collect();
    let diag = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let smax = s.iter().copied().fold(0.0, f64::max);
    match (pattern, d) {
        (_, 1) => smax,
        (BoxPattern::Kuhn, _) => diag,
        (BoxPattern::Symmetric, _) => smax.max(diag / 2.0),
    }
}

fn coord(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if k == 0 {
        lo
    } else if k == n {
        hi
    } else {
        lo + (hi - lo) * (k as f64 / n as f64)
    }
}

fn structured_box(d: usize, lo: [f64; 3], hi: [f64; 3], n: [usize; 3], pattern: BoxPattern) -> Raw {
    let mut cells = Vec::new();
    let mut vertices = Vec::new();
    match (pattern, d) {
        (_, 1) => {
            for i in 0..=n[0] {
                vertices.push([coord(lo[0], hi[0], i, n[0]), 0.0, 0.0]);
            }
            for i in 0..n[0] {
                cells.push([i, i + 1, 0, 0]);
            }
        }
        (BoxPattern::Kuhn, _) => {
            let m = [n[0] + 1, n[1] + 1, if d == 3 { n[2] + 1 } else { 1 }];
            let idx = |i: usize, j: usize, k: usize| i + m[0] * (j + m[1] * k);
            for k in 0..m[2] {
                for j in 0..m[1] {
                    for i in 0..m[0] {
                        let z = if d == 3 { coord(lo[2], hi[2], k, n[2]) } else { 0.0 };
                        vertices.push([coord(lo[0], hi[0], i, n[0]), coord(lo[1], hi[1], j, n[1]), z]);
                    }
                }
            }
            if d == 2 {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        let (a, b, c, e) = (idx(i, j, 0), idx(i + 1, j, 0), idx(i + 1, j + 1, 0), idx(i, j + 1, 0));
                        cells.push([a, b, c, 0]);
                        cells.push([a, c, e, 0]);
                    }
                }
            } else {
                const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                for k in 0..n[2] {
                    for j in 0..n[1] {
                        for i in 0..n[0] {
                            for p in PERMS {
                                let mut cur = [i, j, k];
                                let mut tet = [idx(i, j, k), 0, 0, 0];
                                for (s, &axis) in p.iter().enumerate() {
                                    cur[axis] += 1;
                                    tet[s + 1] = idx(cur[0], cur[1], cur[2]);
                                }
                                cells.push(tet);
                            }
                        }
                    }
                }
            }
        }
        (BoxPattern::Symmetric, _) => {
            // vertices on the doubled grid: corners (all even), cell centres
            // (all odd) and, in 3D, face centres (exactly two odd)
            let m = [2 * n[0] + 1, 2 * n[1] + 1, if d == 3 { 2 * n[2] + 1 } else { 1 }];
            let mut index = vec![usize::MAX; m[0] * m[1] * m[2]];
            let key = |i: usize, j: usize, k: usize| i + m[0] * (j + m[1] * k);
            for k in 0..m[2] {
                for j in 0..m[1] {
                    for i in 0..m[0] {
                        let odd = (i % 2) + (j % 2) + (k % 2);
                        let keep = if d == 2 { odd == 0 || odd == 2 } else { odd != 1 };
                        if keep {
                            index[key(i, j, k)] = vertices.len();
                            let z = if d == 3 { coord(lo[2], hi[2], k, 2 * n[2]) } else { 0.0 };
                            vertices.push([
                                coord(lo[0], hi[0], i, 2 * n[0]),
                                coord(lo[1], hi[1], j, 2 * n[1]),
                                z,
                            ]);
                        }
                    }
                }
            }
            let at = |i: usize, j: usize, k: usize| index[key(i, j, k)];
            if d == 2 {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        let (x, y) = (2 * i, 2 * j);
                        let c = at(x + 1, y + 1, 0);
                        let ring = [at(x, y, 0), at(x + 2, y, 0), at(x + 2, y + 2, 0), at(x, y + 2, 0)];
                        for r in 0..4 {
                            cells.push([ring[r], ring[(r + 1) % 4], c, 0]);
                        }
                    }
                }
            } else {
                for k in 0..n[2] {
                    for j in 0..n[1] {
                        for i in 0..n[0] {
                            let o = [2 * i, 2 * j, 2 * k];
                            let body = at(o[0] + 1, o[1] + 1, o[2] + 1);
                            for axis in 0..3 {
                                let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
                                for side in [0usize, 2] {
                                    let pt = |du: usize, dw: usize| {
                                        let mut p = o;
                                        p[axis] += side;
                                        p[u] += du;
                                        p[w] += dw;
                                        at(p[0], p[1], p[2])
                                    };
                                    let fc = pt(1, 1);
                                    let ring = [pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2)];
                                    for r in 0..4 {
                                        cells.push([body, fc, ring[r], ring[(r + 1) % 4]]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    fix_orientation(d, &vertices, &mut cells);
    (vertices, cells)
}

/// Quarter disk in the quadrant with the given signs. Ring `m` (radius
/// `R m / n`) carries `m + 1` equally spaced points.
fn polar_quadrant(radius: f64, signs: [i8; 2], n: usize) -> Raw {
    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    for m in 0..=n {
        for j in 0..=m {
            let i = m - j;
            let p = if m == 0 {
                [0.0, 0.0, 0.0]
            } else {
                let r = if m == n { radius } else { radius * (m as f64 / n as f64) };
                let theta = std::f64::consts::FRAC_PI_2 * (j as f64 / m as f64);
                let x = if i == 0 { 0.0 } else if j == 0 { r } else { r * theta.cos() };
                let y = if j == 0 { 0.0 } else if i == 0 { r } else { r * theta.sin() };
                [x * signs[0] as f64 + 0.0, y * signs[1] as f64 + 0.0, 0.0]
            };
            index.insert((i, j), vertices.len());
            vertices.push(p);
        }
    }
    let mut cells = Vec::new();
    for m in 0..n {
        for j in 0..=m {
            let i = m - j;
            cells.push([index[&(i, j)], index[&(i + 1, j)], index[&(i, j + 1)], 0]);
            if m + 2 <= n {
                cells.push([index[&(i + 1, j)], index[&(i + 1, j + 1)], index[&(i, j + 1)], 0]);
            }
        }
    }
    fix_orientation(2, &vertices, &mut cells);
    (vertices, cells)
}

/// Convex polytope whose faces are all perpendicular to an axis or to a
/// difference `e_i - e_j`, with vertices on a lattice of spacing `unit`. Its
/// Kuhn triangulation conforms to every face, and per-axis coordinate maps
/// that agree across the diagonal faces keep it conforming.
struct Lattice<'a> {
    domain: &'a DomainSpec,
    unit: f64,
    lo: [f64; 3],
    units: [usize; 3],
    /// Per axis and unit interval: grade towards its lower / upper end.
    grade: Vec<Vec<[bool; 2]>>,
    exponent: f64,
}

impl<'a> Lattice<'a> {
    fn detect(domain: &'a DomainSpec, exponent: f64) -> Option<Self> {
        let DomainKind::Polytope { vertices, faces } = &domain.kind else { return None };
        let d = domain.dim;
        if d < 2 || !domain.is_convex() {
            return None;
        }
        let mut diagonals = Vec::new();
        for f in faces {
            let nz: Vec<usize> = (0..d).filter(|&i| f.normal[i].abs() > 1e-12).collect();
            match nz.len() {
                1 => {}
                2 if (f.normal[nz[0]] + f.normal[nz[1]]).abs() < 1e-12 => {
                    // x_i - x_j = c
                    diagonals.push((nz[0], nz[1], f.offset / f.normal[nz[0]]));
                }
                _ => return None,
            }
        }
        let on_lattice = |u: f64| {
            vertices.iter().all(|v| (0..d).all(|i| ((v[i] / u) - (v[i] / u).round()).abs() < 1e-9))
        };
        let scale = domain.diameter();
        let unit = (1..=12).map(|m| scale / m as f64).chain((1..=12).map(|m| 1.0 / m as f64)).find(|&u| on_lattice(u))?;
        let mut lo = [0.0; 3];
        let mut units = [0usize; 3];
        for i in 0..d {
            let min = vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
            let max = vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
            lo[i] = min;
            units[i] = ((max - min) / unit).round() as usize;
        }
        let mut grade: Vec<Vec<[bool; 2]>> = (0..d).map(|i| vec![[false; 2]; units[i]]).collect();
        if exponent > 1.0 {
            // obtuse edges: outward normals of adjacent faces at an acute angle
            for (a, fa) in faces.iter().enumerate() {
                for fb in &faces[a + 1..] {
                    let shared: Vec<usize> =
                        fa.vertices.iter().copied().filter(|v| fb.vertices.contains(v)).collect();
                    if shared.len() < d - 1 || linalg::dot(fa.normal, fb.normal) <= 1e-9 {
                        continue;
                    }
                    for i in 0..d {
                        let x = vertices[shared[0]][i];
                        if shared.iter().any(|&v| (vertices[v][i] - x).abs() > 1e-12) {
                            continue;
                        }
                        let k = ((x - lo[i]) / unit).round() as usize;
                        if k > 0 {
                            grade[i][k - 1][1] = true;
                        }
                        if k < units[i] {
                            grade[i][k][0] = true;
                        }
                    }
                }
            }
            // the maps of axes i and j must agree on x_i - x_j = c
            loop {
                let mut changed = false;
                for &(i, j, c) in &diagonals {
                    let shift = ((lo[j] + c - lo[i]) / unit).round() as isize;
                    for a in 0..units[j] {
                        let b = a as isize + shift;
                        if b < 0 || b >= units[i] as isize {
                            continue;
                        }
                        let b = b as usize;
                        for s in 0..2 {
                            let m = grade[i][b][s] || grade[j][a][s];
                            changed |= m != grade[i][b][s] || m != grade[j][a][s];
                            grade[i][b][s] = m;
                            grade[j][a][s] = m;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        Some(Lattice { domain, unit, lo, units, grade, exponent })
    }

    /// Position within a unit interval, `t` in `[0, 1]`.
    fn warp(&self, t: f64, flags: [bool; 2]) -> f64 {
        let p = self.exponent;
        let r = GRADING_REACH;
        // C1 join of a * t^p on [0, r] with a line through (1, 1)
        let slope = 1.0 / (1.0 - r * (1.0 - 1.0 / p));
        let one_sided = |t: f64| {
            if t < r {
                slope * r / p * (t / r).powf(p)
            } else {
                1.0 - slope * (1.0 - t)
            }
        };
        match flags {
            [false, false] => t,
            [true, false] => one_sided(t),
            [false, true] => 1.0 - one_sided(1.0 - t),
            [true, true] => {
                if t <= 0.5 {
                    0.5 * one_sided(2.0 * t)
                } else {
                    1.0 - 0.5 * one_sided(2.0 - 2.0 * t)
                }
            }
        }
    }

    fn coords(&self, axis: usize, n: usize) -> Vec<f64> {
        let total = self.units[axis] * n;
        (0..=total)
            .map(|k| {
                let a = (k / n).min(self.units[axis] - 1);
                let t = (k - a * n) as f64 / n as f64;
                self.lo[axis] + self.unit * (a as f64 + self.warp(t, self.grade[axis][a]))
            })
            .collect()
    }

    fn mesh(&self, target: f64, scale: usize) -> Raw {
        let d = self.domain.dim;
        let mut n = (self.unit * (d as f64).sqrt() / (1.5 * target)).ceil().max(1.0) as usize;
        loop {
            let h = (0..d)
                .map(|i| {
                    let c = self.coords(i, n);
                    c.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            if h <= 1.5 * target {
                break;
            }
            n += 1;
        }
        self.build(n * scale)
    }

    fn build(&self, n: usize) -> Raw {
        let d = self.domain.dim;
        let DomainKind::Polytope { faces, .. } = &self.domain.kind else { unreachable!() };
        let xs: Vec<Vec<f64>> = (0..d).map(|i| self.coords(i, n)).collect();
        let m: Vec<usize> = (0..3).map(|i| if i < d { self.units[i] * n + 1 } else { 1 }).collect();
        let key = |p: [usize; 3]| p[0] + m[0] * (p[1] + m[1] * p[2]);
        let step = self.unit / n as f64;
        let inside = |c: Vec3| faces.iter().all(|f| linalg::dot(f.normal, c) < f.offset);
        let perms: &[&[usize]] = if d == 2 {
            &[&[0, 1], &[1, 0]]
        } else {
            &[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2], &[1, 2, 0], &[2, 0, 1], &[2, 1, 0]]
        };
        let mut index = vec![usize::MAX; m[0] * m[1] * m[2]];
        let mut vertices = Vec::new();
        let mut cells = Vec::new();
        for k in 0..m[2].saturating_sub(1).max(1) {
            for j in 0..m[1] - 1 {
                for i in 0..m[0] - 1 {
                    for p in perms {
                        let mut cur = [i, j, if d == 3 { k } else { 0 }];
                        let mut pts = vec![cur];
                        for &axis in p.iter() {
                            cur[axis] += 1;
                            pts.push(cur);
                        }
                        // membership is decided on the uniform lattice
                        let mut c = [0.0; 3];
                        for q in &pts {
                            for a in 0..d {
                                c[a] += (self.lo[a] + q[a] as f64 * step) / (d + 1) as f64;
                            }
                        }
                        if !inside(c) {
                            continue;
                        }
                        let mut cell = [0usize; 4];
                        for (s, q) in pts.iter().enumerate() {
                            let slot = &mut index[key(*q)];
                            if *slot == usize::MAX {
                                *slot = vertices.len();
                                let mut x = [0.0; 3];
                                for a in 0..d {
                                    x[a] = xs[a][q[a]];
                                }
                                vertices.push(x);
                            }
                            cell[s] = *slot;
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        fix_orientation(d, &vertices, &mut cells);
        (vertices, cells)
    }
}

/// Coarse simplicial decomposition of a polytope: a cone from the vertex
/// average over the (fanned) faces, or ear clipping for non-convex polygons.
fn coarse_simplices(
    domain: &DomainSpec,
    vertices: &[Vec3],
    faces: &[crate::geometry::PolyFace],
) -> Result<Raw> {
    let d = domain.dim;
    let center = linalg::centroid(vertices);
    let star = faces
        .iter()
        .all(|f| f.offset - linalg::dot(f.normal, center) > 1e-9 * domain.diameter());
    let mut pts = vertices.to_vec();
    let mut cells = Vec::new();
    match d {
        1 => {
            cells.push([0, 1, 0, 0]);
        }
        2 => {
            if star {
                let c = pts.len();
                pts.push(center);
                for f in faces {
                    cells.push([f.vertices[0], f.vertices[1], c, 0]);
                }
            } else {
                cells = ear_clip(vertices, faces)?;
            }
        }
        _ => {
            if !star {
                return Err(Error::UnsupportedDomain(format!(
                    "{} is not star-shaped with respect to its vertex average; no mesher applies, import a mesh file instead",
                    domain.name
                )));
            }
            let c = pts.len();
            pts.push(center);
            for f in faces {
                if f.vertices.len() == 3 {
                    cells.push([c, f.vertices[0], f.vertices[1], f.vertices[2]]);
                } else {
                    let fc = pts.len();
                    let fp: Vec<Vec3> = f.vertices.iter().map(|&v| vertices[v]).collect();
                    pts.push(linalg::centroid(&fp));
                    let k = f.vertices.len();
                    for i in 0..k {
                        cells.push([c, fc, f.vertices[i], f.vertices[(i + 1) % k]]);
                    }
                }
            }
        }
    }
    fix_orientation(d, &pts, &mut cells);
    for (i, c) in cells.iter().enumerate() {
        let p: Vec<Vec3> = c[..=d].iter().map(|&v| pts[v]).collect();
        if !(linalg::simplex_volume(d, &p) > 0.0) {
            return Err(Error::UnsupportedDomain(format!(
                "coarse decomposition produced a degenerate simplex ({i}); import a mesh file instead"
            )));
        }
    }
    Ok((pts, cells))
}

fn ear_clip(vertices: &[Vec3], faces: &[crate::geometry::PolyFace]) -> Result<Vec<[usize; 4]>> {
    let next: HashMap<usize, usize> = faces.iter().map(|f| (f.vertices[0], f.vertices[1])).collect();
    let mut poly = vec![faces[0].vertices[0]];
    while poly.len() < faces.len() {
        let v = next[poly.last().unwrap()];
        poly.push(v);
    }
    let cross = |a: Vec3, b: Vec3, c: Vec3| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut cells = Vec::new();
    while poly.len() > 3 {
        let k = poly.len();
        let mut clipped = false;
        for i in 0..k {
            let (a, b, c) = (poly[(i + k - 1) % k], poly[i], poly[(i + 1) % k]);
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            if cross(pa, pb, pc) <= 0.0 {
                continue;
            }
            let blocked = poly.iter().any(|&q| {
                if q == a || q == b || q == c {
                    return false;
                }
                let p = vertices[q];
                cross(pa, pb, p) >= 0.0 && cross(pb, pc, p) >= 0.0 && cross(pc, pa, p) >= 0.0
            });
            if !blocked {
                cells.push([a, b, c, 0]);
                poly.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::UnsupportedDomain("polygon could not be triangulated".into()));
        }
    }
    cells.push([poly[0], poly[1], poly[2], 0]);
    Ok(cells)
}

/// Edgewise (Freudenthal) subdivision of every coarse simplex into `n^d`
/// similar pieces. Coarse vertices are ordered by global index, so
/// neighbouring simplices induce the same subdivision on shared faces.
fn freudenthal(d: usize, coarse: &[Vec3], cells: &[[usize; 4]], n: usize) -> Raw {
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut out = Vec::new();
    let perms: Vec<Vec<usize>> = match d {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
    };
    let valid = |x: &[usize]| {
        x[0] <= n && x.windows(2).all(|w| w[0] >= w[1])
    };
    let mut bases = Vec::new();
    let mut a = vec![0usize; d];
    loop {
        bases.push(a.clone());
        let mut i = 0;
        loop {
            if i == d {
                break;
            }
            a[i] += 1;
            if a[i] < n {
                break;
            }
            a[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    for c in cells {
        let mut ids: Vec<usize> = c[..=d].to_vec();
        ids.sort_unstable();
        let mut point_id = |x: &[usize], vertices: &mut Vec<Vec3>| -> usize {
            // barycentric weights w_0 = n - x_1, w_k = x_k - x_{k+1}, w_d = x_d
            let mut key = Vec::with_capacity(d + 1);
            for k in 0..=d {
                let w = if k == 0 {
                    n - x[0]
                } else if k == d {
                    x[d - 1]
                } else {
                    x[k - 1] - x[k]
                };
                if w > 0 {
                    key.push((ids[k], w));
                }
            }
            if let Some(&i) = index.get(&key) {
                return i;
            }
            let mut p = [0.0; 3];
            for &(v, w) in &key {
                if w == n {
                    p = coarse[v];
                    break;
                }
                p = linalg::add(p, linalg::scale(coarse[v], w as f64 / n as f64));
            }
            let i = vertices.len();
            vertices.push(p);
            index.insert(key, i);
            i
        };
        for base in &bases {
            for p in &perms {
                let mut x = base.clone();
                let mut simplex = [0usize; 4];
                let mut ok = valid(&x);
                let mut pts = vec![x.clone()];
                for &axis in p {
                    x[axis] += 1;
                    ok &= valid(&x);
                    pts.push(x.clone());
                }
                if !ok {
                    continue;
                }
                for (s, q) in pts.iter().enumerate() {
                    simplex[s] = point_id(q, &mut vertices);
                }
                out.push(simplex);
            }
        }
    }
    fix_orientation(d, &vertices, &mut out);
    (vertices, out)
}

/// Mirrors a raw mesh across `{x_axis = 0}`. Vertices with that coordinate
/// exactly zero are shared. Returns the origin `(source, mirrored)` of each
/// vertex.
pub(crate) fn reflect_raw(
    dim: usize,
    vertices: &[Vec3],
    cells: &[[usize; 4]],
    axis: usize,
) -> (Vec<Vec3>, Vec<[usize; 4]>, Vec<(usize, bool)>) {
    let mut out_v = vertices.to_vec();
    let mut origin: Vec<(usize, bool)> = (0..vertices.len()).map(|v| (v, false)).collect();
    let mut image = vec![0usize; vertices.len()];
    for (i, v) in vertices.iter().enumerate() {
        if v[axis] == 0.0 {
            image[i] = i;
        } else {
            let mut r = *v;
            r[axis] = -r[axis];
            image[i] = out_v.len();
            out_v.push(r);
            origin.push((i, true));
        }
    }
    let mut out_c = cells.to_vec();
    for c in cells {
        let mut m = *c;
        for k in 0..=dim {
            m[k] = image[c[k]];
        }
        m.swap(0, 1);
        out_c.push(m);
    }
    (out_v, out_c, origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, Builtin};

    #[test]
    fn kuhn_unit_square_quarter() {
        let d = builtin_domain(&Builtin::Rectangle { a: 1.0, b: 1.0, centered: false }).unwrap();
        let opts = MeshOptions { box_pattern: BoxPattern::Kuhn, ..MeshOptions::new(0.25) };
        let m = generate_mesh_with(&d, &opts).unwrap();
        assert_eq!(m.num_cells(), 32);
        assert!((m.h - 0.25 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn freudenthal_counts() {
        let coarse = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let (v, c) = freudenthal(3, &coarse, &[[0, 1, 2, 3]], 3);
        assert_eq!(c.len(), 27);
        assert_eq!(v.len(), 20);
        let vol: f64 = c
            .iter()
            .map(|t| linalg::simplex_volume(3, &t.iter().map(|&i| v[i]).collect::<Vec<_>>()))
            .sum();
        assert!((vol - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn polar_sector_on_circle() {
        let (v, c) = polar_quadrant(2.0, [1, -1], 5);
        assert_eq!(c.len(), 25);
        for p in &v {
            assert!(p[0] >= 0.0 && p[1] <= 0.0);
        }
    }
}
