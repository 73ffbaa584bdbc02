use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::Mesh;

/// Margins below this fraction of the oscillation count as ties.
pub const HOT_SPOT_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum {
    pub vertex: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub on_boundary: bool,
    /// Distance to the nearest boundary vertex (zero on the boundary).
    pub distance_to_boundary: f64,
    /// `(boundary extremum - interior extremum) / oscillation`, oriented so
    /// that positive means the boundary wins; `None` without interior
    /// vertices.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotSpotsVerdict {
    pub max: Extremum,
    pub min: Extremum,
    pub oscillation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

/// Locates the extreme vertex values of an eigenfunction and checks that
/// both are attained on the boundary, strictly above every interior value.
pub fn check_hot_spots(mesh: &Mesh, values: &[f64], eigenvalue: f64) -> Result<HotSpotsVerdict> {
    if !(eigenvalue > 1e-8) {
        return Err(Error::Precondition(format!(
            "hot spots are defined for non-constant eigenfunctions (eigenvalue {eigenvalue:e})"
        )));
    }
    if values.len() != mesh.num_vertices() {
        return Err(Error::InvalidInput("one value per vertex expected".into()));
    }
    let boundary = mesh.boundary_vertex_mask();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let osc = hi - lo;
    let mut ties = false;
    let mut extremum = |sign: f64| -> Extremum {
        // prefer boundary vertices among equal values
        let key = |v: usize| (sign * values[v], boundary[v]);
        let best = (0..values.len())
            .max_by(|&a, &b| {
                let (ka, kb) = (key(a), key(b));
                ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(b.cmp(&a))
            })
            .unwrap_or(0);
        let interior = (0..values.len()).filter(|&v| !boundary[v]).map(|v| sign * values[v]).fold(f64::NEG_INFINITY, f64::max);
        let bnd = (0..values.len()).filter(|&v| boundary[v]).map(|v| sign * values[v]).fold(f64::NEG_INFINITY, f64::max);
        let margin = interior.is_finite().then(|| if osc > 0.0 { (bnd - interior) / osc } else { 0.0 });
        if let Some(m) = margin {
            if m < HOT_SPOT_MARGIN && m >= -4.0 * f64::EPSILON {
                ties = true;
            }
        }
        let p = mesh.vertices[best];
        let distance_to_boundary = if boundary[best] {
            0.0
        } else {
            (0..values.len())
                .filter(|&v| boundary[v])
                .map(|v| linalg::dist(p, mesh.vertices[v]))
                .fold(f64::INFINITY, f64::min)
        };
        Extremum {
            vertex: best,
            point: p[..mesh.dim].to_vec(),
            value: values[best],
            on_boundary: boundary[best],
            distance_to_boundary,
            margin,
        }
    };
    let max = extremum(1.0);
    let min = extremum(-1.0);
    let strict = |e: &Extremum| e.on_boundary && e.margin.map_or(true, |m| m >= HOT_SPOT_MARGIN);
    let tied = |e: &Extremum| e.on_boundary && e.margin.is_some_and(|m| m >= -4.0 * f64::EPSILON);
    let pass = (strict(&max) || tied(&max)) && (strict(&min) || tied(&min));
    let note = (pass && ties).then(|| "interior and boundary extrema agree to machine precision".to_string());
    Ok(HotSpotsVerdict { max, min, oscillation: osc, tolerance: HOT_SPOT_MARGIN, pass, note })
}
