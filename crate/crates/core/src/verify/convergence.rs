use serde::Serialize;

use crate::eigensolve::EigOptions;
use crate::error::{Error, Result};
use crate::fem_scalar::{assemble_scalar_with, solve_scalar_spectrum};
use crate::fem_vector::{assemble_vector_with, solve_vector_spectrum};
use crate::geometry::DomainSpec;
use crate::mesh::{generate_mesh_with, MeshOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// First nonzero scalar eigenvalue (the first one under mixed data).
    ScalarMu2,
    /// Smallest eigenvalue of the vector operator.
    VectorEta1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub scale: usize,
    pub h: f64,
    pub vertices: usize,
    pub value: f64,
    pub error: Option<f64>,
    /// `log2(e(h_prev) / e(h))` against the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub quantity: Quantity,
    pub oracle: Option<f64>,
    /// Richardson extrapolation from the last three levels, used as the
    /// reference when no oracle is given.
    pub extrapolated: Option<f64>,
    pub rows: Vec<StudyRow>,
}

impl ConvergenceStudy {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }
}

/// Computes the quantity on nested meshes at scales `1, 2, 4, ...` of the
/// resolution chosen for `target_h`.
pub fn convergence_study(
    domain: &DomainSpec,
    quantity: Quantity,
    mesh: &MeshOptions,
    levels: usize,
    eig: &EigOptions,
    oracle: Option<f64>,
) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::InvalidInput(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    let mut rows = Vec::with_capacity(levels);
    for l in 0..levels {
        let scale = mesh.scale << l;
        let m = generate_mesh_with(domain, &MeshOptions { scale, ..*mesh })?;
        let value = match quantity {
            Quantity::ScalarMu2 => {
                let sys = assemble_scalar_with(&m, eig.exec)?;
                let k = if sys.has_dirichlet() { 1 } else { 2 };
                let spec = solve_scalar_spectrum(&m, &sys, &EigOptions { k: k.max(eig.k.min(sys.num_dofs())), ..*eig })?;
                spec[k - 1].eigenvalue
            }
            Quantity::VectorEta1 => {
                let sys = assemble_vector_with(&m, eig.exec)?;
                let spec = solve_vector_spectrum(&sys, &EigOptions { k: eig.k.clamp(1, sys.num_dofs()), ..*eig })?;
                spec[0].eigenvalue
            }
        };
        rows.push(StudyRow { scale, h: m.h, vertices: m.num_vertices(), value, error: None, order: None });
    }
    let n = rows.len();
    let (v1, v2, v3) = (rows[n - 3].value, rows[n - 2].value, rows[n - 1].value);
    let ratio = (v1 - v2) / (v2 - v3);
    let extrapolated = (ratio.is_finite() && ratio > 1.0).then(|| v3 - (v2 - v3) / (ratio - 1.0));
    let reference = oracle.or(extrapolated);
    if let Some(r) = reference {
        for i in 0..n {
            rows[i].error = Some((rows[i].value - r).abs());
            if i > 0 {
                let (a, b) = (rows[i - 1].error.unwrap(), rows[i].error.unwrap());
                if a > 0.0 && b > 0.0 {
                    rows[i].order = Some((a / b).log2() / (rows[i - 1].h / rows[i].h).log2());
                }
            }
        }
    }
    Ok(ConvergenceStudy { quantity, oracle, extrapolated, rows })
}
