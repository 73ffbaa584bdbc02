use serde::Serialize;

use crate::fem_scalar::recovered_gradient;
use crate::linalg::Vec3;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
    Zero,
    Mixed,
}

impl Direction {
    fn flipped(self) -> Self {
        match self {
            Direction::Positive => Direction::Negative,
            Direction::Negative => Direction::Positive,
            d => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionVerdict {
    /// 1-based coordinate index.
    pub axis: usize,
    pub direction: Direction,
    /// `min(s·g_i) / max|g_i|` for the sign `s` of the verdict (the better
    /// of the two signs when mixed); for zero directions `max|g_i| / max|g|`.
    pub margin: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrichotomyVerdict {
    pub directions: Vec<DirectionVerdict>,
    pub sign_tol: f64,
    pub zero_tol: f64,
    /// Whether the global sign was flipped during normalization.
    pub sign_flipped: bool,
}

impl TrichotomyVerdict {
    pub fn has_mixed(&self) -> bool {
        self.directions.iter().any(|d| d.direction == Direction::Mixed)
    }

    /// Smallest margin over the directions that are not zero; `None` when
    /// every direction is zero.
    pub fn worst_margin(&self) -> Option<f64> {
        self.directions
            .iter()
            .filter(|d| d.direction != Direction::Zero)
            .map(|d| d.margin)
            .reduce(f64::min)
    }

    pub fn pattern(&self) -> Vec<Direction> {
        self.directions.iter().map(|d| d.direction).collect()
    }
}

/// Sign classification of each component of a sampled vector field (cell
/// gradients of a scalar eigenfunction, or nodal values of an eigenfield).
/// When `normalize` is set the global sign is flipped so that the
/// sign-definite direction of largest magnitude is positive.
pub fn check_trichotomy(dim: usize, samples: &[Vec3], sign_tol: f64, zero_tol: f64, normalize: bool) -> TrichotomyVerdict {
    let norm_max = samples
        .iter()
        .map(|g| g[..dim].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut directions: Vec<DirectionVerdict> = (0..dim)
        .map(|i| {
            let max_abs = samples.iter().map(|g| g[i].abs()).fold(0.0, f64::max);
            if max_abs <= zero_tol * norm_max || max_abs == 0.0 {
                let margin = if norm_max > 0.0 { max_abs / norm_max } else { 0.0 };
                return DirectionVerdict { axis: i + 1, direction: Direction::Zero, margin, max_abs };
            }
            let lo = samples.iter().map(|g| g[i]).fold(f64::INFINITY, f64::min) / max_abs;
            let hi = samples.iter().map(|g| g[i]).fold(f64::NEG_INFINITY, f64::max) / max_abs;
            let (pos, neg) = (lo, -hi);
            let (direction, margin) = if pos >= -sign_tol && pos >= neg {
                (Direction::Positive, pos)
            } else if neg >= -sign_tol {
                (Direction::Negative, neg)
            } else {
                (Direction::Mixed, pos.max(neg))
            };
            DirectionVerdict { axis: i + 1, direction, margin, max_abs }
        })
        .collect();
    let mut sign_flipped = false;
    if normalize {
        let lead = directions
            .iter()
            .filter(|d| matches!(d.direction, Direction::Positive | Direction::Negative))
            .max_by(|a, b| a.max_abs.total_cmp(&b.max_abs));
        if lead.is_some_and(|d| d.direction == Direction::Negative) {
            sign_flipped = true;
            for d in &mut directions {
                d.direction = d.direction.flipped();
            }
        }
    }
    TrichotomyVerdict { directions, sign_tol, zero_tol, sign_flipped }
}

/// Recovered (patch-averaged) gradient at the interior vertices, the samples
/// the scalar trichotomy is judged on.
pub fn interior_gradients(mesh: &Mesh, cell_gradients: &[Vec3]) -> Vec<Vec3> {
    let boundary = mesh.boundary_vertex_mask();
    recovered_gradient(mesh, cell_gradients)
        .into_iter()
        .zip(boundary)
        .filter(|(_, b)| !b)
        .map(|(g, _)| g)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_zero() {
        let s = vec![[-1.0, 0.0, 0.0], [-0.5, 1e-9, 0.0], [-2.0, -1e-9, 0.0]];
        let v = check_trichotomy(2, &s, 5e-3, 1e-6, true);
        assert_eq!(v.pattern(), vec![Direction::Positive, Direction::Zero]);
        assert!(v.sign_flipped);
        let m = check_trichotomy(1, &[[1.0, 0.0, 0.0], [-0.5, 0.0, 0.0]], 5e-3, 1e-6, true);
        assert_eq!(m.pattern(), vec![Direction::Mixed]);
        assert!((m.directions[0].margin + 0.5).abs() < 1e-15);
    }
}
