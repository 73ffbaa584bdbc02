//! Fixed-size vector helpers. Points are stored as `[f64; 3]`; two-dimensional
//! data keeps the third component at zero.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO3: Mat3 = [[0.0; 3]; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n == 0.0 {
        a
    } else {
        scale(a, 1.0 / n)
    }
}

pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// `I - n n^T` restricted to the first `dim` coordinates.
pub fn tangential_projector(n: Vec3, dim: usize) -> Mat3 {
    let mut p = ZERO3;
    for i in 0..dim {
        for j in 0..dim {
            p[i][j] = if i == j { 1.0 } else { 0.0 } - n[i] * n[j];
        }
    }
    p
}

pub fn mat_scale(m: &Mat3, s: f64) -> Mat3 {
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

/// Signed volume of a simplex given by `dim + 1` points (area in 2D).
pub fn simplex_volume(dim: usize, p: &[Vec3]) -> f64 {
    match dim {
        1 => p[1][0] - p[0][0],
        2 => {
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        3 => {
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            let c = sub(p[3], p[0]);
            dot(a, cross(b, c)) / 6.0
        }
        _ => panic!("unsupported simplex dimension {dim}"),
    }
}

/// Gradients of the barycentric coordinates of a simplex together with its
/// (unsigned) volume.
pub fn barycentric_gradients(dim: usize, p: &[Vec3]) -> ([Vec3; 4], f64) {
    let mut grads = [[0.0; 3]; 4];
    match dim {
        1 => {
            let len = p[1][0] - p[0][0];
            grads[1] = [1.0 / len, 0.0, 0.0];
            grads[0] = [-1.0 / len, 0.0, 0.0];
            (grads, len.abs())
        }
        2 => {
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            let det = a[0] * b[1] - a[1] * b[0];
            // Rows of J^{-T} for J = [a b].
            grads[1] = [b[1] / det, -b[0] / det, 0.0];
            grads[2] = [-a[1] / det, a[0] / det, 0.0];
            grads[0] = [-grads[1][0] - grads[2][0], -grads[1][1] - grads[2][1], 0.0];
            (grads, 0.5 * det.abs())
        }
        3 => {
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            let c = sub(p[3], p[0]);
            let det = dot(a, cross(b, c));
            grads[1] = scale(cross(b, c), 1.0 / det);
            grads[2] = scale(cross(c, a), 1.0 / det);
            grads[3] = scale(cross(a, b), 1.0 / det);
            grads[0] = scale(add(add(grads[1], grads[2]), grads[3]), -1.0);
            (grads, det.abs() / 6.0)
        }
        _ => panic!("unsupported simplex dimension {dim}"),
    }
}

/// Measure of a (dim-1)-simplex embedded in `dim` space (length or area).
pub fn facet_measure(dim: usize, p: &[Vec3]) -> f64 {
    match dim {
        1 => 1.0,
        2 => dist(p[0], p[1]),
        3 => 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0]))),
        _ => panic!("unsupported facet dimension {dim}"),
    }
}

pub fn centroid(p: &[Vec3]) -> Vec3 {
    let mut c = [0.0; 3];
    for q in p {
        c = add(c, *q);
    }
    scale(c, 1.0 / p.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_gradients_sum_to_zero() {
        let p = [[0.1, 0.2, 0.0], [1.3, 0.1, 0.2], [0.2, 0.9, 0.4], [0.3, 0.3, 1.1]];
        let (g, vol) = barycentric_gradients(3, &p);
        let s = add(add(g[0], g[1]), add(g[2], g[3]));
        assert!(norm(s) < 1e-14);
        assert!((vol - simplex_volume(3, &p).abs()).abs() < 1e-15);
        // grad(lambda_i) . (p_j - p_0) = delta_ij for j >= 1
        for i in 1..4 {
            for j in 1..4 {
                let v = dot(g[i], sub(p[j], p[0]));
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }
}
