//! Closed-form reference spectra: boxes by separation of variables, the disk
//! through Bessel zeros, and the Maxwell cavity of a box.

use std::f64::consts::PI;

/// `J_n(x)` by its power series; accurate to a few ulp for `x <= 25`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    let q = -half * half;
    for k in 1..200u32 {
        term *= q / (f64::from(k) * f64::from(k + n));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`, with `J_0' = -J_1`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

fn nth_root(f: impl Fn(f64) -> f64, k: usize) -> f64 {
    let step = 1e-2;
    let mut a = step;
    let mut fa = f(a);
    let mut found = 0;
    loop {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == k {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 4.0 * f64::EPSILON * hi {
                        break;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

/// `k`-th positive zero of `J_n` (`k >= 1`).
pub fn bessel_zero(n: u32, k: usize) -> f64 {
    nth_root(|x| bessel_j(n, x), k)
}

/// `k`-th positive zero of `J_n'` (`k >= 1`); for `n = 0` the trivial zero at
/// the origin is not counted.
pub fn bessel_prime_zero(n: u32, k: usize) -> f64 {
    nth_root(|x| bessel_j_prime(n, x), k)
}

/// Neumann eigenvalues of the box with the given side lengths, ascending and
/// with multiplicity, up to `max_value`.
pub fn box_neumann(sides: &[f64], max_value: f64) -> Vec<f64> {
    box_modes(sides, max_value, |_| true)
}

/// Dirichlet eigenvalues of a box.
pub fn box_dirichlet(sides: &[f64], max_value: f64) -> Vec<f64> {
    box_modes(sides, max_value, |idx| idx.iter().all(|&i| i >= 1))
}

/// Eigenvalues of curl curl with perfectly conducting walls on a 3D box:
/// `π²(l²/a² + m²/b² + n²/c²)` with at least two nonzero indices; two
/// polarizations when all three are nonzero.
pub fn box_maxwell(sides: [f64; 3], max_value: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for (v, idx) in modes(&sides, max_value) {
        let nonzero = idx.iter().filter(|&&i| i > 0).count();
        match nonzero {
            2 => out.push(v),
            3 => {
                out.push(v);
                out.push(v);
            }
            _ => {}
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn modes(sides: &[f64], max_value: f64) -> Vec<(f64, Vec<usize>)> {
    let d = sides.len();
    let bound: Vec<usize> = sides
        .iter()
        .map(|s| (max_value.max(0.0).sqrt() * s / PI).floor() as usize + 1)
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let v: f64 = idx.iter().zip(sides).map(|(&i, s)| (i as f64 * PI / s).powi(2)).sum();
        if v <= max_value {
            out.push((v, idx.clone()));
        }
        let mut a = 0;
        loop {
            if a == d {
                return out;
            }
            idx[a] += 1;
            if idx[a] <= bound[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn box_modes(sides: &[f64], max_value: f64, keep: impl Fn(&[usize]) -> bool) -> Vec<f64> {
    let mut out: Vec<f64> = modes(sides, max_value)
        .into_iter()
        .filter(|(_, idx)| keep(idx))
        .map(|(v, _)| v)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Neumann eigenvalues of the disk of radius `r` up to `max_value`, with
/// multiplicity (two for every angular order `n >= 1`).
pub fn disk_neumann(r: f64, max_value: f64) -> Vec<f64> {
    disk_modes(r, max_value, true)
}

pub fn disk_dirichlet(r: f64, max_value: f64) -> Vec<f64> {
    disk_modes(r, max_value, false)
}

fn disk_modes(r: f64, max_value: f64, neumann: bool) -> Vec<f64> {
    let mut out = Vec::new();
    if neumann {
        out.push(0.0);
    }
    // the first zero of J_n and of J_n' (n >= 1) exceeds n
    let top = (max_value.max(0.0).sqrt() * r).floor() as u32 + 1;
    for n in 0..=top {
        for k in 1.. {
            let z = if neumann { bessel_prime_zero(n, k) } else { bessel_zero(n, k) };
            let v = (z / r).powi(2);
            if v > max_value {
                break;
            }
            out.push(v);
            if n > 0 {
                out.push(v);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_zeros() {
        assert!((bessel_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((bessel_prime_zero(1, 1) - 1.841_183_781_340_659_3).abs() < 1e-12);
        assert!((bessel_zero(1, 1) - 3.831_705_970_207_512).abs() < 1e-12);
    }

    #[test]
    fn square_multiplicities() {
        let v = box_neumann(&[1.0, 1.0], 2.5 * PI * PI);
        assert_eq!(v.len(), 4);
        assert_eq!(v[1], v[2]);
        let m = box_maxwell([1.0, 1.0, 1.0], 3.5 * PI * PI);
        assert_eq!(m.len(), 5);
        let d = disk_neumann(1.0, 10.0);
        assert_eq!(d.len(), 5);
        assert!((d[1] - 1.841_183_781_340_659_3f64.powi(2)).abs() < 1e-10);
    }
}
