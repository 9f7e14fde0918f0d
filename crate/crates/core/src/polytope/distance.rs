//! Euclidean distance from a point to the convex hull of a finite point set,
//! by Wolfe's minimum-norm-point algorithm.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{solve, Mat};
use crate::vector::{Vector, MAX_DIM};

pub(crate) fn point_to_hull(p: &Vector, hull: &[Vector]) -> f64 {
    let pts: Vec<Vector> = hull.iter().map(|v| *v - *p).collect();
    min_norm_point(&pts).norm()
}

/// Point of minimum norm in `conv(pts)`.
pub(crate) fn min_norm_point(pts: &[Vector]) -> Vector {
    let scale = pts.iter().fold(1e-300f64, |s, v| s.max(v.dot(v)));
    let tol = 1e-14 * scale;
    let start = (0..pts.len())
        .min_by(|&a, &b| pts[a].dot(&pts[a]).total_cmp(&pts[b].dot(&pts[b])))
        .unwrap();
    let mut set: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = pts[start];

    for _major in 0..200 {
        let j = (0..pts.len())
            .min_by(|&a, &b| x.dot(&pts[a]).total_cmp(&x.dot(&pts[b])))
            .unwrap();
        if x.dot(&x) - x.dot(&pts[j]) <= tol || set.contains(&j) {
            break;
        }
        set.push(j);
        lambda.push(0.0);
        for _minor in 0..50 {
            let Some(alpha) = affine_min_norm(pts, &set) else {
                // Affinely dependent support set: drop the newest point.
                set.pop();
                lambda.pop();
                break;
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= 1e-14 {
                    let d = l - a;
                    if d > 0.0 {
                        theta = theta.min(l / d);
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let mut i = 0;
            while i < set.len() {
                if lambda[i] <= 1e-14 {
                    set.remove(i);
                    lambda.remove(i);
                } else {
                    i += 1;
                }
            }
            let s: f64 = lambda.iter().sum();
            for l in lambda.iter_mut() {
                *l /= s;
            }
        }
        x = combine(pts, &set, &lambda);
    }
    x
}

fn combine(pts: &[Vector], set: &[usize], lambda: &[f64]) -> Vector {
    let mut x = Vector::zeros(pts[0].dim());
    for (&i, &l) in set.iter().zip(lambda) {
        x += pts[i] * l;
    }
    x
}

/// Barycentric coordinates of the minimum-norm point of the affine hull of
/// `pts[set]`.
fn affine_min_norm(pts: &[Vector], set: &[usize]) -> Option<Vec<f64>> {
    let base = pts[set[0]];
    let m = set.len() - 1;
    if m == 0 {
        return Some(vec![1.0]);
    }
    if m > MAX_DIM {
        return None;
    }
    let edges: Vec<Vector> = set[1..].iter().map(|&i| pts[i] - base).collect();
    let mut gram: Mat = [[0.0; MAX_DIM]; MAX_DIM];
    let mut rhs = [0.0; MAX_DIM];
    for a in 0..m {
        for b in 0..m {
            gram[a][b] = edges[a].dot(&edges[b]);
        }
        rhs[a] = -edges[a].dot(&base);
    }
    let beta = solve(&gram, &rhs, m, 1e-12)?;
    let mut alpha = Vec::with_capacity(m + 1);
    alpha.push(1.0 - beta[..m].iter().sum::<f64>());
    alpha.extend_from_slice(&beta[..m]);
    Some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_square() {
        let sq = [
            Vector::from_slice(&[0.0, 0.0]),
            Vector::from_slice(&[1.0, 0.0]),
            Vector::from_slice(&[0.0, 1.0]),
            Vector::from_slice(&[1.0, 1.0]),
        ];
        let d = point_to_hull(&Vector::from_slice(&[2.0, 0.5]), &sq);
        assert!((d - 1.0).abs() < 1e-12);
        let d = point_to_hull(&Vector::from_slice(&[2.0, 2.0]), &sq);
        assert!((d - libm::sqrt(2.0)).abs() < 1e-12);
        let d = point_to_hull(&Vector::from_slice(&[0.3, 0.4]), &sq);
        assert!(d < 1e-12);
    }
}
