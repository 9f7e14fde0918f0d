//! Small dense linear algebra on fixed-size arrays (dimension ≤ `MAX_DIM`).

use crate::vector::{Vector, MAX_DIM};

pub type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// LU with partial pivoting; returns the determinant of the leading `n×n` block.
pub fn det(m: &Mat, n: usize) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Solves `A x = b` for the leading `n×n` block. Returns `None` when a pivot
/// falls below `tol` (relative to the largest entry).
pub fn solve(m: &Mat, b: &[f64], n: usize, tol: f64) -> Option<[f64; MAX_DIM]> {
    let mut a = *m;
    let mut rhs = [0.0; MAX_DIM];
    rhs[..n].copy_from_slice(&b[..n]);
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |s, (i, j)| s.max(a[i][j].abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= tol * scale {
            return None;
        }
        a.swap(piv, col);
        rhs.swap(piv, col);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = [0.0; MAX_DIM];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn inverse(m: &Mat, n: usize) -> Option<Mat> {
    let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
    for j in 0..n {
        let mut e = [0.0; MAX_DIM];
        e[j] = 1.0;
        let col = solve(m, &e, n, 1e-15)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Unit normal of the hyperplane through `k` points in ℝᵏ, via signed
/// cofactors of the edge matrix. Returns `None` for degenerate point sets.
pub fn hyperplane_normal(points: &[Vector]) -> Option<Vector> {
    let k = points.len();
    let d = points[0].dim();
    debug_assert_eq!(k, d);
    if k == 1 {
        return Some(Vector::basis(1, 0));
    }
    let mut edges = [[0.0; MAX_DIM]; MAX_DIM];
    for r in 0..k - 1 {
        let e = points[r + 1] - points[0];
        edges[r][..d].copy_from_slice(e.as_slice());
    }
    let mut normal = Vector::zeros(d);
    for j in 0..d {
        let mut minor = [[0.0; MAX_DIM]; MAX_DIM];
        for r in 0..k - 1 {
            let mut cc = 0;
            for c in 0..d {
                if c != j {
                    minor[r][cc] = edges[r][c];
                    cc += 1;
                }
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * det(&minor, k - 1);
    }
    let scale: f64 = (0..k - 1)
        .map(|r| libm::sqrt((0..d).map(|c| edges[r][c] * edges[r][c]).sum::<f64>()))
        .product();
    let n = normal.norm();
    if scale == 0.0 || n <= 1e-12 * scale {
        return None;
    }
    Some(normal * (1.0 / n))
}

/// Orthonormal basis of the span of `vectors` (modified Gram–Schmidt), with
/// vectors shorter than `tol` after projection discarded.
pub fn orthonormal_basis(vectors: &[Vector], tol: f64) -> alloc::vec::Vec<Vector> {
    let mut basis: alloc::vec::Vec<Vector> = alloc::vec::Vec::new();
    for v in vectors {
        let mut w = *v;
        for _ in 0..2 {
            for b in &basis {
                w -= *b * w.dot(b);
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w * (1.0 / n));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_solve_agree() {
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        m[0][..3].copy_from_slice(&[2.0, 1.0, 0.0]);
        m[1][..3].copy_from_slice(&[1.0, 3.0, 1.0]);
        m[2][..3].copy_from_slice(&[0.0, 1.0, 4.0]);
        assert!((det(&m, 3) - 18.0).abs() < 1e-12);
        let x = solve(&m, &[3.0, 5.0, 5.0], 3, 1e-14).unwrap();
        for (xi, e) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - e).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_of_coordinate_plane() {
        let pts = [
            Vector::from_slice(&[0.0, 0.0, 1.0]),
            Vector::from_slice(&[1.0, 0.0, 1.0]),
            Vector::from_slice(&[0.0, 1.0, 1.0]),
        ];
        let n = hyperplane_normal(&pts).unwrap();
        assert!((n[2].abs() - 1.0).abs() < 1e-12);
        let collinear = [
            Vector::from_slice(&[0.0, 0.0, 0.0]),
            Vector::from_slice(&[1.0, 0.0, 0.0]),
            Vector::from_slice(&[2.0, 0.0, 0.0]),
        ];
        assert!(hyperplane_normal(&collinear).is_none());
    }
}
