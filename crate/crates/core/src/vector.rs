use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::{Error, Result};

/// Largest dimension a [`Vector`] can hold. User geometry lives in 2..=4;
/// one extra slot carries the height coordinate of epigraphs.
pub const MAX_DIM: usize = 5;

/// A point or direction in ℝⁿ, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds MAX_DIM");
        Self {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Builds a vector from a slice. Panics if the slice is longer than
    /// [`MAX_DIM`]; use [`Vector::try_from_slice`] for untrusted input.
    pub fn from_slice(xs: &[f64]) -> Self {
        Self::try_from_slice(xs).expect("vector dimension")
    }

    pub fn try_from_slice(xs: &[f64]) -> Result<Self> {
        if xs.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(xs.len()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        let mut v = Self::zeros(xs.len());
        v.coords[..xs.len()].copy_from_slice(xs);
        Ok(v)
    }

    /// The canonical basis vector `e_{i+1}` (zero-based `i`).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[i] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| *self * (1.0 / n))
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (*self - *other).norm()
    }

    /// Appends one coordinate (used to lift points into epigraph space).
    pub fn push(&self, x: f64) -> Vector {
        let mut v = Self::zeros(self.dim() + 1);
        v.coords[..self.dim()].copy_from_slice(self.as_slice());
        v.coords[self.dim()] = x;
        v
    }

    /// Drops the last coordinate.
    pub fn truncate(&self) -> Vector {
        let mut v = Self::zeros(self.dim() - 1);
        v.coords[..self.dim() - 1].copy_from_slice(&self.as_slice()[..self.dim() - 1]);
        v
    }

    pub fn last(&self) -> f64 {
        self.coords[self.dim() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// Uniform random unit vector (normalized Gaussian-free rejection sample).
    pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
        loop {
            let mut v = Self::zeros(dim);
            for i in 0..dim {
                v.coords[i] = rng.gen_range(-1.0..=1.0);
            }
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v * (1.0 / n);
            }
        }
    }

    pub fn random_in_box<R: Rng + ?Sized>(dim: usize, lo: f64, hi: f64, rng: &mut R) -> Vector {
        let mut v = Self::zeros(dim);
        for i in 0..dim {
            v.coords[i] = rng.gen_range(lo..hi);
        }
        v
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        let d = self.dim();
        &mut self.coords[..d][i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        self += rhs;
        self
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim() {
            self.coords[i] += rhs.coords[i];
        }
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        self -= rhs;
        self
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim() {
            self.coords[i] -= rhs.coords[i];
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(mut self, s: f64) -> Vector {
        for i in 0..self.dim() {
            self.coords[i] *= s;
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

/// An invertible linear map of ℝⁿ with cached determinant and inverse.
#[derive(Clone, Copy, PartialEq)]
pub struct LinearMap {
    dim: usize,
    m: [[f64; MAX_DIM]; MAX_DIM],
    inv: [[f64; MAX_DIM]; MAX_DIM],
    det: f64,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: alloc::vec::Vec<&[f64]> = (0..self.dim).map(|i| &self.m[i][..self.dim]).collect();
        f.debug_struct("LinearMap")
            .field("matrix", &rows)
            .field("det", &self.det)
            .finish()
    }
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Self {
            dim,
            m,
            inv: m,
            det: 1.0,
        }
    }

    /// Builds a map from row-major rows. Fails for singular matrices.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("matrix"));
            }
            m[i][..dim].copy_from_slice(r);
        }
        let det = linalg::det(&m, dim);
        let inv = linalg::inverse(&m, dim).ok_or(Error::SingularMap)?;
        if det.abs() < 1e-14 {
            return Err(Error::SingularMap);
        }
        Ok(Self { dim, m, inv, det })
    }

    /// Elementary shear `I + c·e_i e_jᵀ` (`i != j`), determinant exactly 1.
    pub fn shear(dim: usize, i: usize, j: usize, c: f64) -> Self {
        assert!(i != j && i < dim && j < dim);
        let mut s = Self::identity(dim);
        s.m[i][j] = c;
        s.inv[i][j] = -c;
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn rows(&self) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
        (0..self.dim).map(|i| self.m[i][..self.dim].to_vec()).collect()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        mat_vec(&self.m, self.dim, x)
    }

    pub fn apply_inverse(&self, x: &Vector) -> Vector {
        mat_vec(&self.inv, self.dim, x)
    }

    /// `φᵀ z`.
    pub fn apply_transpose(&self, z: &Vector) -> Vector {
        mat_t_vec(&self.m, self.dim, z)
    }

    /// `φ⁻ᵀ z`.
    pub fn apply_inverse_transpose(&self, z: &Vector) -> Vector {
        mat_t_vec(&self.inv, self.dim, z)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = (0..d).map(|k| self.m[i][k] * other.m[k][j]).sum();
                inv[i][j] = (0..d).map(|k| other.inv[i][k] * self.inv[k][j]).sum();
            }
        }
        LinearMap {
            dim: d,
            m,
            inv,
            det: self.det * other.det,
        }
    }

    pub fn inverse(&self) -> LinearMap {
        LinearMap {
            dim: self.dim,
            m: self.inv,
            inv: self.m,
            det: 1.0 / self.det,
        }
    }

    /// Deterministic product of `k` elementary shears `I + c e_i e_jᵀ` with
    /// `c ∈ [-2, 2]`. `k = 0` gives the identity. The determinant is exactly 1.
    pub fn random_sln(seed: u64, k: usize, dim: usize) -> LinearMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = LinearMap::identity(dim);
        for _ in 0..k {
            let i = rng.gen_range(0..dim);
            let mut j = rng.gen_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let c = rng.gen_range(-2.0..=2.0);
            acc = LinearMap::shear(dim, i, j, c).compose(&acc);
        }
        acc.det = 1.0;
        acc
    }
}

fn mat_vec(m: &[[f64; MAX_DIM]; MAX_DIM], d: usize, x: &Vector) -> Vector {
    debug_assert_eq!(x.dim(), d);
    let mut y = Vector::zeros(d);
    for i in 0..d {
        y[i] = (0..d).map(|k| m[i][k] * x[k]).sum();
    }
    y
}

fn mat_t_vec(m: &[[f64; MAX_DIM]; MAX_DIM], d: usize, x: &Vector) -> Vector {
    debug_assert_eq!(x.dim(), d);
    let mut y = Vector::zeros(d);
    for i in 0..d {
        y[i] = (0..d).map(|k| m[k][i] * x[k]).sum();
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_products_have_unit_determinant() {
        for seed in 0..20 {
            let phi = LinearMap::random_sln(seed, 6, 3);
            assert_eq!(phi.det(), 1.0);
            let rows = phi.rows();
            let refs: alloc::vec::Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = LinearMap::from_rows(&refs).unwrap();
            assert!((m.det() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_sln_is_reproducible_and_k0_is_identity() {
        assert_eq!(LinearMap::random_sln(7, 5, 4), LinearMap::random_sln(7, 5, 4));
        assert_eq!(LinearMap::random_sln(7, 0, 3), LinearMap::identity(3));
    }

    #[test]
    fn inverse_round_trip() {
        let phi = LinearMap::random_sln(3, 8, 4);
        let x = Vector::from_slice(&[0.3, -1.2, 2.0, 0.5]);
        let y = phi.apply_inverse(&phi.apply(&x));
        assert!((y - x).norm() < 1e-12);
        let z = Vector::from_slice(&[1.0, 2.0, -0.5, 0.1]);
        assert!((phi.apply(&x).dot(&z) - x.dot(&phi.apply_transpose(&z))).abs() < 1e-12);
    }

    #[test]
    fn singular_map_rejected() {
        let r0 = [1.0, 2.0];
        let r1 = [2.0, 4.0];
        assert_eq!(LinearMap::from_rows(&[&r0, &r1]), Err(Error::SingularMap));
    }
}
