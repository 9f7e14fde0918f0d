//! Convex polytopes in V-representation.
//!
//! A [`Polytope`] stores its extreme points; the facet description, boundary
//! triangulation, volume and moment vector are derived once on first use.
//! The empty set is represented by `None` wherever an operation may produce
//! it, with the support convention `h(∅, z) = 0` available via
//! [`support_or_zero`].

mod distance;
mod hull;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

use crate::vector::{LinearMap, Vector};
use crate::{Error, Result, EPS_GEO};

/// The closed half-space `{x : normal·x ≤ offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    /// Normalizes `normal` to unit length. Fails for a zero normal.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !offset.is_finite() {
            return Err(Error::NonFinite("half-space"));
        }
        Ok(Self {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    pub(crate) fn from_unit(normal: Vector, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed violation `normal·x − offset` (positive outside).
    #[inline]
    pub fn violation(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// The opposite closed half-space `{normal·x ≥ offset}`.
    pub fn complement(&self) -> HalfSpace {
        HalfSpace::from_unit(-self.normal, -self.offset)
    }

    pub fn translate(&self, x: &Vector) -> HalfSpace {
        HalfSpace::from_unit(self.normal, self.offset + self.normal.dot(x))
    }

    /// Image under `φ`: `{φx : n·x ≤ c} = {y : (φ⁻ᵀn)·y ≤ c}`.
    pub fn linear_image(&self, phi: &LinearMap) -> HalfSpace {
        HalfSpace::new(phi.apply_inverse_transpose(&self.normal), self.offset)
            .expect("invertible map keeps normals nonzero")
    }
}

pub(crate) struct Structure {
    facets: Vec<HalfSpace>,
    volume: f64,
    moment: Vector,
}

struct Inner {
    vertices: Vec<Vector>,
    affine_dim: usize,
    structure: OnceBox<Structure>,
}

/// A nonempty convex polytope with an irredundant vertex list.
#[derive(Clone)]
pub struct Polytope {
    inner: Arc<Inner>,
}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope")
            .field("affine_dim", &self.inner.affine_dim)
            .field("vertices", &self.inner.vertices)
            .finish()
    }
}

fn structure_from(data: &hull::HullData) -> Structure {
    let n = data.vertices[0].dim();
    let (volume, moment) = if data.affine_dim == n {
        star_volume_moment(&data.vertices, &data.boundary)
    } else {
        (0.0, Vector::zeros(n))
    };
    Structure {
        facets: data.facets.clone(),
        volume,
        moment,
    }
}

/// Star triangulation from the vertex centroid over the boundary simplices.
fn star_volume_moment(vertices: &[Vector], boundary: &[Vec<Vector>]) -> (f64, Vector) {
    let n = vertices[0].dim();
    let center = vertices.iter().fold(Vector::zeros(n), |a, v| a + *v) * (1.0 / vertices.len() as f64);
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    let mut volume = 0.0;
    let mut moment = Vector::zeros(n);
    for simplex in boundary {
        let mut m = [[0.0; crate::MAX_DIM]; crate::MAX_DIM];
        for (r, v) in simplex.iter().enumerate() {
            let e = *v - center;
            m[r][..n].copy_from_slice(e.as_slice());
        }
        let vol = crate::linalg::det(&m, n).abs() / fact;
        let centroid = simplex.iter().fold(center, |a, v| a + *v) * (1.0 / (n + 1) as f64);
        volume += vol;
        moment += centroid * vol;
    }
    (volume, moment)
}

impl Polytope {
    /// Convex hull of a finite point set; `Ok(None)` for an empty input.
    pub fn hull(points: &[Vector]) -> Result<Option<Polytope>> {
        let Some(first) = points.first() else {
            return Ok(None);
        };
        let n = first.dim();
        crate::check_user_dim(n)?;
        for p in points {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite("point"));
            }
        }
        Ok(Some(Self::hull_unchecked(points)))
    }

    pub(crate) fn hull_unchecked(points: &[Vector]) -> Polytope {
        let data = hull::compute(points);
        let structure = OnceBox::new();
        let _ = structure.set(alloc::boxed::Box::new(structure_from(&data)));
        Polytope {
            inner: Arc::new(Inner {
                vertices: data.vertices,
                affine_dim: data.affine_dim,
                structure,
            }),
        }
    }

    /// Wraps points already known to be the extreme points of their hull.
    fn from_extreme_points(vertices: Vec<Vector>, affine_dim: usize) -> Polytope {
        Polytope {
            inner: Arc::new(Inner {
                vertices,
                affine_dim,
                structure: OnceBox::new(),
            }),
        }
    }

    /// `{x}`.
    pub fn point(x: Vector) -> Polytope {
        Self::from_extreme_points(alloc::vec![x], 0)
    }

    /// `T_λ = conv{0, λe₁, e₂, …, eₙ}`.
    pub fn t_lambda(n: usize, lambda: f64) -> Result<Polytope> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositive {
                name: "lambda",
                value: lambda,
            });
        }
        let mut pts = alloc::vec![Vector::zeros(n), Vector::basis(n, 0) * lambda];
        pts.extend((1..n).map(|i| Vector::basis(n, i)));
        Ok(Self::hull(&pts)?.expect("nonempty"))
    }

    /// Axis-parallel box `∏ [lo_i, hi_i]`.
    pub fn cuboid(lo: &Vector, hi: &Vector) -> Polytope {
        let n = lo.dim();
        let pts: Vec<Vector> = (0..1usize << n)
            .map(|mask| {
                let mut v = *lo;
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        v[i] = hi[i];
                    }
                }
                v
            })
            .collect();
        Self::hull_unchecked(&pts)
    }

    /// `[0,1]ⁿ`.
    pub fn unit_cube(n: usize) -> Polytope {
        let mut hi = Vector::zeros(n);
        for i in 0..n {
            hi[i] = 1.0;
        }
        Self::cuboid(&Vector::zeros(n), &hi)
    }

    /// Segment `[a, b]`.
    pub fn segment(a: Vector, b: Vector) -> Polytope {
        Self::hull_unchecked(&[a, b])
    }

    /// Bounded intersection of half-spaces, by enumeration of all
    /// `n`-subsets of constraints. `None` if the intersection is empty.
    /// The caller is responsible for boundedness.
    pub fn from_halfspaces(halfspaces: &[HalfSpace], n: usize) -> Option<Polytope> {
        let pts = enumerate_vertices(halfspaces, n);
        if pts.is_empty() {
            None
        } else {
            Some(Self::hull_unchecked(&pts))
        }
    }

    fn structure(&self) -> &Structure {
        self.inner.structure.get_or_init(|| {
            let data = hull::compute(&self.inner.vertices);
            alloc::boxed::Box::new(structure_from(&data))
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.vertices[0].dim()
    }

    pub fn affine_dim(&self) -> usize {
        self.inner.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == self.dim()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.inner.vertices
    }

    /// Facet inequalities; lower-dimensional polytopes also carry a pair of
    /// opposite inequalities per normal direction of their affine hull.
    pub fn facets(&self) -> &[HalfSpace] {
        &self.structure().facets
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let tol = EPS_GEO * self.scale().max(x.norm_inf());
        self.facets().iter().all(|h| h.violation(x) <= tol)
    }

    pub(crate) fn scale(&self) -> f64 {
        hull::scale_of(self.vertices())
    }

    /// `h(K, z) = max{z·x : x ∈ K}`.
    pub fn support(&self, z: &Vector) -> f64 {
        self.vertices()
            .iter()
            .map(|v| v.dot(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A vertex attaining `h(K, z)`.
    pub fn support_point(&self, z: &Vector) -> Vector {
        *self
            .vertices()
            .iter()
            .max_by(|a, b| a.dot(z).total_cmp(&b.dot(z)))
            .unwrap()
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Polytope {
        let mut pts = Vec::with_capacity(self.vertices().len() * other.vertices().len());
        for a in self.vertices() {
            for b in other.vertices() {
                pts.push(*a + *b);
            }
        }
        Self::hull_unchecked(&pts)
    }

    /// `-K`.
    pub fn reflect(&self) -> Polytope {
        Self::from_extreme_points(self.vertices().iter().map(|v| -*v).collect(), self.affine_dim())
    }

    /// `DK = K + (−K)`.
    pub fn difference_body(&self) -> Polytope {
        self.minkowski_sum(&self.reflect())
    }

    pub fn translate(&self, x: &Vector) -> Polytope {
        Self::from_extreme_points(self.vertices().iter().map(|v| *v + *x).collect(), self.affine_dim())
    }

    /// `tK` for `t ≥ 0`.
    pub fn dilate(&self, t: f64) -> Polytope {
        if t == 0.0 {
            return Self::point(Vector::zeros(self.dim()));
        }
        Self::from_extreme_points(self.vertices().iter().map(|v| *v * t).collect(), self.affine_dim())
    }

    pub fn linear_image(&self, phi: &LinearMap) -> Polytope {
        Self::from_extreme_points(self.vertices().iter().map(|v| phi.apply(v)).collect(), self.affine_dim())
    }

    /// n-dimensional volume; 0 for lower-dimensional polytopes.
    pub fn volume(&self) -> f64 {
        self.structure().volume
    }

    /// `m(K) = ∫_K x dx`; the zero vector for lower-dimensional polytopes.
    pub fn moment_vector(&self) -> Vector {
        self.structure().moment
    }

    pub fn centroid(&self) -> Vector {
        self.vertices().iter().fold(Vector::zeros(self.dim()), |a, v| a + *v)
            * (1.0 / self.vertices().len() as f64)
    }

    /// `h(MK, z) = ∫_K |x·z| dx`, from the two pieces of `K` on either side
    /// of the hyperplane `z·x = 0`.
    pub fn moment_body_support(&self, z: &Vector) -> f64 {
        let Ok(pos) = HalfSpace::new(-*z, 0.0) else {
            return 0.0;
        };
        let upper = self.clip_halfspace(&pos).map(|p| p.moment_vector().dot(z)).unwrap_or(0.0);
        let lower = self
            .clip_halfspace(&pos.complement())
            .map(|p| p.moment_vector().dot(z))
            .unwrap_or(0.0);
        upper - lower
    }

    /// `K ∩ H`: kept vertices plus crossing points of vertex pairs with the
    /// boundary hyperplane, re-hulled. `None` if empty.
    pub fn clip_halfspace(&self, h: &HalfSpace) -> Option<Polytope> {
        let tol = EPS_GEO * self.scale();
        let vals: Vec<f64> = self.vertices().iter().map(|v| h.violation(v)).collect();
        if vals.iter().all(|&s| s <= tol) {
            return Some(self.clone());
        }
        let mut pts: Vec<Vector> = Vec::new();
        for (v, &s) in self.vertices().iter().zip(&vals) {
            if s <= tol {
                pts.push(*v);
            }
        }
        if pts.is_empty() {
            return None;
        }
        let verts = self.vertices();
        for i in 0..verts.len() {
            for j in 0..verts.len() {
                if vals[i] < -tol && vals[j] > tol {
                    let t = vals[i] / (vals[i] - vals[j]);
                    pts.push(verts[i] + (verts[j] - verts[i]) * t);
                }
            }
        }
        Some(Self::hull_unchecked(&pts))
    }

    /// Intersection with every half-space in `hs`.
    pub fn clip_all(&self, hs: &[HalfSpace]) -> Option<Polytope> {
        let mut cur = self.clone();
        for h in hs {
            cur = cur.clip_halfspace(h)?;
        }
        Some(cur)
    }

    /// Euclidean distance from `x` to the polytope.
    pub fn distance_to_point(&self, x: &Vector) -> f64 {
        distance::point_to_hull(x, self.vertices())
    }

    /// Hausdorff distance, as the largest vertex-to-body distance in either
    /// direction (exact for polytopes).
    pub fn hausdorff_distance(&self, other: &Polytope) -> f64 {
        let a = self
            .vertices()
            .iter()
            .map(|v| other.distance_to_point(v))
            .fold(0.0, f64::max);
        let b = other
            .vertices()
            .iter()
            .map(|v| self.distance_to_point(v))
            .fold(0.0, f64::max);
        a.max(b)
    }

    /// Largest distance of a vertex from the origin.
    pub fn circumradius(&self) -> f64 {
        self.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `h(K, z)` with `h(∅, z) = 0`.
pub fn support_or_zero(k: Option<&Polytope>, z: &Vector) -> f64 {
    k.map_or(0.0, |k| k.support(z))
}

/// Hausdorff distance allowing empty sets: 0 between two empty sets,
/// `+∞` between an empty and a nonempty one.
pub fn hausdorff_or_inf(a: Option<&Polytope>, b: Option<&Polytope>) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(a), Some(b)) => a.hausdorff_distance(b),
        _ => f64::INFINITY,
    }
}

/// Feasible basic solutions of `{x ∈ ℝⁿ : h·x ≤ c for all h}`, deduplicated.
/// For a pointed polyhedron these are exactly its vertices.
pub(crate) fn enumerate_vertices(halfspaces: &[HalfSpace], n: usize) -> Vec<Vector> {
    let scale = halfspaces.iter().fold(1.0f64, |s, h| s.max(h.offset.abs()));
    let tol = EPS_GEO * scale;
    let m = halfspaces.len();
    let mut pts: Vec<Vector> = Vec::new();
    if m < n {
        return pts;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mut a = [[0.0; crate::MAX_DIM]; crate::MAX_DIM];
        let mut b = [0.0; crate::MAX_DIM];
        for (r, &i) in idx.iter().enumerate() {
            a[r][..n].copy_from_slice(halfspaces[i].normal.as_slice());
            b[r] = halfspaces[i].offset;
        }
        if let Some(x) = crate::linalg::solve(&a, &b, n, 1e-10) {
            let x = Vector::from_slice(&x[..n]);
            let xtol = tol * x.norm_inf().max(1.0);
            if halfspaces.iter().all(|h| h.violation(&x) <= xtol)
                && !pts.iter().any(|p| (*p - x).norm_inf() <= xtol)
            {
                pts.push(x);
            }
        }
        if !next_combination(&mut idx, m) {
            break;
        }
    }
    pts
}

pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
