//! Piecewise-linear coercive convex functions
//! `u(x) = max_i (a_i·x + b_i) + shift` on a polyhedral domain, `+∞` outside.
//!
//! Everything that depends only on the pieces and the domain (epigraph
//! vertices, minimum, cone bound, the layer profile used by the functionals)
//! lives in a shared shape, so vertical shifts are free.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::functionals::LayerProfile;
use crate::lp::{self, LpOutcome};
use crate::polytope::{enumerate_vertices, hausdorff_or_inf, HalfSpace, Polytope};
use crate::vector::{LinearMap, Vector};
use crate::{check_user_dim, Error, Result, EPS_GEO};

/// The affine function `x ↦ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffinePiece {
    pub slope: Vector,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn new(slope: Vector, intercept: f64) -> Result<Self> {
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::NonFinite("affine piece"));
        }
        Ok(Self { slope, intercept })
    }

    #[inline]
    pub fn eval(&self, x: &Vector) -> f64 {
        self.slope.dot(x) + self.intercept
    }
}

/// Effective domain of a PL function.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    All,
    /// Intersection of closed half-spaces; may be unbounded or lower-dimensional.
    Polyhedron(Vec<HalfSpace>),
}

impl Domain {
    pub fn from_polytope(k: &Polytope) -> Domain {
        Domain::Polyhedron(k.facets().to_vec())
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        match self {
            Domain::All => &[],
            Domain::Polyhedron(h) => h,
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let tol = EPS_GEO * x.norm_inf().max(1.0);
        self.halfspaces().iter().all(|h| h.violation(x) <= tol * h.offset().abs().max(1.0))
    }
}

/// Certified lower bound `u(x) > a|x| + b`, `a > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeBound {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coercivity {
    Coercive(ConeBound),
    NotCoercive,
}

/// Result of [`PLConvexFunction::pointwise_min`].
#[derive(Clone, Debug)]
pub enum MinOutcome {
    Convex(PLConvexFunction),
    /// `u∧v` is not convex. When available, the witness is a segment in
    /// `ℝⁿ⁺¹` between the two epigraphs that leaves their union.
    NotConvex { witness: Option<(Vector, Vector)> },
}

impl MinOutcome {
    pub fn convex(self) -> Option<PLConvexFunction> {
        match self {
            MinOutcome::Convex(u) => Some(u),
            MinOutcome::NotConvex { .. } => None,
        }
    }
}

struct Shape {
    dim: usize,
    pieces: Vec<AffinePiece>,
    domain: Domain,
    /// Epigraph vertices in `ℝⁿ⁺¹` (height last), without shift.
    epi_vertices: Vec<Vector>,
    min: f64,
    bound: ConeBound,
    profile: OnceBox<LayerProfile>,
}

/// A proper, coercive, piecewise-linear convex function.
#[derive(Clone)]
pub struct PLConvexFunction {
    shape: Arc<Shape>,
    shift: f64,
}

impl core::fmt::Debug for PLConvexFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PLConvexFunction")
            .field("pieces", &self.shape.pieces)
            .field("domain", &self.shape.domain)
            .field("shift", &self.shift)
            .finish()
    }
}

/// LP rows of `{x : h·x ≤ c}` for the domain, padded with `extra` zero columns.
fn domain_rows(domain: &Domain, extra: usize, rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>) {
    for h in domain.halfspaces() {
        let mut r = h.normal().as_slice().to_vec();
        r.resize(r.len() + extra, 0.0);
        rows.push(r);
        rhs.push(h.offset());
    }
}

/// LP rows of the epigraph `{(x, τ) : a_i·x + b_i + shift ≤ τ, x ∈ dom}`.
fn epi_rows(pieces: &[AffinePiece], domain: &Domain, shift: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for p in pieces {
        let mut r = p.slope.as_slice().to_vec();
        r.push(-1.0);
        rows.push(r);
        rhs.push(-p.intercept - shift);
    }
    domain_rows(domain, 1, &mut rows, &mut rhs);
    (rows, rhs)
}

/// Epigraph as unit half-spaces in `ℝⁿ⁺¹`.
fn epi_halfspaces(pieces: &[AffinePiece], domain: &Domain, shift: f64) -> Vec<HalfSpace> {
    let mut hs: Vec<HalfSpace> = pieces
        .iter()
        .map(|p| {
            HalfSpace::new(p.slope.push(-1.0), -p.intercept - shift).expect("nonzero epigraph normal")
        })
        .collect();
    hs.extend(domain.halfspaces().iter().map(|h| {
        HalfSpace::new(h.normal().push(0.0), h.offset()).expect("unit domain normal")
    }));
    hs
}

fn validate(pieces: &[AffinePiece], domain: &Domain) -> Result<usize> {
    let first = pieces.first().ok_or(Error::EmptyInput)?;
    let n = first.slope.dim();
    check_user_dim(n)?;
    for p in pieces {
        if p.slope.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.slope.dim(),
            });
        }
        if !p.slope.is_finite() || !p.intercept.is_finite() {
            return Err(Error::NonFinite("affine piece"));
        }
    }
    for h in domain.halfspaces() {
        if h.normal().dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.normal().dim(),
            });
        }
    }
    Ok(n)
}

struct Analysis {
    epi_vertices: Vec<Vector>,
    min: f64,
    bound: ConeBound,
}

/// Recession slope bound: `max_i a_i·d ≥ a|d|` for every recession direction
/// `d` of the domain. `None` if some nonzero direction has no positive slope.
fn recession_slope(n: usize, pieces: &[AffinePiece], domain: &Domain) -> Option<f64> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in domain.halfspaces() {
        rows.push(h.normal().as_slice().to_vec());
        rhs.push(0.0);
    }
    let bounded = |rows: &[Vec<f64>], rhs: &[f64]| {
        (0..n).all(|i| {
            [1.0, -1.0].iter().all(|&s| {
                let mut c = vec![0.0; n];
                c[i] = s;
                matches!(lp::maximize(&c, rows, rhs), LpOutcome::Optimal { .. })
            })
        })
    };
    if bounded(&rows, &rhs) {
        // Bounded domain: any a > 0 works.
        return Some(1.0);
    }
    let cone: Vec<HalfSpace> = domain
        .halfspaces()
        .iter()
        .map(|h| HalfSpace::from_unit(*h.normal(), 0.0))
        .collect();
    let mut br = cone;
    for p in pieces {
        if p.slope.norm() > 0.0 {
            rows.push(p.slope.as_slice().to_vec());
            rhs.push(1.0);
            br.push(HalfSpace::new(p.slope, 1.0).expect("nonzero slope"));
        }
    }
    if !bounded(&rows, &rhs) {
        return None;
    }
    let r = enumerate_vertices(&br, n)
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    Some((1.0 - EPS_GEO) / r)
}

fn analyze(n: usize, pieces: &[AffinePiece], domain: &Domain) -> Result<Analysis> {
    if let Domain::Polyhedron(_) = domain {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        domain_rows(domain, 0, &mut rows, &mut rhs);
        if lp::maximize(&vec![0.0; n], &rows, &rhs) == LpOutcome::Infeasible {
            return Err(Error::EmptyDomain);
        }
    }
    let a = recession_slope(n, pieces, domain).ok_or(Error::NotCoercive)?;
    let (rows, rhs) = epi_rows(pieces, domain, 0.0);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let min = match lp::minimize(&c, &rows, &rhs) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible => return Err(Error::EmptyDomain),
        LpOutcome::Unbounded => return Err(Error::NotCoercive),
    };
    let epi_vertices = enumerate_vertices(&epi_halfspaces(pieces, domain, 0.0), n + 1);
    if epi_vertices.is_empty() {
        return Err(Error::Lp("epigraph has no vertices"));
    }
    let r_v = epi_vertices
        .iter()
        .map(|v| v.truncate().norm())
        .fold(0.0f64, f64::max);
    Ok(Analysis {
        epi_vertices,
        min,
        bound: ConeBound {
            a,
            b: min - a * r_v - 1.0,
        },
    })
}

/// Cone bound of the function given by `pieces` on `domain`, or
/// [`Coercivity::NotCoercive`].
pub fn coercivity_check(pieces: &[AffinePiece], domain: &Domain) -> Result<Coercivity> {
    let n = validate(pieces, domain)?;
    match analyze(n, pieces, domain) {
        Ok(a) => Ok(Coercivity::Coercive(a.bound)),
        Err(Error::NotCoercive) => Ok(Coercivity::NotCoercive),
        Err(e) => Err(e),
    }
}

/// Cone function `ℓ_K` with `{ℓ_K ≤ t} = tK` for `t ≥ 0`.
pub fn cone_fn(k: &Polytope) -> Result<PLConvexFunction> {
    let n = k.dim();
    if !k.contains(&Vector::zeros(n)) {
        return Err(Error::OriginNotContained);
    }
    let tol = EPS_GEO * k.scale();
    let mut pieces = Vec::new();
    let mut domain = Vec::new();
    for h in k.facets() {
        if h.offset() > tol {
            pieces.push(AffinePiece::new(*h.normal() * (1.0 / h.offset()), 0.0)?);
        } else {
            domain.push(HalfSpace::from_unit(*h.normal(), 0.0));
        }
    }
    if pieces.is_empty() {
        pieces.push(AffinePiece::new(Vector::zeros(n), 0.0)?);
    }
    let domain = if domain.is_empty() {
        Domain::All
    } else {
        Domain::Polyhedron(domain)
    };
    PLConvexFunction::new(pieces, domain)
}

/// Indicator function `I_K`.
pub fn indicator_fn(k: &Polytope) -> PLConvexFunction {
    let piece = AffinePiece {
        slope: Vector::zeros(k.dim()),
        intercept: 0.0,
    };
    PLConvexFunction::new(vec![piece], Domain::from_polytope(k)).expect("indicator of a polytope")
}

impl PLConvexFunction {
    /// Builds `max_i (a_i·x + b_i)` on `domain`. Fails with
    /// [`Error::NotCoercive`] or [`Error::EmptyDomain`] for functions outside
    /// the coercive, proper class.
    pub fn new(pieces: Vec<AffinePiece>, domain: Domain) -> Result<Self> {
        let n = validate(&pieces, &domain)?;
        let domain = match domain {
            Domain::Polyhedron(h) if h.is_empty() => Domain::All,
            d => d,
        };
        let a = analyze(n, &pieces, &domain)?;
        Ok(Self {
            shape: Arc::new(Shape {
                dim: n,
                pieces,
                domain,
                epi_vertices: a.epi_vertices,
                min: a.min,
                bound: a.bound,
                profile: OnceBox::new(),
            }),
            shift: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.shape.pieces
    }

    pub fn domain(&self) -> &Domain {
        &self.shape.domain
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `u(x)`, or `+∞` off the domain.
    pub fn eval(&self, x: &Vector) -> f64 {
        if !self.shape.domain.contains(x) {
            return f64::INFINITY;
        }
        self.shape
            .pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
            + self.shift
    }

    /// `min u`, attained.
    pub fn min_value(&self) -> f64 {
        self.shape.min + self.shift
    }

    /// Certified `u(x) > a|x| + b`.
    pub fn cone_bound(&self) -> ConeBound {
        ConeBound {
            a: self.shape.bound.a,
            b: self.shape.bound.b + self.shift,
        }
    }

    pub fn coercivity_check(&self) -> Coercivity {
        Coercivity::Coercive(self.cone_bound())
    }

    /// Vertices of `epi u` in `ℝⁿ⁺¹`, height last.
    pub fn epigraph_vertices(&self) -> Vec<Vector> {
        self.shape
            .epi_vertices
            .iter()
            .map(|v| {
                let mut w = *v;
                let n = w.dim() - 1;
                w[n] += self.shift;
                w
            })
            .collect()
    }

    /// `u` is constant on its domain, i.e. a shifted indicator.
    pub fn is_constant_on_domain(&self) -> bool {
        self.shape.pieces.iter().all(|p| p.slope.norm_inf() == 0.0)
    }

    /// Shape minimum and distinct epigraph-vertex heights, both without shift.
    pub(crate) fn shape_breakpoints(&self) -> Vec<f64> {
        let mut h: Vec<f64> = self.shape.epi_vertices.iter().map(|v| v.last()).collect();
        h.sort_by(|a, b| a.total_cmp(b));
        let scale = h.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let mut out: Vec<f64> = Vec::new();
        for v in h {
            if out.last().map_or(true, |&l| v - l > 1e-12 * scale) {
                out.push(v);
            }
        }
        out
    }

    pub(crate) fn profile_cell(&self) -> &OnceBox<LayerProfile> {
        &self.shape.profile
    }

    /// Sublevel set of the unshifted shape.
    pub(crate) fn shape_sublevel(&self, s: f64) -> Option<Polytope> {
        let n = self.dim();
        let min = self.shape.min;
        let tol = EPS_GEO * min.abs().max(1.0);
        if s < min - tol {
            return None;
        }
        let s = s.max(min);
        let mut hs: Vec<HalfSpace> = self.shape.domain.halfspaces().to_vec();
        for p in &self.shape.pieces {
            let rhs = s - p.intercept;
            if p.slope.norm_inf() == 0.0 {
                if rhs < -tol {
                    return None;
                }
            } else {
                hs.push(HalfSpace::new(p.slope, rhs).expect("nonzero slope"));
            }
        }
        if hs.len() < n {
            return None;
        }
        Polytope::from_halfspaces(&hs, n)
    }

    /// `{u ≤ t}`; `None` iff `t < min u`.
    pub fn sublevel_set(&self, t: f64) -> Option<Polytope> {
        self.shape_sublevel(t - self.shift)
    }

    /// `u + t`.
    pub fn add_constant(&self, t: f64) -> PLConvexFunction {
        PLConvexFunction {
            shape: self.shape.clone(),
            shift: self.shift + t,
        }
    }

    /// `u∘τ_x⁻¹`, i.e. `y ↦ u(y − x)`.
    pub fn translate(&self, x: &Vector) -> Result<PLConvexFunction> {
        self.check_vector(x)?;
        let pieces = self
            .pieces()
            .iter()
            .map(|p| AffinePiece {
                slope: p.slope,
                intercept: p.intercept - p.slope.dot(x),
            })
            .collect();
        let domain = self.map_domain(|h| h.translate(x));
        Ok(PLConvexFunction::new(pieces, domain)?.add_constant(self.shift))
    }

    /// `u∘φ⁻¹`.
    pub fn precompose_linear(&self, phi: &LinearMap) -> Result<PLConvexFunction> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let pieces = self
            .pieces()
            .iter()
            .map(|p| AffinePiece {
                slope: phi.apply_inverse_transpose(&p.slope),
                intercept: p.intercept,
            })
            .collect();
        let domain = self.map_domain(|h| h.linear_image(phi));
        Ok(PLConvexFunction::new(pieces, domain)?.add_constant(self.shift))
    }

    fn map_domain(&self, f: impl Fn(&HalfSpace) -> HalfSpace) -> Domain {
        match self.domain() {
            Domain::All => Domain::All,
            Domain::Polyhedron(hs) => Domain::Polyhedron(hs.iter().map(f).collect()),
        }
    }

    fn check_vector(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("vector"));
        }
        Ok(())
    }

    fn absorbed_pieces(&self) -> impl Iterator<Item = AffinePiece> + '_ {
        self.pieces().iter().map(move |p| AffinePiece {
            slope: p.slope,
            intercept: p.intercept + self.shift,
        })
    }

    /// `u∨v`. Fails with [`Error::EmptyDomain`] when the domains are disjoint.
    pub fn pointwise_max(&self, other: &PLConvexFunction) -> Result<PLConvexFunction> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut pieces: Vec<AffinePiece> = self.absorbed_pieces().collect();
        for p in other.absorbed_pieces() {
            if !pieces.contains(&p) {
                pieces.push(p);
            }
        }
        let mut hs: Vec<HalfSpace> = self.domain().halfspaces().to_vec();
        for h in other.domain().halfspaces() {
            if !hs.contains(h) {
                hs.push(*h);
            }
        }
        PLConvexFunction::new(pieces, Domain::Polyhedron(hs))
    }

    /// Largest epigraph-vertex height (with shift).
    fn top_height(&self) -> f64 {
        self.shape
            .epi_vertices
            .iter()
            .map(|v| v.last())
            .fold(f64::NEG_INFINITY, f64::max)
            + self.shift
    }

    /// Epigraph truncated at height `t`, as half-spaces and vertices.
    fn truncated_epigraph(&self, t: f64) -> (Vec<HalfSpace>, Vec<Vector>) {
        let n = self.dim();
        let mut hs = epi_halfspaces(self.pieces(), self.domain(), self.shift);
        hs.push(HalfSpace::from_unit(Vector::basis(n + 1, n), t));
        let verts = enumerate_vertices(&hs, n + 1);
        (hs, verts)
    }

    /// `max (p(x) − v(x))` over `dom v`, `+∞` if unbounded.
    fn excess_over(p: &AffinePiece, v: &PLConvexFunction) -> f64 {
        let (rows, rhs) = epi_rows(v.pieces(), v.domain(), v.shift);
        let mut c = p.slope.as_slice().to_vec();
        c.push(-1.0);
        match lp::maximize(&c, &rows, &rhs) {
            LpOutcome::Optimal { value, .. } => value + p.intercept,
            LpOutcome::Unbounded => f64::INFINITY,
            LpOutcome::Infeasible => f64::NEG_INFINITY,
        }
    }

    /// `max h·x` over `dom v`, `+∞` if unbounded.
    fn domain_excess(h: &HalfSpace, v: &PLConvexFunction) -> f64 {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        domain_rows(v.domain(), 0, &mut rows, &mut rhs);
        match lp::maximize(h.normal().as_slice(), &rows, &rhs) {
            LpOutcome::Optimal { value, .. } => value - h.offset(),
            LpOutcome::Unbounded => f64::INFINITY,
            LpOutcome::Infeasible => f64::NEG_INFINITY,
        }
    }

    /// `u∧v` when it is convex, certified by checking that every segment
    /// between vertices of the two (height-truncated) epigraphs stays inside
    /// their union.
    pub fn pointwise_min(&self, other: &PLConvexFunction) -> Result<MinOutcome> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let top_max = match self.pointwise_max(other) {
            Ok(w) => w.top_height(),
            Err(Error::EmptyDomain) => return Ok(MinOutcome::NotConvex { witness: None }),
            Err(e) => return Err(e),
        };
        let t = self.top_height().max(other.top_height()).max(top_max);
        let t = t + t.abs().max(1.0);
        let (hu, vu) = self.truncated_epigraph(t);
        let (hv, vv) = other.truncated_epigraph(t);
        let scale = vu.iter().chain(&vv).fold(1.0f64, |s, p| s.max(p.norm_inf()));
        let tol = 1e-9 * scale;
        for a in &vu {
            for b in &vv {
                let d = *b - *a;
                let len = d.norm();
                if len <= tol {
                    continue;
                }
                let flat = 1e-12 * len;
                let mut lam_u = 1.0f64;
                for h in &hu {
                    let rate = h.normal().dot(&d);
                    if rate > flat {
                        lam_u = lam_u.min((h.offset() - h.normal().dot(a)) / rate);
                    }
                }
                let mut lam_v = 0.0f64;
                for h in &hv {
                    let rate = h.normal().dot(&d);
                    if rate < -flat {
                        lam_v = lam_v.max((h.offset() - h.normal().dot(a)) / rate);
                    }
                }
                if lam_v > lam_u + tol / len {
                    return Ok(MinOutcome::NotConvex {
                        witness: Some((*a, *b)),
                    });
                }
            }
        }

        // Pieces and domain constraints of either side valid on the other.
        let mut pieces: Vec<AffinePiece> = Vec::new();
        for (this, that) in [(self, other), (other, self)] {
            for p in this.absorbed_pieces() {
                let excess = Self::excess_over(&p, that);
                if excess <= tol && !pieces.contains(&p) {
                    pieces.push(p);
                }
            }
        }
        let mut hs: Vec<HalfSpace> = Vec::new();
        for (this, that) in [(self, other), (other, self)] {
            for h in this.domain().halfspaces() {
                if Self::domain_excess(h, that) <= tol && !hs.contains(h) {
                    hs.push(*h);
                }
            }
        }
        if pieces.is_empty() {
            return Ok(MinOutcome::NotConvex { witness: None });
        }
        let w = match PLConvexFunction::new(pieces, Domain::Polyhedron(hs)) {
            Ok(w) => w,
            Err(Error::NotCoercive | Error::EmptyDomain) => {
                return Ok(MinOutcome::NotConvex { witness: None })
            }
            Err(e) => return Err(e),
        };
        // The rebuilt epigraph must not leave the (convex) union.
        let (_, vw) = w.truncated_epigraph(t);
        let inside = |hs: &[HalfSpace], p: &Vector| hs.iter().all(|h| h.violation(p) <= tol);
        if vw.iter().all(|p| inside(&hu, p) || inside(&hv, p)) {
            Ok(MinOutcome::Convex(w))
        } else {
            Ok(MinOutcome::NotConvex { witness: None })
        }
    }
}

/// One row of an [`EpiDiagnostic`]: Hausdorff distances `δ({u_k ≤ t}, {u ≤ t})`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpiRow {
    pub t: f64,
    pub distances: Vec<f64>,
    /// Distances are non-increasing in `k` (up to `1e-12`).
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpiDiagnostic {
    pub rows: Vec<EpiRow>,
    /// Largest last-index distance over the grid.
    pub final_gap: f64,
    pub monotone: bool,
}

/// Sublevel-set comparison of a sequence against a limit on a `t` grid.
/// Diagnostic only: it says nothing about levels outside the grid.
pub fn epi_convergence_diagnostic(
    seq: &[PLConvexFunction],
    limit: &PLConvexFunction,
    t_grid: &[f64],
) -> Result<EpiDiagnostic> {
    let m = limit.min_value();
    if t_grid.iter().any(|t| (t - m).abs() < EPS_GEO) {
        return Err(Error::InvalidSpec("t grid must avoid min u"));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let target = limit.sublevel_set(t);
        let distances: Vec<f64> = seq
            .iter()
            .map(|u| hausdorff_or_inf(u.sublevel_set(t).as_ref(), target.as_ref()))
            .collect();
        let monotone = distances.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        rows.push(EpiRow { t, distances, monotone });
    }
    let final_gap = rows
        .iter()
        .filter_map(|r| r.distances.last().copied())
        .fold(0.0, f64::max);
    let monotone = rows.iter().all(|r| r.monotone);
    Ok(EpiDiagnostic {
        rows,
        final_gap,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs)
    }

    fn cube(n: usize, lo: f64, hi: f64) -> Polytope {
        let mut a = Vector::zeros(n);
        let mut b = Vector::zeros(n);
        for i in 0..n {
            a[i] = lo;
            b[i] = hi;
        }
        Polytope::cuboid(&a, &b)
    }

    #[test]
    fn cone_function_values() {
        let t1 = Polytope::t_lambda(3, 1.0).unwrap();
        let l = cone_fn(&t1).unwrap();
        assert!((l.eval(&Vector::basis(3, 0)) - 1.0).abs() < 1e-14);
        assert_eq!(l.eval(&Vector::zeros(3)), 0.0);
        assert_eq!(l.eval(&v(&[-1.0, 0.0, 0.0])), f64::INFINITY);
        assert_eq!(l.min_value(), 0.0);
        let two = l.sublevel_set(2.0).unwrap();
        assert!(two.hausdorff_distance(&t1.dilate(2.0)) < 1e-12);
        assert!(matches!(cone_fn(&t1.translate(&v(&[1.0, 1.0, 1.0]))), Err(Error::OriginNotContained)));
    }

    #[test]
    fn cone_function_of_interior_origin_has_full_domain() {
        let k = cube(3, -1.0, 2.0);
        let l = cone_fn(&k).unwrap();
        assert_eq!(*l.domain(), Domain::All);
        let b = l.cone_bound();
        let r = k.circumradius();
        assert!((b.a - 1.0 / r).abs() < 1e-8 / r);
        assert!((l.sublevel_set(0.5).unwrap().hausdorff_distance(&k.dilate(0.5))) < 1e-12);
    }

    #[test]
    fn cone_function_of_segment() {
        let seg = Polytope::segment(Vector::zeros(3), Vector::basis(3, 0) * 4.0);
        let l = cone_fn(&seg).unwrap();
        assert!((l.eval(&v(&[2.0, 0.0, 0.0])) - 0.5).abs() < 1e-15);
        assert_eq!(l.eval(&v(&[2.0, 0.1, 0.0])), f64::INFINITY);
        let s = l.sublevel_set(3.0).unwrap();
        assert_eq!(s.vertices().len(), 2);
        assert!((s.support(&Vector::basis(3, 0)) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_sublevels() {
        let k = Polytope::t_lambda(3, 2.0).unwrap();
        let i = indicator_fn(&k);
        assert!(i.sublevel_set(0.0).unwrap().hausdorff_distance(&k) < 1e-12);
        assert!(i.sublevel_set(5.0).unwrap().hausdorff_distance(&k) < 1e-12);
        assert!(i.sublevel_set(-1.0).is_none());
        assert_eq!(i.eval(&v(&[3.0, 0.0, 0.0])), f64::INFINITY);
        let b = i.cone_bound();
        assert_eq!(b.a, 1.0);
        assert!((b.b - (-1.0 - 2.0)).abs() < 1e-12);
        let shifted = i.add_constant(0.7);
        assert!((shifted.min_value() - 0.7).abs() < 1e-15);
        assert!(shifted.sublevel_set(0.6).is_none());
    }

    #[test]
    fn sublevel_of_two_piece_function_matches_enumeration() {
        // u = max(−x₁, 2x₁) on [−1,1]³, t = 1 → [−1, ½]×[−1,1]².
        let pieces = vec![
            AffinePiece::new(v(&[-1.0, 0.0, 0.0]), 0.0).unwrap(),
            AffinePiece::new(v(&[2.0, 0.0, 0.0]), 0.0).unwrap(),
        ];
        let u = PLConvexFunction::new(pieces, Domain::from_polytope(&cube(3, -1.0, 1.0))).unwrap();
        let s = u.sublevel_set(1.0).unwrap();
        let expected = Polytope::cuboid(&v(&[-1.0, -1.0, -1.0]), &v(&[0.5, 1.0, 1.0]));
        assert!(s.hausdorff_distance(&expected) < 1e-12);
        assert_eq!(s.vertices().len(), 8);
        assert_eq!(u.min_value(), 0.0);
        let argmin = u.sublevel_set(0.0).unwrap();
        assert_eq!(argmin.affine_dim(), 2);
    }

    #[test]
    fn non_coercive_inputs() {
        let flat = vec![
            AffinePiece::new(v(&[0.0, 0.0]), 0.0).unwrap(),
            AffinePiece::new(v(&[1.0, 0.0]), 0.0).unwrap(),
        ];
        assert_eq!(coercivity_check(&flat, &Domain::All).unwrap(), Coercivity::NotCoercive);
        assert!(matches!(PLConvexFunction::new(flat, Domain::All), Err(Error::NotCoercive)));
        let abs = vec![
            AffinePiece::new(v(&[1.0, 0.0]), 0.0).unwrap(),
            AffinePiece::new(v(&[-1.0, 0.0]), 0.0).unwrap(),
            AffinePiece::new(v(&[0.0, 1.0]), 0.0).unwrap(),
            AffinePiece::new(v(&[0.0, -1.0]), 0.0).unwrap(),
        ];
        assert!(matches!(coercivity_check(&abs, &Domain::All).unwrap(), Coercivity::Coercive(_)));
    }

    #[test]
    fn empty_domain_rejected() {
        let hs = vec![
            HalfSpace::new(v(&[1.0, 0.0]), -1.0).unwrap(),
            HalfSpace::new(v(&[-1.0, 0.0]), -1.0).unwrap(),
        ];
        let p = vec![AffinePiece::new(Vector::zeros(2), 0.0).unwrap()];
        assert!(matches!(PLConvexFunction::new(p, Domain::Polyhedron(hs)), Err(Error::EmptyDomain)));
    }

    #[test]
    fn min_of_overlapping_cone_pieces_is_cone_of_union() {
        let t1 = Polytope::t_lambda(3, 1.0).unwrap();
        let cut = HalfSpace::new(v(&[1.0, -1.0, 0.0]), 0.0).unwrap();
        let k = t1.clip_halfspace(&HalfSpace::new(v(&[1.0, -1.0, 0.0]), 0.2).unwrap()).unwrap();
        let l = t1.clip_halfspace(&cut.complement().translate(&v(&[-0.1, 0.0, 0.0]))).unwrap();
        let lk = cone_fn(&k).unwrap();
        let ll = cone_fn(&l).unwrap();
        let w = lk.pointwise_min(&ll).unwrap().convex().expect("union is T1");
        let lt = cone_fn(&t1).unwrap();
        for s in [0.5, 1.0, 2.0] {
            let a = w.sublevel_set(s).unwrap();
            let b = lt.sublevel_set(s).unwrap();
            assert!(a.hausdorff_distance(&b) < 1e-9);
        }
        let mx = lk.pointwise_max(&ll).unwrap();
        let kl = cone_fn(&k.clip_all(&[cut.complement().translate(&v(&[-0.1, 0.0, 0.0]))]).unwrap()).unwrap();
        for s in [0.5, 1.5] {
            let a = mx.sublevel_set(s).unwrap();
            let b = kl.sublevel_set(s).unwrap();
            assert!(a.hausdorff_distance(&b) < 1e-9);
        }
    }

    #[test]
    fn dominated_branch_and_disjoint_indicators() {
        let t1 = Polytope::t_lambda(3, 1.0).unwrap();
        let u = cone_fn(&t1).unwrap();
        let w = u.pointwise_min(&u.add_constant(1.0)).unwrap().convex().unwrap();
        for s in [0.0, 0.7, 2.0] {
            assert!(w.sublevel_set(s).unwrap().hausdorff_distance(&u.sublevel_set(s).unwrap()) < 1e-12);
        }
        let a = indicator_fn(&t1);
        let b = indicator_fn(&t1.translate(&v(&[3.0, 0.0, 0.0])));
        assert!(matches!(a.pointwise_min(&b).unwrap(), MinOutcome::NotConvex { .. }));
        assert!(matches!(a.pointwise_max(&b), Err(Error::EmptyDomain)));
        // Overlapping but non-convex union.
        let c = indicator_fn(&Polytope::cuboid(&v(&[0.0, 0.0, 0.0]), &v(&[2.0, 1.0, 1.0])));
        let d = indicator_fn(&Polytope::cuboid(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 2.0, 1.0])));
        assert!(matches!(
            c.pointwise_min(&d).unwrap(),
            MinOutcome::NotConvex { witness: Some(_) }
        ));
    }

    #[test]
    fn indicator_min_of_overlapping_segments() {
        let e1 = Vector::basis(3, 0);
        let a = indicator_fn(&Polytope::segment(Vector::zeros(3), e1 * 0.5));
        let b = indicator_fn(&Polytope::segment(e1 * 0.25, e1));
        let w = a.pointwise_min(&b).unwrap().convex().unwrap();
        let s = w.sublevel_set(0.0).unwrap();
        assert!(s.hausdorff_distance(&Polytope::segment(Vector::zeros(3), e1)) < 1e-12);
    }

    #[test]
    fn transforms_commute_with_sublevel_sets() {
        let t1 = Polytope::t_lambda(3, 1.5).unwrap();
        let u = cone_fn(&t1).unwrap().add_constant(0.3);
        let x = v(&[0.2, -1.0, 0.5]);
        let ut = u.translate(&x).unwrap();
        let phi = LinearMap::random_sln(5, 4, 3);
        let up = u.precompose_linear(&phi).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let s = u.sublevel_set(t).unwrap();
            assert!(ut.sublevel_set(t).unwrap().hausdorff_distance(&s.translate(&x)) < 1e-9);
            assert!(up.sublevel_set(t).unwrap().hausdorff_distance(&s.linear_image(&phi)) < 1e-9);
        }
        assert!((ut.min_value() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn cone_of_image_is_precomposition() {
        let t1 = Polytope::t_lambda(3, 1.0).unwrap();
        let phi = LinearMap::random_sln(9, 5, 3);
        let a = cone_fn(&t1.linear_image(&phi)).unwrap();
        let b = cone_fn(&t1).unwrap().precompose_linear(&phi).unwrap();
        for s in [0.3, 1.0, 2.5] {
            assert!(a.sublevel_set(s).unwrap().hausdorff_distance(&b.sublevel_set(s).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn epi_diagnostic_on_u_h_family() {
        // epi u_h = epi ℓ_[0,e₁/h] ∩ {x₁ ≤ 1} → I_[0,e₁].
        let e1 = Vector::basis(3, 0);
        let seq: Vec<PLConvexFunction> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&h| {
                let seg = Polytope::segment(Vector::zeros(3), e1 * (1.0 / h));
                let l = cone_fn(&seg).unwrap();
                let mut hs = l.domain().halfspaces().to_vec();
                hs.push(HalfSpace::new(e1, 1.0).unwrap());
                PLConvexFunction::new(l.pieces().to_vec(), Domain::Polyhedron(hs)).unwrap()
            })
            .collect();
        let limit = indicator_fn(&Polytope::segment(Vector::zeros(3), e1));
        let d = epi_convergence_diagnostic(&seq, &limit, &[0.05, 0.1, 1.0]).unwrap();
        assert!(d.monotone);
        assert!(d.final_gap < 0.9);
        let same = epi_convergence_diagnostic(&[limit.clone(), limit.clone()], &limit, &[0.5]).unwrap();
        assert_eq!(same.final_gap, 0.0);
        assert!(epi_convergence_diagnostic(&seq, &limit, &[0.0]).is_err());
    }

    #[test]
    fn min_value_matches_vertex_enumeration() {
        let pieces = vec![
            AffinePiece::new(v(&[1.0, 0.5]), -0.3).unwrap(),
            AffinePiece::new(v(&[-0.7, 0.2]), 0.1).unwrap(),
            AffinePiece::new(v(&[0.1, -1.3]), 0.4).unwrap(),
        ];
        let u = PLConvexFunction::new(pieces, Domain::All).unwrap();
        let brute = u
            .epigraph_vertices()
            .iter()
            .map(|p| u.eval(&p.truncate()))
            .fold(f64::INFINITY, f64::min);
        assert!((u.min_value() - brute).abs() < 1e-12);
    }
}
