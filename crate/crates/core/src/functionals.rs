//! Functionals on log-concave functions by the layer-cake principle.
//!
//! For `f = e^{ℓ − p·u}` and `Q = p·q`,
//!
//! ```text
//! ∫₀^∞ F({f^q ≥ t}) dt = e^{qℓ − Q(shift + s₀)} ∫_{s₀}^∞ F({u₀ ≤ s}) Q e^{−Q(s − s₀)} ds
//! ```
//!
//! where `u₀` is the unshifted shape of `u` and `s₀ = min u₀`. Between
//! consecutive heights of epigraph vertices the sublevel polytopes keep their
//! combinatorial type, so `V_n` is a polynomial of degree `n`, the moment
//! vector one of degree `n+1` and every support value is affine. Each finite
//! panel is therefore sampled at `n+2` Chebyshev nodes and integrated
//! against Lagrange weights. On panels much longer than `1/Q` the nodes sit
//! near the panel start, where the weight lives; past the last vertex height the integrand is a
//! polynomial on a half-line, which a Gauss–Laguerre rule integrates
//! exactly. Every functional becomes a finite weighted sum of sublevel
//! polytopes ([`Layers`]).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use once_cell::race::OnceBox;

use crate::convex_fn::{cone_fn, ConeBound, PLConvexFunction};
use crate::log_concave::LogConcaveFunction;
use crate::polytope::{enumerate_vertices, HalfSpace, Polytope};
use crate::quadrature;
use crate::vector::Vector;
use crate::{lp, Error, Result};

/// Accuracy knobs for the finite panels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_subdivisions: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rel_tol > 0.0 && self.rel_tol.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositive {
                name: "rel_tol",
                value: self.rel_tol,
            })
        }
    }
}

/// Volume of the Euclidean unit ball in `ℝⁿ`, `n ≤ 4`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => panic!("unit_ball_volume: n = {n} > 4"),
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Dominating function for moment layers from a cone bound
/// `u(x) > a|x| + b`: `|h(m({e^{-u} ≥ t}), z)| ≤ (v_n/a^{n+1})(−log t − b)^{n+1}`
/// for unit `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl TailBound {
    pub fn new(bound: ConeBound, n: usize) -> Self {
        Self {
            a: bound.a,
            b: bound.b,
            n,
        }
    }

    fn constant(&self) -> f64 {
        unit_ball_volume(self.n) / libm::pow(self.a, (self.n + 1) as f64)
    }

    /// Bound at level `t` (`0 < t ≤ e^{-b}`).
    pub fn at_level(&self, t: f64) -> f64 {
        let r = (-libm::log(t) - self.b).max(0.0);
        self.constant() * libm::pow(r, (self.n + 1) as f64)
    }

    /// Bound on the sublevel `{u ≤ s}` moment.
    pub fn at_height(&self, s: f64) -> f64 {
        self.constant() * libm::pow((s - self.b).max(0.0), (self.n + 1) as f64)
    }

    /// `∫_S^∞ at_height(s) q e^{-qs} ds`, the bound on what levels `s > S`
    /// contribute to the moment of `e^{-qu}`.
    pub fn mass_beyond(&self, s_from: f64, q: f64) -> f64 {
        let k = self.n + 1;
        let x = (q * (s_from - self.b)).max(0.0);
        // Γ(k+1, x)/k! = e^{-x} Σ_{j≤k} x^j/j!.
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..=k {
            term *= x / j as f64;
            sum += term;
        }
        let start = s_from.max(self.b);
        self.constant() * factorial(k) / libm::pow(q, k as f64)
            * libm::exp(-q * start)
            * sum
    }

    /// Smallest height (to `1e-6` relative) with `mass_beyond ≤ eps`.
    pub fn horizon(&self, q: f64, eps: f64) -> f64 {
        let mut lo = self.b;
        if self.mass_beyond(lo, q) <= eps {
            return lo;
        }
        let mut hi = self.b + 1.0;
        while self.mass_beyond(hi, q) > eps {
            hi = self.b + 2.0 * (hi - self.b);
        }
        for _ in 0..200 {
            if hi - lo <= 1e-6 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.mass_beyond(mid, q) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

struct Panel {
    a: f64,
    b: f64,
    nodes: Nodes,
}

/// Shape-level sampling of sublevel sets, shared across `q`, scalings and
/// shifts of one base function.
pub(crate) struct LayerProfile {
    s0: f64,
    last: f64,
    panels: Vec<Panel>,
    constant: bool,
    tails: [OnceBox<ExponentNodes>; TAIL_SLOTS],
}

const TAIL_SLOTS: usize = 8;

/// Panels longer than `LONG_PANEL/Q` are sampled on `[a, a + LONG_PANEL/Q]`.
const LONG_PANEL: f64 = 12.0;

/// `e^{-x}` underflows past this.
const X_MAX: f64 = 745.0;

/// Sampled sublevel sets at nodes `s`.
#[derive(Clone)]
struct Nodes {
    s: Vec<f64>,
    bodies: Vec<Option<Polytope>>,
}

/// Exponent-dependent samples: the half-line and the long panels.
struct ExponentNodes {
    key: u64,
    tail: Vec<Option<Polytope>>,
    long: Vec<Option<Nodes>>,
}

fn exponent_nodes(u: &PLConvexFunction, prof: &LayerProfile, big_q: f64) -> (Vec<Option<Polytope>>, Vec<Option<Nodes>>) {
    let key = big_q.to_bits();
    let n = u.dim();
    let compute = || ExponentNodes {
        key,
        tail: quadrature::laguerre()
            .nodes
            .iter()
            .map(|x| u.shape_sublevel(prof.last + x / big_q))
            .collect(),
        long: prof
            .panels
            .iter()
            .map(|p| {
                (big_q * (p.b - p.a) > LONG_PANEL).then(|| {
                    let s = chebyshev_nodes(p.a, p.a + LONG_PANEL / big_q, n + 2);
                    let bodies = s.iter().map(|&x| u.shape_sublevel(x)).collect();
                    Nodes { s, bodies }
                })
            })
            .collect(),
    };
    let unpack = |e: &ExponentNodes| (e.tail.clone(), e.long.clone());
    for slot in &prof.tails {
        match slot.get() {
            Some(e) if e.key == key => return unpack(e),
            Some(_) => continue,
            None => {
                let e = compute();
                let out = unpack(&e);
                let _ = slot.set(Box::new(e));
                return out;
            }
        }
    }
    unpack(&compute())
}

fn chebyshev_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let c = libm::cos((2 * k + 1) as f64 * PI / (2 * m) as f64);
            0.5 * (a + b) + 0.5 * (b - a) * c
        })
        .collect()
}

fn lagrange(nodes: &[f64], k: usize, s: f64) -> f64 {
    let mut v = 1.0;
    for (j, &x) in nodes.iter().enumerate() {
        if j != k {
            v *= (s - x) / (nodes[k] - x);
        }
    }
    v
}

fn profile(u: &PLConvexFunction) -> &LayerProfile {
    u.profile_cell().get_or_init(|| {
        let n = u.dim();
        let breaks = u.shape_breakpoints();
        let panels = breaks
            .windows(2)
            .map(|w| {
                let s = chebyshev_nodes(w[0], w[1], n + 2);
                let bodies = s.iter().map(|&x| u.shape_sublevel(x)).collect();
                Panel {
                    a: w[0],
                    b: w[1],
                    nodes: Nodes { s, bodies },
                }
            })
            .collect();
        Box::new(LayerProfile {
            s0: breaks[0],
            last: *breaks.last().unwrap(),
            panels,
            constant: u.is_constant_on_domain(),
            tails: Default::default(),
        })
    })
}

/// Per-evaluation numerics, reported alongside results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerDiagnostics {
    /// Finite panels between epigraph-vertex heights.
    pub panels: usize,
    /// Leaf intervals of the adaptive weight integration.
    pub quadrature_panels: usize,
    pub converged: bool,
    /// Height (in `u`) where the half-line rule starts.
    pub tail_start: f64,
    /// Height beyond which the cone-bound tail estimate drops below
    /// `rel_tol` (informational; the half-line is integrated exactly).
    pub horizon: f64,
    /// True when the indicator fast path was used.
    pub exact: bool,
}

/// `∫₀^∞ F({f^q ≥ t}) dt = Σ wᵢ F(Pᵢ)` for every `F` that is polynomial of
/// low degree along the panels (volume, support, moment vector).
#[derive(Clone, Debug)]
pub struct Layers {
    dim: usize,
    terms: Vec<(f64, Polytope)>,
    diagnostics: LayerDiagnostics,
}

impl Layers {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, Polytope)] {
        &self.terms
    }

    pub fn diagnostics(&self) -> &LayerDiagnostics {
        &self.diagnostics
    }

    /// `V_n(f^q)`.
    pub fn volume(&self) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.volume()).sum()
    }

    /// `h([f^q], z)`.
    pub fn support(&self, z: &Vector) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.support(z)).sum()
    }

    /// `m(f^q)`.
    pub fn moment(&self) -> Vector {
        self.terms
            .iter()
            .fold(Vector::zeros(self.dim), |acc, (w, p)| acc + p.moment_vector() * *w)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name: "q", value: q })
    }
}

/// Weighted sublevel polytopes representing the layer integrals of `f^q`.
pub fn layers(f: &LogConcaveFunction, q: f64, cfg: &QuadratureConfig) -> Result<Layers> {
    check_q(q)?;
    cfg.validate()?;
    let u = f.base();
    let n = u.dim();
    let prof = profile(u);
    let big_q = f.power() * q;
    let log_pref = q * f.log_scale() - big_q * (u.shift() + prof.s0);
    let pref = libm::exp(log_pref);
    let bound = TailBound::new(u.cone_bound(), n);
    let horizon = bound.horizon(big_q, cfg.rel_tol);

    if prof.constant {
        let body = u.shape_sublevel(prof.s0).ok_or(Error::EmptyDomain)?;
        return Ok(Layers {
            dim: n,
            terms: vec![(pref, body)],
            diagnostics: LayerDiagnostics {
                panels: 0,
                quadrature_panels: 0,
                converged: true,
                tail_start: prof.s0 + u.shift(),
                horizon,
                exact: true,
            },
        });
    }

    let (tail, long) = exponent_nodes(u, prof, big_q);
    let mut terms = Vec::new();
    let mut quadrature_panels = 0;
    let mut converged = true;
    for (panel, long) in prof.panels.iter().zip(&long) {
        let start = libm::exp(-big_q * (panel.a - prof.s0));
        if start == 0.0 {
            break;
        }
        let nodes = long.as_ref().unwrap_or(&panel.nodes);
        // x = Q(s − a); the panel contributes e^{−Q(a−s₀)} ∫ e^{−x} F(s(x)) dx.
        let out = quadrature::integrate(
            |x, o| {
                let w = libm::exp(-x);
                let s = panel.a + x / big_q;
                for (k, v) in o.iter_mut().enumerate() {
                    *v = w * lagrange(&nodes.s, k, s);
                }
            },
            0.0,
            (big_q * (panel.b - panel.a)).min(X_MAX),
            nodes.s.len(),
            cfg.rel_tol,
            1e-3 * cfg.rel_tol,
            cfg.max_subdivisions,
        );
        quadrature_panels += out.panels;
        converged &= out.converged;
        for (w, body) in out.values.iter().zip(&nodes.bodies) {
            if let Some(p) = body {
                terms.push((pref * start * w, p.clone()));
            }
        }
    }
    let rule = quadrature::laguerre();
    let decay = libm::exp(-big_q * (prof.last - prof.s0));
    for (w, body) in rule.weights.iter().zip(tail) {
        if let Some(p) = body {
            terms.push((pref * decay * w, p));
        }
    }
    Ok(Layers {
        dim: n,
        terms,
        diagnostics: LayerDiagnostics {
            panels: prof.panels.len(),
            quadrature_panels,
            converged,
            tail_start: prof.last + u.shift(),
            horizon,
            exact: false,
        },
    })
}

/// `V₀(f) = max f`.
pub fn v0(f: &LogConcaveFunction) -> f64 {
    f.max_value()
}

/// `V₀(f)^q`, any real `q`.
pub fn v0_pow(f: &LogConcaveFunction, q: f64) -> f64 {
    libm::exp(q * f.log_max())
}

/// `V_n(f^q) = ∫ f^q`.
pub fn vn_pow(f: &LogConcaveFunction, q: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(layers(f, q, cfg)?.volume())
}

/// Level set body `[f^q]`.
pub fn level_set_body(f: &LogConcaveFunction, q: f64, cfg: &QuadratureConfig) -> Result<SupportEvaluator> {
    let l = layers(f, q, cfg)?;
    Ok(SupportEvaluator::from_layers(Arc::new(l)).with_degree(q).with_provenance("level set body"))
}

/// `m(f^q) = ∫ x f^q(x) dx`.
pub fn moment_vector_fn(f: &LogConcaveFunction, q: f64, cfg: &QuadratureConfig) -> Result<Vector> {
    Ok(layers(f, q, cfg)?.moment())
}

/// Gamma-integral values for `f = e^{-qℓ_K}` with `{ℓ_K ≤ s} = sK`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeClosedForms {
    /// `n!·V_n(K)/qⁿ`.
    pub vn: f64,
    /// `h(K, z)/q`.
    pub lsb: f64,
    /// `(n+1)!·m(K)/q^{n+1}`.
    pub mv: Vector,
}

pub fn cone_closed_forms(k: &Polytope, q: f64, z: &Vector) -> Result<ConeClosedForms> {
    check_q(q)?;
    let n = k.dim();
    if !k.contains(&Vector::zeros(n)) {
        return Err(Error::OriginNotContained);
    }
    Ok(ConeClosedForms {
        vn: factorial(n) * k.volume() / libm::pow(q, n as f64),
        lsb: k.support(z) / q,
        mv: k.moment_vector() * (factorial(n + 1) / libm::pow(q, (n + 1) as f64)),
    })
}

/// `e^{-ℓ_K}`.
pub fn cone_lc(k: &Polytope) -> Result<LogConcaveFunction> {
    Ok(LogConcaveFunction::from_convex(cone_fn(k)?))
}

type CustomFn = dyn Fn(&Vector) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Layers(Arc<Layers>),
    Point(Vector),
    Body(Polytope),
    Custom(Arc<CustomFn>),
}

#[derive(Clone)]
struct Term {
    kind: Kind,
    factor: f64,
    reflect: bool,
}

/// A lazily evaluated support function, a nonnegative combination of level
/// set bodies, polytopes, points and custom sublinear functions.
#[derive(Clone)]
pub struct SupportEvaluator {
    dim: usize,
    terms: Vec<Term>,
    degree: Option<f64>,
    provenance: String,
}

impl fmt::Debug for SupportEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportEvaluator")
            .field("dim", &self.dim)
            .field("terms", &self.terms.len())
            .field("degree", &self.degree)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SupportEvaluator {
    fn single(dim: usize, kind: Kind) -> Self {
        Self {
            dim,
            terms: vec![Term {
                kind,
                factor: 1.0,
                reflect: false,
            }],
            degree: None,
            provenance: String::new(),
        }
    }

    /// The body `{0}`.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            degree: None,
            provenance: String::from("zero"),
        }
    }

    pub fn from_layers(layers: Arc<Layers>) -> Self {
        Self::single(layers.dim(), Kind::Layers(layers))
    }

    pub fn from_point(x: Vector) -> Self {
        Self::single(x.dim(), Kind::Point(x))
    }

    pub fn from_body(k: Polytope) -> Self {
        Self::single(k.dim(), Kind::Body(k))
    }

    /// Wraps a support function. The caller vouches for sublinearity.
    pub fn custom(dim: usize, h: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Self::single(dim, Kind::Custom(Arc::new(h)))
    }

    pub fn with_degree(mut self, q: f64) -> Self {
        self.degree = Some(q);
        self
    }

    pub fn with_provenance(mut self, p: &str) -> Self {
        self.provenance = String::from(p);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree of homogeneity, when known.
    pub fn degree(&self) -> Option<f64> {
        self.degree
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Diagnostics of every layer-cake term.
    pub fn layer_diagnostics(&self) -> impl Iterator<Item = &LayerDiagnostics> {
        self.terms.iter().filter_map(|t| match &t.kind {
            Kind::Layers(l) => Some(l.diagnostics()),
            _ => None,
        })
    }

    pub fn query(&self, z: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let w = if t.reflect { -*z } else { *z };
                let v = match &t.kind {
                    Kind::Layers(l) => l.support(&w),
                    Kind::Point(x) => x.dot(&w),
                    Kind::Body(k) => k.support(&w),
                    Kind::Custom(h) => h(&w),
                };
                t.factor * v
            })
            .sum()
    }

    /// Minkowski sum.
    pub fn plus(mut self, other: SupportEvaluator) -> Self {
        self.terms.extend(other.terms);
        if self.degree != other.degree {
            self.degree = None;
        }
        self
    }

    /// `c·K`; negative `c` reflects, `c·K = |c|(−K)`.
    pub fn scaled(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.factor *= c.abs();
            if c < 0.0 {
                t.reflect = !t.reflect;
            }
        }
        self
    }

    /// `−K`.
    pub fn reflected(self) -> Self {
        self.scaled(-1.0)
    }
}

/// `{x : x·z ≤ S(z) for all z in directions}`. Fails when the directions do
/// not positively span `ℝⁿ`.
pub fn polytopal_outer_approx(s: &SupportEvaluator, directions: &[Vector]) -> Result<Polytope> {
    let n = s.dim();
    let vals: Vec<f64> = directions.iter().map(|z| s.query(z)).collect();
    let rows: Vec<Vec<f64>> = directions.iter().map(|z| z.as_slice().to_vec()).collect();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; n];
            c[i] = sign;
            match lp::maximize(&c, &rows, &vals) {
                lp::LpOutcome::Optimal { .. } => {}
                lp::LpOutcome::Unbounded => return Err(Error::NotSpanning),
                lp::LpOutcome::Infeasible => return Err(Error::Lp("support values inconsistent")),
            }
        }
    }
    // Chebyshev centre: maximize r with z·c + r|z| ≤ S(z).
    let mut crow: Vec<Vec<f64>> = rows.clone();
    for (r, z) in crow.iter_mut().zip(directions) {
        r.push(z.norm());
    }
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let lp::LpOutcome::Optimal { x, value } = lp::maximize(&obj, &crow, &vals) {
        if value > 1e-7 * scale {
            let c = Vector::from_slice(&x[..n]);
            // Polar duality around the centre.
            let pts: Vec<Vector> = directions
                .iter()
                .zip(&vals)
                .map(|(z, v)| *z * (1.0 / (v - z.dot(&c))))
                .collect();
            let dual = Polytope::hull_unchecked(&pts);
            let verts: Vec<Vector> = dual
                .facets()
                .iter()
                .filter(|h| h.offset() > 0.0)
                .map(|h| *h.normal() * (1.0 / h.offset()) + c)
                .collect();
            return Ok(Polytope::hull_unchecked(&verts));
        }
    }
    let hs: Vec<HalfSpace> = directions
        .iter()
        .zip(&vals)
        .filter_map(|(z, v)| HalfSpace::new(*z, *v).ok())
        .collect();
    let verts = enumerate_vertices(&hs, n);
    if verts.is_empty() {
        return Err(Error::Lp("empty outer approximation"));
    }
    Ok(Polytope::hull_unchecked(&verts))
}
