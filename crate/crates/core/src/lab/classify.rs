//! Recovery of the classification constants of a black-box valuation from
//! probes on segments, cubes and cone functions of `T_λ`.

use alloc::vec;
use alloc::vec::Vec;

use super::checks::{estimate_homogeneity, estimate_real_homogeneity, Homogeneity, S_GRID};
use super::{direction_net, mixed, MinkowskiValuation, RealValuation};
use crate::functionals::cone_lc;
use crate::log_concave::LogConcaveFunction;
use crate::polytope::Polytope;
use crate::vector::Vector;
use crate::{check_user_dim, Error, Result};

/// Recovered constants and their self-consistency.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyReport {
    /// `"minkowski"` or `"real"`.
    pub kind: &'static str,
    pub q: Option<f64>,
    /// `c1, c2, c3` or `c0, cn`.
    pub constants: Vec<(&'static str, f64)>,
    /// `d1..d4` of the cone family (Minkowski only).
    pub d: Option<[f64; 4]>,
    /// Named residuals of the consistency relations.
    pub consistency: Vec<(&'static str, f64)>,
    /// Largest residual on held-out probes.
    pub cross_validation: f64,
    pub homogeneity_spread: f64,
    /// All probes vanished.
    pub trivial: bool,
    pub tolerance: f64,
    pub pass: bool,
}

impl ClassifyReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        if name == "q" {
            return self.q;
        }
        self.constants.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    fn trivial(kind: &'static str, names: &[&'static str], tol: f64) -> Self {
        Self {
            kind,
            q: None,
            constants: names.iter().map(|k| (*k, 0.0)).collect(),
            d: None,
            consistency: Vec::new(),
            cross_validation: 0.0,
            homogeneity_spread: 0.0,
            trivial: true,
            tolerance: tol,
            pass: true,
        }
    }

    fn finish(mut self) -> Self {
        let worst = self
            .consistency
            .iter()
            .map(|(_, r)| *r)
            .fold(self.cross_validation.max(self.homogeneity_spread), f64::max);
        self.pass = self.q.is_some_and(f64::is_finite) && worst <= self.tolerance;
        self
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn segment_probe(n: usize) -> LogConcaveFunction {
    LogConcaveFunction::characteristic(&Polytope::segment(Vector::zeros(n), Vector::basis(n, 0)))
}

/// `(P(λ), M(λ)) = (h(Z(e^{-ℓ_{T_λ}}), e₁), h(Z(e^{-ℓ_{T_λ}}), −e₁))`.
pub(crate) fn cone_probe<Z>(z: &Z, n: usize, lambda: f64) -> Result<(f64, f64)>
where
    Z: MinkowskiValuation + ?Sized,
{
    let e1 = Vector::basis(n, 0);
    let v = z.evaluate(&cone_lc(&Polytope::t_lambda(n, lambda)?)?)?;
    Ok((v.query(&e1), v.query(&-e1)))
}

/// `d1..d4` from `P(λ) = d₁λ + (d₃+d₄)λ²/(n+1)!` and
/// `M(λ) = d₂λ + (d₄−d₃)λ²/(n+1)!` at `λ = 1, 2`.
pub(crate) fn cone_constants<Z>(z: &Z, n: usize) -> Result<[f64; 4]>
where
    Z: MinkowskiValuation + ?Sized,
{
    let f = factorial(n + 1);
    let (p1, m1) = cone_probe(z, n, 1.0)?;
    let (p2, m2) = cone_probe(z, n, 2.0)?;
    let a = f * (p2 - 2.0 * p1) / 2.0;
    let b = f * (m2 - 2.0 * m1) / 2.0;
    let d1 = 2.0 * p1 - p2 / 2.0;
    let d2 = 2.0 * m1 - m2 / 2.0;
    Ok([d1, d2, (a - b) / 2.0, (a + b) / 2.0])
}

fn held_out_body(n: usize) -> Polytope {
    let mut x = Vector::zeros(n);
    for i in 0..n {
        x[i] = [0.3, -0.2, 0.1, -0.4][i];
    }
    Polytope::t_lambda(n, 1.5).expect("positive").translate(&x)
}

/// Constants of `Z(f) = c₁[f^q] + c₂(−[f^q]) + c₃ m(f^q)`, recovered from
/// `χ_{[0,e₁]}`, `χ_{[0,1]ⁿ}` and the cone probes `e^{-ℓ_{T_λ}}`.
pub fn classify_mink<Z>(z: &Z, n: usize, tol: f64) -> Result<ClassifyReport>
where
    Z: MinkowskiValuation + ?Sized,
{
    check_user_dim(n)?;
    if n < 3 {
        return Err(Error::DimensionHypothesis("Minkowski classification", 3));
    }
    let e1 = Vector::basis(n, 0);
    let seg = segment_probe(n);
    let cube = LogConcaveFunction::characteristic(&Polytope::unit_cube(n));
    let mut hom = estimate_homogeneity(z, &seg, &S_GRID)?;
    if hom.trivial {
        hom = estimate_homogeneity(z, &cube, &S_GRID)?;
    }
    if hom.trivial {
        return Ok(ClassifyReport::trivial("minkowski", &["c1", "c2", "c3"], tol));
    }
    let q = hom.q.unwrap_or(f64::NAN);
    let zs = z.evaluate(&seg)?;
    let c1 = zs.query(&e1);
    let c2 = zs.query(&-e1);
    let c3 = 2.0 * (z.evaluate(&cube)?.query(&e1) - c1);
    let d = cone_constants(z, n)?;
    let fact = factorial(n + 1);
    let consistency = vec![
        ("c1 - q d1", mixed(c1 - q * d[0], c1)),
        ("c2 - q d2", mixed(c2 - q * d[1], c2)),
        ("c3 - q^(n+1) d3/(n+1)!", mixed(c3 - libm::pow(q, (n + 1) as f64) * d[2] / fact, c3)),
        ("d4", d[3].abs()),
    ];

    let dirs = direction_net(n, 50);
    let mut cv = 0.0f64;
    let k = held_out_body(n);
    let s = 1.7;
    let zk = z.evaluate(&LogConcaveFunction::characteristic(&k).scale(s)?)?;
    let sq = libm::pow(s, q);
    let mk = k.moment_vector();
    for u in &dirs {
        let pred = sq * (c1 * k.support(u) + c2 * k.support(&-*u) + c3 * mk.dot(u));
        cv = cv.max(mixed(zk.query(u) - pred, pred));
    }
    let mut lo = Vector::zeros(n);
    let mut hi = Vector::zeros(n);
    for i in 0..n {
        lo[i] = -0.5;
        hi[i] = 1.0;
    }
    let box_k = Polytope::cuboid(&lo, &hi);
    let zc = z.evaluate(&cone_lc(&box_k)?)?;
    let mb = box_k.moment_vector();
    for u in &dirs {
        let pred = d[0] * box_k.support(u)
            + d[1] * box_k.support(&-*u)
            + d[2] * mb.dot(u)
            + d[3] * box_k.moment_body_support(u);
        cv = cv.max(mixed(zc.query(u) - pred, pred));
    }

    Ok(ClassifyReport {
        kind: "minkowski",
        q: Some(q),
        constants: vec![("c1", c1), ("c2", c2), ("c3", c3)],
        d: Some(d),
        consistency,
        cross_validation: cv,
        homogeneity_spread: hom.spread,
        trivial: false,
        tolerance: tol,
        pass: false,
    }
    .finish())
}

/// Constants of `Y(f) = c₀ (max f)^q + c_n ∫ f^q`, from `s·χ_{{0}}` and
/// `χ_{[0,1]ⁿ}`.
pub fn classify_real<Y>(y: &Y, n: usize, tol: f64) -> Result<ClassifyReport>
where
    Y: RealValuation + ?Sized,
{
    check_user_dim(n)?;
    let point = LogConcaveFunction::characteristic(&Polytope::point(Vector::zeros(n)));
    let cube = LogConcaveFunction::characteristic(&Polytope::unit_cube(n));
    let hp = estimate_real_homogeneity(y, &point, &S_GRID)?;
    let hc = estimate_real_homogeneity(y, &cube, &S_GRID)?;
    let hom: &Homogeneity = if hp.trivial { &hc } else { &hp };
    if hom.trivial {
        return Ok(ClassifyReport::trivial("real", &["c0", "cn"], tol));
    }
    let q = hom.q.unwrap_or(f64::NAN);
    let c0 = y.evaluate(&point)?;
    let cn = y.evaluate(&cube)? - c0;
    let mut consistency = Vec::new();
    if let (Some(a), Some(b)) = (hp.q, hc.q) {
        consistency.push(("q point vs cube", (a - b).abs()));
    }

    let k = held_out_body(n);
    let mut cv = 0.0f64;
    for s in [0.6, 1.3] {
        let pred = libm::pow(s, q) * (c0 + cn * k.volume());
        let got = y.evaluate(&LogConcaveFunction::characteristic(&k).scale(s)?)?;
        cv = cv.max(mixed(got - pred, pred));
    }
    if q > 0.0 {
        let t = Polytope::t_lambda(n, 2.0)?;
        let pred = c0 + cn * factorial(n) * t.volume() / libm::pow(q, n as f64);
        let got = y.evaluate(&cone_lc(&t)?)?;
        cv = cv.max(mixed(got - pred, pred));
    }

    Ok(ClassifyReport {
        kind: "real",
        q: Some(q),
        constants: vec![("c0", c0), ("cn", cn)],
        d: None,
        consistency,
        cross_validation: cv,
        homogeneity_spread: hom.spread,
        trivial: false,
        tolerance: tol,
        pass: false,
    }
    .finish())
}
