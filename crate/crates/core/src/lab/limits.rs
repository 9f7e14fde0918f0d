//! Limit experiments along the `u_h` families.
//!
//! Both sequences are assembled from actual evaluations through the
//! valuation identity and compared with their closed forms
//!
//! ```text
//! c1c2:  d₁(1 − e^{−qh})/h                    → q d₁
//! c3d4:  a(1 − e^{−qh})/h² − b e^{−qh}/h      → +∞ | qb/2 | −∞  as  b <,=,> qa
//! ```

use alloc::vec;
use alloc::vec::Vec;

use super::checks::ls_slope;
use super::classify::{cone_constants, factorial};
use super::pairs::{limit_c1c2_pair, limit_c3d4_pair};
use super::{mixed, MinkowskiSpec, MinkowskiValuation};
use crate::convex_fn::cone_fn;
use crate::log_concave::LogConcaveFunction;
use crate::polytope::Polytope;
use crate::vector::Vector;
use crate::{check_user_dim, Error, Result};

/// Extrapolation depth.
const DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitCase {
    PlusInfinity,
    Finite(f64),
    MinusInfinity,
}

impl LimitCase {
    pub fn name(&self) -> &'static str {
        match self {
            LimitCase::PlusInfinity => "+inf",
            LimitCase::Finite(_) => "finite",
            LimitCase::MinusInfinity => "-inf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitRow {
    pub h: f64,
    /// Sequence value assembled from evaluations.
    pub value: f64,
    /// Closed form at this `h`.
    pub model: f64,
    /// `value` against `model`.
    pub residual: f64,
    /// Direct evaluation of `h(Z(u_h), e₁)` against the assembled one.
    pub identity_residual: f64,
}

/// Classification of a sequence with `b` scaled by `factor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbed {
    pub factor: f64,
    pub case: LimitCase,
    /// Monotone over the smaller half of the schedule.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitTable {
    pub experiment: &'static str,
    pub rows: Vec<LimitRow>,
    /// `(name, value)` of the constants used: `q`, `d1`, and `a`, `b` for c3d4.
    pub params: Vec<(&'static str, f64)>,
    /// `q d₁` (c1c2) or `q b / 2` (c3d4).
    pub reference: f64,
    pub extrapolated: f64,
    /// `|extrapolated − reference|`.
    pub error: f64,
    /// Fitted order of `|value − reference|` in `h`.
    pub observed_rate: f64,
    pub case: LimitCase,
    pub perturbed: Vec<Perturbed>,
}

impl LimitTable {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.identity_residual))
    }
}

/// Value at `h = 0` of the polynomial through the last `depth` points
/// (Neville). On a halving schedule this is Richardson extrapolation.
pub fn richardson(hs: &[f64], vs: &[f64], depth: usize) -> f64 {
    let m = depth.min(hs.len()).min(vs.len());
    if m == 0 {
        return f64::NAN;
    }
    let h = &hs[hs.len() - m..];
    let mut p: Vec<f64> = vs[vs.len() - m..].to_vec();
    for k in 1..m {
        for i in 0..m - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

fn check_schedule(n: usize, hs: &[f64]) -> Result<()> {
    check_user_dim(n)?;
    if n < 3 {
        return Err(Error::DimensionHypothesis("Minkowski limit experiments", 3));
    }
    if hs.len() < 2 || hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSpec("h schedule must be positive and strictly decreasing"));
    }
    Ok(())
}

fn observed_rate(hs: &[f64], vs: &[f64], reference: f64) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = hs
        .iter()
        .zip(vs)
        .filter_map(|(h, v)| {
            let e = (v - reference).abs();
            (e > 1e-9 * reference.abs().max(1.0)).then(|| (libm::log(*h), libm::log(e)))
        })
        .unzip();
    if x.len() < 2 {
        f64::NAN
    } else {
        ls_slope(&x, &y)
    }
}

fn e1_support<Z: MinkowskiValuation + ?Sized>(z: &Z, f: &LogConcaveFunction) -> Result<f64> {
    let n = f.dim();
    Ok(z.evaluate(f)?.query(&Vector::basis(n, 0)))
}

/// `h(Z(ℓ_{[0,e₁/h]}), e₁) + h(Z(I_{{e₁}} + h), e₁) − h(Z(ℓ_h), e₁)` along the
/// schedule, against `d₁(1 − e^{−qh})/h` with `d₁ = c₁/q`.
pub fn limit_experiment_c1c2(spec: &MinkowskiSpec, n: usize, h_schedule: &[f64]) -> Result<LimitTable> {
    spec.validate()?;
    check_schedule(n, h_schedule)?;
    let q = spec.q;
    let d1 = spec.c1 / q;
    let e1 = Vector::basis(n, 0);
    let point = LogConcaveFunction::characteristic(&Polytope::point(e1));
    let mut rows = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let seg = Polytope::segment(Vector::zeros(n), e1 * (1.0 / h));
        let ell = cone_fn(&seg)?;
        let a = e1_support(spec, &LogConcaveFunction::from_convex(ell.clone()))?;
        let c = e1_support(spec, &point.shift_exponent(h))?;
        let b = e1_support(spec, &LogConcaveFunction::from_convex(ell.translate(&e1)?.add_constant(h)))?;
        let value = a + c - b;
        let model = d1 * (1.0 - libm::exp(-q * h)) / h;
        let direct = e1_support(spec, &limit_c1c2_pair(n, h)?.0)?;
        rows.push(LimitRow {
            h,
            value,
            model,
            residual: mixed(value - model, model),
            identity_residual: mixed(direct - value, a),
        });
    }
    let vs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let reference = q * d1;
    let extrapolated = richardson(h_schedule, &vs, DEPTH);
    Ok(LimitTable {
        experiment: "c1c2",
        params: vec![("q", q), ("d1", d1)],
        reference,
        extrapolated,
        error: (extrapolated - reference).abs(),
        observed_rate: observed_rate(h_schedule, &vs, reference),
        case: LimitCase::Finite(extrapolated),
        perturbed: Vec::new(),
        rows,
    })
}

/// Classifies `S(h)` from the leading coefficient `α` of `S(h) = α/h + β + O(h)`.
/// `floor` bounds the roundoff in `h·value`.
fn classify_sequence(hs: &[f64], vs: &[f64], alpha_scale: f64, floor: f64) -> (LimitCase, bool) {
    let g: Vec<f64> = hs.iter().zip(vs).map(|(h, v)| h * v).collect();
    let alpha = richardson(hs, &g, DEPTH);
    let tail = &vs[vs.len() / 2..];
    if alpha.abs() <= (1e-4 * alpha_scale).max(floor) {
        let rest: Vec<f64> = hs.iter().zip(vs).map(|(h, v)| v - alpha / h).collect();
        let beta = richardson(hs, &rest, DEPTH);
        (LimitCase::Finite(beta), true)
    } else if alpha > 0.0 {
        (LimitCase::PlusInfinity, tail.windows(2).all(|w| w[1] > w[0]))
    } else {
        (LimitCase::MinusInfinity, tail.windows(2).all(|w| w[1] < w[0]))
    }
}

/// The combination `a(1 − e^{−qh})/h² − b e^{−qh}/h` assembled as
/// `h(Z(u_h), e₁) − d₁(1 − e^{−qh})/h`, with `h(Z(u_h), e₁)` obtained from
/// `T_{1/h}` probes through the valuation identity. `d₁` and
/// `a = (d₃+d₄)/(n+1)!` come from cone probes, `b = c₃/qⁿ` from the segment
/// and cube probes. The limit case is classified for `b` and for `b`
/// scaled by `0.9` and `1.1`.
pub fn limit_experiment_c3d4(spec: &MinkowskiSpec, n: usize, h_schedule: &[f64]) -> Result<LimitTable> {
    spec.validate()?;
    check_schedule(n, h_schedule)?;
    let q = spec.q;
    let e1 = Vector::basis(n, 0);
    let d = cone_constants(spec, n)?;
    let d1 = d[0];
    let a = (d[2] + d[3]) / factorial(n + 1);
    let seg = LogConcaveFunction::characteristic(&Polytope::segment(Vector::zeros(n), e1));
    let cube = LogConcaveFunction::characteristic(&Polytope::unit_cube(n));
    let c3 = 2.0 * (e1_support(spec, &cube)? - e1_support(spec, &seg)?);
    let b = c3 / libm::pow(q, n as f64);

    let mut face = vec![Vector::zeros(n)];
    face.extend((1..n).map(|i| Vector::basis(n, i)));
    let face = Polytope::hull(&face)?.ok_or(Error::EmptyInput)?;
    let face_fn = cone_fn(&face)?.translate(&e1)?;

    let mut rows = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let ell = cone_fn(&Polytope::t_lambda(n, 1.0 / h)?)?;
        let va = e1_support(spec, &LogConcaveFunction::from_convex(ell.clone()))?;
        let vb = e1_support(spec, &LogConcaveFunction::from_convex(ell.translate(&e1)?.add_constant(h)))?;
        let vc = e1_support(spec, &LogConcaveFunction::from_convex(face_fn.add_constant(h)))?;
        let assembled = va + vc - vb;
        let decay = libm::exp(-q * h);
        let value = assembled - d1 * (1.0 - decay) / h;
        let model = a * (1.0 - decay) / (h * h) - b * decay / h;
        let direct = e1_support(spec, &limit_c3d4_pair(n, h)?.0)?;
        rows.push(LimitRow {
            h,
            value,
            model,
            residual: mixed(value - model, va),
            identity_residual: mixed(direct - assembled, va),
        });
    }
    let vs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let alpha_scale = (a * q).abs() + b.abs();
    let floor = 1e-10 * d1.abs().max(1.0);
    let (case, _) = classify_sequence(h_schedule, &vs, alpha_scale, floor);
    let perturbed = [0.9, 1.1]
        .into_iter()
        .map(|factor| {
            let shifted: Vec<f64> = h_schedule
                .iter()
                .zip(&vs)
                .map(|(h, v)| v - (factor - 1.0) * b * libm::exp(-q * h) / h)
                .collect();
            let (case, monotone) = classify_sequence(h_schedule, &shifted, alpha_scale, floor);
            Perturbed { factor, case, monotone }
        })
        .collect();
    let reference = q * b / 2.0;
    let extrapolated = match case {
        LimitCase::Finite(v) => v,
        LimitCase::PlusInfinity => f64::INFINITY,
        LimitCase::MinusInfinity => f64::NEG_INFINITY,
    };
    Ok(LimitTable {
        experiment: "c3d4",
        params: vec![("q", q), ("d1", d1), ("a", a), ("b", b)],
        reference,
        extrapolated,
        error: (extrapolated - reference).abs(),
        observed_rate: observed_rate(h_schedule, &vs, reference),
        case,
        perturbed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> Vec<f64> {
        (1..=12).map(|k| libm::ldexp(1.0, -k)).collect()
    }

    #[test]
    fn neville_recovers_polynomial_limits() {
        let hs = schedule();
        let vs: Vec<f64> = hs.iter().map(|h| 3.0 + 2.0 * h - h * h + 0.5 * h * h * h).collect();
        assert!((richardson(&hs, &vs, 6) - 3.0).abs() < 1e-13);
        let vs: Vec<f64> = hs.iter().map(|h| (1.0 - libm::exp(-h)) / h).collect();
        assert!((richardson(&hs, &vs, 6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c1c2_converges_to_q_d1() {
        let spec = MinkowskiSpec::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let t = limit_experiment_c1c2(&spec, 3, &schedule()).unwrap();
        assert!(t.error < 1e-8, "{t:?}");
        assert!((t.observed_rate - 1.0).abs() < 0.05, "{}", t.observed_rate);
        assert!(t.max_residual() < 1e-9 && t.max_identity_residual() < 1e-9, "{t:?}");
        let spec = MinkowskiSpec::new(0.7, 1.3, -0.8, 1.7).unwrap();
        let t = limit_experiment_c1c2(&spec, 3, &schedule()).unwrap();
        assert!(t.error < 1e-8 && (t.reference - 0.7).abs() < 1e-15, "{t:?}");
        let zero = MinkowskiSpec::new(0.0, 0.5, 0.3, 1.0).unwrap();
        let t = limit_experiment_c1c2(&zero, 3, &schedule()).unwrap();
        assert!(t.rows.iter().all(|r| r.value.abs() < 1e-8));
    }

    #[test]
    fn c3d4_cases() {
        for (spec, n) in [
            (MinkowskiSpec::new(1.0, 0.5, -2.0, 1.5).unwrap(), 3),
            (MinkowskiSpec::new(0.3, 0.0, 1.2, 0.8).unwrap(), 3),
            (MinkowskiSpec::new(0.3, 0.2, 0.9, 1.1).unwrap(), 4),
        ] {
            let t = limit_experiment_c3d4(&spec, n, &schedule()).unwrap();
            assert!(matches!(t.case, LimitCase::Finite(_)), "{t:?}");
            assert!(t.error < 1e-4, "{t:?}");
            assert!(t.max_identity_residual() < 1e-8, "{t:?}");
            let b = t.params[3].1;
            for p in &t.perturbed {
                // b·factor > qa sends the sequence to −∞.
                let expect = if (p.factor > 1.0) == (b > 0.0) {
                    LimitCase::MinusInfinity
                } else {
                    LimitCase::PlusInfinity
                };
                assert_eq!(p.case, expect, "{t:?}");
                assert!(p.monotone, "{t:?}");
            }
        }
    }
}
