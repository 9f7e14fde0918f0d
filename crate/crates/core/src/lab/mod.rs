//! Conformance checks for black-box valuations on log-concave functions.
//!
//! Support functions are compared on deterministic direction nets, never on
//! materialized bodies. All randomness is driven by `ChaCha8` seeds carried
//! into failure witnesses. Evaluation is serial.
//!
//! Residuals are mixed: `|r| / max(1, s)` with `s` the magnitude of the
//! largest term in the compared expression.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::functionals::{layers, v0_pow, vn_pow, QuadratureConfig, SupportEvaluator};
use crate::log_concave::LogConcaveFunction;
use crate::vector::Vector;
use crate::{Error, Result};

mod checks;
mod classify;
mod limits;
mod pairs;
mod zeta;

pub use checks::{
    check_real_invariance, check_real_valuation_identity, check_sln_covariance,
    check_translation_covariance, check_valuation_identity, estimate_homogeneity,
    estimate_homogeneity_on, estimate_real_homogeneity, Homogeneity, TranslationReport, S_GRID,
};
pub use classify::{classify_mink, classify_real, ClassifyReport};
pub use limits::{
    limit_experiment_c1c2, limit_experiment_c3d4, richardson, LimitCase, LimitRow, LimitTable,
    Perturbed,
};
pub use pairs::{limit_c1c2_pair, limit_c3d4_pair, pair_generator, Family, PairSample, Pairs};
pub use zeta::{zeta_derivative_check, ZetaReport, ZetaRow};

/// A functional `LC(ℝⁿ) → 𝒦ⁿ`, given by its support function.
pub trait MinkowskiValuation {
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<SupportEvaluator>;
}

/// A functional `LC(ℝⁿ) → ℝ`.
pub trait RealValuation {
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<f64>;
}

impl<F> MinkowskiValuation for F
where
    F: Fn(&LogConcaveFunction) -> Result<SupportEvaluator>,
{
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<SupportEvaluator> {
        self(f)
    }
}

impl<F> RealValuation for F
where
    F: Fn(&LogConcaveFunction) -> Result<f64>,
{
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<f64> {
        self(f)
    }
}

/// `Z(f) = c₁[f^q] + c₂(−[f^q]) + c₃ m(f^q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinkowskiSpec {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub q: f64,
    pub cfg: QuadratureConfig,
}

/// `Y(f) = c₀ (max f)^q + c_n ∫ f^q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealSpec {
    pub c0: f64,
    pub cn: f64,
    pub q: f64,
    pub cfg: QuadratureConfig,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValuationSpec {
    Minkowski(MinkowskiSpec),
    Real(RealSpec),
}

/// Value of [`evaluate_spec_valuation`].
#[derive(Clone, Debug)]
pub enum SpecValue {
    Body(SupportEvaluator),
    Real(f64),
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

impl MinkowskiSpec {
    pub fn new(c1: f64, c2: f64, c3: f64, q: f64) -> Result<Self> {
        let s = Self {
            c1,
            c2,
            c3,
            q,
            cfg: QuadratureConfig::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_config(mut self, cfg: QuadratureConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        finite("c1", self.c1)?;
        finite("c2", self.c2)?;
        finite("c3", self.c3)?;
        if self.c1 < 0.0 {
            return Err(Error::InvalidSpec("c1 must be nonnegative"));
        }
        if self.c2 < 0.0 {
            return Err(Error::InvalidSpec("c2 must be nonnegative"));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidSpec("q must be positive"));
        }
        Ok(())
    }
}

impl RealSpec {
    pub fn new(c0: f64, cn: f64, q: f64) -> Result<Self> {
        let s = Self {
            c0,
            cn,
            q,
            cfg: QuadratureConfig::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_config(mut self, cfg: QuadratureConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        finite("c0", self.c0)?;
        finite("cn", self.cn)?;
        finite("q", self.q)?;
        if self.cn != 0.0 && self.q <= 0.0 {
            return Err(Error::InvalidSpec("q must be positive when cn is nonzero"));
        }
        Ok(())
    }
}

impl ValuationSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ValuationSpec::Minkowski(s) => s.validate(),
            ValuationSpec::Real(s) => s.validate(),
        }
    }
}

impl MinkowskiValuation for MinkowskiSpec {
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<SupportEvaluator> {
        self.validate()?;
        let n = f.dim();
        if self.c1 == 0.0 && self.c2 == 0.0 && self.c3 == 0.0 {
            return Ok(SupportEvaluator::zero(n).with_degree(self.q));
        }
        let l = Arc::new(layers(f, self.q, &self.cfg)?);
        let mut z = SupportEvaluator::zero(n);
        if self.c1 != 0.0 {
            z = z.plus(SupportEvaluator::from_layers(l.clone()).scaled(self.c1));
        }
        if self.c2 != 0.0 {
            z = z.plus(SupportEvaluator::from_layers(l.clone()).scaled(-self.c2));
        }
        if self.c3 != 0.0 {
            z = z.plus(SupportEvaluator::from_point(l.moment()).scaled(self.c3));
        }
        Ok(z.with_degree(self.q).with_provenance("spec"))
    }
}

impl RealValuation for RealSpec {
    fn evaluate(&self, f: &LogConcaveFunction) -> Result<f64> {
        self.validate()?;
        let mut y = 0.0;
        if self.c0 != 0.0 {
            y += self.c0 * v0_pow(f, self.q);
        }
        if self.cn != 0.0 {
            y += self.cn * vn_pow(f, self.q, &self.cfg)?;
        }
        Ok(y)
    }
}

pub fn evaluate_spec_valuation(spec: &ValuationSpec, f: &LogConcaveFunction) -> Result<SpecValue> {
    Ok(match spec {
        ValuationSpec::Minkowski(s) => SpecValue::Body(s.evaluate(f)?),
        ValuationSpec::Real(s) => SpecValue::Real(s.evaluate(f)?),
    })
}

/// Reproduction data for a failing sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub seed: u64,
    pub index: usize,
    pub detail: String,
}

/// Aggregated layer-cake diagnostics over the evaluations of a check.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalStats {
    pub evaluations: usize,
    pub max_panels: usize,
    pub max_quadrature_panels: usize,
    pub max_horizon: f64,
    pub all_converged: bool,
}

impl EvalStats {
    pub(crate) fn new() -> Self {
        Self {
            all_converged: true,
            ..Self::default()
        }
    }

    pub(crate) fn record(&mut self, z: &SupportEvaluator) {
        self.evaluations += 1;
        for d in z.layer_diagnostics() {
            self.max_panels = self.max_panels.max(d.panels);
            self.max_quadrature_panels = self.max_quadrature_panels.max(d.quadrature_panels);
            if d.horizon.is_finite() {
                self.max_horizon = self.max_horizon.max(d.horizon);
            }
            self.all_converged &= d.converged;
        }
    }
}

/// Outcome of one property check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub property: String,
    pub samples: usize,
    /// Samples the generator could not certify or the valuation rejected.
    pub skipped: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub stats: EvalStats,
}

impl CheckReport {
    pub(crate) fn new(property: &str, tolerance: f64) -> Self {
        Self {
            property: String::from(property),
            samples: 0,
            skipped: 0,
            residual: 0.0,
            tolerance,
            pass: true,
            witness: None,
            stats: EvalStats::new(),
        }
    }

    /// Folds one residual in; the first sample that breaks the tolerance
    /// becomes the witness.
    pub(crate) fn observe(&mut self, r: f64, witness: impl FnOnce() -> Witness) {
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.residual {
            self.residual = r;
        }
        if r > self.tolerance && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.pass = self.residual <= self.tolerance && self.skipped == 0 && self.samples > 0;
        self
    }
}

pub(crate) fn mixed(r: f64, scale: f64) -> f64 {
    r.abs() / scale.abs().max(1.0)
}

/// `count` deterministic, roughly uniform unit directions in `ℝⁿ`.
pub fn direction_net(n: usize, count: usize) -> Vec<Vector> {
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..count)
        .map(|k| {
            let t = (k as f64 + 0.5) / count as f64;
            let v = match n {
                2 => {
                    let a = 2.0 * PI * t;
                    Vector::from_slice(&[libm::cos(a), libm::sin(a)])
                }
                3 => {
                    let z = 1.0 - 2.0 * t;
                    let r = libm::sqrt((1.0 - z * z).max(0.0));
                    let a = golden * k as f64;
                    Vector::from_slice(&[r * libm::cos(a), r * libm::sin(a), z])
                }
                4 => {
                    let u1 = t;
                    let u2 = halton(k + 1, 2);
                    let u3 = halton(k + 1, 3);
                    let (r1, r2) = (libm::sqrt(1.0 - u1), libm::sqrt(u1));
                    let (a, b) = (2.0 * PI * u2, 2.0 * PI * u3);
                    Vector::from_slice(&[
                        r1 * libm::sin(a),
                        r1 * libm::cos(a),
                        r2 * libm::sin(b),
                        r2 * libm::cos(b),
                    ])
                }
                _ => panic!("direction_net: unsupported dimension {n}"),
            };
            v.normalized().expect("unit direction")
        })
        .collect()
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}
