//! Log-concave functions `f = e^{ℓ − p·u}` over a PL convex base `u`.
//!
//! Scaling and powers only touch `ℓ` and `p`, so `s·f` and `f^q` are exact
//! and share the base's cached geometry.

use alloc::vec::Vec;

use crate::convex_fn::{AffinePiece, MinOutcome, PLConvexFunction};
use crate::polytope::Polytope;
use crate::vector::{LinearMap, Vector};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LogConcaveFunction {
    base: PLConvexFunction,
    log_scale: f64,
    power: f64,
}

/// Result of [`LogConcaveFunction::pointwise_max`].
#[derive(Clone, Debug)]
pub enum MaxOutcome {
    LogConcave(LogConcaveFunction),
    /// `f∨g` is not log-concave (`u∧v` failed the convexity certificate).
    NotLogConcave,
}

impl MaxOutcome {
    pub fn log_concave(self) -> Option<LogConcaveFunction> {
        match self {
            MaxOutcome::LogConcave(f) => Some(f),
            MaxOutcome::NotLogConcave => None,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

impl LogConcaveFunction {
    /// `e^{-u}`.
    pub fn from_convex(u: PLConvexFunction) -> Self {
        Self {
            base: u,
            log_scale: 0.0,
            power: 1.0,
        }
    }

    /// `χ_K`.
    pub fn characteristic(k: &Polytope) -> Self {
        Self::from_convex(crate::convex_fn::indicator_fn(k))
    }

    /// `u` with `f = e^{-u}`.
    pub fn to_convex(&self) -> PLConvexFunction {
        if self.power == 1.0 {
            return self.base.add_constant(-self.log_scale);
        }
        let p = self.power;
        let pieces: Vec<AffinePiece> = self
            .base
            .pieces()
            .iter()
            .map(|a| AffinePiece {
                slope: a.slope * p,
                intercept: a.intercept * p,
            })
            .collect();
        PLConvexFunction::new(pieces, self.base.domain().clone())
            .expect("positive multiple of a coercive function")
            .add_constant(p * self.base.shift() - self.log_scale)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The PL function the representation is built on (before `ℓ`, `p`).
    pub fn base(&self) -> &PLConvexFunction {
        &self.base
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        let u = self.base.eval(x);
        if u == f64::INFINITY {
            0.0
        } else {
            libm::exp(self.log_scale - self.power * u)
        }
    }

    /// `log max f`.
    pub fn log_max(&self) -> f64 {
        self.log_scale - self.power * self.base.min_value()
    }

    /// `max f = e^{-min u}`.
    pub fn max_value(&self) -> f64 {
        libm::exp(self.log_max())
    }

    /// `{f ≥ t}`; `None` for `t > max f`.
    pub fn superlevel_set(&self, t: f64) -> Result<Option<Polytope>> {
        positive("t", t)?;
        Ok(self.base.sublevel_set((self.log_scale - libm::log(t)) / self.power))
    }

    /// `s·f`.
    pub fn scale(&self, s: f64) -> Result<Self> {
        positive("s", s)?;
        Ok(Self {
            base: self.base.clone(),
            log_scale: self.log_scale + libm::log(s),
            power: self.power,
        })
    }

    /// `f^q`.
    pub fn power_of(&self, q: f64) -> Result<Self> {
        positive("q", q)?;
        Ok(Self {
            base: self.base.clone(),
            log_scale: self.log_scale * q,
            power: self.power * q,
        })
    }

    /// `f∘τ_x⁻¹`.
    pub fn translate(&self, x: &Vector) -> Result<Self> {
        Ok(Self {
            base: self.base.translate(x)?,
            ..self.clone()
        })
    }

    /// `f∘φ⁻¹`.
    pub fn precompose_linear(&self, phi: &LinearMap) -> Result<Self> {
        Ok(Self {
            base: self.base.precompose_linear(phi)?,
            ..self.clone()
        })
    }

    /// `e^{-t} f`, i.e. `u + t`.
    pub fn shift_exponent(&self, t: f64) -> Self {
        Self {
            base: self.base.add_constant(t / self.power),
            ..self.clone()
        }
    }

    /// `f∨g = e^{-(u∧v)}`, when log-concave.
    pub fn pointwise_max(&self, other: &Self) -> Result<MaxOutcome> {
        Ok(match self.to_convex().pointwise_min(&other.to_convex())? {
            MinOutcome::Convex(w) => MaxOutcome::LogConcave(Self::from_convex(w)),
            MinOutcome::NotConvex { .. } => MaxOutcome::NotLogConcave,
        })
    }

    /// `f∧g = e^{-(u∨v)}`. Fails with [`Error::EmptyDomain`] when the
    /// supports are disjoint (the minimum vanishes identically).
    pub fn pointwise_min(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_convex(self.to_convex().pointwise_max(&other.to_convex())?))
    }
}
