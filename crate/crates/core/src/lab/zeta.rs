//! The relation `ζ_n = ((−1)ⁿ/n!) ψ_n⁽ⁿ⁾` between the level profiles of a
//! real-valued valuation on indicators and on cone functions.

use alloc::format;
use alloc::vec::Vec;

use super::classify::factorial;
use super::{mixed, CheckReport, RealSpec, RealValuation, Witness};
use crate::convex_fn::{cone_fn, indicator_fn};
use crate::log_concave::LogConcaveFunction;
use crate::polytope::Polytope;
use crate::vector::Vector;
use crate::{check_user_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaRow {
    pub t: f64,
    /// `Y(I_{{0}} + t)`.
    pub zeta0: f64,
    /// `(Y(ℓ_K + t) − ζ₀(t)) / V_n(K)`.
    pub psi: f64,
    /// `(Y(I_K + t) − ζ₀(t)) / V_n(K)`.
    pub zeta: f64,
    /// `n`-th central difference of `ψ_n`.
    pub fd: f64,
    /// `fd` against `n!(−1)ⁿ ζ_n`.
    pub relation_residual: f64,
    /// Largest deviation of `ζ₀, ψ_n, ζ_n, fd` from their closed forms.
    pub oracle_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaReport {
    pub n: usize,
    pub step: f64,
    pub rows: Vec<ZetaRow>,
    /// `|ψ_n|` is non-increasing along the grid.
    pub decay_monotone: bool,
    /// Relation and oracle residuals, and decay, folded into one check.
    pub check: CheckReport,
}

/// Central difference weights for the `n`-th derivative, `n ∈ {2, 3, 4}`, as
/// `(offset, weight)` pairs with the common denominator folded in.
fn stencil(n: usize, h: f64) -> Result<Vec<(f64, f64)>> {
    Ok(match n {
        2 => alloc::vec![(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)]
            .into_iter()
            .map(|(o, w)| (o, w / (h * h)))
            .collect(),
        3 => alloc::vec![(-2.0, -1.0), (-1.0, 2.0), (1.0, -2.0), (2.0, 1.0)]
            .into_iter()
            .map(|(o, w)| (o, w / (2.0 * h * h * h)))
            .collect(),
        4 => alloc::vec![(-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)]
            .into_iter()
            .map(|(o, w)| (o, w / (h * h * h * h)))
            .collect(),
        _ => return Err(Error::UnsupportedDimension(n)),
    })
}

/// Checks the relation on `t_grid` with finite-difference step `step`, for
/// `K = [0,1]ⁿ`, against the closed forms `ζ₀ = c₀e^{−qt}`,
/// `ψ_n = c_n n! q⁻ⁿ e^{−qt}` and `ζ_n = c_n e^{−qt}`.
pub fn zeta_derivative_check(spec: &RealSpec, n: usize, t_grid: &[f64], step: f64, tol: f64) -> Result<ZetaReport> {
    spec.validate()?;
    check_user_dim(n)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::NonPositive { name: "step", value: step });
    }
    let k = Polytope::unit_cube(n);
    let vol = k.volume();
    let origin = LogConcaveFunction::characteristic(&Polytope::point(Vector::zeros(n)));
    let cone = cone_fn(&k)?;
    let ind = indicator_fn(&k);
    let zeta0 = |t: f64| spec.evaluate(&origin.shift_exponent(t));
    let psi = |t: f64| -> Result<f64> {
        Ok((spec.evaluate(&LogConcaveFunction::from_convex(cone.add_constant(t)))? - zeta0(t)?) / vol)
    };
    let zeta = |t: f64| -> Result<f64> {
        Ok((spec.evaluate(&LogConcaveFunction::from_convex(ind.add_constant(t)))? - zeta0(t)?) / vol)
    };
    let w = stencil(n, step)?;
    let (q, c0, cn) = (spec.q, spec.c0, spec.cn);
    let nf = factorial(n);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };

    let mut rep = CheckReport::new("zeta_relation", tol);
    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let z0 = zeta0(t)?;
        let p = psi(t)?;
        let z = zeta(t)?;
        let mut fd = 0.0;
        for (o, c) in &w {
            fd += c * psi(t + o * step)?;
        }
        let target = nf * sign * z;
        let relation = mixed(fd - target, target);
        let e = libm::exp(-q * t);
        let oracle = [
            mixed(z0 - c0 * e, c0 * e),
            mixed(p - cn * nf / libm::pow(q, n as f64) * e, cn * nf / libm::pow(q, n as f64) * e),
            mixed(z - cn * e, cn * e),
            mixed(fd - cn * nf * sign * e, cn * nf * e),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        rep.samples += 1;
        rep.observe(relation.max(oracle), || Witness {
            seed: 0,
            index: i,
            detail: format!("t = {t}: relation {relation:e}, oracle {oracle:e}"),
        });
        rows.push(ZetaRow {
            t,
            zeta0: z0,
            psi: p,
            zeta: z,
            fd,
            relation_residual: relation,
            oracle_residual: oracle,
        });
    }
    let decay_monotone = rows.windows(2).all(|r| r[1].psi.abs() <= r[0].psi.abs() * (1.0 + 1e-12));
    let mut check = rep.finish();
    if !decay_monotone && q > 0.0 {
        check.pass = false;
    }
    Ok(ZetaReport {
        n,
        step,
        rows,
        decay_monotone,
        check,
    })
}
