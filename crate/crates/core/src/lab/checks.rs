//! Valuation identity, covariance and homogeneity checks.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{direction_net, mixed, CheckReport, MinkowskiValuation, PairSample, RealValuation, Witness};
use crate::functionals::SupportEvaluator;
use crate::log_concave::LogConcaveFunction;
use crate::vector::{LinearMap, Vector};
use crate::Result;

/// Dilation factors used for homogeneity fits.
pub const S_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Shears per random `SL(n)` map.
const SHEARS: usize = 3;

/// `h(Z(f∨g),z) + h(Z(f∧g),z) = h(Z(f),z) + h(Z(g),z)` over pairs and directions.
pub fn check_valuation_identity<Z, I>(z: &Z, pairs: I, seed: u64, dirs: &[Vector], tol: f64) -> CheckReport
where
    Z: MinkowskiValuation + ?Sized,
    I: IntoIterator<Item = PairSample>,
{
    let mut rep = CheckReport::new("valuation_identity", tol);
    for p in pairs {
        let evals = [&p.join, &p.meet, &p.f, &p.g].map(|f| z.evaluate(f));
        let [Ok(zj), Ok(zm), Ok(zf), Ok(zg)] = evals else {
            rep.skipped += 1;
            continue;
        };
        for e in [&zj, &zm, &zf, &zg] {
            rep.stats.record(e);
        }
        rep.samples += 1;
        for (k, d) in dirs.iter().enumerate() {
            let v = [zj.query(d), zm.query(d), zf.query(d), zg.query(d)];
            let scale = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let r = mixed(v[0] + v[1] - v[2] - v[3], scale);
            rep.observe(r, || Witness {
                seed,
                index: p.index,
                detail: format!("{} direction {} {:?}", p.label, k, d.as_slice()),
            });
        }
    }
    rep.finish()
}

/// Real-valued analogue of [`check_valuation_identity`].
pub fn check_real_valuation_identity<Y, I>(y: &Y, pairs: I, seed: u64, tol: f64) -> CheckReport
where
    Y: RealValuation + ?Sized,
    I: IntoIterator<Item = PairSample>,
{
    let mut rep = CheckReport::new("real_valuation_identity", tol);
    for p in pairs {
        let evals = [&p.join, &p.meet, &p.f, &p.g].map(|f| y.evaluate(f));
        let [Ok(a), Ok(b), Ok(c), Ok(d)] = evals else {
            rep.skipped += 1;
            continue;
        };
        rep.samples += 1;
        let scale = [a, b, c, d].iter().fold(0.0f64, |s, x| s.max(x.abs()));
        rep.observe(mixed(a + b - c - d, scale), || Witness {
            seed,
            index: p.index,
            detail: p.label.clone(),
        });
    }
    rep.finish()
}

/// `h(Z(f∘φ⁻¹), z) = h(Z(f), φᵀz)` for `count` random `SL(n)` maps; map `k`
/// is `LinearMap::random_sln(seed + k, 3, n)` applied to `fs[k % fs.len()]`.
pub fn check_sln_covariance<Z>(
    z: &Z,
    fs: &[LogConcaveFunction],
    seed: u64,
    count: usize,
    dirs: &[Vector],
    tol: f64,
) -> CheckReport
where
    Z: MinkowskiValuation + ?Sized,
{
    let mut rep = CheckReport::new("sln_covariance", tol);
    if fs.is_empty() {
        return rep.finish();
    }
    for k in 0..count {
        let f = &fs[k % fs.len()];
        let s = seed.wrapping_add(k as u64);
        let phi = LinearMap::random_sln(s, SHEARS, f.dim());
        let both = f.precompose_linear(&phi).and_then(|g| Ok((z.evaluate(&g)?, z.evaluate(f)?)));
        let Ok((zg, zf)) = both else {
            rep.skipped += 1;
            continue;
        };
        rep.stats.record(&zg);
        rep.stats.record(&zf);
        rep.samples += 1;
        for (j, d) in dirs.iter().enumerate() {
            let a = zg.query(d);
            let b = zf.query(&phi.apply_transpose(d));
            rep.observe(mixed(a - b, a.abs().max(b.abs())), || Witness {
                seed: s,
                index: k,
                detail: format!("function {} direction {}", k % fs.len(), j),
            });
        }
    }
    rep.finish()
}

/// `Y(f∘φ⁻¹) = Y(f)` and `Y(f∘τ_x⁻¹) = Y(f)` for random `φ ∈ SL(n)` and
/// `x ∈ [-1, 1]ⁿ`.
pub fn check_real_invariance<Y>(y: &Y, fs: &[LogConcaveFunction], seed: u64, count: usize, tol: f64) -> CheckReport
where
    Y: RealValuation + ?Sized,
{
    let mut rep = CheckReport::new("real_invariance", tol);
    if fs.is_empty() {
        return rep.finish();
    }
    for k in 0..count {
        let f = &fs[k % fs.len()];
        let s = seed.wrapping_add(k as u64);
        let n = f.dim();
        let phi = LinearMap::random_sln(s, SHEARS, n);
        let x = Vector::random_in_box(n, -1.0, 1.0, &mut ChaCha8Rng::seed_from_u64(s));
        let vals = (|| -> Result<[f64; 3]> {
            Ok([
                y.evaluate(f)?,
                y.evaluate(&f.precompose_linear(&phi)?)?,
                y.evaluate(&f.translate(&x)?)?,
            ])
        })();
        let Ok([a, b, c]) = vals else {
            rep.skipped += 1;
            continue;
        };
        rep.samples += 1;
        let scale = a.abs().max(b.abs()).max(c.abs());
        let r = mixed(a - b, scale).max(mixed(a - c, scale));
        rep.observe(r, || Witness {
            seed: s,
            index: k,
            detail: format!("function {}", k % fs.len()),
        });
    }
    rep.finish()
}

/// Outcome of [`check_translation_covariance`].
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationReport {
    /// Linearity of `x ↦ h(Z(f∘τ_x⁻¹),·) − h(Z(f),·)` across coordinates and
    /// the step sizes 1 and 2.
    pub linearity: CheckReport,
    /// `Z⁰(f)` per input function.
    pub estimates: Vec<f64>,
    /// Agreement with the supplied formula, when one was given.
    pub formula: Option<CheckReport>,
}

impl TranslationReport {
    pub fn pass(&self) -> bool {
        self.linearity.pass && self.formula.as_ref().is_none_or(|r| r.pass)
    }
}

/// Estimates `Z⁰(f)` from `Z(f∘τ_x⁻¹) = Z(f) + Z⁰(f)x` along the coordinate
/// axes with steps 1 and 2, checks that the increments are linear in `x`, and
/// optionally compares the estimates with `expected(f)`.
pub fn check_translation_covariance<Z>(
    z: &Z,
    fs: &[LogConcaveFunction],
    dirs: &[Vector],
    tol: f64,
    expected: Option<&dyn Fn(&LogConcaveFunction) -> Result<f64>>,
) -> TranslationReport
where
    Z: MinkowskiValuation + ?Sized,
{
    let mut lin = CheckReport::new("translation_covariance", tol);
    let mut formula = expected.map(|_| CheckReport::new("translation_z0_formula", tol));
    let mut estimates = Vec::with_capacity(fs.len());
    for (k, f) in fs.iter().enumerate() {
        let n = f.dim();
        let Ok(zf) = z.evaluate(f) else {
            lin.skipped += 1;
            estimates.push(f64::NAN);
            continue;
        };
        lin.stats.record(&zf);
        let mut shifted: Vec<(usize, f64, SupportEvaluator)> = Vec::new();
        let mut failed = false;
        for i in 0..n {
            for t in [1.0, 2.0] {
                match f.translate(&(Vector::basis(n, i) * t)).and_then(|g| z.evaluate(&g)) {
                    Ok(e) => {
                        lin.stats.record(&e);
                        shifted.push((i, t, e));
                    }
                    Err(_) => failed = true,
                }
            }
        }
        if failed {
            lin.skipped += 1;
            estimates.push(f64::NAN);
            continue;
        }
        lin.samples += 1;
        let e1 = Vector::basis(n, 0);
        let z0 = shifted[0].2.query(&e1) - zf.query(&e1);
        estimates.push(z0);
        for (i, t, e) in &shifted {
            for (j, d) in dirs.iter().enumerate() {
                let a = e.query(d);
                let b = zf.query(d);
                let r = mixed(a - b - t * z0 * d[*i], a.abs().max(b.abs()));
                lin.observe(r, || Witness {
                    seed: 0,
                    index: k,
                    detail: format!("axis {} step {} direction {}", i, t, j),
                });
            }
        }
        if let (Some(rep), Some(ex)) = (formula.as_mut(), expected) {
            match ex(f) {
                Ok(v) => {
                    rep.samples += 1;
                    rep.observe(mixed(z0 - v, v), || Witness {
                        seed: 0,
                        index: k,
                        detail: format!("estimate {z0} formula {v}"),
                    });
                }
                Err(_) => rep.skipped += 1,
            }
        }
    }
    TranslationReport {
        linearity: lin.finish(),
        estimates,
        formula: formula.map(CheckReport::finish),
    }
}

/// Fitted degree of homogeneity.
#[derive(Clone, Debug, PartialEq)]
pub struct Homogeneity {
    /// Mean slope, `None` when every probe vanished.
    pub q: Option<f64>,
    /// Slope per probe direction.
    pub per_direction: Vec<f64>,
    /// `max − min` of the per-direction slopes.
    pub spread: f64,
    /// All probes returned 0: the valuation looks trivial on `f`.
    pub trivial: bool,
}

impl Homogeneity {
    fn from_slopes(slopes: Vec<f64>) -> Self {
        if slopes.is_empty() {
            return Self {
                q: None,
                per_direction: slopes,
                spread: 0.0,
                trivial: true,
            };
        }
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = slopes.iter().sum::<f64>() / slopes.len() as f64;
        Self {
            q: Some(q),
            spread: if hi.is_finite() && lo.is_finite() { hi - lo } else { f64::INFINITY },
            per_direction: slopes,
            trivial: false,
        }
    }

    /// A degree was found and the probes agree within `tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.q.is_some_and(f64::is_finite) && self.spread <= tol
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

const ZERO_PROBE: f64 = 1e-12;

/// Slope of `log|h(Z(s·f), z)|` against `log s` on the three probe directions
/// where `|h(Z(f), ·)|` is largest among `±eᵢ` and a small direction net.
pub fn estimate_homogeneity<Z>(z: &Z, f: &LogConcaveFunction, s_grid: &[f64]) -> Result<Homogeneity>
where
    Z: MinkowskiValuation + ?Sized,
{
    let n = f.dim();
    let mut cands: Vec<Vector> = (0..n).flat_map(|i| [Vector::basis(n, i), -Vector::basis(n, i)]).collect();
    cands.extend(direction_net(n, 16));
    let base = z.evaluate(f)?;
    let mut ranked: Vec<(f64, Vector)> = cands.into_iter().map(|d| (base.query(&d).abs(), d)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let probes: Vec<Vector> = ranked
        .into_iter()
        .take(3)
        .filter(|(v, _)| *v > ZERO_PROBE)
        .map(|(_, d)| d)
        .collect();
    estimate_homogeneity_on(z, f, s_grid, &probes)
}

/// [`estimate_homogeneity`] on caller-chosen probe directions; vanishing
/// probes are dropped.
pub fn estimate_homogeneity_on<Z>(
    z: &Z,
    f: &LogConcaveFunction,
    s_grid: &[f64],
    probes: &[Vector],
) -> Result<Homogeneity>
where
    Z: MinkowskiValuation + ?Sized,
{
    let xs: Vec<f64> = s_grid.iter().map(|s| libm::log(*s)).collect();
    let evals = s_grid
        .iter()
        .map(|s| z.evaluate(&f.scale(*s)?))
        .collect::<Result<Vec<_>>>()?;
    let mut slopes = Vec::new();
    for d in probes {
        let ys: Vec<f64> = evals.iter().map(|e| e.query(d).abs()).collect();
        if ys.iter().all(|v| *v <= ZERO_PROBE) {
            continue;
        }
        let slope = if ys.iter().any(|v| *v <= 0.0) {
            f64::NAN
        } else {
            ls_slope(&xs, &ys.iter().map(|v| libm::log(*v)).collect::<Vec<_>>())
        };
        slopes.push(slope);
    }
    Ok(Homogeneity::from_slopes(slopes))
}

/// Slope of `log|Y(s·f)|` against `log s`.
pub fn estimate_real_homogeneity<Y>(y: &Y, f: &LogConcaveFunction, s_grid: &[f64]) -> Result<Homogeneity>
where
    Y: RealValuation + ?Sized,
{
    let xs: Vec<f64> = s_grid.iter().map(|s| libm::log(*s)).collect();
    let ys = s_grid
        .iter()
        .map(|s| Ok(y.evaluate(&f.scale(*s)?)?.abs()))
        .collect::<Result<Vec<f64>>>()?;
    if ys.iter().all(|v| *v <= ZERO_PROBE) {
        return Ok(Homogeneity::from_slopes(Vec::new()));
    }
    let slope = if ys.iter().any(|v| *v <= 0.0) {
        f64::NAN
    } else {
        ls_slope(&xs, &ys.iter().map(|v| libm::log(*v)).collect::<Vec<_>>())
    };
    Ok(Homogeneity::from_slopes(alloc::vec![slope]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{cone_lc, v0_pow, vn_pow};
    use crate::lab::{pair_generator, Family, MinkowskiSpec, RealSpec};
    use crate::polytope::Polytope;

    fn samples(n: usize) -> Vec<LogConcaveFunction> {
        let mut v: Vec<LogConcaveFunction> = pair_generator(5, Family::Mixed, n)
            .unwrap()
            .take(3)
            .map(|p| p.f)
            .collect();
        v.push(cone_lc(&Polytope::t_lambda(n, 1.5).unwrap()).unwrap().scale(0.7).unwrap());
        v.push(LogConcaveFunction::characteristic(&Polytope::unit_cube(n)));
        v
    }

    #[test]
    fn spec_passes_identity_and_broken_one_fails() {
        let dirs = direction_net(3, 40);
        let spec = MinkowskiSpec::new(0.8, 0.3, -1.2, 1.3).unwrap();
        let pairs: Vec<PairSample> = Family::ALL[..3]
            .iter()
            .flat_map(|f| pair_generator(11, *f, 3).unwrap().take(4))
            .collect();
        let rep = check_valuation_identity(&spec, pairs.clone(), 11, &dirs, 1e-7);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.samples, 12);
        assert!(rep.stats.evaluations == 48 && rep.stats.all_converged);

        // Level set body scaled by the number of epigraph vertices.
        let broken = |f: &LogConcaveFunction| -> Result<SupportEvaluator> {
            let k = f.base().epigraph_vertices().len() as f64;
            Ok(spec.evaluate(f)?.scaled(k))
        };
        let rep = check_valuation_identity(&broken, pairs.clone(), 11, &dirs, 1e-7);
        assert!(!rep.pass);
        let w = rep.witness.unwrap();
        assert_eq!(w.seed, 11);

        // f = g gives a zero residual for any functional.
        let same: Vec<PairSample> = pairs
            .iter()
            .map(|p| PairSample {
                g: p.f.clone(),
                join: p.f.clone(),
                meet: p.f.clone(),
                ..p.clone()
            })
            .collect();
        let rep = check_valuation_identity(&broken, same, 11, &dirs, 0.0);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn spec_covariance() {
        let dirs = direction_net(3, 30);
        let fs = samples(3);
        let spec = MinkowskiSpec::new(1.0, 0.5, 2.0, 0.8).unwrap();
        let rep = check_sln_covariance(&spec, &fs, 1, 10, &dirs, 1e-8);
        assert!(rep.pass, "{rep:?}");
        let ex = |f: &LogConcaveFunction| -> Result<f64> {
            Ok((spec.c1 - spec.c2) * v0_pow(f, spec.q) + spec.c3 * vn_pow(f, spec.q, &spec.cfg)?)
        };
        let tr = check_translation_covariance(&spec, &fs, &dirs, 1e-6, Some(&ex));
        assert!(tr.pass(), "{tr:?}");
        let inv = MinkowskiSpec::new(1.0, 1.0, 0.0, 2.0).unwrap();
        let tr = check_translation_covariance(&inv, &fs, &dirs, 1e-9, None);
        assert!(tr.estimates.iter().all(|z| z.abs() < 1e-9));
        let m_only = MinkowskiSpec::new(0.0, 0.0, 1.0, 1.5).unwrap();
        let tr = check_translation_covariance(&m_only, &fs, &dirs, 1e-6, None);
        for (f, z0) in fs.iter().zip(&tr.estimates) {
            let v = vn_pow(f, 1.5, &m_only.cfg).unwrap();
            assert!((z0 - v).abs() <= 1e-8 * v.max(1.0));
        }
    }

    #[test]
    fn real_checks() {
        let y = RealSpec::new(2.0, -1.0, 1.5).unwrap();
        let fs = samples(3);
        assert!(check_real_invariance(&y, &fs, 3, 10, 1e-8).pass);
        let pairs = pair_generator(4, Family::Mixed, 3).unwrap().take(5);
        assert!(check_real_valuation_identity(&y, pairs, 4, 1e-8).pass);
        let h = estimate_real_homogeneity(&y, &fs[0], &S_GRID).unwrap();
        assert!((h.q.unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn homogeneity_estimates() {
        let f = samples(3).remove(0);
        for q in [0.5, 2.0] {
            let spec = MinkowskiSpec::new(1.0, 0.2, 0.5, q).unwrap();
            let h = estimate_homogeneity(&spec, &f, &S_GRID).unwrap();
            assert!((h.q.unwrap() - q).abs() < 1e-6 && h.consistent(1e-6), "{h:?}");
            let probes = [Vector::basis(3, 0) * 2.0, Vector::basis(3, 1) * 2.0];
            let h2 = estimate_homogeneity_on(&spec, &f, &S_GRID, &probes).unwrap();
            assert!((h2.q.unwrap() - q).abs() < 1e-6);
        }
        let zero = |f: &LogConcaveFunction| -> Result<SupportEvaluator> { Ok(SupportEvaluator::zero(f.dim())) };
        let h = estimate_homogeneity(&zero, &f, &S_GRID).unwrap();
        assert!(h.trivial && h.q.is_none());
    }
}
