//! Deterministic streams of pairs `(f, g)` whose join `f∨g` is log-concave.

use alloc::format;
use alloc::string::String;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex_fn::{cone_fn, AffinePiece, Domain, PLConvexFunction};
use crate::log_concave::LogConcaveFunction;
use crate::polytope::{HalfSpace, Polytope};
use crate::vector::Vector;
use crate::{check_user_dim, Error, Result};

const MAX_ATTEMPTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `e^{-ℓ_K}, e^{-ℓ_L}` with `K, L` overlapping clips of one body around
    /// the origin.
    Cones,
    /// `χ_K, χ_L` for overlapping clips of a random body.
    Indicators,
    /// Random PL functions restricted to overlapping half-spaces.
    Mixed,
    /// `(u_h, ℓ_h)` with `u_h ∧ ℓ_h = ℓ_{[0,e₁/h]}`, `h = 2^{-(k+1)}`.
    LimitC1C2,
    /// `(u_h, ℓ_{T_{1/h}}∘τ_{e₁}⁻¹ + h)` with `{u_h ≤ s} = {ℓ_{T_{1/h}} ≤ s} ∩ {x₁ ≤ 1}`.
    LimitC3D4,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Cones,
        Family::Indicators,
        Family::Mixed,
        Family::LimitC1C2,
        Family::LimitC3D4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cones => "cones",
            Family::Indicators => "indicators",
            Family::Mixed => "mixed",
            Family::LimitC1C2 => "limit_c1c2",
            Family::LimitC3D4 => "limit_c3d4",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// A certified pair with its lattice operations.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub index: usize,
    pub label: String,
    /// `h` for the limit families.
    pub param: Option<f64>,
    pub f: LogConcaveFunction,
    pub g: LogConcaveFunction,
    /// `f∨g`.
    pub join: LogConcaveFunction,
    /// `f∧g`.
    pub meet: LogConcaveFunction,
}

/// Iterator returned by [`pair_generator`].
#[derive(Clone, Debug)]
pub struct Pairs {
    family: Family,
    n: usize,
    seed: u64,
    rng: ChaCha8Rng,
    index: usize,
    rejected: usize,
}

impl Pairs {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Candidates that failed the convexity certificate so far.
    pub fn rejected(&self) -> usize {
        self.rejected
    }
}

pub fn pair_generator(seed: u64, family: Family, n: usize) -> Result<Pairs> {
    check_user_dim(n)?;
    Ok(Pairs {
        family,
        n,
        seed,
        rng: ChaCha8Rng::seed_from_u64(seed),
        index: 0,
        rejected: 0,
    })
}

impl Iterator for Pairs {
    type Item = PairSample;

    fn next(&mut self) -> Option<PairSample> {
        let index = self.index;
        let n = self.n;
        let sample = match self.family {
            Family::LimitC1C2 | Family::LimitC3D4 => {
                if index >= 40 {
                    return None;
                }
                let h = libm::ldexp(1.0, -(index as i32 + 1));
                let (f, g) = if self.family == Family::LimitC1C2 {
                    limit_c1c2_pair(n, h).ok()?
                } else {
                    limit_c3d4_pair(n, h).ok()?
                };
                let mut s = certify(f, g)?;
                s.param = Some(h);
                s
            }
            _ => loop {
                if self.rejected > MAX_ATTEMPTS * (index + 1) {
                    return None;
                }
                let candidate = match self.family {
                    Family::Cones => cone_candidate(n, &mut self.rng),
                    Family::Indicators if index == 0 => canonical_indicators(n),
                    Family::Indicators => indicator_candidate(n, &mut self.rng),
                    _ => mixed_candidate(n, &mut self.rng),
                };
                match candidate.and_then(|(f, g)| certify(f, g)) {
                    Some(s) => break s,
                    None => self.rejected += 1,
                }
            },
        };
        self.index += 1;
        Some(PairSample {
            index,
            label: format!("{}#{}", self.family.name(), index),
            ..sample
        })
    }
}

fn certify(f: LogConcaveFunction, g: LogConcaveFunction) -> Option<PairSample> {
    let join = f.pointwise_max(&g).ok()?.log_concave()?;
    let meet = f.pointwise_min(&g).ok()?;
    Some(PairSample {
        index: 0,
        label: String::new(),
        param: None,
        f,
        g,
        join,
        meet,
    })
}

fn restrict(u: &PLConvexFunction, extra: &[HalfSpace]) -> Option<PLConvexFunction> {
    let mut hs = u.domain().halfspaces().to_vec();
    hs.extend_from_slice(extra);
    let r = PLConvexFunction::new(u.pieces().to_vec(), Domain::Polyhedron(hs)).ok()?;
    Some(r.add_constant(u.shift()))
}

fn check_h(n: usize, h: f64) -> Result<()> {
    check_user_dim(n)?;
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name: "h", value: h })
    }
}

/// `u_h = ℓ_{[0, e₁/h]}` restricted to `x₁ ≤ 1`, and `ℓ_{[0, e₁/h]}(· − e₁) + h`.
pub fn limit_c1c2_pair(n: usize, h: f64) -> Result<(LogConcaveFunction, LogConcaveFunction)> {
    check_h(n, h)?;
    let e1 = Vector::basis(n, 0);
    let seg = Polytope::segment(Vector::zeros(n), e1 * (1.0 / h));
    let ell = cone_fn(&seg).expect("segment from the origin");
    let u_h = restrict(&ell, &[HalfSpace::new(e1, 1.0).expect("unit normal")]).expect("nonempty");
    let l_h = ell.translate(&e1).expect("finite shift").add_constant(h);
    Ok((LogConcaveFunction::from_convex(u_h), LogConcaveFunction::from_convex(l_h)))
}

/// `u_h = ℓ_{T_{1/h}}` restricted to `x₁ ≤ 1`, and `ℓ_{T_{1/h}}(· − e₁) + h`.
pub fn limit_c3d4_pair(n: usize, h: f64) -> Result<(LogConcaveFunction, LogConcaveFunction)> {
    check_h(n, h)?;
    let e1 = Vector::basis(n, 0);
    let t = Polytope::t_lambda(n, 1.0 / h).expect("positive lambda");
    let ell = cone_fn(&t).expect("simplex at the origin");
    let u_h = restrict(&ell, &[HalfSpace::new(e1, 1.0).expect("unit normal")]).expect("nonempty");
    let g = ell.translate(&e1).expect("finite shift").add_constant(h);
    Ok((LogConcaveFunction::from_convex(u_h), LogConcaveFunction::from_convex(g)))
}

/// Random full-dimensional body: hull of `n + 3` points in `[-1, 1]ⁿ`,
/// optionally recentred at its centroid.
fn random_body(n: usize, rng: &mut ChaCha8Rng, centred: bool) -> Option<Polytope> {
    let pts: Vec<Vector> = (0..n + 3).map(|_| Vector::random_in_box(n, -1.0, 1.0, rng)).collect();
    let p = Polytope::hull(&pts).ok()??;
    if !p.is_full_dimensional() || p.volume() < 1e-3 {
        return None;
    }
    Some(if centred { p.translate(&-p.centroid()) } else { p })
}

/// Overlapping slabs `{w·x ≤ β₁}` and `{w·x ≥ β₂}`, `β₂ < β₁`, splitting
/// `[lo, hi]` into two proper parts.
fn split(rng: &mut ChaCha8Rng, lo: f64, hi: f64, w: &Vector) -> Option<(HalfSpace, HalfSpace)> {
    let b2 = lo + (hi - lo) * rng.gen_range(0.1..0.45);
    let b1 = lo + (hi - lo) * rng.gen_range(0.55..0.9);
    Some((HalfSpace::new(*w, b1).ok()?, HalfSpace::new(-*w, -b2).ok()?))
}

fn common_scale(
    rng: &mut ChaCha8Rng,
    f: LogConcaveFunction,
    g: LogConcaveFunction,
) -> Option<(LogConcaveFunction, LogConcaveFunction)> {
    let s = rng.gen_range(0.5..2.0);
    Some((f.scale(s).ok()?, g.scale(s).ok()?))
}

fn cone_candidate(n: usize, rng: &mut ChaCha8Rng) -> Option<(LogConcaveFunction, LogConcaveFunction)> {
    let p = random_body(n, rng, true)?;
    let w = Vector::random_unit(n, rng);
    // Both clips keep the origin in their interior.
    let hi = p.support(&w);
    let lo = -p.support(&-w);
    let b1 = hi * rng.gen_range(0.1..0.7);
    let b2 = lo * rng.gen_range(0.1..0.7);
    let k = p.clip_halfspace(&HalfSpace::new(w, b1).ok()?)?;
    let l = p.clip_halfspace(&HalfSpace::new(-w, -b2).ok()?)?;
    let f = LogConcaveFunction::from_convex(cone_fn(&k).ok()?);
    let g = LogConcaveFunction::from_convex(cone_fn(&l).ok()?);
    common_scale(rng, f, g)
}

fn canonical_indicators(n: usize) -> Option<(LogConcaveFunction, LogConcaveFunction)> {
    let t = Polytope::t_lambda(n, 1.0).ok()?;
    let e1 = Vector::basis(n, 0);
    let k = t.clip_halfspace(&HalfSpace::new(e1, 0.5).ok()?)?;
    let l = t.clip_halfspace(&HalfSpace::new(-e1, -0.25).ok()?)?;
    Some((LogConcaveFunction::characteristic(&k), LogConcaveFunction::characteristic(&l)))
}

fn indicator_candidate(n: usize, rng: &mut ChaCha8Rng) -> Option<(LogConcaveFunction, LogConcaveFunction)> {
    let p = random_body(n, rng, false)?;
    let w = Vector::random_unit(n, rng);
    let (h1, h2) = split(rng, -p.support(&-w), p.support(&w), &w)?;
    let k = p.clip_halfspace(&h1)?;
    let l = p.clip_halfspace(&h2)?;
    let f = LogConcaveFunction::characteristic(&k);
    let g = LogConcaveFunction::characteristic(&l);
    common_scale(rng, f, g)
}

fn mixed_candidate(n: usize, rng: &mut ChaCha8Rng) -> Option<(LogConcaveFunction, LogConcaveFunction)> {
    let pieces: Vec<AffinePiece> = (0..2 * n + 2)
        .map(|_| {
            let a = Vector::random_unit(n, rng) * rng.gen_range(0.5..2.0);
            AffinePiece::new(a, rng.gen_range(-1.0..0.5)).expect("finite")
        })
        .collect();
    let domain = if rng.gen_bool(0.5) {
        Domain::All
    } else {
        let lo = Vector::random_in_box(n, -2.0, -0.5, rng);
        let hi = Vector::random_in_box(n, 0.5, 2.0, rng);
        Domain::from_polytope(&Polytope::cuboid(&lo, &hi))
    };
    let u = PLConvexFunction::new(pieces, domain).ok()?;
    let body = u.sublevel_set(u.min_value() + 1.0)?;
    if !body.is_full_dimensional() {
        return None;
    }
    let w = Vector::random_unit(n, rng);
    let (h1, h2) = split(rng, -body.support(&-w), body.support(&w), &w)?;
    let uk = restrict(&u, &[h1])?;
    let ul = restrict(&u, &[h2])?;
    let p = rng.gen_range(0.5..2.0);
    let f = LogConcaveFunction::from_convex(uk).power_of(p).ok()?;
    let g = LogConcaveFunction::from_convex(ul).power_of(p).ok()?;
    common_scale(rng, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agree_on_grid(a: &LogConcaveFunction, b: &LogConcaveFunction, n: usize) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        (0..200).all(|_| {
            let x = Vector::random_in_box(n, -1.5, 1.5, &mut rng);
            (a.eval(&x) - b.eval(&x)).abs() <= 1e-9 * a.eval(&x).max(1.0)
        })
    }

    #[test]
    fn random_families_are_certified_and_deterministic() {
        for family in [Family::Cones, Family::Indicators, Family::Mixed] {
            for n in 2..=4 {
                let a: Vec<PairSample> = pair_generator(7, family, n).unwrap().take(8).collect();
                let b: Vec<PairSample> = pair_generator(7, family, n).unwrap().take(8).collect();
                assert_eq!(a.len(), 8, "{family:?} n={n}");
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                for (s, t) in a.iter().zip(&b) {
                    assert!(agree_on_grid(&s.f, &t.f, n));
                    for _ in 0..100 {
                        let x = Vector::random_in_box(n, -1.5, 1.5, &mut rng);
                        let (fx, gx) = (s.f.eval(&x), s.g.eval(&x));
                        assert!((s.join.eval(&x) - fx.max(gx)).abs() <= 1e-9 * fx.max(gx).max(1.0));
                        assert!((s.meet.eval(&x) - fx.min(gx)).abs() <= 1e-9 * fx.max(gx).max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_indicator_pair() {
        let s = pair_generator(0, Family::Indicators, 3).unwrap().next().unwrap();
        let t1 = Polytope::t_lambda(3, 1.0).unwrap();
        let lvl = s.join.superlevel_set(0.5).unwrap().unwrap();
        assert!(lvl.hausdorff_distance(&t1) < 1e-12);
    }

    #[test]
    fn limit_families_match_their_lattice_identities() {
        let e1 = Vector::basis(3, 0);
        for s in pair_generator(0, Family::LimitC1C2, 3).unwrap().take(6) {
            let h = s.param.unwrap();
            let seg = Polytope::segment(Vector::zeros(3), e1 * (1.0 / h));
            let ell = LogConcaveFunction::from_convex(cone_fn(&seg).unwrap());
            assert!(agree_on_grid(&s.join, &ell, 3));
            let lvl = s.meet.superlevel_set(0.5 * libm::exp(-h)).unwrap().unwrap();
            assert!(lvl.hausdorff_distance(&Polytope::point(e1)) < 1e-12);
            assert!((s.meet.max_value() - libm::exp(-h)).abs() < 1e-15);
        }
        for s in pair_generator(0, Family::LimitC3D4, 3).unwrap().take(6) {
            let h = s.param.unwrap();
            let t = Polytope::t_lambda(3, 1.0 / h).unwrap();
            let ell = LogConcaveFunction::from_convex(cone_fn(&t).unwrap());
            assert!(agree_on_grid(&s.join, &ell, 3));
            for lvl in [0.5, 1.0, 2.0] {
                let a = s.f.superlevel_set(libm::exp(-lvl)).unwrap().unwrap();
                let b = t
                    .dilate(lvl)
                    .clip_halfspace(&HalfSpace::new(e1, 1.0).unwrap())
                    .unwrap();
                assert!(a.hausdorff_distance(&b) < 1e-12);
            }
        }
    }
}
