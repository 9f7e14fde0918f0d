//! Randomized property suites shared by the `properties` and `acceptance`
//! targets. Each suite runs a fixed-seed proptest runner and reports the
//! first failure as a string.

#![allow(dead_code)]

use lcval_core::functionals::{level_set_body, QuadratureConfig};
use lcval_core::lab::{pair_generator, Family};
use lcval_core::{AffinePiece, Domain, HalfSpace, LinearMap, LogConcaveFunction, PLConvexFunction, Polytope, Vector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: [u8; 32] = *b"lcval-properties-fixed-seed-0001";

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn points(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    (0..m).map(|_| Vector::random_in_box(n, -1.0, 1.0, rng)).collect()
}

fn body(n: usize, rng: &mut ChaCha8Rng) -> Polytope {
    loop {
        if let Ok(Some(p)) = Polytope::hull(&points(n, n + 5, rng)) {
            if p.is_full_dimensional() {
                return p;
            }
        }
    }
}

pub fn random_pl(n: usize, rng: &mut ChaCha8Rng) -> PLConvexFunction {
    loop {
        let pieces: Vec<AffinePiece> = (0..2 * n + 2)
            .map(|_| {
                let a = Vector::random_unit(n, rng) * rng.gen_range(0.5..2.0);
                AffinePiece::new(a, rng.gen_range(-1.0..1.0)).unwrap()
            })
            .collect();
        if let Ok(u) = PLConvexFunction::new(pieces, Domain::All) {
            return u;
        }
    }
}

fn dims() -> impl Strategy<Value = (usize, u64)> {
    (2usize..=4, any::<u64>())
}

/// Hull vertices are input points, every input point is covered, and no
/// vertex lies in the hull of the remaining points.
pub fn hull_extremeness(cases: u32) -> Result<(), String> {
    run(cases, (2usize..=4, 4usize..=14, any::<u64>()), |(n, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = points(n, m, &mut rng);
        let Some(p) = Polytope::hull(&pts).unwrap() else {
            return Err(TestCaseError::fail("empty hull"));
        };
        for x in &pts {
            prop_assert!(p.distance_to_point(x) <= 1e-9);
        }
        for v in p.vertices() {
            prop_assert!(pts.iter().any(|x| x.distance(v) <= 1e-12));
            let others: Vec<Vector> = pts.iter().filter(|x| x.distance(v) > 1e-12).copied().collect();
            if let Some(q) = Polytope::hull(&others).unwrap() {
                prop_assert!(q.distance_to_point(v) > 1e-9, "vertex {v:?} not extreme");
            }
        }
        Ok(())
    })
}

/// `V(P∩H) + V(P∩Hᶜ) = V(P)` and the same for moment vectors.
pub fn clip_conservation(cases: u32) -> Result<(), String> {
    run(cases, dims(), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = body(n, &mut rng);
        let w = Vector::random_unit(n, &mut rng);
        let lo = -p.support(&-w);
        let hi = p.support(&w);
        let h = HalfSpace::new(w, lo + (hi - lo) * rng.gen_range(0.05..0.95)).unwrap();
        let a = p.clip_halfspace(&h);
        let b = p.clip_halfspace(&h.complement());
        let va = a.as_ref().map_or(0.0, Polytope::volume);
        let vb = b.as_ref().map_or(0.0, Polytope::volume);
        prop_assert!((va + vb - p.volume()).abs() <= 1e-10 * p.volume().max(1.0));
        let ma = a.as_ref().map_or(Vector::zeros(n), Polytope::moment_vector);
        let mb = b.as_ref().map_or(Vector::zeros(n), Polytope::moment_vector);
        prop_assert!((ma + mb - p.moment_vector()).norm() <= 1e-10);
        Ok(())
    })
}

/// Identity, symmetry, triangle inequality and the support-function lower
/// bound `δ(A,B) ≥ |h_A(z) − h_B(z)|`.
pub fn hausdorff_metric(cases: u32) -> Result<(), String> {
    run(cases, dims(), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = body(n, &mut rng);
        let b = body(n, &mut rng).translate(&Vector::random_in_box(n, -1.0, 1.0, &mut rng));
        let c = body(n, &mut rng).dilate(rng.gen_range(0.2..2.0));
        let ab = a.hausdorff_distance(&b);
        prop_assert!(a.hausdorff_distance(&a) <= 1e-12);
        prop_assert!((ab - b.hausdorff_distance(&a)).abs() <= 1e-12);
        prop_assert!(a.hausdorff_distance(&c) <= ab + b.hausdorff_distance(&c) + 1e-9);
        for _ in 0..8 {
            let z = Vector::random_unit(n, &mut rng);
            prop_assert!((a.support(&z) - b.support(&z)).abs() <= ab + 1e-9);
        }
        Ok(())
    })
}

/// Level set bodies and their combinations are sublinear and positively
/// homogeneous in the direction.
pub fn support_sublinearity(cases: u32) -> Result<(), String> {
    let cfg = QuadratureConfig::default();
    run(cases, dims(), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = LogConcaveFunction::from_convex(random_pl(n, &mut rng));
        let q = rng.gen_range(0.3..3.0);
        let s = level_set_body(&f, q, &cfg).unwrap();
        let s = s.clone().plus(s.scaled(-rng.gen_range(0.0..2.0)));
        for _ in 0..8 {
            let z1 = Vector::random_in_box(n, -2.0, 2.0, &mut rng);
            let z2 = Vector::random_in_box(n, -2.0, 2.0, &mut rng);
            let t = rng.gen_range(0.0..5.0);
            let (h1, h2) = (s.query(&z1), s.query(&z2));
            let tol = 1e-9 * (h1.abs() + h2.abs()).max(1.0);
            prop_assert!(s.query(&(z1 + z2)) <= h1 + h2 + tol);
            prop_assert!((s.query(&(z1 * t)) - t * h1).abs() <= tol * t.max(1.0));
        }
        Ok(())
    })
}

/// `{f∨g ≥ t} = conv({f ≥ t} ∪ {g ≥ t})` and `{f∧g ≥ t} = {f ≥ t} ∩ {g ≥ t}`
/// on certified pairs.
pub fn superlevel_lattice(cases: u32) -> Result<(), String> {
    let family = prop_oneof![Just(Family::Cones), Just(Family::Indicators), Just(Family::Mixed)];
    run(cases, (2usize..=3, family, any::<u64>()), |(n, family, seed)| {
        let p = pair_generator(seed, family, n).unwrap().next().unwrap();
        let hi = p.f.max_value().min(p.g.max_value());
        for frac in [0.2, 0.6, 0.95] {
            let t = frac * hi;
            let sf = p.f.superlevel_set(t).unwrap().unwrap();
            let sg = p.g.superlevel_set(t).unwrap().unwrap();
            let mut both = sf.vertices().to_vec();
            both.extend_from_slice(sg.vertices());
            let union = Polytope::hull(&both).unwrap().unwrap();
            let join = p.join.superlevel_set(t).unwrap().unwrap();
            prop_assert!(join.hausdorff_distance(&union) <= 1e-9, "join level {t}");
            let inter = sf.clip_all(sg.facets());
            let meet = p.meet.superlevel_set(t).unwrap();
            match (meet, inter) {
                (Some(a), Some(b)) => prop_assert!(a.hausdorff_distance(&b) <= 1e-9, "meet level {t}"),
                (None, None) => {}
                (a, b) => {
                    let d = a.or(b).unwrap().circumradius();
                    prop_assert!(d <= 1e-9, "meet level {t}: one side empty");
                }
            }
        }
        Ok(())
    })
}

/// `u(x) > a|x| + b` for the certified cone bound.
pub fn cone_bound_validity(cases: u32) -> Result<(), String> {
    run(cases, dims(), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_pl(n, &mut rng);
        let cb = u.cone_bound();
        prop_assert!(cb.a > 0.0);
        for _ in 0..16 {
            let r = 10f64.powf(rng.gen_range(-2.0..3.0));
            let x = Vector::random_unit(n, &mut rng) * r;
            prop_assert!(u.eval(&x) > cb.a * x.norm() + cb.b);
        }
        Ok(())
    })
}

/// Translations, linear images, scaling and powers act on values as stated.
pub fn transform_coherence(cases: u32) -> Result<(), String> {
    run(cases, dims(), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_pl(n, &mut rng);
        let x = Vector::random_in_box(n, -1.0, 1.0, &mut rng);
        let phi = LinearMap::random_sln(seed, 3, n);
        let ut = u.translate(&x).unwrap();
        let up = u.precompose_linear(&phi).unwrap();
        let f = LogConcaveFunction::from_convex(u.clone());
        let s = rng.gen_range(0.2..5.0);
        let q = rng.gen_range(0.2..3.0);
        let g = f.scale(s).unwrap().power_of(q).unwrap();
        for _ in 0..8 {
            let y = Vector::random_in_box(n, -2.0, 2.0, &mut rng);
            let uy = u.eval(&(y - x));
            prop_assert!((ut.eval(&y) - uy).abs() <= 1e-9 * uy.abs().max(1.0));
            let vy = u.eval(&phi.apply_inverse(&y));
            prop_assert!((up.eval(&y) - vy).abs() <= 1e-9 * vy.abs().max(1.0));
            let gy = (s * f.eval(&y)).powf(q);
            prop_assert!((g.eval(&y) - gy).abs() <= 1e-12 * gy.max(1e-300) + 1e-300);
        }
        Ok(())
    })
}

/// Suites reported under the property criterion, with their case counts.
pub fn suites() -> Vec<(&'static str, fn(u32) -> Result<(), String>, u32)> {
    vec![
        ("hull_extremeness", hull_extremeness as fn(u32) -> Result<(), String>, 1000),
        ("clip_conservation", clip_conservation, 2000),
        ("hausdorff_metric", hausdorff_metric, 1000),
        ("support_sublinearity", support_sublinearity, 1000),
        ("superlevel_lattice", superlevel_lattice, 1000),
        ("cone_bound_validity", cone_bound_validity, 1000),
        ("transform_coherence", transform_coherence, 1000),
    ]
}
