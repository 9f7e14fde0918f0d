//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lcval_core::functionals::{cone_lc, moment_vector_fn, v0_pow, vn_pow};
use lcval_core::lab::{
    check_sln_covariance, check_translation_covariance, check_valuation_identity, classify_mink, classify_real,
    direction_net, limit_experiment_c1c2, limit_experiment_c3d4, pair_generator, zeta_derivative_check, Family,
    LimitCase, MinkowskiSpec, PairSample, RealSpec,
};
use lcval_core::{LogConcaveFunction, Polytope, QuadratureConfig, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn t_lambda_moments() -> Outcome {
    let n = 3;
    let e1 = Vector::basis(n, 0);
    let mut err = 0.0f64;
    for lam in [0.5, 1.0, 2.0, 3.0] {
        let t = Polytope::t_lambda(n, lam).unwrap();
        let got = [t.support(&e1), t.support(&-e1), t.moment_vector().dot(&e1), t.moment_body_support(&e1)];
        let want = [lam, 0.0, lam * lam / 24.0, lam * lam / 24.0];
        for (g, w) in got.iter().zip(want) {
            err = err.max((g - w).abs());
        }
    }
    outcome(err <= 1e-10, format!("max abs err {err:.3e} (tol 1e-10)"))
}

fn cone_volume() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut err = 0.0f64;
    for n in [2, 3] {
        for lam in [0.5, 1.0, 2.0] {
            let f = cone_lc(&Polytope::t_lambda(n, lam).unwrap()).unwrap();
            for q in [0.5, 1.0, 2.0] {
                let want = lam / libm::pow(q, n as f64);
                let got = vn_pow(&f, q, &cfg).unwrap();
                err = err.max((got - want).abs() / want);
            }
        }
    }
    outcome(err <= 1e-6, format!("max rel err {err:.3e} (tol 1e-6)"))
}

/// `∫ x₁ e^{−qℓ_T(x)} dx = m(T)·e₁ ∫₀^∞ r^{n+1} q e^{−qr} dr`.
fn gamma_oracle(n: usize, lam: f64, q: f64) -> f64 {
    let simplex_moment = lam * lam / (1..=n + 1).map(|k| k as f64).product::<f64>();
    simplex_moment * libm::tgamma((n + 2) as f64) / libm::pow(q, (n + 1) as f64)
}

fn cone_moment() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut err = 0.0f64;
    for n in [2, 3, 4] {
        for lam in [0.5, 1.0, 2.0] {
            let f = cone_lc(&Polytope::t_lambda(n, lam).unwrap()).unwrap();
            for q in [0.5, 1.0, 2.0] {
                let want = gamma_oracle(n, lam, q);
                let got = moment_vector_fn(&f, q, &cfg).unwrap()[0];
                err = err.max((got - want).abs() / want);
            }
        }
    }
    outcome(err <= 1e-6, format!("max rel err {err:.3e} (tol 1e-6)"))
}

fn random_mink(rng: &mut ChaCha8Rng) -> MinkowskiSpec {
    MinkowskiSpec::new(
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(0.3..3.0),
    )
    .unwrap()
}

fn random_real(rng: &mut ChaCha8Rng) -> RealSpec {
    RealSpec::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.3..3.0)).unwrap()
}

fn identity() -> Outcome {
    let n = 3;
    let seed = 4;
    let mut pairs: Vec<PairSample> = Vec::new();
    for (family, count) in [(Family::Cones, 34), (Family::Indicators, 33), (Family::Mixed, 33)] {
        pairs.extend(pair_generator(seed, family, n).unwrap().take(count));
    }
    let dirs = direction_net(n, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut ok = pairs.len() == 100;
    let mut witness = String::new();
    for _ in 0..20 {
        let spec = random_mink(&mut rng);
        let rep = check_valuation_identity(&spec, pairs.iter().cloned(), seed, &dirs, 1e-7);
        if rep.residual > worst {
            worst = rep.residual;
            witness = rep.witness.map(|w| w.detail).unwrap_or_default();
        }
        ok &= rep.pass && rep.samples == pairs.len();
    }
    outcome(ok, format!("20 specs x {} pairs x 200 dirs, max residual {worst:.3e} (tol 1e-7) {witness}", pairs.len()))
}

fn random_fns(n: usize, count: usize, seed: u64) -> Vec<LogConcaveFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| LogConcaveFunction::from_convex(common::random_pl(n, &mut rng)))
        .collect()
}

fn covariance() -> Outcome {
    let n = 3;
    let dirs = direction_net(n, 200);
    let fs = random_fns(n, 20, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_mink(&mut rng);

    let sln = check_sln_covariance(&spec, &fs, 5, 50, &dirs, 1e-8);

    let expected = |f: &LogConcaveFunction| -> lcval_core::Result<f64> {
        Ok((spec.c1 - spec.c2) * v0_pow(f, spec.q) + spec.c3 * vn_pow(f, spec.q, &spec.cfg)?)
    };
    let tr = check_translation_covariance(&spec, &fs, &dirs, 1e-6, Some(&expected));
    let formula = tr.formula.as_ref().unwrap();

    let mut moment = 0.0f64;
    for dim in 2..=4 {
        for _ in 0..50 {
            let pts: Vec<Vector> = (0..=dim).map(|_| Vector::random_in_box(dim, -1.0, 1.0, &mut rng)).collect();
            let Some(k) = Polytope::hull(&pts).unwrap() else { continue };
            let x = Vector::random_in_box(dim, -3.0, 3.0, &mut rng);
            let lhs = k.translate(&x).moment_vector();
            let rhs = k.moment_vector() + x * k.volume();
            moment = moment.max((lhs - rhs).norm());
        }
    }
    let pass = sln.pass && tr.pass() && moment <= 1e-12;
    outcome(
        pass,
        format!(
            "SL(n) {:.3e} over {} maps (tol 1e-8), Z0 {:.3e} over {} f (tol 1e-6), m(K+x) {moment:.3e} (tol 1e-12)",
            sln.residual, sln.samples, formula.residual, formula.samples
        ),
    )
}

fn classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mink = 0.0f64;
    let mut d4 = 0.0f64;
    let mut ok = true;
    for k in 0..20 {
        let spec = random_mink(&mut rng);
        let n = 3 + k % 2;
        let r = classify_mink(&spec, n, 1e-4).unwrap();
        ok &= r.pass;
        for (name, v) in [("c1", spec.c1), ("c2", spec.c2), ("c3", spec.c3), ("q", spec.q)] {
            mink = mink.max((r.get(name).unwrap() - v).abs());
        }
        d4 = d4.max(r.d.unwrap()[3].abs());
    }
    let mut real = 0.0f64;
    for k in 0..20 {
        let spec = random_real(&mut rng);
        let n = 2 + k % 3;
        let r = classify_real(&spec, n, 1e-6).unwrap();
        ok &= r.pass;
        for (name, v) in [("c0", spec.c0), ("cn", spec.cn), ("q", spec.q)] {
            real = real.max((r.get(name).unwrap() - v).abs());
        }
    }
    let pass = ok && mink <= 1e-4 && real <= 1e-6 && d4 <= 1e-4;
    outcome(
        pass,
        format!("minkowski {mink:.3e} (tol 1e-4), real {real:.3e} (tol 1e-6), |d4| {d4:.3e} (tol 1e-4)"),
    )
}

fn limits() -> Outcome {
    let hs: Vec<f64> = (1..=12).map(|k| libm::ldexp(1.0, -k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let (mut e12, mut rate, mut e34) = (0.0f64, 0.0f64, 0.0f64);
    let mut perturbed_ok = true;
    for k in 0..5 {
        let spec = random_mink(&mut rng);
        let n = 3 + k % 2;
        let t = limit_experiment_c1c2(&spec, n, &hs).unwrap();
        e12 = e12.max(t.error);
        if spec.c1 > 0.0 {
            rate = rate.max((t.observed_rate - 1.0).abs());
        }
        let t = limit_experiment_c3d4(&spec, n, &hs).unwrap();
        ok &= matches!(t.case, LimitCase::Finite(_));
        e34 = e34.max(t.error);
        let b = t.params[3].1;
        for p in &t.perturbed {
            let expect = if (p.factor > 1.0) == (b > 0.0) {
                LimitCase::MinusInfinity
            } else {
                LimitCase::PlusInfinity
            };
            perturbed_ok &= p.case == expect && p.monotone;
        }
    }
    let pass = ok && perturbed_ok && e12 <= 1e-6 && rate <= 0.1 && e34 <= 1e-4;
    outcome(
        pass,
        format!(
            "c1c2 error {e12:.3e} (tol 1e-6) rate dev {rate:.3e}, c3d4 finite {ok} error {e34:.3e} (tol 1e-4), perturbed diverge {perturbed_ok}"
        ),
    )
}

fn zeta() -> Outcome {
    let grid: Vec<f64> = (0..=40).map(|i| -1.0 + 0.1 * i as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..5 {
        // The stencil's truncation error is (qh)²/4 relative.
        let spec = RealSpec::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.0)).unwrap();
        let r = zeta_derivative_check(&spec, 3, &grid, 1e-2, 1e-4).unwrap();
        ok &= r.check.pass;
        worst = worst.max(r.check.residual);
    }
    outcome(ok, format!("max residual {worst:.3e} over {} points (tol 1e-4)", grid.len()))
}

fn properties() -> Outcome {
    let mut fails = Vec::new();
    let mut cases = 0;
    for (name, suite, n) in common::suites() {
        cases += n;
        if let Err(e) = suite(n) {
            fails.push(format!("{name}: {e}"));
        }
    }
    outcome(fails.is_empty(), format!("{cases} cases, failures: [{}]", fails.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("t_lambda_moments", t_lambda_moments, Duration::from_secs(1)),
        ("cone_volume", cone_volume, Duration::from_secs(10)),
        ("cone_moment", cone_moment, Duration::MAX),
        ("valuation_identity", identity, Duration::MAX),
        ("covariance", covariance, Duration::MAX),
        ("classification", classification, Duration::MAX),
        ("limits", limits, Duration::MAX),
        ("zeta_relation", zeta, Duration::MAX),
        ("properties", properties, Duration::from_secs(120)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.pass && took < budget;
        if !pass {
            failed += 1;
        }
        let limit = if budget == Duration::MAX {
            String::new()
        } else {
            format!(" (limit {:.0} s)", budget.as_secs_f64())
        };
        println!(
            "{} {} {name}: {} [{:.2} s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
