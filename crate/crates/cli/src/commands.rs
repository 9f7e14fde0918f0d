//! Subcommand implementations. Each returns a [`Report`]; nothing here
//! touches the filesystem except through the spec reader.

use std::fmt;

use lcval_core::functionals::{cone_lc, v0_pow, vn_pow};
use lcval_core::lab::{
    check_real_invariance, check_real_valuation_identity, check_sln_covariance, check_translation_covariance,
    check_valuation_identity, classify_mink, classify_real, direction_net, estimate_homogeneity,
    estimate_real_homogeneity, limit_experiment_c1c2, limit_experiment_c3d4, pair_generator, zeta_derivative_check,
    CheckReport, ClassifyReport, EvalStats, Family, Homogeneity, LimitCase, LimitTable, MinkowskiSpec, RealSpec,
    ValuationSpec, Witness, S_GRID,
};
use lcval_core::{LogConcaveFunction, Polytope, QuadratureConfig, Vector};

use crate::output::{Cell, Report, Section};
use crate::spec::{self, SpecError, ValuationFile};

#[derive(Debug)]
pub enum CliError {
    Spec(SpecError),
    Core(lcval_core::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spec(e) => write!(f, "spec error at {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Spec(e)
    }
}

impl From<lcval_core::Error> for CliError {
    fn from(e: lcval_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Settings shared by all subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub dirs: usize,
    pub rel_tol: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.dim) {
            return Err(CliError::Usage(format!("--dim must be in 2..=4, got {}", self.dim)));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some(t) = self.rel_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--rel-tol must be positive, got {t}")));
            }
        }
        if self.dirs == 0 {
            return Err(CliError::Usage("--dirs must be positive".into()));
        }
        Ok(())
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn need_minkowski_dim(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(CliError::Usage(format!(
                "Minkowski valuations require --dim ≥ 3, got {}",
                self.dim
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        Some(x) => Err(CliError::Usage(format!("{name} values must be positive, got {x}"))),
        None if xs.is_empty() => Err(CliError::Usage(format!("{name} is empty"))),
        None => Ok(()),
    }
}

fn residual(got: f64, want: f64) -> f64 {
    (got - want).abs()
}

pub fn lemma21(cfg: &RunConfig, lambdas: &[f64]) -> Result<Report> {
    positive("lambda", lambdas)?;
    let n = cfg.dim;
    let tol = cfg.tol(1e-10);
    let e1 = Vector::basis(n, 0);
    let fact: f64 = (1..=n + 1).map(|k| k as f64).product();
    let mut s = Section::new(
        "lemma21",
        &[
            "lambda", "h_T_e1", "h_T_e1_ref", "h_T_e1_res", "h_negT_e1", "h_negT_e1_ref", "h_negT_e1_res", "m_e1",
            "m_e1_ref", "m_e1_res", "h_MT_e1", "h_MT_e1_ref", "h_MT_e1_res",
        ],
    );
    let mut pass = true;
    for &lam in lambdas {
        let t = Polytope::t_lambda(n, lam)?;
        let got = [t.support(&e1), t.support(&-e1), t.moment_vector().dot(&e1), t.moment_body_support(&e1)];
        let want = [lam, 0.0, lam * lam / fact, lam * lam / fact];
        let mut row: Vec<Cell> = vec![lam.into()];
        for (g, w) in got.into_iter().zip(want) {
            let r = residual(g, w);
            pass &= r <= tol;
            row.extend([g.into(), w.into(), r.into()]);
        }
        s.push(row);
    }
    Ok(Report {
        command: "lemma21",
        sections: vec![s],
        pass,
    })
}

pub fn vn_cone(cfg: &RunConfig, lambdas: &[f64], qs: &[f64]) -> Result<Report> {
    positive("lambda", lambdas)?;
    positive("q", qs)?;
    let n = cfg.dim;
    let tol = cfg.tol(1e-6);
    let qcfg = QuadratureConfig::with_rel_tol(cfg.rel_tol.unwrap_or(1e-9));
    let mut s = Section::new("vn_cone", &["n", "lambda", "q", "value", "reference", "rel_error"]);
    let mut pass = true;
    for &lam in lambdas {
        let f = cone_lc(&Polytope::t_lambda(n, lam)?)?;
        for &q in qs {
            let want = lam / q.powi(n as i32);
            let got = vn_pow(&f, q, &qcfg)?;
            let r = residual(got, want) / want;
            pass &= r <= tol;
            s.push(vec![n.into(), lam.into(), q.into(), got.into(), want.into(), r.into()]);
        }
    }
    Ok(Report {
        command: "vn-cone",
        sections: vec![s],
        pass,
    })
}

/// Loads the valuation and applies `--rel-tol`.
pub fn load(cfg: &RunConfig, arg: &str) -> Result<ValuationFile> {
    let mut v = spec::resolve(arg, cfg.dim, |p| std::fs::read_to_string(p))?;
    if let Some(t) = cfg.rel_tol {
        let q = QuadratureConfig::with_rel_tol(t);
        v.valuation = match v.valuation {
            ValuationSpec::Minkowski(s) => ValuationSpec::Minkowski(s.with_config(q)),
            ValuationSpec::Real(s) => ValuationSpec::Real(s.with_config(q)),
        };
    }
    if matches!(v.valuation, ValuationSpec::Minkowski(_)) {
        cfg.need_minkowski_dim()?;
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Property {
    Identity,
    Sln,
    Translation,
    Homogeneity,
    Invariance,
}

/// Options of `check`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    pub properties: Vec<Property>,
    pub pairs: usize,
    pub maps: usize,
    pub functions: usize,
}

fn report_row(r: &CheckReport) -> Vec<Cell> {
    let (seed, witness) = match &r.witness {
        Some(w) => (Cell::Int(w.seed), Cell::Text(format!("#{} {}", w.index, w.detail))),
        None => (Cell::Empty, Cell::Empty),
    };
    vec![
        r.property.clone().into(),
        r.samples.into(),
        r.skipped.into(),
        r.residual.into(),
        r.tolerance.into(),
        seed,
        witness,
        r.pass.into(),
    ]
}

fn checks_section() -> Section {
    Section::new(
        "checks",
        &["property", "samples", "skipped", "residual", "tolerance", "witness_seed", "witness", "pass"],
    )
}

/// Spec functions, or certified mixed and cone pair members.
fn test_functions(cfg: &RunConfig, file: &ValuationFile, count: usize) -> Result<Vec<LogConcaveFunction>> {
    if !file.functions.is_empty() {
        return Ok(file.functions.clone());
    }
    let mut out = Vec::with_capacity(count);
    let mut cones = pair_generator(cfg.seed, Family::Cones, cfg.dim)?;
    let mut mixed = pair_generator(cfg.seed, Family::Mixed, cfg.dim)?;
    while out.len() < count {
        let next = if out.len() % 2 == 0 { cones.next() } else { mixed.next() };
        match next {
            Some(p) => out.push(p.f),
            None => break,
        }
    }
    Ok(out)
}

fn family_split(total: usize) -> [(Family, usize); 3] {
    let base = total / 3;
    let extra = total % 3;
    [
        (Family::Cones, base + usize::from(extra > 0)),
        (Family::Indicators, base + usize::from(extra > 1)),
        (Family::Mixed, base),
    ]
}

fn homogeneity_report(
    name: &str,
    q: f64,
    tol: f64,
    fits: impl Iterator<Item = lcval_core::Result<Homogeneity>>,
) -> CheckReport {
    let mut rep = CheckReport {
        property: name.into(),
        samples: 0,
        skipped: 0,
        residual: 0.0,
        tolerance: tol,
        pass: true,
        witness: None,
        stats: EvalStats::default(),
    };
    for (k, h) in fits.enumerate() {
        match h {
            Ok(h) if h.trivial => rep.skipped += 1,
            Ok(h) => {
                rep.samples += 1;
                let fitted = h.q.unwrap_or(f64::NAN);
                let r = h.spread.max((fitted - q).abs());
                if !(r <= rep.residual) {
                    rep.residual = r;
                    rep.witness = Some(Witness {
                        seed: 0,
                        index: k,
                        detail: format!("fitted q {fitted}, spread {:e}", h.spread),
                    });
                }
            }
            Err(_) => rep.skipped += 1,
        }
    }
    rep.pass = rep.samples > 0 && rep.residual <= tol;
    rep
}

pub fn check(cfg: &RunConfig, arg: &str, opts: &CheckOptions) -> Result<Report> {
    let file = load(cfg, arg)?;
    let n = cfg.dim;
    let tol = cfg.tol(1e-7);
    let dirs = direction_net(n, cfg.dirs);
    let props: Vec<Property> = if opts.properties.is_empty() {
        match file.valuation {
            ValuationSpec::Minkowski(_) => {
                vec![Property::Identity, Property::Sln, Property::Translation, Property::Homogeneity]
            }
            ValuationSpec::Real(_) => vec![Property::Identity, Property::Invariance, Property::Homogeneity],
        }
    } else {
        opts.properties.clone()
    };
    let fs = test_functions(cfg, &file, opts.functions)?;
    let mut section = checks_section();
    let mut reports = Vec::new();
    match file.valuation {
        ValuationSpec::Minkowski(z) => {
            for p in &props {
                match p {
                    Property::Identity => {
                        for (family, count) in family_split(opts.pairs) {
                            let pairs = pair_generator(cfg.seed, family, n)?.take(count);
                            let mut r = check_valuation_identity(&z, pairs, cfg.seed, &dirs, tol);
                            r.property = format!("identity/{}", family.name());
                            reports.push(r);
                        }
                    }
                    Property::Sln => reports.push(check_sln_covariance(&z, &fs, cfg.seed, opts.maps, &dirs, tol)),
                    Property::Translation => {
                        let expected = |f: &LogConcaveFunction| -> lcval_core::Result<f64> {
                            Ok((z.c1 - z.c2) * v0_pow(f, z.q) + z.c3 * vn_pow(f, z.q, &z.cfg)?)
                        };
                        let t = check_translation_covariance(&z, &fs, &dirs, tol, Some(&expected));
                        reports.push(t.linearity);
                        reports.extend(t.formula);
                    }
                    Property::Homogeneity => reports.push(homogeneity_report(
                        "homogeneity",
                        z.q,
                        tol,
                        fs.iter().map(|f| estimate_homogeneity(&z, f, &S_GRID)),
                    )),
                    Property::Invariance => {
                        return Err(CliError::Usage("invariance applies to real-valued specs".into()))
                    }
                }
            }
        }
        ValuationSpec::Real(y) => {
            for p in &props {
                match p {
                    Property::Identity => {
                        for (family, count) in family_split(opts.pairs) {
                            let pairs = pair_generator(cfg.seed, family, n)?.take(count);
                            let mut r = check_real_valuation_identity(&y, pairs, cfg.seed, tol);
                            r.property = format!("identity/{}", family.name());
                            reports.push(r);
                        }
                    }
                    Property::Invariance => reports.push(check_real_invariance(&y, &fs, cfg.seed, opts.maps, tol)),
                    Property::Homogeneity => reports.push(homogeneity_report(
                        "homogeneity",
                        y.q,
                        tol,
                        fs.iter().map(|f| estimate_real_homogeneity(&y, f, &S_GRID)),
                    )),
                    Property::Sln | Property::Translation => {
                        return Err(CliError::Usage(
                            "sln and translation apply to Minkowski specs; use invariance".into(),
                        ))
                    }
                }
            }
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        section.push(report_row(r));
    }
    Ok(Report {
        command: "check",
        sections: vec![section],
        pass,
    })
}

fn classify_sections(r: &ClassifyReport, input: &[(&str, f64)], tol: f64) -> (Vec<Section>, bool) {
    let mut constants = Section::new("constants", &["name", "recovered", "input", "difference"]);
    let mut echoed = true;
    let mut entries: Vec<(&str, f64)> = r.constants.clone();
    entries.push(("q", r.q.unwrap_or(f64::NAN)));
    for (name, value) in entries {
        let want = input.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        let diff = want.map_or(f64::NAN, |w| (value - w).abs());
        // A trivial valuation has no degree to recover.
        let skip = r.trivial && name == "q";
        echoed &= skip || diff <= tol;
        constants.push(vec![name.into(), value.into(), want.unwrap_or(f64::NAN).into(), diff.into()]);
    }
    if let Some(d) = r.d {
        for (k, v) in ["d1", "d2", "d3", "d4"].into_iter().zip(d) {
            constants.push(vec![k.into(), v.into(), Cell::Empty, Cell::Empty]);
        }
    }
    let mut consistency = Section::new("consistency", &["relation", "residual"]);
    for (k, v) in &r.consistency {
        consistency.push(vec![(*k).into(), (*v).into()]);
    }
    let mut summary = Section::new(
        "summary",
        &["kind", "q", "cross_validation", "homogeneity_spread", "trivial", "tolerance", "constants_echoed", "pass"],
    );
    let pass = r.pass && echoed;
    summary.push(vec![
        r.kind.into(),
        r.q.unwrap_or(f64::NAN).into(),
        r.cross_validation.into(),
        r.homogeneity_spread.into(),
        r.trivial.into(),
        r.tolerance.into(),
        echoed.into(),
        pass.into(),
    ]);
    (vec![constants, consistency, summary], pass)
}

pub fn classify(cfg: &RunConfig, arg: &str) -> Result<Report> {
    let file = load(cfg, arg)?;
    let (sections, pass) = match file.valuation {
        ValuationSpec::Minkowski(z) => {
            let tol = cfg.tol(1e-4);
            let r = classify_mink(&z, cfg.dim, tol)?;
            classify_sections(&r, &[("c1", z.c1), ("c2", z.c2), ("c3", z.c3), ("q", z.q)], tol)
        }
        ValuationSpec::Real(y) => {
            let tol = cfg.tol(1e-6);
            let r = classify_real(&y, cfg.dim, tol)?;
            classify_sections(&r, &[("c0", y.c0), ("cn", y.cn), ("q", y.q)], tol)
        }
    };
    Ok(Report {
        command: "classify",
        sections,
        pass,
    })
}

fn expect_minkowski(file: &ValuationFile) -> Result<MinkowskiSpec> {
    match file.valuation {
        ValuationSpec::Minkowski(z) => Ok(z),
        ValuationSpec::Real(_) => Err(CliError::Usage("this command needs a Minkowski spec".into())),
    }
}

fn expect_real(file: &ValuationFile) -> Result<RealSpec> {
    match file.valuation {
        ValuationSpec::Real(y) => Ok(y),
        ValuationSpec::Minkowski(_) => Err(CliError::Usage("this command needs a real-valued spec".into())),
    }
}

fn limit_rows(t: &LimitTable) -> Section {
    let mut s = Section::new(t.experiment, &["h", "value", "model", "residual", "identity_residual"]);
    for r in &t.rows {
        s.push(vec![r.h.into(), r.value.into(), r.model.into(), r.residual.into(), r.identity_residual.into()]);
    }
    s
}

pub fn default_schedule() -> Vec<f64> {
    (1..=12).map(|k| 0.5f64.powi(k)).collect()
}

pub fn limits(cfg: &RunConfig, arg: &str, schedule: &[f64]) -> Result<Report> {
    positive("h", schedule)?;
    let z = expect_minkowski(&load(cfg, arg)?)?;
    let n = cfg.dim;
    let first = limit_experiment_c1c2(&z, n, schedule)?;
    let second = limit_experiment_c3d4(&z, n, schedule)?;
    let mut summary = Section::new(
        "summary",
        &["experiment", "reference", "extrapolated", "error", "tolerance", "observed_rate", "case", "pass"],
    );
    let tol1 = cfg.tol(1e-6);
    let rate_ok = first.reference == 0.0 || (first.observed_rate - 1.0).abs() <= 0.1;
    let pass1 = first.error <= tol1 && rate_ok;
    let tol2 = cfg.tol(1e-4);
    let pass2 = matches!(second.case, LimitCase::Finite(_)) && second.error <= tol2;
    for (t, tol, pass) in [(&first, tol1, pass1), (&second, tol2, pass2)] {
        summary.push(vec![
            t.experiment.into(),
            t.reference.into(),
            t.extrapolated.into(),
            t.error.into(),
            tol.into(),
            t.observed_rate.into(),
            t.case.name().into(),
            pass.into(),
        ]);
    }
    let mut perturbed = Section::new("perturbed", &["factor", "case", "expected", "monotone", "pass"]);
    let b = second.params.iter().find(|(k, _)| *k == "b").map_or(0.0, |(_, v)| *v);
    let mut pass3 = true;
    for p in &second.perturbed {
        // b·factor beyond qa sends the sequence to −∞; with b = 0 nothing moves.
        let expected = if b == 0.0 {
            LimitCase::Finite(0.0)
        } else if (p.factor > 1.0) == (b > 0.0) {
            LimitCase::MinusInfinity
        } else {
            LimitCase::PlusInfinity
        };
        let ok = p.case.name() == expected.name() && p.monotone;
        pass3 &= ok;
        perturbed.push(vec![p.factor.into(), p.case.name().into(), expected.name().into(), p.monotone.into(), ok.into()]);
    }
    let mut params = Section::new("params", &["experiment", "name", "value"]);
    for t in [&first, &second] {
        for (k, v) in &t.params {
            params.push(vec![t.experiment.into(), (*k).into(), (*v).into()]);
        }
    }
    Ok(Report {
        command: "limits",
        sections: vec![limit_rows(&first), limit_rows(&second), params, summary, perturbed],
        pass: pass1 && pass2 && pass3,
    })
}

/// `a:b:step`, inclusive of `b` up to rounding.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err(format!("expected start:end:step, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (a, b, h) = (num(a)?, num(b)?, num(h)?);
    if !(h > 0.0 && a.is_finite() && b.is_finite() && a <= b) {
        return Err(format!("invalid grid {s:?}"));
    }
    let k = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=k).map(|i| a + h * i as f64).collect())
}

pub fn zeta(cfg: &RunConfig, arg: &str, grid: &[f64], step: f64) -> Result<Report> {
    let y = expect_real(&load(cfg, arg)?)?;
    let n = cfg.dim;
    let tol = cfg.tol(1e-4);
    let r = zeta_derivative_check(&y, n, grid, step, tol)?;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut rows = Section::new(
        "zeta",
        &["t", "zeta0", "psi", "zeta", "fd", "target", "relation_residual", "oracle_residual"],
    );
    for row in &r.rows {
        rows.push(vec![
            row.t.into(),
            row.zeta0.into(),
            row.psi.into(),
            row.zeta.into(),
            row.fd.into(),
            (fact * sign * row.zeta).into(),
            row.relation_residual.into(),
            row.oracle_residual.into(),
        ]);
    }
    let mut summary = checks_section();
    summary.name = "summary".into();
    summary.push(report_row(&r.check));
    let mut decay = Section::new("decay", &["step", "monotone"]);
    decay.push(vec![r.step.into(), r.decay_monotone.into()]);
    Ok(Report {
        command: "zeta",
        sections: vec![rows, summary, decay],
        pass: r.check.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize) -> RunConfig {
        RunConfig {
            dim,
            seed: 1,
            tol: None,
            dirs: 50,
            rel_tol: None,
        }
    }

    #[test]
    fn lemma21_table() {
        let r = lemma21(&cfg(3), &[1.0, 3.0]).unwrap();
        assert!(r.pass);
        let row = &r.sections[0].rows[1];
        assert_eq!(row[7], Cell::Num(9.0 / 24.0));
        assert!(lemma21(&cfg(3), &[0.0]).is_err());
    }

    #[test]
    fn vn_cone_examples() {
        let r = vn_cone(&cfg(3), &[2.0], &[0.5]).unwrap();
        assert_eq!(r.sections[0].rows[0][4], Cell::Num(16.0));
        assert!(r.pass);
        let r = vn_cone(&cfg(2), &[0.5], &[2.0]).unwrap();
        assert_eq!(r.sections[0].rows[0][4], Cell::Num(0.125));
    }

    #[test]
    fn minkowski_needs_three_dimensions() {
        let e = classify(&cfg(2), "difference-body").unwrap_err();
        assert!(matches!(e, CliError::Usage(_)), "{e}");
        assert!(classify(&cfg(2), "volume").unwrap().pass);
    }

    #[test]
    fn grid() {
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn families_cover_total() {
        let s: usize = family_split(100).iter().map(|(_, c)| c).sum();
        assert_eq!(s, 100);
    }
}
