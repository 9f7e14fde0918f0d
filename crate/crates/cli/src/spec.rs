//! JSON function and valuation specs.
//!
//! Bodies:
//!
//! ```text
//! {"vertices": [[x, ...], ...]}   {"t_lambda": λ}   {"cube": s}
//! {"cuboid": [[lo...], [hi...]]}  {"segment": [[a...], [b...]]}   {"point": [x...]}
//! ```
//!
//! Convex functions:
//!
//! ```text
//! {"kind": "cone", "body": B}
//! {"kind": "indicator", "body": B}
//! {"kind": "pl", "pieces": [[a..., b], ...], "domain": "all" | {"halfspaces": [[w..., β], ...]} | B, "shift": t}
//! {"kind": "u_h", "family": "c1c2" | "c3d4", "h": h}
//! {"translate": [x...], "of": C}   {"sln": [[row...], ...], "of": C}   {"shift": t, "of": C}
//! ```
//!
//! Log-concave functions are `{"logconcave": C, "scale": s, "power": q}` or a
//! bare convex spec `C`, read as `e^{−C}`.
//!
//! Valuations are `{"minkowski": {"c1", "c2", "c3", "q"}}` or
//! `{"real": {"c0", "cn", "q"}}`, with optional `"rel_tol"` and
//! `"functions": [F, ...]`.

use std::fmt;

use lcval_core::convex_fn::{cone_fn, indicator_fn};
use lcval_core::lab::{limit_c1c2_pair, limit_c3d4_pair, MinkowskiSpec, RealSpec, ValuationSpec};
use lcval_core::{AffinePiece, Domain, HalfSpace, LinearMap, LogConcaveFunction, PLConvexFunction, Polytope, QuadratureConfig, Vector};
use serde_json::Value;

/// A parse or validation failure, located by line/column or by field path.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for SpecError {}

type Result<T> = std::result::Result<T, SpecError>;

fn err<T>(path: &str, message: impl Into<String>) -> Result<T> {
    Err(SpecError {
        location: path.to_string(),
        message: message.into(),
    })
}

fn core<T>(path: &str, r: lcval_core::Result<T>) -> Result<T> {
    r.or_else(|e| err(path, e.to_string()))
}

/// Parses JSON text, reporting syntax errors by line and column.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| SpecError {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    match v.get(key) {
        Some(x) => Ok(x),
        None => err(path, format!("missing field \"{key}\"")),
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => err(path, "expected a finite number"),
    }
}

fn opt_number(v: &Value, key: &str, path: &str, default: f64) -> Result<f64> {
    match v.get(key) {
        Some(x) => number(x, &format!("{path}.{key}")),
        None => Ok(default),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().map_or_else(|| err(path, "expected an array"), Ok)
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn vector(v: &Value, n: usize, path: &str) -> Result<Vector> {
    let xs = numbers(v, path)?;
    if xs.len() != n {
        return err(path, format!("expected {n} coordinates, found {}", xs.len()));
    }
    Ok(Vector::from_slice(&xs))
}

fn vectors(v: &Value, n: usize, path: &str) -> Result<Vec<Vector>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| vector(x, n, &format!("{path}[{i}]")))
        .collect()
}

/// Rows `[a..., b]` of length `n + 1`.
fn rows(v: &Value, n: usize, path: &str) -> Result<Vec<(Vector, f64)>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{path}[{i}]");
            let xs = numbers(x, &p)?;
            if xs.len() != n + 1 {
                return err(&p, format!("expected {} entries, found {}", n + 1, xs.len()));
            }
            Ok((Vector::from_slice(&xs[..n]), xs[n]))
        })
        .collect()
}

pub fn parse_polytope(v: &Value, n: usize, path: &str) -> Result<Polytope> {
    let obj = v.as_object().map_or_else(|| err(path, "expected a body object"), Ok)?;
    let Some((key, val)) = obj.iter().next().filter(|_| obj.len() == 1) else {
        return err(path, "expected exactly one of vertices, t_lambda, cube, cuboid, segment, point");
    };
    let p = format!("{path}.{key}");
    match key.as_str() {
        "vertices" => {
            let pts = vectors(val, n, &p)?;
            match core(&p, Polytope::hull(&pts))? {
                Some(k) => Ok(k),
                None => err(&p, "empty vertex list"),
            }
        }
        "t_lambda" => core(&p, Polytope::t_lambda(n, number(val, &p)?)),
        "cube" => {
            let s = number(val, &p)?;
            if s <= 0.0 {
                return err(&p, "side must be positive");
            }
            Ok(Polytope::unit_cube(n).dilate(s))
        }
        "cuboid" => {
            let c = vectors(val, n, &p)?;
            if c.len() != 2 || (0..n).any(|i| c[0][i] > c[1][i]) {
                return err(&p, "expected [lo, hi] with lo ≤ hi");
            }
            Ok(Polytope::cuboid(&c[0], &c[1]))
        }
        "segment" => {
            let c = vectors(val, n, &p)?;
            if c.len() != 2 {
                return err(&p, "expected two endpoints");
            }
            Ok(Polytope::segment(c[0], c[1]))
        }
        "point" => Ok(Polytope::point(vector(val, n, &p)?)),
        other => err(path, format!("unknown body \"{other}\"")),
    }
}

fn parse_domain(v: Option<&Value>, n: usize, path: &str) -> Result<Domain> {
    let Some(v) = v else { return Ok(Domain::All) };
    let p = format!("{path}.domain");
    if v.as_str() == Some("all") {
        return Ok(Domain::All);
    }
    if let Some(h) = v.get("halfspaces") {
        let hp = format!("{p}.halfspaces");
        let hs = rows(h, n, &hp)?
            .into_iter()
            .enumerate()
            .map(|(i, (w, b))| core(&format!("{hp}[{i}]"), HalfSpace::new(w, b)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Domain::Polyhedron(hs));
    }
    Ok(Domain::from_polytope(&parse_polytope(v, n, &p)?))
}

fn parse_map(v: &Value, n: usize, path: &str) -> Result<LinearMap> {
    let rs = vectors(v, n, path)?;
    if rs.len() != n {
        return err(path, format!("expected {n} rows, found {}", rs.len()));
    }
    let slices: Vec<&[f64]> = rs.iter().map(Vector::as_slice).collect();
    let m = core(path, LinearMap::from_rows(&slices))?;
    if (m.det() - 1.0).abs() > 1e-9 {
        return err(path, format!("determinant {} is not 1", m.det()));
    }
    Ok(m)
}

pub fn parse_convex(v: &Value, n: usize, path: &str) -> Result<PLConvexFunction> {
    if !v.is_object() {
        return err(path, "expected a function object");
    }
    if let Some(x) = v.get("translate") {
        let inner = parse_convex(field(v, "of", path)?, n, &format!("{path}.of"))?;
        let x = vector(x, n, &format!("{path}.translate"))?;
        return core(path, inner.translate(&x));
    }
    if let Some(m) = v.get("sln") {
        let inner = parse_convex(field(v, "of", path)?, n, &format!("{path}.of"))?;
        let phi = parse_map(m, n, &format!("{path}.sln"))?;
        return core(path, inner.precompose_linear(&phi));
    }
    if v.get("kind").is_none() {
        if let Some(t) = v.get("shift") {
            let inner = parse_convex(field(v, "of", path)?, n, &format!("{path}.of"))?;
            return Ok(inner.add_constant(number(t, &format!("{path}.shift"))?));
        }
    }
    let kind = field(v, "kind", path)?;
    let kp = format!("{path}.kind");
    let u = match kind.as_str() {
        Some("cone") => {
            let k = parse_polytope(field(v, "body", path)?, n, &format!("{path}.body"))?;
            core(path, cone_fn(&k))?
        }
        Some("indicator") => indicator_fn(&parse_polytope(field(v, "body", path)?, n, &format!("{path}.body"))?),
        Some("pl") => {
            let pp = format!("{path}.pieces");
            let pieces = rows(field(v, "pieces", path)?, n, &pp)?
                .into_iter()
                .enumerate()
                .map(|(i, (a, b))| core(&format!("{pp}[{i}]"), AffinePiece::new(a, b)))
                .collect::<Result<Vec<_>>>()?;
            let domain = parse_domain(v.get("domain"), n, path)?;
            core(path, PLConvexFunction::new(pieces, domain))?
        }
        Some("u_h") => {
            let h = number(field(v, "h", path)?, &format!("{path}.h"))?;
            let pair = match field(v, "family", path)?.as_str() {
                Some("c1c2") => limit_c1c2_pair(n, h),
                Some("c3d4") => limit_c3d4_pair(n, h),
                _ => return err(&format!("{path}.family"), "expected \"c1c2\" or \"c3d4\""),
            };
            core(path, pair)?.0.to_convex()
        }
        Some(other) => return err(&kp, format!("unknown kind \"{other}\"")),
        None => return err(&kp, "expected a string"),
    };
    let shift = opt_number(v, "shift", path, 0.0)?;
    Ok(if shift == 0.0 { u } else { u.add_constant(shift) })
}

pub fn parse_log_concave(v: &Value, n: usize, path: &str) -> Result<LogConcaveFunction> {
    let Some(inner) = v.get("logconcave") else {
        return Ok(LogConcaveFunction::from_convex(parse_convex(v, n, path)?));
    };
    let f = LogConcaveFunction::from_convex(parse_convex(inner, n, &format!("{path}.logconcave"))?);
    let s = opt_number(v, "scale", path, 1.0)?;
    let q = opt_number(v, "power", path, 1.0)?;
    let f = core(&format!("{path}.scale"), f.scale(s))?;
    core(&format!("{path}.power"), f.power_of(q))
}

/// A valuation with optional test functions.
#[derive(Clone, Debug)]
pub struct ValuationFile {
    pub valuation: ValuationSpec,
    pub functions: Vec<LogConcaveFunction>,
}

fn constants(v: &Value, names: &[&str], path: &str) -> Result<Vec<f64>> {
    names
        .iter()
        .map(|k| opt_number(v, k, path, if *k == "q" { 1.0 } else { 0.0 }))
        .collect()
}

pub fn parse_valuation(v: &Value, n: usize) -> Result<ValuationFile> {
    let cfg = QuadratureConfig::with_rel_tol(opt_number(v, "rel_tol", "$", 1e-9)?);
    let valuation = if let Some(m) = v.get("minkowski") {
        let c = constants(m, &["c1", "c2", "c3", "q"], "$.minkowski")?;
        let s = core("$.minkowski", MinkowskiSpec::new(c[0], c[1], c[2], c[3]))?;
        ValuationSpec::Minkowski(s.with_config(cfg))
    } else if let Some(r) = v.get("real") {
        let c = constants(r, &["c0", "cn", "q"], "$.real")?;
        let s = core("$.real", RealSpec::new(c[0], c[1], c[2]))?;
        ValuationSpec::Real(s.with_config(cfg))
    } else {
        return err("$", "expected a \"minkowski\" or \"real\" object");
    };
    let functions = match v.get("functions") {
        None => Vec::new(),
        Some(fs) => array(fs, "$.functions")?
            .iter()
            .enumerate()
            .map(|(i, f)| parse_log_concave(f, n, &format!("$.functions[{i}]")))
            .collect::<Result<_>>()?,
    };
    Ok(ValuationFile { valuation, functions })
}

/// Named valuations.
pub const BUILTINS: [(&str, &str); 7] = [
    ("difference-body", "minkowski 1,1,0,1: c·D[f^q]"),
    ("level-set-body", "minkowski 1,0,0,1: [f]"),
    ("reflected-level-set-body", "minkowski 0,1,0,1: −[f]"),
    ("moment-vector", "minkowski 0,0,1,1: m(f)"),
    ("mixed", "minkowski 0.7,0.4,-1.2,1.5"),
    ("volume", "real 0,1,1: ∫f"),
    ("max", "real 1,0,1: max f"),
];

fn builtin(name: &str) -> Option<ValuationSpec> {
    let m = |c1, c2, c3, q| MinkowskiSpec::new(c1, c2, c3, q).ok().map(ValuationSpec::Minkowski);
    let r = |c0, cn, q| RealSpec::new(c0, cn, q).ok().map(ValuationSpec::Real);
    match name {
        "difference-body" => m(1.0, 1.0, 0.0, 1.0),
        "level-set-body" => m(1.0, 0.0, 0.0, 1.0),
        "reflected-level-set-body" => m(0.0, 1.0, 0.0, 1.0),
        "moment-vector" => m(0.0, 0.0, 1.0, 1.0),
        "mixed" => m(0.7, 0.4, -1.2, 1.5),
        "volume" => r(0.0, 1.0, 1.0),
        "max" => r(1.0, 0.0, 1.0),
        _ => None,
    }
}

/// `minkowski:c1,c2,c3,q` or `real:c0,cn,q`.
fn inline(arg: &str) -> Option<Result<ValuationSpec>> {
    let (kind, rest) = arg.split_once(':')?;
    let parsed: std::result::Result<Vec<f64>, _> = rest.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let Ok(c) = parsed else {
        return Some(err(arg, "constants must be numbers"));
    };
    Some(match (kind, c.len()) {
        ("minkowski", 4) => core(arg, MinkowskiSpec::new(c[0], c[1], c[2], c[3])).map(ValuationSpec::Minkowski),
        ("real", 3) => core(arg, RealSpec::new(c[0], c[1], c[2])).map(ValuationSpec::Real),
        ("minkowski", k) | ("real", k) => err(arg, format!("wrong number of constants ({k})")),
        _ => return None,
    })
}

/// Resolves a builtin name, an inline spec or the contents of a spec file.
pub fn resolve(arg: &str, n: usize, read: impl FnOnce(&str) -> std::io::Result<String>) -> Result<ValuationFile> {
    if let Some(valuation) = builtin(arg) {
        return Ok(ValuationFile {
            valuation,
            functions: Vec::new(),
        });
    }
    if let Some(r) = inline(arg) {
        return r.map(|valuation| ValuationFile {
            valuation,
            functions: Vec::new(),
        });
    }
    let text = read(arg).or_else(|e| err(arg, format!("not a builtin spec and not readable: {e}")))?;
    let v = parse_json(&text).map_err(|e| SpecError {
        location: format!("{arg}: {}", e.location),
        message: e.message,
    })?;
    parse_valuation(&v, n).map_err(|e| SpecError {
        location: format!("{arg}: {}", e.location),
        message: e.message,
    })
}
