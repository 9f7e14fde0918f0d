//! Gauss rules and adaptive Gauss–Legendre integration of vector-valued
//! integrands.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use once_cell::race::OnceBox;

/// Gauss–Legendre order used by [`integrate`].
pub const LEGENDRE_ORDER: usize = 20;
/// Gauss–Laguerre order; exact for polynomials of degree ≤ 11.
pub const LAGUERRE_ORDER: usize = 6;

/// Nodes and weights of a Gauss rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static LEGENDRE: OnceBox<Rule> = OnceBox::new();
static LAGUERRE: OnceBox<Rule> = OnceBox::new();

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn legendre() -> &'static Rule {
    LEGENDRE.get_or_init(|| Box::new(gauss_legendre(LEGENDRE_ORDER)))
}

/// Gauss–Laguerre rule for `∫₀^∞ g(x) e^{-x} dx`.
pub fn laguerre() -> &'static Rule {
    LAGUERRE.get_or_init(|| Box::new(gauss_laguerre(LAGUERRE_ORDER)))
}

pub fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p1, p2) = legendre_pair(n, z);
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (p1, p2) = legendre_pair(n, z);
        pp = if pp == 0.0 { 1.0 } else { n as f64 * (z * p1 - p2) / (z * z - 1.0) };
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// `(P_n(z), P_{n-1}(z))`.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    (p1, p2)
}

pub fn gauss_laguerre(n: usize) -> Rule {
    let nf = n as f64;
    let mut nodes: Vec<f64> = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        for _ in 0..100 {
            let (p1, p2) = laguerre_pair(n, z);
            let pp = (nf * p1 - nf * p2) / z;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.max(1.0) {
                break;
            }
        }
        let (p1, p2) = laguerre_pair(n, z);
        let pp = (nf * p1 - nf * p2) / z;
        nodes[i] = z;
        weights[i] = -1.0 / (pp * nf * p2);
    }
    Rule { nodes, weights }
}

/// `(L_n(z), L_{n-1}(z))`.
fn laguerre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = (((2 * j - 1) as f64 - z) * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    (p1, p2)
}

fn apply_rule(f: &mut dyn FnMut(f64, &mut [f64]), a: f64, b: f64, out: &mut [f64], buf: &mut [f64]) {
    let rule = legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    out.iter_mut().for_each(|v| *v = 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(mid + half * x, buf);
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o += w * half * v;
        }
    }
}

/// Outcome of [`integrate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Integral {
    pub values: Vec<f64>,
    /// Leaf intervals used.
    pub panels: usize,
    /// All leaves met the tolerance.
    pub converged: bool,
}

/// Adaptive bisection of `∫_a^b f` for an `m`-vector integrand. A leaf is
/// accepted when splitting it changes no component by more than
/// `rel_tol·scale + abs_tol`, with `scale` the component magnitude on the
/// leaf. At most `max_subdivisions` bisections are performed.
pub fn integrate(
    mut f: impl FnMut(f64, &mut [f64]),
    a: f64,
    b: f64,
    m: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Integral {
    let mut buf = vec![0.0; m];
    let mut whole = vec![0.0; m];
    apply_rule(&mut f, a, b, &mut whole, &mut buf);
    let mut stack: Vec<(f64, f64, Vec<f64>)> = vec![(a, b, whole)];
    let mut values = vec![0.0; m];
    let mut splits = 0usize;
    let mut panels = 0usize;
    let mut converged = true;
    let mut left = vec![0.0; m];
    let mut right = vec![0.0; m];
    while let Some((lo, hi, est)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        apply_rule(&mut f, lo, mid, &mut left, &mut buf);
        apply_rule(&mut f, mid, hi, &mut right, &mut buf);
        let ok = (0..m).all(|k| {
            let refined = left[k] + right[k];
            (refined - est[k]).abs() <= rel_tol * refined.abs().max(est[k].abs()) + abs_tol
        });
        if ok || splits >= max_subdivisions {
            converged &= ok;
            for k in 0..m {
                values[k] += left[k] + right[k];
            }
            panels += 2;
        } else {
            splits += 1;
            stack.push((mid, hi, right.clone()));
            stack.push((lo, mid, left.clone()));
        }
    }
    Integral {
        values,
        panels,
        converged,
    }
}
