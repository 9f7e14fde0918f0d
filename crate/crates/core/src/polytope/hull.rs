//! Convex hulls in dimension ≤ 4 by the beneath–beyond method, run in the
//! coordinates of the affine hull so lower-dimensional inputs work unchanged.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::HalfSpace;
use crate::linalg::{hyperplane_normal, orthonormal_basis};
use crate::vector::Vector;
use crate::EPS_GEO;

/// Everything derived from a point set in one pass.
pub(crate) struct HullData {
    pub vertices: Vec<Vector>,
    pub affine_dim: usize,
    pub facets: Vec<HalfSpace>,
    /// Boundary simplices (ambient coordinates), present only for
    /// full-dimensional hulls.
    pub boundary: Vec<Vec<Vector>>,
}

pub(crate) fn scale_of(points: &[Vector]) -> f64 {
    points.iter().fold(1.0f64, |s, p| s.max(p.norm_inf()))
}

pub(crate) fn dedup(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (*q - *p).norm_inf() <= tol) {
            out.push(*p);
        }
    }
    out
}

struct LocalFacet {
    verts: Vec<usize>,
    normal: Vector,
    offset: f64,
}

pub(crate) fn compute(points: &[Vector]) -> HullData {
    let n = points[0].dim();
    let scale = scale_of(points);
    let eps = EPS_GEO * scale;
    let pts = dedup(points, eps);

    // Affine hull: origin + orthonormal basis.
    let origin = pts[0];
    let diffs: Vec<Vector> = pts.iter().map(|p| *p - origin).collect();
    let basis = orthonormal_basis(&farthest_first(&diffs), eps);
    let k = basis.len();
    let local: Vec<Vector> = diffs
        .iter()
        .map(|d| {
            let mut y = Vector::zeros(k);
            for (j, b) in basis.iter().enumerate() {
                y[j] = d.dot(b);
            }
            y
        })
        .collect();

    let mut complement_src: Vec<Vector> = basis.clone();
    complement_src.extend((0..n).map(|i| Vector::basis(n, i)));
    let full = orthonormal_basis(&complement_src, 1e-8);
    let complement: Vec<Vector> = full[k..].to_vec();

    let lift = |nu: &Vector, off: f64| -> HalfSpace {
        let mut normal = Vector::zeros(n);
        for (j, b) in basis.iter().enumerate() {
            normal += *b * nu[j];
        }
        HalfSpace::from_unit(normal, off + normal.dot(&origin))
    };

    let mut facets: Vec<HalfSpace> = Vec::new();
    for w in &complement {
        let c = w.dot(&origin);
        facets.push(HalfSpace::from_unit(*w, c));
        facets.push(HalfSpace::from_unit(-*w, -c));
    }

    match k {
        0 => HullData {
            vertices: vec![origin],
            affine_dim: 0,
            facets,
            boundary: Vec::new(),
        },
        1 => {
            let (imin, imax) = extremes_1d(&local);
            let lo = local[imin][0];
            let hi = local[imax][0];
            facets.push(lift(&Vector::from_slice(&[1.0]), hi));
            facets.push(lift(&Vector::from_slice(&[-1.0]), -lo));
            let boundary = if n == 1 {
                vec![vec![pts[imin]], vec![pts[imax]]]
            } else {
                Vec::new()
            };
            HullData {
                vertices: vec![pts[imin], pts[imax]],
                affine_dim: 1,
                facets,
                boundary,
            }
        }
        _ => {
            let simplicial = beneath_beyond(&local, eps);
            // Merge coplanar simplicial facets into true facets.
            let mut merged: Vec<(Vector, f64)> = Vec::new();
            for f in &simplicial {
                if !merged
                    .iter()
                    .any(|(nm, off)| nm.dot(&f.normal) > 1.0 - 1e-9 && (off - f.offset).abs() <= eps)
                {
                    merged.push((f.normal, f.offset));
                }
            }
            let mut used: Vec<usize> = simplicial.iter().flat_map(|f| f.verts.iter().copied()).collect();
            used.sort_unstable();
            used.dedup();
            let vertices: Vec<Vector> = used
                .iter()
                .copied()
                .filter(|&i| {
                    let active: Vec<Vector> = merged
                        .iter()
                        .filter(|(nm, off)| (nm.dot(&local[i]) - off).abs() <= eps)
                        .map(|(nm, _)| *nm)
                        .collect();
                    orthonormal_basis(&active, 1e-7).len() == k
                })
                .map(|i| pts[i])
                .collect();
            for (nm, off) in &merged {
                facets.push(lift(nm, *off));
            }
            let boundary = if k == n {
                simplicial
                    .iter()
                    .map(|f| f.verts.iter().map(|&i| pts[i]).collect())
                    .collect()
            } else {
                Vec::new()
            };
            HullData {
                vertices,
                affine_dim: k,
                facets,
                boundary,
            }
        }
    }
}

/// Reorders difference vectors so that long, mutually far vectors come first;
/// this keeps Gram–Schmidt well conditioned.
fn farthest_first(diffs: &[Vector]) -> Vec<Vector> {
    let mut rest: Vec<Vector> = diffs.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    let mut chosen: Vec<Vector> = Vec::new();
    while !rest.is_empty() {
        let basis = orthonormal_basis(&chosen, 0.0);
        let (idx, _) = rest
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut w = *v;
                for b in &basis {
                    w -= *b * w.dot(b);
                }
                (i, w.norm())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let v = rest.swap_remove(idx);
        chosen.push(v);
        out.push(v);
        if chosen.len() >= v.dim() {
            out.extend(rest.drain(..));
        }
    }
    out
}

fn extremes_1d(local: &[Vector]) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, p) in local.iter().enumerate() {
        if p[0] < local[imin][0] {
            imin = i;
        }
        if p[0] > local[imax][0] {
            imax = i;
        }
    }
    (imin, imax)
}

fn oriented_facet(pts: &[Vector], verts: Vec<usize>, interior: &Vector) -> Option<LocalFacet> {
    let corners: Vec<Vector> = verts.iter().map(|&i| pts[i]).collect();
    let mut normal = hyperplane_normal(&corners)?;
    let mut offset = normal.dot(&corners[0]);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    Some(LocalFacet {
        verts,
        normal,
        offset,
    })
}

/// Full-dimensional hull in ℝᵏ (k ≥ 2). Returns simplicial boundary facets.
fn beneath_beyond(pts: &[Vector], eps: f64) -> Vec<LocalFacet> {
    let k = pts[0].dim();
    // Initial simplex: greedy by distance to the current affine span.
    let mut simplex = vec![0usize];
    let far = (0..pts.len())
        .max_by(|&a, &b| pts[a].distance(&pts[0]).total_cmp(&pts[b].distance(&pts[0])))
        .unwrap();
    simplex[0] = far;
    while simplex.len() < k + 1 {
        let base = pts[simplex[0]];
        let dirs: Vec<Vector> = simplex[1..].iter().map(|&i| pts[i] - base).collect();
        let basis = orthonormal_basis(&dirs, 0.0);
        let next = (0..pts.len())
            .filter(|i| !simplex.contains(i))
            .max_by(|&a, &b| {
                residual(&(pts[a] - base), &basis).total_cmp(&residual(&(pts[b] - base), &basis))
            })
            .unwrap();
        simplex.push(next);
    }
    let interior = simplex
        .iter()
        .fold(Vector::zeros(k), |acc, &i| acc + pts[i])
        * (1.0 / (k + 1) as f64);

    let mut facets: Vec<LocalFacet> = Vec::new();
    for skip in 0..=k {
        let verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != skip)
            .map(|(_, &i)| i)
            .collect();
        if let Some(f) = oriented_facet(pts, verts, &interior) {
            facets.push(f);
        }
    }

    let mut order: Vec<usize> = (0..pts.len()).filter(|i| !simplex.contains(i)).collect();
    order.sort_by(|&a, &b| {
        pts[b]
            .distance(&interior)
            .total_cmp(&pts[a].distance(&interior))
    });

    for p in order {
        let point = pts[p];
        let visible: Vec<bool> = facets
            .iter()
            .map(|f| f.normal.dot(&point) - f.offset > eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridges: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, v)| **v) {
            for drop in 0..f.verts.len() {
                let mut r: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != drop)
                    .map(|(_, &i)| i)
                    .collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<LocalFacet> = facets
            .into_iter()
            .zip(visible)
            .filter(|(_, v)| !*v)
            .map(|(f, _)| f)
            .collect();
        for (ridge, count) in ridges {
            if count == 1 {
                let mut verts = ridge;
                verts.push(p);
                if let Some(f) = oriented_facet(pts, verts, &interior) {
                    kept.push(f);
                }
            }
        }
        facets = kept;
    }
    facets
}

fn residual(v: &Vector, basis: &[Vector]) -> f64 {
    let mut w = *v;
    for b in basis {
        w -= *b * w.dot(b);
    }
    w.norm()
}
