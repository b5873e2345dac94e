//! Exact moments of sign-pattern regions on the sphere.
//!
//! A region `{n : s_k m_k . n > 0 for all k}` is a convex spherical polygon
//! whose edges lie on the great circles orthogonal to the constraint normals
//! `c_k = s_k m_k`. Its first moment is
//! `int_P n dOmega = 1/2 sum_k theta_k c_k`, where `theta_k` is the length of
//! the edge on circle `k`, and its solid angle is summed over a fan of
//! geodesic triangles from the centroid direction.

use std::f64::consts::PI;

use crate::partition::RegionLabel;
use crate::pauli::{orthonormal_pair, Effect, Vec3};

/// Normals closer than this (in `1 - |c . c'|`) are treated as identical.
const SAME_NORMAL: f64 = 1e-14;
/// Edges shorter than this are dropped.
const MIN_EDGE: f64 = 1e-12;

struct Edge {
    normal: Vec3,
    length: f64,
    ends: [Vec3; 2],
    mid: Vec3,
}

/// `(1/4pi) int_region (1, n) dOmega` as an [`Effect`] for the region in
/// which exactly the directions in `label` are "on". Empty or measure-zero
/// regions give the zero effect.
pub fn exact_polygon_effect(label: RegionLabel, directions: &[Vec3]) -> Effect {
    let mut normals: Vec<Vec3> = Vec::with_capacity(directions.len());
    for (k, m) in directions.iter().enumerate() {
        let c = if label.contains(k) { *m } else { -m };
        let mut duplicate = false;
        for existing in &normals {
            let d = existing.dot(&c);
            if d < -1.0 + SAME_NORMAL {
                return Effect::ZERO;
            }
            if d > 1.0 - SAME_NORMAL {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            normals.push(c);
        }
    }

    match normals.len() {
        0 => return Effect::scalar(1.0),
        1 => return Effect::new(0.5, normals[0] * 0.25),
        _ => {}
    }

    let edges: Vec<Edge> = (0..normals.len())
        .filter_map(|k| edge_on_circle(k, &normals))
        .collect();
    if edges.is_empty() {
        return Effect::ZERO;
    }

    let mut moment = Vec3::zeros();
    for e in &edges {
        moment += e.normal * (0.5 * e.length);
    }
    let Some(center) = moment.try_normalize(1e-14) else {
        return Effect::ZERO;
    };

    // fan of geodesic triangles from an interior point, each edge split in two
    let solid_angle: f64 = edges
        .iter()
        .map(|e| triangle_area(&center, &e.ends[0], &e.mid) + triangle_area(&center, &e.mid, &e.ends[1]))
        .sum::<f64>()
        .abs();

    Effect::new(solid_angle / (4.0 * PI), moment / (4.0 * PI))
}

/// Signed solid angle of the geodesic triangle `(a, b, c)`.
fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// The closed arc of great circle `k` on which every other constraint holds.
fn edge_on_circle(k: usize, normals: &[Vec3]) -> Option<Edge> {
    let c = normals[k];
    let (e1, e2) = orthonormal_pair(&c);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (j, other) in normals.iter().enumerate() {
        if j == k {
            continue;
        }
        // c_j . p(phi) = R cos(phi - center) >= 0 on a half circle
        let center = other.dot(&e2).atan2(other.dot(&e1));
        if lo.is_infinite() {
            lo = center - PI / 2.0;
            hi = center + PI / 2.0;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let shifted = center + ((mid - center) / (2.0 * PI)).round() * 2.0 * PI;
        lo = lo.max(shifted - PI / 2.0);
        hi = hi.min(shifted + PI / 2.0);
        if hi - lo < MIN_EDGE {
            return None;
        }
    }
    let at = |phi: f64| e1 * phi.cos() + e2 * phi.sin();
    Some(Edge {
        normal: c,
        length: hi - lo,
        ends: [at(lo), at(hi)],
        mid: at(0.5 * (lo + hi)),
    })
}
