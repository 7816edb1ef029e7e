//! Deterministic boundary samplers: seeded low-discrepancy (foot, tangent)
//! pairs on spheres and ellipsoids, a product grid for bodies of revolution,
//! and a golden-ratio parameter sequence for planar curves.
//!
//! All samplers are pure functions of (body, count, seed), so scans can be
//! parallelized and still reduce in a fixed order.

use crate::geomnd::{tangent_frame, ConvexBodyND};
use crate::numerics::{splitmix64, unit_from_bits};
use nalgebra::DVector;
use std::f64::consts::PI;

/// One chord launch site: boundary foot plus a unit tangent there.
pub type FootTangent = (DVector<f64>, DVector<f64>);

/// Root of x^(s+1) = x + 1; powers of 1/gamma give the Kronecker directions
/// of an s-dimensional low-discrepancy sequence.
fn kronecker_gamma(s: usize) -> f64 {
    let p = (s + 1) as f64;
    let mut x = 1.5f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / p);
    }
    x
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Two standard Gaussians from two uniforms.
fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.max(1e-16).ln()).sqrt();
    let t = 2.0 * PI * u2;
    (r * t.cos(), r * t.sin())
}

/// Low-discrepancy points in the unit cube [0,1)^dim with a seeded shift
/// (Cranley-Patterson rotation), as an iterator-free flat table.
pub fn kronecker_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let gamma = kronecker_gamma(dim);
    let mut alphas = Vec::with_capacity(dim);
    let mut g = 1.0;
    for _ in 0..dim {
        g /= gamma;
        alphas.push(g);
    }
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let shifts: Vec<f64> =
        (0..dim).map(|_| unit_from_bits(splitmix64(&mut state))).collect();
    (0..count)
        .map(|j| {
            (0..dim)
                .map(|i| frac(0.5 + (j as f64 + 1.0) * alphas[i] + shifts[i]))
                .collect()
        })
        .collect()
}

/// Unit vector in R^d from a row of uniforms (consumed two at a time).
fn gaussian_direction(uniforms: &[f64], d: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    let mut i = 0;
    while i < d {
        let (z1, z2) = box_muller(uniforms[i], uniforms[i + 1]);
        v[i] = z1;
        if i + 1 < d {
            v[i + 1] = z2;
        }
        i += 2;
    }
    let n = v.norm();
    if n > 1e-12 {
        v / n
    } else {
        let mut e = DVector::zeros(d);
        e[0] = 1.0;
        e
    }
}

/// Boundary (foot, unit tangent) pairs for defect scans. Spheres and
/// ellipsoids use a seeded Kronecker sequence mapped through Gaussian
/// directions; revolution bodies use a (support angle x rotation x
/// tangent angle) product grid with the rotation offset by the seed, which
/// may return slightly more than `count` pairs (the full grid).
pub fn boundary_tangent_samples(
    body: &ConvexBodyND,
    count: usize,
    seed: u64,
) -> Vec<FootTangent> {
    assert!(count >= 1, "sampler needs at least one sample");
    match body {
        ConvexBodyND::Sphere { .. } | ConvexBodyND::Ellipsoid { .. } => {
            quadric_samples(body, count, seed)
        }
        ConvexBodyND::Revolution(_) => revolution_samples(body, count, seed),
    }
}

fn quadric_samples(body: &ConvexBodyND, count: usize, seed: u64) -> Vec<FootTangent> {
    let d = body.dim();
    let pad = d + (d % 2);
    let rows = kronecker_points(2 * pad, count, seed);
    rows.iter()
        .map(|row| {
            let z = gaussian_direction(&row[..pad], d);
            let position = match body {
                ConvexBodyND::Sphere { center, radius } => center + *radius * &z,
                ConvexBodyND::Ellipsoid { center, semi_axes, frame } => {
                    center + frame * z.component_mul(semi_axes)
                }
                _ => unreachable!(),
            };
            let sp = body.surface_point(&position).expect("sampled foot is on the boundary");
            let g = gaussian_direction(&row[pad..], d);
            let proj = &g - g.dot(&sp.inner_normal) * &sp.inner_normal;
            let norm = proj.norm();
            let tangent = if norm > 1e-12 {
                proj / norm
            } else {
                tangent_frame(&sp.inner_normal).column(0).into_owned()
            };
            (position, tangent)
        })
        .collect()
}

fn revolution_samples(body: &ConvexBodyND, count: usize, seed: u64) -> Vec<FootTangent> {
    let rev = match body {
        ConvexBodyND::Revolution(rev) => rev,
        _ => unreachable!(),
    };
    let m = (count as f64).cbrt().ceil().max(1.0) as usize;
    let mut state = seed ^ 0x1234_5678_9abc_def0;
    let phi_shift = unit_from_bits(splitmix64(&mut state));
    let profile = rev.profile();
    let mut out = Vec::with_capacity(m * m * m);
    for j in 0..m {
        let theta = 2.0 * PI * (j as f64 + 0.5) / m as f64;
        // Reduced profile point: axial and radial coordinates.
        let p2 = profile.position(theta);
        for k in 0..m {
            let phi = 2.0 * PI * frac((k as f64 + 0.5) / m as f64 + phi_shift);
            let foot3 = rev.embed(p2.x, p2.y, phi);
            let foot = DVector::from_column_slice(foot3.as_slice());
            let sp = body.surface_point(&foot).expect("grid foot is on the boundary");
            let basis = tangent_frame(&sp.inner_normal);
            for l in 0..m {
                let psi = 2.0 * PI * (l as f64 + 0.5) / m as f64;
                let tangent =
                    psi.cos() * basis.column(0).into_owned() + psi.sin() * basis.column(1);
                out.push((foot.clone(), tangent));
            }
        }
    }
    out
}

/// Golden-ratio sequence of support angles in [0, 2 pi) with a seeded
/// shift; low discrepancy for planar scans.
pub fn theta_samples(count: usize, seed: u64) -> Vec<f64> {
    assert!(count >= 1, "sampler needs at least one sample");
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut state = seed ^ 0x5bf0_3635_0aeb_7a1e;
    let shift = unit_from_bits(splitmix64(&mut state));
    (0..count)
        .map(|i| 2.0 * PI * frac((i as f64 + 1.0) * inv_phi + shift))
        .collect()
}
