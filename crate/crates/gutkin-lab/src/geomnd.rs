//! Convex bodies in R^d: spheres, axis-frame ellipsoids, and constant-width
//! bodies of revolution, with membership tests, ray exits, inner normals,
//! and closed-form shape operators on the quadrics.
//!
//! Bodies are exact analytic variants rather than meshes; the curvature and
//! angle checks downstream need more accuracy than mesh normals give.

use crate::error::{Error, Result};
use crate::geom2d::{CurveSpec, SupportCurve2D};
use crate::numerics::golden_section_min;
use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance for "is this point on the boundary" checks.
const BOUNDARY_TOL: f64 = 1e-9;
/// Ray-exit refinement target for the bisected revolution variant.
const RAY_GAP_TOL: f64 = 1e-12;
/// Maximum bisection steps for the revolution ray exit.
const RAY_MAX_ITER: usize = 200;

/// Serialized body; accepted JSON shapes are
/// `{"type":"sphere","d":4,"radius":1.0}`,
/// `{"type":"ellipsoid","semi_axes":[2,1,1]}`, and
/// `{"type":"revolution","profile":{...support2d...}}`.
/// Optional fields: `center` (sphere/ellipsoid), `frame` (ellipsoid, columns
/// of an orthonormal matrix), `axis` (revolution, defaults to the z axis).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Sphere {
        d: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<Vec<Vec<f64>>>,
    },
    Revolution {
        profile: CurveSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<[f64; 3]>,
    },
}

/// A bounded, smooth, strictly convex body in R^d.
#[derive(Clone, Debug)]
pub enum ConvexBodyND {
    Sphere {
        center: DVector<f64>,
        radius: f64,
    },
    Ellipsoid {
        center: DVector<f64>,
        semi_axes: DVector<f64>,
        /// Columns are the principal axis directions (orthonormal).
        frame: DMatrix<f64>,
    },
    Revolution(RevolutionBody),
}

/// Surface of revolution of an even constant-width profile about `axis`;
/// always three-dimensional.
#[derive(Clone, Debug)]
pub struct RevolutionBody {
    profile: SupportCurve2D,
    axis: Vector3<f64>,
    // Orthonormal completion of the axis, fixed at construction.
    e_u: Vector3<f64>,
    e_v: Vector3<f64>,
}

/// Boundary point with inner normal and, on quadrics, the shape operator in
/// an orthonormal tangent frame.
///
/// The shape operator S has strictly positive eigenvalues; moving along a
/// tangent direction t turns the inner normal by -S t (so on the unit sphere
/// S is the identity). Revolution bodies expose normals only.
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub position: DVector<f64>,
    pub inner_normal: DVector<f64>,
    /// (d-1) x (d-1), in the columns of `tangent_frame`; None for revolution
    /// bodies.
    pub shape_operator: Option<DMatrix<f64>>,
    /// d x (d-1) orthonormal basis of the tangent space; None for revolution
    /// bodies.
    pub tangent_frame: Option<DMatrix<f64>>,
}

impl RevolutionBody {
    pub fn new(profile: SupportCurve2D, axis: Vector3<f64>) -> Result<Self> {
        if let Some(t) = profile.harmonics().iter().find(|t| t.n % 2 == 0) {
            return Err(Error::NotConstantWidth { n: t.n });
        }
        if let Some(t) = profile.harmonics().iter().find(|t| t.b != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "revolution profile must be even in theta; harmonic n = {} has b = {}",
                t.n, t.b
            )));
        }
        let norm = axis.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("revolution axis must be nonzero".into()));
        }
        let axis = axis / norm;
        // Deterministic orthonormal completion: reflect the least-aligned
        // coordinate direction.
        let k = (0..3).min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs())).unwrap();
        let mut e_u = Vector3::zeros();
        e_u[k] = 1.0;
        e_u -= axis * axis[k];
        e_u /= e_u.norm();
        let e_v = axis.cross(&e_u);
        Ok(Self { profile, axis, e_u, e_v })
    }

    pub fn profile(&self) -> &SupportCurve2D {
        &self.profile
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    /// Meridian frame (radial direction) at a point off the axis; falls back
    /// to `e_u` on the axis itself.
    pub fn frame_at(&self, x: &Vector3<f64>) -> (f64, f64, Vector3<f64>) {
        let xi = x.dot(&self.axis);
        let radial = x - xi * self.axis;
        let eta = radial.norm();
        let e_rad = if eta > 1e-300 { radial / eta } else { self.e_u };
        (xi, eta, e_rad)
    }

    /// Embed a point of the profile plane at rotation angle phi.
    pub fn embed(&self, xi: f64, eta: f64, phi: f64) -> Vector3<f64> {
        xi * self.axis + eta * (phi.cos() * self.e_u + phi.sin() * self.e_v)
    }

    /// Signed support gap of the reduced planar point (xi, eta):
    /// max over theta of xi cos(theta) + eta sin(theta) - h(theta).
    /// Negative inside, zero on the boundary, positive outside. Also returns
    /// the maximizing theta, which at boundary points is the support
    /// parameter of the outer normal.
    pub fn planar_gap(&self, xi: f64, eta: f64, warm: Option<f64>) -> (f64, f64) {
        let psi = |t: f64| xi * t.cos() + eta * t.sin() - self.profile.h(t);
        let dpsi = |t: f64| -xi * t.sin() + eta * t.cos() - self.profile.dh(t);
        // psi'' = -(xi cos + eta sin) - h''; h'' = rho - h.
        let ddpsi = |t: f64| {
            -(xi * t.cos() + eta * t.sin()) - (self.profile.rho(t) - self.profile.h(t))
        };
        let newton = |start: f64| -> Option<f64> {
            let mut t = start;
            for _ in 0..60 {
                let d2 = ddpsi(t);
                if d2 >= -1e-12 {
                    return None;
                }
                let step = dpsi(t) / d2;
                t -= step;
                if step.abs() < 1e-14 {
                    return Some(t);
                }
            }
            None
        };
        if let Some(w) = warm {
            if let Some(t) = newton(w) {
                return (psi(t), t);
            }
        }
        // Cold path: coarse grid, then golden-section refinement.
        let grid = 256;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..grid {
            let t = 2.0 * PI * i as f64 / grid as f64;
            let v = psi(t);
            if v > best.0 {
                best = (v, t);
            }
        }
        if let Some(t) = newton(best.1) {
            return (psi(t), t);
        }
        let spacing = 2.0 * PI / grid as f64;
        let (t, neg) = golden_section_min(|t| -psi(t), best.1 - spacing, best.1 + spacing);
        (-neg, t)
    }
}

impl ConvexBodyND {
    pub fn sphere(d: usize, radius: f64) -> Self {
        assert!(d >= 2 && radius > 0.0);
        ConvexBodyND::Sphere { center: DVector::zeros(d), radius }
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Self {
        let d = semi_axes.len();
        assert!(d >= 2 && semi_axes.iter().all(|&a| a > 0.0));
        ConvexBodyND::Ellipsoid {
            center: DVector::zeros(d),
            semi_axes: DVector::from_column_slice(semi_axes),
            frame: DMatrix::identity(d, d),
        }
    }

    pub fn revolution(profile: SupportCurve2D, axis: Vector3<f64>) -> Result<Self> {
        Ok(ConvexBodyND::Revolution(RevolutionBody::new(profile, axis)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBodyND::Sphere { center, .. } => center.len(),
            ConvexBodyND::Ellipsoid { center, .. } => center.len(),
            ConvexBodyND::Revolution(_) => 3,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexBodyND::Sphere { radius, .. } => 2.0 * radius,
            ConvexBodyND::Ellipsoid { semi_axes, .. } => 2.0 * semi_axes.max(),
            ConvexBodyND::Revolution(rev) => rev.profile.diameter_bound(),
        }
    }

    /// True for bodies that are geometrically round spheres, whatever the
    /// representing variant.
    pub fn is_round_sphere(&self) -> bool {
        match self {
            ConvexBodyND::Sphere { .. } => true,
            ConvexBodyND::Ellipsoid { semi_axes, .. } => {
                semi_axes.iter().all(|&a| a == semi_axes[0])
            }
            ConvexBodyND::Revolution(rev) => rev.profile.harmonics().is_empty(),
        }
    }

    /// Signed distance-like gap: negative inside, zero on the boundary,
    /// positive outside. Exact distance for spheres and revolution bodies,
    /// a radial estimate for ellipsoids.
    pub fn signed_gap(&self, x: &DVector<f64>) -> f64 {
        match self {
            ConvexBodyND::Sphere { center, radius } => (x - center).norm() - radius,
            ConvexBodyND::Ellipsoid { center, semi_axes, frame } => {
                let local = frame.transpose() * (x - center);
                let z = local.component_div(semi_axes);
                let zn = z.norm();
                if zn > 1e-300 {
                    (zn - 1.0) * local.norm() / zn
                } else {
                    -semi_axes.min()
                }
            }
            ConvexBodyND::Revolution(rev) => {
                let (xi, eta, _) = rev.frame_at(&v3(x));
                rev.planar_gap(xi, eta, None).0
            }
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.signed_gap(x) <= 1e-12 * self.diameter()
    }

    /// Forward exit point of the ray origin + t dir, t > 0. The origin must
    /// be inside the body or on its boundary with the ray entering.
    pub fn ray_exit(&self, origin: &DVector<f64>, dir: &DVector<f64>) -> Result<SurfacePoint> {
        let d = self.dim();
        if origin.len() != d || dir.len() != d {
            return Err(Error::InvalidParameter(format!(
                "ray in dimension {} against a body in dimension {}",
                dir.len(),
                d
            )));
        }
        let norm = dir.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("ray direction must be nonzero".into()));
        }
        let dir = dir / norm;
        let diam = self.diameter();
        if self.signed_gap(origin) > BOUNDARY_TOL * diam {
            return Err(Error::RayMisses { reason: "origin lies outside the body".into() });
        }
        let t_min = 1e-12 * diam;
        match self {
            ConvexBodyND::Sphere { center, radius } => {
                let z = origin - center;
                let b = z.dot(&dir);
                let c = z.dot(&z) - radius * radius;
                let disc = b * b - c;
                if disc <= 0.0 {
                    return Err(Error::RayMisses { reason: "no real crossing".into() });
                }
                let t = -b + disc.sqrt();
                if t <= t_min {
                    return Err(Error::RayMisses {
                        reason: "tangent or outward launch at the boundary".into(),
                    });
                }
                self.surface_point_unchecked(origin + t * dir)
            }
            ConvexBodyND::Ellipsoid { center, semi_axes, frame } => {
                let z0 = (frame.transpose() * (origin - center)).component_div(semi_axes);
                let dz = (frame.transpose() * &dir).component_div(semi_axes);
                let a = dz.dot(&dz);
                let b = z0.dot(&dz);
                let c = z0.dot(&z0) - 1.0;
                let disc = b * b - a * c;
                if disc <= 0.0 {
                    return Err(Error::RayMisses { reason: "no real crossing".into() });
                }
                let t = (-b + disc.sqrt()) / a;
                if t <= t_min {
                    return Err(Error::RayMisses {
                        reason: "tangent or outward launch at the boundary".into(),
                    });
                }
                self.surface_point_unchecked(origin + t * dir)
            }
            ConvexBodyND::Revolution(rev) => {
                let o3 = v3(origin);
                let d3 = v3(&dir);
                let gap_at = |t: f64, warm: Option<f64>| {
                    let p = o3 + t * d3;
                    let (xi, eta, _) = rev.frame_at(&p);
                    rev.planar_gap(xi, eta, warm)
                };
                let (g0, mut warm) = gap_at(0.0, None);
                // Bracket: the diameter bound is outside along any interior
                // ray, the near end must still be inside.
                let mut lo = if g0 < -RAY_GAP_TOL * diam { 0.0 } else { BOUNDARY_TOL * diam };
                let (g_lo, w_lo) = gap_at(lo, Some(warm));
                warm = w_lo;
                if g_lo >= 0.0 {
                    return Err(Error::RayMisses {
                        reason: "tangent or outward launch at the boundary".into(),
                    });
                }
                let mut hi = diam;
                let (mut g_hi, w_hi) = gap_at(hi, Some(warm));
                if g_hi <= 0.0 {
                    hi = 2.0 * diam;
                    let (g2, w2) = gap_at(hi, Some(w_hi));
                    g_hi = g2;
                    warm = w2;
                    if g_hi <= 0.0 {
                        return Err(Error::RayMisses { reason: "no forward crossing".into() });
                    }
                } else {
                    warm = w_hi;
                }
                let mut t_exit = hi;
                let mut theta_exit = warm;
                for _ in 0..RAY_MAX_ITER {
                    let mid = 0.5 * (lo + hi);
                    let (g, w) = gap_at(mid, Some(theta_exit));
                    t_exit = mid;
                    theta_exit = w;
                    if g.abs() < RAY_GAP_TOL * diam {
                        break;
                    }
                    if g < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let p = o3 + t_exit * d3;
                let (_, _, e_rad) = rev.frame_at(&p);
                let n_in = -(theta_exit.cos() * rev.axis + theta_exit.sin() * e_rad);
                Ok(SurfacePoint {
                    position: dv(&p),
                    inner_normal: dv(&n_in.normalize()),
                    shape_operator: None,
                    tangent_frame: None,
                })
            }
        }
    }

    /// Boundary data at a point already known to lie on the surface
    /// (within 1e-9 of it, relative to the body diameter).
    pub fn surface_point(&self, position: &DVector<f64>) -> Result<SurfacePoint> {
        let gap = self.signed_gap(position);
        if gap.abs() > BOUNDARY_TOL * self.diameter().max(1.0) {
            return Err(Error::NotOnBoundary { gap });
        }
        self.surface_point_unchecked(position.clone())
    }

    fn surface_point_unchecked(&self, position: DVector<f64>) -> Result<SurfacePoint> {
        match self {
            ConvexBodyND::Sphere { center, radius } => {
                let d = self.dim();
                let out = (&position - center).normalize();
                let frame = tangent_frame(&out);
                let shape = DMatrix::identity(d - 1, d - 1) / *radius;
                Ok(SurfacePoint {
                    position,
                    inner_normal: -out,
                    shape_operator: Some(shape),
                    tangent_frame: Some(frame),
                })
            }
            ConvexBodyND::Ellipsoid { center, semi_axes, frame } => {
                let d = self.dim();
                let local = frame.transpose() * (&position - center);
                // F = sum (local_i / a_i)^2 - 1; grad and Hessian in closed form.
                let grad_local =
                    DVector::from_fn(d, |i, _| 2.0 * local[i] / (semi_axes[i] * semi_axes[i]));
                let grad = frame * grad_local;
                let gnorm = grad.norm();
                let n_out = grad / gnorm;
                let tf = tangent_frame(&n_out);
                let h_apply = |t: DVector<f64>| {
                    let tl = frame.transpose() * t;
                    let scaled =
                        DVector::from_fn(d, |i, _| 2.0 * tl[i] / (semi_axes[i] * semi_axes[i]));
                    frame * scaled
                };
                let mut shape = DMatrix::zeros(d - 1, d - 1);
                for j in 0..d - 1 {
                    let ht = h_apply(tf.column(j).into_owned());
                    for i in 0..d - 1 {
                        shape[(i, j)] = tf.column(i).dot(&ht) / gnorm;
                    }
                }
                // Symmetrize away the last bits of roundoff.
                let shape = (&shape + shape.transpose()) * 0.5;
                Ok(SurfacePoint {
                    position,
                    inner_normal: -n_out,
                    shape_operator: Some(shape),
                    tangent_frame: Some(tf),
                })
            }
            ConvexBodyND::Revolution(rev) => {
                let p = v3(&position);
                let (xi, eta, e_rad) = rev.frame_at(&p);
                let (_, theta) = rev.planar_gap(xi, eta, None);
                let n_in = -(theta.cos() * rev.axis + theta.sin() * e_rad);
                Ok(SurfacePoint {
                    position,
                    inner_normal: dv(&n_in.normalize()),
                    shape_operator: None,
                    tangent_frame: None,
                })
            }
        }
    }

    pub fn to_spec(&self) -> BodySpec {
        match self {
            ConvexBodyND::Sphere { center, radius } => BodySpec::Sphere {
                d: center.len(),
                radius: *radius,
                center: if center.iter().all(|&c| c == 0.0) {
                    None
                } else {
                    Some(center.iter().copied().collect())
                },
            },
            ConvexBodyND::Ellipsoid { center, semi_axes, frame } => BodySpec::Ellipsoid {
                semi_axes: semi_axes.iter().copied().collect(),
                center: if center.iter().all(|&c| c == 0.0) {
                    None
                } else {
                    Some(center.iter().copied().collect())
                },
                frame: if frame.is_identity(0.0) {
                    None
                } else {
                    Some(frame.column_iter().map(|c| c.iter().copied().collect()).collect())
                },
            },
            ConvexBodyND::Revolution(rev) => BodySpec::Revolution {
                profile: rev.profile.to_spec(),
                axis: Some([rev.axis.x, rev.axis.y, rev.axis.z]),
            },
        }
    }
}

impl TryFrom<BodySpec> for ConvexBodyND {
    type Error = Error;

    fn try_from(spec: BodySpec) -> Result<Self> {
        match spec {
            BodySpec::Sphere { d, radius, center } => {
                if d < 2 {
                    return Err(Error::InvalidParameter(format!("sphere d must be >= 2, got {d}")));
                }
                if !(radius > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
                let center = match center {
                    Some(c) if c.len() == d => DVector::from_vec(c),
                    Some(c) => {
                        return Err(Error::InvalidParameter(format!(
                            "sphere center has {} entries, expected {d}",
                            c.len()
                        )))
                    }
                    None => DVector::zeros(d),
                };
                Ok(ConvexBodyND::Sphere { center, radius })
            }
            BodySpec::Ellipsoid { semi_axes, center, frame } => {
                let d = semi_axes.len();
                if d < 2 {
                    return Err(Error::InvalidParameter(
                        "ellipsoid needs at least two semi axes".into(),
                    ));
                }
                if let Some(a) = semi_axes.iter().find(|&&a| !(a > 0.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "ellipsoid semi_axes must be positive, got {a}"
                    )));
                }
                let center = match center {
                    Some(c) if c.len() == d => DVector::from_vec(c),
                    Some(c) => {
                        return Err(Error::InvalidParameter(format!(
                            "ellipsoid center has {} entries, expected {d}",
                            c.len()
                        )))
                    }
                    None => DVector::zeros(d),
                };
                let frame = match frame {
                    None => DMatrix::identity(d, d),
                    Some(cols) => {
                        if cols.len() != d || cols.iter().any(|c| c.len() != d) {
                            return Err(Error::InvalidParameter(format!(
                                "ellipsoid frame must be {d} columns of length {d}"
                            )));
                        }
                        let m = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
                        let gram = m.transpose() * &m;
                        if (gram - DMatrix::identity(d, d)).norm() > 1e-10 {
                            return Err(Error::InvalidParameter(
                                "ellipsoid frame columns are not orthonormal".into(),
                            ));
                        }
                        m
                    }
                };
                Ok(ConvexBodyND::Ellipsoid {
                    center,
                    semi_axes: DVector::from_vec(semi_axes),
                    frame,
                })
            }
            BodySpec::Revolution { profile, axis } => {
                let profile = SupportCurve2D::try_from(profile)?;
                let axis = axis.map_or(Vector3::z(), Vector3::from);
                ConvexBodyND::revolution(profile, axis)
            }
        }
    }
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `v`,
/// as the d x (d-1) tail of a Householder reflector; deterministic in `v`.
pub fn tangent_frame(v: &DVector<f64>) -> DMatrix<f64> {
    let d = v.len();
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = v.clone();
    u[0] += s;
    let u = u.normalize();
    DMatrix::from_fn(d, d - 1, |i, j| {
        let col = j + 1;
        (if i == col { 1.0 } else { 0.0 }) - 2.0 * u[i] * u[col]
    })
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn dv(x: &Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}
