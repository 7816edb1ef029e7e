//! Planar convex curves given by Fourier support functions.
//!
//! A curve is h(theta) = r0 + sum over harmonics of a_n cos(n theta) +
//! b_n sin(n theta), with theta the outer-normal angle. The curvature radius
//! is rho = h + h'', available in closed form from the coefficients, and the
//! boundary point with outer normal u(theta) is h u + h' u_perp. The tangent
//! direction is u_perp, so the tangent angle equals theta + pi/2; all
//! orientations are counterclockwise.

use crate::error::{Error, Result};
use crate::numerics::{golden_section_min, integrate_gl, CompensatedSum};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grid resolution for the construction-time convexity check.
const CONVEXITY_GRID: usize = 4096;
/// Gauss-Legendre nodes per pi/2 of integration range.
const GL_NODES: usize = 64;
/// Panel doubling stops once the integral moves less than this.
const QUADRATURE_TOL: f64 = 1e-10;

/// One Fourier term of a support function: a cos(n theta) + b sin(n theta).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub n: u32,
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// Serialized curve; the JSON shape is
/// `{"type":"support2d","r0":1.0,"harmonics":[{"n":3,"a":0.05,"b":0.0}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CurveSpec {
    #[serde(rename = "support2d")]
    Support2d {
        r0: f64,
        #[serde(default)]
        harmonics: Vec<Harmonic>,
    },
}

/// A strictly convex planar curve encoded by its support function.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportCurve2D {
    r0: f64,
    harmonics: Vec<Harmonic>,
}

/// Boundary data at one support parameter.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub theta: f64,
    pub position: Vector2<f64>,
    /// Unit tangent, counterclockwise.
    pub tangent: Vector2<f64>,
    /// Unit normal pointing into the body.
    pub inner_normal: Vector2<f64>,
    /// Curvature radius rho(theta) = h + h''.
    pub rho: f64,
}

impl SupportCurve2D {
    /// Build a curve, rejecting harmonics below n = 2 and any support
    /// function whose curvature radius dips to zero somewhere.
    pub fn new(r0: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r0 must be positive, got {r0}"
            )));
        }
        for h in &harmonics {
            if h.n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "harmonic index must be >= 2, got n = {}",
                    h.n
                )));
            }
        }
        let curve = Self { r0, harmonics };
        let (theta, min_rho) = curve.min_rho_on_grid(CONVEXITY_GRID);
        if min_rho <= 0.0 {
            return Err(Error::ConvexityViolation { theta, min_rho });
        }
        Ok(curve)
    }

    /// Circle of radius r0.
    pub fn circle(r0: f64) -> Self {
        Self::new(r0, Vec::new()).expect("a positive radius is always convex")
    }

    /// Constant-width curve from odd harmonics (n odd, n >= 3); the width is
    /// 2 r0 in every direction and rho(theta) + rho(theta + pi) = 2 r0.
    pub fn make_constant_width(r0: f64, odd_harmonics: &[(u32, f64)]) -> Result<Self> {
        for &(n, _) in odd_harmonics {
            assert!(n % 2 == 1 && n >= 3, "constant width needs odd n >= 3, got {n}");
        }
        Self::new(
            r0,
            odd_harmonics
                .iter()
                .map(|&(n, a)| Harmonic { n, a, b: 0.0 })
                .collect(),
        )
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// Support function h(theta).
    pub fn h(&self, theta: f64) -> f64 {
        let mut v = self.r0;
        for t in &self.harmonics {
            let nt = t.n as f64 * theta;
            v += t.a * nt.cos() + t.b * nt.sin();
        }
        v
    }

    /// First derivative h'(theta).
    pub fn dh(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for t in &self.harmonics {
            let n = t.n as f64;
            let nt = n * theta;
            v += n * (t.b * nt.cos() - t.a * nt.sin());
        }
        v
    }

    /// Curvature radius rho = h + h''; each harmonic contributes with the
    /// factor 1 - n^2, so no numerical differentiation is involved.
    pub fn rho(&self, theta: f64) -> f64 {
        let mut v = self.r0;
        for t in &self.harmonics {
            let n = t.n as f64;
            let nt = n * theta;
            v += (1.0 - n * n) * (t.a * nt.cos() + t.b * nt.sin());
        }
        v
    }

    /// Derivative of the curvature radius.
    pub fn drho(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for t in &self.harmonics {
            let n = t.n as f64;
            let nt = n * theta;
            v += (1.0 - n * n) * n * (t.b * nt.cos() - t.a * nt.sin());
        }
        v
    }

    /// Boundary point, frame, and curvature radius at support parameter
    /// theta. The position satisfies <position, u(theta)> = h(theta).
    pub fn eval_point(&self, theta: f64) -> CurvePoint {
        let (sin_t, cos_t) = theta.sin_cos();
        let u = Vector2::new(cos_t, sin_t);
        let u_perp = Vector2::new(-sin_t, cos_t);
        CurvePoint {
            theta,
            position: self.h(theta) * u + self.dh(theta) * u_perp,
            tangent: u_perp,
            inner_normal: -u,
            rho: self.rho(theta),
        }
    }

    pub fn position(&self, theta: f64) -> Vector2<f64> {
        self.eval_point(theta).position
    }

    /// True iff every harmonic has odd index, i.e. h(theta) + h(theta + pi)
    /// is constant.
    pub fn is_constant_width(&self) -> bool {
        self.harmonics.iter().all(|t| t.n % 2 == 1)
    }

    /// Antipodal support parameter theta + pi (mod 2 pi); the two points are
    /// joined by the double normal of length 2 r0.
    pub fn antipodal(&self, theta: f64) -> Result<f64> {
        if let Some(t) = self.harmonics.iter().find(|t| t.n % 2 == 0) {
            return Err(Error::NotConstantWidth { n: t.n });
        }
        Ok(wrap_angle(theta + PI))
    }

    /// Chord length from the turning integral: l = (1 / cos delta)
    /// * integral over [0, 2 delta] of cos(phi) rho(theta + phi) dphi,
    /// evaluated in the local tangent frame at theta.
    ///
    /// On bodies with the equal-angle property this equals the length of the
    /// delta-chord launched at theta; in general it is the tangential
    /// component of the chord to the point 2 delta further in support
    /// parameter, rescaled by cos delta.
    pub fn chord_length_integral(&self, theta: f64, delta: f64) -> f64 {
        assert!(
            delta > 0.0 && delta < PI / 2.0,
            "delta must lie in (0, pi/2), got {delta}"
        );
        let f = |phi: f64| phi.cos() * self.rho(theta + phi);
        let mut panels = ((2.0 * delta) / (PI / 2.0)).ceil().max(1.0) as usize;
        let mut coarse = integrate_gl(0.0, 2.0 * delta, panels, GL_NODES, f);
        // The integrand is a trigonometric polynomial, so the first doubling
        // normally already agrees; the loop guards the invariant anyway.
        loop {
            let fine = integrate_gl(0.0, 2.0 * delta, panels * 2, GL_NODES, f);
            if (fine - coarse).abs() < QUADRATURE_TOL || panels >= 64 {
                return fine / delta.cos();
            }
            panels *= 2;
            coarse = fine;
        }
    }

    /// Arc length from support parameter 0 to theta (signed, monotone).
    pub fn arclength(&self, theta: f64) -> f64 {
        let mut s = self.r0 * theta;
        for t in &self.harmonics {
            let n = t.n as f64;
            let nt = n * theta;
            s += (1.0 - n * n) / n * (t.a * nt.sin() - t.b * (nt.cos() - 1.0));
        }
        s
    }

    pub fn perimeter(&self) -> f64 {
        // Each harmonic integrates to zero over a full turn.
        2.0 * PI * self.r0
    }

    /// Inverse of `arclength` by Newton iteration; rho > 0 makes the map
    /// strictly monotone.
    pub fn theta_from_arclength(&self, s: f64) -> f64 {
        let mut theta = s / self.r0;
        for _ in 0..60 {
            let step = (self.arclength(theta) - s) / self.rho(theta);
            theta -= step;
            if step.abs() < 1e-15 * (1.0 + theta.abs()) {
                break;
            }
        }
        theta
    }

    /// Location and value of the minimal curvature radius.
    pub fn min_rho(&self) -> (f64, f64) {
        let (theta_grid, _) = self.min_rho_on_grid(CONVEXITY_GRID);
        let spacing = 2.0 * PI / CONVEXITY_GRID as f64;
        golden_section_min(|t| self.rho(t), theta_grid - spacing, theta_grid + spacing)
    }

    /// Upper bound for the diameter; equals the width 2 r0 for constant-width
    /// curves and over-estimates otherwise.
    pub fn diameter_bound(&self) -> f64 {
        2.0 * (self.r0
            + self
                .harmonics
                .iter()
                .map(|t| t.a.abs() + t.b.abs())
                .sum::<f64>())
    }

    fn min_rho_on_grid(&self, grid: usize) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for i in 0..grid {
            let theta = 2.0 * PI * i as f64 / grid as f64;
            let r = self.rho(theta);
            if r < best.1 {
                best = (theta, r);
            }
        }
        best
    }

    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec::Support2d {
            r0: self.r0,
            harmonics: self.harmonics.clone(),
        }
    }
}

impl TryFrom<CurveSpec> for SupportCurve2D {
    type Error = Error;

    fn try_from(spec: CurveSpec) -> Result<Self> {
        let CurveSpec::Support2d { r0, harmonics } = spec;
        Self::new(r0, harmonics)
    }
}

/// Wrap an angle into [0, 2 pi).
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t == 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Distance between two angles on the circle, in [0, pi].
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(2.0 * PI - d)
}

/// Mean width sanity helper: h(theta) + h(theta + pi).
pub fn width(curve: &SupportCurve2D, theta: f64) -> f64 {
    curve.h(theta) + curve.h(theta + PI)
}

/// Average of rho over a full turn, as a deterministic compensated sum.
pub fn mean_rho(curve: &SupportCurve2D, grid: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in 0..grid {
        acc.add(curve.rho(2.0 * PI * i as f64 / grid as f64));
    }
    acc.value() / grid as f64
}
