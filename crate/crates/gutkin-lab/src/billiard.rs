//! The Birkhoff billiard map on oriented lines, planar phase coordinates
//! (s, p = cos angle-to-tangent), the delta-chord map, and a numerical check
//! that the planar map preserves the area form ds ^ dp.

use crate::error::{Error, Result};
use crate::geom2d::SupportCurve2D;
use crate::geomnd::ConvexBodyND;
use crate::numerics::bisect;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Finite-difference step for the symplectic determinant.
const JAC_FD_STEP: f64 = 1e-5;
/// Distance from |p| = 1 below which the phase is treated as tangent.
const PHASE_MARGIN: f64 = 1e-3;

/// Oriented chord start: boundary foot plus a unit direction entering the
/// body.
#[derive(Clone, Debug)]
pub struct OrientedLine {
    pub foot: DVector<f64>,
    pub dir: DVector<f64>,
}

impl OrientedLine {
    /// Validates foot on the boundary, dir unit, and dir entering the body.
    pub fn new(body: &ConvexBodyND, foot: DVector<f64>, dir: DVector<f64>) -> Result<Self> {
        if (dir.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "line direction must be unit, |dir| = {}",
                dir.norm()
            )));
        }
        let sp = body.surface_point(&foot)?;
        if dir.dot(&sp.inner_normal) <= 0.0 {
            return Err(Error::RayMisses { reason: "direction does not enter the body".into() });
        }
        Ok(Self { foot, dir })
    }
}

/// Planar phase point: arc length s along the curve (mod perimeter) and
/// p = cos of the angle between the outgoing direction and the tangent,
/// p in (-1, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint2D {
    pub s: f64,
    pub p: f64,
}

/// One chord with the angles it makes against the boundary at both ends.
///
/// `launch_angle` and `arrival_angle` are the angles to the tangent plane,
/// in (0, pi/2], measured as arcsin(|<unit chord, inner normal>|); `defect`
/// is their absolute difference. A body has the equal-angle property at
/// delta exactly when the defect vanishes for every launch at delta.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChordRecord {
    pub p_from: Vec<f64>,
    pub p_to: Vec<f64>,
    pub length: f64,
    pub launch_angle: f64,
    pub arrival_angle: f64,
    pub defect: f64,
}

impl ChordRecord {
    fn from_endpoints(
        p_from: &DVector<f64>,
        p_to: &DVector<f64>,
        chord_dir: &DVector<f64>,
        launch_angle: f64,
        inner_normal_to: &DVector<f64>,
    ) -> Self {
        let length = (p_to - p_from).norm();
        let arrival_angle = chord_dir.dot(inner_normal_to).abs().min(1.0).asin();
        ChordRecord {
            p_from: p_from.iter().copied().collect(),
            p_to: p_to.iter().copied().collect(),
            length,
            launch_angle,
            arrival_angle,
            defect: (arrival_angle - launch_angle).abs(),
        }
    }
}

/// One bounce of the billiard map: advance to the exit point and reflect the
/// direction in the tangent plane there.
pub fn reflect(body: &ConvexBodyND, line: &OrientedLine) -> Result<OrientedLine> {
    let exit = body.ray_exit(&line.foot, &line.dir)?;
    let n = &exit.inner_normal;
    let dir = &line.dir - 2.0 * line.dir.dot(n) * n;
    Ok(OrientedLine { foot: exit.position, dir })
}

/// Chord launched from `foot` at angle `delta` to the tangent plane, along
/// cos(delta) tangent_dir + sin(delta) inner_normal. The launch angle of the
/// record is delta by construction; the arrival angle is measured at the
/// exit, so the defect is the equal-angle violation of this chord.
pub fn delta_chord(
    body: &ConvexBodyND,
    foot: &DVector<f64>,
    tangent_dir: &DVector<f64>,
    delta: f64,
) -> Result<ChordRecord> {
    let (record, _) = delta_chord_with_exit(body, foot, tangent_dir, delta)?;
    Ok(record)
}

/// As `delta_chord`, also returning the exit surface data for chaining.
pub fn delta_chord_with_exit(
    body: &ConvexBodyND,
    foot: &DVector<f64>,
    tangent_dir: &DVector<f64>,
    delta: f64,
) -> Result<(ChordRecord, crate::geomnd::SurfacePoint)> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, pi/2), got {delta}"
        )));
    }
    let sp = body.surface_point(foot)?;
    let t = tangent_dir / tangent_dir.norm();
    if t.dot(&sp.inner_normal).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "tangent_dir is not tangent at foot: <t, n> = {:e}",
            t.dot(&sp.inner_normal)
        )));
    }
    let dir = delta.cos() * &t + delta.sin() * &sp.inner_normal;
    let exit = body.ray_exit(foot, &dir)?;
    let record = ChordRecord::from_endpoints(foot, &exit.position, &dir, delta, &exit.inner_normal);
    Ok((record, exit))
}

/// Chained delta-chords: each arrival refoots the next launch, with the next
/// tangent taken as the normalized tangential projection of the incoming
/// chord direction. On a sphere the feet stay on one great circle and step
/// by the central angle 2 delta; elsewhere the per-step defect records the
/// drift instead of correcting it.
pub fn sigma_orbit(
    body: &ConvexBodyND,
    start_foot: &DVector<f64>,
    start_tangent: &DVector<f64>,
    delta: f64,
    n_steps: usize,
) -> Result<Vec<ChordRecord>> {
    let mut records = Vec::with_capacity(n_steps);
    let mut foot = start_foot.clone();
    let mut tangent = start_tangent / start_tangent.norm();
    for _ in 0..n_steps {
        let (record, exit) = delta_chord_with_exit(body, &foot, &tangent, delta)?;
        let dir = DVector::from_vec(record.p_to.clone()) - DVector::from_vec(record.p_from.clone());
        let dir = &dir / dir.norm();
        let n = &exit.inner_normal;
        let proj = &dir - dir.dot(n) * n;
        let norm = proj.norm();
        if !(norm > 1e-12) {
            return Err(Error::RayMisses {
                reason: "chord arrives along the normal; tangential projection vanishes".into(),
            });
        }
        tangent = proj / norm;
        foot = exit.position;
        records.push(record);
    }
    Ok(records)
}

/// Boundary parameter of the far intersection of the chord launched from
/// theta at angle delta to the tangent (planar support curve); any delta in
/// (0, pi) enters the body. Bisection on the sign of the cross product of
/// the launch direction with the secant, then a Newton polish using the
/// envelope derivative.
pub fn chord_exit_theta(curve: &SupportCurve2D, theta: f64, delta: f64) -> f64 {
    assert!(delta > 0.0 && delta < PI, "launch angle must lie in (0, pi)");
    let cp = curve.eval_point(theta);
    let dir = delta.cos() * cp.tangent + delta.sin() * cp.inner_normal;
    let g = |t: f64| {
        let q = curve.position(t) - cp.position;
        dir.x * q.y - dir.y * q.x
    };
    // Just past theta the secant leaves along the tangent, putting g < 0;
    // just before theta + 2 pi it returns from behind, g > 0.
    let mut t = bisect(&g, theta + 1e-9, theta + 2.0 * PI - 1e-9, 90, 1e-12);
    for _ in 0..4 {
        let q = curve.eval_point(t);
        let dg = q.rho * (dir.x * q.tangent.y - dir.y * q.tangent.x);
        if dg.abs() < 1e-300 {
            break;
        }
        t -= g(t) / dg;
    }
    t
}

/// Planar delta-chord with exact support-curve geometry; returns the record
/// and the boundary parameter of the arrival point.
pub fn delta_chord_curve(
    curve: &SupportCurve2D,
    theta: f64,
    delta: f64,
) -> (ChordRecord, f64) {
    let cp = curve.eval_point(theta);
    let dir2 = delta.cos() * cp.tangent + delta.sin() * cp.inner_normal;
    let theta_b = chord_exit_theta(curve, theta, delta);
    let cq = curve.eval_point(theta_b);
    let p_from = DVector::from_column_slice(&[cp.position.x, cp.position.y]);
    let p_to = DVector::from_column_slice(&[cq.position.x, cq.position.y]);
    let dir = DVector::from_column_slice(&[dir2.x, dir2.y]);
    let n_to = DVector::from_column_slice(&[cq.inner_normal.x, cq.inner_normal.y]);
    (
        ChordRecord::from_endpoints(&p_from, &p_to, &dir, delta, &n_to),
        theta_b,
    )
}

/// One step of the planar billiard map in (s, p) coordinates.
pub fn billiard_map(curve: &SupportCurve2D, phase: PhasePoint2D) -> Result<PhasePoint2D> {
    let p_abs = phase.p.abs();
    if !(p_abs < 1.0) {
        return Err(Error::DegeneratePhase { p_abs });
    }
    let perimeter = curve.perimeter();
    let s = phase.s.rem_euclid(perimeter);
    let theta = curve.theta_from_arclength(s);
    // Outgoing direction at angle alpha to the tangent, cos(alpha) = p.
    let alpha = phase.p.acos();
    let theta_b = chord_exit_theta(curve, theta, alpha);
    let cp = curve.eval_point(theta);
    let cq = curve.eval_point(theta_b);
    let dir = phase.p * cp.tangent + alpha.sin() * cp.inner_normal;
    // Reflection keeps the tangential component, so the new p is the cosine
    // against the arrival tangent.
    let p_new = dir.dot(&cq.tangent);
    Ok(PhasePoint2D { s: curve.arclength(theta_b).rem_euclid(perimeter), p: p_new })
}

/// Central-finite-difference Jacobian determinant of `billiard_map` at
/// `phase`; the map preserves ds ^ dp, so the value tests numerical health
/// rather than the geometry. A Richardson pass at half step is used if the
/// plain determinant misses 1 by more than 1e-6.
pub fn symplectic_jacobian(curve: &SupportCurve2D, phase: PhasePoint2D) -> Result<f64> {
    let p_abs = phase.p.abs();
    if p_abs > 1.0 - PHASE_MARGIN {
        return Err(Error::DegeneratePhase { p_abs });
    }
    let perimeter = curve.perimeter();
    let det_at = |h: f64| -> Result<f64> {
        let f = |s: f64, p: f64| billiard_map(curve, PhasePoint2D { s, p });
        let sp = f(phase.s + h, phase.p)?;
        let sm = f(phase.s - h, phase.p)?;
        let pp = f(phase.s, phase.p + h)?;
        let pm = f(phase.s, phase.p - h)?;
        // Arc length lives on a circle; difference along the shorter way.
        let ds = |a: f64, b: f64| {
            let mut d = a - b;
            if d > 0.5 * perimeter {
                d -= perimeter;
            }
            if d < -0.5 * perimeter {
                d += perimeter;
            }
            d
        };
        let ds_ds = ds(sp.s, sm.s) / (2.0 * h);
        let dp_ds = (sp.p - sm.p) / (2.0 * h);
        let ds_dp = ds(pp.s, pm.s) / (2.0 * h);
        let dp_dp = (pp.p - pm.p) / (2.0 * h);
        Ok(ds_ds * dp_dp - ds_dp * dp_ds)
    };
    let det = det_at(JAC_FD_STEP)?;
    if (det - 1.0).abs() <= 1e-6 {
        return Ok(det);
    }
    let det_half = det_at(JAC_FD_STEP / 2.0)?;
    Ok((4.0 * det_half - det) / 3.0)
}

/// Writes chained chord records as CSV: step index, launch foot components,
/// then length and both angles and the defect.
pub fn write_orbit_csv<W: Write>(records: &[ChordRecord], out: &mut W) -> std::io::Result<()> {
    let dim = records.first().map_or(2, |r| r.p_from.len());
    let names: Vec<String> = match dim {
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        d => (0..d).map(|i| format!("x{i}")).collect(),
    };
    writeln!(
        out,
        "step,{},length,launch_angle,arrival_angle,defect",
        names.join(",")
    )?;
    for (i, r) in records.iter().enumerate() {
        let foot: Vec<String> = r.p_from.iter().map(|c| format!("{c:.17e}")).collect();
        writeln!(
            out,
            "{i},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            foot.join(","),
            r.length,
            r.launch_angle,
            r.arrival_angle,
            r.defect
        )?;
    }
    Ok(())
}
