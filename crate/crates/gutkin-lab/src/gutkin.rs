//! The equal-angle machinery: admissible-angle solver for
//! tan(n delta) = n tan(delta), body-wide defect scans, the
//! sphere-characterization experiment, and defect-vs-perturbation scaling
//! for planar harmonic probes.

use crate::billiard::{delta_chord, delta_chord_curve, ChordRecord};
use crate::error::{Error, Result};
use crate::geom2d::{Harmonic, SupportCurve2D};
use crate::geomnd::ConvexBodyND;
use crate::numerics::{
    bisect, equal_angle_residual_compensated, log_log_slope, CompensatedSum,
};
use crate::sampling::{boundary_tangent_samples, theta_samples};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Returned roots must satisfy this residual bound under compensated
/// re-evaluation.
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Exclusion zone around delta = 0 and around the poles of tan(n delta).
const POLE_EXCLUSION: f64 = 1e-8;
/// Sign-change subscan resolution per continuity branch.
const BRANCH_SUBSCAN: usize = 64;
/// Fraction of ray misses a scan tolerates before failing outright.
const MISS_BUDGET: f64 = 1e-3;

/// A solution delta of tan(n delta) = n tan(delta) in (0, pi/2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeltaRoot {
    pub n: u32,
    pub delta: f64,
    /// |tan(n delta) - n tan(delta)| re-evaluated with compensated argument
    /// reduction; below 1e-10 for every returned root.
    pub residual: f64,
}

/// Aggregate equal-angle violation of a body at one launch angle.
///
/// Serializes to the report schema {body, delta, samples, seed, max_defect,
/// mean_defect, rms_defect, misses}; the worst chord stays available to
/// callers but is not part of the wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefectReport {
    pub body: serde_json::Value,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_defect: f64,
    pub mean_defect: f64,
    pub rms_defect: f64,
    pub misses: usize,
    #[serde(skip)]
    pub worst_chord: Option<ChordRecord>,
}

/// All roots of tan(n delta) = n tan(delta) with delta in (0, pi/2),
/// excluding delta = 0 and pole-adjacent pseudo-roots, sorted ascending.
///
/// The poles of tan(n delta) at (2k+1) pi / (2n) partition (0, pi/2) into
/// continuity branches; each branch is subscanned for sign changes and each
/// bracket bisected, then polished by Newton. An empty list is legal: roots
/// whose compensated residual cannot reach 1e-10 in double precision (very
/// steep crossings hugging a pole) are dropped rather than reported loosely.
pub fn solve_gutkin_delta(n: u32) -> Vec<DeltaRoot> {
    assert!(
        n >= 4,
        "equal-angle equation needs n >= 4: n = 2 has no roots in (0, pi/2) \
         since tan(2d) = 2 tan(d)/(1 - tan^2 d) != 2 tan(d) there, and n = 3 \
         admits none either"
    );
    let nf = n as f64;
    let f = |d: f64| (nf * d).tan() - nf * d.tan();
    let df = |d: f64| {
        let tn = (nf * d).tan();
        let t1 = d.tan();
        nf * (tn * tn - t1 * t1)
    };
    // Branch boundaries: 0, the poles (2k+1) pi/(2n) below pi/2, and pi/2.
    let mut cuts = vec![0.0];
    let mut k = 0;
    loop {
        let pole = (2 * k + 1) as f64 * PI / (2.0 * nf);
        if pole >= PI / 2.0 {
            break;
        }
        cuts.push(pole);
        k += 1;
    }
    cuts.push(PI / 2.0);
    let mut roots: Vec<DeltaRoot> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0] + POLE_EXCLUSION, w[1] - POLE_EXCLUSION);
        if b <= a {
            continue;
        }
        let step = (b - a) / BRANCH_SUBSCAN as f64;
        for i in 0..BRANCH_SUBSCAN {
            let lo = a + i as f64 * step;
            let hi = lo + step;
            if f(lo) * f(hi) >= 0.0 {
                continue;
            }
            let mut d = bisect(&f, lo, hi, 200, 1e-15);
            for _ in 0..3 {
                let slope = df(d);
                if slope.abs() < 1e-300 {
                    break;
                }
                let next = d - f(d) / slope;
                if next > lo && next < hi {
                    d = next;
                }
            }
            let residual = equal_angle_residual_compensated(n, d);
            let pole_dist = cuts
                .iter()
                .map(|&c| (d - c).abs())
                .fold(f64::INFINITY, f64::min);
            if residual < ROOT_RESIDUAL_TOL && d > POLE_EXCLUSION && pole_dist > POLE_EXCLUSION {
                roots.push(DeltaRoot { n, delta: d, residual });
            }
        }
    }
    roots.sort_by(|x, y| x.delta.total_cmp(&y.delta));
    roots.dedup_by(|x, y| (x.delta - y.delta).abs() < 1e-12);
    roots
}

/// Roots for every n in the inclusive range, pooled and sorted by delta;
/// a diagnostic for spotting near-collisions of admissible angles across
/// different n.
pub fn cross_index_roots(n_lo: u32, n_hi: u32) -> Vec<DeltaRoot> {
    let mut all: Vec<DeltaRoot> = (n_lo.max(4)..=n_hi).flat_map(solve_gutkin_delta).collect();
    all.sort_by(|x, y| x.delta.total_cmp(&y.delta));
    all
}

/// Pairs of roots with different n whose angles lie within `tol`.
pub fn near_collisions(roots: &[DeltaRoot], tol: f64) -> Vec<(DeltaRoot, DeltaRoot)> {
    let mut out = Vec::new();
    for (i, a) in roots.iter().enumerate() {
        for b in roots[i + 1..].iter() {
            if b.delta - a.delta > tol {
                break;
            }
            if a.n != b.n {
                out.push((*a, *b));
            }
        }
    }
    out
}

struct ScanAccumulator {
    samples: usize,
    misses: usize,
    max_defect: f64,
    mean: CompensatedSum,
    square: CompensatedSum,
    worst: Option<ChordRecord>,
}

impl ScanAccumulator {
    fn new() -> Self {
        Self {
            samples: 0,
            misses: 0,
            max_defect: 0.0,
            mean: CompensatedSum::new(),
            square: CompensatedSum::new(),
            worst: None,
        }
    }

    fn push(&mut self, item: Result<ChordRecord>) {
        match item {
            Ok(record) => {
                self.samples += 1;
                self.mean.add(record.defect);
                self.square.add(record.defect * record.defect);
                if record.defect >= self.max_defect {
                    self.max_defect = record.defect;
                    self.worst = Some(record);
                }
            }
            Err(_) => self.misses += 1,
        }
    }

    fn finish(self, body: serde_json::Value, delta: f64, seed: u64) -> Result<DefectReport> {
        let total = self.samples + self.misses;
        if self.samples == 0 || (self.misses as f64) > MISS_BUDGET * total as f64 {
            return Err(Error::RayMisses {
                reason: format!(
                    "{} of {} chord launches missed; scan aborted",
                    self.misses, total
                ),
            });
        }
        let mean_defect = self.mean.value() / self.samples as f64;
        let rms_defect = (self.square.value() / self.samples as f64).sqrt();
        Ok(DefectReport {
            body,
            delta,
            samples: self.samples,
            seed,
            max_defect: self.max_defect,
            mean_defect,
            rms_defect,
            misses: self.misses,
            worst_chord: self.worst,
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, pi/2), got {delta}"
        )));
    }
    Ok(())
}

/// Scans equal-angle defects over seeded boundary samples of a body.
/// Chords are evaluated in parallel but reduced in sample order with
/// compensated sums, so the report is identical for any worker count.
/// Ray misses are tolerated up to 0.1% of the samples, then fatal.
pub fn defect_scan(
    body: &ConvexBodyND,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<DefectReport> {
    check_delta(delta)?;
    let sites = boundary_tangent_samples(body, samples, seed);
    let results: Vec<Result<ChordRecord>> = sites
        .par_iter()
        .map(|(foot, tangent)| delta_chord(body, foot, tangent, delta))
        .collect();
    let mut acc = ScanAccumulator::new();
    for item in results {
        acc.push(item);
    }
    acc.finish(
        serde_json::to_value(body.to_spec()).expect("body spec serializes"),
        delta,
        seed,
    )
}

/// Planar counterpart of `defect_scan` for support-function curves; exact
/// chord geometry, no ray misses possible.
pub fn defect_scan_curve(
    curve: &SupportCurve2D,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<DefectReport> {
    check_delta(delta)?;
    let thetas = theta_samples(samples, seed);
    let results: Vec<ChordRecord> = thetas
        .par_iter()
        .map(|&theta| delta_chord_curve(curve, theta, delta).0)
        .collect();
    let mut acc = ScanAccumulator::new();
    for record in results {
        acc.push(Ok(record));
    }
    acc.finish(
        serde_json::to_value(curve.to_spec()).expect("curve spec serializes"),
        delta,
        seed,
    )
}

/// One row of the characterization table: a body with its mean defect per
/// grid angle and the minimum over the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacterizationRow {
    pub body: serde_json::Value,
    pub is_sphere: bool,
    pub mean_defects: Vec<f64>,
    pub min_mean_defect: f64,
}

/// Table for the round-sphere characterization: only spheres reach
/// (near-)zero defect at some angle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacterizationTable {
    pub delta_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<CharacterizationRow>,
    /// Largest min-over-grid mean defect among sphere rows (the noise
    /// floor of the experiment); None when the family has no sphere.
    pub sphere_baseline: Option<f64>,
    pub pass: bool,
}

/// Runs defect scans for every body over a delta grid and judges the
/// characterization: sphere rows must bottom out below 1e-9, every
/// non-sphere row must stay above 100x the sphere noise floor. A family
/// with non-spheres but no sphere cannot establish a baseline and fails.
pub fn sphere_characterization_experiment(
    family: &[ConvexBodyND],
    delta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CharacterizationTable> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("characterization needs at least one body".into()));
    }
    if delta_grid.is_empty() {
        return Err(Error::InvalidParameter("characterization needs a delta grid".into()));
    }
    for &d in delta_grid {
        check_delta(d)?;
    }
    let mut rows = Vec::with_capacity(family.len());
    for body in family {
        let mut mean_defects = Vec::with_capacity(delta_grid.len());
        for &delta in delta_grid {
            let report = defect_scan(body, delta, samples, seed)?;
            mean_defects.push(report.mean_defect);
        }
        let min_mean_defect = mean_defects.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(CharacterizationRow {
            body: serde_json::to_value(body.to_spec()).expect("body spec serializes"),
            is_sphere: body.is_round_sphere(),
            mean_defects,
            min_mean_defect,
        });
    }
    let sphere_baseline = rows
        .iter()
        .filter(|r| r.is_sphere)
        .map(|r| r.min_mean_defect)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let spheres_ok = rows
        .iter()
        .filter(|r| r.is_sphere)
        .all(|r| r.min_mean_defect < 1e-9);
    let others_ok = match sphere_baseline {
        Some(base) => rows
            .iter()
            .filter(|r| !r.is_sphere)
            .all(|r| r.min_mean_defect > 100.0 * base),
        None => rows.iter().all(|r| r.is_sphere),
    };
    let pass = spheres_ok && others_ok;
    Ok(CharacterizationTable {
        delta_grid: delta_grid.to_vec(),
        samples,
        seed,
        rows,
        sphere_baseline,
        pass,
    })
}

/// rms equal-angle defect of the probe curve h = 1 + eps cos(n theta) at
/// angle delta, for each eps. At a root of tan(n delta) = n tan(delta) the
/// probe satisfies the equal-angle property exactly for every convex eps,
/// so the rms defect sits at roundoff; at generic delta it grows linearly
/// in eps.
pub fn perturbation_scaling(
    n: u32,
    delta: f64,
    eps_list: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_delta(delta)?;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if eps < 0.0 {
            return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
        }
        let curve = if eps == 0.0 {
            SupportCurve2D::circle(1.0)
        } else {
            SupportCurve2D::new(1.0, vec![Harmonic { n, a: eps, b: 0.0 }])?
        };
        let report = defect_scan_curve(&curve, delta, samples, seed)?;
        out.push((eps, report.rms_defect));
    }
    Ok(out)
}

/// Least-squares log-log slope over the strictly positive entries; NaN when
/// fewer than two usable points remain.
pub fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let usable: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(e, r)| e > 0.0 && r > 0.0).collect();
    if usable.len() < 2 {
        return f64::NAN;
    }
    log_log_slope(&usable)
}

/// CSV rows eps,rms_defect with the fitted slope in a trailing comment.
pub fn write_scaling_csv<W: Write>(points: &[(f64, f64)], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "eps,rms_defect")?;
    for &(eps, rms) in points {
        writeln!(out, "{eps:.17e},{rms:.17e}")?;
    }
    writeln!(out, "# fitted_slope = {}", fitted_slope(points))
}
