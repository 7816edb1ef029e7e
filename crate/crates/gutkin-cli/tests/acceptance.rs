//! Acceptance gate. Each test covers one numbered criterion, prints a
//! single PASS/FAIL line with the measured quantities, then asserts the
//! criterion verbatim at its stated tolerance. Run with --nocapture (or
//! let a failure surface the captured line) to read the tally.
//!
//! Two criteria fail by design of the mathematics, not by tolerance
//! tuning; their lines document the measured gap. Criterion 4 requires the
//! support-integral chord length and the geometric ray-shot chord to agree
//! at 1e-8 on noncircular constant-width curves, but the two quantities
//! genuinely differ at first order in the perturbation (the integral is
//! the tangential secant component over cos delta, not the chord length).
//! Criterion 9 expects a quadratic defect-vs-eps slope at the admissible
//! angle, but the harmonic probe family is an exact equal-angle family at
//! that angle for every eps, so the rms defect sits at the roundoff floor
//! and no meaningful slope exists.

use gutkin_lab::billiard::{
    delta_chord, delta_chord_curve, sigma_orbit, symplectic_jacobian, PhasePoint2D,
};
use gutkin_lab::geodesics::{integrate_geodesic, planarity_defect};
use gutkin_lab::gutkin::{
    defect_scan, fitted_slope, perturbation_scaling, solve_gutkin_delta,
    sphere_characterization_experiment,
};
use gutkin_lab::lemmas::{curvature_quadratic, osculating_margin, sphere_chord_identity_errors};
use gutkin_lab::sampling::{boundary_tangent_samples, kronecker_points};
use gutkin_lab::{ConvexBodyND, SupportCurve2D};
use nalgebra::{DVector, Vector3};
use std::f64::consts::{FRAC_PI_4, PI};
use std::process::Command;
use std::time::Instant;

fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_vec(v.to_vec())
}

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_01_equal_angle_solver() {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    let mut all_nonempty = true;
    let mut n4_bracketed = false;
    for n in 4..=10u32 {
        let roots = solve_gutkin_delta(n);
        all_nonempty &= !roots.is_empty();
        for root in &roots {
            let direct = ((n as f64) * root.delta).tan() - (n as f64) * root.delta.tan();
            worst = worst.max(direct.abs());
            if n == 4 && root.delta > FRAC_PI_4 && root.delta < 3.0 * PI / 8.0 {
                n4_bracketed = true;
            }
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = all_nonempty && worst < 1e-10 && n4_bracketed && elapsed < 1.0;
    verdict(1, pass, &format!("worst residual {worst:.1e}, {elapsed:.2}s"));
    assert!(all_nonempty, "empty root list for some n");
    assert!(worst < 1e-10, "residual {worst:e}");
    assert!(n4_bracketed, "no n=4 root in (pi/4, 3pi/8)");
    assert!(elapsed < 1.0, "took {elapsed}s");
}

#[test]
fn criterion_02_spheres_are_equal_angle_tables() {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for d in [2usize, 3, 4, 5] {
        for radius in [0.5, 1.0, 2.0] {
            for delta in [0.2, 0.7, 1.2] {
                let body = ConvexBodyND::sphere(d, radius);
                let report = defect_scan(&body, delta, 10_000, 17).unwrap();
                worst = worst.max(report.max_defect);
            }
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = worst < 1e-9 && elapsed < 10.0;
    verdict(2, pass, &format!("worst max_defect {worst:.1e}, {elapsed:.2}s"));
    assert!(worst < 1e-9, "sphere defect {worst:e}");
    assert!(elapsed < 10.0, "took {elapsed}s");
}

#[test]
fn criterion_03_nonspheres_stay_above_the_baseline() {
    let clock = Instant::now();
    let profile = SupportCurve2D::make_constant_width(1.0, &[(3, 0.05)]).unwrap();
    let family = vec![
        ConvexBodyND::sphere(3, 1.0),
        ConvexBodyND::ellipsoid(&[1.1, 1.0, 1.0]),
        ConvexBodyND::revolution(profile, Vector3::z()).unwrap(),
    ];
    let grid: Vec<f64> = (0..10).map(|i| 0.3 + 0.1 * i as f64).collect();
    let table = sphere_characterization_experiment(&family, &grid, 1000, 23).unwrap();
    let baseline = table.sphere_baseline.unwrap().max(1e-300);
    let mut min_ratio = f64::INFINITY;
    for row in &table.rows {
        if !row.is_sphere {
            min_ratio = min_ratio.min(row.min_mean_defect / baseline);
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = table.pass && min_ratio > 100.0 && elapsed < 60.0;
    verdict(
        3,
        pass,
        &format!("baseline {baseline:.1e}, worst nonsphere ratio {min_ratio:.1e}, {elapsed:.1}s"),
    );
    assert!(table.pass, "characterization failed");
    assert!(min_ratio > 100.0, "ratio {min_ratio}");
    assert!(elapsed < 60.0, "took {elapsed}s");
}

#[test]
fn criterion_04_width_and_chord_sums() {
    let curves = [
        SupportCurve2D::circle(1.0),
        SupportCurve2D::make_constant_width(1.0, &[(3, 0.05)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(5, 0.02)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(3, 0.03), (5, 0.01)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(9, 0.002)]).unwrap(),
    ];
    let deltas = [0.3, 0.6, 0.9, 1.2, 1.4];
    let mut worst_rho = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut worst_route_gap = 0.0f64;
    for curve in &curves {
        let width = 2.0 * curve.r0();
        for &delta in &deltas {
            for i in 0..8 {
                let theta = 2.0 * PI * i as f64 / 8.0;
                worst_rho =
                    worst_rho.max((curve.rho(theta) + curve.rho(theta + PI) - width).abs());
                let l = curve.chord_length_integral(theta, delta);
                let l_bar = curve.chord_length_integral(theta + PI, delta);
                worst_sum =
                    worst_sum.max((l + l_bar - 2.0 * width * delta.sin()).abs());
                let (record, _) = delta_chord_curve(curve, theta, delta);
                worst_route_gap = worst_route_gap.max((record.length - l).abs());
            }
        }
    }
    let pass = worst_rho < 1e-12 && worst_sum < 1e-10 && worst_route_gap < 1e-8;
    verdict(
        4,
        pass,
        &format!(
            "rho sum {worst_rho:.1e}, chord sum {worst_sum:.1e}, route gap {worst_route_gap:.1e}"
        ),
    );
    assert!(worst_rho < 1e-12, "rho sum identity off by {worst_rho:e}");
    assert!(worst_sum < 1e-10, "chord sum identity off by {worst_sum:e}");
    assert!(
        worst_route_gap < 1e-8,
        "integral and ray-shot chords disagree by {worst_route_gap:e}"
    );
}

#[test]
fn criterion_05_circle_equality_and_osculating_bound() {
    let mut worst_eq = 0.0f64;
    for radius in [0.5, 1.0, 2.0] {
        let circle = SupportCurve2D::circle(radius);
        for delta in [0.3, 0.6, 0.9, 1.2] {
            for i in 0..64 {
                let theta = 2.0 * PI * i as f64 / 64.0;
                let (record, _) = delta_chord_curve(&circle, theta, delta);
                let kl = record.length / radius;
                worst_eq = worst_eq.max((kl - 2.0 * delta.sin()).abs());
            }
        }
    }
    // The strict inequality carries content off the circle (on the circle
    // it degenerates to the equality certified above), so the convex test
    // set here is noncircular: constant-width probes, a mixture, an
    // elliptic-type n=2 curve, and a generic even-harmonic convex curve.
    let convex = [
        SupportCurve2D::make_constant_width(1.0, &[(3, 0.05)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(5, 0.02)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(3, 0.03), (5, 0.01)]).unwrap(),
        SupportCurve2D::new(1.0, vec![gutkin_lab::geom2d::Harmonic { n: 2, a: 0.05, b: 0.0 }])
            .unwrap(),
        SupportCurve2D::new(1.0, vec![gutkin_lab::geom2d::Harmonic { n: 4, a: 0.01, b: 0.0 }])
            .unwrap(),
    ];
    let mut min_margin = f64::INFINITY;
    for curve in &convex {
        for delta in [0.3, 0.6, 0.9, 1.2, 1.4] {
            min_margin = min_margin.min(osculating_margin(curve, delta));
        }
    }
    let pass = worst_eq < 1e-12 && min_margin > 0.0;
    verdict(
        5,
        pass,
        &format!("circle k*l error {worst_eq:.1e}, min osculating margin {min_margin:.1e}"),
    );
    assert!(worst_eq < 1e-12, "circle equality off by {worst_eq:e}");
    assert!(min_margin > 0.0, "osculating bound not strict: {min_margin:e}");
}

#[test]
fn criterion_06_sphere_closure_of_the_quadratic() {
    let mut worst_c = 0.0f64;
    let mut worst_root = 0.0f64;
    let mut worst_identity = 0.0f64;
    for radius in [0.5, 1.0, 2.0] {
        let body = ConvexBodyND::sphere(3, radius);
        for i in 1..=10 {
            let delta = 0.15 * i as f64;
            let l1 = 2.0 * radius * delta.sin();
            let (coeffs, roots) = curvature_quadratic(1.0 / radius, l1, delta).unwrap();
            worst_c = worst_c.max(coeffs.c.abs());
            let positive = roots.iter().cloned().filter(|r| *r > 0.0).fold(0.0, f64::max);
            worst_root = worst_root.max((positive - 1.0 / radius).abs());
            let (launch, arrival) =
                sphere_chord_identity_errors(&body, delta, 200, 31).unwrap();
            worst_identity = worst_identity.max(launch).max(arrival);
        }
    }
    let pass = worst_c < 1e-14 && worst_root < 1e-12 && worst_identity < 1e-10;
    verdict(
        6,
        pass,
        &format!(
            "worst |C| {worst_c:.1e}, root error {worst_root:.1e}, identity error {worst_identity:.1e}"
        ),
    );
    assert!(worst_c < 1e-14, "constant term {worst_c:e}");
    assert!(worst_root < 1e-12, "root error {worst_root:e}");
    assert!(worst_identity < 1e-10, "chord identity error {worst_identity:e}");
}

#[test]
fn criterion_07_billiard_map_is_area_preserving() {
    let clock = Instant::now();
    let curves = [
        SupportCurve2D::circle(1.0),
        SupportCurve2D::make_constant_width(1.0, &[(3, 0.05)]).unwrap(),
        SupportCurve2D::make_constant_width(1.0, &[(5, 0.02)]).unwrap(),
    ];
    let mut worst_interior = 0.0f64;
    let mut worst_near = 0.0f64;
    for (i, curve) in curves.iter().enumerate() {
        let perimeter = curve.perimeter();
        for uv in kronecker_points(2, 100, 41 + i as u64) {
            let phase = PhasePoint2D { s: uv[0] * perimeter, p: 1.9 * uv[1] - 0.95 };
            let det = symplectic_jacobian(curve, phase).unwrap();
            let err = (det - 1.0).abs();
            if phase.p.abs() > 0.9 {
                worst_near = worst_near.max(err);
            } else {
                worst_interior = worst_interior.max(err);
            }
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = worst_interior < 1e-6 && worst_near < 1e-5 && elapsed < 5.0;
    verdict(
        7,
        pass,
        &format!(
            "interior |det-1| {worst_interior:.1e}, near-tangency {worst_near:.1e}, {elapsed:.2}s"
        ),
    );
    assert!(worst_interior < 1e-6, "interior determinant error {worst_interior:e}");
    assert!(worst_near < 1e-5, "near-tangency determinant error {worst_near:e}");
    assert!(elapsed < 5.0, "took {elapsed}s");
}

#[test]
fn criterion_08_sphere_orbits_trace_great_circles() {
    let body = ConvexBodyND::sphere(3, 1.0);
    let starts = boundary_tangent_samples(&body, 5, 13);
    let mut worst_plane = 0.0f64;
    let mut worst_advance = 0.0f64;
    for delta in [PI / 6.0, PI / 5.0] {
        for (foot, tangent) in &starts {
            let records = sigma_orbit(&body, foot, tangent, delta, 50).unwrap();
            let f = Vector3::new(foot[0], foot[1], foot[2]);
            let t = Vector3::new(tangent[0], tangent[1], tangent[2]);
            let normal = f.cross(&t).normalize();
            let mut prev = f;
            for record in &records {
                let q = Vector3::new(record.p_to[0], record.p_to[1], record.p_to[2]);
                worst_plane = worst_plane.max(q.dot(&normal).abs());
                let advance = prev.cross(&q).norm().atan2(prev.dot(&q));
                worst_advance = worst_advance.max((advance - 2.0 * delta).abs());
                prev = q;
            }
        }
    }
    let mut worst_closure = 0.0f64;
    for (foot, tangent) in &starts {
        let records = sigma_orbit(&body, foot, tangent, FRAC_PI_4, 4).unwrap();
        let last = records.last().unwrap();
        let gap = (DVector::from_vec(last.p_to.clone()) - foot).norm();
        worst_closure = worst_closure.max(gap);
    }
    let pass = worst_plane < 1e-8 && worst_advance < 1e-8 && worst_closure < 1e-8;
    verdict(
        8,
        pass,
        &format!(
            "plane drift {worst_plane:.1e}, advance error {worst_advance:.1e}, closure {worst_closure:.1e}"
        ),
    );
    assert!(worst_plane < 1e-8, "orbit left its great circle by {worst_plane:e}");
    assert!(worst_advance < 1e-8, "step advance off by {worst_advance:e}");
    assert!(worst_closure < 1e-8, "four-step orbit misses closure by {worst_closure:e}");
}

#[test]
fn criterion_09_scaling_dichotomy() {
    let clock = Instant::now();
    let eps = [1e-3, 2e-3, 4e-3, 8e-3];
    let root = solve_gutkin_delta(5)[0].delta;
    let at_root = perturbation_scaling(5, root, &eps, 2000, 5).unwrap();
    let generic = perturbation_scaling(5, 0.5, &eps, 2000, 5).unwrap();
    let slope_root = fitted_slope(&at_root);
    let slope_generic = fitted_slope(&generic);
    let elapsed = clock.elapsed().as_secs_f64();
    let root_ok = (1.7..=2.3).contains(&slope_root);
    let generic_ok = (0.8..=1.2).contains(&slope_generic);
    let pass = root_ok && generic_ok && elapsed < 120.0;
    let rms_at_root = at_root.iter().map(|p| p.1).fold(0.0, f64::max);
    verdict(
        9,
        pass,
        &format!(
            "root slope {slope_root:.2} (rms floor {rms_at_root:.1e}), generic slope {slope_generic:.2}, {elapsed:.1}s"
        ),
    );
    assert!(elapsed < 120.0, "took {elapsed}s");
    assert!(generic_ok, "generic slope {slope_generic}");
    assert!(root_ok, "slope at the admissible angle was {slope_root}");
}

#[test]
fn criterion_10_frenet_data_of_geodesics() {
    let mut worst_k = 0.0f64;
    let mut worst_tau = 0.0f64;
    for radius in [1.0f64, 2.0] {
        let body = ConvexBodyND::sphere(3, radius);
        let samples = integrate_geodesic(
            &body,
            &dvec(&[radius, 0.0, 0.0]),
            &dvec(&[0.0, 0.6, 0.8]),
            2.0 * PI * radius,
            1e-3 * radius,
        )
        .unwrap();
        for s in &samples {
            worst_k = worst_k.max((s.k - 1.0 / radius).abs());
            worst_tau = worst_tau.max(s.tau.abs());
        }
    }
    let symmetric = ConvexBodyND::ellipsoid(&[2.0, 1.0, 1.0]);
    let arc = integrate_geodesic(
        &symmetric,
        &dvec(&[2.0, 0.0, 0.0]),
        &dvec(&[0.0, 1.0, 0.0]),
        3.0,
        1e-3,
    )
    .unwrap();
    let plane_defect = planarity_defect(&arc);
    let generic = ConvexBodyND::ellipsoid(&[2.0, 1.3, 1.0]);
    let oblique = integrate_geodesic(
        &generic,
        &dvec(&[0.0, 0.0, 1.0]),
        &dvec(&[0.8, 0.6, 0.0]),
        3.0,
        1e-3,
    )
    .unwrap();
    let max_tau = oblique.iter().map(|s| s.tau.abs()).fold(0.0, f64::max);
    let pass = worst_k < 1e-8 && worst_tau < 1e-8 && plane_defect < 1e-6 && max_tau > 1e-3;
    verdict(
        10,
        pass,
        &format!(
            "sphere k error {worst_k:.1e}, sphere |tau| {worst_tau:.1e}, symmetry planarity {plane_defect:.1e}, generic max |tau| {max_tau:.1e}"
        ),
    );
    assert!(worst_k < 1e-8, "great-circle curvature error {worst_k:e}");
    assert!(worst_tau < 1e-8, "great-circle torsion {worst_tau:e}");
    assert!(plane_defect < 1e-6, "symmetry-plane geodesic planarity {plane_defect:e}");
    assert!(max_tau > 1e-3, "generic geodesic torsion only {max_tau:e}");
}

#[test]
fn criterion_11_experiments_are_deterministic() {
    let bin = env!("CARGO_BIN_EXE_gutkin-lab");
    let runs: [&[&str]; 4] = [
        &["solve-delta", "--n", "6"],
        &[
            "defect",
            "--body",
            r#"{"type":"ellipsoid","semi_axes":[1.2,1.0,1.0]}"#,
            "--delta",
            "0.7",
            "--samples",
            "500",
            "--seed",
            "1",
        ],
        &["scaling", "--n", "5", "--delta", "0.5", "--eps", "1e-3,2e-3", "--samples", "200"],
        &[
            "orbit",
            "--body",
            r#"{"type":"sphere","d":3,"radius":1.0}"#,
            "--delta",
            "0.6",
            "--steps",
            "10",
            "--seed",
            "4",
        ],
    ];
    let mut all_equal = true;
    for args in runs {
        let first = Command::new(bin).args(args).output().unwrap();
        let second = Command::new(bin).args(args).output().unwrap();
        let threaded = Command::new(bin)
            .args(args)
            .env("GUTKIN_LAB_THREADS", "3")
            .output()
            .unwrap();
        assert!(first.status.success(), "{args:?} failed");
        all_equal &= first.stdout == second.stdout && first.stdout == threaded.stdout;
    }
    verdict(11, all_equal, "rerun and thread-count bytes compared over four commands");
    assert!(all_equal, "some rerun differed");
}
