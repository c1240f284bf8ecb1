//! Exit criteria. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tritrans_core::angle_dynamics::*;
use tritrans_core::mesh_io::*;
use tritrans_core::plane_geometry::*;
use tritrans_core::simple_mesh::*;

mod common;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1000 random triangles, 40 steps, every angle within 1e-9 of π/3, < 1 s.
fn convergence() -> Outcome {
    let mut r = rng(1);
    let triples: Vec<AngleTriple> = (0..1000).map(|_| common::random_triple(&mut r)).collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for t in &triples {
        for a in iterate(t, 40).as_array() {
            worst = worst.max((a - FRAC_PI_3).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-9, || format!("max |angle - π/3| = {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("max |angle - π/3| = {worst:.2e}, {elapsed:?}"))
}

/// |x_{2n} - π/3| = 4^-n |x_0 - π/3| to 1e-12 relative for n <= 20 on 100
/// triangles; two-step ratio 0.25 ± 1e-10.
fn exact_rate() -> Outcome {
    let mut r = rng(2);
    let mut worst_rel = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let t = common::random_triple(&mut r);
        for n in 1..=20 {
            let c = convergence_rate_check(&t, n).map_err(|e| e.to_string())?;
            worst_rel = worst_rel.max(c.relative_error);
            worst_ratio = worst_ratio.max((c.ratio - 0.25).abs());
        }
    }
    ensure(worst_rel <= 1e-12, || {
        format!("contraction relative error {worst_rel:e}")
    })?;
    ensure(worst_ratio <= 1e-10, || {
        format!("|ratio - 1/4| = {worst_ratio:e}")
    })?;
    Ok(format!(
        "contraction rel err {worst_rel:.2e}, |ratio - 1/4| {worst_ratio:.2e}"
    ))
}

/// Closed form vs iteration to 1e-12 for n <= 60 on 1000 triangles;
/// integer closed forms of the coefficients up to 60; a_4 = 5, a_5 = 11.
fn closed_form() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = common::random_triple(&mut r);
        let mut direct = t;
        for n in 1..=60 {
            direct = direct.transform();
            let cf = iterate_closed_form(&t, n);
            worst = worst.max(common::max_abs_diff(&direct.as_array(), &cf.as_array()));
        }
    }
    ensure(worst <= 1e-12, || format!("max angle difference {worst:e}"))?;
    let seq = coefficients(60).map_err(|e| e.to_string())?;
    ensure(seq.matches_closed_forms(), || {
        "recurrence differs from closed forms".into()
    })?;
    ensure(seq.get(4) == Some(BigUint::from(5u8)), || {
        format!("a_4 = {:?}", seq.get(4))
    })?;
    ensure(seq.get(5) == Some(BigUint::from(11u8)), || {
        format!("a_5 = {:?}", seq.get(5))
    })?;
    Ok(format!(
        "max angle difference {worst:.2e}; a_1..a_60 exact; a_4 = 5, a_5 = 11"
    ))
}

/// Predicted vs iterated quality to 1e-12 for n <= 30 on 1000 triangles, and
/// the recorded counterexample to the printed even-step formula.
fn quality_prediction() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = common::random_triple(&mut r);
        let mut direct = t;
        for n in 0..=30 {
            if n > 0 {
                direct = direct.transform();
            }
            worst = worst.max((predict_quality(&t, n).value() - quality(&direct).value()).abs());
        }
    }
    ensure(worst <= 1e-12, || {
        format!("max quality difference {worst:e}")
    })?;
    let t = AngleTriple::new(FRAC_PI_2, FRAC_PI_3, FRAC_PI_6).map_err(|e| e.to_string())?;
    let oracle = quality(&iterate(&t, 2)).value();
    let literal = predict_quality_paper_literal(&t, 2).ok_or("no literal value")?;
    ensure((oracle - 7.0 / 9.0).abs() <= 1e-12, || {
        format!("oracle q_2 = {oracle}")
    })?;
    ensure((literal - 3.0 / 5.0).abs() <= 1e-12, || {
        format!("literal q_2 = {literal}")
    })?;
    Ok(format!(
        "max quality difference {worst:.2e}; (π/2, π/3, π/6), n = 2: oracle {oracle:.6} vs printed {literal:.6}"
    ))
}

/// angles_of(construct(tri)) = transform(angles_of(tri)) to 1e-10 on 1000
/// triangles; line intersection vs excenters to 1e-9.
fn commutation() -> Outcome {
    let mut r = rng(5);
    let mut worst_angle = 0.0f64;
    let mut worst_ex = 0.0f64;
    for _ in 0..1000 {
        let t = common::random_triangle(&mut r);
        let img = construct_transformed(&t).map_err(|e| e.to_string())?;
        let got = angles_of(&img).map_err(|e| e.to_string())?;
        let want = angles_of(&t).map_err(|e| e.to_string())?.transform();
        worst_angle = worst_angle.max(common::max_abs_diff(&got.as_array(), &want.as_array()));
        worst_ex = worst_ex.max(construction_discrepancy(&t).map_err(|e| e.to_string())?);
    }
    ensure(worst_angle <= 1e-10, || {
        format!("angle mismatch {worst_angle:e}")
    })?;
    ensure(worst_ex <= 1e-9, || {
        format!("construction mismatch {worst_ex:e}")
    })?;
    Ok(format!(
        "angle mismatch {worst_angle:.2e}, line vs excenter {worst_ex:.2e}"
    ))
}

/// Per-step triple-product ratio equals f_j to 1e-9 relative; equilateral
/// gives 8 ± 1e-12; cumulative log-growth strictly increases over 50 steps.
fn edge_growth() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let t = common::random_triangle(&mut r);
        let rep = edge_product_growth_check(&t, 50).map_err(|e| e.to_string())?;
        for s in &rep.steps {
            worst = worst.max((s.product_ratio - s.factor).abs() / s.factor);
        }
        for w in rep.steps.windows(2) {
            ensure(w[1].log_cumulative > w[0].log_cumulative, || {
                format!("log growth not increasing at step {}", w[1].step)
            })?;
        }
    }
    ensure(worst <= 1e-9, || {
        format!("ratio vs f_j relative error {worst:e}")
    })?;
    let eq = equilateral(1.0, Point2::default());
    let rep = edge_product_growth_check(&eq, 50).map_err(|e| e.to_string())?;
    let eq_worst = rep
        .steps
        .iter()
        .map(|s| (s.product_ratio - 8.0).abs().max((s.factor - 8.0).abs()))
        .fold(0.0, f64::max);
    ensure(eq_worst <= 1e-12, || {
        format!("equilateral factor off by {eq_worst:e}")
    })?;
    let total = rep.steps.last().map(|s| s.log_cumulative).unwrap_or(0.0);
    Ok(format!(
        "ratio vs f_j rel err {worst:.2e}; equilateral |f - 8| {eq_worst:.2e}; ln growth after 50 steps {total:.3}"
    ))
}

/// N = 3..=12, 50 random meshes each, 60 iterations: constraints to 1e-10,
/// limits to 1e-9, q_M >= 1 - 1e-6; N = 6 corrections zero; optimal quality
/// formula.
///
/// Meshes are drawn from the valid-mesh sampler; those with an angle at or
/// above three times its optimum degenerate on the first step. They are
/// counted, checked to fail loudly, and replaced until 50 admissible meshes
/// per N have been run.
fn simple_mesh_convergence() -> Outcome {
    let mut r = rng(7);
    let mut rejected = 0usize;
    let mut worst_constraint = 0.0f64;
    let mut worst_limit = 0.0f64;
    let mut worst_q = 0.0f64;
    for n in 3..=12 {
        let (apex, base) = optimal_angles(n);
        let mut accepted = 0;
        while accepted < 50 {
            let m = random_valid_mesh(n, &mut r).map_err(|e| e.to_string())?;
            if !m.stays_nondegenerate() {
                ensure(
                    matches!(transform_mesh(&m), Err(MeshError::DegenerateOutput { .. })),
                    || format!("N = {n}: inadmissible mesh did not fail"),
                )?;
                rejected += 1;
                continue;
            }
            accepted += 1;
            let traj = mesh_trajectory(&m, 60).map_err(|e| e.to_string())?;
            for s in &traj {
                worst_constraint = worst_constraint.max(s.constraint_residual());
            }
            let last = traj.last().expect("non-empty");
            for t in last.triangles() {
                worst_limit = worst_limit
                    .max((t.alpha - apex).abs())
                    .max((t.beta - base).abs())
                    .max((t.gamma - base).abs());
            }
            worst_q = worst_q.max(1.0 - mesh_quality(last).mesh_q);
            let expected_q = optimal_triangle_quality(n);
            for q in mesh_quality(last).per_triangle {
                ensure((q.value() - expected_q).abs() <= 1e-9, || {
                    format!("N = {n}: q_i = {} vs optimal {expected_q}", q.value())
                })?;
            }
        }
        let opt = mesh_quality(&SimpleMeshAngles::optimal(n).map_err(|e| e.to_string())?);
        let expected_q = if n < 6 {
            (n as f64 - 2.0) / 4.0
        } else {
            4.0 / (n as f64 - 2.0)
        };
        ensure(
            opt.per_triangle
                .iter()
                .all(|q| (q.value() - expected_q).abs() <= 1e-12)
                && opt.mesh_q == 1.0,
            || format!("N = {n}: optimal mesh quality mismatch"),
        )?;
    }
    let k6 = correction_terms(6).map_err(|e| e.to_string())?;
    ensure(
        k6.k_alpha == 0.0 && k6.k_beta == 0.0 && k6.k_gamma == 0.0,
        || format!("N = 6 corrections {k6:?}"),
    )?;
    ensure(worst_constraint <= 1e-10, || {
        format!("constraint residual {worst_constraint:e}")
    })?;
    ensure(worst_limit <= 1e-9, || {
        format!("distance to limit angles {worst_limit:e}")
    })?;
    ensure(worst_q <= 1e-6, || format!("1 - q_M = {worst_q:e}"))?;
    Ok(format!(
        "constraint residual {worst_constraint:.2e}, limit error {worst_limit:.2e}, 1 - q_M {worst_q:.2e}; {rejected} inadmissible draws failed loudly and were replaced"
    ))
}

/// OFF round-trip to 1e-12, deterministic SVG, and the two-triangle fixture.
fn mesh_pipeline() -> Outcome {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_triangles.off");
    let loaded = load_mesh(&fixture, MeshFormat::Off).map_err(|e| e.to_string())?;
    let mesh = &loaded.mesh;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let off_path = dir.path().join("round.off");
    save_off(mesh, &off_path).map_err(|e| e.to_string())?;
    let back = load_mesh(&off_path, MeshFormat::Off).map_err(|e| e.to_string())?;
    let coord_err = back
        .mesh
        .vertices()
        .iter()
        .zip(mesh.vertices())
        .map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs()))
        .fold(0.0, f64::max);
    ensure(back.mesh.triangles() == mesh.triangles(), || {
        "connectivity changed".into()
    })?;
    ensure(coord_err <= 1e-12, || {
        format!("coordinates moved by {coord_err:e}")
    })?;

    let cm = Colormap::default();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    render_svg(mesh, &a, &cm).map_err(|e| e.to_string())?;
    render_svg(mesh, &b, &cm).map_err(|e| e.to_string())?;
    let (sa, sb) = (
        std::fs::read(&a).map_err(|e| e.to_string())?,
        std::fs::read(&b).map_err(|e| e.to_string())?,
    );
    ensure(sa == sb, || "SVG output differs between runs".into())?;

    // Right isosceles: q = 1/2, then 2/3 after one step and 5/6 after two.
    // 1:2 right triangle: q = atan(1/2) / (π/2).
    let report = analyze(mesh, &[1, 2]);
    let expected = [
        [0.5, 2.0 / 3.0, 5.0 / 6.0],
        [0.5f64.atan() / FRAC_PI_2, f64::NAN, f64::NAN],
    ];
    let rec0 = &report.triangles[0];
    let rec1 = &report.triangles[1];
    let got0 = [rec0.q, rec0.predicted[0].q, rec0.predicted[1].q];
    ensure(common::max_abs_diff(&got0, &expected[0]) <= 1e-12, || {
        format!("triangle 0: {got0:?}")
    })?;
    ensure((rec1.q - expected[1][0]).abs() <= 1e-12, || {
        format!("triangle 1: q = {}", rec1.q)
    })?;
    let ang1 = rec1.angles;
    let want1 = [0.5f64.atan(), FRAC_PI_2, FRAC_PI_2 - 0.5f64.atan()];
    ensure(common::max_abs_diff(&ang1, &want1) <= 1e-12, || {
        format!("triangle 1 angles {ang1:?}")
    })?;
    let want_iso = [FRAC_PI_2, FRAC_PI_4, FRAC_PI_4];
    ensure(
        common::max_abs_diff(&rec0.angles, &want_iso) <= 1e-12,
        || "triangle 0 angles".into(),
    )?;
    Ok(format!(
        "round-trip error {coord_err:.1e}; SVG {} bytes identical; q = ({:.6}, {:.6})",
        sa.len(),
        rec0.q,
        rec1.q
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 convergence to the equilateral class", convergence),
        ("AC2 exact two-step rate 1/4", exact_rate),
        ("AC3 closed form equals iteration", closed_form),
        ("AC4 quality prediction", quality_prediction),
        ("AC5 geometry/algebra commutation", commutation),
        ("AC6 edge growth factors", edge_growth),
        ("AC7 simple-mesh convergence", simple_mesh_convergence),
        ("AC8 mesh pipeline", mesh_pipeline),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
