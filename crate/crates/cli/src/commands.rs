use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use tritrans_core::angle_dynamics::{
    iterate_closed_form_capped, predict_quality, predict_quality_paper_literal, trajectory,
    AngleTriple, CenteredTriple, Tolerances,
};
use tritrans_core::mesh_io::{
    analyze_with_bins, load_mesh, render_svg, Colormap, LoadedMesh, MeshFormat, MeshIoError,
    MeshModel,
};
use tritrans_core::plane_geometry::{
    angles_of_with, construct_transformed, growth_factor, rescale_to_area, Point2, TrianglePoints,
};
use tritrans_core::simple_mesh::{
    correction_terms, mesh_quality, mesh_trajectory, optimal_angles, reconstruct_geometry,
    CorrectionTerms, SimpleMeshAngles,
};

use crate::config::{RunConfig, Task};
use crate::error::CliError;

/// Runs a validated configuration, returning what goes to stdout.
pub fn run(cfg: RunConfig) -> Result<String, CliError> {
    let cap = cfg.closed_form_cap;
    let tol = cfg.tolerances;
    match cfg.task {
        Task::Iterate {
            angles,
            degrees,
            steps,
            closed_form,
            json,
        } => iterate(&angles, degrees, steps, closed_form.then_some(cap), json),
        Task::Predict {
            angles,
            degrees,
            steps,
            paper_literal,
            json,
        } => predict(&angles, degrees, &steps, paper_literal, cap, json),
        Task::Construct {
            triangle,
            steps,
            rescale,
            json,
            svg,
        } => construct(&triangle, steps, rescale, &tol, json, svg.as_deref()),
        Task::SimpleMesh {
            mesh,
            source,
            steps,
            json,
            svg,
            colormap,
        } => simple_mesh(&mesh, &source, steps, json, svg.as_deref(), &colormap),
        Task::Analyze {
            mesh,
            format,
            steps,
            report,
            csv,
            bins,
        } => analyze(
            &mesh,
            format,
            &steps,
            report.as_deref(),
            csv.as_deref(),
            bins,
        ),
        Task::Render {
            mesh,
            format,
            out,
            colormap,
        } => render(&mesh, format, &out, &colormap),
    }
}

/// Fixed ten decimals with trailing zeros removed, so 67.49999999999999
/// prints as 67.5.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn units(t: &AngleTriple, degrees: bool) -> [f64; 3] {
    if degrees {
        t.to_degrees()
    } else {
        t.as_array()
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, format: MeshFormat) -> Result<LoadedMesh, CliError> {
    load_mesh(path, format).map_err(|e| match e {
        MeshIoError::Io(err) => CliError::Io(format!("{}: {err}", path.display())),
        other => CliError::Validation(format!("{}: {other}", path.display())),
    })
}

fn warn_excluded(loaded: &LoadedMesh) {
    for f in &loaded.excluded {
        eprintln!(
            "warning: face {} (line {}) excluded: {}",
            f.face, f.line, f.reason
        );
    }
}

#[derive(Serialize)]
struct IterateRow {
    step: u64,
    angles: [f64; 3],
    q: f64,
    /// Growth factor `1 / prod sin(x/2)` of this iterate.
    growth_factor: f64,
    /// `(x_j - π/3) / (x_{j-1} - π/3)` per angle; null on step 0 or for a
    /// zero previous deviation.
    deviation_ratio: Option<[Option<f64>; 3]>,
}

#[derive(Serialize)]
struct IterateOutput {
    units: &'static str,
    rows: Vec<IterateRow>,
}

fn unit_name(degrees: bool) -> &'static str {
    if degrees {
        "degrees"
    } else {
        "radians"
    }
}

fn iterate(
    t: &AngleTriple,
    degrees: bool,
    steps: u64,
    closed_form_cap: Option<u64>,
    json: bool,
) -> Result<String, CliError> {
    let iterates: Vec<AngleTriple> = match closed_form_cap {
        Some(cap) => (0..=steps)
            .map(|n| iterate_closed_form_capped(t, n, cap))
            .collect(),
        None => trajectory(t, steps),
    };
    let mut centered = CenteredTriple::from_triple(t);
    let mut rows = Vec::with_capacity(iterates.len());
    for (j, x) in iterates.iter().enumerate() {
        let deviation_ratio = (j > 0).then(|| {
            let prev = centered.deviations();
            centered = centered.step();
            let cur = centered.deviations();
            [0, 1, 2].map(|i| (prev[i] != 0.0).then(|| cur[i] / prev[i]))
        });
        rows.push(IterateRow {
            step: j as u64,
            angles: units(x, degrees),
            q: x.quality().value(),
            growth_factor: growth_factor(x).value(),
            deviation_ratio,
        });
    }
    if json {
        return Ok(to_json(&IterateOutput {
            units: unit_name(degrees),
            rows,
        }));
    }
    let mut out = format!(
        "# angles in {}\nstep alpha beta gamma q f_j ratio_alpha ratio_beta ratio_gamma\n",
        unit_name(degrees)
    );
    for r in &rows {
        let ratios = match r.deviation_ratio {
            None => "- - -".to_string(),
            Some(rs) => rs.map(|x| x.map_or("-".into(), num)).join(" "),
        };
        let [a, b, c] = r.angles;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {ratios}",
            r.step,
            num(a),
            num(b),
            num(c),
            num(r.q),
            num(r.growth_factor)
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct Prediction {
    step: u64,
    q: f64,
    angles: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    q_paper_literal: Option<Option<f64>>,
}

#[derive(Serialize)]
struct PredictOutput {
    units: &'static str,
    input_q: f64,
    predictions: Vec<Prediction>,
}

fn predict(
    t: &AngleTriple,
    degrees: bool,
    steps: &[u64],
    literal: bool,
    cap: u64,
    json: bool,
) -> Result<String, CliError> {
    let predictions: Vec<Prediction> = steps
        .iter()
        .map(|&n| Prediction {
            step: n,
            q: predict_quality(t, n).value(),
            angles: units(&iterate_closed_form_capped(t, n, cap), degrees),
            q_paper_literal: literal.then(|| predict_quality_paper_literal(t, n)),
        })
        .collect();
    if json {
        return Ok(to_json(&PredictOutput {
            units: unit_name(degrees),
            input_q: t.quality().value(),
            predictions,
        }));
    }
    let mut out = String::from(if literal {
        "step q q_paper_literal\n"
    } else {
        "step q\n"
    });
    for p in &predictions {
        let _ = write!(out, "{} {}", p.step, num(p.q));
        if let Some(l) = p.q_paper_literal {
            let _ = write!(out, " {}", l.map_or("-".into(), num));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct ConstructRow {
    step: usize,
    vertices: [Point2; 3],
    angles_degrees: [f64; 3],
    area: f64,
    edge_lengths: [f64; 3],
}

#[derive(Serialize)]
struct ConstructOutput {
    rescale: bool,
    rows: Vec<ConstructRow>,
}

fn construct(
    tri: &TrianglePoints,
    steps: usize,
    rescale: bool,
    tol: &Tolerances,
    json: bool,
    svg: Option<&Path>,
) -> Result<String, CliError> {
    let numerical =
        |e: tritrans_core::plane_geometry::GeometryError| CliError::Numerical(e.to_string());
    let area0 = tri.area();
    let mut current = *tri;
    let mut rows = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let angles = angles_of_with(&current, tol).map_err(numerical)?;
        rows.push(ConstructRow {
            step,
            vertices: current.vertices(),
            angles_degrees: angles.to_degrees(),
            area: current.area(),
            edge_lengths: current.edge_lengths(),
        });
        if step == steps {
            break;
        }
        let next = construct_transformed(&current).map_err(numerical)?;
        current = if rescale {
            rescale_to_area(&next, area0).map_err(numerical)?
        } else {
            next
        };
    }

    if let Some(path) = svg {
        let vertices: Vec<Point2> = rows.iter().flat_map(|r| r.vertices).collect();
        let faces = (0..rows.len())
            .map(|j| [3 * j, 3 * j + 1, 3 * j + 2])
            .collect();
        let (mesh, _) = MeshModel::new(vertices, faces)?;
        render_svg(&mesh, path, &Colormap::default())?;
    }
    if json {
        return Ok(to_json(&ConstructOutput { rescale, rows }));
    }
    let mut out = String::from("step alpha_deg beta_deg gamma_deg area ax ay bx by cx cy\n");
    for r in &rows {
        let [a, b, c] = r.angles_degrees;
        let v: Vec<String> = r
            .vertices
            .iter()
            .flat_map(|p| [num(p.x), num(p.y)])
            .collect();
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            r.step,
            num(a),
            num(b),
            num(c),
            num(r.area),
            v.join(" ")
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct MeshStep {
    step: usize,
    mesh_q: f64,
    min_q: f64,
    /// Largest `|alpha_i - alpha*|`, `|beta_i - beta*|`, `|gamma_i - beta*|`.
    max_deviation: [f64; 3],
}

#[derive(Serialize)]
struct SimpleMeshOutput<'a> {
    #[serde(rename = "N")]
    n: usize,
    source: &'a str,
    correction_terms: CorrectionTerms,
    optimal_alpha: f64,
    optimal_beta: f64,
    steps: Vec<MeshStep>,
    final_mesh: &'a SimpleMeshAngles,
}

fn simple_mesh(
    m: &SimpleMeshAngles,
    source: &str,
    steps: usize,
    json: bool,
    svg: Option<&Path>,
    colormap: &Colormap,
) -> Result<String, CliError> {
    let n = m.n();
    let k = correction_terms(n)?;
    let (alpha_opt, beta_opt) = optimal_angles(n);
    let traj = mesh_trajectory(m, steps)?;
    let summary: Vec<MeshStep> = traj
        .iter()
        .enumerate()
        .map(|(step, s)| {
            let q = mesh_quality(s);
            let mut dev = [0.0f64; 3];
            for t in s.triangles() {
                dev[0] = dev[0].max((t.alpha - alpha_opt).abs());
                dev[1] = dev[1].max((t.beta - beta_opt).abs());
                dev[2] = dev[2].max((t.gamma - beta_opt).abs());
            }
            MeshStep {
                step,
                mesh_q: q.mesh_q,
                min_q: q.per_triangle.iter().map(|v| v.value()).fold(1.0, f64::min),
                max_deviation: dev,
            }
        })
        .collect();
    let last = traj.last().expect("trajectory includes the input");

    if let Some(path) = svg {
        let rec = reconstruct_geometry(last, 1.0);
        if !rec.closure.is_closed(1e-8) {
            eprintln!(
                "warning: final angles do not close up (radius residual {:e}); the fan is drawn open",
                rec.closure.radius
            );
        }
        let (mesh, _) = MeshModel::from_simple(&rec.geometry)?;
        render_svg(&mesh, path, colormap)?;
    }

    if json {
        return Ok(to_json(&SimpleMeshOutput {
            n,
            source,
            correction_terms: k,
            optimal_alpha: alpha_opt,
            optimal_beta: beta_opt,
            steps: summary,
            final_mesh: last,
        }));
    }
    let mut out = String::new();
    let _ = writeln!(out, "N = {n} ({source})");
    let _ = writeln!(
        out,
        "correction terms: K_alpha = {} K_beta = {} K_gamma = {}",
        num(k.k_alpha),
        num(k.k_beta),
        num(k.k_gamma)
    );
    let _ = writeln!(
        out,
        "optimal angles: alpha = {} beta = gamma = {}",
        num(alpha_opt),
        num(beta_opt)
    );
    out.push_str("step q_M min_q dev_alpha dev_beta dev_gamma\n");
    for s in &summary {
        let [a, b, c] = s.max_deviation;
        let _ = writeln!(
            out,
            "{} {} {} {:e} {:e} {:e}",
            s.step,
            num(s.mesh_q),
            num(s.min_q),
            a,
            b,
            c
        );
    }
    out.push_str("final angles (radians):\ni alpha beta gamma q\n");
    for (i, t) in last.triangles().iter().enumerate() {
        let _ = writeln!(
            out,
            "{i} {} {} {} {}",
            num(t.alpha),
            num(t.beta),
            num(t.gamma),
            num(t.quality().value())
        );
    }
    Ok(out)
}

fn analyze(
    path: &Path,
    format: MeshFormat,
    steps: &[u64],
    report: Option<&Path>,
    csv: Option<&Path>,
    bins: usize,
) -> Result<String, CliError> {
    let loaded = load(path, format)?;
    warn_excluded(&loaded);
    let result = analyze_with_bins(&loaded.mesh, steps, bins).with_excluded(loaded.excluded);
    if let Some(csv) = csv {
        write_file(csv, &result.to_csv()?)?;
    }
    let json = result.to_json();
    match report {
        Some(p) => {
            write_file(p, &json)?;
            let s = &result.summary;
            let fmt = |v: Option<f64>| v.map_or("-".into(), num);
            Ok(format!(
                "{} triangles, {} excluded; q min {} mean {} max {}\n",
                s.triangle_count,
                result.excluded.len(),
                fmt(s.min),
                fmt(s.mean),
                fmt(s.max)
            ))
        }
        None => Ok(json + "\n"),
    }
}

fn render(
    path: &Path,
    format: MeshFormat,
    out: &Path,
    colormap: &Colormap,
) -> Result<String, CliError> {
    let loaded = load(path, format)?;
    warn_excluded(&loaded);
    render_svg(&loaded.mesh, out, colormap)?;
    Ok(format!(
        "wrote {} triangles to {}\n",
        loaded.mesh.triangles().len(),
        out.display()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(67.49999999999999), "67.5");
        assert_eq!(num(60.0), "60");
        assert_eq!(num(-1e-14), "0");
        assert_eq!(num(PI), "3.1415926536");
    }
}
