//! Indexed planar triangle meshes: OFF/OBJ reading, OFF writing, quality
//! reports and SVG rendering with a quality colormap.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::angle_dynamics::{predict_quality, AngleTriple};
use crate::plane_geometry::{angles_of, Point2, TrianglePoints};
use crate::simple_mesh::SimpleMeshGeometry;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {arity} vertices, only triangles are supported")]
    NonTriangularFace { line: usize, arity: usize },
    #[error("vertex z coordinates are not constant; only planar meshes are supported")]
    NonPlanar,
    #[error("mesh needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("unknown mesh format {0:?} (expected off or obj)")]
    UnknownFormat(String),
    #[error("invalid colormap: {0}")]
    Colormap(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for MeshFormat {
    type Err = MeshIoError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            _ => Err(MeshIoError::UnknownFormat(s.to_string())),
        }
    }
}

/// A face dropped at load time because it is collinear.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedFace {
    /// Position of the face in the file, counting from 0.
    pub face: usize,
    pub line: usize,
    pub vertices: [usize; 3],
    pub reason: String,
}

/// Indexed planar triangle mesh. Every stored triangle is non-collinear.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshModel {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
}

impl MeshModel {
    /// Validates indices and drops collinear faces, returning them separately.
    pub fn new(
        vertices: Vec<Point2>,
        faces: Vec<[usize; 3]>,
    ) -> Result<(Self, Vec<ExcludedFace>), MeshIoError> {
        let lines = vec![0; faces.len()];
        Self::build(vertices, faces, &lines)
    }

    fn build(
        vertices: Vec<Point2>,
        faces: Vec<[usize; 3]>,
        lines: &[usize],
    ) -> Result<(Self, Vec<ExcludedFace>), MeshIoError> {
        if vertices.len() < 3 {
            return Err(MeshIoError::TooFewVertices(vertices.len()));
        }
        let mut triangles = Vec::with_capacity(faces.len());
        let mut excluded = Vec::new();
        for (face, (idx, &line)) in faces.into_iter().zip(lines).enumerate() {
            if let Some(bad) = idx.iter().find(|&&i| i >= vertices.len()) {
                return Err(parse_err(
                    line,
                    format!(
                        "face index {bad} out of range (vertex count {})",
                        vertices.len()
                    ),
                ));
            }
            match TrianglePoints::new(vertices[idx[0]], vertices[idx[1]], vertices[idx[2]])
                .map_err(|e| e.to_string())
                .and_then(|t| angles_of(&t).map_err(|e| e.to_string()))
            {
                Ok(_) => triangles.push(idx),
                Err(reason) => excluded.push(ExcludedFace {
                    face,
                    line,
                    vertices: idx,
                    reason,
                }),
            }
        }
        Ok((
            Self {
                vertices,
                triangles,
            },
            excluded,
        ))
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_points(&self, i: usize) -> TrianglePoints {
        let [a, b, c] = self.triangles[i];
        TrianglePoints::new(self.vertices[a], self.vertices[b], self.vertices[c])
            .expect("validated at construction")
    }

    pub fn triangle_angles(&self, i: usize) -> AngleTriple {
        angles_of(&self.triangle_points(i)).expect("validated at construction")
    }

    /// `(min, max)` corners of the vertex bounding box.
    pub fn bounds(&self) -> (Point2, Point2) {
        self.vertices.iter().fold(
            (
                Point2::new(f64::INFINITY, f64::INFINITY),
                Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), p| {
                (
                    Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
                    Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
                )
            },
        )
    }

    /// Fan triangulation of a simple mesh; vertex 0 is the inner vertex.
    pub fn from_simple(
        geometry: &SimpleMeshGeometry,
    ) -> Result<(Self, Vec<ExcludedFace>), MeshIoError> {
        let n = geometry.boundary.len();
        let mut vertices = vec![geometry.inner_vertex];
        vertices.extend_from_slice(&geometry.boundary);
        let faces = (0..n).map(|i| [0, i + 1, (i + 1) % n + 1]).collect();
        Self::new(vertices, faces)
    }
}

/// A parsed mesh together with the faces excluded as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMesh {
    pub mesh: MeshModel,
    pub excluded: Vec<ExcludedFace>,
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<LoadedMesh, MeshIoError> {
    let text = fs::read_to_string(path)?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeshIoError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate {tok:?}")));
    }
    Ok(v)
}

fn parse_count(tok: &str, line: usize) -> Result<usize, MeshIoError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid count {tok:?}")))
}

/// Collapses constant-z 3D vertices to the plane.
fn flatten(raw: Vec<(f64, f64, Option<f64>)>) -> Result<Vec<Point2>, MeshIoError> {
    let zs: Vec<f64> = raw.iter().filter_map(|v| v.2).collect();
    if let Some(&z0) = zs.first() {
        let tol = 1e-12 * z0.abs().max(1.0);
        if zs.iter().any(|z| (z - z0).abs() > tol) {
            return Err(MeshIoError::NonPlanar);
        }
    }
    Ok(raw.into_iter().map(|(x, y, _)| Point2::new(x, y)).collect())
}

/// OFF subset: an `OFF` header line, a counts line `nv nf [ne]`, `nv` vertex
/// lines with 2 or 3 coordinates, then `nf` face lines `3 i j k` (trailing
/// tokens such as colors are ignored). `#` starts a comment; blank lines are
/// skipped. A header `OFF nv nf ne` on one line is also accepted.
pub fn parse_off(text: &str) -> Result<LoadedMesh, MeshIoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected OFF header"))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("OFF") {
        return Err(parse_err(hline, "expected OFF header"));
    }
    let rest: Vec<&str> = head.collect();
    let (cline, counts) = if rest.is_empty() {
        let (cl, c) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing counts line"))?;
        (cl, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, rest)
    };
    if counts.len() < 2 || counts.len() > 3 {
        return Err(parse_err(
            cline,
            "counts line must be `vertices faces [edges]`",
        ));
    }
    let nv = parse_count(counts[0], cline)?;
    let nf = parse_count(counts[1], cline)?;
    if let Some(ne) = counts.get(2) {
        parse_count(ne, cline)?;
    }

    let mut raw = Vec::with_capacity(nv.min(1 << 20));
    for k in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, format!("expected {nv} vertices, found {k}")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.len() {
            2 => raw.push((parse_f64(toks[0], ln)?, parse_f64(toks[1], ln)?, None)),
            3 => raw.push((
                parse_f64(toks[0], ln)?,
                parse_f64(toks[1], ln)?,
                Some(parse_f64(toks[2], ln)?),
            )),
            n => {
                return Err(parse_err(
                    ln,
                    format!("vertex line has {n} values, expected 2 or 3"),
                ))
            }
        }
    }

    let mut faces = Vec::with_capacity(nf.min(1 << 20));
    let mut face_lines = Vec::with_capacity(nf.min(1 << 20));
    for k in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, format!("expected {nf} faces, found {k}")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let arity = parse_count(toks[0], ln)?;
        if arity != 3 {
            return Err(MeshIoError::NonTriangularFace { line: ln, arity });
        }
        if toks.len() < 4 {
            return Err(parse_err(ln, "face line needs 3 vertex indices"));
        }
        let idx = [
            parse_count(toks[1], ln)?,
            parse_count(toks[2], ln)?,
            parse_count(toks[3], ln)?,
        ];
        faces.push(idx);
        face_lines.push(ln);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "unexpected content after the declared faces"));
    }

    let vertices = flatten(raw)?;
    let (mesh, excluded) = MeshModel::build(vertices, faces, &face_lines)?;
    Ok(LoadedMesh { mesh, excluded })
}

/// OBJ subset: `v x y [z [w]]` and `f a b c` lines. Face tokens may carry
/// `/vt/vn` suffixes and negative (relative) indices. Other statements are
/// ignored.
pub fn parse_obj(text: &str) -> Result<LoadedMesh, MeshIoError> {
    let mut raw = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let ln = i + 1;
        let l = strip_comment(l);
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("v") => {
                let vals = toks
                    .map(|t| parse_f64(t, ln))
                    .collect::<Result<Vec<_>, _>>()?;
                match vals.len() {
                    2 => raw.push((vals[0], vals[1], None)),
                    3 | 4 => raw.push((vals[0], vals[1], Some(vals[2]))),
                    n => {
                        return Err(parse_err(
                            ln,
                            format!("vertex has {n} values, expected 2 to 4"),
                        ))
                    }
                }
            }
            Some("f") => {
                let refs: Vec<&str> = toks.collect();
                if refs.len() != 3 {
                    return Err(MeshIoError::NonTriangularFace {
                        line: ln,
                        arity: refs.len(),
                    });
                }
                let mut idx = [0usize; 3];
                for (slot, r) in idx.iter_mut().zip(&refs) {
                    *slot = obj_index(r, raw.len(), ln)?;
                }
                faces.push(idx);
                face_lines.push(ln);
            }
            _ => {}
        }
    }
    let vertices = flatten(raw)?;
    let (mesh, excluded) = MeshModel::build(vertices, faces, &face_lines)?;
    Ok(LoadedMesh { mesh, excluded })
}

fn obj_index(token: &str, seen: usize, line: usize) -> Result<usize, MeshIoError> {
    let head = token.split('/').next().unwrap_or("");
    let v: i64 = head
        .parse()
        .map_err(|_| parse_err(line, format!("invalid face index {token:?}")))?;
    let resolved = match v {
        0 => None,
        v if v > 0 => Some(v as u64 - 1),
        v => (seen as i64)
            .checked_add(v)
            .filter(|&x| x >= 0)
            .map(|x| x as u64),
    };
    resolved
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(line, format!("face index {token:?} out of range")))
}

pub fn write_off(mesh: &MeshModel) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertices.len(), mesh.triangles.len());
    for p in &mesh.vertices {
        let _ = writeln!(out, "{} {} 0", p.x, p.y);
    }
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    out
}

pub fn save_off(mesh: &MeshModel, path: &Path) -> Result<(), MeshIoError> {
    fs::write(path, write_off(mesh))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedQuality {
    pub step: u64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleRecord {
    pub index: usize,
    pub vertices: [usize; 3],
    /// `[alpha, beta, gamma]` in radians.
    pub angles: [f64; 3],
    pub q: f64,
    pub predicted: Vec<PredictedQuality>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: usize,
    /// Bin `i` covers `[i/bins, (i+1)/bins)`; the last bin includes 1.
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualitySummary {
    pub triangle_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub predict_steps: Vec<u64>,
    pub triangles: Vec<TriangleRecord>,
    pub summary: QualitySummary,
    pub excluded: Vec<ExcludedFace>,
}

pub const DEFAULT_HISTOGRAM_BINS: usize = 10;

pub fn analyze(mesh: &MeshModel, predict_steps: &[u64]) -> QualityReport {
    analyze_with_bins(mesh, predict_steps, DEFAULT_HISTOGRAM_BINS)
}

/// Per-triangle quality plus predicted quality after each requested number of
/// transformation steps. Records are ordered by triangle index.
pub fn analyze_with_bins(mesh: &MeshModel, predict_steps: &[u64], bins: usize) -> QualityReport {
    let bins = bins.max(1);
    let triangles: Vec<TriangleRecord> = (0..mesh.triangles.len())
        .map(|i| {
            let angles = mesh.triangle_angles(i);
            TriangleRecord {
                index: i,
                vertices: mesh.triangles[i],
                angles: angles.as_array(),
                q: angles.quality().value(),
                predicted: predict_steps
                    .iter()
                    .map(|&step| PredictedQuality {
                        step,
                        q: predict_quality(&angles, step).value(),
                    })
                    .collect(),
            }
        })
        .collect();

    let mut counts = vec![0; bins];
    for r in &triangles {
        let b = ((r.q * bins as f64).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    let qs = triangles.iter().map(|r| r.q);
    let count = triangles.len();
    let summary = QualitySummary {
        triangle_count: count,
        min: qs.clone().reduce(f64::min),
        max: qs.clone().reduce(f64::max),
        mean: (count > 0).then(|| qs.sum::<f64>() / count as f64),
        histogram: Histogram { bins, counts },
    };
    QualityReport {
        predict_steps: predict_steps.to_vec(),
        triangles,
        summary,
        excluded: Vec::new(),
    }
}

impl QualityReport {
    pub fn with_excluded(mut self, excluded: Vec<ExcludedFace>) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One row per triangle: `index,alpha,beta,gamma,q,q_pred_<n>...`.
    pub fn to_csv(&self) -> Result<String, MeshIoError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "index".to_string(),
            "alpha".into(),
            "beta".into(),
            "gamma".into(),
            "q".into(),
        ];
        header.extend(self.predict_steps.iter().map(|n| format!("q_pred_{n}")));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.triangles {
            let mut row = vec![r.index.to_string()];
            row.extend(r.angles.iter().map(f64::to_string));
            row.push(r.q.to_string());
            row.extend(r.predicted.iter().map(|p| p.q.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| MeshIoError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }
}

fn csv_err(e: csv::Error) -> MeshIoError {
    MeshIoError::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    fn parse(s: &str) -> Option<Rgb> {
        let h = s.strip_prefix('#')?;
        if h.len() != 6 || !h.is_ascii() {
            return None;
        }
        let c = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).ok();
        Some(Rgb(c(0)?, c(2)?, c(4)?))
    }

    fn lerp(self, o: Rgb, t: f64) -> Rgb {
        let m = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Rgb(m(self.0, o.0), m(self.1, o.1), m(self.2, o.2))
    }
}

/// Piecewise-linear map from quality to color.
///
/// Stops are `(q, color)` with non-decreasing `q` from 0 to 1. Two stops at
/// the same `q` form a jump; the value at the jump takes the upper color.
#[derive(Debug, Clone, PartialEq)]
pub struct Colormap {
    stops: Vec<(f64, Rgb)>,
}

/// Default bands: red below 0.3, orange on `[0.3, 0.5)`, green on
/// `[0.5, 0.8)` and blue-green from 0.8, each interpolated within its band.
pub const DEFAULT_COLORMAP: &str =
    "0:#99000d,0.3:#ef3b2c,0.3:#f16913,0.5:#fdae6b,0.5:#74c476,0.8:#238b45,0.8:#41b6c4,1:#225ea8";
pub const GRAYSCALE_COLORMAP: &str = "0:#000000,1:#ffffff";

impl Default for Colormap {
    fn default() -> Self {
        DEFAULT_COLORMAP.parse().expect("default colormap parses")
    }
}

impl FromStr for Colormap {
    type Err = MeshIoError;

    /// `default`, `grayscale`, or a comma-separated list `q:#rrggbb`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spec = match s.trim() {
            "default" => DEFAULT_COLORMAP,
            "grayscale" => GRAYSCALE_COLORMAP,
            other => other,
        };
        let bad = |m: String| MeshIoError::Colormap(m);
        let mut stops = Vec::new();
        for item in spec.split(',') {
            let (q, c) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| bad(format!("stop {item:?} is not `q:#rrggbb`")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad stop position {q:?}")))?;
            if !(0.0..=1.0).contains(&q) {
                return Err(bad(format!("stop position {q} outside [0, 1]")));
            }
            let c = Rgb::parse(c.trim()).ok_or_else(|| bad(format!("bad color {c:?}")))?;
            stops.push((q, c));
        }
        if stops.len() < 2 {
            return Err(bad("need at least two stops".into()));
        }
        if stops[0].0 != 0.0 || stops[stops.len() - 1].0 != 1.0 {
            return Err(bad("stops must start at 0 and end at 1".into()));
        }
        for w in stops.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(bad("stop positions must be non-decreasing".into()));
            }
        }
        for w in stops.windows(3) {
            if w[0].0 == w[2].0 {
                return Err(bad(format!("more than two stops at {}", w[0].0)));
            }
        }
        Ok(Colormap { stops })
    }
}

impl Colormap {
    pub fn color(&self, q: f64) -> Rgb {
        let q = if q.is_nan() { 0.0 } else { q.clamp(0.0, 1.0) };
        // Last segment whose start is <= q; at a jump this picks the upper side.
        let seg = self
            .stops
            .windows(2)
            .rposition(|w| w[0].0 <= q && w[0].0 < w[1].0)
            .unwrap_or(0);
        let (q0, c0) = self.stops[seg];
        let (q1, c1) = self.stops[seg + 1];
        if q1 <= q0 {
            return c1;
        }
        c0.lerp(c1, ((q - q0) / (q1 - q0)).clamp(0.0, 1.0))
    }
}

/// SVG 1.1 document, one `<polygon>` per triangle filled by quality. The
/// viewBox is the bounding box grown by 2% of its larger side on every
/// edge; `y` is flipped so the mesh is drawn upright.
pub fn render_svg_string(mesh: &MeshModel, colormap: &Colormap) -> String {
    let (lo, hi) = mesh.bounds();
    let size = (hi.x - lo.x).max(hi.y - lo.y);
    let size = if size > 0.0 { size } else { 1.0 };
    let margin = 0.02 * size;
    let stroke = 0.002 * size;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        lo.x - margin,
        -hi.y - margin,
        hi.x - lo.x + 2.0 * margin,
        hi.y - lo.y + 2.0 * margin
    );
    let _ = writeln!(
        out,
        "<g stroke=\"#333333\" stroke-width=\"{stroke}\" stroke-linejoin=\"round\">"
    );
    for (i, tri) in mesh.triangles.iter().enumerate() {
        let q = mesh.triangle_angles(i).quality().value();
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let p = mesh.vertices[v];
                format!("{},{}", p.x, -p.y)
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"{}\"><title>triangle {i} q={q}</title></polygon>",
            pts.join(" "),
            colormap.color(q).hex()
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn render_svg(mesh: &MeshModel, path: &Path, colormap: &Colormap) -> Result<(), MeshIoError> {
    fs::write(path, render_svg_string(mesh, colormap))?;
    Ok(())
}
