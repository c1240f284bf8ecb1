//! Coordinate realization of the transformation.
//!
//! At every vertex the line perpendicular to the interior angle bisector is
//! the exterior bisector, so the three pairwise intersections are the
//! excenters. The image vertex `A'` (intersection of the lines through `B`
//! and `C`) is the excenter opposite `A`, and its angle is `(beta + gamma)/2`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle_dynamics::{AngleError, AngleTriple, Tolerances};

/// Collinearity threshold relative to the squared longest edge.
pub const COLLINEARITY_EPS: f64 = 1e-12;
const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("triangle is collinear (twice signed area {twice_area:e})")]
    Collinear { twice_area: f64 },
    #[error("bisector perpendiculars at vertices {0} and {1} are parallel")]
    ParallelLines(usize, usize),
    #[error("target area must be positive and finite, got {0}")]
    InvalidArea(f64),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// A non-collinear planar triangle with labeled vertices `A`, `B`, `C`.
///
/// Edge `a = |BC|` is opposite `A`, `b = |AC|` opposite `B`, `c = |AB|`
/// opposite `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrianglePoints {
    a_vertex: Point2,
    b_vertex: Point2,
    c_vertex: Point2,
}

impl TrianglePoints {
    pub fn new(a: Point2, b: Point2, c: Point2) -> Result<Self, GeometryError> {
        for (index, p) in [a, b, c].iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite { index });
            }
        }
        let t = Self {
            a_vertex: a,
            b_vertex: b,
            c_vertex: c,
        };
        let twice_area = t.twice_signed_area();
        let longest = t.longest_edge();
        // Written so that a NaN area also counts as collinear.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let collinear = !(twice_area.abs() > COLLINEARITY_EPS * longest * longest);
        if collinear {
            return Err(GeometryError::Collinear { twice_area });
        }
        Ok(t)
    }

    pub fn vertices(&self) -> [Point2; 3] {
        [self.a_vertex, self.b_vertex, self.c_vertex]
    }

    pub fn a_vertex(&self) -> Point2 {
        self.a_vertex
    }

    pub fn b_vertex(&self) -> Point2 {
        self.b_vertex
    }

    pub fn c_vertex(&self) -> Point2 {
        self.c_vertex
    }

    /// `[a, b, c]` = `[|BC|, |AC|, |AB|]`.
    pub fn edge_lengths(&self) -> [f64; 3] {
        [
            self.b_vertex.distance(self.c_vertex),
            self.a_vertex.distance(self.c_vertex),
            self.a_vertex.distance(self.b_vertex),
        ]
    }

    pub fn longest_edge(&self) -> f64 {
        let [a, b, c] = self.edge_lengths();
        a.max(b).max(c)
    }

    pub fn edge_product(&self) -> f64 {
        self.edge_lengths().iter().product()
    }

    /// Positive for counter-clockwise `A, B, C`.
    pub fn twice_signed_area(&self) -> f64 {
        (self.b_vertex - self.a_vertex).cross(self.c_vertex - self.a_vertex)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.twice_signed_area().abs()
    }

    pub fn centroid(&self) -> Point2 {
        (self.a_vertex + self.b_vertex + self.c_vertex) * (1.0 / 3.0)
    }

    fn map(&self, f: impl Fn(Point2) -> Point2) -> Self {
        Self {
            a_vertex: f(self.a_vertex),
            b_vertex: f(self.b_vertex),
            c_vertex: f(self.c_vertex),
        }
    }
}

fn angle_at(apex: Point2, p: Point2, q: Point2) -> f64 {
    let u = p - apex;
    let v = q - apex;
    u.cross(v).abs().atan2(u.dot(v))
}

/// Inner angles at `A`, `B`, `C`.
pub fn angles_of(tri: &TrianglePoints) -> Result<AngleTriple, GeometryError> {
    angles_of_with(tri, &Tolerances::default())
}

pub fn angles_of_with(
    tri: &TrianglePoints,
    tol: &Tolerances,
) -> Result<AngleTriple, GeometryError> {
    let [a, b, c] = tri.vertices();
    Ok(AngleTriple::with_tolerances(
        angle_at(a, b, c),
        angle_at(b, a, c),
        angle_at(c, a, b),
        tol,
    )?)
}

/// Image triangle via the excenter formulas
/// `A' = (-a A + b B + c C) / (-a + b + c)` and cyclic.
pub fn construct_transformed(tri: &TrianglePoints) -> Result<TrianglePoints, GeometryError> {
    let [pa, pb, pc] = tri.vertices();
    let [a, b, c] = tri.edge_lengths();
    let weighted =
        |wa: f64, wb: f64, wc: f64| (pa * wa + pb * wb + pc * wc) * (1.0 / (wa + wb + wc));
    TrianglePoints::new(weighted(-a, b, c), weighted(a, -b, c), weighted(a, b, -c))
}

/// Image triangle by literally intersecting the lines through each vertex
/// perpendicular to its interior bisector.
pub fn construct_by_bisector_lines(tri: &TrianglePoints) -> Result<TrianglePoints, GeometryError> {
    let v = tri.vertices();
    let lines: Vec<(Point2, Point2)> = (0..3)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % 3];
            let r = v[(i + 2) % 3];
            let to_q = q - p;
            let to_r = r - p;
            let bisector = to_q * (1.0 / to_q.norm()) + to_r * (1.0 / to_r.norm());
            (p, bisector.perp())
        })
        .collect();
    // A' from the lines at B and C, B' from A and C, C' from A and B.
    TrianglePoints::new(
        intersect(lines[1], lines[2], (1, 2))?,
        intersect(lines[0], lines[2], (0, 2))?,
        intersect(lines[0], lines[1], (0, 1))?,
    )
}

fn intersect(
    (p, d): (Point2, Point2),
    (q, e): (Point2, Point2),
    labels: (usize, usize),
) -> Result<Point2, GeometryError> {
    let denom = d.cross(e);
    if denom.abs() <= PARALLEL_EPS * d.norm() * e.norm() {
        return Err(GeometryError::ParallelLines(labels.0, labels.1));
    }
    let t = (q - p).cross(e) / denom;
    Ok(p + d * t)
}

/// Largest vertex distance between the two constructions, divided by the
/// longest edge of the image.
pub fn construction_discrepancy(tri: &TrianglePoints) -> Result<f64, GeometryError> {
    let ex = construct_transformed(tri)?;
    let lines = construct_by_bisector_lines(tri)?;
    let worst = ex
        .vertices()
        .iter()
        .zip(lines.vertices())
        .map(|(p, q)| p.distance(q))
        .fold(0.0, f64::max);
    Ok(worst / ex.longest_edge())
}

/// `1 / (sin(alpha/2) sin(beta/2) sin(gamma/2))`; always above 1, and 8 exactly
/// for the equilateral class.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct GrowthFactor(f64);

impl GrowthFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn growth_factor(t: &AngleTriple) -> GrowthFactor {
    let p: f64 = t.as_array().iter().map(|x| (x / 2.0).sin()).product();
    GrowthFactor(1.0 / p)
}

/// Similar copy scaled about the centroid to the given area.
pub fn rescale_to_area(
    tri: &TrianglePoints,
    target_area: f64,
) -> Result<TrianglePoints, GeometryError> {
    if !(target_area > 0.0 && target_area.is_finite()) {
        return Err(GeometryError::InvalidArea(target_area));
    }
    let s = (target_area / tri.area()).sqrt();
    if s == 1.0 {
        return Ok(*tri);
    }
    let center = tri.centroid();
    Ok(tri.map(|p| center + (p - center) * s))
}

/// Relative agreement required by [`edge_product_growth_check`].
pub const GROWTH_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthStep {
    pub step: usize,
    /// Angles of the iterate the factor is evaluated on.
    pub angles: AngleTriple,
    /// `(a_{j+1} b_{j+1} c_{j+1}) / (a_j b_j c_j)` from coordinates.
    pub product_ratio: f64,
    pub factor: f64,
    pub product_matches: bool,
    /// Per-edge ratios `a_{j+1}/a_j`, `b_{j+1}/b_j`, `c_{j+1}/c_j`.
    pub edge_ratios: [f64; 3],
    /// `1 / sin(x_j / 2)` for each labeled angle.
    pub edge_predictions: [f64; 3],
    pub edges_match: bool,
    /// `ln` of the cumulative empirical product ratio after this step.
    pub log_cumulative: f64,
    /// `sum_{i<=j} ln f_i`.
    pub log_cumulative_factor: f64,
}

/// Comparison of the statement `a_{3n} = a * prod_{j=0}^{n} f_j` (and the same
/// for `b`, `c`) with coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeStepReading {
    pub n: usize,
    /// `ln(x_{3n} / x_0)` per edge.
    pub log_edge_growth: [f64; 3],
    /// `sum_{j=0}^{n} ln f_j`.
    pub log_predicted: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub steps: Vec<GrowthStep>,
    pub three_step_reading: Vec<ThreeStepReading>,
    pub min_factor: f64,
}

impl GrowthReport {
    pub fn all_products_match(&self) -> bool {
        self.steps.iter().all(|s| s.product_matches)
    }

    pub fn all_edges_match(&self) -> bool {
        self.steps.iter().all(|s| s.edges_match)
    }
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

/// Iterates the coordinate construction and compares edge growth with the
/// growth factors of the angle iterates.
///
/// The working triangle is rescaled to unit area after every step; true
/// edge lengths are tracked as logarithms.
pub fn edge_product_growth_check(
    tri: &TrianglePoints,
    steps: usize,
) -> Result<GrowthReport, GeometryError> {
    let steps = steps.max(1);
    let mut log_scale = 0.0;
    let mut work = rescale_to_area(tri, 1.0)?;
    log_scale += (1.0 / tri.area()).sqrt().ln();
    let original_log_edges = tri.edge_lengths().map(f64::ln);
    let mut log_edges_by_step = vec![original_log_edges];
    let mut factors_log = Vec::with_capacity(steps);
    let mut out = Vec::with_capacity(steps);
    let mut log_cumulative = 0.0;
    let mut log_cumulative_factor = 0.0;
    let mut min_factor = f64::INFINITY;

    for step in 0..steps {
        let angles = angles_of(&work)?;
        let f = growth_factor(&angles).value();
        min_factor = min_factor.min(f);
        let next = construct_transformed(&work)?;

        let before = work.edge_lengths();
        let after = next.edge_lengths();
        let product_ratio = next.edge_product() / work.edge_product();
        let edge_ratios = [
            after[0] / before[0],
            after[1] / before[1],
            after[2] / before[2],
        ];
        let edge_predictions = angles.as_array().map(|x| 1.0 / (x / 2.0).sin());
        let edges_match = edge_ratios
            .iter()
            .zip(edge_predictions)
            .all(|(r, p)| rel_eq(*r, p, GROWTH_REL_TOL));

        log_cumulative += product_ratio.ln();
        log_cumulative_factor += f.ln();
        factors_log.push(f.ln());
        out.push(GrowthStep {
            step,
            angles,
            product_ratio,
            factor: f,
            product_matches: rel_eq(product_ratio, f, GROWTH_REL_TOL),
            edge_ratios,
            edge_predictions,
            edges_match,
            log_cumulative,
            log_cumulative_factor,
        });

        let area = next.area();
        work = rescale_to_area(&next, 1.0)?;
        log_scale += (1.0 / area).sqrt().ln();
        log_edges_by_step.push(work.edge_lengths().map(|e| e.ln() - log_scale));
    }

    let mut three_step_reading = Vec::new();
    let mut n = 1;
    while 3 * n <= steps && n < factors_log.len() {
        let log_edge_growth =
            [0, 1, 2].map(|i| log_edges_by_step[3 * n][i] - original_log_edges[i]);
        let log_predicted: f64 = factors_log[..=n].iter().sum();
        let matches = log_edge_growth
            .iter()
            .all(|g| (g - log_predicted).abs() <= GROWTH_REL_TOL);
        three_step_reading.push(ThreeStepReading {
            n,
            log_edge_growth,
            log_predicted,
            matches,
        });
        n += 1;
    }

    Ok(GrowthReport {
        steps: out,
        three_step_reading,
        min_factor,
    })
}

/// Area of the equilateral triangle with the given side.
pub fn equilateral_area(side: f64) -> f64 {
    (3f64).sqrt() / 4.0 * side * side
}

/// Counter-clockwise equilateral triangle with the given side and centroid.
pub fn equilateral(side: f64, center: Point2) -> TrianglePoints {
    let r = side / (3f64).sqrt();
    let p = |k: f64| center + Point2::new(0.0, r).rotate(k * 2.0 * PI / 3.0);
    TrianglePoints::new(p(0.0), p(1.0), p(2.0)).expect("equilateral is non-degenerate")
}
