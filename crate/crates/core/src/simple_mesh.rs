//! Constrained transformation for simple meshes: one inner vertex `A_0`
//! surrounded by a fan of `N` triangles `(A_0, A_i, A_{i+1})`.
//!
//! `alpha_i` sits at `A_0`, `gamma_i` at `A_i` and `beta_i` at `A_{i+1}`.
//! Connectivity is kept when, in every step,
//!
//! * `alpha_i + beta_i + gamma_i = π` for every triangle,
//! * `sum alpha_i = 2π`,
//! * `sum beta_i = (N - 2) π / 2`.
//!
//! The averaging map plus constant corrections preserves all three. Each angle
//! then evolves on its own as `x* + (-1/2)^n (x_0 - x*)` around its optimum
//! `x*`, so the first step is the only one that can leave `(0, π)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle_dynamics::{AngleTriple, QualityValue};
use crate::plane_geometry::{Point2, TrianglePoints};

/// Absolute tolerance of every constraint family.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;
/// Largest deviation of `sum alpha_i` from 2π that reconstruction renormalizes.
pub const TURN_REPAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleName {
    Alpha,
    Beta,
    Gamma,
}

impl std::fmt::Display for AngleName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AngleName::Alpha => "alpha",
            AngleName::Beta => "beta",
            AngleName::Gamma => "gamma",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("a simple mesh needs at least 3 triangles, got {0}")]
    TooFewTriangles(usize),
    #[error("declared N = {declared} but {actual} triangles given")]
    CountMismatch { declared: usize, actual: usize },
    #[error("triangle {triangle}: {angle} = {value} is not a positive finite angle")]
    NonPositive {
        triangle: usize,
        angle: AngleName,
        value: f64,
    },
    #[error("triangle {triangle}: angles sum to {sum}, not π")]
    TriangleSum { triangle: usize, sum: f64 },
    #[error("sum of alpha is {sum}, expected 2π")]
    AlphaSum { sum: f64 },
    #[error("sum of beta is {sum}, expected {expected}")]
    BetaSum { sum: f64, expected: f64 },
    #[error("step produced a degenerate angle: triangle {triangle}, {angle} = {value}")]
    DegenerateOutput {
        triangle: usize,
        angle: AngleName,
        value: f64,
    },
    #[error("invalid angle-mesh JSON: {0}")]
    Json(String),
}

/// Angles of one fan triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FanAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    fn named(&self) -> [(AngleName, f64); 3] {
        [
            (AngleName::Alpha, self.alpha),
            (AngleName::Beta, self.beta),
            (AngleName::Gamma, self.gamma),
        ]
    }

    pub fn quality(&self) -> QualityValue {
        AngleTriple::from_array_unchecked([self.alpha, self.beta, self.gamma]).quality()
    }
}

/// Angle-space state of an `N`-simple mesh satisfying every constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleMeshAngles {
    #[serde(rename = "N")]
    n: usize,
    triangles: Vec<FanAngles>,
}

#[derive(Deserialize)]
struct AngleMeshDoc {
    #[serde(rename = "N")]
    n: usize,
    triangles: Vec<FanAngles>,
}

impl SimpleMeshAngles {
    pub fn new(triangles: Vec<FanAngles>) -> Result<Self, MeshError> {
        let m = Self {
            n: triangles.len(),
            triangles,
        };
        m.validate()?;
        Ok(m)
    }

    /// Parses `{"N": int, "triangles": [{"alpha", "beta", "gamma"}, ...]}`.
    pub fn from_json(s: &str) -> Result<Self, MeshError> {
        let doc: AngleMeshDoc =
            serde_json::from_str(s).map_err(|e| MeshError::Json(e.to_string()))?;
        if doc.n != doc.triangles.len() {
            return Err(MeshError::CountMismatch {
                declared: doc.n,
                actual: doc.triangles.len(),
            });
        }
        Self::new(doc.triangles)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Every triangle has apex `2π/N` and base angles `(N-2)π/(2N)`.
    pub fn optimal(n: usize) -> Result<Self, MeshError> {
        if n < 3 {
            return Err(MeshError::TooFewTriangles(n));
        }
        let (a, b) = optimal_angles(n);
        Self::new(vec![FanAngles::new(a, b, b); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triangles(&self) -> &[FanAngles] {
        &self.triangles
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.n;
        if n < 3 {
            return Err(MeshError::TooFewTriangles(n));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            for (angle, value) in t.named() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(MeshError::NonPositive {
                        triangle: i,
                        angle,
                        value,
                    });
                }
            }
            let sum = t.alpha + t.beta + t.gamma;
            if (sum - PI).abs() > CONSTRAINT_TOLERANCE {
                return Err(MeshError::TriangleSum { triangle: i, sum });
            }
        }
        let [alpha_sum, beta_sum] = self.sums();
        if (alpha_sum - 2.0 * PI).abs() > CONSTRAINT_TOLERANCE {
            return Err(MeshError::AlphaSum { sum: alpha_sum });
        }
        let expected = beta_target(n);
        if (beta_sum - expected).abs() > CONSTRAINT_TOLERANCE {
            return Err(MeshError::BetaSum {
                sum: beta_sum,
                expected,
            });
        }
        Ok(())
    }

    /// `[sum alpha_i, sum beta_i]`.
    pub fn sums(&self) -> [f64; 2] {
        let alpha = self.triangles.iter().map(|t| t.alpha).sum();
        let beta = self.triangles.iter().map(|t| t.beta).sum();
        [alpha, beta]
    }

    /// Largest absolute violation over all constraint families.
    pub fn constraint_residual(&self) -> f64 {
        let per_triangle = self
            .triangles
            .iter()
            .map(|t| (t.alpha + t.beta + t.gamma - PI).abs())
            .fold(0.0, f64::max);
        let [a, b] = self.sums();
        per_triangle
            .max((a - 2.0 * PI).abs())
            .max((b - beta_target(self.n)).abs())
    }

    /// Whether every future iterate stays non-degenerate, i.e. each angle is
    /// below three times its optimum.
    pub fn stays_nondegenerate(&self) -> bool {
        let (a, b) = optimal_angles(self.n);
        self.triangles
            .iter()
            .all(|t| t.alpha < 3.0 * a && t.beta < 3.0 * b && t.gamma < 3.0 * b)
    }
}

fn beta_target(n: usize) -> f64 {
    (n as f64 - 2.0) * PI / 2.0
}

/// `(2π/N, (N-2)π/(2N))`.
pub fn optimal_angles(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (2.0 * PI / nf, (nf - 2.0) * PI / (2.0 * nf))
}

/// Per-triangle quality of the optimal mesh: `(N-2)/4` below six triangles,
/// `4/(N-2)` from six on.
pub fn optimal_triangle_quality(n: usize) -> f64 {
    let nf = n as f64;
    if n < 6 {
        (nf - 2.0) / 4.0
    } else {
        4.0 / (nf - 2.0)
    }
}

/// Additive corrections keeping the constraints invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionTerms {
    pub k_alpha: f64,
    pub k_beta: f64,
    pub k_gamma: f64,
}

impl CorrectionTerms {
    pub fn sum(&self) -> f64 {
        self.k_alpha + self.k_beta + self.k_gamma
    }
}

/// `K(alpha) = π(6-N)/(2N)`, `K(beta) = K(gamma) = -K(alpha)/2`.
pub fn correction_terms(n: usize) -> Result<CorrectionTerms, MeshError> {
    if n < 3 {
        return Err(MeshError::TooFewTriangles(n));
    }
    let k_alpha = PI * (6.0 - n as f64) / (2.0 * n as f64);
    let k_beta = -0.5 * k_alpha;
    Ok(CorrectionTerms {
        k_alpha,
        k_beta,
        k_gamma: k_beta,
    })
}

/// One corrected averaging step on every fan triangle.
pub fn transform_mesh(m: &SimpleMeshAngles) -> Result<SimpleMeshAngles, MeshError> {
    let k = correction_terms(m.n)?;
    let mut triangles = Vec::with_capacity(m.n);
    for (i, t) in m.triangles.iter().enumerate() {
        let next = FanAngles::new(
            (t.beta + t.gamma) / 2.0 + k.k_alpha,
            (t.alpha + t.gamma) / 2.0 + k.k_beta,
            (t.alpha + t.beta) / 2.0 + k.k_gamma,
        );
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let bad = next.named().into_iter().find(|(_, v)| !(*v > 0.0));
        if let Some((angle, value)) = bad {
            return Err(MeshError::DegenerateOutput {
                triangle: i,
                angle,
                value,
            });
        }
        triangles.push(next);
    }
    SimpleMeshAngles::new(triangles)
}

pub fn iterate_mesh(m: &SimpleMeshAngles, steps: usize) -> Result<SimpleMeshAngles, MeshError> {
    let mut cur = m.clone();
    for _ in 0..steps {
        cur = transform_mesh(&cur)?;
    }
    Ok(cur)
}

/// Every iterate, starting with `m` itself.
pub fn mesh_trajectory(
    m: &SimpleMeshAngles,
    steps: usize,
) -> Result<Vec<SimpleMeshAngles>, MeshError> {
    let mut out = vec![m.clone()];
    for _ in 0..steps {
        let next = transform_mesh(out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshQuality {
    pub per_triangle: Vec<QualityValue>,
    /// `min(q_i) / max(q_i)`.
    pub mesh_q: f64,
}

pub fn mesh_quality(m: &SimpleMeshAngles) -> MeshQuality {
    let per_triangle: Vec<QualityValue> = m.triangles.iter().map(FanAngles::quality).collect();
    let (lo, hi) = per_triangle
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), q| {
            (lo.min(q.value()), hi.max(q.value()))
        });
    MeshQuality {
        per_triangle,
        mesh_q: lo / hi,
    }
}

/// Coordinates of an `N`-simple mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleMeshGeometry {
    pub inner_vertex: Point2,
    pub boundary: Vec<Point2>,
}

impl SimpleMeshGeometry {
    /// Fan triangles `(A_0, A_i, A_{i+1 mod N})`.
    pub fn triangle_points(&self, i: usize) -> [Point2; 3] {
        let n = self.boundary.len();
        [
            self.inner_vertex,
            self.boundary[i],
            self.boundary[(i + 1) % n],
        ]
    }

    pub fn triangles(&self) -> Result<Vec<TrianglePoints>, crate::plane_geometry::GeometryError> {
        (0..self.boundary.len())
            .map(|i| {
                let [a, b, c] = self.triangle_points(i);
                TrianglePoints::new(a, b, c)
            })
            .collect()
    }

    /// All fan triangles non-degenerate and counter-clockwise.
    pub fn is_consistently_oriented(&self) -> bool {
        self.triangles()
            .map(|ts| ts.iter().all(|t| t.twice_signed_area() > 0.0))
            .unwrap_or(false)
    }

    /// Sum of signed fan-triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.boundary.len())
            .map(|i| {
                let [a, b, c] = self.triangle_points(i);
                0.5 * (b - a).cross(c - a)
            })
            .sum()
    }

    /// Angles `(alpha_i, beta_i, gamma_i)` per fan triangle, read off the
    /// coordinates.
    pub fn fan_angles(&self) -> Vec<FanAngles> {
        (0..self.boundary.len())
            .map(|i| {
                let [a0, ai, aj] = self.triangle_points(i);
                FanAngles::new(
                    angle_at(a0, ai, aj),
                    angle_at(aj, a0, ai),
                    angle_at(ai, a0, aj),
                )
            })
            .collect()
    }
}

fn angle_at(apex: Point2, p: Point2, q: Point2) -> f64 {
    let u = p - apex;
    let v = q - apex;
    u.cross(v).abs().atan2(u.dot(v))
}

/// How far the law-of-sines walk misses closing up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureResidual {
    /// `|r_{N+1} - r_1| / r_1`.
    pub radius: f64,
    /// `sum alpha_i - 2π` before renormalization.
    pub turn: f64,
}

impl ClosureResidual {
    pub fn is_closed(&self, tol: f64) -> bool {
        self.radius <= tol && self.turn.abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub geometry: SimpleMeshGeometry,
    pub closure: ClosureResidual,
}

/// Places `A_0` at the origin and `A_1` at `(first_radius, 0)`, then walks
/// around the fan: the direction to `A_{i+1}` is the direction to `A_i`
/// turned by `alpha_i`, and `r_{i+1} = r_i sin(gamma_i) / sin(beta_i)`.
pub fn reconstruct_geometry(m: &SimpleMeshAngles, first_radius: f64) -> Reconstruction {
    let [alpha_sum, _] = m.sums();
    let turn = alpha_sum - 2.0 * PI;
    let turn_scale = if turn.abs() <= TURN_REPAIR_TOL {
        2.0 * PI / alpha_sum
    } else {
        1.0
    };
    let mut boundary = Vec::with_capacity(m.n);
    let mut radius = first_radius;
    let mut direction: f64 = 0.0;
    for t in &m.triangles {
        boundary.push(Point2::new(
            radius * direction.cos(),
            radius * direction.sin(),
        ));
        direction += t.alpha * turn_scale;
        radius *= t.gamma.sin() / t.beta.sin();
    }
    Reconstruction {
        geometry: SimpleMeshGeometry {
            inner_vertex: Point2::default(),
            boundary,
        },
        closure: ClosureResidual {
            radius: (radius - first_radius).abs() / first_radius,
            turn,
        },
    }
}

/// Iterates the angles and reconstructs coordinates at the same total area as
/// the reconstruction of `m` with `first_radius`.
pub fn smooth_geometry(
    m: &SimpleMeshAngles,
    steps: usize,
    first_radius: f64,
) -> Result<Reconstruction, MeshError> {
    let target = reconstruct_geometry(m, first_radius).geometry.area();
    let smoothed = iterate_mesh(m, steps)?;
    let unit = reconstruct_geometry(&smoothed, 1.0).geometry.area();
    Ok(reconstruct_geometry(&smoothed, (target / unit).sqrt()))
}

/// Random mesh satisfying every constraint.
///
/// Apex angles are a Dirichlet partition of 2π. Base angles split
/// `π - alpha_i` as `beta_i = (1/2 + e_i)(π - alpha_i)` with perturbations `e_i`
/// whose weighted sum vanishes, so `sum beta_i = (N-2)π/2` holds exactly up to
/// rounding.
pub fn random_valid_mesh<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<SimpleMeshAngles, MeshError> {
    if n < 3 {
        return Err(MeshError::TooFewTriangles(n));
    }
    let gamma = Gamma::new(4.0, 1.0).expect("valid shape");
    loop {
        let g: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        let alphas: Vec<f64> = g.iter().map(|x| 2.0 * PI * x / total).collect();
        if alphas.iter().any(|&a| !(1e-6..=PI - 1e-6).contains(&a)) {
            continue;
        }
        let weights: Vec<f64> = alphas.iter().map(|a| PI - a).collect();
        let mut e: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.35..0.35)).collect();
        let shift =
            e.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / weights.iter().sum::<f64>();
        e.iter_mut().for_each(|x| *x -= shift);
        if e.iter().any(|x| x.abs() >= 0.499) {
            continue;
        }
        let triangles = alphas
            .iter()
            .zip(&weights)
            .zip(&e)
            .map(|((&a, &w), &x)| {
                let beta = (0.5 + x) * w;
                FanAngles::new(a, beta, PI - a - beta)
            })
            .collect();
        if let Ok(m) = SimpleMeshAngles::new(triangles) {
            return Ok(m);
        }
    }
}

/// [`random_valid_mesh`] restricted to meshes that never degenerate under
/// iteration.
pub fn random_admissible_mesh<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<SimpleMeshAngles, MeshError> {
    loop {
        let m = random_valid_mesh(n, rng)?;
        if m.stays_nondegenerate() {
            return Ok(m);
        }
    }
}
