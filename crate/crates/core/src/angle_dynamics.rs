//! The angle-averaging map on similarity classes of triangles.
//!
//! A triangle up to similarity is a labeled triple of inner angles
//! `(alpha, beta, gamma)` summing to π. The map replaces every angle by the
//! mean of the other two:
//!
//! ```text
//! (alpha, beta, gamma) -> ((beta + gamma) / 2, (alpha + gamma) / 2, (alpha + beta) / 2)
//! ```
//!
//! It is linear with eigenvalues `{-1/2, -1/2, 1}`; the eigenvalue `1`
//! belongs to `(1, 1, 1)`, so the iterates converge to the equilateral class
//! and every deviation from π/3 flips sign and halves on each step.

use std::f64::consts::{FRAC_PI_3, PI};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Absolute tolerance on `alpha + beta + gamma - π` for a stored triple.
pub const ANGLE_SUM_TOLERANCE: f64 = 1e-12;
/// Default lower bound (and distance from π) that every angle must clear.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-9;
/// Default largest angle-sum error that is repaired by uniform scaling.
pub const DEFAULT_SUM_REPAIR_TOL: f64 = 1e-9;
/// Default step count above which the closed form switches to deviation form.
pub const DEFAULT_CLOSED_FORM_CAP: u64 = 500;

/// The averaging matrix, zero diagonal and `1/2` elsewhere.
pub const AVERAGING_MATRIX: [[f64; 3]; 3] = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleError {
    #[error("angle {index} is not finite")]
    NonFinite { index: usize },
    #[error("angles sum to {sum}, which is not π within {tolerance:e}")]
    AngleSum { sum: f64, tolerance: f64 },
    #[error("angle {index} = {value} is outside ({eps:e}, π - {eps:e})")]
    Degenerate { index: usize, value: f64, eps: f64 },
    #[error("triangle is equilateral; the deviation ratio is 0/0")]
    Equilateral,
    #[error("coefficient index must be at least 1")]
    ZeroIndex,
}

/// Validation thresholds for [`AngleTriple`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub degeneracy_eps: f64,
    pub sum_repair_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degeneracy_eps: DEFAULT_DEGENERACY_EPS,
            sum_repair_tol: DEFAULT_SUM_REPAIR_TOL,
        }
    }
}

/// Labeled inner angles of a non-degenerate triangle, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleTriple {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl AngleTriple {
    pub const EQUILATERAL: AngleTriple = AngleTriple {
        alpha: FRAC_PI_3,
        beta: FRAC_PI_3,
        gamma: FRAC_PI_3,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, AngleError> {
        Self::with_tolerances(alpha, beta, gamma, &Tolerances::default())
    }

    /// Validates a triple. Sums off by at most `sum_repair_tol` are rescaled
    /// uniformly onto π; larger errors are rejected.
    pub fn with_tolerances(
        alpha: f64,
        beta: f64,
        gamma: f64,
        tol: &Tolerances,
    ) -> Result<Self, AngleError> {
        let mut angles = [alpha, beta, gamma];
        if let Some(index) = angles.iter().position(|a| !a.is_finite()) {
            return Err(AngleError::NonFinite { index });
        }
        let sum: f64 = angles.iter().sum();
        let err = (sum - PI).abs();
        if err > tol.sum_repair_tol.max(ANGLE_SUM_TOLERANCE) {
            return Err(AngleError::AngleSum {
                sum,
                tolerance: tol.sum_repair_tol,
            });
        }
        if err > ANGLE_SUM_TOLERANCE {
            let scale = PI / sum;
            angles.iter_mut().for_each(|a| *a *= scale);
        }
        let eps = tol.degeneracy_eps;
        for (index, &value) in angles.iter().enumerate() {
            if !(value > eps && value < PI - eps) {
                return Err(AngleError::Degenerate { index, value, eps });
            }
        }
        Ok(Self::from_array_unchecked(angles))
    }

    pub fn from_degrees(alpha: f64, beta: f64, gamma: f64) -> Result<Self, AngleError> {
        Self::new(alpha.to_radians(), beta.to_radians(), gamma.to_radians())
    }

    pub(crate) fn from_array_unchecked(a: [f64; 3]) -> Self {
        Self {
            alpha: a[0],
            beta: a[1],
            gamma: a[2],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn to_degrees(&self) -> [f64; 3] {
        self.as_array().map(f64::to_degrees)
    }

    pub fn sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }

    pub fn min_angle(&self) -> f64 {
        self.alpha.min(self.beta).min(self.gamma)
    }

    pub fn max_angle(&self) -> f64 {
        self.alpha.max(self.beta).max(self.gamma)
    }

    /// Angles in decreasing order, the similarity-class representative.
    pub fn sorted_desc(&self) -> [f64; 3] {
        let mut a = self.as_array();
        a.sort_by(|x, y| y.total_cmp(x));
        a
    }

    /// Labels ordered by decreasing angle, ties broken by label index.
    pub fn order(&self) -> [usize; 3] {
        let a = self.as_array();
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));
        idx
    }

    /// Equality of similarity classes: compares sorted angles.
    pub fn similar_to(&self, other: &AngleTriple, tol: f64) -> bool {
        self.sorted_desc()
            .iter()
            .zip(other.sorted_desc().iter())
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Deviations from π/3 per label.
    pub fn deviation(&self) -> [f64; 3] {
        self.as_array().map(|a| a - FRAC_PI_3)
    }

    /// One application of the averaging map.
    pub fn transform(&self) -> AngleTriple {
        let [a, b, c] = self.as_array();
        Self::from_array_unchecked([(b + c) / 2.0, (a + c) / 2.0, (a + b) / 2.0])
    }

    pub fn quality(&self) -> QualityValue {
        QualityValue(self.min_angle() / self.max_angle())
    }
}

impl fmt::Display for AngleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.alpha, self.beta, self.gamma)
    }
}

/// `min(angle) / max(angle)`, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct QualityValue(f64);

impl QualityValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<QualityValue> for f64 {
    fn from(q: QualityValue) -> f64 {
        q.0
    }
}

impl fmt::Display for QualityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn transform(t: &AngleTriple) -> AngleTriple {
    t.transform()
}

/// `n` repeated applications of [`transform`].
pub fn iterate(t: &AngleTriple, n: u64) -> AngleTriple {
    (0..n).fold(*t, |acc, _| acc.transform())
}

/// Every iterate `T^0(t) ..= T^n(t)`.
pub fn trajectory(t: &AngleTriple, n: u64) -> Vec<AngleTriple> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(*t);
    for _ in 0..n {
        let next = out[out.len() - 1].transform();
        out.push(next);
    }
    out
}

pub fn quality(t: &AngleTriple) -> QualityValue {
    t.quality()
}

/// The integer sequence `a_1 = a_2 = 1`, `a_n = a_{n-1} + 2 a_{n-2}`.
///
/// `T^n` has diagonal entries `a_{n-1} / 2^{n-1}` and off-diagonal entries
/// `a_n / 2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientSequence {
    values: Vec<BigUint>,
}

impl CoefficientSequence {
    /// `a_1 ..= a_n`.
    pub fn new(n: u64) -> Result<Self, AngleError> {
        if n == 0 {
            return Err(AngleError::ZeroIndex);
        }
        let mut values: Vec<BigUint> = Vec::with_capacity(n as usize);
        for i in 0..n as usize {
            let next = if i < 2 {
                BigUint::from(1u8)
            } else {
                &values[i - 1] + (&values[i - 2] << 1)
            };
            values.push(next);
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a_i`, with `a_0 = 0` so that `T^1` fits the same formula.
    pub fn get(&self, i: usize) -> Option<BigUint> {
        match i {
            0 => Some(BigUint::zero()),
            _ => self.values.get(i - 1).cloned(),
        }
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Whether every stored value equals [`coefficient_closed_form`].
    pub fn matches_closed_forms(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(i, v)| *v == coefficient_closed_form(i as u64 + 1))
    }
}

pub fn coefficients(n: u64) -> Result<CoefficientSequence, AngleError> {
    CoefficientSequence::new(n)
}

/// `a_{2m} = (4^m - 1) / 3` and `a_{2m+1} = (4^{m+1} + 2) / 6`.
pub fn coefficient_closed_form(i: u64) -> BigUint {
    if i == 0 {
        return BigUint::zero();
    }
    let m = i / 2;
    let one = BigUint::from(1u8);
    if i.is_multiple_of(2) {
        ((&one << (2 * m)) - 1u8) / 3u8
    } else {
        ((&one << (2 * (m + 1))) + 2u8) / 6u8
    }
}

/// `T^n(t)` without looping over [`transform`], using the default cap.
pub fn iterate_closed_form(t: &AngleTriple, n: u64) -> AngleTriple {
    iterate_closed_form_capped(t, n, DEFAULT_CLOSED_FORM_CAP)
}

/// Up to `cap` steps: `x_n = ((2 a_{n-1} - a_n) x_0 + a_n π) / 2^n` per angle.
/// Beyond it, `x_n = π/3 + (-1/2)^n (x_0 - π/3)`.
pub fn iterate_closed_form_capped(t: &AngleTriple, n: u64, cap: u64) -> AngleTriple {
    if n == 0 {
        return *t;
    }
    if n > cap.min(1000) {
        return iterate_deviation_form(t, n);
    }
    let seq = CoefficientSequence::new(n).expect("n >= 1");
    let a_n = BigInt::from(seq.get(n as usize).expect("stored"));
    let a_prev = BigInt::from(seq.get(n as usize - 1).expect("stored"));
    let pow = 2f64.powi(n as i32);
    let own = to_f64(&((a_prev << 1) - &a_n)) / pow;
    let shared = to_f64(&a_n) / pow * PI;
    AngleTriple::from_array_unchecked(t.as_array().map(|x| own * x + shared))
}

fn to_f64(v: &BigInt) -> f64 {
    v.to_f64().expect("finite for n <= 1000")
}

/// `x_n = π/3 + (-1/2)^n (x_0 - π/3)`.
pub fn iterate_deviation_form(t: &AngleTriple, n: u64) -> AngleTriple {
    // 2^-1075 underflows to zero; past that the deviation is exactly gone.
    let factor = if n > 1100 {
        0.0
    } else {
        let mag = 0.5f64.powi(n as i32);
        if n.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    };
    AngleTriple::from_array_unchecked(t.deviation().map(|d| FRAC_PI_3 + factor * d))
}

/// Iterates the averaging map on deviations from π/3.
///
/// Two deviations are stored and the third is their negated sum, so the
/// zero-sum property holds exactly and the eigenvalue-1 direction carries no
/// rounding drift. Relative precision then stays near machine epsilon even
/// when the deviations are many orders of magnitude below π/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredTriple {
    d: [f64; 2],
}

impl CenteredTriple {
    pub fn from_triple(t: &AngleTriple) -> Self {
        let [a, b, _] = t.deviation();
        Self { d: [a, b] }
    }

    pub fn deviations(&self) -> [f64; 3] {
        [self.d[0], self.d[1], -(self.d[0] + self.d[1])]
    }

    pub fn step(&self) -> Self {
        let [a, b, c] = self.deviations();
        Self {
            d: [(b + c) / 2.0, (a + c) / 2.0],
        }
    }

    pub fn iterate(&self, n: u64) -> Self {
        (0..n).fold(*self, |acc, _| acc.step())
    }
}

/// Non-recursive prediction of `quality(iterate(t, n))`.
///
/// With sorted initial angles `a0 >= b0 >= c0` the labeled order flips on
/// every step, so
///
/// ```text
/// q_{2k}   = (π + c0 * 3/(4^k - 1)) / (π + a0 * 3/(4^k - 1))          k >= 1
/// q_{2k+1} = (π - a0 * 6/(4^{k+1} + 2)) / (π - c0 * 6/(4^{k+1} + 2))  k >= 0
/// ```
pub fn predict_quality(t: &AngleTriple, n: u64) -> QualityValue {
    if n == 0 {
        return t.quality();
    }
    let [hi, _, lo] = t.sorted_desc();
    let k = n / 2;
    let q = if n.is_multiple_of(2) {
        let b = 3.0 / (pow4(k) - 1.0);
        (PI + b * lo) / (PI + b * hi)
    } else {
        let b = 6.0 / (pow4(k + 1) + 2.0);
        (PI - b * hi) / (PI - b * lo)
    };
    QualityValue(q)
}

/// The even-step expression in its originally printed form,
/// `(π - b a0) / (π - b c0)` with `b = 3/(4^k - 1)`, kept for side-by-side
/// comparison. It does not agree with direct iteration. Odd steps use the same
/// expression as [`predict_quality`]; step 0 has no value (`b` is infinite).
pub fn predict_quality_paper_literal(t: &AngleTriple, n: u64) -> Option<f64> {
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        return Some(predict_quality(t, n).value());
    }
    let [hi, _, lo] = t.sorted_desc();
    let b = 3.0 / (pow4(n / 2) - 1.0);
    Some((PI - b * hi) / (PI - b * lo))
}

fn pow4(k: u64) -> f64 {
    // 4^600 is already infinite in f64.
    4f64.powi(k.min(600) as i32)
}

/// Result of [`convergence_rate_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCheck {
    /// Label of the largest initial angle.
    pub tracked_label: usize,
    /// `|x_{2k} - π/3| / |x_{2k-2} - π/3|`.
    pub ratio: f64,
    /// `x_{2k} - π/3`.
    pub deviation: f64,
    /// `4^{-k} (x_0 - π/3)`.
    pub expected_deviation: f64,
    /// `|deviation - expected_deviation| / |expected_deviation|`.
    pub relative_error: f64,
}

/// Two-step contraction ratio on the largest-angle track.
pub fn convergence_rate_check(t: &AngleTriple, k: u64) -> Result<RateCheck, AngleError> {
    let k = k.max(1);
    let label = t.order()[0];
    let start = CenteredTriple::from_triple(t);
    let d0 = start.deviations()[label];
    if d0.abs() <= 4.0 * f64::EPSILON * PI {
        return Err(AngleError::Equilateral);
    }
    let before = start.iterate(2 * (k - 1));
    let after = before.iterate(2);
    let prev = before.deviations()[label];
    let dev = after.deviations()[label];
    let expected = d0 * 0.25f64.powi(k.min(600) as i32);
    Ok(RateCheck {
        tracked_label: label,
        ratio: dev.abs() / prev.abs(),
        deviation: dev,
        expected_deviation: expected,
        relative_error: ((dev - expected) / expected).abs(),
    })
}

/// Eigenvalues of the averaging matrix and the limit of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Ascending.
    pub eigenvalues: [f64; 3],
    pub limit_triple: AngleTriple,
}

pub fn spectral_summary() -> SpectralSummary {
    SpectralSummary {
        eigenvalues: symmetric_eigenvalues(&AVERAGING_MATRIX),
        limit_triple: AngleTriple::EQUILATERAL,
    }
}

/// `det(M - λ I)` for the averaging matrix.
pub fn characteristic_polynomial(lambda: f64) -> f64 {
    let mut m = AVERAGING_MATRIX;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    det3(&m)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Trigonometric solution of the characteristic cubic of a symmetric 3x3
/// matrix. Returns eigenvalues in ascending order.
fn symmetric_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let mean = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if off == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let spread = (0..3).map(|i| (m[i][i] - mean).powi(2)).sum::<f64>() + 2.0 * off;
    let p = (spread / 6.0).sqrt();
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i == j {
                *v -= mean;
            }
            *v /= p;
        }
    }
    let r = (det3(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = mean + 2.0 * p * phi.cos();
    let smallest = mean + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * mean - largest - smallest;
    let mut e = [smallest, middle, largest];
    e.sort_by(f64::total_cmp);
    e
}
