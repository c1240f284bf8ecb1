#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use tritrans_core::angle_dynamics::AngleTriple;
use tritrans_core::plane_geometry::{angles_of, Point2, TrianglePoints};

/// Smallest inner angle accepted for coordinate-level random triangles.
/// Below roughly 1e-4 rad the line-intersection construction loses the
/// digits the 1e-9 cross-check needs.
pub const MIN_POINT_ANGLE: f64 = 1e-3;

/// Uniform on the simplex `alpha + beta + gamma = π`.
pub fn random_triple<R: Rng>(rng: &mut R) -> AngleTriple {
    loop {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let a = lo * PI;
        let b = (hi - lo) * PI;
        if let Ok(t) = AngleTriple::new(a, b, PI - a - b) {
            return t;
        }
    }
}

/// Vertices uniform in `[-1, 1]^2`, rejecting triangles with an angle below
/// [`MIN_POINT_ANGLE`].
pub fn random_triangle<R: Rng>(rng: &mut R) -> TrianglePoints {
    loop {
        let mut p = || Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b, c) = (p(), p(), p());
        if let Ok(t) = TrianglePoints::new(a, b, c) {
            if angles_of(&t).is_ok_and(|ang| ang.min_angle() >= MIN_POINT_ANGLE) {
                return t;
            }
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
