//! Points in ℝ^d for d ≤ 3, stored with unused trailing coordinates set to zero.

pub const MAX_DIM: usize = 3;

pub type Point = [f64; MAX_DIM];

pub const ORIGIN: Point = [0.0; MAX_DIM];

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dist(a, &ORIGIN)
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Point with the given leading coordinates; missing ones are zero.
pub fn point(coords: &[f64]) -> Point {
    let mut p = ORIGIN;
    for (slot, c) in p.iter_mut().zip(coords) {
        *slot = *c;
    }
    p
}

/// Unit vector along axis `k`.
pub fn unit(k: usize) -> Point {
    let mut p = ORIGIN;
    p[k] = 1.0;
    p
}

/// Volume ω_d of the unit ball in ℝ^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("dimension {d} not supported"),
    }
}

/// Surface area σ_{d-1} of the unit sphere in ℝ^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Squared Euclidean norm.
#[inline]
pub fn norm2(a: &Point) -> f64 {
    dist2(a, &ORIGIN)
}
