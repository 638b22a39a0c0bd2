//! Uniform Cartesian grids on the box [−L, L]^d, grid functions, balls and ball families.

use crate::geometry::{dist2, Point, MAX_DIM};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Relative slack in ball membership tests, so that nodes exactly on a sphere are inside.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Largest node count accepted when decoding grid functions.
pub const MAX_NODES: usize = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    d: usize,
    half_width: f64,
    n: usize,
}

impl GridDomain {
    pub fn new(d: usize, half_width: f64, n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidArgument(format!("dimension {d} outside 1..=3")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!("half-width {half_width} must be positive")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 nodes per axis, got {n}")));
        }
        match n.checked_pow(d as u32) {
            Some(total) if total <= MAX_NODES => {}
            _ => return Err(Error::InvalidArgument(format!("{n}^{d} nodes is too many"))),
        }
        Ok(Self { d, half_width, n })
    }

    /// Domain with spacing as close as possible to `h` (rounded to an integer node count).
    pub fn with_spacing(d: usize, half_width: f64, h: f64) -> Result<Self> {
        let n = (2.0 * half_width / h).round() as usize + 1;
        Self::new(d, half_width, n)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }
    pub fn node_count(&self) -> usize {
        self.n.pow(self.d as u32)
    }
    /// Volume of one grid cell, h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
    /// Per-axis indices of a flat row-major index (axis 0 slowest).
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        for axis in (0..self.d).rev() {
            m[axis] = idx % self.n;
            idx /= self.n;
        }
        m
    }
    pub fn flat_index(&self, m: &[usize; MAX_DIM]) -> usize {
        (0..self.d).fold(0, |acc, axis| acc * self.n + m[axis])
    }
    pub fn node(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.d {
            p[axis] = self.axis_coord(m[axis]);
        }
        p
    }
    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.node_count()).map(move |i| self.node(i))
    }
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.d).all(|a| p[a].abs() <= self.half_width * (1.0 + MEMBERSHIP_SLACK))
    }
    pub fn nearest_node(&self, p: &Point) -> usize {
        let h = self.spacing();
        let mut m = [0; MAX_DIM];
        for axis in 0..self.d {
            let k = ((p[axis] + self.half_width) / h).round();
            m[axis] = k.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        self.flat_index(&m)
    }
    /// Length of the box diagonal half, L·√d.
    pub fn half_diagonal(&self) -> f64 {
        self.half_width * (self.d as f64).sqrt()
    }

    fn axis_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let h = self.spacing();
        let a = ((lo + self.half_width) / h - 1e-9).ceil().max(0.0);
        let b = ((hi + self.half_width) / h + 1e-9).floor().min((self.n - 1) as f64);
        (a <= b).then_some((a as usize, b as usize))
    }

    /// Calls `visit(index, node)` for every node of the closed ball B(center, r).
    pub fn for_each_in_ball(&self, ball: &Ball, mut visit: impl FnMut(usize, &Point)) {
        let r2 = ball.radius * ball.radius * (1.0 + MEMBERSHIP_SLACK);
        self.for_each_in_box(&ball.center, ball.radius, |i, p| {
            if dist2(p, &ball.center) <= r2 {
                visit(i, p)
            }
        });
    }

    fn for_each_in_box(&self, center: &Point, half: f64, mut visit: impl FnMut(usize, &Point)) {
        let mut ranges = [(0usize, 0usize); MAX_DIM];
        for (axis, range) in ranges.iter_mut().enumerate().take(self.d) {
            match self.axis_range(center[axis] - half, center[axis] + half) {
                Some(r) => *range = r,
                None => return,
            }
        }
        let mut p = [0.0; MAX_DIM];
        for i0 in ranges[0].0..=ranges[0].1 {
            p[0] = self.axis_coord(i0);
            for i1 in ranges[1].0..=ranges[1].1 {
                if self.d > 1 {
                    p[1] = self.axis_coord(i1);
                }
                for i2 in ranges[2].0..=ranges[2].1 {
                    if self.d > 2 {
                        p[2] = self.axis_coord(i2);
                    }
                    let idx = match self.d {
                        1 => i0,
                        2 => i0 * self.n + i1,
                        _ => (i0 * self.n + i1) * self.n + i2,
                    };
                    visit(idx, &p);
                }
            }
        }
    }

    pub fn ball_indices(&self, ball: &Ball) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_in_ball(ball, |i, _| out.push(i));
        out
    }

    /// Number of nodes in the ball.
    pub fn ball_count(&self, ball: &Ball) -> usize {
        let mut count = 0;
        self.for_each_in_ball(ball, |_, _| count += 1);
        count
    }

    /// Discrete measure of the ball, count·h^d.
    pub fn ball_volume(&self, ball: &Ball) -> f64 {
        self.ball_count(ball) as f64 * self.cell_volume()
    }

    /// Fraction of the bounding cube of `ball` lying inside the box.
    pub fn clip_fraction(&self, ball: &Ball) -> f64 {
        let l = self.half_width;
        (0..self.d)
            .map(|a| {
                let lo = (ball.center[a] - ball.radius).max(-l);
                let hi = (ball.center[a] + ball.radius).min(l);
                ((hi - lo) / (2.0 * ball.radius)).clamp(0.0, 1.0)
            })
            .product()
    }

    /// Nodes y with R < |x₀ − y| ≤ 2R.
    pub fn annulus_nodes(&self, x0: &Point, big_r: f64) -> Result<Vec<usize>> {
        if !(big_r > self.spacing()) {
            return Err(Error::UnresolvedAnnulus { center: *x0, radius: big_r });
        }
        let inner = big_r * big_r * (1.0 + MEMBERSHIP_SLACK);
        let outer = 4.0 * big_r * big_r * (1.0 + MEMBERSHIP_SLACK);
        let mut out = Vec::new();
        self.for_each_in_box(x0, 2.0 * big_r, |i, p| {
            let q = dist2(p, x0);
            if q > inner && q <= outer {
                out.push(i);
            }
        });
        if out.is_empty() {
            return Err(Error::UnresolvedAnnulus { center: *x0, radius: big_r });
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} nodes",
                values.len(),
                domain.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value {} at node {i}", values[i])));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = domain.nodes().map(|p| f(&p)).collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: GridDomain, value: f64) -> Result<Self> {
        Self::new(domain, vec![value; domain.node_count()])
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::InvalidArgument("grid functions live on different domains".into()));
        }
        Self::new(self.domain, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Node sum and node count over the ball.
    pub fn ball_sum(&self, ball: &Ball) -> (f64, usize) {
        let mut sum = 0.0;
        let mut count = 0;
        self.domain.for_each_in_ball(ball, |i, _| {
            sum += self.values[i];
            count += 1;
        });
        (sum, count)
    }

    /// Mean of the node values inside the ball.
    pub fn ball_average(&self, ball: &Ball) -> Result<f64> {
        let (sum, count) = self.ball_sum(ball);
        if count == 0 {
            return Err(Error::EmptyBall { center: ball.center, radius: ball.radius });
        }
        Ok(sum / count as f64)
    }

    /// Midpoint-rule w-mass of the ball, Σ_{B} w · h^d.
    pub fn ball_mass(&self, ball: &Ball) -> f64 {
        self.ball_sum(ball).0 * self.domain.cell_volume()
    }

    /// (Σ|f|^p w h^d)^{1/p}, or max |f w| for `p = ∞`.
    pub fn weighted_lp_norm(&self, w: &GridFunction, p: f64) -> Result<f64> {
        if self.domain != w.domain {
            return Err(Error::InvalidArgument("grid functions live on different domains".into()));
        }
        if let Some((index, &value)) = w.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeWeight { index, value });
        }
        if p == f64::INFINITY {
            return Ok(self.values.iter().zip(&w.values).fold(0.0, |m, (f, w)| m.max((f * w).abs())));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must be ≥ 1")));
        }
        let s: f64 = self.values.iter().zip(&w.values).map(|(f, w)| f.abs().powf(p) * w).sum();
        Ok((s * self.domain.cell_volume()).powf(1.0 / p))
    }

    /// Unweighted L^p norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let ones = GridFunction { domain: self.domain, values: vec![1.0; self.values.len()] };
        self.weighted_lp_norm(&ones, p).expect("unit weight is admissible")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    F64le,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    d: usize,
    half_width: f64,
    n: usize,
    ordering: String,
    encoding: Encoding,
}

const FORMAT_NAME: &str = "gridfunction";
const MAX_HEADER: usize = 4096;

impl GridFunction {
    fn header(&self, encoding: Encoding) -> Header {
        Header {
            format: FORMAT_NAME.into(),
            version: 1,
            d: self.domain.d,
            half_width: self.domain.half_width,
            n: self.domain.n,
            ordering: "row-major".into(),
            encoding,
        }
    }

    /// Writes a one-line JSON header followed by the values in the requested encoding.
    pub fn write_to(&self, mut out: impl Write, encoding: Encoding) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header(encoding))?;
        out.write_all(b"\n")?;
        match encoding {
            Encoding::F64le => {
                for v in &self.values {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            Encoding::Csv => {
                let mut w = csv::Writer::from_writer(out);
                let mut names: Vec<String> = (0..self.domain.d).map(|a| format!("x{}", a + 1)).collect();
                names.push("value".into());
                w.write_record(&names)?;
                for (i, v) in self.values.iter().enumerate() {
                    let p = self.domain.node(i);
                    let mut row: Vec<String> = p[..self.domain.d].iter().map(|x| format!("{x:e}")).collect();
                    row.push(format!("{v:e}"));
                    w.write_record(&row)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self, encoding: Encoding) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf, encoding).expect("writing to memory cannot fail");
        buf
    }

    /// Parses the header-plus-body format produced by [`GridFunction::write_to`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let end = bytes
            .iter()
            .take(MAX_HEADER)
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("missing header line".into()))?;
        let header: Header = serde_json::from_slice(&bytes[..end])?;
        if header.format != FORMAT_NAME || header.version != 1 || header.ordering != "row-major" {
            return Err(Error::Format("unsupported format, version or ordering".into()));
        }
        let domain = GridDomain::new(header.d, header.half_width, header.n)
            .map_err(|e| Error::Format(e.to_string()))?;
        let body = &bytes[end + 1..];
        let values = match header.encoding {
            Encoding::F64le => {
                if body.len() != domain.node_count() * 8 {
                    return Err(Error::Format(format!(
                        "body has {} bytes, expected {}",
                        body.len(),
                        domain.node_count() * 8
                    )));
                }
                body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
            }
            Encoding::Csv => parse_csv_body(&domain, body)?,
        };
        Self::new(domain, values).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_from(mut input: impl BufRead) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

fn parse_csv_body(domain: &GridDomain, body: &[u8]) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body);
    let width = domain.d + 1;
    if reader.headers()?.len() != width {
        return Err(Error::Format(format!("expected {width} CSV columns")));
    }
    let tol = 1e-9 * domain.half_width;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let i = values.len();
        if i >= domain.node_count() || record.len() != width {
            return Err(Error::Format(format!("unexpected CSV row {}", i + 1)));
        }
        let node = domain.node(i);
        for axis in 0..domain.d {
            let x: f64 = record[axis].trim().parse().map_err(|_| Error::Format(format!("bad coordinate in row {}", i + 1)))?;
            if !((x - node[axis]).abs() <= tol) {
                return Err(Error::Format(format!("row {} is not in row-major order", i + 1)));
            }
        }
        let v: f64 = record[domain.d].trim().parse().map_err(|_| Error::Format(format!("bad value in row {}", i + 1)))?;
        values.push(v);
    }
    if values.len() != domain.node_count() {
        return Err(Error::Format(format!("{} rows for {} nodes", values.len(), domain.node_count())));
    }
    Ok(values)
}

/// How a ball family was generated; together with the domain it reproduces the family exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum FamilyPolicy {
    /// Every `stride`-th node along each axis, with each listed radius.
    ExhaustiveOnGrid { stride: usize, radii: Vec<f64> },
    /// Every `stride`-th node with radii `r_min·2^k`, k < levels.
    DyadicRadii { stride: usize, r_min: f64, levels: usize },
    /// `count` balls with centers uniform in the box and radii log-uniform in [r_min, r_max].
    /// A larger `count` with the same seed extends the smaller family.
    RandomSeeded { seed: u64, count: usize, r_min: f64, r_max: f64 },
    /// Explicit list supplied by the caller.
    Explicit { label: String },
}

impl FamilyPolicy {
    /// The same policy with twice as many balls (finer stride, or twice the random count).
    pub fn doubled(&self) -> Self {
        match self {
            Self::ExhaustiveOnGrid { stride, radii } => {
                let mut radii2 = Vec::with_capacity(2 * radii.len());
                for w in radii.windows(2) {
                    radii2.push(w[0]);
                    radii2.push((w[0] * w[1]).sqrt());
                }
                radii2.extend(radii.last());
                Self::ExhaustiveOnGrid { stride: *stride, radii: radii2 }
            }
            Self::DyadicRadii { stride, r_min, levels } => {
                Self::DyadicRadii { stride: (*stride / 2).max(1), r_min: *r_min, levels: *levels }
            }
            Self::RandomSeeded { seed, count, r_min, r_max } => {
                Self::RandomSeeded { seed: *seed, count: 2 * count, r_min: *r_min, r_max: *r_max }
            }
            Self::Explicit { .. } => self.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub policy: FamilyPolicy,
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn generate(domain: &GridDomain, policy: FamilyPolicy) -> Result<Self> {
        let balls = match &policy {
            FamilyPolicy::ExhaustiveOnGrid { stride, radii } => strided_centers(domain, *stride)
                .flat_map(|c| radii.iter().map(move |&r| Ball { center: c, radius: r }))
                .collect(),
            FamilyPolicy::DyadicRadii { stride, r_min, levels } => strided_centers(domain, *stride)
                .flat_map(|c| (0..*levels).map(move |k| Ball { center: c, radius: r_min * 2f64.powi(k as i32) }))
                .collect(),
            FamilyPolicy::RandomSeeded { seed, count, r_min, r_max } => {
                if !(*r_min > 0.0 && r_max >= r_min) {
                    return Err(Error::InvalidArgument("random family needs 0 < r_min ≤ r_max".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let l = domain.half_width();
                let (la, lb) = (r_min.ln(), r_max.ln());
                (0..*count)
                    .map(|_| {
                        let mut c = [0.0; MAX_DIM];
                        for x in c.iter_mut().take(domain.dim()) {
                            *x = rng.gen_range(-l..=l);
                        }
                        let t: f64 = rng.gen();
                        Ball { center: c, radius: (la + t * (lb - la)).exp() }
                    })
                    .collect()
            }
            FamilyPolicy::Explicit { .. } => {
                return Err(Error::InvalidArgument("explicit families are built with BallFamily::explicit".into()))
            }
        };
        Self::explicit_with(policy, balls, domain)
    }

    pub fn explicit(label: &str, balls: Vec<Ball>, domain: &GridDomain) -> Result<Self> {
        Self::explicit_with(FamilyPolicy::Explicit { label: label.into() }, balls, domain)
    }

    fn explicit_with(policy: FamilyPolicy, balls: Vec<Ball>, domain: &GridDomain) -> Result<Self> {
        let balls: Vec<Ball> = balls
            .into_iter()
            .filter(|b| b.radius > 0.0 && domain.contains(&b.center) && domain.ball_count(b) > 0)
            .collect();
        if balls.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(Self { policy, balls })
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
    pub fn doubled(&self, domain: &GridDomain) -> Result<Self> {
        Self::generate(domain, self.policy.doubled())
    }
}

fn strided_centers(domain: &GridDomain, stride: usize) -> impl Iterator<Item = Point> + '_ {
    let stride = stride.max(1);
    (0..domain.node_count()).filter_map(move |i| {
        let m = domain.multi_index(i);
        m[..domain.dim()].iter().all(|k| k % stride == 0).then(|| domain.node(i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use proptest::prelude::*;

    fn line(l: f64, n: usize) -> GridDomain {
        GridDomain::new(1, l, n).unwrap()
    }

    #[test]
    fn node_coordinates_are_exact() {
        let g = line(4.0, 17);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node(0)[0], -4.0);
        assert_eq!(g.node(16)[0], 4.0);
        let g3 = GridDomain::new(3, 1.0, 5).unwrap();
        assert_eq!(g3.node_count(), 125);
        let i = g3.flat_index(&[1, 2, 3]);
        assert_eq!(g3.multi_index(i), [1, 2, 3]);
        assert_eq!(g3.node(i), [-0.5, 0.0, 0.5]);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(GridDomain::new(1, 1.0, 1).is_err());
        assert!(GridDomain::new(4, 1.0, 3).is_err());
        assert!(GridDomain::new(2, -1.0, 3).is_err());
    }

    #[test]
    fn averages() {
        let g = line(4.0, 33);
        let three = GridFunction::constant(g, 3.0).unwrap();
        let b = Ball::new(point(&[0.7]), 1.3).unwrap();
        assert_eq!(three.ball_average(&b).unwrap(), 3.0);
        let x = GridFunction::from_fn(g, |p| p[0]).unwrap();
        assert_eq!(x.ball_average(&Ball::new(point(&[0.0]), 4.0).unwrap()).unwrap(), 0.0);
        let far = Ball::new(point(&[100.0]), 0.1).unwrap();
        assert!(matches!(three.ball_average(&far), Err(Error::EmptyBall { .. })));
    }

    #[test]
    fn indicator_average_matches_brute_force() {
        let g = line(2.0, 17);
        assert_eq!(g.spacing(), 0.25);
        let f = GridFunction::from_fn(g, |p| if p[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let b = Ball::new(point(&[0.0]), 1.0).unwrap();
        let (mut inside, mut positive) = (0, 0);
        for p in g.nodes() {
            if p[0].abs() <= 1.0 {
                inside += 1;
                if p[0] > 0.0 {
                    positive += 1;
                }
            }
        }
        assert_eq!((inside, positive), (9, 4));
        assert_eq!(f.ball_average(&b).unwrap(), positive as f64 / inside as f64);
    }

    #[test]
    fn norms() {
        let g = line(0.5, 1001);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let l2 = one.weighted_lp_norm(&one, 2.0).unwrap();
        assert!((l2 - 1.0).abs() < 2.0 * g.spacing());
        assert_eq!(one.weighted_lp_norm(&one, f64::INFINITY).unwrap(), 1.0);

        let g = line(10.0, 20001);
        let f = GridFunction::from_fn(g, |p| (-p[0].abs()).exp()).unwrap();
        let w = GridFunction::constant(g, 1.0).unwrap();
        let exact = 2.0 * (1.0 - (-10f64).exp());
        assert!((f.weighted_lp_norm(&w, 1.0).unwrap() - exact).abs() < 2e-3);

        let neg = GridFunction::constant(g, -1.0).unwrap();
        assert!(matches!(f.weighted_lp_norm(&neg, 2.0), Err(Error::NegativeWeight { .. })));
    }

    #[test]
    fn annulus_enumeration() {
        let g = line(4.0, 17);
        let nodes = g.annulus_nodes(&point(&[0.0]), 1.0).unwrap();
        let xs: Vec<f64> = nodes.iter().map(|&i| g.node(i)[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.5, 1.5, 2.0]);
        assert!(matches!(g.annulus_nodes(&point(&[0.0]), 9.0), Err(Error::UnresolvedAnnulus { .. })));
        assert!(matches!(g.annulus_nodes(&point(&[0.0]), 0.5), Err(Error::UnresolvedAnnulus { .. })));

        let g2 = GridDomain::new(2, 3.0, 25).unwrap();
        let x0 = point(&[0.3, -0.4]);
        let brute = g2
            .nodes()
            .filter(|p| {
                let r = dist2(p, &x0).sqrt();
                r > 1.1 && r <= 2.2
            })
            .count();
        assert_eq!(g2.annulus_nodes(&x0, 1.1).unwrap().len(), brute);
    }

    #[test]
    fn ball_enumeration_matches_brute_force_in_3d() {
        let g = GridDomain::new(3, 1.0, 11).unwrap();
        let b = Ball::new(point(&[0.15, -0.3, 0.9]), 0.65).unwrap();
        let brute = g.nodes().filter(|p| dist2(p, &b.center) <= b.radius * b.radius).count();
        assert_eq!(g.ball_count(&b), brute);
    }

    #[test]
    fn clip_fraction_of_corner_ball() {
        let g = GridDomain::new(2, 1.0, 11).unwrap();
        let b = Ball::new(point(&[1.0, 1.0]), 0.5).unwrap();
        assert!((g.clip_fraction(&b) - 0.25).abs() < 1e-15);
        assert_eq!(g.clip_fraction(&Ball::new(point(&[0.0, 0.0]), 0.5).unwrap()), 1.0);
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let g = GridDomain::new(2, 1.5, 7).unwrap();
        let f = GridFunction::from_fn(g, |p| (p[0] * 3.1).sin() / 7.0 + p[1].exp() * 1e-300).unwrap();
        for enc in [Encoding::F64le, Encoding::Csv] {
            let back = GridFunction::from_bytes(&f.to_bytes(enc)).unwrap();
            assert_eq!(back.domain(), f.domain());
            for (a, b) in back.values().iter().zip(f.values()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert!(GridFunction::from_bytes(b"{}\n").is_err());
        let mut truncated = f.to_bytes(Encoding::F64le);
        truncated.pop();
        assert!(GridFunction::from_bytes(&truncated).is_err());
    }

    #[test]
    fn random_family_has_prefix_property() {
        let g = GridDomain::new(2, 4.0, 33).unwrap();
        let policy = FamilyPolicy::RandomSeeded { seed: 9, count: 50, r_min: 0.25, r_max: 4.0 };
        let a = BallFamily::generate(&g, policy.clone()).unwrap();
        let b = BallFamily::generate(&g, policy.doubled()).unwrap();
        assert_eq!(b.len(), 100);
        assert_eq!(&b.balls[..50], &a.balls[..]);
        assert_eq!(a, BallFamily::generate(&g, policy).unwrap());
    }

    proptest! {
        #[test]
        fn average_shift(c in -1e3f64..1e3, x in -3.0f64..3.0, r in 0.3f64..4.0) {
            let g = line(4.0, 41);
            let f = GridFunction::from_fn(g, |p| 0.5 * p[0] * p[0]).unwrap();
            let fc = f.map(|v| v + c).unwrap();
            let b = Ball::new(point(&[x]), r).unwrap();
            let lhs = fc.ball_average(&b).unwrap();
            let rhs = f.ball_average(&b).unwrap() + c;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + c.abs()));
        }

        #[test]
        fn norm_homogeneity(a in -50.0f64..50.0, p in 1.0f64..6.0) {
            let g = GridDomain::new(2, 2.0, 15).unwrap();
            let f = GridFunction::from_fn(g, |q| (q[0] - q[1]).cos()).unwrap();
            let w = GridFunction::from_fn(g, |q| q[0].exp()).unwrap();
            let n1 = f.map(|v| a * v).unwrap().weighted_lp_norm(&w, p).unwrap();
            let n0 = f.weighted_lp_norm(&w, p).unwrap();
            prop_assert!((n1 - a.abs() * n0).abs() <= 1e-12 * (1.0 + n1));
        }

        #[test]
        fn nested_ball_mass_monotone(x in -2.0f64..2.0, y in -2.0f64..2.0, r in 0.1f64..2.0, extra in 0.0f64..2.0) {
            let g = GridDomain::new(2, 3.0, 31).unwrap();
            let w = GridFunction::from_fn(g, |q| 1.0 + q[0].abs()).unwrap();
            let small = Ball::new(point(&[x, y]), r).unwrap();
            let big = Ball::new(point(&[x, y]), r + extra).unwrap();
            prop_assert!(w.ball_mass(&small) <= w.ball_mass(&big));
        }
    }
}
