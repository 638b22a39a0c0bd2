//! Agmon distance d_ρ(x, y): shortest grid path in the metric ρ(·)⁻¹|dx|.

use crate::critical_radius::CriticalRadius;
use crate::geometry::{dist, Point, MAX_DIM};
use crate::grid::{GridDomain, GridFunction};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// All offsets in {−1, 0, 1}^d: 8 neighbors in the plane, 26 in space.
    Moore,
    /// Primitive offsets with entries in {−2, …, 2}: 16 neighbors in the plane, 98 in space.
    Extended,
}

impl Stencil {
    pub fn offsets(self, d: usize) -> Vec<[i64; MAX_DIM]> {
        let reach: i64 = match self {
            Stencil::Moore => 1,
            Stencil::Extended => 2,
        };
        let span = |axis: usize| if axis < d { -reach..=reach } else { 0..=0 };
        let mut out = Vec::new();
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    let o = [a, b, c];
                    if o == [0, 0, 0] || gcd3(a.abs(), b.abs(), c.abs()) != 1 {
                        continue;
                    }
                    out.push(o);
                }
            }
        }
        out
    }
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    gcd(gcd(a, b), c)
}

/// Distance for constant ρ ≡ ρ₀, |x − y|/ρ₀.
pub fn constant_rho_distance(rho0: f64, x: &Point, y: &Point) -> f64 {
    dist(x, y) / rho0
}

#[derive(Clone, Debug)]
pub struct AgmonGraph {
    domain: GridDomain,
    inv_rho: Vec<f64>,
    offsets: Vec<([i64; MAX_DIM], f64)>,
}

impl AgmonGraph {
    /// Edge weight between nodes a and b joined by stencil offset o: h|o|·(ρ(a)⁻¹ + ρ(b)⁻¹)/2.
    pub fn new(rho: &CriticalRadius, domain: &GridDomain, stencil: Stencil) -> Result<Self> {
        let inv_rho = (0..domain.node_count())
            .into_par_iter()
            .map(|i| {
                let p = domain.node(i);
                let r = rho.eval(&p);
                if r > 0.0 && r.is_finite() {
                    Ok(1.0 / r)
                } else {
                    Err(Error::NonPositiveRho { point: p, value: r })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let h = domain.spacing();
        let offsets = stencil
            .offsets(domain.dim())
            .into_iter()
            .map(|o| {
                let len = ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt() * h;
                (o, len)
            })
            .collect();
        Ok(Self { domain: *domain, inv_rho, offsets })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn for_each_edge(&self, i: usize, mut visit: impl FnMut(usize, f64)) {
        let n = self.domain.nodes_per_axis() as i64;
        let d = self.domain.dim();
        let m = self.domain.multi_index(i);
        'edges: for (o, len) in &self.offsets {
            let mut q = [0usize; MAX_DIM];
            for axis in 0..d {
                let k = m[axis] as i64 + o[axis];
                if k < 0 || k >= n {
                    continue 'edges;
                }
                q[axis] = k as usize;
            }
            let j = self.domain.flat_index(&q);
            visit(j, len * 0.5 * (self.inv_rho[i] + self.inv_rho[j]));
        }
    }

    /// Dijkstra from `source`, stopping early once `target` is settled.
    fn dijkstra(&self, source: usize, target: Option<usize>) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.domain.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((OrdF64(0.0), source)));
        while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            if Some(u) == target {
                break;
            }
            self.for_each_edge(u, |v, w| {
                let nd = du + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((OrdF64(nd), v)));
                }
            });
        }
        dist
    }

    /// Distances from one node to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.dijkstra(source, None)
    }

    /// Distance field from a point (snapped to its nearest node), for export.
    pub fn distance_field(&self, x: &Point) -> Result<GridFunction> {
        GridFunction::new(self.domain, self.distances_from(self.domain.nearest_node(x)))
    }

    /// d_ρ between the nodes nearest to `x` and `y`; computed from the smaller node index so the
    /// result is symmetric bit for bit.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let (a, b) = (self.domain.nearest_node(x), self.domain.nearest_node(y));
        let (s, t) = (a.min(b), a.max(b));
        let v = self.dijkstra(s, Some(t))[t];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Disconnected { from: s, to: t })
        }
    }

    /// d_ρ for many pairs, grouping by source node and running the sources in parallel.
    pub fn pair_distances(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, (s, _)) in pairs.iter().enumerate() {
            groups.entry(*s).or_default().push(k);
        }
        let groups: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();
        let results: Vec<Vec<(usize, f64)>> = groups
            .par_iter()
            .map(|(s, ks)| {
                let field = self.distances_from(*s);
                ks.iter().map(|&k| (k, field[pairs[k].1])).collect()
            })
            .collect();
        let mut out = vec![f64::NAN; pairs.len()];
        for (k, v) in results.into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::Disconnected { from: pairs[k].0, to: pairs[k].1 });
            }
            out[k] = v;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Pair of node indices with its Euclidean length and ρ at the first node.
#[derive(Clone, Copy, Debug)]
struct SnappedPair {
    x: usize,
    y: usize,
    r: f64,
    rho_x: f64,
}

fn snap(graph: &AgmonGraph, rho: &CriticalRadius, pairs: &[(Point, Point)]) -> Vec<SnappedPair> {
    let g = graph.domain();
    pairs
        .iter()
        .map(|(x, y)| {
            let (i, j) = (g.nearest_node(x), g.nearest_node(y));
            let (px, py) = (g.node(i), g.node(j));
            SnappedPair { x: i, y: j, r: dist(&px, &py), rho_x: rho.eval(&px) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFit {
    /// Smallest D₀ with D₀⁻¹|x−y|/ρ(x) ≤ d_ρ ≤ D₀|x−y|/ρ(x) on the sample.
    pub d0: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub binding_pair: (Point, Point),
    pub pairs_used: usize,
}

fn local_fit(g: &GridDomain, snapped: &[SnappedPair], dists: &[f64]) -> Option<LocalFit> {
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let (mut at_min, mut at_max) = (0, 0);
    let mut used = 0;
    for (k, (p, dv)) in snapped.iter().zip(dists).enumerate() {
        if p.x == p.y || p.r > 2.0 * p.rho_x * (1.0 + 1e-12) {
            continue;
        }
        used += 1;
        let q = dv / (p.r / p.rho_x);
        if q < min_ratio {
            min_ratio = q;
            at_min = k;
        }
        if q > max_ratio {
            max_ratio = q;
            at_max = k;
        }
    }
    if used == 0 {
        return None;
    }
    let (d0, k) = if max_ratio >= 1.0 / min_ratio { (max_ratio, at_max) } else { (1.0 / min_ratio, at_min) };
    Some(LocalFit {
        d0,
        min_ratio,
        max_ratio,
        binding_pair: (g.node(snapped[k].x), g.node(snapped[k].y)),
        pairs_used: used,
    })
}

/// Fits D₀ over pairs with |x − y| ≤ 2ρ(x) (coincident pairs are skipped).
pub fn check_local_equivalence(graph: &AgmonGraph, rho: &CriticalRadius, pairs: &[(Point, Point)]) -> Result<LocalFit> {
    let snapped = snap(graph, rho, pairs);
    if let Some(p) = snapped.iter().find(|p| p.r > 2.0 * p.rho_x * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("pair at distance {} exceeds 2ρ(x) = {}", p.r, 2.0 * p.rho_x)));
    }
    let dists = graph.pair_distances(&snapped.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())?;
    local_fit(graph.domain(), &snapped, &dists).ok_or_else(|| Error::InvalidArgument("no non-degenerate pair".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalFit {
    /// Smallest C with d_ρ ≤ C(1 + |x−y|/ρ(x))^{k₀+1} on all pairs.
    pub c0d: f64,
    /// Smallest D₁ with d_ρ ≥ D₁⁻¹(1 + |x−y|/ρ(x))^{1/(k₀+1)} on pairs with |x−y| ≥ ρ(x).
    pub d1: f64,
    /// D₀ from the pairs with |x−y| ≤ 2ρ(x), when any.
    pub local: Option<LocalFit>,
    /// C = max{D₁⁻¹ 3^{1/(k₀+1)}, D₀⁻¹} of the combined lower bound.
    pub lower_bound_c: f64,
    /// min over pairs of d_ρ − [D₁⁻¹(1+|x−y|/ρ)^{1/(k₀+1)} + D₀⁻¹(1+ρ/|x−y|)⁻¹ − C].
    pub lower_bound_slack: f64,
    pub lower_bound_holds: bool,
}

/// Upper and lower growth bounds for d_ρ and the combined lower bound built from D₀ and D₁.
pub fn check_global_bounds(graph: &AgmonGraph, rho: &CriticalRadius, pairs: &[(Point, Point)]) -> Result<GlobalFit> {
    if !rho.has_constants() {
        return Err(Error::Precondition("ρ has no (C0, k0) yet".into()));
    }
    let k0 = rho.k0();
    let snapped = snap(graph, rho, pairs);
    let dists = graph.pair_distances(&snapped.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())?;
    let local = local_fit(graph.domain(), &snapped, &dists);

    let mut c0d: f64 = 0.0;
    let mut inv_d1 = f64::INFINITY;
    for (p, dv) in snapped.iter().zip(&dists) {
        let t = 1.0 + p.r / p.rho_x;
        c0d = c0d.max(dv / t.powf(k0 + 1.0));
        if p.r >= p.rho_x {
            inv_d1 = inv_d1.min(dv / t.powf(1.0 / (k0 + 1.0)));
        }
    }
    let d1 = if inv_d1.is_finite() { 1.0 / inv_d1 } else { f64::NAN };

    let inv_d0 = local.as_ref().map_or(0.0, |l| 1.0 / l.d0);
    let inv_d1_used = if d1.is_finite() { 1.0 / d1 } else { 0.0 };
    let lower_bound_c = (inv_d1_used * 3f64.powf(1.0 / (k0 + 1.0))).max(inv_d0);
    let mut slack = f64::INFINITY;
    for (p, dv) in snapped.iter().zip(&dists) {
        let t = 1.0 + p.r / p.rho_x;
        let near = if p.r > 0.0 { 1.0 / (1.0 + p.rho_x / p.r) } else { 0.0 };
        let rhs = inv_d1_used * t.powf(1.0 / (k0 + 1.0)) + inv_d0 * near - lower_bound_c;
        slack = slack.min(dv - rhs);
    }
    Ok(GlobalFit {
        c0d,
        d1,
        local,
        lower_bound_c,
        lower_bound_slack: slack,
        lower_bound_holds: slack >= -1e-12,
    })
}
