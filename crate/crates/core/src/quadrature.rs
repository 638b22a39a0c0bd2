//! Globally adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.
//!
//! The error estimate of each panel is |K15 − G7|; the panel with the largest
//! estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-11, max_panels: 2000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, optionally seeding the panel list with interior breakpoints.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    }
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|x| *x > a && *x < b));
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }

    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || heap.len() >= opts.max_panels {
            return Quadrature { value: total, error: err, evaluations, converged: err <= tol };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot bisect further in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mut f, lo, hi);
            evaluations += 15;
            heap.push(Panel { a: lo, b: hi, value, error });
        }
    }
}

/// Logarithmically spaced breakpoints strictly inside `(a, b)`, with `a > 0`.
pub fn log_breakpoints(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (1..count).map(|k| (la + (lb - la) * k as f64 / count as f64).exp()).collect()
}
