//! Tf(x) = ∫ K(x, y) f(y) dy on the grid.
//!
//! Off the diagonal this is the midpoint sum over nodes y ≠ x. The diagonal cell contributes
//! f(x) ∫_{cell} K(x, x + z) dz + ∇f(x) · ∫_{cell} K(x, x + z) z dz, with both moments on a
//! subcell midpoint rule and ∇f by central differences. For odd kernels the zeroth moment is the
//! principal value 0; the first moment is what makes odd kernels converge at second order.

use super::KernelModel;
use crate::geometry::{add, Point, MAX_DIM};
use crate::grid::{GridDomain, GridFunction};
use crate::{Error, Result};
use rayon::prelude::*;

/// Subcells per axis for the diagonal moments: kernels without an offset table pay this per node.
const SUBCELLS: usize = 4;
/// Subcells per axis when the moments are computed once, by dimension.
const TABLE_SUBCELLS: [usize; MAX_DIM] = [64, 16, 8];

/// ∫_{cell} K(x, x + z) dz and ∫_{cell} K(x, x + z) z dz.
#[derive(Clone, Copy, Debug, Default)]
struct DiagonalMoments {
    zeroth: f64,
    first: [f64; MAX_DIM],
}

pub struct KernelOperator<'a> {
    kernel: &'a dyn KernelModel,
    domain: GridDomain,
    component: usize,
    /// K(0, δ h) for integer offsets δ ∈ [−(n−1), n−1]^d when K is translation-invariant.
    offsets: Option<Vec<f64>>,
    /// Diagonal-cell moments for translation-invariant kernels.
    diagonal: Option<DiagonalMoments>,
}

impl<'a> KernelOperator<'a> {
    pub fn new(kernel: &'a dyn KernelModel, domain: GridDomain, component: usize) -> Result<Self> {
        if kernel.dim() != domain.dim() {
            return Err(Error::InvalidArgument(format!(
                "kernel dimension {} does not match grid dimension {}",
                kernel.dim(),
                domain.dim()
            )));
        }
        if component >= kernel.components() {
            return Err(Error::InvalidArgument(format!(
                "component {component} out of range for a kernel with {} components",
                kernel.components()
            )));
        }
        let mut op = Self { kernel, domain, component, offsets: None, diagonal: None };
        if kernel.translation_invariant() {
            let span = 2 * domain.nodes_per_axis() - 1;
            let count = span.pow(domain.dim() as u32);
            let table = (0..count)
                .into_par_iter()
                .map(|i| {
                    let z = op.offset_point(i);
                    if z.iter().all(|c| *c == 0.0) {
                        Ok(0.0)
                    } else {
                        Ok(kernel.eval(&[0.0; MAX_DIM], &z)?[component])
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            op.offsets = Some(table);
            if kernel.off_grid() {
                op.diagonal = Some(op.diagonal_cell(&[0.0; MAX_DIM], TABLE_SUBCELLS[domain.dim() - 1])?);
            }
        }
        Ok(op)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn offset_point(&self, i: usize) -> Point {
        let n = self.domain.nodes_per_axis();
        let span = 2 * n - 1;
        let h = self.domain.spacing();
        let mut z = [0.0; MAX_DIM];
        let mut rest = i;
        for axis in (0..self.domain.dim()).rev() {
            z[axis] = ((rest % span) as f64 - (n - 1) as f64) * h;
            rest /= span;
        }
        z
    }

    fn offset_index(&self, x: usize, y: usize) -> usize {
        let n = self.domain.nodes_per_axis();
        let span = 2 * n - 1;
        let (mx, my) = (self.domain.multi_index(x), self.domain.multi_index(y));
        (0..self.domain.dim()).fold(0, |acc, a| acc * span + (my[a] + n - 1 - mx[a]))
    }

    fn diagonal_cell(&self, x: &Point, per_axis: usize) -> Result<DiagonalMoments> {
        let d = self.domain.dim();
        let sub = self.domain.spacing() / per_axis as f64;
        let mut out = DiagonalMoments::default();
        for i in 0..per_axis.pow(d as u32) {
            let mut z = [0.0; MAX_DIM];
            let mut rest = i;
            for c in z.iter_mut().take(d) {
                *c = ((rest % per_axis) as f64 + 0.5 - per_axis as f64 / 2.0) * sub;
                rest /= per_axis;
            }
            let k = self.kernel.eval(x, &add(x, &z))?[self.component];
            out.zeroth += k;
            for a in 0..d {
                out.first[a] += k * z[a];
            }
        }
        let vol = sub.powi(d as i32);
        out.zeroth = if self.kernel.odd() { 0.0 } else { out.zeroth * vol };
        for a in 0..d {
            out.first[a] *= vol;
        }
        Ok(out)
    }

    /// Central-difference gradient at node `x`, one-sided on the boundary.
    fn gradient(&self, f: &GridFunction, x: usize) -> [f64; MAX_DIM] {
        let n = self.domain.nodes_per_axis();
        let h = self.domain.spacing();
        let m = self.domain.multi_index(x);
        let mut g = [0.0; MAX_DIM];
        for (a, ga) in g.iter_mut().enumerate().take(self.domain.dim()) {
            let (mut lo, mut hi) = (m, m);
            lo[a] = m[a].saturating_sub(1);
            hi[a] = (m[a] + 1).min(n - 1);
            let span = (hi[a] - lo[a]) as f64 * h;
            *ga = (f.values()[self.domain.flat_index(&hi)] - f.values()[self.domain.flat_index(&lo)]) / span;
        }
        g
    }

    fn entry(&self, x: usize, y: usize) -> Result<f64> {
        match &self.offsets {
            Some(table) => Ok(table[self.offset_index(x, y)]),
            None => Ok(self.kernel.eval(&self.domain.node(x), &self.domain.node(y))?[self.component]),
        }
    }

    fn value_at(&self, f: &GridFunction, support: &[usize], x: usize) -> Result<f64> {
        let mut sum = 0.0;
        for &y in support {
            if y != x {
                sum += self.entry(x, y)? * f.values()[y];
            }
        }
        let fx = f.values()[x];
        let grad = self.gradient(f, x);
        if !self.kernel.off_grid() || (fx == 0.0 && grad.iter().all(|g| *g == 0.0)) {
            return Ok(sum * self.domain.cell_volume());
        }
        let diag = match self.diagonal {
            Some(v) => v,
            None => self.diagonal_cell(&self.domain.node(x), SUBCELLS)?,
        };
        let first: f64 = (0..self.domain.dim()).map(|a| diag.first[a] * grad[a]).sum();
        Ok(sum * self.domain.cell_volume() + diag.zeroth * fx + first)
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.domain() != &self.domain {
            return Err(Error::InvalidArgument("grid function lives on a different domain".into()));
        }
        Ok(())
    }

    /// Tf at the single node `x`.
    pub fn apply_at(&self, f: &GridFunction, x: usize) -> Result<f64> {
        self.check(f)?;
        let support: Vec<usize> = (0..f.values().len()).filter(|&i| f.values()[i] != 0.0).collect();
        self.value_at(f, &support, x)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let support: Vec<usize> = (0..f.values().len()).filter(|&i| f.values()[i] != 0.0).collect();
        let values = (0..self.domain.node_count())
            .into_par_iter()
            .map(|x| self.value_at(f, &support, x))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(self.domain, values)
    }
}

/// One-shot Tf for component `component` of K.
pub fn apply_kernel_operator(kernel: &dyn KernelModel, f: &GridFunction, component: usize) -> Result<GridFunction> {
    KernelOperator::new(kernel, *f.domain(), component)?.apply(f)
}
