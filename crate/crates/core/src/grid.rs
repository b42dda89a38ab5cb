//! Structured tensor grids and finite-difference derivatives.
//!
//! Nodes are stored row-major with the last axis fastest. Periodic axes wrap
//! around; non-periodic axes switch to one-sided stencils of the same order
//! near their ends. Stencil weights come from Fornberg's recursion, so any
//! even order from 2 to 8 is available.

use crate::error::{Result, WkitError};
use rayon::prelude::*;

/// One axis of a parameter rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub len: usize,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn new(len: usize, lo: f64, hi: f64, periodic: bool) -> Self {
        Axis {
            len,
            lo,
            hi,
            periodic,
        }
    }

    /// Node spacing: (hi − lo)/len on periodic axes, (hi − lo)/(len − 1) otherwise.
    pub fn h(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.len as f64
        } else {
            (self.hi - self.lo) / (self.len - 1) as f64
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h()
    }

    pub fn period(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Quadrature rule used for integrals over a chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Trapezoid rule; on periodic axes this is the spectrally accurate
    /// rectangle rule.
    #[default]
    Trapezoid,
    /// Composite Simpson on non-periodic axes with an odd node count,
    /// trapezoid elsewhere.
    Simpson,
}

/// Tensor-product grid over a parameter rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len;
        }
        Grid { axes, strides }
    }

    /// Uniform non-periodic grid on [lo, hi]^dim.
    pub fn cube(dim: usize, len: usize, lo: f64, hi: f64) -> Self {
        Grid::new((0..dim).map(|_| Axis::new(len, lo, hi, false)).collect())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.axes[axis].len
    }

    pub fn unravel(&self, node: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for (k, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.index_along(node, k);
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> [f64; 4] {
        let mut x = [0.0; 4];
        for (k, xk) in x.iter_mut().enumerate().take(self.dim()) {
            *xk = self.axes[k].coord(self.index_along(node, k));
        }
        x
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::h).collect()
    }

    /// True when every non-periodic index of the node is at least `collar`
    /// away from both ends.
    pub fn is_interior(&self, node: usize, collar: usize) -> bool {
        (0..self.dim()).all(|k| {
            let a = &self.axes[k];
            a.periodic || {
                let i = self.index_along(node, k);
                i >= collar && i + collar < a.len
            }
        })
    }

    /// Per-node quadrature weights (product of 1D rules).
    pub fn quadrature_weights(&self, rule: Quadrature) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(|a| axis_weights(a, rule)).collect();
        (0..self.len())
            .map(|node| {
                (0..self.dim())
                    .map(|k| per_axis[k][self.index_along(node, k)])
                    .product()
            })
            .collect()
    }

    /// Node offset of moving `step` along `axis` from `node`, wrapping on
    /// periodic axes. Returns `None` when stepping off a non-periodic end.
    pub fn shift(&self, node: usize, axis: usize, step: isize) -> Option<usize> {
        let a = &self.axes[axis];
        let i = self.index_along(node, axis) as isize;
        let mut j = i + step;
        if a.periodic {
            j = j.rem_euclid(a.len as isize);
        } else if j < 0 || j >= a.len as isize {
            return None;
        }
        Some((node as isize + (j - i) * self.strides[axis] as isize) as usize)
    }
}

fn axis_weights(a: &Axis, rule: Quadrature) -> Vec<f64> {
    let h = a.h();
    if a.periodic {
        return vec![h; a.len];
    }
    let n = a.len;
    if rule == Quadrature::Simpson && n % 2 == 1 && n >= 3 {
        (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            })
            .collect()
    } else {
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }
}

/// Fornberg weights for derivatives 0..=2 at `z` from nodes `x`.
pub fn fornberg(z: f64, x: &[f64]) -> Vec<[f64; 3]> {
    let m = 2;
    let n = x.len() - 1;
    let mut c = vec![[0.0; 3]; n + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..=n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencils of one axis, already scaled by the spacing.
#[derive(Clone, Debug)]
struct AxisStencil {
    d1: Vec<Vec<(isize, f64)>>,
    d2: Vec<Vec<(isize, f64)>>,
}

fn build_axis(axis: &Axis, order: usize) -> AxisStencil {
    let h = axis.h();
    let half = (order / 2) as isize;
    let n = axis.len as isize;
    let make = |i: isize, deriv: usize| -> Vec<(isize, f64)> {
        let (start, size) = if axis.periodic || (i >= half && i + half < n) {
            (i - half, order + 1)
        } else {
            let size = order + deriv;
            let start = if i < half { 0 } else { n - size as isize };
            (start, size)
        };
        let offs: Vec<isize> = (0..size as isize).map(|k| start + k - i).collect();
        let xs: Vec<f64> = offs.iter().map(|&o| o as f64).collect();
        let w = fornberg(0.0, &xs);
        let scale = h.powi(deriv as i32);
        offs.iter()
            .zip(&w)
            .map(|(&o, wk)| (o, wk[deriv] / scale))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    };
    AxisStencil {
        d1: (0..n).map(|i| make(i, 1)).collect(),
        d2: (0..n).map(|i| make(i, 2)).collect(),
    }
}

/// Finite-difference operator bound to a grid.
#[derive(Clone, Debug)]
pub struct Diff {
    pub grid: Grid,
    pub order: usize,
    axes: Vec<AxisStencil>,
}

impl Diff {
    pub fn new(grid: &Grid, order: usize) -> Result<Self> {
        if !matches!(order, 2 | 4 | 6 | 8 | 10 | 12) {
            return Err(WkitError::StencilOrder(order));
        }
        for (k, a) in grid.axes.iter().enumerate() {
            let need = order + 2;
            if a.len < need.max(8) && !(a.periodic && a.len >= order + 1) {
                return Err(WkitError::GridTooSmall {
                    axis: k,
                    len: a.len,
                    need: need.max(8),
                });
            }
        }
        Ok(Diff {
            grid: grid.clone(),
            order,
            axes: grid.axes.iter().map(|a| build_axis(a, order)).collect(),
        })
    }

    fn stencil(&self, node: usize, axis: usize, deriv: usize) -> &[(isize, f64)] {
        let i = self.grid.index_along(node, axis);
        let st = &self.axes[axis];
        if deriv == 1 {
            &st.d1[i]
        } else {
            &st.d2[i]
        }
    }

    #[inline]
    fn neighbor(&self, node: usize, axis: usize, off: isize) -> usize {
        let a = &self.grid.axes[axis];
        let i = self.grid.index_along(node, axis) as isize;
        let j = if a.periodic {
            (i + off).rem_euclid(a.len as isize)
        } else {
            i + off
        };
        (node as isize + (j - i) * self.grid.stride(axis) as isize) as usize
    }

    /// ∂_axis f (deriv = 1) or ∂²_axis f (deriv = 2) at one node.
    pub fn at(&self, f: &[f64], node: usize, axis: usize, deriv: usize) -> f64 {
        self.stencil(node, axis, deriv)
            .iter()
            .map(|&(o, w)| w * f[self.neighbor(node, axis, o)])
            .sum()
    }

    /// ∂_a ∂_b f at one node; composes first-derivative stencils when a ≠ b.
    pub fn mixed_at(&self, f: &[f64], node: usize, a: usize, b: usize) -> f64 {
        if a == b {
            return self.at(f, node, a, 2);
        }
        let sa = self.stencil(node, a, 1);
        let sb = self.stencil(node, b, 1);
        let mut s = 0.0;
        for &(oa, wa) in sa {
            let na = self.neighbor(node, a, oa);
            for &(ob, wb) in sb {
                s += wa * wb * f[self.neighbor(na, b, ob)];
            }
        }
        s
    }

    /// Derivative of a whole field along one axis.
    pub fn field(&self, f: &[f64], axis: usize, deriv: usize) -> Vec<f64> {
        (0..f.len())
            .into_par_iter()
            .map(|node| self.at(f, node, axis, deriv))
            .collect()
    }

    /// Gradient (∂_1 f, …, ∂_n f) of a whole field.
    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim()).map(|k| self.field(f, k, 1)).collect()
    }

    /// Σ_k ∂_k F^k of a flux given by its components.
    pub fn divergence(&self, flux: &[Vec<f64>]) -> Vec<f64> {
        let len = self.grid.len();
        (0..len)
            .into_par_iter()
            .map(|node| {
                flux.iter()
                    .enumerate()
                    .map(|(k, fk)| self.at(fk, node, k, 1))
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_field_has_unit_slope() {
        let g = Grid::new(vec![Axis::new(16, 0.0, 1.0, false)]);
        let d = Diff::new(&g, 4).unwrap();
        let f: Vec<f64> = (0..16).map(|i| g.coords(i)[0]).collect();
        for v in d.field(&f, 0, 1) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_second_derivative() {
        let g = Grid::new(vec![Axis::new(16, 0.0, 1.0, false)]);
        let d = Diff::new(&g, 2).unwrap();
        let f: Vec<f64> = (0..16).map(|i| g.coords(i)[0].powi(2)).collect();
        for v in d.field(&f, 0, 2) {
            assert!((v - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_sine_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = Grid::new(vec![Axis::new(n, 0.0, std::f64::consts::TAU, true)]);
            let d = Diff::new(&g, 4).unwrap();
            let f: Vec<f64> = (0..n).map(|i| g.coords(i)[0].sin()).collect();
            d.field(&f, 0, 1)
                .iter()
                .enumerate()
                .map(|(i, v)| (v - g.coords(i)[0].cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn one_sided_stencils_keep_order() {
        for order in [2, 4, 6, 8] {
            let g = Grid::new(vec![Axis::new(24, 0.0, 1.0, false)]);
            let d = Diff::new(&g, order).unwrap();
            // exact on polynomials of degree order
            let f: Vec<f64> = (0..24).map(|i| g.coords(i)[0].powi(order as i32)).collect();
            let d1 = d.field(&f, 0, 1);
            let d2 = d.field(&f, 0, 2);
            for i in 0..24 {
                let x = g.coords(i)[0];
                let p = order as f64;
                assert!((d1[i] - p * x.powi(order as i32 - 1)).abs() < 1e-7);
                assert!((d2[i] - p * (p - 1.0) * x.powi(order as i32 - 2)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn mixed_derivative_of_product() {
        let g = Grid::cube(2, 12, -1.0, 1.0);
        let d = Diff::new(&g, 4).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.coords(i);
                x[0] * x[0] * x[1]
            })
            .collect();
        for node in 0..g.len() {
            let x = g.coords(node);
            assert!((d.mixed_at(&f, node, 0, 1) - 2.0 * x[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let g = Grid::new(vec![Axis::new(5, 0.0, 1.0, false)]);
        assert!(Diff::new(&g, 4).is_err());
        assert!(Diff::new(&Grid::cube(1, 16, 0.0, 1.0), 3).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let g = Grid::new(vec![
            Axis::new(11, 0.0, 2.0, false),
            Axis::new(8, 0.0, 1.0, true),
        ]);
        for rule in [Quadrature::Trapezoid, Quadrature::Simpson] {
            let s: f64 = g.quadrature_weights(rule).iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
        }
    }
}
