//! Discrete charts of an immersion and multi-chart atlases.

use crate::error::{Result, WkitError};
use crate::grid::{Diff, Grid, Quadrature};

/// Smallest admissible number of nodes per axis.
pub const MIN_NODES: usize = 8;

/// Values of Φ: U → ℝ^m at the nodes of a parameter grid.
///
/// A periodic axis may carry a lattice translation: stepping once around the
/// axis adds `period_shift[axis]` to Φ, which is how graphs over a flat torus
/// are represented. Derivatives are taken of the periodic part only.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    pub m: usize,
    pub grid: Grid,
    /// Component fields Φ^a, one node array per ambient coordinate.
    pub comps: Vec<Vec<f64>>,
    /// Partition-of-unity weight when the chart belongs to an atlas.
    pub weight: Option<Vec<f64>>,
    pub period_shift: Vec<Vec<f64>>,
}

impl ChartGrid {
    /// Builds a chart from node values stored node-major (m values per node).
    pub fn new(grid: Grid, m: usize, values: &[f64]) -> Result<Self> {
        let len = grid.len();
        if values.len() != len * m {
            return Err(WkitError::DimensionMismatch {
                expected: len * m,
                got: values.len(),
            });
        }
        for (k, a) in grid.axes.iter().enumerate() {
            if a.len < MIN_NODES {
                return Err(WkitError::GridTooSmall {
                    axis: k,
                    len: a.len,
                    need: MIN_NODES,
                });
            }
            if !(a.hi > a.lo) {
                return Err(WkitError::InvalidShape(format!(
                    "empty parameter interval on axis {k}"
                )));
            }
        }
        let comps = (0..m)
            .map(|c| (0..len).map(|i| values[i * m + c]).collect())
            .collect();
        let n = grid.dim();
        Ok(ChartGrid {
            m,
            grid,
            comps,
            weight: None,
            period_shift: vec![vec![0.0; m]; n],
        })
    }

    /// Samples Φ at every node.
    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let n = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * m);
        for node in 0..grid.len() {
            let x = grid.coords(node);
            let p = f(&x[..n]);
            debug_assert_eq!(p.len(), m);
            values.extend_from_slice(&p);
        }
        ChartGrid::new(grid, m, &values)
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, node: usize) -> [f64; 5] {
        let mut p = [0.0; 5];
        for (a, pa) in p.iter_mut().enumerate().take(self.m) {
            *pa = self.comps[a][node];
        }
        p
    }

    /// Node-major value array, the on-disk layout.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.m);
        for node in 0..self.len() {
            for a in 0..self.m {
                out.push(self.comps[a][node]);
            }
        }
        out
    }

    pub fn with_weight(mut self, w: Vec<f64>) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn with_period_shift(mut self, axis: usize, shift: Vec<f64>) -> Self {
        self.period_shift[axis] = shift;
        self
    }

    pub fn has_period_shift(&self) -> bool {
        self.period_shift.iter().flatten().any(|&s| s != 0.0)
    }

    pub fn is_periodic(&self) -> bool {
        self.grid.axes.iter().any(|a| a.periodic)
    }

    /// Slope of the lattice-linear part of Φ^a along an axis.
    pub fn slope(&self, a: usize, axis: usize) -> f64 {
        let ax = &self.grid.axes[axis];
        if ax.periodic {
            self.period_shift[axis][a] / ax.period()
        } else {
            0.0
        }
    }

    /// Φ^a minus its lattice-linear part: a genuinely periodic field.
    pub fn periodic_part(&self, a: usize) -> Vec<f64> {
        if !self.has_period_shift() {
            return self.comps[a].clone();
        }
        let n = self.n();
        (0..self.len())
            .map(|node| {
                let x = self.grid.coords(node);
                let lin: f64 = (0..n)
                    .map(|k| self.slope(a, k) * (x[k] - self.grid.axes[k].lo))
                    .sum();
                self.comps[a][node] - lin
            })
            .collect()
    }

    /// Rebuilds a chart from periodic parts, restoring the linear part.
    pub fn from_periodic_parts(&self, parts: Vec<Vec<f64>>) -> ChartGrid {
        let n = self.n();
        let mut out = self.clone();
        for (a, part) in parts.into_iter().enumerate() {
            out.comps[a] = part
                .iter()
                .enumerate()
                .map(|(node, v)| {
                    let x = self.grid.coords(node);
                    v + (0..n)
                        .map(|k| self.slope(a, k) * (x[k] - self.grid.axes[k].lo))
                        .sum::<f64>()
                })
                .collect();
        }
        out
    }

    /// First and second derivative jets of Φ at every node:
    /// `d1[node][i][a] = ∂_iΦ^a`, `d2[node][i][j][a] = ∂_i∂_jΦ^a`.
    pub fn jets(&self, diff: &Diff) -> (Vec<[[f64; 5]; 4]>, Vec<[[[f64; 5]; 4]; 4]>) {
        use rayon::prelude::*;
        let n = self.n();
        let parts: Vec<Vec<f64>> = (0..self.m).map(|a| self.periodic_part(a)).collect();
        (0..self.len())
            .into_par_iter()
            .map(|node| {
                let mut d1 = [[0.0; 5]; 4];
                let mut d2 = [[[0.0; 5]; 4]; 4];
                for a in 0..self.m {
                    for i in 0..n {
                        d1[i][a] = diff.at(&parts[a], node, i, 1) + self.slope(a, i);
                        for j in 0..=i {
                            let v = diff.mixed_at(&parts[a], node, i, j);
                            d2[i][j][a] = v;
                            d2[j][i][a] = v;
                        }
                    }
                }
                (d1, d2)
            })
            .unzip()
    }

    /// First derivatives only.
    pub fn first_jets(&self, diff: &Diff) -> Vec<[[f64; 5]; 4]> {
        use rayon::prelude::*;
        let n = self.n();
        let parts: Vec<Vec<f64>> = (0..self.m).map(|a| self.periodic_part(a)).collect();
        (0..self.len())
            .into_par_iter()
            .map(|node| {
                let mut d1 = [[0.0; 5]; 4];
                for a in 0..self.m {
                    for i in 0..n {
                        d1[i][a] = diff.at(&parts[a], node, i, 1) + self.slope(a, i);
                    }
                }
                d1
            })
            .collect()
    }

    /// Quadrature weights including the partition of unity.
    pub fn integration_weights(&self, rule: Quadrature) -> Vec<f64> {
        let mut w = self.grid.quadrature_weights(rule);
        if let Some(pu) = &self.weight {
            for (wi, p) in w.iter_mut().zip(pu) {
                *wi *= p;
            }
        }
        w
    }

    /// Applies a pointwise ambient map to every node.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> ChartGrid {
        let mut out = self.clone();
        for node in 0..self.len() {
            let p = self.point(node);
            let q = f(&p[..self.m]);
            for a in 0..self.m {
                out.comps[a][node] = q[a];
            }
        }
        out
    }
}

/// A collection of charts, closed when they cover a closed manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Atlas {
    pub m: usize,
    pub n: usize,
    pub charts: Vec<ChartGrid>,
    pub closed: bool,
}

impl Atlas {
    pub fn single(chart: ChartGrid, closed: bool) -> Self {
        Atlas {
            m: chart.m,
            n: chart.n(),
            charts: vec![chart],
            closed,
        }
    }

    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64> + Copy) -> Atlas {
        Atlas {
            charts: self.charts.iter().map(|c| c.map_points(f)).collect(),
            ..self.clone()
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.charts.iter().map(ChartGrid::len).sum()
    }
}
