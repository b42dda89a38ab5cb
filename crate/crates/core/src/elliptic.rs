//! Divergence-form elliptic solver on 2D grids, the metric Wente problem, the
//! Coulomb frame and the isothermal coordinates built from it.
//!
//! The operator ∂_i(a^{ij}∂_j ·) is discretized with bilinear elements and a
//! 2×2 Gauss rule per cell, which keeps the matrix symmetric so that the
//! systems can be solved by conjugate gradients.

use crate::chart::ChartGrid;
use crate::conservation2d::{gauss_legendre, integrate_one_form};
use crate::error::{Result, WkitError};
use crate::geometry::{check_weak_immersion, geometry, star_one_form_2d, DiagnosticsConfig};
use crate::grid::{Axis, Diff, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Relative residual at which conjugate gradients stop.
pub const CG_TOL: f64 = 1e-10;
/// Wente constant for the sup norm.
pub const WENTE_SUP: f64 = 18.0;
/// Wente constant for the Dirichlet energy, 3√2.
pub const WENTE_ENERGY: f64 = 4.242_640_687_119_285;
/// Curvature budget ∫|K| dvol under which the Coulomb frame bound holds.
pub const CLB_CURVATURE: f64 = 1.0 / 36.0;

/// Symmetric coefficient field (a¹¹, a¹², a²²) per node.
pub type Coefficients = Vec<[f64; 3]>;

/// Dirichlet problem ∂_i(a^{ij}∂_j u) = rhs with u = 0 on the grid boundary.
#[derive(Clone, Debug)]
pub struct EllipticProblem {
    pub grid: Grid,
    pub coeff: Coefficients,
    /// Density against dx¹∧dx².
    pub rhs: Vec<f64>,
    /// Polynomial degree of the tensor Lagrange elements.
    pub degree: usize,
}

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub converged: bool,
}

impl Solution {
    /// Turns a stalled solve into an error.
    pub fn require(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(WkitError::NonConvergence {
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// Highest element degree, at most `order / 2` and at most 4, whose macro
/// cells tile every axis exactly.
pub fn element_degree(grid: &Grid, order: usize) -> usize {
    let target = (order / 2).clamp(1, 4);
    (1..=target)
        .rev()
        .find(|p| grid.axes.iter().all(|a| (a.len - 1) % p == 0))
        .unwrap_or(1)
}

/// Tensor Lagrange element of degree p on equispaced nodes, tabulated at a
/// Gauss rule with p + 2 points per axis.
struct Element {
    p: usize,
    /// (ξ, weight) on [0, 1].
    gauss: Vec<(f64, f64)>,
    /// Basis values and ξ-derivatives, indexed [gauss point][basis].
    val: Vec<Vec<f64>>,
    der: Vec<Vec<f64>>,
}

impl Element {
    fn new(p: usize) -> Self {
        let gauss = gauss_legendre(p + 2);
        let z: Vec<f64> = (0..=p).map(|k| k as f64 / p as f64).collect();
        let lag = |a: usize, t: f64| -> (f64, f64) {
            let mut v = 1.0;
            let mut d = 0.0;
            for m in 0..=p {
                if m == a {
                    continue;
                }
                let s = 1.0 / (z[a] - z[m]);
                d = d * (t - z[m]) * s + v * s;
                v *= (t - z[m]) * s;
            }
            (v, d)
        };
        let val = gauss
            .iter()
            .map(|&(t, _)| (0..=p).map(|a| lag(a, t).0).collect())
            .collect();
        let der = gauss
            .iter()
            .map(|&(t, _)| (0..=p).map(|a| lag(a, t).1).collect())
            .collect();
        Element { p, gauss, val, der }
    }
}

/// One quadrature point of a macro cell: the cell's nodes, the basis values
/// and physical gradients there, and the quadrature weight.
struct QuadPoint<'a> {
    nodes: &'a [usize],
    val: Vec<f64>,
    grad: Vec<[f64; 2]>,
    w: f64,
}

impl QuadPoint<'_> {
    fn interp(&self, f: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.val)
            .map(|(&n, v)| v * f[n])
            .sum()
    }

    fn interp_coeff(&self, c: &[[f64; 3]]) -> [f64; 3] {
        let mut a = [0.0; 3];
        for (&n, v) in self.nodes.iter().zip(&self.val) {
            for k in 0..3 {
                a[k] += v * c[n][k];
            }
        }
        a
    }

    fn gradient(&self, f: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (&n, d) in self.nodes.iter().zip(&self.grad) {
            g[0] += d[0] * f[n];
            g[1] += d[1] * f[n];
        }
        g
    }
}

fn quad_form(a: &[f64; 3], u: &[f64; 2], v: &[f64; 2]) -> f64 {
    a[0] * u[0] * v[0] + a[1] * (u[0] * v[1] + u[1] * v[0]) + a[2] * u[1] * v[1]
}

/// Macro-cell decomposition of a planar grid for elements of one degree.
pub struct Mesh {
    grid: Grid,
    el: Element,
    cells: Vec<Vec<usize>>,
    size: [f64; 2],
}

impl Mesh {
    pub fn new(grid: &Grid, degree: usize) -> Result<Self> {
        check_planar(grid)?;
        let p = degree.max(1);
        if grid.axes.iter().any(|a| (a.len - 1) % p != 0) {
            return Err(WkitError::InvalidShape(format!(
                "degree {p} elements need (nodes − 1) divisible by {p} on every axis"
            )));
        }
        let (nx, ny) = (grid.axes[0].len, grid.axes[1].len);
        let mut cells = Vec::new();
        for ci in (0..nx - 1).step_by(p) {
            for cj in (0..ny - 1).step_by(p) {
                let mut nodes = Vec::with_capacity((p + 1) * (p + 1));
                for b in 0..=p {
                    for a in 0..=p {
                        nodes.push(grid.ravel(&[ci + a, cj + b]));
                    }
                }
                cells.push(nodes);
            }
        }
        let size = [p as f64 * grid.axes[0].h(), p as f64 * grid.axes[1].h()];
        Ok(Mesh {
            grid: grid.clone(),
            el: Element::new(p),
            cells,
            size,
        })
    }

    pub fn degree(&self) -> usize {
        self.el.p
    }

    /// Quadrature points of one macro cell.
    fn points<'a>(&'a self, nodes: &'a [usize]) -> impl Iterator<Item = QuadPoint<'a>> + 'a {
        let el = &self.el;
        let p = el.p;
        let ng = el.gauss.len();
        (0..ng * ng).map(move |q| {
            let (qx, qy) = (q % ng, q / ng);
            let mut val = Vec::with_capacity(nodes.len());
            let mut grad = Vec::with_capacity(nodes.len());
            for b in 0..=p {
                for a in 0..=p {
                    let (vx, vy) = (el.val[qx][a], el.val[qy][b]);
                    val.push(vx * vy);
                    grad.push([
                        el.der[qx][a] * vy / self.size[0],
                        vx * el.der[qy][b] / self.size[1],
                    ]);
                }
            }
            QuadPoint {
                nodes,
                val,
                grad,
                w: el.gauss[qx].1 * el.gauss[qy].1 * self.size[0] * self.size[1],
            }
        })
    }

    /// Σ over cells of a per-cell quantity, in parallel.
    fn sum_cells(&self, f: impl Fn(&QuadPoint) -> f64 + Sync) -> f64 {
        self.cells
            .par_iter()
            .map(|nodes| self.points(nodes).map(|q| f(&q)).sum::<f64>())
            .sum()
    }

    /// Assembles Σ_q w_q v(q)·∇N_a(q) into a node vector.
    fn load(&self, f: impl Fn(&QuadPoint) -> (f64, [f64; 2]) + Sync) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for nodes in &self.cells {
            for q in self.points(nodes) {
                let (s, v) = f(&q);
                for (k, &n) in nodes.iter().enumerate() {
                    out[n] += q.w * (s * q.val[k] + v[0] * q.grad[k][0] + v[1] * q.grad[k][1]);
                }
            }
        }
        out
    }
}

/// Element stiffness of ∫ a^{ij}∂_i u ∂_j v, stored as a dense stencil of
/// (2p+1)² neighbors per node.
pub struct Stiffness {
    mesh: Mesh,
    width: usize,
    stencil: Vec<f64>,
}

fn check_planar(grid: &Grid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    if grid.axes.iter().any(|a| a.periodic) {
        return Err(WkitError::NotSimplyConnected);
    }
    for (k, a) in grid.axes.iter().enumerate() {
        if a.len < 3 {
            return Err(WkitError::GridTooSmall {
                axis: k,
                len: a.len,
                need: 3,
            });
        }
    }
    Ok(())
}

impl Stiffness {
    /// Assembles the stiffness with the coefficients interpolated to the
    /// quadrature points by the element basis.
    pub fn new(grid: &Grid, coeff: &[[f64; 3]], degree: usize) -> Result<Self> {
        if coeff.len() != grid.len() {
            return Err(WkitError::DimensionMismatch {
                expected: grid.len(),
                got: coeff.len(),
            });
        }
        let mesh = Mesh::new(grid, degree)?;
        let p = mesh.degree();
        let width = 2 * p + 1;
        let mut stencil = vec![0.0; grid.len() * width * width];
        let idx: Vec<[usize; 4]> = (0..grid.len()).map(|n| grid.unravel(n)).collect();
        for nodes in &mesh.cells {
            for q in mesh.points(nodes) {
                let a = q.interp_coeff(coeff);
                for (r, &nr) in nodes.iter().enumerate() {
                    for (c, &nc) in nodes.iter().enumerate() {
                        let di = idx[nc][0] + p - idx[nr][0];
                        let dj = idx[nc][1] + p - idx[nr][1];
                        stencil[nr * width * width + dj * width + di] +=
                            q.w * quad_form(&a, &q.grad[r], &q.grad[c]);
                    }
                }
            }
        }
        Ok(Stiffness {
            mesh,
            width,
            stencil,
        })
    }

    pub fn len(&self) -> usize {
        self.mesh.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// y = K x over all nodes.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let grid = &self.mesh.grid;
        let w = self.width;
        let p = (w / 2) as isize;
        (0..self.len())
            .into_par_iter()
            .map(|node| {
                let row = &self.stencil[node * w * w..(node + 1) * w * w];
                let mut s = 0.0;
                for (slot, &k) in row.iter().enumerate() {
                    if k != 0.0 {
                        let di = (slot % w) as isize - p;
                        let dj = (slot / w) as isize - p;
                        let nb = grid.shift(node, 0, di).and_then(|a| grid.shift(a, 1, dj));
                        if let Some(nb) = nb {
                            s += k * x[nb];
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let w = self.width;
        let centre = (w / 2) * w + w / 2;
        (0..self.len())
            .map(|n| self.stencil[n * w * w + centre])
            .collect()
    }

    /// Discrete Dirichlet energy xᵀK x.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Consistent load ∫ f N_a of a node density interpolated by the elements.
    pub fn load(&self, f: &[f64]) -> Vec<f64> {
        self.mesh.load(|q| (q.interp(f), [0.0; 2]))
    }

    /// Nodes on the boundary of the parameter rectangle.
    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|n| !self.mesh.grid.is_interior(n, 1))
            .collect()
    }
}

/// Solves K x = b with Jacobi-preconditioned conjugate gradients, keeping the
/// `fixed` nodes at zero. Stops at relative residual `CG_TOL` or after 20·N
/// iterations, returning the best iterate either way.
pub fn pcg(k: &Stiffness, b: &[f64], fixed: &[bool]) -> Solution {
    let n = k.len();
    let free = |v: &mut Vec<f64>| {
        for (x, &f) in v.iter_mut().zip(fixed) {
            if f {
                *x = 0.0;
            }
        }
    };
    let mut rhs = b.to_vec();
    free(&mut rhs);
    let bnorm = norm2(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Solution {
            u: x,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let dinv: Vec<f64> = k
        .diagonal()
        .iter()
        .zip(fixed)
        .map(|(&d, &f)| if f || d <= 0.0 { 0.0 } else { 1.0 / d })
        .collect();
    let mut r = rhs;
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 20 * n;
    let mut best = (1.0, x.clone());
    let mut it = 0;
    while it < max_iter {
        let rel = norm2(&r) / bnorm;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= CG_TOL {
            return Solution {
                u: x,
                iterations: it,
                residual: rel,
                converged: true,
            };
        }
        let mut ap = k.apply(&p);
        free(&mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        z = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
        it += 1;
    }
    let rel = norm2(&r) / bnorm;
    if rel < best.0 {
        best = (rel, x);
    }
    Solution {
        u: best.1,
        iterations: it,
        residual: best.0,
        converged: best.0 <= CG_TOL,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Smallest eigenvalue over the largest, per node, of the coefficient matrix.
/// Errors when some node is not positive definite.
pub fn ellipticity(coeff: &[[f64; 3]]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for c in coeff {
        let tr = c[0] + c[2];
        let det = c[0] * c[2] - c[1] * c[1];
        if !(c[0] > 0.0 && det > 0.0) {
            return Err(WkitError::NonSpdMetric);
        }
        let disc = ((c[0] - c[2]).powi(2) + 4.0 * c[1] * c[1]).sqrt();
        worst = worst.min((tr - disc) / (tr + disc));
    }
    Ok(worst)
}

/// Solves ∂_i(a^{ij}∂_j u) = rhs with u = 0 on the boundary.
pub fn solve_divform(problem: &EllipticProblem) -> Result<Solution> {
    ellipticity(&problem.coeff)?;
    let k = Stiffness::new(&problem.grid, &problem.coeff, problem.degree)?;
    solve_dirichlet(&k, &problem.rhs)
}

fn solve_dirichlet(k: &Stiffness, rhs: &[f64]) -> Result<Solution> {
    if rhs.len() != k.len() {
        return Err(WkitError::DimensionMismatch {
            expected: k.len(),
            got: rhs.len(),
        });
    }
    // weak form: K u = −∫ rhs N
    let b: Vec<f64> = k.load(rhs).iter().map(|v| -v).collect();
    Ok(pcg(k, &b, &k.boundary_mask()))
}

/// Metric (g₁₁, g₁₂, g₂₂) of a surface chart at every node.
pub fn metric_field(chart: &ChartGrid, order: usize) -> Result<Vec<[f64; 3]>> {
    if chart.n() != 2 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: chart.n(),
        });
    }
    let diff = Diff::new(&chart.grid, order)?;
    let m = chart.m;
    Ok(chart
        .first_jets(&diff)
        .iter()
        .map(|t| {
            let d = |i: usize, j: usize| (0..m).map(|a| t[i][a] * t[j][a]).sum::<f64>();
            [d(0, 0), d(0, 1), d(1, 1)]
        })
        .collect())
}

/// Coefficients √det g · g^{ij} of the Laplace–Beltrami operator.
pub fn laplace_coefficients(metric: &[[f64; 3]]) -> Result<Coefficients> {
    metric
        .iter()
        .map(|g| {
            let det = g[0] * g[2] - g[1] * g[1];
            if !(g[0] > 0.0 && det > 0.0) {
                return Err(WkitError::NonSpdMetric);
            }
            let s = det.sqrt();
            Ok([g[2] / s, -g[1] / s, g[0] / s])
        })
        .collect()
}

/// The unit disk as the image of [-1,1]² under the elliptical squircle map
/// (u√(1−v²/2), v√(1−u²/2)), embedded in the plane z = 0.
pub fn disk_chart(res: usize) -> Result<ChartGrid> {
    ChartGrid::from_fn(Grid::cube(2, res, -1.0, 1.0), 3, |x| {
        let (u, v) = (x[0], x[1]);
        vec![
            u * (1.0 - v * v / 2.0).sqrt(),
            v * (1.0 - u * u / 2.0).sqrt(),
            0.0,
        ]
    })
}

/// Input of the metric Wente problem −Δ_g u = *_g(da∧db), u = 0 on ∂Ω.
#[derive(Clone, Debug)]
pub struct WenteProblem {
    pub grid: Grid,
    pub metric: Vec<[f64; 3]>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Norms of a Wente solution and the margins of both inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct WenteReport {
    pub u_sup: f64,
    pub du_l2: f64,
    pub da_l2: f64,
    pub db_l2: f64,
    /// ‖u‖_∞ / (‖da‖‖db‖), to compare with 18.
    pub sup_ratio: f64,
    /// ‖du‖ / (‖da‖‖db‖), to compare with 3√2.
    pub energy_ratio: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub pass: bool,
}

/// Wente solution together with its report.
#[derive(Clone, Debug)]
pub struct WenteSolution {
    pub u: Vec<f64>,
    pub report: WenteReport,
}

/// Two-sided bound Λ of a metric field: max(λ_max, 1/λ_min).
pub fn metric_lambda(metric: &[[f64; 3]]) -> f64 {
    metric
        .iter()
        .map(|g| {
            let tr = g[0] + g[2];
            let disc = ((g[0] - g[2]).powi(2) + 4.0 * g[1] * g[1]).sqrt();
            let (lo, hi) = ((tr - disc) / 2.0, (tr + disc) / 2.0);
            hi.max(1.0 / lo)
        })
        .fold(1.0, f64::max)
}

/// Solves the Wente problem. The right-hand side density is the coordinate
/// Jacobian ∂₁a∂₂b − ∂₂a∂₁b. Every L² norm is the discrete Dirichlet energy of
/// the same element discretization, so the two inequalities are compared on
/// equal footing. Elements have degree up to `order / 2`.
pub fn wente_solve(p: &WenteProblem, order: usize) -> Result<WenteSolution> {
    let coeff = laplace_coefficients(&p.metric)?;
    let diff = Diff::new(&p.grid, order)?;
    let da = diff.gradient(&p.a);
    let db = diff.gradient(&p.b);
    let jac: Vec<f64> = (0..p.grid.len())
        .map(|i| da[0][i] * db[1][i] - da[1][i] * db[0][i])
        .collect();
    ellipticity(&coeff)?;
    let k = Stiffness::new(&p.grid, &coeff, element_degree(&p.grid, order))?;
    let rhs: Vec<f64> = jac.iter().map(|j| -j).collect();
    let sol = solve_dirichlet(&k, &rhs)?.require()?;
    let u_sup = sol.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let du = k.energy(&sol.u).max(0.0).sqrt();
    let na = k.energy(&p.a).max(0.0).sqrt();
    let nb = k.energy(&p.b).max(0.0).sqrt();
    let prod = na * nb;
    let (sr, er) = if prod > 0.0 {
        (u_sup / prod, du / prod)
    } else {
        (0.0, 0.0)
    };
    let report = WenteReport {
        u_sup,
        du_l2: du,
        da_l2: na,
        db_l2: nb,
        sup_ratio: sr,
        energy_ratio: er,
        lambda: metric_lambda(&p.metric),
        iterations: sol.iterations,
        pass: u_sup <= WENTE_SUP * prod && du <= WENTE_ENERGY * prod,
    };
    Ok(WenteSolution { u: sol.u, report })
}

/// The flat disk with a = x, b = y, whose solution is (1 − r²)/4.
pub fn wente_disk_problem(res: usize) -> Result<WenteProblem> {
    let chart = disk_chart(res)?;
    Ok(WenteProblem {
        metric: metric_field(&chart, 4)?,
        a: chart.comps[0].clone(),
        b: chart.comps[1].clone(),
        grid: chart.grid,
    })
}

/// Random trigonometric sum of a few low modes with unit-scale coefficients.
fn random_trig(rng: &mut ChaCha8Rng, modes: usize) -> Vec<(f64, f64, f64, f64)> {
    (0..modes)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

fn eval_trig(t: &[(f64, f64, f64, f64)], x: f64, y: f64) -> f64 {
    t.iter()
        .map(|&(c, kx, ky, ph)| c * (kx * x + ky * y + ph).sin())
        .sum()
}

/// A random smooth metric on [-1,1]² with eigenvalues in [1/Λ, Λ], and random
/// trigonometric a, b.
pub fn random_wente_problem(rng: &mut ChaCha8Rng, res: usize, lambda: f64) -> WenteProblem {
    let grid = Grid::new(vec![Axis::new(res, -1.0, 1.0, false); 2]);
    let s1 = random_trig(rng, 3);
    let s2 = random_trig(rng, 3);
    let rot = random_trig(rng, 2);
    let ta = random_trig(rng, 3);
    let tb = random_trig(rng, 3);
    let bound = |t: &[(f64, f64, f64, f64)]| t.iter().map(|m| m.0.abs()).sum::<f64>().max(1e-12);
    let (b1, b2) = (bound(&s1), bound(&s2));
    let log_l = lambda.ln();
    let mut metric = Vec::with_capacity(grid.len());
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let c = grid.coords(node);
        let (x, y) = (c[0], c[1]);
        let l1 = (log_l * eval_trig(&s1, x, y) / b1).exp();
        let l2 = (log_l * eval_trig(&s2, x, y) / b2).exp();
        let th = eval_trig(&rot, x, y);
        let (cs, sn) = (th.cos(), th.sin());
        metric.push([
            l1 * cs * cs + l2 * sn * sn,
            (l1 - l2) * cs * sn,
            l1 * sn * sn + l2 * cs * cs,
        ]);
        a.push(eval_trig(&ta, x, y));
        b.push(eval_trig(&tb, x, y));
    }
    WenteProblem { grid, metric, a, b }
}

/// Solves `draws` random instances with Λ drawn uniformly in [1, 10]. Draw k
/// uses stream k of the seeded generator, so the suite is reproducible and
/// independent of scheduling.
pub fn wente_random_suite(draws: usize, seed: u64, res: usize) -> Result<Vec<WenteReport>> {
    (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let lambda = rng.gen_range(1.0..10.0);
            let p = random_wente_problem(&mut rng, res, lambda);
            Ok(wente_solve(&p, 4)?.report)
        })
        .collect()
}

/// Coulomb-frame energy bound and its inputs.
#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    /// ∫|⟨e₁, de₂⟩|²_g dvol.
    pub coulomb_energy: f64,
    /// Same energy for the unrotated Gram–Schmidt frame.
    pub gram_schmidt_energy: f64,
    /// ∫|de₁|²_g + |de₂|²_g dvol.
    pub frame_energy: f64,
    /// ∫|dn|²_g dvol.
    pub dn_energy: f64,
    /// (3/2)∫|dn|²_g dvol.
    pub bound: f64,
    pub total_abs_curvature: f64,
    /// ∫|K| dvol ≤ 1/36.
    pub small_curvature: bool,
    /// frame_energy ≤ bound; only asserted when the curvature is small.
    pub bound_holds: bool,
    /// Sup of ||e_i|−1| and |e₁·e₂|.
    pub orthonormality_defect: f64,
    pub lambda_defect: f64,
    pub lambda_scale: f64,
    pub lambda_sup: f64,
    /// Path-integration defect below 1e-6 of the field scale.
    pub valid: bool,
    pub iterations: usize,
}

/// The frames, the rotation angle and the conformal-factor potential.
#[derive(Clone, Debug)]
pub struct FrameState {
    pub grid: Grid,
    pub f1: Vec<[f64; 3]>,
    pub f2: Vec<[f64; 3]>,
    pub theta: Vec<f64>,
    pub e1: Vec<[f64; 3]>,
    pub e2: Vec<[f64; 3]>,
    pub lambda: Vec<f64>,
    /// Connection form ⟨f₁, df₂⟩ of the Gram–Schmidt frame.
    pub omega: [Vec<f64>; 2],
    pub basepoint: usize,
    /// Boundary collar excluded from the conformality defect.
    pub collar: usize,
    pub report: FrameReport,
    /// Degree of the elements used for θ.
    pub degree: usize,
    coeff: Coefficients,
}

fn orient(v: &[f64; 3], w: &[f64; 3]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

fn comp_field(f: &[[f64; 3]], a: usize) -> Vec<f64> {
    f.iter().map(|v| v[a]).collect()
}

impl FrameState {
    /// Discrete version of ∫|dθ + ω|²_g dvol, the functional θ minimizes.
    pub fn theta_energy(&self, theta: &[f64]) -> Result<f64> {
        let mesh = Mesh::new(&self.grid, self.degree)?;
        Ok(theta_energy(&mesh, &self.coeff, &self.omega, theta))
    }
}

/// Σ over quadrature points of (∇θ + ω)ᵀ A (∇θ + ω), with θ, ω and A
/// interpolated by the elements.
fn theta_energy(mesh: &Mesh, coeff: &[[f64; 3]], omega: &[Vec<f64>; 2], theta: &[f64]) -> f64 {
    mesh.sum_cells(|q| {
        let a = q.interp_coeff(coeff);
        let g = q.gradient(theta);
        let v = [g[0] + q.interp(&omega[0]), g[1] + q.interp(&omega[1])];
        q.w * quad_form(&a, &v, &v)
    })
}

/// Load c_a = Σ_q w_q ∇N_aᵀ A ω, so that the minimizer solves K θ = −c.
fn theta_load(mesh: &Mesh, coeff: &[[f64; 3]], omega: &[Vec<f64>; 2]) -> Vec<f64> {
    mesh.load(|q| {
        let a = q.interp_coeff(coeff);
        let om = [q.interp(&omega[0]), q.interp(&omega[1])];
        (
            0.0,
            [a[0] * om[0] + a[1] * om[1], a[1] * om[0] + a[2] * om[1]],
        )
    })
}

fn center_node(grid: &Grid) -> usize {
    grid.ravel(&[grid.axes[0].len / 2, grid.axes[1].len / 2])
}

/// Builds the Coulomb frame of a surface chart in ℝ³: Gram–Schmidt on
/// (∂₁Φ, ∂₂Φ), rotation by the minimizer θ of ∫|dθ + ⟨f₁, df₂⟩|²_g dvol
/// (natural boundary condition, θ = 0 at the center), then λ from
/// dλ = *_g⟨e₁, de₂⟩.
pub fn coulomb_frame(chart: &ChartGrid, cfg: &DiagnosticsConfig) -> Result<FrameState> {
    if chart.n() != 2 || chart.m != 3 {
        return Err(WkitError::DimensionMismatch {
            expected: 2,
            got: chart.n(),
        });
    }
    check_planar(&chart.grid)?;
    let wi = check_weak_immersion(chart, cfg.lambda, cfg)?;
    if !wi.pass {
        return Err(WkitError::DegenerateMetric {
            node: wi.violations[0],
            det: wi.min_eigenvalue,
        });
    }
    let geo = geometry(chart, cfg)?;
    let grid = chart.grid.clone();
    let len = grid.len();
    let diff = &geo.diff;

    let mut f1 = Vec::with_capacity(len);
    let mut f2 = Vec::with_capacity(len);
    for (node, p) in geo.points.iter().enumerate() {
        let t1 = [p.dphi[0][0], p.dphi[0][1], p.dphi[0][2]];
        let t2 = [p.dphi[1][0], p.dphi[1][1], p.dphi[1][2]];
        let l1 = orient(&t1, &t1).sqrt();
        if !(l1 > 1e-12) {
            return Err(WkitError::DegenerateFrame(node));
        }
        let a = t1.map(|x| x / l1);
        let proj = orient(&t2, &a);
        let r = [
            t2[0] - proj * a[0],
            t2[1] - proj * a[1],
            t2[2] - proj * a[2],
        ];
        let l2 = orient(&r, &r).sqrt();
        if !(l2 > 1e-12 * l1.max(1.0)) {
            return Err(WkitError::DegenerateFrame(node));
        }
        f1.push(a);
        f2.push(r.map(|x| x / l2));
    }

    let f2d: Vec<Vec<Vec<f64>>> = (0..3).map(|a| diff.gradient(&comp_field(&f2, a))).collect();
    let omega: [Vec<f64>; 2] = [0, 1].map(|k| {
        (0..len)
            .map(|i| (0..3).map(|a| f1[i][a] * f2d[a][k][i]).sum())
            .collect()
    });

    let metric: Vec<[f64; 3]> = geo
        .points
        .iter()
        .map(|p| [p.metric.g[0][0], p.metric.g[0][1], p.metric.g[1][1]])
        .collect();
    let coeff = laplace_coefficients(&metric)?;
    let degree = element_degree(&grid, cfg.stencil_order);
    let k = Stiffness::new(&grid, &coeff, degree)?;
    let base = center_node(&grid);
    let mut fixed = vec![false; len];
    fixed[base] = true;
    let load: Vec<f64> = theta_load(k.mesh(), &coeff, &omega)
        .iter()
        .map(|c| -c)
        .collect();
    let sol = pcg(&k, &load, &fixed).require()?;
    let theta = sol.u;

    let mut e1 = Vec::with_capacity(len);
    let mut e2 = Vec::with_capacity(len);
    let mut ortho: f64 = 0.0;
    for i in 0..len {
        let (c, s) = (theta[i].cos(), theta[i].sin());
        let a: [f64; 3] = std::array::from_fn(|q| c * f1[i][q] - s * f2[i][q]);
        let b: [f64; 3] = std::array::from_fn(|q| s * f1[i][q] + c * f2[i][q]);
        ortho = ortho
            .max((orient(&a, &a).sqrt() - 1.0).abs())
            .max((orient(&b, &b).sqrt() - 1.0).abs())
            .max(orient(&a, &b).abs());
        e1.push(a);
        e2.push(b);
    }

    // derivatives of the rotated frame
    let e1d: Vec<Vec<Vec<f64>>> = (0..3).map(|a| diff.gradient(&comp_field(&e1, a))).collect();
    let e2d: Vec<Vec<Vec<f64>>> = (0..3).map(|a| diff.gradient(&comp_field(&e2, a))).collect();
    let nd: Vec<Vec<Vec<f64>>> = (0..3).map(|a| diff.gradient(&geo.normal_comp(a))).collect();
    let weights = chart.integration_weights(cfg.quadrature);
    let mut conn = [vec![0.0; len], vec![0.0; len]];
    let (mut coulomb, mut gs, mut frame, mut dn, mut abs_k) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..len {
        let p = &geo.points[i];
        let dv = weights[i] * p.metric.sqrt_det;
        let c: [f64; 2] = std::array::from_fn(|k| (0..3).map(|a| e1[i][a] * e2d[a][k][i]).sum());
        conn[0][i] = c[0];
        conn[1][i] = c[1];
        coulomb += dv * p.pair(&c, &c);
        gs += dv * p.pair(&[omega[0][i], omega[1][i]], &[omega[0][i], omega[1][i]]);
        let sq = |d: &Vec<Vec<Vec<f64>>>| -> f64 {
            (0..3)
                .map(|a| {
                    let v = [d[a][0][i], d[a][1][i]];
                    p.pair(&v, &v)
                })
                .sum()
        };
        frame += dv * (sq(&e1d) + sq(&e2d));
        dn += dv * sq(&nd);
        abs_k += dv * p.k.abs();
    }

    let star: [Vec<f64>; 2] = {
        let pairs: Vec<(f64, f64)> = (0..len)
            .map(|i| star_one_form_2d(&geo.points[i].metric, conn[0][i], conn[1][i]))
            .collect();
        [
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        ]
    };
    let (lambda, defect) = integrate_one_form(&grid, &star, base, cfg.stencil_order)?;
    let extent: f64 = grid.axes.iter().map(|a| a.hi - a.lo).fold(0.0, f64::max);
    let w_sup = star
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = (w_sup * extent).max(f64::MIN_POSITIVE);
    let lambda_sup = lambda.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let small = abs_k <= CLB_CURVATURE;
    let bound = 1.5 * dn;
    let report = FrameReport {
        coulomb_energy: coulomb,
        gram_schmidt_energy: gs,
        frame_energy: frame,
        dn_energy: dn,
        bound,
        total_abs_curvature: abs_k,
        small_curvature: small,
        bound_holds: frame <= bound,
        orthonormality_defect: ortho,
        lambda_defect: defect,
        lambda_scale: scale,
        lambda_sup,
        valid: defect <= 1e-6 * scale || w_sup == 0.0,
        iterations: sol.iterations,
    };
    Ok(FrameState {
        grid,
        f1,
        f2,
        theta,
        e1,
        e2,
        lambda,
        omega,
        basepoint: base,
        collar: geo.collar,
        report,
        degree,
        coeff,
    })
}

/// Conformality of the constructed coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct ConformalityReport {
    /// sup |g'₁₂| / |g'| for the pullback g' of Φ∘φ⁻¹, away from the collar.
    pub off_diagonal: f64,
    /// sup |g'₁₁ − g'₂₂| / |g'|.
    pub anisotropy: f64,
    /// max of the two.
    pub defect: f64,
    pub min_det: f64,
    /// Λ⁻¹ e^{−2‖λ‖_∞}.
    pub det_lower_bound: f64,
    pub det_bound_holds: bool,
    /// Path-integration defects of φ¹ and φ².
    pub closedness: [f64; 2],
    /// Largest centered sub-square, in parameter half-width, on which φ is
    /// locally injective with a simple boundary image.
    pub injective_half_width: f64,
}

/// Isothermal coordinates φ and their report.
#[derive(Clone, Debug)]
pub struct IsothermalResult {
    pub phi: [Vec<f64>; 2],
    pub frame: FrameState,
    pub report: ConformalityReport,
}

/// Integrates dφ^i = e^{−λ}⟨e_i, dΦ⟩ from the Coulomb frame and measures how
/// far the pullback of Φ∘φ⁻¹ is from a multiple of the identity. The Jacobian
/// of φ is taken from the integrated coordinates, so the defect measures the
/// construction and not the frame algebra.
pub fn isothermal_coordinates(
    chart: &ChartGrid,
    cfg: &DiagnosticsConfig,
) -> Result<IsothermalResult> {
    let frame = coulomb_frame(chart, cfg)?;
    let grid = chart.grid.clone();
    let len = grid.len();
    let diff = Diff::new(&grid, cfg.stencil_order)?;
    let jets = chart.first_jets(&diff);
    let mut phi: [Vec<f64>; 2] = [vec![], vec![]];
    let mut closed = [0.0; 2];
    for (c, e) in [&frame.e1, &frame.e2].into_iter().enumerate() {
        let w: [Vec<f64>; 2] = [0, 1].map(|j| {
            (0..len)
                .map(|i| {
                    (-frame.lambda[i]).exp() * (0..3).map(|a| e[i][a] * jets[i][j][a]).sum::<f64>()
                })
                .collect()
        });
        let (p, d) = integrate_one_form(&grid, &w, frame.basepoint, cfg.stencil_order)?;
        phi[c] = p;
        closed[c] = d;
    }
    let dphi = [diff.gradient(&phi[0]), diff.gradient(&phi[1])];
    let metric = metric_field(chart, cfg.stencil_order)?;
    let mut dets = vec![0.0; len];
    let collar = frame.collar;
    let (mut off, mut aniso) = (0.0_f64, 0.0_f64);
    for i in 0..len {
        // J_{cj} = ∂_j φ^c
        let j = [
            [dphi[0][0][i], dphi[0][1][i]],
            [dphi[1][0][i], dphi[1][1][i]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        dets[i] = det;
        if det == 0.0 || !grid.is_interior(i, collar) {
            continue;
        }
        let inv = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let g = [[metric[i][0], metric[i][1]], [metric[i][1], metric[i][2]]];
        // g' = J^{-T} g J^{-1}
        let mut gp = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        gp[a][b] += inv[p][a] * g[p][q] * inv[q][b];
                    }
                }
            }
        }
        let size = (gp[0][0].powi(2) + 2.0 * gp[0][1].powi(2) + gp[1][1].powi(2)).sqrt();
        off = off.max(gp[0][1].abs() / size);
        aniso = aniso.max((gp[0][0] - gp[1][1]).abs() / size);
    }
    let min_det = dets.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_det > 0.0) {
        return Err(WkitError::Fold(min_det));
    }
    let lam = cfg.lambda.max(metric_lambda(&metric));
    let lower = (-2.0 * frame.report.lambda_sup).exp() / lam;
    let half = injective_half_width(&grid, &phi, &dets);
    Ok(IsothermalResult {
        report: ConformalityReport {
            off_diagonal: off,
            anisotropy: aniso,
            defect: off.max(aniso),
            min_det,
            det_lower_bound: lower,
            det_bound_holds: min_det >= lower * (1.0 - 1e-9),
            closedness: closed,
            injective_half_width: half,
        },
        phi,
        frame,
    })
}

/// Largest centered square of nodes whose cells all map with positive
/// orientation and whose boundary image is a simple closed polygon; together
/// these make φ injective there.
fn injective_half_width(grid: &Grid, phi: &[Vec<f64>; 2], dets: &[f64]) -> f64 {
    let (nx, ny) = (grid.axes[0].len, grid.axes[1].len);
    let (ci, cj) = (nx / 2, ny / 2);
    let kmax = ci.min(cj).min(nx - 1 - ci).min(ny - 1 - cj);
    let pt = |i: usize, j: usize| {
        let n = grid.ravel(&[i, j]);
        [phi[0][n], phi[1][n]]
    };
    for k in (1..=kmax).rev() {
        let (i0, i1, j0, j1) = (ci - k, ci + k, cj - k, cj + k);
        let mut ok = true;
        'cells: for i in i0..i1 {
            for j in j0..j1 {
                let n = grid.ravel(&[i, j]);
                if dets[n] <= 0.0 {
                    ok = false;
                    break 'cells;
                }
                let (a, b, c, d) = (pt(i, j), pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1));
                if tri_area(a, b, c) <= 0.0 || tri_area(a, c, d) <= 0.0 {
                    ok = false;
                    break 'cells;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut ring = Vec::new();
        for i in i0..i1 {
            ring.push(pt(i, j0));
        }
        for j in j0..j1 {
            ring.push(pt(i1, j));
        }
        for i in (i0 + 1..=i1).rev() {
            ring.push(pt(i, j1));
        }
        for j in (j0 + 1..=j1).rev() {
            ring.push(pt(i0, j));
        }
        if simple_polygon(&ring) {
            return k as f64 * grid.axes[0].h().min(grid.axes[1].h());
        }
    }
    0.0
}

fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let d1 = tri_area(p, q, r);
    let d2 = tri_area(p, q, s);
    let d3 = tri_area(r, s, p);
    let d4 = tri_area(r, s, q);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn simple_polygon(ring: &[[f64; 2]]) -> bool {
    let n = ring.len();
    (0..n).into_par_iter().all(|a| {
        let (p, q) = (ring[a], ring[(a + 1) % n]);
        (a + 2..n).all(|b| {
            if a == 0 && b == n - 1 {
                return true;
            }
            !segments_cross(p, q, ring[b], ring[(b + 1) % n])
        })
    })
}

/// Outcome of the Coulomb bound on a batch of random small-curvature graphs.
#[derive(Clone, Debug, Serialize)]
pub struct FrameSuiteEntry {
    pub amplitude: f64,
    pub total_abs_curvature: f64,
    pub frame_energy: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Random graph z = amplitude·Σ c sin(2π(k·x) + φ) over [0,1]², with the
/// amplitude halved until ∫|K| dvol ≤ 1/36. Wave vectors are redrawn until
/// they span the plane, since parallel ones give a developable graph (K ≡ 0).
pub fn random_graph_patch(
    rng: &mut ChaCha8Rng,
    res: usize,
    cfg: &DiagnosticsConfig,
) -> Result<(ChartGrid, f64)> {
    let modes: Vec<(f64, f64, f64, f64)> = loop {
        let modes: Vec<(f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let spans = modes
            .iter()
            .any(|a| modes.iter().any(|b| a.1 * b.2 - a.2 * b.1 != 0.0));
        if spans {
            break modes;
        }
    };
    let mut amp: f64 = rng.gen_range(0.01..0.08);
    loop {
        let chart = ChartGrid::from_fn(Grid::cube(2, res, 0.0, 1.0), 3, |x| {
            let z: f64 = modes
                .iter()
                .map(|&(c, kx, ky, ph)| {
                    c * (std::f64::consts::TAU * (kx * x[0] + ky * x[1]) + ph).sin()
                })
                .sum();
            vec![x[0], x[1], amp * z]
        })?;
        let geo = geometry(&chart, cfg)?;
        let w = chart.integration_weights(cfg.quadrature);
        let total: f64 = geo
            .points
            .iter()
            .zip(&w)
            .map(|(p, wi)| wi * p.metric.sqrt_det * p.k.abs())
            .sum();
        if total <= CLB_CURVATURE {
            return Ok((chart, amp));
        }
        amp /= 2.0;
    }
}

/// Coulomb bound on `draws` seeded random graph patches.
pub fn frame_random_suite(
    draws: usize,
    seed: u64,
    res: usize,
    cfg: &DiagnosticsConfig,
) -> Result<Vec<FrameSuiteEntry>> {
    (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let (chart, amp) = random_graph_patch(&mut rng, res, cfg)?;
            let st = coulomb_frame(&chart, cfg)?;
            let r = &st.report;
            Ok(FrameSuiteEntry {
                amplitude: amp,
                total_abs_curvature: r.total_abs_curvature,
                frame_energy: r.frame_energy,
                bound: r.bound,
                pass: r.small_curvature && r.bound_holds,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(res: usize) -> (Grid, Coefficients) {
        let g = Grid::cube(2, res, -1.0, 1.0);
        let c = vec![[1.0, 0.0, 1.0]; g.len()];
        (g, c)
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (grid, coeff) = flat(17);
        let rhs = vec![0.0; grid.len()];
        let s = solve_divform(&EllipticProblem {
            grid,
            coeff,
            rhs,
            degree: 1,
        })
        .unwrap();
        assert!(s.converged);
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let (grid, coeff) = flat(9);
        let k = Stiffness::new(&grid, &coeff, 2).unwrap();
        let y = k.apply(&vec![1.0; grid.len()]);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn indefinite_coefficients_are_rejected() {
        let (grid, mut coeff) = flat(9);
        coeff[3] = [1.0, 2.0, 1.0];
        let rhs = vec![1.0; grid.len()];
        assert!(matches!(
            solve_divform(&EllipticProblem {
                grid,
                coeff,
                rhs,
                degree: 1
            }),
            Err(WkitError::NonSpdMetric)
        ));
    }
}
