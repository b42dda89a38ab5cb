//! Graded exterior algebra over the ambient space ℝ^m and over the cotangent
//! space of the parameter domain, with the metric Hodge star, interior
//! products and the mixed products carried by the Noether currents.
//!
//! Basis elements are bitmasks: bit `i` set means the factor `e_{i+1}`
//! (resp. `dx^{i+1}`) is present, always in increasing order. Index tuples in
//! the public API are 0-based; a permuted tuple is re-keyed with the sign of
//! the sorting permutation and a repeated index gives zero.

use crate::error::{Result, WkitError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Basis blade encoded as a bitmask of factors.
pub type Mask = u8;

const AMB_MAX: usize = 5;
const BASE_MAX: usize = 4;

/// Grade (number of factors) of a blade.
#[inline]
pub fn grade(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// Increasing list of factor indices in a blade.
pub fn indices_of(mask: Mask) -> Vec<usize> {
    (0..8).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Canonical key of an index tuple together with the sign of the sorting
/// permutation; sign 0 when an index repeats.
pub fn mask_of(indices: &[usize]) -> (Mask, f64) {
    let mut mask: Mask = 0;
    let mut sign = 1.0;
    for &i in indices {
        let bit = 1u8 << i;
        if mask & bit != 0 {
            return (mask, 0.0);
        }
        // every already-present index above i is jumped over
        if grade(mask & !((bit << 1).wrapping_sub(1))) % 2 == 1 {
            sign = -sign;
        }
        mask |= bit;
    }
    (mask, sign)
}

/// Sign of `e_a ∧ e_b` relative to the canonical blade `e_{a|b}`, or 0.
#[inline]
pub fn wedge_sign(a: Mask, b: Mask) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        inversions += grade(a >> (j + 1));
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn wedge_raw(dim: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    let size = 1usize << dim;
    for ia in 0..size {
        let ca = a[ia];
        if ca == 0.0 {
            continue;
        }
        for ib in 0..size {
            let cb = b[ib];
            if cb == 0.0 || ia & ib != 0 {
                continue;
            }
            out[ia | ib] += wedge_sign(ia as Mask, ib as Mask) * ca * cb;
        }
    }
}

/// ι_x a for a vector x: removes one factor with sign (−1)^{position}.
fn contract_raw(dim: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    let size = 1usize << dim;
    for (ia, &ca) in a.iter().enumerate().take(size) {
        if ca == 0.0 {
            continue;
        }
        for k in 0..dim {
            let bit = 1usize << k;
            if ia & bit == 0 || x[k] == 0.0 {
                continue;
            }
            let pos = grade((ia & (bit - 1)) as Mask);
            let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out[ia ^ bit] += s * x[k] * ca;
        }
    }
}

/// a ⌐ b by successive contraction with the raised factors of each blade of b,
/// so that ⟨a ⌐ b, γ⟩ = ⟨a, b ∧ γ⟩.
fn interior_raw<const S: usize>(
    dim: usize,
    a: &[f64],
    b: &[f64],
    raise: impl Fn(usize) -> [f64; 5],
) -> [f64; S] {
    let size = 1usize << dim;
    let mut out = [0.0; S];
    for (ib, &cb) in b.iter().enumerate().take(size) {
        if cb == 0.0 {
            continue;
        }
        let mut cur = [0.0; S];
        cur[..size].copy_from_slice(&a[..size]);
        let mut bits = ib;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let x = raise(j);
            let mut next = [0.0; S];
            contract_raw(dim, &cur, &x, &mut next);
            cur = next;
        }
        for i in 0..size {
            out[i] += cb * cur[i];
        }
    }
    out
}

fn det_small(a: &[[f64; 4]; 4], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            // cofactor expansion along the first row
            let mut total = 0.0;
            for col in 0..k {
                let mut minor = [[0.0; 4]; 4];
                for r in 1..k {
                    let mut cc = 0;
                    for c in 0..k {
                        if c != col {
                            minor[r - 1][cc] = a[r][c];
                            cc += 1;
                        }
                    }
                }
                let s = if col % 2 == 0 { 1.0 } else { -1.0 };
                total += s * a[0][col] * det_small(&minor, k - 1);
            }
            total
        }
    }
}

/// Metric on the parameter cotangent space at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric {
    pub n: usize,
    pub g: [[f64; 4]; 4],
    pub ginv: [[f64; 4]; 4],
    pub sqrt_det: f64,
}

impl Metric {
    /// Builds the metric from a row-major n×n matrix, checking symmetry and
    /// positive definiteness.
    pub fn new(n: usize, rows: &[f64]) -> Result<Self> {
        if !(1..=BASE_MAX).contains(&n) || rows.len() != n * n {
            return Err(WkitError::DimensionMismatch {
                expected: n * n,
                got: rows.len(),
            });
        }
        let mut g = [[0.0; 4]; 4];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = rows[i * n + j];
            }
        }
        Self::from_matrix(n, g)
    }

    pub fn from_matrix(n: usize, g: [[f64; 4]; 4]) -> Result<Self> {
        let scale = (0..n).map(|i| g[i][i].abs()).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..i {
                if (g[i][j] - g[j][i]).abs() > 1e-12 * scale.max(1e-300) {
                    return Err(WkitError::NonSpdMetric);
                }
            }
        }
        // Cholesky doubles as the SPD test
        let mut l = [[0.0; 4]; 4];
        for i in 0..n {
            for j in 0..=i {
                let mut s = g[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(WkitError::NonSpdMetric);
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        let sqrt_det: f64 = (0..n).map(|i| l[i][i]).product();
        let ginv = invert_spd(n, &l);
        Ok(Metric {
            n,
            g,
            ginv,
            sqrt_det,
        })
    }

    pub fn euclidean(n: usize) -> Self {
        let mut g = [[0.0; 4]; 4];
        for (i, row) in g.iter_mut().enumerate().take(n) {
            row[i] = 1.0;
        }
        Metric {
            n,
            g,
            ginv: g,
            sqrt_det: 1.0,
        }
    }

    /// ⟨dx^I, dx^J⟩_g = det(g^{-1}[I, J]).
    pub fn pairing(&self, a: Mask, b: Mask) -> f64 {
        let k = grade(a);
        if k != grade(b) {
            return 0.0;
        }
        let ia = indices_of(a);
        let ib = indices_of(b);
        let mut sub = [[0.0; 4]; 4];
        for (r, &i) in ia.iter().enumerate() {
            for (c, &j) in ib.iter().enumerate() {
                sub[r][c] = self.ginv[i][j];
            }
        }
        det_small(&sub, k)
    }

    /// Column j of g^{-1}: the vector dual to dx^j.
    fn raise(&self, j: usize) -> [f64; 5] {
        let mut x = [0.0; 5];
        for (i, xi) in x.iter_mut().enumerate().take(self.n) {
            *xi = self.ginv[i][j];
        }
        x
    }
}

fn invert_spd(n: usize, l: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    // solve L L^T X = I column by column
    let mut inv = [[0.0; 4]; 4];
    for col in 0..n {
        let mut y = [0.0; 4];
        for i in 0..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        let mut x = [0.0; 4];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k][i] * x[k];
            }
            x[i] = s / l[i][i];
        }
        for i in 0..n {
            inv[i][col] = x[i];
        }
    }
    // symmetrize away rounding
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    inv
}

/// Element of ⋀ℝ^m, all grades at once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multivector {
    m: usize,
    c: [f64; 32],
}

/// Element of ⋀T*, all grades at once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormValue {
    n: usize,
    c: [f64; 16],
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(WkitError::DimensionMismatch { expected, got })
    }
}

macro_rules! graded_common {
    ($t:ident, $dim:ident, $max:expr) => {
        impl $t {
            pub fn zero($dim: usize) -> Self {
                assert!(
                    (1..=$max).contains(&$dim),
                    "dimension {} out of range",
                    $dim
                );
                $t {
                    $dim,
                    c: [0.0; 1 << $max],
                }
            }

            pub fn scalar($dim: usize, s: f64) -> Self {
                let mut v = Self::zero($dim);
                v.c[0] = s;
                v
            }

            /// Basis blade from a 0-based index tuple, re-keyed with its sign.
            pub fn basis($dim: usize, indices: &[usize]) -> Self {
                let mut v = Self::zero($dim);
                v.set(indices, 1.0);
                v
            }

            /// Grade-1 element from its components.
            pub fn vector(coords: &[f64]) -> Self {
                let mut v = Self::zero(coords.len());
                for (i, &x) in coords.iter().enumerate() {
                    v.c[1 << i] = x;
                }
                v
            }

            pub fn dim(&self) -> usize {
                self.$dim
            }

            /// Coefficient of a canonical blade.
            pub fn coeff(&self, mask: Mask) -> f64 {
                self.c[mask as usize]
            }

            pub fn set_coeff(&mut self, mask: Mask, value: f64) {
                self.c[mask as usize] = value;
            }

            pub fn coeffs(&self) -> &[f64] {
                &self.c[..1 << self.$dim]
            }

            /// Coefficient addressed by a possibly permuted index tuple.
            pub fn get(&self, indices: &[usize]) -> f64 {
                let (mask, s) = mask_of(indices);
                if s == 0.0 {
                    0.0
                } else {
                    s * self.c[mask as usize]
                }
            }

            /// Sets the coefficient of the blade named by `indices` so that the
            /// element reads `value · e_{indices}`; repeated indices are ignored.
            pub fn set(&mut self, indices: &[usize], value: f64) {
                let (mask, s) = mask_of(indices);
                if s != 0.0 {
                    self.c[mask as usize] = s * value;
                }
            }

            pub fn grade_part(&self, k: usize) -> Self {
                let mut out = Self::zero(self.$dim);
                for i in 0..1usize << self.$dim {
                    if grade(i as Mask) == k {
                        out.c[i] = self.c[i];
                    }
                }
                out
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut out = *self;
                for i in 0..1usize << self.$dim {
                    out.c[i] += other.c[i];
                }
                out
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.add(&other.scale(-1.0))
            }

            pub fn scale(&self, s: f64) -> Self {
                let mut out = *self;
                for x in out.c.iter_mut() {
                    *x *= s;
                }
                out
            }

            pub fn max_abs(&self) -> f64 {
                self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
            }

            pub fn wedge(&self, other: &Self) -> Result<Self> {
                check_dim(self.$dim, other.$dim)?;
                let mut out = Self::zero(self.$dim);
                wedge_raw(self.$dim, &self.c, &other.c, &mut out.c);
                Ok(out)
            }
        }
    };
}

graded_common!(Multivector, m, AMB_MAX);
graded_common!(FormValue, n, BASE_MAX);

impl Multivector {
    /// Euclidean interior product a ⌐ b; zero when grade(b) > grade(a).
    pub fn interior(&self, other: &Self) -> Result<Self> {
        check_dim(self.m, other.m)?;
        let c = interior_raw::<32>(self.m, &self.c, &other.c, |j| {
            let mut x = [0.0; 5];
            x[j] = 1.0;
            x
        });
        Ok(Multivector { m: self.m, c })
    }

    /// Euclidean pairing of all grades.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dim(self.m, other.m)?;
        Ok((0..1usize << self.m).map(|i| self.c[i] * other.c[i]).sum())
    }

    /// Cross product of two grade-1 elements of ℝ³.
    pub fn cross(&self, other: &Self) -> Result<Self> {
        check_dim(self.m, other.m)?;
        if self.m != 3 {
            return Err(WkitError::CrossUnavailable);
        }
        for v in [self, other] {
            if (0..8).any(|i| grade(i as Mask) != 1 && v.c[i] != 0.0) {
                return Err(WkitError::CrossUnavailable);
            }
        }
        let a = [self.c[1], self.c[2], self.c[4]];
        let b = [other.c[1], other.c[2], other.c[4]];
        Ok(Multivector::vector(&cross3(&a, &b)))
    }

    /// Grade-1 components.
    pub fn to_vector(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.c[1 << i]).collect()
    }
}

impl FormValue {
    /// Metric interior product a ⌐_g b; zero when grade(b) > grade(a).
    pub fn interior_g(&self, metric: &Metric, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        check_dim(self.n, metric.n)?;
        let c = interior_raw::<16>(self.n, &self.c, &other.c, |j| metric.raise(j));
        Ok(FormValue { n: self.n, c })
    }

    /// Hodge star *_g a = vol_g ⌐_g a.
    pub fn hodge_star(&self, metric: &Metric) -> Result<Self> {
        check_dim(self.n, metric.n)?;
        let mut vol = FormValue::zero(self.n);
        vol.c[(1 << self.n) - 1] = metric.sqrt_det;
        vol.interior_g(metric, self)
    }

    /// ⟨a, b⟩_g summed over all grades.
    pub fn inner(&self, metric: &Metric, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        check_dim(self.n, metric.n)?;
        let size = 1usize << self.n;
        let mut s = 0.0;
        for i in 0..size {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..size {
                if other.c[j] != 0.0 && grade(i as Mask) == grade(j as Mask) {
                    s += self.c[i] * other.c[j] * metric.pairing(i as Mask, j as Mask);
                }
            }
        }
        Ok(s)
    }

    /// Volume form √det g dx¹∧…∧dxⁿ.
    pub fn volume(metric: &Metric) -> Self {
        let mut v = FormValue::zero(metric.n);
        v.c[(1 << metric.n) - 1] = metric.sqrt_det;
        v
    }
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Operation applied to the ℝ^m factors of a mixed product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmbientOp {
    Dot,
    Cross,
    Wedge,
    Interior,
}

/// Operation applied to the form factors of a mixed product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseOp {
    Wedge,
    Interior,
}

/// Element of ⋀ℝ^m ⊗ ⋀T*, stored densely by (ambient blade, base blade).
#[derive(Clone, Debug, PartialEq)]
pub struct MixedValue {
    m: usize,
    n: usize,
    c: Vec<f64>,
}

impl MixedValue {
    pub fn zero(m: usize, n: usize) -> Self {
        assert!((1..=AMB_MAX).contains(&m) && (1..=BASE_MAX).contains(&n));
        MixedValue {
            m,
            n,
            c: vec![0.0; 1 << (m + n)],
        }
    }

    /// Tensor product u ⊗ α.
    pub fn tensor(u: &Multivector, alpha: &FormValue) -> Self {
        let mut out = Self::zero(u.dim(), alpha.dim());
        out.add_tensor(1.0, u, alpha);
        out
    }

    /// self += s · u ⊗ α.
    pub fn add_tensor(&mut self, s: f64, u: &Multivector, alpha: &FormValue) {
        assert_eq!((u.dim(), alpha.dim()), (self.m, self.n));
        for (p, &cu) in u.coeffs().iter().enumerate() {
            if cu == 0.0 {
                continue;
            }
            for (i, &ca) in alpha.coeffs().iter().enumerate() {
                if ca != 0.0 {
                    self.c[(p << self.n) | i] += s * cu * ca;
                }
            }
        }
    }

    /// Vector-valued 1-form Σ_k v_k dx^k from its columns v_k ∈ ℝ^m.
    pub fn vector_one_form(columns: &[Vec<f64>]) -> Self {
        let n = columns.len();
        let m = columns[0].len();
        let mut out = Self::zero(m, n);
        for (k, v) in columns.iter().enumerate() {
            for (a, &x) in v.iter().enumerate() {
                out.c[((1usize << a) << n) | (1 << k)] = x;
            }
        }
        out
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, amb: Mask, base: Mask) -> f64 {
        self.c[((amb as usize) << self.n) | base as usize]
    }

    pub fn set_coeff(&mut self, amb: Mask, base: Mask, value: f64) {
        self.c[((amb as usize) << self.n) | base as usize] = value;
    }

    /// Nonzero entries as (ambient blade, base blade, coefficient).
    pub fn entries(&self) -> impl Iterator<Item = (Mask, Mask, f64)> + '_ {
        let n = self.n;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(move |(k, &x)| ((k >> n) as Mask, (k & ((1 << n) - 1)) as Mask, x))
    }

    /// True when every nonzero entry has the given (ambient, base) grades.
    pub fn has_grades(&self, amb: usize, base: usize) -> bool {
        self.entries()
            .all(|(p, i, _)| grade(p) == amb && grade(i) == base)
    }

    /// The ambient factor multiplying one base blade.
    pub fn ambient_at(&self, base: Mask) -> Multivector {
        let mut u = Multivector::zero(self.m);
        for p in 0..1usize << self.m {
            u.set_coeff(p as Mask, self.coeff(p as Mask, base));
        }
        u
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.m, self.n), (other.m, other.n));
        let mut out = self.clone();
        for (x, y) in out.c.iter_mut().zip(&other.c) {
            *x += y;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for x in out.c.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Applies `amb` to the ℝ^m factors and `base` to the form factors,
    /// bilinearly: (u₁ dx_I) ∘ (u₂ dx_J) = (u₁ ∘ u₂)(dx_I ∘ dx_J).
    pub fn product(
        amb: AmbientOp,
        base: BaseOp,
        metric: &Metric,
        a: &MixedValue,
        b: &MixedValue,
    ) -> Result<MixedValue> {
        check_dim(a.m, b.m)?;
        check_dim(a.n, b.n)?;
        check_dim(a.n, metric.n)?;
        if amb == AmbientOp::Cross && a.m != 3 {
            return Err(WkitError::CrossUnavailable);
        }
        let mut out = MixedValue::zero(a.m, a.n);
        let eb: Vec<_> = b.entries().collect();
        for (p, i, ca) in a.entries() {
            let up = Multivector {
                m: a.m,
                c: unit::<32>(p),
            };
            let fi = FormValue {
                n: a.n,
                c: unit::<16>(i),
            };
            for &(q, j, cb) in &eb {
                let uq = Multivector {
                    m: a.m,
                    c: unit::<32>(q),
                };
                let u = match amb {
                    AmbientOp::Dot => Multivector::scalar(a.m, up.dot(&uq)?),
                    AmbientOp::Cross => up.cross(&uq)?,
                    AmbientOp::Wedge => up.wedge(&uq)?,
                    AmbientOp::Interior => up.interior(&uq)?,
                };
                if u.max_abs() == 0.0 {
                    continue;
                }
                let fj = FormValue {
                    n: a.n,
                    c: unit::<16>(j),
                };
                let f = match base {
                    BaseOp::Wedge => fi.wedge(&fj)?,
                    BaseOp::Interior => fi.interior_g(metric, &fj)?,
                };
                out.add_tensor(ca * cb, &u, &f);
            }
        }
        Ok(out)
    }
}

fn unit<const S: usize>(mask: Mask) -> [f64; S] {
    let mut c = [0.0; S];
    c[mask as usize] = 1.0;
    c
}

/// Worst defects of the metric identities of the interior product and Hodge
/// star, relative to the size of the inputs.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct IdentityDefects {
    /// *_g*_g a − (−1)^{k(n−k)} a.
    pub double_star: f64,
    /// *_g(α∧β) − (*_gα)⌐_gβ.
    pub star_wedge: f64,
    /// (α∧β)⌐_g v − (α⌐_g v)∧β − (−1)^p α∧(β⌐_g v).
    pub product_rule: f64,
    /// *_g(α⌐_gβ) − (−1)^q (*_gα)∧β in even dimension.
    pub star_interior: f64,
}

impl IdentityDefects {
    pub fn max(&self) -> f64 {
        self.double_star
            .max(self.star_wedge)
            .max(self.product_rule)
            .max(self.star_interior)
    }

    fn merge(self, o: Self) -> Self {
        IdentityDefects {
            double_star: self.double_star.max(o.double_star),
            star_wedge: self.star_wedge.max(o.star_wedge),
            product_rule: self.product_rule.max(o.product_rule),
            star_interior: self.star_interior.max(o.star_interior),
        }
    }
}

/// SPD metric A Aᵀ + ½I with A uniform in [-1, 1].
pub fn random_metric(rng: &mut impl Rng, n: usize) -> Metric {
    let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut g = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>();
        }
        g[i][i] += 0.5;
    }
    for i in 0..n {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    Metric::from_matrix(n, g).expect("A Aᵀ + ½I is SPD")
}

/// Homogeneous k-form with coefficients uniform in [-1, 1].
pub fn random_form(rng: &mut impl Rng, n: usize, k: usize) -> FormValue {
    let mut f = FormValue::zero(n);
    for mask in 0..(1usize << n) {
        if grade(mask as Mask) == k {
            f.c[mask] = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

/// Evaluates the four identities for α of grade p, β of grade q and a
/// 1-form v under one metric.
pub fn identity_check(
    metric: &Metric,
    alpha: &FormValue,
    p: usize,
    beta: &FormValue,
    q: usize,
    v: &FormValue,
) -> Result<IdentityDefects> {
    let n = metric.n;
    let star = |a: &FormValue| a.hodge_star(metric);
    let int = |a: &FormValue, b: &FormValue| a.interior_g(metric, b);
    let sign = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
    // inputs are O(1) but the metric inflates products by up to its condition
    let scale = 1.0
        + (0..n)
            .map(|i| metric.g[i][i] + metric.ginv[i][i])
            .fold(0.0, f64::max)
            .powi(n as i32);

    let dd = star(&star(alpha)?)?.sub(&alpha.scale(sign(p * (n - p))));
    let sw = star(&alpha.wedge(beta)?)?.sub(&int(&star(alpha)?, beta)?);
    let pr = int(&alpha.wedge(beta)?, v)?
        .sub(&int(alpha, v)?.wedge(beta)?)
        .sub(&alpha.wedge(&int(beta, v)?)?.scale(sign(p)));
    let si = if n % 2 == 0 {
        star(&int(alpha, beta)?)?.sub(&star(alpha)?.wedge(beta)?.scale(sign(q)))
    } else {
        star(&int(alpha, beta)?)?.sub(&star(alpha)?.wedge(beta)?)
    };
    Ok(IdentityDefects {
        double_star: dd.max_abs() / scale,
        star_wedge: sw.max_abs() / scale,
        product_rule: pr.max_abs() / scale,
        star_interior: si.max_abs() / scale,
    })
}

/// Worst identity defects over `draws` random metrics and forms, alternating
/// n = 2 and n = 4. Draw k uses stream k of a ChaCha generator seeded with
/// `seed`.
pub fn identity_random_suite(draws: usize, seed: u64) -> Result<IdentityDefects> {
    (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = if k % 2 == 0 { 2 } else { 4 };
            let metric = random_metric(&mut rng, n);
            let p = rng.gen_range(0..=n);
            let q = rng.gen_range(0..=n);
            let alpha = random_form(&mut rng, n, p);
            let beta = random_form(&mut rng, n, q);
            let v = random_form(&mut rng, n, 1);
            identity_check(&metric, &alpha, p, &beta, q, &v)
        })
        .try_reduce(IdentityDefects::default, |a, b| Ok(a.merge(b)))
}
