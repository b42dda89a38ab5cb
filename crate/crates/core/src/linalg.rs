//! Small dense helpers for per-node 2×2 to 5×5 algebra.

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    d
}

/// Vector N with N·v = det[t_1, …, t_n, v] for n tangent vectors in ℝ^{n+1}.
pub fn cofactor_normal(tangents: &[[f64; 5]], m: usize) -> [f64; 5] {
    let n = tangents.len();
    debug_assert_eq!(m, n + 1);
    let mut out = [0.0; 5];
    for (k, o) in out.iter_mut().enumerate().take(m) {
        // columns t_1..t_n, e_k; rows are ambient coordinates
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = tangents.iter().map(|t| t[r]).collect();
                row.push(if r == k { 1.0 } else { 0.0 });
                row
            })
            .collect();
        *o = det(rows);
    }
    out
}

/// Eigenvalues of a symmetric n×n matrix (n ≤ 4) by cyclic Jacobi sweeps,
/// sorted ascending.
pub fn sym_eigenvalues(a: &[[f64; 4]; 4], n: usize) -> Vec<f64> {
    let mut a = *a;
    for _ in 0..50 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a[i][j] * a[i][j];
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Product of two n×n matrices stored in 4×4 arrays.
pub fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4], n: usize) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn trace(a: &[[f64; 4]; 4], n: usize) -> f64 {
    (0..n).map(|i| a[i][i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_as_cofactor() {
        let n = cofactor_normal(&[[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]], 3);
        assert_eq!(&n[..3], &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 2.0;
        a[1][1] = 2.0;
        a[0][1] = 1.0;
        a[1][0] = 1.0;
        let ev = sym_eigenvalues(&a, 2);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn determinant_with_pivoting() {
        let d = det(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(d, -1.0);
    }
}
