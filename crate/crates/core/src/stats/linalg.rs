//! Householder QR least squares on column-major matrices.

use alloc::vec;
use alloc::vec::Vec;

/// Relative threshold on `|R_kk| / ||x_k||` below which column `k` counts as dependent.
pub const RANK_TOL: f64 = 1e-9;

/// Least-squares solution with the unscaled covariance `(XᵀX)⁻¹`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    pub xtx_inv: Vec<Vec<f64>>,
}

/// Solve `min ||Xβ − y||` for `X` given as columns. On rank deficiency returns
/// the index of the first column that is (numerically) a combination of earlier ones.
pub fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, usize> {
    let p = cols.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut qty = y.to_vec();
    let mut rdiag = vec![0.0; p];
    for k in 0..p {
        let orig = libm::sqrt(cols[k].iter().map(|v| v * v).sum::<f64>());
        let norm = libm::sqrt(a[k][k..].iter().map(|v| v * v).sum::<f64>());
        if orig == 0.0 || norm <= RANK_TOL * orig {
            return Err(k);
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        a[k][k] -= alpha;
        let vnorm2: f64 = a[k][k..].iter().map(|v| v * v).sum();
        let (head, tail) = a.split_at_mut(k + 1);
        let v = &head[k][k..];
        for col in tail.iter_mut() {
            reflect(v, vnorm2, &mut col[k..]);
        }
        reflect(v, vnorm2, &mut qty[k..]);
        rdiag[k] = alpha;
    }
    let r = |i: usize, j: usize| if i == j { rdiag[i] } else { a[j][i] };
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = qty[i];
        for j in i + 1..p {
            s -= r(i, j) * beta[j];
        }
        beta[i] = s / rdiag[i];
    }
    // R⁻¹ by back substitution, column by column.
    let mut rinv = vec![vec![0.0; p]; p];
    for j in 0..p {
        rinv[j][j] = 1.0 / rdiag[j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in i + 1..=j {
                s += r(i, k) * rinv[k][j];
            }
            rinv[i][j] = -s / rdiag[i];
        }
    }
    let mut xtx_inv = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let s: f64 = (j..p).map(|k| rinv[i][k] * rinv[j][k]).sum();
            xtx_inv[i][j] = s;
            xtx_inv[j][i] = s;
        }
    }
    Ok(LeastSquares { beta, xtx_inv })
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

/// `X β` for column-major `X`.
pub fn mul(cols: &[Vec<f64>], beta: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (c, b) in cols.iter().zip(beta) {
        for (o, x) in out.iter_mut().zip(c) {
            *o += x * b;
        }
    }
    out
}

/// Quadratic form `lᵀ M l`.
pub fn quad(l: &[f64], m: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, li) in l.iter().enumerate() {
        if *li == 0.0 {
            continue;
        }
        for (j, lj) in l.iter().enumerate() {
            s += li * m[i][j] * lj;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution() {
        let x0 = vec![1.0; 4];
        let x1 = vec![0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x1.iter().map(|x| 2.0 - 0.5 * x).collect();
        let ls = least_squares(&[x0, x1], &y).unwrap();
        assert!((ls.beta[0] - 2.0).abs() < 1e-12);
        assert!((ls.beta[1] + 0.5).abs() < 1e-12);
        // (XᵀX)⁻¹ for [[4,6],[6,14]] is [[0.7,-0.3],[-0.3,0.2]].
        assert!((ls.xtx_inv[0][0] - 0.7).abs() < 1e-12);
        assert!((ls.xtx_inv[0][1] + 0.3).abs() < 1e-12);
        assert!((ls.xtx_inv[1][1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn detects_dependence() {
        let x0 = vec![1.0; 3];
        let x1 = vec![1.0, 2.0, 3.0];
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_eq!(least_squares(&[x0, x1, x2], &[1.0, 2.0, 3.0]).err(), Some(2));
        assert_eq!(least_squares(&[vec![0.0; 3]], &[1.0, 2.0, 3.0]).err(), Some(0));
    }
}
