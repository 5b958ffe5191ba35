//! Chebyshev-Lobatto nodes, differentiation matrices and barycentric
//! interpolation.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Lobatto nodes `cos(j pi / n)` on `[-1, 1]`, ordered from `+1` down to `-1`.
pub fn lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|j| {
            // sin form keeps the nodes exactly antisymmetric
            (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin()
        })
        .collect()
}

/// Lobatto nodes mapped to `[0, 1]`, increasing, endpoints exactly 0 and 1.
pub fn lobatto_unit(n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = lobatto(n).into_iter().rev().map(|t| 0.5 * (1.0 + t)).collect();
    x[0] = 0.0;
    x[n] = 1.0;
    x
}

/// Barycentric weights for Lobatto nodes (any affine image).
pub fn lobatto_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Barycentric interpolation of `values` given at `nodes` with `weights`.
pub fn barycentric(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let t = wj / d;
        num += t * fj;
        den += t;
    }
    num / den
}

/// Chebyshev differentiation matrix on the Lobatto nodes of `[-1, 1]`.
///
/// Diagonal entries use the negative-row-sum identity.
pub fn diff_matrix(n: usize) -> DMatrix<f64> {
    let x = lobatto(n);
    let c: Vec<f64> = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                2.0 * s
            } else {
                s
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c[i] / c[j] / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Differentiation matrix on [`lobatto_unit`] nodes (increasing order on `[0, 1]`).
pub fn diff_matrix_unit(n: usize) -> DMatrix<f64> {
    let d = diff_matrix(n);
    // reverse ordering and rescale from [-1,1] to [0,1]
    DMatrix::from_fn(n + 1, n + 1, |i, j| 2.0 * d[(n - i, n - j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_symmetric_and_ordered() {
        let x = lobatto(7);
        assert_eq!(x[0], 1.0);
        assert_eq!(x[7], -1.0);
        for j in 0..=7 {
            assert_eq!(x[j], -x[7 - j]);
        }
        let u = lobatto_unit(16);
        assert!(u.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((u[0], u[16]), (0.0, 1.0));
    }

    #[test]
    fn differentiates_polynomials_exactly() {
        let n = 12;
        let x = lobatto(n);
        let d = diff_matrix(n);
        let f: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t * t).collect();
        for i in 0..=n {
            let df: f64 = (0..=n).map(|j| d[(i, j)] * f[j]).sum();
            let exact = 5.0 * x[i].powi(4) - 4.0 * x[i];
            assert!((df - exact).abs() < 1e-12, "{df} vs {exact}");
        }
    }

    #[test]
    fn unit_matrix_and_interpolation() {
        let n = 24;
        let r = lobatto_unit(n);
        let w = lobatto_weights(n);
        let d = diff_matrix_unit(n);
        let f: Vec<f64> = r.iter().map(|t| (1.3 * t).exp()).collect();
        for i in 0..=n {
            let df: f64 = (0..=n).map(|j| d[(i, j)] * f[j]).sum();
            assert!((df - 1.3 * (1.3 * r[i]).exp()).abs() < 1e-11);
        }
        for &t in &[0.013, 0.5, 0.77, 0.999] {
            assert!((barycentric(&r, &w, &f, t) - (1.3f64 * t).exp()).abs() < 1e-14);
        }
        assert_eq!(barycentric(&r, &w, &f, r[3]), f[3]);
    }
}
