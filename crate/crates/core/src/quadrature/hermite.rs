//! One-dimensional Gauss–Hermite rules for the standard normal density.

use nalgebra::{DMatrix, SymmetricEigen};

/// Orthonormal probabilists' Hermite values `p_0..p_m` at `x`.
fn orthonormal_hermite(m: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if m == 0 {
        return;
    }
    out.push(x);
    for k in 1..m {
        let next = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
        out.push(next);
    }
}

/// Nodes and weights of the `m`-point rule for `∫ g(y) φ(y) dy`, `φ` the
/// standard normal density.
///
/// Nodes come from the eigenvalues of the Jacobi matrix (off-diagonal `√k`),
/// polished by Newton steps on `p_m`; weights are Christoffel numbers
/// `1 / Σ_{k<m} p_k(x)²`. The result is exactly symmetric: `x[m-1-i] = -x[i]`
/// and `w[m-1-i] = w[i]`, with weights summing to 1.
pub fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    if m == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut p = Vec::with_capacity(m + 1);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            orthonormal_hermite(m, *x, &mut p);
            // p_m' = √m p_{m-1}
            let step = p[m] / ((m as f64).sqrt() * p[m - 1]);
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            orthonormal_hermite(m - 1, x, &mut p);
            1.0 / p.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();

    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    (nodes, weights)
}
