//! Chebyshev collocation on `[0, 1]` and the Gauss transfer operator.

use std::f64::consts::PI;

/// Chebyshev–Lobatto nodes on `[0, 1]` with barycentric weights.
#[derive(Clone, Debug)]
pub(crate) struct ChebGrid {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebGrid {
    pub fn new(n: usize) -> ChebGrid {
        let nodes = (0..n).map(|j| 0.5 * (1.0 - (PI * j as f64 / (n - 1) as f64).cos())).collect();
        let weights = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 { 0.5 * s } else { s }
            })
            .collect();
        ChebGrid { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Lagrange basis values `L_j(x)`.
    pub fn basis(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        if let Some(j) = self.nodes.iter().position(|&t| t == x) {
            out[j] = 1.0;
            return out;
        }
        let mut total = 0.0;
        for j in 0..n {
            out[j] = self.weights[j] / (x - self.nodes[j]);
            total += out[j];
        }
        for v in out.iter_mut() {
            *v /= total;
        }
        out
    }

    /// Row of the differentiation matrix at node `i`.
    pub fn derivative_row(&self, i: usize) -> Vec<f64> {
        let n = self.len();
        let mut row = vec![0.0; n];
        for j in 0..n {
            if j != i {
                row[j] = self.weights[j] / self.weights[i] / (self.nodes[i] - self.nodes[j]);
            }
        }
        row[i] = -row.iter().sum::<f64>();
        row
    }

    /// Chebyshev coefficients of the interpolant in `t = 2x - 1`.
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        let m = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in values.iter().enumerate() {
                    // node j sits at t = -cos(πj/m) = cos(π(m-j)/m)
                    let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                    s += w * v * (PI * k as f64 * (n - 1 - j) as f64 / m).cos();
                }
                let c = 2.0 * s / m;
                if k == 0 || k == n - 1 { 0.5 * c } else { c }
            })
            .collect()
    }
}

/// Coefficients of an antiderivative in `x` of the series with Chebyshev coefficients `c` in `t = 2x - 1`.
pub(crate) fn antiderivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut a = vec![0.0; n + 1];
    let get = |k: usize| if k < n { c[k] } else { 0.0 };
    for k in 1..=n {
        let prev = if k == 1 { 2.0 * get(0) } else { get(k - 1) };
        a[k] = (prev - get(k + 1)) / (2.0 * k as f64);
    }
    // dx = dt / 2
    a.iter().map(|v| 0.5 * v).collect()
}

pub(crate) fn clenshaw(c: &[f64], x: f64) -> f64 {
    let t = 2.0 * x - 1.0;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

/// Collocation matrix of `(Pf)(y) = Σ_k f(1/(k+y)) / (k+y)^2` at the grid nodes.
pub(crate) fn gauss_transfer_matrix(grid: &ChebGrid, terms: usize) -> Vec<Vec<f64>> {
    let n = grid.len();
    let d0 = grid.derivative_row(0);
    let rows: Vec<Vec<f64>> = (0..n).map(|i| grid.derivative_row(i)).collect();
    let dd0: Vec<f64> = (0..n).map(|j| (0..n).map(|k| d0[k] * rows[k][j]).sum()).collect();
    (0..n)
        .map(|i| {
            let y = grid.nodes[i];
            let mut row = vec![0.0; n];
            for k in 1..=terms {
                let s = k as f64 + y;
                let w = 1.0 / (s * s);
                for (r, l) in row.iter_mut().zip(grid.basis(1.0 / s)) {
                    *r += w * l;
                }
            }
            // f(u) ≈ f(0) + f'(0) u + f''(0) u²/2 beyond the enumerated terms
            let h = terms as f64 + y + 0.5;
            let s2 = 1.0 / h - 1.0 / (12.0 * h * h * h);
            let s3 = 1.0 / (2.0 * h * h);
            let s4 = 1.0 / (3.0 * h * h * h);
            row[0] += s2;
            for ((r, d), dd) in row.iter_mut().zip(&d0).zip(&dd0) {
                *r += s3 * d + 0.5 * s4 * dd;
            }
            row
        })
        .collect()
}

pub(crate) fn apply(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_integrals() {
        let g = ChebGrid::new(32);
        let vals: Vec<f64> = g.nodes.iter().map(|x| (3.0 * x).exp()).collect();
        let x: f64 = 0.37;
        let v: f64 = g.basis(x).iter().zip(&vals).map(|(l, f)| l * f).sum();
        assert!((v - (3.0 * x).exp()).abs() < 1e-13);
        let c = g.coefficients(&vals);
        assert!((clenshaw(&c, x) - (3.0 * x).exp()).abs() < 1e-13);
        let a = antiderivative(&c);
        let int = clenshaw(&a, 0.75) - clenshaw(&a, 0.25);
        let truth = ((2.25f64).exp() - (0.75f64).exp()) / 3.0;
        assert!((int - truth).abs() < 1e-13);
        let d = g.derivative_row(0);
        let dv: f64 = d.iter().zip(&vals).map(|(a, b)| a * b).sum();
        assert!((dv - 3.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_density_is_fixed() {
        let g = ChebGrid::new(40);
        let m = gauss_transfer_matrix(&g, 2000);
        let rho: Vec<f64> = g.nodes.iter().map(|x| 1.0 / (1.0 + x)).collect();
        let out = apply(&m, &rho);
        for (a, b) in out.iter().zip(&rho) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }
}
