//! Gram systems of kernel translates and the dual (biorthogonal) family.

use nalgebra::{DMatrix, DVector};

use super::kernel::RKernel;
use super::PwError;

/// Minimal-norm `PW_J` functions `φ_λ = Σ_μ b^{(λ)}_μ K_J(· - μ)` with
/// `φ_λ(λ') = δ_{λλ'}` on a finite node set.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    kernel: RKernel,
    nodes: Vec<f64>,
    gram: DMatrix<f64>,
    /// `G^{-1}`; column `λ` holds `b^{(λ)}`.
    inv: DMatrix<f64>,
    cond: f64,
}

/// Spectral condition number of a symmetric matrix; infinite when not
/// numerically positive definite.
pub fn condition_estimate(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return 1.0;
    }
    let ev = g.clone().symmetric_eigenvalues();
    let max = ev.max();
    let min = ev.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn gram_matrix(kernel: &RKernel, nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.value(nodes[i] - nodes[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

impl BiorthogonalSystem {
    pub fn new(kernel: RKernel, nodes: Vec<f64>, cond_cap: f64) -> Result<Self, PwError> {
        let gram = gram_matrix(&kernel, &nodes);
        let cond = condition_estimate(&gram);
        if !(cond <= cond_cap) {
            return Err(PwError::IllConditioned { cond, cap: cond_cap });
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or(PwError::IllConditioned { cond: f64::INFINITY, cap: cond_cap })?;
        let inv = chol.inverse();
        Ok(Self { kernel, nodes, gram, inv, cond })
    }

    /// Rebuilds a system from a stored inverse without refactoring.
    pub fn from_inverse(kernel: RKernel, nodes: Vec<f64>, inv: DMatrix<f64>, cond: f64) -> Self {
        let gram = gram_matrix(&kernel, &nodes);
        Self { kernel, nodes, gram, inv, cond }
    }

    pub fn kernel(&self) -> &RKernel {
        &self.kernel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inv
    }

    pub fn condition(&self) -> f64 {
        self.cond
    }

    /// Coefficients `b^{(λ)}` of the dual function at node index `i`.
    pub fn coefficients(&self, i: usize) -> Vec<f64> {
        self.inv.column(i).iter().copied().collect()
    }

    /// `φ_{λ_i}(x)`.
    pub fn dual_value(&self, i: usize, x: f64) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .map(|(m, mu)| self.inv[(m, i)] * self.kernel.value(x - mu))
            .sum()
    }

    /// Kernel coefficients of the minimal-norm `PW_J` function taking the
    /// given values at the nodes.
    pub fn solve(&self, values: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(values);
        (&self.inv * v).iter().copied().collect()
    }

    /// `max |φ_λ(λ') - δ_{λλ'}|` over all node pairs.
    pub fn biorthogonality_defect(&self) -> f64 {
        let p = &self.gram * &self.inv;
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).abs());
            }
        }
        worst
    }
}
