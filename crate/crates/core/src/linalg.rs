//! Dense LU with partial pivoting (faer) and a 1-norm condition estimate.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};

pub(crate) struct DenseLu {
    lu: PartialPivLu<f64>,
    n: usize,
}

impl DenseLu {
    pub(crate) fn new(mat: &Mat<f64>) -> Self {
        Self {
            lu: mat.partial_piv_lu(),
            n: mat.nrows(),
        }
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[i]).collect()
    }

    pub(crate) fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve_transpose(&b);
        (0..self.n).map(|i| x[i]).collect()
    }
}

pub(crate) fn norm1(mat: &Mat<f64>) -> f64 {
    (0..mat.ncols())
        .map(|j| (0..mat.nrows()).map(|i| mat[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager–Higham estimate of `‖A‖₁ ‖A⁻¹‖₁`.
pub(crate) fn condition_estimate(mat: &Mat<f64>, lu: &DenseLu) -> f64 {
    let n = mat.nrows();
    let one_norm = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut x = vec![1.0 / n as f64; n];
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = one_norm(&y);
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        let signs: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = lu.solve_transpose(&signs);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = 1.0;
    }
    // Higham's alternating-sign safeguard
    let denom = (n.max(2) - 1) as f64;
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / denom)
        })
        .collect();
    let alt_est = 2.0 * one_norm(&lu.solve(&alt)) / (3.0 * n as f64);
    norm1(mat) * estimate.max(alt_est)
}
