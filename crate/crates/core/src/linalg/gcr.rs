use std::collections::VecDeque;

use super::{axpy, dot, norm2, LinearOperator, Preconditioner};
use crate::error::{FemError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct GcrOptions {
    /// Relative residual target `||b - A x|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of previous search directions kept for orthogonalization.
    pub truncation: usize,
}

impl Default for GcrOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 2000, truncation: 100 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual, recomputed from `b - A x`.
    pub residual: f64,
    pub converged: bool,
    /// Relative residual after each iteration (index 0 is the start).
    pub history: Vec<f64>,
}

/// Right-preconditioned, truncated Generalized Conjugate Residual method
/// starting from `x = 0`.
///
/// Each step minimizes the residual over the span of the retained search
/// directions, so recorded residual norms never increase. A vanishing
/// search direction is reported as [`FemError::Breakdown`]; running out of
/// iterations returns `converged = false`.
pub fn gcr_solve<T, A, M>(a: &A, b: &[T], m: &M, opts: &GcrOptions) -> Result<(Vec<T>, SolveReport)>
where
    T: Real,
    A: LinearOperator<T> + ?Sized,
    M: Preconditioner<T> + ?Sized,
{
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length must match operator");
    let mut x = vec![T::zero(); n];
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        let report = SolveReport { iterations: 0, residual: 0.0, converged: true, history: vec![0.0] };
        return Ok((x, report));
    }
    let tol = T::lit(opts.tol);
    let mut r = b.to_vec();
    let mut history = vec![1.0];
    // (p_j, A p_j) with ||A p_j|| = 1
    let mut dirs: VecDeque<(Vec<T>, Vec<T>)> = VecDeque::with_capacity(opts.truncation.max(1));
    let mut rel = T::one();
    let mut iterations = 0;

    while iterations < opts.max_iter && rel > tol {
        iterations += 1;
        let (mut p, mut q) = match dirs.len() >= opts.truncation.max(1) {
            true => dirs.pop_front().expect("nonempty"),
            false => (vec![T::zero(); n], vec![T::zero(); n]),
        };
        m.apply(&r, &mut p);
        a.apply(&p, &mut q);
        for (pj, qj) in &dirs {
            let beta = dot(&q, qj);
            axpy(-beta, qj, &mut q);
            axpy(-beta, pj, &mut p);
        }
        let qn = norm2(&q);
        if !qn.is_finite() || qn <= T::zero() {
            return Err(FemError::Breakdown { iteration: iterations });
        }
        let inv = T::one() / qn;
        q.iter_mut().for_each(|v| *v *= inv);
        p.iter_mut().for_each(|v| *v *= inv);
        let alpha = dot(&r, &q);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rel = norm2(&r) / bnorm;
        history.push(rel.as_f64());
        dirs.push_back((p, q));
    }

    let mut ax = vec![T::zero(); n];
    a.apply(&x, &mut ax);
    let true_res = b.iter().zip(&ax).map(|(&bi, &axi)| (bi - axi) * (bi - axi)).sum::<T>().sqrt() / bnorm;
    let report = SolveReport { iterations, residual: true_res.as_f64(), converged: rel <= tol, history };
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, IdentityPreconditioner, SymmetricGaussSeidel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense LU with partial pivoting.
    fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { n as f64 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::<f64>::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = gcr_solve(&a, &b, &IdentityPreconditioner, &GcrOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_dense_lu_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..3 {
            let dense = if trial == 0 {
                random_spd(50, &mut rng)
            } else {
                // nonsymmetric, diagonally dominant
                let mut d = random_spd(50, &mut rng);
                for i in 0..50 {
                    for j in 0..i {
                        d[i][j] += rng.gen_range(-0.5..0.5);
                    }
                }
                d
            };
            let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let oracle = lu_solve(dense.clone(), b.clone());
            let a = CsrMatrix::from_dense(&dense);
            let opts = GcrOptions { tol: 1e-13, ..Default::default() };
            let (x, rep) = gcr_solve(&a, &b, &SymmetricGaussSeidel::new(&a), &opts).unwrap();
            assert!(rep.converged);
            for (xi, oi) in x.iter().zip(&oracle) {
                assert!((xi - oi).abs() <= 1e-8 * oi.abs().max(1.0));
            }
            assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::<f64>::identity(3);
        let (x, rep) = gcr_solve(&a, &[0.0; 3], &IdentityPreconditioner, &GcrOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn singular_operator_breaks_down() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let err = gcr_solve(&a, &[0.0, 1.0], &IdentityPreconditioner, &GcrOptions::default());
        assert!(matches!(err, Err(FemError::Breakdown { iteration: 1 })));
    }

    #[test]
    fn reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = CsrMatrix::from_dense(&random_spd(30, &mut rng));
        let b = vec![1.0; 30];
        let opts = GcrOptions { tol: 1e-14, max_iter: 2, truncation: 100 };
        let (_, rep) = gcr_solve(&a, &b, &IdentityPreconditioner, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn truncated_directions_still_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CsrMatrix::from_dense(&random_spd(40, &mut rng));
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let opts = GcrOptions { tol: 1e-10, max_iter: 500, truncation: 3 };
        let (_, rep) = gcr_solve(&a, &b, &IdentityPreconditioner, &opts).unwrap();
        assert!(rep.converged);
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
