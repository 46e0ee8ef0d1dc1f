//! Conjugate gradient for the symmetric positive-definite systems of the
//! trust-region methods.

use crate::scalar::{axpy, dot, norm, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult<S: Real> {
    pub x: Vec<S>,
    pub residual_norm: S,
    pub iters: usize,
    pub converged: bool,
    /// Zero or negative curvature was encountered; `x` is the best iterate.
    pub breakdown: bool,
}

/// Solve `matvec(x) = rhs` to residual tolerance `tol` or `max_iters`.
pub fn conjugate_gradient<S: Real, F: Fn(&[S]) -> Vec<S>>(
    matvec: F,
    rhs: &[S],
    max_iters: usize,
    tol: S,
) -> CgResult<S> {
    let n = rhs.len();
    let mut x = vec![S::zero(); n];
    let mut r = rhs.to_vec();
    let mut p = rhs.to_vec();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol {
        return CgResult { x, residual_norm: rr.sqrt(), iters: 0, converged: true, breakdown: false };
    }
    for iter in 1..=max_iters {
        let ap = matvec(&p);
        let p_ap = dot(&p, &ap);
        if p_ap <= S::zero() || !p_ap.is_finite() {
            return CgResult {
                residual_norm: norm(&r),
                x,
                iters: iter - 1,
                converged: false,
                breakdown: true,
            };
        }
        let alpha = rr / p_ap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol {
            return CgResult {
                x,
                residual_norm: rr_new.sqrt(),
                iters: iter,
                converged: true,
                breakdown: false,
            };
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    CgResult { residual_norm: rr.sqrt(), x, iters: max_iters, converged: false, breakdown: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_in_one_iteration() {
        let rhs = vec![3.0f64, -1.0, 0.5];
        let res = conjugate_gradient(|v| v.to_vec(), &rhs, 10, 1e-10);
        assert!(res.converged);
        assert_eq!(res.iters, 1);
        for (x, b) in res.x.iter().zip(&rhs) {
            assert!((x - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_identity() {
        let res = conjugate_gradient(
            |v| v.iter().map(|x| 2.0 * x).collect(),
            &[2.0f64, 2.0],
            10,
            1e-10,
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-12 && (res.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_curvature_reports_breakdown() {
        let res = conjugate_gradient(
            |v| v.iter().map(|x| -x).collect::<Vec<f64>>(),
            &[1.0, 1.0],
            10,
            1e-10,
        );
        assert!(res.breakdown);
        assert!(!res.converged);
    }
}
