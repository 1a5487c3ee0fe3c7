//! Nonnegative least squares, `min ‖A x − b‖₂ s.t. x ≥ 0`, by the
//! Lawson–Hanson active-set method.
//!
//! Ties when choosing the entering column are broken by lowest index so
//! repeated runs produce identical weights.

use nalgebra::{DMatrix, DVector};

use crate::linalg;

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `‖A x − b‖₂` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the problem with dual-feasibility threshold `tol`: the method
/// stops once every inactive column has gradient `aⱼᵀ(b − Ax) ≤ tol`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> NnlsSolution {
    let (m, n) = a.shape();
    assert_eq!(m, b.len(), "nnls: row count of A must match b");
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 30;
    let mut iterations = 0;

    let gradient = |x: &DVector<f64>| a.transpose() * (b - a * x);
    let mut w = gradient(&x);

    while iterations < max_outer {
        let entering = (0..n).filter(|&j| !passive[j] && w[j] > tol).fold(
            None::<usize>,
            |best, j| match best {
                Some(k) if w[k] >= w[j] => Some(k),
                _ => Some(j),
            },
        );
        let Some(j) = entering else { break };
        iterations += 1;
        passive[j] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let s = solve_passive(a, b, &passive);
            let blocked: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if blocked.is_empty() || inner > 3 * n + 30 {
                x = s.map(|v| v.max(0.0));
                break;
            }
            let alpha = blocked
                .iter()
                .map(|&i| {
                    let denom = x[i] - s[i];
                    if denom > 0.0 {
                        x[i] / denom
                    } else {
                        0.0
                    }
                })
                .fold(f64::INFINITY, f64::min)
                .clamp(0.0, 1.0);
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 * (1.0 + x.amax()) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
        w = gradient(&x);
    }

    let residual = (a * &x - b).norm();
    NnlsSolution {
        x,
        residual,
        iterations,
    }
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = a.select_columns(idx.iter());
    let z = linalg::lstsq(&sub, b, 1e-13);
    let mut s = DVector::zeros(passive.len());
    for (k, &i) in idx.iter().enumerate() {
        s[i] = z[k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_nonnegative_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 3.0, 5.0]);
        let s = nnls(&a, &b, 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 3.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn clamps_negative_direction() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let s = nnls(&a, &b, 1e-12);
        assert_eq!(s.x[1], 0.0);
        assert!((s.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_columns_pick_lowest_index() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        let s = nnls(&a, &b, 1e-12);
        assert!(s.residual < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.x[1], 0.0);
    }

    #[test]
    fn matches_brute_force_on_small_problems() {
        // enumerate all passive sets and keep the best feasible LS solution
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let a = DMatrix::from_fn(5, 3, |_, _| rng.gen_range(-1.0..1.0));
            let b = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
            let mut best = b.norm();
            for mask in 1u32..8 {
                let idx: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
                let sub = a.select_columns(idx.iter());
                let z = linalg::lstsq(&sub, &b, 1e-14);
                if z.iter().all(|&v| v >= 0.0) {
                    best = best.min((&sub * z - &b).norm());
                }
            }
            let s = nnls(&a, &b, 1e-12);
            assert!(s.x.iter().all(|&v| v >= 0.0));
            assert!(
                (s.residual - best).abs() < 1e-10,
                "{} vs {}",
                s.residual,
                best
            );
        }
    }
}
