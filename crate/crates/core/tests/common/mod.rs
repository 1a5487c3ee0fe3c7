//! Instance generators and independent oracles shared by the integration
//! and acceptance suites.
#![allow(dead_code)]

use copcomp::cones::simplex_min_oracle;
use copcomp::defeq::DefiningSystem;
use copcomp::zerostruct::{enumerate_zero_vertices, hull_distance};
use copcomp::{SymMat, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(r: &mut impl Rng, p: usize) -> SymMat {
    let m = DMatrix::from_fn(p, p, |_, _| r.gen_range(-1.0..1.0));
    SymMat::new(&m + m.transpose())
}

pub fn random_orthogonal(r: &mut impl Rng, p: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| r.gen_range(-1.0..1.0));
    g.qr().q()
}

/// `Q diag(d) Qᵀ`.
pub fn spectral(q: &DMatrix<f64>, d: &[f64]) -> SymMat {
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    SymMat::new(q * dm * q.transpose())
}

/// `aaᵀ + N` with `a` of mixed sign and `N ≥ 0` sparse with zero diagonal,
/// so zeros exist whenever some opposite-sign pair has `N_ij = 0`.
pub fn structured_copositive(r: &mut impl Rng, p: usize) -> SymMat {
    let a = DVector::from_fn(p, |i, _| {
        let mag = r.gen_range(0.3..1.3);
        if i == 0 || (i != 1 && r.gen_bool(0.5)) {
            mag
        } else {
            -mag
        }
    });
    let mut n = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i + 1..p {
            if r.gen_bool(0.5) {
                let v = r.gen_range(0.1..1.0);
                n[(i, j)] = v;
                n[(j, i)] = v;
            }
        }
    }
    SymMat::new(&a * a.transpose() + n)
}

/// Commuting PSD pair with complementary eigenspaces and `X + U ≻ 0`.
pub fn anticommuting_pair(r: &mut impl Rng, p: usize) -> (SymMat, SymMat) {
    let q = random_orthogonal(r, p);
    let split = r.gen_range(1..p);
    let dx: Vec<f64> = (0..p)
        .map(|i| {
            if i < split {
                r.gen_range(0.5..2.0)
            } else {
                0.0
            }
        })
        .collect();
    let du: Vec<f64> = (0..p)
        .map(|i| {
            if i >= split {
                r.gen_range(0.5..2.0)
            } else {
                0.0
            }
        })
        .collect();
    (spectral(&q, &dx), spectral(&q, &du))
}

/// `X, W ⪰ 0` with `WX = 0`, and symmetric `Y` with `XY + YX = 0`, all in
/// a common eigenbasis.
pub fn anticommutator_instance(r: &mut impl Rng, p: usize) -> (SymMat, SymMat, SymMat) {
    let q = random_orthogonal(r, p);
    let split = r.gen_range(1..p);
    let dx: Vec<f64> = (0..p)
        .map(|i| {
            if i < split {
                r.gen_range(0.5..2.0)
            } else {
                0.0
            }
        })
        .collect();
    let dw: Vec<f64> = (0..p)
        .map(|i| {
            if i >= split {
                r.gen_range(0.0..2.0)
            } else {
                0.0
            }
        })
        .collect();
    // Y lives on ker X, where X has eigenvalue 0
    let mut y = DMatrix::zeros(p, p);
    for i in split..p {
        for j in i..p {
            let v = r.gen_range(-1.0..1.0);
            y[(i, j)] = v;
            y[(j, i)] = v;
        }
    }
    let y = SymMat::new(&q * y * q.transpose());
    (spectral(&q, &dx), spectral(&q, &dw), y)
}

/// PSD matrix whose kernel is spanned by one strictly positive vector and,
/// optionally, a second vector of mixed sign.
pub fn psd_with_positive_kernel(r: &mut impl Rng, p: usize, kernel_dim: usize) -> SymMat {
    let mut k = vec![DVector::from_fn(p, |_, _| r.gen_range(0.5..1.5))];
    if kernel_dim > 1 {
        k.push(DVector::from_fn(p, |_, _| r.gen_range(-1.0..1.0)));
    }
    let kmat = DMatrix::from_columns(&k);
    let qr = kmat.qr();
    let kq = qr.q();
    let proj = DMatrix::identity(p, p) - &kq * kq.transpose();
    let g = DMatrix::from_fn(p, p, |_, _| r.gen_range(-1.0..1.0));
    let a = g.transpose() * g + DMatrix::identity(p, p);
    SymMat::new(&proj * a * &proj)
}

/// Independent zero-vertex oracle: every enumerated vertex is a near-zero
/// of `tᵀXt`, and when the grid/gradient minimum reaches zero its argmin
/// lies near the hull of the enumerated vertices.
pub fn zero_vertex_oracle_agrees(x: &SymMat, tol: &Tolerances) -> Result<(), String> {
    let vertices = enumerate_zero_vertices(x, tol).map_err(|e| e.to_string())?;
    for v in &vertices {
        let val = x.quad(v);
        if val > 10.0 * tol.zero_tol {
            return Err(format!("vertex {v:?} has value {val:e}"));
        }
    }
    let oracle = simplex_min_oracle(x, 30);
    if oracle.value < -10.0 * tol.zero_tol {
        return Err(format!("oracle found negative value {:e}", oracle.value));
    }
    if oracle.value <= 1e-10 {
        if vertices.is_empty() {
            return Err(format!(
                "oracle reached {:e} but no vertices were found",
                oracle.value
            ));
        }
        let d = hull_distance(&oracle.argmin, vertices.iter());
        if d > 1e-4 {
            return Err(format!(
                "oracle argmin {:?} is {d:e} from the hull",
                oracle.argmin
            ));
        }
    }
    Ok(())
}

/// Central finite-difference Jacobian of the defining residual.
pub fn finite_difference_jacobian(sys: &DefiningSystem, z: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = z.len();
    let mut j = DMatrix::zeros(sys.m, n);
    for k in 0..n {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[k] += h;
        zm[k] -= h;
        let d = (sys.residual(&zp).unwrap() - sys.residual(&zm).unwrap()) / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}

/// Max-entry relative error between the analytic and finite-difference
/// Jacobians at `z`.
pub fn jacobian_fd_error(sys: &DefiningSystem, z: &DVector<f64>) -> f64 {
    let analytic = sys.jacobian(z).unwrap();
    let fd = finite_difference_jacobian(sys, z, 1e-6);
    let scale = analytic.amax().max(1.0);
    (analytic - fd).amax() / scale
}

/// Perturbation of the 3×3 worked example that keeps both restricted 2×2
/// blocks singular: `x22, x12, x23, x13` move by at most `delta`, then
/// `x11 = x12²/x22` and `x33 = x23²/x22`.
pub fn block_compatible_perturbation(r: &mut impl Rng, x0: &SymMat, delta: f64) -> SymMat {
    let mut m = x0.matrix().clone();
    for (i, j) in [(1, 1), (0, 1), (1, 2), (0, 2)] {
        let d = r.gen_range(-delta..delta);
        m[(i, j)] += d;
        m[(j, i)] = m[(i, j)];
    }
    m[(0, 0)] = m[(0, 1)] * m[(0, 1)] / m[(1, 1)];
    m[(2, 2)] = m[(1, 2)] * m[(1, 2)] / m[(1, 1)];
    SymMat::new(m)
}
