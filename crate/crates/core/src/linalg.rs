//! Dense numerical kernels shared by the analysis modules.
//!
//! Everything here is a thin layer over nalgebra's SVD and symmetric
//! eigen-decomposition that fixes orderings (descending singular values,
//! ascending eigenvalues) and exposes full right singular bases.

use nalgebra::{DMatrix, DVector};

/// Singular values in descending order together with the full `n×n`
/// orthogonal matrix of right singular vectors (columns, same order).
pub struct FullSvd {
    pub singular_values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

/// SVD of an `m×n` matrix whose right factor is always square.
///
/// Matrices with fewer rows than columns are padded with zero rows so the
/// trailing right singular vectors span the null space. The returned
/// `singular_values` has length `n`; padded directions carry zeros.
pub fn svd_full(a: &DMatrix<f64>) -> FullSvd {
    let (m, n) = a.shape();
    if n == 0 {
        return FullSvd {
            singular_values: Vec::new(),
            u: DMatrix::zeros(m, 0),
            v: DMatrix::zeros(0, 0),
        };
    }
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    if m > 0 {
        padded.view_mut((0, 0), (m, n)).copy_from(a);
    }
    let svd = padded.svd(true, true);
    let u_all = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let mut v = DMatrix::zeros(n, n);
    let mut u = DMatrix::zeros(m, n);
    let mut singular_values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        singular_values.push(sv[k]);
        v.set_column(col, &v_t.row(k).transpose());
        if m > 0 {
            u.set_column(col, &u_all.column(k).rows(0, m));
        }
    }
    FullSvd {
        singular_values,
        u,
        v,
    }
}

/// Numerical rank: number of singular values above `rel_tol · σ_max`.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    count_above(&sv, rel_tol)
}

pub(crate) fn count_above(sorted_desc: &[f64], rel_tol: f64) -> usize {
    match sorted_desc.first() {
        Some(&s0) if s0 > f64::MIN_POSITIVE => {
            sorted_desc.iter().filter(|&&s| s > rel_tol * s0).count()
        }
        _ => 0,
    }
}

/// Singular values in descending order (length `min(m, n)`).
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Orthonormal basis (as columns) of `{x : a x ≈ 0}`, keeping right singular
/// vectors whose singular value is at most `abs_tol`.
pub fn null_space(a: &DMatrix<f64>, abs_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let svd = svd_full(a);
    let keep: Vec<usize> = (0..n)
        .filter(|&k| svd.singular_values[k] <= abs_tol)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &svd.v.column(k));
    }
    out
}

/// Minimum-norm least-squares solution of `a x ≈ b`, truncating singular
/// values below `rel_tol · σ_max`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return DVector::zeros(n);
    }
    let svd = svd_full(a);
    let s0 = svd.singular_values[0];
    let mut x = DVector::zeros(n);
    if s0 <= f64::MIN_POSITIVE {
        return x;
    }
    for k in 0..n {
        let s = svd.singular_values[k];
        if s <= rel_tol * s0 {
            break;
        }
        let coef = svd.u.column(k).dot(b) / s;
        x.axpy(coef, &svd.v.column(k), 1.0);
    }
    x
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending and
/// eigenvectors as matching columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vecs = DMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[k]);
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Stacks vectors as the columns of a matrix.
pub fn columns(vectors: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, vectors.len());
    for (c, v) in vectors.iter().enumerate() {
        m.set_column(c, v);
    }
    m
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
