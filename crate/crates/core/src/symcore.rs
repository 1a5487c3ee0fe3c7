//! Symmetric-matrix primitives: the [`SymMat`] carrier, the isometric
//! vectorization `svec`/`smat`, the symmetric Kronecker product and the
//! spectral/rank utilities every other module builds on.
//!
//! `svec` orders the lower triangle column by column and scales the
//! off-diagonal entries by √2:
//!
//! ```text
//! svec(F) = (F11, √2 F21, …, √2 Fp1, F22, √2 F32, …, Fpp)
//! ```
//!
//! so that `svec(A) · svec(B) = trace(AB)`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Inputs whose asymmetry exceeds this are rejected instead of symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric `p×p` matrix.
///
/// Construction symmetrizes, so `entries[i][j] == entries[j][i]` holds
/// exactly afterwards.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatJson", into = "SymMatJson")]
pub struct SymMat(DMatrix<f64>);

#[derive(Serialize, Deserialize)]
struct SymMatJson {
    p: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<SymMatJson> for SymMat {
    type Error = Error;

    fn try_from(raw: SymMatJson) -> Result<Self> {
        if raw.rows.len() != raw.p {
            return Err(Error::InvalidInput(format!(
                "`p` = {} but {} rows given",
                raw.p,
                raw.rows.len()
            )));
        }
        SymMat::from_rows(&raw.rows)
    }
}

impl From<SymMat> for SymMatJson {
    fn from(m: SymMat) -> Self {
        SymMatJson {
            p: m.p(),
            rows: m.to_rows(),
        }
    }
}

impl SymMat {
    /// Symmetrizes `m` as `(m + mᵀ)/2`. Panics on non-square or empty input.
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "SymMat requires a square matrix");
        assert!(m.nrows() >= 1, "SymMat requires p >= 1");
        let p = m.nrows();
        let mut out = m;
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMat(out)
    }

    /// Parses row-major data, rejecting inputs that are not square, contain
    /// non-finite values, or are asymmetric beyond [`SYMMETRY_TOL`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidInput("matrix must have p >= 1".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::InvalidInput(format!(
                "row {} has length {}, expected {}",
                i + 1,
                r.len(),
                p
            )));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        let m = DMatrix::from_fn(p, p, |i, j| rows[i][j]);
        let asymmetry = (&m - m.transpose()).amax();
        if asymmetry > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(SymMat::new(m))
    }

    pub fn zeros(p: usize) -> Self {
        SymMat(DMatrix::zeros(p, p))
    }

    pub fn identity(p: usize) -> Self {
        SymMat(DMatrix::identity(p, p))
    }

    pub fn from_fn(p: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        SymMat::new(DMatrix::from_fn(p, p, f))
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMat(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Rank-one matrix `v vᵀ`.
    pub fn outer(v: &DVector<f64>) -> Self {
        SymMat::new(v * v.transpose())
    }

    pub fn p(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.p())
            .map(|i| (0..self.p()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    /// Trace inner product `A • B = trace(AB)`.
    pub fn dot(&self, other: &SymMat) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Quadratic form `tᵀ X t`.
    pub fn quad(&self, t: &DVector<f64>) -> f64 {
        t.dot(&(&self.0 * t))
    }

    pub fn mul_vec(&self, t: &DVector<f64>) -> DVector<f64> {
        &self.0 * t
    }

    /// Anticommutator `XU + UX`.
    pub fn anticommutator(&self, other: &SymMat) -> SymMat {
        SymMat::new(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Principal submatrix on the given (ascending) indices.
    pub fn principal(&self, idx: &[usize]) -> SymMat {
        let k = idx.len();
        SymMat(DMatrix::from_fn(k, k, |a, b| self.0[(idx[a], idx[b])]))
    }

    pub fn scale(&self, c: f64) -> SymMat {
        SymMat(&self.0 * c)
    }

    pub fn is_entrywise_nonnegative(&self, tol: f64) -> bool {
        self.0.iter().all(|&x| x >= -tol)
    }
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMat{:?}", self.to_rows())
    }
}

impl Add for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMat {
    type Output = SymMat;
    fn mul(self, c: f64) -> SymMat {
        self.scale(c)
    }
}

/// `svec` image of a symmetric matrix of order `p`; length `p(p+1)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SVec {
    p: usize,
    data: DVector<f64>,
}

impl SVec {
    pub fn new(p: usize, data: DVector<f64>) -> Result<Self> {
        let n = svec_len(p);
        if data.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: data.len(),
            });
        }
        Ok(SVec { p, data })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn into_data(self) -> DVector<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dot(&self, other: &SVec) -> f64 {
        self.data.dot(&other.data)
    }
}

/// `p(p+1)/2`.
pub fn svec_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Position of entry `(i, j)` (either order) inside `svec` of order `p`.
pub fn svec_index(p: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    // columns 0..c contribute p, p-1, ..., p-c+1 entries
    c * p - c * c.saturating_sub(1) / 2 + (r - c)
}

/// The `(row, col)` pairs of `svec` coordinates, in order (row ≥ col).
pub fn svec_pairs(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(svec_len(p));
    for c in 0..p {
        for r in c..p {
            out.push((r, c));
        }
    }
    out
}

pub fn svec(f: &SymMat) -> SVec {
    let p = f.p();
    let data = DVector::from_iterator(
        svec_len(p),
        svec_pairs(p).into_iter().map(|(r, c)| {
            if r == c {
                f.get(r, c)
            } else {
                SQRT_2 * f.get(r, c)
            }
        }),
    );
    SVec { p, data }
}

pub fn smat(v: &SVec) -> SymMat {
    smat_slice(v.data.as_slice(), v.p).expect("SVec length is validated on construction")
}

/// Inverse of [`svec`] on a raw slice.
pub fn smat_slice(v: &[f64], p: usize) -> Result<SymMat> {
    if v.len() != svec_len(p) {
        return Err(Error::LengthMismatch {
            expected: svec_len(p),
            found: v.len(),
        });
    }
    let mut m = DMatrix::zeros(p, p);
    for (k, (r, c)) in svec_pairs(p).into_iter().enumerate() {
        if r == c {
            m[(r, c)] = v[k];
        } else {
            let x = v[k] / SQRT_2;
            m[(r, c)] = x;
            m[(c, r)] = x;
        }
    }
    Ok(SymMat(m))
}

/// Symmetric Kronecker product as a dense `p_* × p_*` matrix, defined by
/// `(M ⊗ₛ N) svec(U) = ½ svec(N U Mᵀ + M U Nᵀ)`.
///
/// With `N = E` this gives `(X ⊗ₛ E) svec(U) = ½ svec(XU + UX)`.
pub fn sym_kron(m: &SymMat, n: &SymMat) -> Result<DMatrix<f64>> {
    if m.p() != n.p() {
        return Err(Error::OrderMismatch {
            expected: m.p(),
            found: n.p(),
        });
    }
    let p = m.p();
    let dim = svec_len(p);
    let mm = m.matrix();
    let nn = n.matrix();
    let mut out = DMatrix::zeros(dim, dim);
    let mut unit = vec![0.0; dim];
    for k in 0..dim {
        unit[k] = 1.0;
        let e = smat_slice(&unit, p)?.into_matrix();
        unit[k] = 0.0;
        let img = (nn * &e * mm.transpose() + mm * &e * nn.transpose()) * 0.5;
        out.set_column(k, svec(&SymMat::new(img)).data());
    }
    Ok(out)
}

/// Positive-semidefiniteness classification by the smallest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PsdClass {
    NotPsd,
    PsdBoundary,
    PsdInterior,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdStatus {
    pub class: PsdClass,
    pub lambda_min: f64,
}

impl PsdStatus {
    pub fn is_psd(&self) -> bool {
        self.class != PsdClass::NotPsd
    }
}

/// Numerical thresholds carried by every verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entry / residual zero threshold.
    pub zero_tol: f64,
    /// Relative singular-value cutoff.
    pub rank_tol: f64,
    /// Eigenvalue threshold.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_tol: 1e-9,
            rank_tol: 1e-9,
            psd_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(zero_tol: f64, rank_tol: f64, psd_tol: f64) -> Result<Self> {
        let t = Tolerances {
            zero_tol,
            rank_tol,
            psd_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("zero_tol", self.zero_tol),
            ("rank_tol", self.rank_tol),
            ("psd_tol", self.psd_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

pub fn lambda_min(f: &SymMat) -> f64 {
    linalg::sym_eigen(f.matrix()).0[0]
}

pub fn psd_status(f: &SymMat, tol: &Tolerances) -> PsdStatus {
    let lambda_min = lambda_min(f);
    let class = if lambda_min < -tol.psd_tol {
        PsdClass::NotPsd
    } else if lambda_min > tol.psd_tol {
        PsdClass::PsdInterior
    } else {
        PsdClass::PsdBoundary
    };
    PsdStatus { class, lambda_min }
}

/// Rank of a family of symmetric matrices, measured on their stacked
/// `svec` images. An empty family has rank 0.
pub fn rank_of_set(mats: &[SymMat], tol: &Tolerances) -> Result<usize> {
    let Some(first) = mats.first() else {
        return Ok(0);
    };
    let p = first.p();
    if let Some(bad) = mats.iter().find(|m| m.p() != p) {
        return Err(Error::OrderMismatch {
            expected: p,
            found: bad.p(),
        });
    }
    let cols: Vec<DVector<f64>> = mats.iter().map(|m| svec(m).into_data()).collect();
    Ok(linalg::rank(
        &linalg::columns(&cols, svec_len(p)),
        tol.rank_tol,
    ))
}

/// Orthonormal basis of the numerical kernel: eigenvectors with
/// `|λ| ≤ psd_tol`.
pub fn kernel_basis(f: &SymMat, tol: &Tolerances) -> Vec<DVector<f64>> {
    let (vals, vecs) = linalg::sym_eigen(f.matrix());
    vals.iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= tol.psd_tol)
        .map(|(k, _)| vecs.column(k).into_owned())
        .collect()
}
