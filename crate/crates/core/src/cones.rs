//! Membership tests for the copositive cone, a restricted completely positive
//! test, and a brute-force simplex-minimization oracle used to cross-check
//! the exact path.
//!
//! Copositivity is decided by minimizing `tᵀXt` over the standard simplex.
//! A global minimizer of minimal support `I` satisfies the KKT system
//!
//! ```text
//! X_I t_I = λ·1,   1ᵀ t_I = 1
//! ```
//!
//! with a nonsingular bordered matrix (otherwise the objective is constant
//! along a kernel direction and the support could be shrunk). Enumerating
//! all `2^p − 1` supports and keeping the feasible solutions therefore finds
//! the exact minimum.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::IndexSet;
use crate::linalg;
use crate::nnls::nnls;
use crate::symcore::{psd_status, svec, svec_len, PsdStatus, SymMat, Tolerances};

/// Largest order accepted by [`is_copositive`].
pub const EXACT_COPOSITIVITY_LIMIT: usize = 12;

/// Largest order for which doubly nonnegative implies completely positive.
pub const DNN_EQUALS_CP_LIMIT: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopVerdict {
    pub member: bool,
    /// Exact minimum of `tᵀXt` over the simplex.
    pub minimum: f64,
    pub zero_tol: f64,
    pub certificate: CopCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopCertificate {
    /// Simplex vector with `tᵀXt < −zero_tol`.
    Witness { t: Vec<f64>, value: f64 },
    /// Every support was examined; the feasible KKT points are listed.
    Proof {
        supports_examined: usize,
        candidates: Vec<FaceCandidate>,
        argmin: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceCandidate {
    pub support: IndexSet,
    pub value: f64,
}

impl CopVerdict {
    pub fn witness(&self) -> Option<&[f64]> {
        match &self.certificate {
            CopCertificate::Witness { t, .. } => Some(t),
            CopCertificate::Proof { .. } => None,
        }
    }
}

/// Exact copositivity decision by KKT support enumeration.
pub fn is_copositive(x: &SymMat, tol: &Tolerances) -> Result<CopVerdict> {
    let p = x.p();
    if p > EXACT_COPOSITIVITY_LIMIT {
        return Err(Error::OrderTooLarge {
            p,
            limit: EXACT_COPOSITIVITY_LIMIT,
        });
    }
    // a negative diagonal entry is its own witness
    if let Some(k) = (0..p).find(|&k| x.get(k, k) < -tol.zero_tol) {
        let mut t = vec![0.0; p];
        t[k] = 1.0;
        return Ok(CopVerdict {
            member: false,
            minimum: x.get(k, k),
            zero_tol: tol.zero_tol,
            certificate: CopCertificate::Witness {
                t,
                value: x.get(k, k),
            },
        });
    }

    let masks: Vec<u32> = (1u32..(1u32 << p)).collect();
    let found: Vec<Option<(DVector<f64>, f64)>> = masks
        .par_iter()
        .map(|&mask| kkt_candidate(x, mask))
        .collect();

    let mut candidates = Vec::new();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for (mask, cand) in masks.iter().zip(found) {
        let Some((t, value)) = cand else { continue };
        candidates.push(FaceCandidate {
            support: mask_to_set(*mask, p),
            value,
        });
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((t, value));
        }
    }
    // every vertex e_k is a KKT point of its own face, so `best` exists
    let (argmin, minimum) = best.expect("singleton supports always yield candidates");
    let member = minimum >= -tol.zero_tol;
    let certificate = if member {
        CopCertificate::Proof {
            supports_examined: masks.len(),
            candidates,
            argmin: argmin.iter().copied().collect(),
        }
    } else {
        CopCertificate::Witness {
            t: argmin.iter().copied().collect(),
            value: minimum,
        }
    };
    Ok(CopVerdict {
        member,
        minimum,
        zero_tol: tol.zero_tol,
        certificate,
    })
}

fn mask_to_set(mask: u32, p: usize) -> IndexSet {
    (0..p).filter(|k| mask & (1 << k) != 0).collect()
}

/// Solves the bordered KKT system on the face with the given support and
/// returns the (feasible) simplex point and its objective value.
fn kkt_candidate(x: &SymMat, mask: u32) -> Option<(DVector<f64>, f64)> {
    let p = x.p();
    let idx: Vec<usize> = (0..p).filter(|k| mask & (1 << k) != 0).collect();
    let n = idx.len();
    let mut k = DMatrix::zeros(n + 1, n + 1);
    for a in 0..n {
        for b in 0..n {
            k[(a, b)] = x.get(idx[a], idx[b]);
        }
        k[(a, n)] = -1.0;
        k[(n, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = linalg::lstsq(&k, &rhs, 1e-12);
    let scale = (1.0 + x.max_abs()) * (1.0 + sol.amax());
    if (&k * &sol - &rhs).amax() > 1e-10 * scale {
        return None;
    }
    if (0..n).any(|a| sol[a] < -1e-12) {
        return None;
    }
    let mut t = DVector::zeros(p);
    for (a, &i) in idx.iter().enumerate() {
        t[i] = sol[a].max(0.0);
    }
    let s = t.sum();
    if s <= 0.0 {
        return None;
    }
    t /= s;
    let value = x.quad(&t);
    Some((t, value))
}

/// Result of the grid + projected-gradient oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmin: DVector<f64>,
}

/// Minimizes `tᵀXt` over a barycentric grid of mesh `1/grid_depth`, then
/// refines the best grid points by projected gradient. The value is attained
/// at `argmin`, hence an upper bound on the true minimum.
///
/// The grid has `C(grid_depth + p − 1, p − 1)` points; intended for p ≤ 6.
pub fn simplex_min_oracle(x: &SymMat, grid_depth: usize) -> OracleResult {
    const KEEP: usize = 24;
    const STEPS: usize = 4000;
    let p = x.p();
    let depth = grid_depth.max(1);
    let mut best: Vec<(f64, Vec<usize>)> = Vec::with_capacity(KEEP + 1);
    let mut counts = vec![0usize; p];
    let mut visit = |counts: &[usize]| {
        let t = DVector::from_iterator(p, counts.iter().map(|&c| c as f64 / depth as f64));
        let v = x.quad(&t);
        if best.len() < KEEP || v < best[best.len() - 1].0 {
            let pos = best.partition_point(|(bv, _)| *bv <= v);
            best.insert(pos, (v, counts.to_vec()));
            best.truncate(KEEP);
        }
    };
    compositions(depth, 0, &mut counts, &mut visit);

    let lipschitz = 2.0
        * linalg::singular_values(x.matrix())
            .first()
            .copied()
            .unwrap_or(0.0);
    let mut result = OracleResult {
        value: f64::INFINITY,
        argmin: DVector::zeros(p),
    };
    for (v0, c) in &best {
        let mut t = DVector::from_iterator(p, c.iter().map(|&k| k as f64 / depth as f64));
        let mut v = *v0;
        if lipschitz > 0.0 {
            let step = 1.0 / lipschitz;
            for _ in 0..STEPS {
                let g = x.mul_vec(&t) * 2.0;
                let next = project_to_simplex(&(&t - g * step));
                let nv = x.quad(&next);
                let moved = (&next - &t).amax();
                if nv <= v {
                    t = next;
                    v = nv;
                } else {
                    break;
                }
                if moved < 1e-16 {
                    break;
                }
            }
        }
        if v < result.value {
            result = OracleResult {
                value: v,
                argmin: t,
            };
        }
    }
    result
}

fn compositions(
    remaining: usize,
    pos: usize,
    counts: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    let p = counts.len();
    if pos == p - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        compositions(remaining - c, pos + 1, counts, visit);
    }
}

/// Euclidean projection onto `{t ≥ 0, Σt = 1}`.
pub fn project_to_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let candidate = (cumsum - 1.0) / (k as f64 + 1.0);
        if uk - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Outcome of the doubly-nonnegative necessary test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnnTest {
    pub entrywise_nonnegative: bool,
    pub psd: PsdStatus,
    pub holds: bool,
    /// True when the order is small enough that DNN and CP coincide.
    pub decisive: bool,
}

pub fn dnn_test(u: &SymMat, tol: &Tolerances) -> DnnTest {
    let entrywise_nonnegative = u.is_entrywise_nonnegative(tol.zero_tol);
    let psd = psd_status(u, tol);
    DnnTest {
        entrywise_nonnegative,
        psd,
        holds: entrywise_nonnegative && psd.is_psd(),
        decisive: u.p() <= DNN_EQUALS_CP_LIMIT,
    }
}

/// Nonnegative combination `Σ αᵢ t(i)t(i)ᵀ` reproducing a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpCertificate {
    pub generators: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Frobenius residual of the reconstruction.
    pub residual: f64,
}

impl CpCertificate {
    pub fn reconstruct(&self, p: usize) -> SymMat {
        let mut m = DMatrix::zeros(p, p);
        for (g, &w) in self.generators.iter().zip(&self.weights) {
            let v = DVector::from_column_slice(g);
            m += &v * v.transpose() * w;
        }
        SymMat::new(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CpVerdict {
    Member,
    NotMember,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpOutcome {
    /// `None` means NOT_IN_SPAN of the supplied generators.
    pub certificate: Option<CpCertificate>,
    /// Best nonnegative-combination residual over the generators.
    pub residual: f64,
    pub dnn: DnnTest,
    pub verdict: CpVerdict,
}

/// Completely-positive membership relative to a finite generator family,
/// plus the doubly-nonnegative necessary test.
pub fn cp_membership(
    u: &SymMat,
    generators: &[DVector<f64>],
    tol: &Tolerances,
) -> Result<CpOutcome> {
    let p = u.p();
    if generators.is_empty() {
        return Err(Error::InvalidGenerator {
            index: 0,
            reason: "generator family is empty".into(),
        });
    }
    for (i, g) in generators.iter().enumerate() {
        if g.len() != p {
            return Err(Error::InvalidGenerator {
                index: i,
                reason: format!("length {} does not match order {}", g.len(), p),
            });
        }
        if g.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidGenerator {
                index: i,
                reason: "negative entry".into(),
            });
        }
    }
    let cols: Vec<DVector<f64>> = generators
        .iter()
        .map(|g| svec(&SymMat::outer(g)).into_data())
        .collect();
    let a = linalg::columns(&cols, svec_len(p));
    let sol = nnls(&a, svec(u).data(), tol.zero_tol);

    let mut cert = CpCertificate {
        generators: Vec::new(),
        weights: Vec::new(),
        residual: 0.0,
    };
    for (g, &w) in generators.iter().zip(sol.x.iter()) {
        if w > 0.0 {
            cert.generators.push(g.iter().copied().collect());
            cert.weights.push(w);
        }
    }
    cert.residual = (&cert.reconstruct(p) - u).frobenius();
    let residual = cert.residual;
    let dnn = dnn_test(u, tol);
    let certificate = (residual <= tol.zero_tol).then_some(cert);
    let verdict = if certificate.is_some() {
        CpVerdict::Member
    } else if !dnn.holds {
        CpVerdict::NotMember
    } else if dnn.decisive {
        CpVerdict::Member
    } else {
        CpVerdict::Unknown
    };
    Ok(CpOutcome {
        certificate,
        residual,
        dnn,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4_x() -> SymMat {
        SymMat::from_rows(&[
            vec![1.0, -1.0, 2.0],
            vec![-1.0, 1.0, -1.0],
            vec![2.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_copositive() {
        let v = is_copositive(&SymMat::identity(3), &Tolerances::default()).unwrap();
        assert!(v.member);
        assert!((v.minimum - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn worked_example_is_copositive_with_zero_minimum() {
        let v = is_copositive(&s4_x(), &Tolerances::default()).unwrap();
        assert!(v.member);
        assert!(v.minimum.abs() < 1e-12);
    }

    #[test]
    fn negative_diagonal_short_circuits() {
        let x = SymMat::diag(&[1.0, -0.5, 1.0]);
        let v = is_copositive(&x, &Tolerances::default()).unwrap();
        assert!(!v.member);
        assert_eq!(v.witness().unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn indefinite_matrix_gets_simplex_witness() {
        let x = SymMat::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).unwrap();
        let tol = Tolerances::default();
        let v = is_copositive(&x, &tol).unwrap();
        assert!(!v.member);
        let t = DVector::from_column_slice(v.witness().unwrap());
        assert!(t.iter().all(|&c| c >= 0.0));
        assert!((t.sum() - 1.0).abs() < 1e-12);
        assert!(x.quad(&t) < -tol.zero_tol);
        assert!((v.minimum + 0.5).abs() < 1e-12);
    }

    #[test]
    fn order_limit_is_enforced() {
        let x = SymMat::identity(EXACT_COPOSITIVITY_LIMIT + 1);
        assert!(matches!(
            is_copositive(&x, &Tolerances::default()),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_examples() {
        let r = simplex_min_oracle(&SymMat::identity(2), 10);
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((r.argmin[0] - 0.5).abs() < 1e-9);

        let r = simplex_min_oracle(&SymMat::identity(2).scale(-1.0), 5);
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!(r.argmin.iter().any(|&c| (c - 1.0).abs() < 1e-12));

        let r = simplex_min_oracle(&s4_x(), 20);
        assert!(r.value.abs() < 1e-12);
        let b2 = DVector::from_vec(vec![0.5, 0.5, 0.0]);
        let c2 = DVector::from_vec(vec![0.0, 0.5, 0.5]);
        assert!((&r.argmin - b2).amax() < 1e-6 || (&r.argmin - c2).amax() < 1e-6);
    }

    #[test]
    fn simplex_projection() {
        let v = DVector::from_vec(vec![0.5, 0.5, 0.5]);
        let pr = project_to_simplex(&v);
        assert!((pr.sum() - 1.0).abs() < 1e-15);
        assert!((pr[0] - 1.0 / 3.0).abs() < 1e-15);
        let pr = project_to_simplex(&DVector::from_vec(vec![3.0, -1.0]));
        assert_eq!(pr.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn cp_single_generator() {
        let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let out = cp_membership(
            &SymMat::outer(&b),
            std::slice::from_ref(&b),
            &Tolerances::default(),
        )
        .unwrap();
        let cert = out.certificate.unwrap();
        assert!((cert.weights[0] - 1.0).abs() < 1e-12);
        assert!(cert.residual < 1e-12);
        assert_eq!(out.verdict, CpVerdict::Member);
    }

    #[test]
    fn cp_worked_example_dual() {
        let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let c = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        let u = &SymMat::outer(&b) + &SymMat::outer(&c);
        let out = cp_membership(&u, &[b, c], &Tolerances::default()).unwrap();
        let cert = out.certificate.unwrap();
        assert_eq!(cert.weights.len(), 2);
        assert!(cert.weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
        assert!(cert.residual <= 1e-12);
        assert!((&cert.reconstruct(3) - &u).frobenius() <= 1e-9);
    }

    #[test]
    fn cp_rejects_negative_off_diagonal() {
        let eps = 0.1;
        let w = SymMat::from_rows(&[vec![1.0, -eps], vec![-eps, 1.0]]).unwrap();
        let gens = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        ];
        let out = cp_membership(&w, &gens, &Tolerances::default()).unwrap();
        assert!(out.certificate.is_none());
        assert!(out.residual > 1e-3);
        assert!(!out.dnn.entrywise_nonnegative);
        assert!(!out.dnn.holds);
        assert_eq!(out.verdict, CpVerdict::NotMember);
    }

    #[test]
    fn cp_generator_errors() {
        let tol = Tolerances::default();
        let u = SymMat::identity(2);
        assert!(cp_membership(&u, &[], &tol).is_err());
        assert!(cp_membership(&u, &[DVector::from_vec(vec![1.0, 0.0, 0.0])], &tol).is_err());
        assert!(cp_membership(&u, &[DVector::from_vec(vec![1.0, -1.0])], &tol).is_err());
    }
}
