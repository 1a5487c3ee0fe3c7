//! The bi-linear defining equations `𝒜(X,s)W(s) + W(s)𝒜(X,s) = 0`, their
//! Jacobian and full-row-rank certificate, a local solver for `W` at a given
//! nearby `X`, round-trip verifiers along ε-paths, and executable forms of
//! the auxiliary matrix propositions used in the rank argument.
//!
//! Variable layout: `z = (svec(X), svec(W(1)), …, svec(W(|S|)))`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complement::{
    block_generators, embed, restrict, restrict_vec, DualDecomposition, Verdict,
};
use crate::cones::{cp_membership, is_copositive, CpVerdict};
use crate::error::{Error, Result};
use crate::indices::{Index, IndexSet};
use crate::linalg;
use crate::symcore::{
    psd_status, smat_slice, svec, svec_index, svec_len, sym_kron, PsdClass, SymMat, Tolerances,
};
use crate::wire;
use crate::zerostruct::{pair_set, ZeroStructure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLayout {
    /// `P_*(s)`.
    pub support: IndexSet,
    /// Offset of `svec(W(s))` inside `z`.
    pub offset: usize,
}

impl BlockLayout {
    pub fn p_block(&self) -> usize {
        self.support.len()
    }

    pub fn p_star_block(&self) -> usize {
        svec_len(self.support.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefiningSystem {
    pub p: usize,
    pub p_star: usize,
    pub m: usize,
    pub blocks: Vec<BlockLayout>,
    #[serde(with = "wire::dvec")]
    pub anchor: DVector<f64>,
}

impl DefiningSystem {
    /// System anchored at `(X⁰, {W⁰(s)})` of a computed structure.
    pub fn build(zs: &ZeroStructure, dd: &DualDecomposition) -> Result<Self> {
        let supports = zs.blocks.iter().map(|b| b.support.clone()).collect();
        Self::from_parts(&zs.x, supports, &dd.restricted)
    }

    pub fn from_parts(x0: &SymMat, supports: Vec<IndexSet>, w0: &[SymMat]) -> Result<Self> {
        let p = x0.p();
        if supports.len() != w0.len() {
            return Err(Error::LengthMismatch {
                expected: supports.len(),
                found: w0.len(),
            });
        }
        let p_star = svec_len(p);
        let mut offset = p_star;
        let mut blocks = Vec::with_capacity(supports.len());
        for support in supports {
            if support.iter().any(|k| k >= p) {
                return Err(Error::InvalidInput(format!(
                    "block support {support} exceeds order {p}"
                )));
            }
            let len = svec_len(support.len());
            blocks.push(BlockLayout { support, offset });
            offset += len;
        }
        let mut sys = DefiningSystem {
            p,
            p_star,
            m: offset - p_star,
            blocks,
            anchor: DVector::zeros(0),
        };
        sys.anchor = sys.compose(x0, w0)?;
        Ok(sys)
    }

    /// `p_* + m`.
    pub fn len(&self) -> usize {
        self.p_star + self.m
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn compose(&self, x: &SymMat, ws: &[SymMat]) -> Result<DVector<f64>> {
        self.check_ws(ws)?;
        if x.p() != self.p {
            return Err(Error::OrderMismatch {
                expected: self.p,
                found: x.p(),
            });
        }
        let mut z = DVector::zeros(self.len());
        z.rows_mut(0, self.p_star).copy_from(svec(x).data());
        for (b, w) in self.blocks.iter().zip(ws) {
            z.rows_mut(b.offset, b.p_star_block())
                .copy_from(svec(w).data());
        }
        Ok(z)
    }

    pub fn split(&self, z: &DVector<f64>) -> Result<(SymMat, Vec<SymMat>)> {
        if z.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: z.len(),
            });
        }
        let x = smat_slice(&z.as_slice()[..self.p_star], self.p)?;
        let ws = self
            .blocks
            .iter()
            .map(|b| {
                smat_slice(
                    &z.as_slice()[b.offset..b.offset + b.p_star_block()],
                    b.p_block(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((x, ws))
    }

    fn check_ws(&self, ws: &[SymMat]) -> Result<()> {
        if ws.len() != self.blocks.len() {
            return Err(Error::LengthMismatch {
                expected: self.blocks.len(),
                found: ws.len(),
            });
        }
        for (b, w) in self.blocks.iter().zip(ws) {
            if w.p() != b.p_block() {
                return Err(Error::OrderMismatch {
                    expected: b.p_block(),
                    found: w.p(),
                });
            }
        }
        Ok(())
    }

    /// `Ω(z)`: stacked `svec(𝒜(X,s)W(s) + W(s)𝒜(X,s))`.
    pub fn residual(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let (x, ws) = self.split(z)?;
        Ok(self.residual_parts(&x, &ws))
    }

    fn residual_parts(&self, x: &SymMat, ws: &[SymMat]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (b, w) in self.blocks.iter().zip(ws) {
            let xs = restrict(x, &b.support);
            out.rows_mut(b.offset - self.p_star, b.p_star_block())
                .copy_from(svec(&xs.anticommutator(w)).data());
        }
        out
    }

    /// `U = Σ_s ℬ(W(s), s)`.
    pub fn reconstruct_u(&self, ws: &[SymMat]) -> Result<SymMat> {
        self.check_ws(ws)?;
        let mut u = SymMat::zeros(self.p);
        for (b, w) in self.blocks.iter().zip(ws) {
            u = &u + &embed(w, &b.support, self.p)?;
        }
        Ok(u)
    }

    /// `∂Ω/∂z`; block row `s` is `[2Q(s) | … 2ℒ(s) …]` with `𝒦(s) = W(s) ⊗ₛ E`
    /// scattered into the columns of `V(P_*(s))` and `ℒ(s) = 𝒜(X,s) ⊗ₛ E`.
    pub fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (x, ws) = self.split(z)?;
        let mut jac = DMatrix::zeros(self.m, self.len());
        for (b, w) in self.blocks.iter().zip(&ws) {
            let ps = b.p_block();
            let row0 = b.offset - self.p_star;
            let eye = SymMat::identity(ps);
            let k = sym_kron(w, &eye)? * 2.0;
            let l = sym_kron(&restrict(&x, &b.support), &eye)? * 2.0;
            let idx = b.support.as_slice();
            for c in 0..ps {
                for r in c..ps {
                    let local = svec_index(ps, r, c);
                    let global = svec_index(self.p, idx[r], idx[c]);
                    jac.view_mut((row0, global), (b.p_star_block(), 1))
                        .copy_from(&k.column(local));
                }
            }
            jac.view_mut((row0, b.offset), (b.p_star_block(), b.p_star_block()))
                .copy_from(&l);
        }
        Ok(jac)
    }

    /// Block-diagonal map `svec(W) ↦ Ω` for fixed `X`, with column offsets
    /// relative to the start of the `W` variables.
    fn w_operator(&self, x: &SymMat) -> Result<DMatrix<f64>> {
        let mut a = DMatrix::zeros(self.m, self.m);
        for b in &self.blocks {
            let ps = b.p_block();
            let l = sym_kron(&restrict(x, &b.support), &SymMat::identity(ps))? * 2.0;
            let o = b.offset - self.p_star;
            a.view_mut((o, o), (b.p_star_block(), b.p_star_block()))
                .copy_from(&l);
        }
        Ok(a)
    }

    /// Linear map `svec(W) ↦ svec(Σ_s ℬ(W(s), s))`.
    fn embed_operator(&self) -> DMatrix<f64> {
        let mut r = DMatrix::zeros(self.p_star, self.m);
        for b in &self.blocks {
            let ps = b.p_block();
            let idx = b.support.as_slice();
            for c in 0..ps {
                for rr in c..ps {
                    let local = svec_index(ps, rr, c) + b.offset - self.p_star;
                    let global = svec_index(self.p, idx[rr], idx[c]);
                    r[(global, local)] = 1.0;
                }
            }
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub m_expected: usize,
    pub rank_computed: usize,
    pub sigma_1: f64,
    /// `σ_m`, the smallest singular value that must be retained.
    pub sigma_m: f64,
    pub largest_discarded: Option<f64>,
    /// `σ_m / σ_1`.
    pub ratio: f64,
    pub rank_tol: f64,
    pub verdict: Verdict,
}

/// Singular-value rank of `∂Ω/∂z` at `z`; PASS iff it equals `m`.
pub fn rank_certificate(
    sys: &DefiningSystem,
    z: &DVector<f64>,
    tol: &Tolerances,
) -> Result<RankCertificate> {
    let omega = sys.residual(z)?;
    let res = omega.amax();
    if sys.m > 0 && res > tol.zero_tol {
        return Err(Error::DefiningEquationsViolated { residual: res });
    }
    if sys.m == 0 {
        return Ok(RankCertificate {
            m_expected: 0,
            rank_computed: 0,
            sigma_1: 0.0,
            sigma_m: 0.0,
            largest_discarded: None,
            ratio: 1.0,
            rank_tol: tol.rank_tol,
            verdict: Verdict::Pass,
        });
    }
    let sv = linalg::singular_values(&sys.jacobian(z)?);
    let rank_computed = linalg::count_above(&sv, tol.rank_tol);
    let sigma_1 = sv[0];
    let sigma_m = sv[sys.m - 1];
    Ok(RankCertificate {
        m_expected: sys.m,
        rank_computed,
        sigma_1,
        sigma_m,
        largest_discarded: sv.get(rank_computed).copied(),
        ratio: if sigma_1 > 0.0 {
            sigma_m / sigma_1
        } else {
            0.0
        },
        rank_tol: tol.rank_tol,
        verdict: if rank_computed == sys.m {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LocalSolution {
    Converged {
        ws: Vec<SymMat>,
        residual: f64,
        iterations: usize,
    },
    NoConvergence {
        residual: f64,
        iterations: usize,
    },
}

/// Damped Gauss–Newton for `W` with `X` frozen, started at the anchor `W⁰`.
pub fn solve_local(
    sys: &DefiningSystem,
    x: &SymMat,
    trust_radius: f64,
    tol: &Tolerances,
) -> Result<LocalSolution> {
    const MAX_ITER: usize = 50;
    const DAMPING: f64 = 0.5;
    let (x0, w0) = sys.split(&sys.anchor)?;
    if x.p() != sys.p {
        return Err(Error::OrderMismatch {
            expected: sys.p,
            found: x.p(),
        });
    }
    let distance = (x - &x0).frobenius();
    if distance > trust_radius {
        return Err(Error::OutsideTrustRadius {
            distance,
            radius: trust_radius,
        });
    }
    let mut ws = w0;
    let mut residual = sys.residual_parts(x, &ws).amax();
    let mut iterations = 0;
    let ops: Vec<DMatrix<f64>> = sys
        .blocks
        .iter()
        .map(|b| {
            sym_kron(&restrict(x, &b.support), &SymMat::identity(b.p_block())).map(|l| l * 2.0)
        })
        .collect::<Result<_>>()?;
    while residual > tol.zero_tol && iterations < MAX_ITER {
        iterations += 1;
        for ((b, w), a) in sys.blocks.iter().zip(ws.iter_mut()).zip(&ops) {
            let wv = svec(w).into_data();
            let r = a * &wv;
            let step = linalg::lstsq(a, &r, 1e-13);
            *w = smat_slice((wv - step * DAMPING).as_slice(), b.p_block())?;
        }
        residual = sys.residual_parts(x, &ws).amax();
    }
    Ok(if residual <= tol.zero_tol {
        LocalSolution::Converged {
            ws,
            residual,
            iterations,
        }
    } else {
        LocalSolution::NoConvergence {
            residual,
            iterations,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub eps: f64,
    pub x: SymMat,
    pub u: SymMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardEntry {
    pub eps: f64,
    /// `‖Ω‖∞` at the best `W(s, ε)`.
    pub equation_residual: f64,
    /// `‖Σ_s ℬ(W(s,ε), s) − U(ε)‖_F`.
    pub reconstruction_residual: f64,
    /// `‖X(ε)U(ε) + U(ε)X(ε)‖_F`.
    pub anticommutator: f64,
    pub ws: Vec<SymMat>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardReport {
    pub entries: Vec<ForwardEntry>,
    pub first_failing: Option<f64>,
    /// Largest ε such that it and every smaller sampled ε pass.
    pub largest_passing: Option<f64>,
}

/// Checks that each `(X(ε), U(ε))` admits `W(s, ε)` over the anchor's block
/// layout with `U(ε) = Σ_s ℬ(W(s,ε), s)` and vanishing block anticommutators.
///
/// `W` is found by lexicographic least squares: first the reconstruction of
/// `U(ε)`, then, within its solution set, the anticommutator residual.
pub fn verify_forward(
    sys: &DefiningSystem,
    path: &[PathPoint],
    tol: &Tolerances,
) -> Result<ForwardReport> {
    let r = sys.embed_operator();
    let mut entries = Vec::with_capacity(path.len());
    for pt in path {
        if pt.x.p() != sys.p || pt.u.p() != sys.p {
            return Err(Error::OrderMismatch {
                expected: sys.p,
                found: pt.x.p().max(pt.u.p()),
            });
        }
        let inner = pt.x.dot(&pt.u);
        if inner.abs() > tol.zero_tol {
            return Err(Error::NotComplementary { inner });
        }
        let target = svec(&pt.u).into_data();
        let w1 = linalg::lstsq(&r, &target, 1e-12);
        let free = linalg::null_space(&r, 1e-10);
        let a = sys.w_operator(&pt.x)?;
        let w = if free.ncols() > 0 {
            let y = linalg::lstsq(&(&a * &free), &(-(&a * &w1)), 1e-12);
            &w1 + &free * y
        } else {
            w1
        };
        let mut z = DVector::zeros(sys.len());
        z.rows_mut(0, sys.p_star).copy_from(svec(&pt.x).data());
        z.rows_mut(sys.p_star, sys.m).copy_from(&w);
        let (_, ws) = sys.split(&z)?;
        let equation_residual = if sys.m > 0 {
            sys.residual(&z)?.amax()
        } else {
            0.0
        };
        let reconstruction_residual = (&sys.reconstruct_u(&ws)? - &pt.u).frobenius();
        let anticommutator = pt.x.anticommutator(&pt.u).frobenius();
        entries.push(ForwardEntry {
            eps: pt.eps,
            equation_residual,
            reconstruction_residual,
            anticommutator,
            passed: equation_residual <= tol.zero_tol && reconstruction_residual <= tol.zero_tol,
            ws,
        });
    }
    let first_failing = entries.iter().find(|e| !e.passed).map(|e| e.eps);
    let largest_passing = largest_passing(entries.iter().map(|e| (e.eps, e.passed)));
    Ok(ForwardReport {
        entries,
        first_failing,
        largest_passing,
    })
}

fn largest_passing(items: impl Iterator<Item = (f64, bool)>) -> Option<f64> {
    let mut v: Vec<(f64, bool)> = items.collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = None;
    for (eps, ok) in v {
        if !ok {
            break;
        }
        best = Some(eps);
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WPathPoint {
    pub eps: f64,
    pub x: SymMat,
    pub ws: Vec<SymMat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackwardEntry {
    pub eps: f64,
    pub copositive: bool,
    pub copositivity_minimum: f64,
    pub witness: Option<Vec<f64>>,
    /// Completely-positive verdict of each `W(s, ε)`.
    pub block_cp: Vec<CpVerdict>,
    pub u: SymMat,
    /// `|X(ε) • U(ε)|`.
    pub complementarity: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackwardReport {
    pub entries: Vec<BackwardEntry>,
    pub first_failing: Option<f64>,
    pub largest_passing: Option<f64>,
}

/// Checks whether `(X(ε), Σ_s ℬ(W(s,ε), s))` lies in the complementarity set,
/// given that the defining equations hold.
pub fn verify_backward(
    sys: &DefiningSystem,
    zs: &ZeroStructure,
    path: &[WPathPoint],
    tol: &Tolerances,
) -> Result<BackwardReport> {
    if zs.blocks.len() != sys.blocks.len() {
        return Err(Error::LengthMismatch {
            expected: sys.blocks.len(),
            found: zs.blocks.len(),
        });
    }
    let generators: Vec<Vec<DVector<f64>>> = (0..zs.blocks.len())
        .map(|s| {
            block_generators(zs, s)
                .into_iter()
                .map(|(_, v)| restrict_vec(&v, &zs.blocks[s].support))
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(path.len());
    for pt in path {
        let z = sys.compose(&pt.x, &pt.ws)?;
        if sys.m > 0 {
            let res = sys.residual(&z)?.amax();
            if res > tol.zero_tol {
                return Err(Error::DefiningEquationsViolated { residual: res });
            }
        }
        let cop = is_copositive(&pt.x, tol)?;
        let block_cp = pt
            .ws
            .iter()
            .zip(&generators)
            .map(|(w, g)| cp_membership(w, g, tol).map(|o| o.verdict))
            .collect::<Result<Vec<_>>>()?;
        let u = sys.reconstruct_u(&pt.ws)?;
        let complementarity = pt.x.dot(&u).abs();
        let verdict = if !cop.member
            || complementarity > tol.zero_tol
            || block_cp.contains(&CpVerdict::NotMember)
        {
            Verdict::Fail
        } else if block_cp.iter().all(|v| *v == CpVerdict::Member) {
            Verdict::Pass
        } else {
            Verdict::Unknown
        };
        entries.push(BackwardEntry {
            eps: pt.eps,
            copositive: cop.member,
            copositivity_minimum: cop.minimum,
            witness: cop.witness().map(<[f64]>::to_vec),
            block_cp,
            u,
            complementarity,
            verdict,
        });
    }
    let first_failing = entries
        .iter()
        .find(|e| e.verdict != Verdict::Pass)
        .map(|e| e.eps);
    let largest_passing =
        largest_passing(entries.iter().map(|e| (e.eps, e.verdict == Verdict::Pass)));
    Ok(BackwardReport {
        entries,
        first_failing,
        largest_passing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnticommutingPairCheck {
    NotApplicable {
        reason: String,
    },
    Checked {
        x_psd: bool,
        u_psd: bool,
        /// `‖UX‖_F`.
        product: f64,
        product_vanishes: bool,
        holds: bool,
    },
}

/// For `UX + XU = 0` with `X + U` positive definite: both are PSD and `UX = 0`.
pub fn check_anticommuting_pair(
    x: &SymMat,
    u: &SymMat,
    tol: &Tolerances,
) -> Result<AnticommutingPairCheck> {
    if x.p() != u.p() {
        return Err(Error::OrderMismatch {
            expected: x.p(),
            found: u.p(),
        });
    }
    let anti = x.anticommutator(u).frobenius();
    if anti > tol.zero_tol {
        return Ok(AnticommutingPairCheck::NotApplicable {
            reason: format!("anticommutator norm {anti:e} exceeds zero_tol"),
        });
    }
    let sum = psd_status(&(x + u), tol);
    if sum.class != PsdClass::PsdInterior {
        return Ok(AnticommutingPairCheck::NotApplicable {
            reason: format!(
                "X + U is not positive definite (lambda_min {:e})",
                sum.lambda_min
            ),
        });
    }
    let x_psd = psd_status(x, tol).is_psd();
    let u_psd = psd_status(u, tol).is_psd();
    let product = (u.matrix() * x.matrix()).norm();
    let product_vanishes = product <= 10.0 * tol.zero_tol;
    Ok(AnticommutingPairCheck::Checked {
        x_psd,
        u_psd,
        product,
        product_vanishes,
        holds: x_psd && u_psd && product_vanishes,
    })
}

/// `‖XZ‖_F` with `Z = YW + WY`; vanishes when `X, W ⪰ 0`, `WX = 0` and
/// `XY + YX = 0`.
pub fn anticommutator_product_residual(x: &SymMat, w: &SymMat, y: &SymMat) -> f64 {
    let z = y.anticommutator(w);
    (x.matrix() * z.matrix()).norm()
}

/// Mutual projection residuals between `span{τ(j)}` and the kernel of `X`
/// (eigenvalues within `psd_tol`); both vanish when the spans agree.
pub fn kernel_span_agreement(
    x: &SymMat,
    vertices: &[DVector<f64>],
    tol: &Tolerances,
) -> (f64, f64) {
    let p = x.p();
    let kernel = crate::symcore::kernel_basis(x, tol);
    let kmat = linalg::columns(&kernel, p);
    let vmat = linalg::columns(vertices, p);
    let residual = |from: &DMatrix<f64>, onto: &DMatrix<f64>| -> f64 {
        if from.ncols() == 0 {
            return 0.0;
        }
        if onto.ncols() == 0 {
            return linalg::max_abs(from);
        }
        let r = linalg::rank(onto, tol.rank_tol);
        let basis = linalg::svd_full(&onto.transpose())
            .v
            .columns(0, r)
            .into_owned();
        let proj = &basis * (basis.transpose() * from);
        linalg::max_abs(&(from - proj))
    };
    (residual(&vmat, &kmat), residual(&kmat, &vmat))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficient {
    pub i: Index,
    pub j: Index,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairExpansion {
    Expressed {
        coefficients: Vec<PairCoefficient>,
        residual: f64,
    },
    Fail {
        residual: f64,
    },
}

/// Least-squares coefficients of `Z` over `(τ(i)+τ(j))(τ(i)+τ(j))ᵀ`, `i ≤ j`.
pub fn express_in_pair_basis(
    z: &SymMat,
    basis: &[DVector<f64>],
    tol: &Tolerances,
) -> Result<PairExpansion> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let p = z.p();
    if let Some((i, t)) = basis.iter().enumerate().find(|(_, t)| t.len() != p) {
        return Err(Error::InvalidGenerator {
            index: i,
            reason: format!("length {} does not match order {}", t.len(), p),
        });
    }
    let pairs = pair_set(&IndexSet::new((0..basis.len()).collect()));
    let cols: Vec<DVector<f64>> = pairs
        .iter()
        .map(|&(i, j)| svec(&SymMat::outer(&(&basis[i] + &basis[j]))).into_data())
        .collect();
    let a = linalg::columns(&cols, svec_len(p));
    let target = svec(z).into_data();
    let beta = linalg::lstsq(&a, &target, 1e-12);
    let residual = (&a * &beta - &target).norm();
    if residual > tol.zero_tol {
        return Ok(PairExpansion::Fail { residual });
    }
    Ok(PairExpansion::Expressed {
        coefficients: pairs
            .iter()
            .zip(beta.iter())
            .map(|(&(i, j), &b)| PairCoefficient {
                i: Index(i),
                j: Index(j),
                beta: b,
            })
            .collect(),
        residual,
    })
}
