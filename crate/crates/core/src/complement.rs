//! Analysis of a complementary pair `(X⁰, U⁰)`: the block restriction and
//! embedding operators, the split of `U⁰` into block components, the three
//! non-degeneracy assumptions and the derived conditions i)–iii), positive
//! factorizations and factorization alignment.
//!
//! Block components are represented over the generator family
//! `{τ̄(i,j)τ̄(i,j)ᵀ : (i,j) ∈ V(J(s))}`, extended by the block barycenter
//! `Σ_{j∈J(s)} τ(j)` when the block has three or more vertices so that
//! rank-one terms with full block support are representable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{Index, IndexSet};
use crate::linalg;
use crate::nnls::nnls;
use crate::symcore::{
    psd_status, rank_of_set, svec, svec_len, PsdClass, PsdStatus, SymMat, Tolerances,
};
use crate::wire;
use crate::zerostruct::{pair_set, ZeroStructure};

/// Weight margin used to test for a representation with every pair weight
/// strictly positive.
pub const DELTA_STRICT: f64 = 1e-6;

/// Shift parameters tried, in order, by [`positive_factorization`].
pub const THETA_GRID: [f64; 7] = [0.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// `𝒜(X, s)`: principal submatrix on the block support.
pub fn restrict(x: &SymMat, support: &IndexSet) -> SymMat {
    x.principal(support.as_slice())
}

/// `ℬ(W, s)`: `W` placed on `support × support` inside a zero `p×p` matrix.
pub fn embed(w: &SymMat, support: &IndexSet, p: usize) -> Result<SymMat> {
    if w.p() != support.len() {
        return Err(Error::OrderMismatch {
            expected: support.len(),
            found: w.p(),
        });
    }
    let idx = support.as_slice();
    let mut m = DMatrix::zeros(p, p);
    for (a, &k) in idx.iter().enumerate() {
        for (b, &q) in idx.iter().enumerate() {
            m[(k, q)] = w.get(a, b);
        }
    }
    Ok(SymMat::new(m))
}

/// Restriction of a vector to the block support.
pub fn restrict_vec(t: &DVector<f64>, support: &IndexSet) -> DVector<f64> {
    DVector::from_iterator(support.len(), support.iter().map(|k| t[k]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `τ(i) + τ(j)` with `i ≤ j`.
    Pair { i: Index, j: Index },
    /// `Σ_{j∈J(s)} τ(j)`.
    Barycenter,
}

impl GeneratorKind {
    /// Coefficients `β` with generator `= Σ β_j τ(j)`.
    pub fn coefficients(&self, members: &IndexSet) -> Vec<(usize, f64)> {
        match *self {
            GeneratorKind::Pair { i, j } if i == j => vec![(i.0, 2.0)],
            GeneratorKind::Pair { i, j } => vec![(i.0, 1.0), (j.0, 1.0)],
            GeneratorKind::Barycenter => members.iter().map(|j| (j, 1.0)).collect(),
        }
    }
}

/// Generator vectors (full coordinates) of block `s`.
pub fn block_generators(zs: &ZeroStructure, s: usize) -> Vec<(GeneratorKind, DVector<f64>)> {
    let members = &zs.blocks[s].members;
    let mut out: Vec<(GeneratorKind, DVector<f64>)> = pair_set(members)
        .into_iter()
        .map(|(i, j)| {
            (
                GeneratorKind::Pair {
                    i: Index(i),
                    j: Index(j),
                },
                &zs.vertices[i] + &zs.vertices[j],
            )
        })
        .collect();
    if members.len() >= 3 {
        let bary = members
            .iter()
            .fold(DVector::zeros(zs.p()), |acc, j| acc + &zs.vertices[j]);
        out.push((GeneratorKind::Barycenter, bary));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTerm {
    pub block: Index,
    pub kind: GeneratorKind,
    #[serde(with = "wire::dvec")]
    pub vector: DVector<f64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Uniqueness {
    Unique,
    NonUnique,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualDecomposition {
    /// `U⁰(s)`, full order, supported on `P_*(s) × P_*(s)`.
    pub components: Vec<SymMat>,
    /// `W⁰(s) = 𝒜(U⁰(s), s)`.
    pub restricted: Vec<SymMat>,
    /// Terms with positive weight, grouped by ascending block.
    pub terms: Vec<GeneratorTerm>,
    /// Frobenius residual `‖Σ_s U⁰(s) − U⁰‖`.
    pub residual: f64,
    pub uniqueness: Uniqueness,
    /// Rank of the pooled basis-pair matrices against their count.
    pub pair_rank: usize,
    pub pair_count: usize,
}

fn pair_matrix_rank(zs: &ZeroStructure, tol: &Tolerances) -> Result<(usize, usize)> {
    let mats: Vec<SymMat> = zs
        .blocks
        .iter()
        .flat_map(|b| pair_set(&b.basis))
        .map(|(i, j)| SymMat::outer(&(&zs.vertices[i] + &zs.vertices[j])))
        .collect();
    Ok((rank_of_set(&mats, tol)?, mats.len()))
}

fn check_complementary(x: &SymMat, u: &SymMat, tol: &Tolerances) -> Result<()> {
    if x.p() != u.p() {
        return Err(Error::OrderMismatch {
            expected: x.p(),
            found: u.p(),
        });
    }
    let inner = x.dot(u);
    if inner.abs() > tol.zero_tol {
        return Err(Error::NotComplementary { inner });
    }
    Ok(())
}

/// Splits `U` into block components by nonnegative least squares over the
/// pooled block generators.
pub fn decompose_dual(
    u: &SymMat,
    zs: &ZeroStructure,
    tol: &Tolerances,
) -> Result<DualDecomposition> {
    check_complementary(&zs.x, u, tol)?;
    let p = zs.p();
    let mut pooled: Vec<(usize, GeneratorKind, DVector<f64>)> = Vec::new();
    for s in 0..zs.blocks.len() {
        for (kind, v) in block_generators(zs, s) {
            pooled.push((s, kind, v));
        }
    }
    let mut components = vec![SymMat::zeros(p); zs.blocks.len()];
    let mut terms = Vec::new();
    if !pooled.is_empty() {
        let cols: Vec<DVector<f64>> = pooled
            .iter()
            .map(|(_, _, v)| svec(&SymMat::outer(v)).into_data())
            .collect();
        let a = linalg::columns(&cols, svec_len(p));
        let sol = nnls(&a, svec(u).data(), tol.zero_tol * 1e-3);
        for ((s, kind, v), &w) in pooled.iter().zip(sol.x.iter()) {
            if w > 0.0 {
                components[*s] = &components[*s] + &SymMat::outer(v).scale(w);
                terms.push(GeneratorTerm {
                    block: Index(*s),
                    kind: *kind,
                    vector: v.clone(),
                    weight: w,
                });
            }
        }
    }
    let total = components.iter().fold(SymMat::zeros(p), |acc, c| &acc + c);
    let residual = (&total - u).frobenius();
    if residual > tol.zero_tol {
        return Err(Error::NotRepresentable { residual });
    }
    let restricted = components
        .iter()
        .zip(&zs.blocks)
        .map(|(c, b)| restrict(c, &b.support))
        .collect();
    let (pair_rank, pair_count) = pair_matrix_rank(zs, tol)?;
    let uniqueness = if zs.blocks.len() <= 1 || pair_rank == pair_count {
        Uniqueness::Unique
    } else {
        Uniqueness::NonUnique
    };
    Ok(DualDecomposition {
        components,
        restricted,
        terms,
        residual,
        uniqueness,
        pair_rank,
        pair_count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    /// FAIL dominates UNKNOWN, which dominates PASS.
    pub fn combine(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        items
            .into_iter()
            .fold(Verdict::Pass, |acc, v| match (acc, v) {
                (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
                _ => Verdict::Pass,
            })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWeight {
    pub kind: GeneratorKind,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeCheck {
    pub rank_w: usize,
    pub rank_span: usize,
    /// `range(W⁰(s)) ⊆ span{τ_*(j)}`.
    pub contained: bool,
}

impl RangeCheck {
    pub fn holds(&self) -> bool {
        self.contained && self.rank_w == self.rank_span
    }
}

/// Symmetric `Z` (block coordinates) nonnegative on the block's zero cone,
/// orthogonal to `W⁰(s)`, and positive on some pair generator. Its
/// existence rules out a representation with all pair weights positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingFunctional {
    pub z: SymMat,
    /// `τ_*(i)ᵀ Z τ_*(j)` over `V(J(s))`.
    pub pair_values: Vec<f64>,
    pub inner_with_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStrictness {
    pub block: Index,
    pub verdict: Verdict,
    /// Residual of the margin-shifted representation test.
    pub strict_residual: f64,
    /// Weights with every pair weight `≥ δ`, when found.
    pub strict_weights: Option<Vec<PairWeight>>,
    pub range: RangeCheck,
    pub separating: Option<SeparatingFunctional>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictnessReport {
    pub verdict: Verdict,
    pub delta: f64,
    pub blocks: Vec<BlockStrictness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub verdict: Verdict,
    pub rank: usize,
    pub expected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactMismatch {
    pub vertex: Index,
    pub block: Index,
    pub contact_set: IndexSet,
    pub support: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub verdict: Verdict,
    pub offending: Vec<ContactMismatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub verdict: Verdict,
    pub uniqueness: Uniqueness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFactorization {
    pub block: Index,
    pub verdict: Verdict,
    pub outcome: FactorOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub verdict: Verdict,
    pub blocks: Vec<BlockFactorization>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDefiniteness {
    pub block: Index,
    pub x: PsdStatus,
    pub w: PsdStatus,
    pub sum: PsdStatus,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub verdict: Verdict,
    pub blocks: Vec<BlockDefiniteness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub j: StrictnessReport,
    pub jj: IndependenceReport,
    pub jjj: ContactReport,
    pub cond_i: UniquenessReport,
    pub cond_ii: FactorizationReport,
    pub cond_iii: DefinitenessReport,
}

pub fn check_assumptions(
    x: &SymMat,
    u: &SymMat,
    zs: &ZeroStructure,
    dd: &DualDecomposition,
    tol: &Tolerances,
) -> Result<AssumptionReport> {
    check_complementary(x, u, tol)?;

    let mut offending = Vec::new();
    for (s, b) in zs.blocks.iter().enumerate() {
        for j in b.members.iter() {
            if zs.contact_sets[j] != b.support {
                offending.push(ContactMismatch {
                    vertex: Index(j),
                    block: Index(s),
                    contact_set: zs.contact_sets[j].clone(),
                    support: b.support.clone(),
                });
            }
        }
    }
    let jjj = ContactReport {
        verdict: if offending.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        offending,
    };

    let jj = IndependenceReport {
        verdict: if dd.pair_rank == dd.pair_count {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        rank: dd.pair_rank,
        expected: dd.pair_count,
    };

    let unique = dd.uniqueness == Uniqueness::Unique;
    let blocks_j: Vec<BlockStrictness> = (0..zs.blocks.len())
        .map(|s| block_strictness(zs, dd, s, unique, tol))
        .collect();
    let j = StrictnessReport {
        verdict: Verdict::combine(blocks_j.iter().map(|b| b.verdict)),
        delta: DELTA_STRICT,
        blocks: blocks_j,
    };

    let cond_i = UniquenessReport {
        verdict: match (dd.uniqueness, j.verdict) {
            (Uniqueness::Unique, _) => Verdict::Pass,
            (Uniqueness::NonUnique, Verdict::Pass) => Verdict::Fail,
            _ => Verdict::Unknown,
        },
        uniqueness: dd.uniqueness,
    };

    let mut factor_blocks = Vec::new();
    for (s, b) in zs.blocks.iter().enumerate() {
        let w = &dd.restricted[s];
        let (gens, weights) = match &j.blocks[s].strict_weights {
            Some(sw) => {
                let all = block_generators(zs, s);
                let gens = sw
                    .iter()
                    .map(|pw| {
                        let v = &all
                            .iter()
                            .find(|(k, _)| *k == pw.kind)
                            .expect("known generator")
                            .1;
                        restrict_vec(v, &b.support)
                    })
                    .collect::<Vec<_>>();
                (gens, sw.iter().map(|pw| pw.alpha).collect::<Vec<_>>())
            }
            None => dd
                .terms
                .iter()
                .filter(|t| t.block.0 == s)
                .map(|t| (restrict_vec(&t.vector, &b.support), t.weight))
                .unzip(),
        };
        let outcome = positive_factorization(w, &gens, &weights, tol)?;
        let verdict = match &outcome {
            FactorOutcome::Found { .. } => Verdict::Pass,
            // a zero entry in W rules out any entrywise-positive factor
            FactorOutcome::Unavailable { .. } if w.matrix().iter().any(|&v| v <= tol.zero_tol) => {
                Verdict::Fail
            }
            FactorOutcome::Unavailable { .. } => Verdict::Unknown,
        };
        factor_blocks.push(BlockFactorization {
            block: Index(s),
            verdict,
            outcome,
        });
    }
    let cond_ii = FactorizationReport {
        verdict: Verdict::combine(factor_blocks.iter().map(|b| b.verdict)),
        blocks: factor_blocks,
    };

    let def_blocks: Vec<BlockDefiniteness> = zs
        .blocks
        .iter()
        .enumerate()
        .map(|(s, b)| {
            let xs = restrict(x, &b.support);
            let w = &dd.restricted[s];
            let xst = psd_status(&xs, tol);
            let wst = psd_status(w, tol);
            let sum = psd_status(&(&xs + w), tol);
            let ok = xst.is_psd() && wst.is_psd() && sum.class == PsdClass::PsdInterior;
            BlockDefiniteness {
                block: Index(s),
                x: xst,
                w: wst,
                sum,
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            }
        })
        .collect();
    let cond_iii = DefinitenessReport {
        verdict: Verdict::combine(def_blocks.iter().map(|b| b.verdict)),
        blocks: def_blocks,
    };

    Ok(AssumptionReport {
        j,
        jj,
        jjj,
        cond_i,
        cond_ii,
        cond_iii,
    })
}

fn block_strictness(
    zs: &ZeroStructure,
    dd: &DualDecomposition,
    s: usize,
    unique: bool,
    tol: &Tolerances,
) -> BlockStrictness {
    let b = &zs.blocks[s];
    let ps = b.p_block();
    let w = &dd.restricted[s];
    let gens: Vec<(GeneratorKind, DVector<f64>)> = block_generators(zs, s)
        .into_iter()
        .map(|(k, v)| (k, restrict_vec(&v, &b.support)))
        .collect();

    // margin-shifted representation: W − δ Σ_pairs τ̄τ̄ᵀ ∈ cone(generators)
    let shift = gens
        .iter()
        .filter(|(k, _)| matches!(k, GeneratorKind::Pair { .. }))
        .fold(SymMat::zeros(ps), |acc, (_, v)| &acc + &SymMat::outer(v));
    let target = w - &shift.scale(DELTA_STRICT);
    let cols: Vec<DVector<f64>> = gens
        .iter()
        .map(|(_, v)| svec(&SymMat::outer(v)).into_data())
        .collect();
    let a = linalg::columns(&cols, svec_len(ps));
    let sol = nnls(&a, svec(&target).data(), tol.zero_tol * 1e-3);
    let strict_residual = sol.residual;
    let strict_weights = (strict_residual <= tol.zero_tol).then(|| {
        gens.iter()
            .zip(sol.x.iter())
            .map(|((k, _), &x)| PairWeight {
                kind: *k,
                alpha: if matches!(k, GeneratorKind::Pair { .. }) {
                    x + DELTA_STRICT
                } else {
                    x
                },
            })
            .filter(|pw| pw.alpha > 0.0)
            .collect()
    });

    let taus: Vec<DVector<f64>> = b
        .members
        .iter()
        .map(|j| restrict_vec(&zs.vertices[j], &b.support))
        .collect();
    let range = range_check(w, &taus, tol);

    let mut separating = None;
    let verdict = if strict_weights.is_some() {
        Verdict::Pass
    } else if !unique {
        Verdict::Unknown
    } else if !range.holds() {
        Verdict::Fail
    } else {
        separating = separating_functional(zs, dd, s, &taus, tol);
        if separating.is_some() {
            Verdict::Fail
        } else {
            Verdict::Unknown
        }
    };
    BlockStrictness {
        block: Index(s),
        verdict,
        strict_residual,
        strict_weights,
        range,
        separating,
    }
}

fn range_check(w: &SymMat, taus: &[DVector<f64>], tol: &Tolerances) -> RangeCheck {
    let ps = w.p();
    let span = linalg::columns(taus, ps);
    let rank_span = linalg::rank(&span, tol.rank_tol);
    let rank_w = linalg::rank(w.matrix(), tol.rank_tol);
    // project W's columns onto span{τ}; W ⊆ span iff nothing is left over
    let svd = linalg::svd_full(&span.transpose());
    let basis = svd.v.columns(0, rank_span).into_owned();
    let proj = &basis * (basis.transpose() * w.matrix());
    let leftover = linalg::max_abs(&(w.matrix() - proj));
    RangeCheck {
        rank_w,
        rank_span,
        contained: leftover <= tol.zero_tol.max(tol.rank_tol * w.max_abs()),
    }
}

/// Searches for `Z` with `g_ij = τ_iᵀZτ_j ≥ 0` on `V(J(s))`, `Σ g = 1` and
/// `Z • W⁰(s) = 0`, as a nonnegative least-squares feasibility problem in `g`.
fn separating_functional(
    zs: &ZeroStructure,
    dd: &DualDecomposition,
    s: usize,
    taus: &[DVector<f64>],
    tol: &Tolerances,
) -> Option<SeparatingFunctional> {
    let b = &zs.blocks[s];
    let ps = b.p_block();
    let members = b.members.as_slice();
    let pos = |j: usize| {
        members
            .iter()
            .position(|&m| m == j)
            .expect("member of block")
    };
    let pairs: Vec<(usize, usize)> = pair_set(&b.members)
        .into_iter()
        .map(|(i, j)| (pos(i), pos(j)))
        .collect();
    let np = pairs.len();

    // g = L svec(Z)
    let mut l = DMatrix::zeros(np, svec_len(ps));
    for (r, &(i, j)) in pairs.iter().enumerate() {
        let outer = &taus[i] * taus[j].transpose();
        let sym = SymMat::new((&outer + outer.transpose()) * 0.5);
        l.set_row(r, &svec(&sym).data().transpose());
    }
    let n = linalg::null_space(
        &l.transpose(),
        tol.rank_tol * linalg::max_abs(&l).max(1.0) * np as f64,
    );

    // Z • W = Σ_terms w (Σ β_iβ_j τ_iᵀZτ_j) = cᵀg
    let mut c = DVector::zeros(np);
    for t in dd.terms.iter().filter(|t| t.block.0 == s) {
        let beta = t.kind.coefficients(&b.members);
        for &(i, bi) in &beta {
            for &(j, bj) in &beta {
                let (a, bb) = (pos(i).min(pos(j)), pos(i).max(pos(j)));
                let r = pairs
                    .iter()
                    .position(|&pr| pr == (a, bb))
                    .expect("pair in V(J(s))");
                c[r] += t.weight * bi * bj;
            }
        }
    }
    let cmax = c.amax();
    if cmax > 0.0 {
        c /= cmax;
    }

    let rows = n.ncols() + 2;
    let mut a = DMatrix::zeros(rows, np);
    for k in 0..n.ncols() {
        a.set_row(k, &n.column(k).transpose());
    }
    a.row_mut(n.ncols()).fill(1.0);
    a.set_row(n.ncols() + 1, &c.transpose());
    let mut rhs = DVector::zeros(rows);
    rhs[n.ncols()] = 1.0;
    let sol = nnls(&a, &rhs, 1e-15);
    if sol.residual > 1e3 * tol.zero_tol {
        return None;
    }
    let zvec = linalg::lstsq(&l, &sol.x, 1e-12);
    let z = crate::symcore::smat_slice(zvec.as_slice(), ps).ok()?;
    let pair_values: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| taus[i].dot(&(z.matrix() * &taus[j])))
        .collect();
    let inner_with_w = z.dot(&dd.restricted[s]);
    let scale = z.max_abs().max(1.0);
    let ok = pair_values
        .iter()
        .all(|&g| g >= -1e3 * tol.zero_tol * scale)
        && pair_values.iter().any(|&g| g > 1e-6)
        && inner_with_w.abs() <= 1e3 * tol.zero_tol * scale;
    ok.then_some(SeparatingFunctional {
        z,
        pair_values,
        inner_with_w,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FactorOutcome {
    Found {
        #[serde(with = "wire::dmat")]
        factor: DMatrix<f64>,
        theta: f64,
        residual: f64,
    },
    Unavailable {
        reason: String,
    },
}

impl FactorOutcome {
    pub fn factor(&self) -> Option<&DMatrix<f64>> {
        match self {
            FactorOutcome::Found { factor, .. } => Some(factor),
            FactorOutcome::Unavailable { .. } => None,
        }
    }
}

/// Entrywise-positive factor `𝓜` with `𝓜𝓜ᵀ = W`, obtained by shifting the
/// weighted generators `c_k = √w_k g_k` towards `t̂ = Σ c_k` and rescaling.
pub fn positive_factorization(
    w: &SymMat,
    generators: &[DVector<f64>],
    weights: &[f64],
    tol: &Tolerances,
) -> Result<FactorOutcome> {
    let st = psd_status(w, tol);
    if !st.is_psd() {
        return Err(Error::NotPsd {
            lambda_min: st.lambda_min,
        });
    }
    if generators.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: generators.len(),
            found: weights.len(),
        });
    }
    let p = w.p();
    if let Some((i, g)) = generators.iter().enumerate().find(|(_, g)| g.len() != p) {
        return Err(Error::InvalidGenerator {
            index: i,
            reason: format!("length {} does not match order {}", g.len(), p),
        });
    }
    let cols: Vec<DVector<f64>> = generators
        .iter()
        .zip(weights)
        .filter(|(_, &wt)| wt > 0.0)
        .map(|(g, &wt)| g * wt.sqrt())
        .collect();
    if cols.is_empty() {
        return Ok(FactorOutcome::Unavailable {
            reason: "no generator carries positive weight".into(),
        });
    }
    let n = cols.len();
    let t_hat = cols.iter().fold(DVector::zeros(p), |acc, c| acc + c);
    let target = SymMat::outer(&t_hat);
    let accept_tol = 10.0 * tol.zero_tol;

    for &theta in &THETA_GRID {
        let shifted: Vec<DVector<f64>> = cols.iter().map(|c| c + &t_hat * theta).collect();
        let mu: DVector<f64> = if theta == 0.0 {
            DVector::from_element(n, 1.0)
        } else {
            let basis: Vec<DVector<f64>> = shifted
                .iter()
                .map(|v| svec(&SymMat::outer(v)).into_data())
                .collect();
            let a = linalg::columns(&basis, svec_len(p));
            let beta = linalg::lstsq(&a, svec(&target).data(), 1e-12);
            beta.map(|b| 1.0 - (2.0 * theta + theta * theta * n as f64) * b)
        };
        if mu.iter().any(|&m| m <= 0.0) {
            continue;
        }
        let mut factor = DMatrix::zeros(p, n);
        for (k, v) in shifted.iter().enumerate() {
            factor.set_column(k, &(v * mu[k].sqrt()));
        }
        if factor.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let residual = (&factor * factor.transpose() - w.matrix()).norm();
        if residual <= accept_tol {
            return Ok(FactorOutcome::Found {
                factor,
                theta,
                residual,
            });
        }
    }
    Ok(FactorOutcome::Unavailable {
        reason: "no shift on the grid gives an entrywise-positive exact factor".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlignOutcome {
    Aligned {
        #[serde(with = "wire::dmat")]
        omega: DMatrix<f64>,
        /// `B` after widening to the common column count.
        #[serde(with = "wire::dmat")]
        b: DMatrix<f64>,
        #[serde(with = "wire::dmat")]
        m: DMatrix<f64>,
        residual: f64,
        orthogonality_error: f64,
    },
    Fail {
        residual: f64,
    },
}

/// Splits the first column into `k` copies scaled by `1/√k`, keeping `BBᵀ`.
pub fn widen(b: &DMatrix<f64>, cols: usize) -> DMatrix<f64> {
    let (p, m) = b.shape();
    if cols <= m || m == 0 {
        return b.clone();
    }
    let k = cols - m + 1;
    let mut out = DMatrix::zeros(p, cols);
    let first = b.column(0) / (k as f64).sqrt();
    for c in 0..k {
        out.set_column(c, &first);
    }
    for c in 1..m {
        out.set_column(k + c - 1, &b.column(c));
    }
    out
}

/// Orthogonal `Ω` with `BΩ = M`, given `BBᵀ = MMᵀ`.
pub fn align_factorizations(
    b: &DMatrix<f64>,
    m: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<AlignOutcome> {
    if b.nrows() != m.nrows() {
        return Err(Error::OrderMismatch {
            expected: b.nrows(),
            found: m.nrows(),
        });
    }
    let gram_gap = (b * b.transpose() - m * m.transpose()).norm();
    if gram_gap > tol.zero_tol {
        return Ok(AlignOutcome::Fail { residual: gram_gap });
    }
    let width = b.ncols().max(m.ncols());
    let bw = widen(b, width);
    let mw = widen(m, width);
    let svd = linalg::svd_full(&(bw.transpose() * &mw));
    let omega = &svd.u * svd.v.transpose();
    let residual = (&bw * &omega - &mw).norm();
    let orthogonality_error = (omega.transpose() * &omega - DMatrix::identity(width, width)).norm();
    if residual > 1e-8 || orthogonality_error > 1e-10 {
        return Ok(AlignOutcome::Fail { residual });
    }
    Ok(AlignOutcome::Aligned {
        omega,
        b: bw,
        m: mw,
        residual,
        orthogonality_error,
    })
}
