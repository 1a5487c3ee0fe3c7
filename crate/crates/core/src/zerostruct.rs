//! Zero-set structure of a copositive matrix: the vertices `τ(j)` of the
//! convex hull of its normalized zeros, their contact sets `M(j)`, the block
//! cover `J(s)` with supports `P_*(s)`, and basis subsets `J_b(s)`.
//!
//! All indices are 0-based in memory; serialized forms are 1-based.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::is_copositive;
use crate::error::{Error, Result};
use crate::indices::{Index, IndexSet};
use crate::linalg;
use crate::nnls::nnls;
use crate::symcore::{SymMat, Tolerances};
use crate::wire;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// `J(s)`: vertex indices in the block.
    pub members: IndexSet,
    /// `P_*(s)`: union of the members' supports.
    pub support: IndexSet,
    /// `J_b(s)`: maximal independent subset of the members.
    pub basis: IndexSet,
}

impl Block {
    pub fn p_block(&self) -> usize {
        self.support.len()
    }
}

/// Witness for separation of two blocks: `k0 ∈ supp τ(i0)` but `k0 ∉ M(j0)`
/// with `i0 ∈ J(s) \ J(t)` and `j0 ∈ J(t) \ J(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub s: Index,
    pub t: Index,
    pub i0: Index,
    pub j0: Index,
    pub k0: Index,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroStructure {
    pub x: SymMat,
    #[serde(with = "wire::dvecs")]
    pub vertices: Vec<DVector<f64>>,
    pub contact_sets: Vec<IndexSet>,
    pub blocks: Vec<Block>,
    pub separation_witnesses: Vec<SeparationWitness>,
    /// True when some vertex belongs to more than one block.
    pub overlapping: bool,
}

impl ZeroStructure {
    /// Full structure computation; errors if `x` is not copositive.
    pub fn compute(x: &SymMat, tol: &Tolerances) -> Result<Self> {
        let vertices = enumerate_zero_vertices(x, tol)?;
        let contact_sets = vertices
            .iter()
            .map(|t| compute_contact_set(x, t, tol))
            .collect::<Result<Vec<_>>>()?;
        let partition = partition_blocks(&vertices, &contact_sets)?;
        let blocks = partition
            .blocks
            .iter()
            .map(|members| Block {
                members: members.clone(),
                support: block_support(&vertices, members),
                basis: basis_subset(&vertices, members, tol),
            })
            .collect();
        Ok(ZeroStructure {
            x: x.clone(),
            vertices,
            contact_sets,
            blocks,
            separation_witnesses: partition.witnesses,
            overlapping: partition.overlapping,
        })
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    pub fn support_of(&self, j: usize) -> IndexSet {
        support(&self.vertices[j])
    }
}

pub fn support(t: &DVector<f64>) -> IndexSet {
    t.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, _)| k)
        .collect()
}

/// `P_*(s)` for a set of vertex indices.
pub fn block_support(vertices: &[DVector<f64>], members: &IndexSet) -> IndexSet {
    members.iter().fold(IndexSet::default(), |acc, j| {
        acc.union(&support(&vertices[j]))
    })
}

/// Vertices of `conv T_a(X)`, normalized to unit ℓ₁ norm, sorted by support
/// (lexicographic on the 0-based index list) and then by entries descending.
pub fn enumerate_zero_vertices(x: &SymMat, tol: &Tolerances) -> Result<Vec<DVector<f64>>> {
    let verdict = is_copositive(x, tol)?;
    if !verdict.member {
        return Err(Error::NotCopositive {
            value: verdict.minimum,
            witness: verdict.witness().map(<[f64]>::to_vec).unwrap_or_default(),
        });
    }
    let p = x.p();
    let masks: Vec<u32> = (1u32..(1u32 << p)).collect();
    let per_support: Vec<Vec<DVector<f64>>> = masks
        .par_iter()
        .map(|&mask| support_polyhedron_vertices(x, mask, tol))
        .collect();

    let mut pool: Vec<DVector<f64>> = Vec::new();
    for t in per_support.into_iter().flatten() {
        if !pool.iter().any(|q| (q - &t).amax() <= tol.zero_tol) {
            pool.push(t);
        }
    }
    let mut vertices = extreme_points(pool, tol);
    vertices.sort_by(|a, b| {
        support(a)
            .as_slice()
            .cmp(support(b).as_slice())
            .then_with(|| {
                b.iter()
                    .zip(a.iter())
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(vertices)
}

/// Vertices of `{t ≥ 0, supp t ⊆ I, X_I t_I = 0, Σt = 1, (Xt)_k ≥ 0 ∀k∉I}`.
fn support_polyhedron_vertices(x: &SymMat, mask: u32, tol: &Tolerances) -> Vec<DVector<f64>> {
    let p = x.p();
    let inside: Vec<usize> = (0..p).filter(|k| mask & (1 << k) != 0).collect();
    let outside: Vec<usize> = (0..p).filter(|k| mask & (1 << k) == 0).collect();
    let xi = x.principal(&inside);
    let kernel = linalg::null_space(xi.matrix(), tol.zero_tol * x.max_abs().max(1.0));
    let k = kernel.ncols();
    if k == 0 {
        return Vec::new();
    }
    // affine parametrization c = c0 + N y of {c : 1ᵀK c = 1}
    let ones_k = DMatrix::from_fn(1, k, |_, c| kernel.column(c).sum());
    if ones_k.amax() <= tol.zero_tol {
        return Vec::new();
    }
    let c0 = linalg::lstsq(&ones_k, &DVector::from_element(1, 1.0), 1e-12);
    let n = linalg::null_space(&ones_k, 1e-12 * ones_k.amax());
    let d = n.ncols();

    // inequality rows: t_i ≥ 0 for i ∈ I and (X t)_k ≥ 0 for k ∉ I
    let x_out = DMatrix::from_fn(outside.len(), inside.len(), |r, c| {
        x.get(outside[r], inside[c])
    });
    let mut a = DMatrix::zeros(inside.len() + outside.len(), k);
    a.view_mut((0, 0), (inside.len(), k)).copy_from(&kernel);
    if !outside.is_empty() {
        a.view_mut((inside.len(), 0), (outside.len(), k))
            .copy_from(&(&x_out * &kernel));
    }
    let g = &a * &n;
    let h = -(&a * &c0);
    let rows = a.nrows();

    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut accept = |y: DVector<f64>| {
        let lhs = &g * &y;
        if (0..rows).any(|r| lhs[r] < h[r] - tol.zero_tol) {
            return;
        }
        let c = &c0 + &n * y;
        let t_in = &kernel * c;
        let mut t = DVector::zeros(p);
        for (a, &i) in inside.iter().enumerate() {
            t[i] = if t_in[a] <= tol.zero_tol {
                0.0
            } else {
                t_in[a]
            };
        }
        let s = t.sum();
        if s <= 0.0 {
            return;
        }
        t /= s;
        if x.quad(&t) > tol.zero_tol || x.mul_vec(&t).iter().any(|&v| v < -tol.zero_tol) {
            return;
        }
        if !found.iter().any(|q| (q - &t).amax() <= tol.zero_tol) {
            found.push(t);
        }
    };

    if d == 0 {
        accept(DVector::zeros(0));
        return found;
    }
    for active in combinations(rows, d) {
        let ga = g.select_rows(active.iter());
        let ha = DVector::from_iterator(d, active.iter().map(|&r| h[r]));
        if linalg::rank(&ga, 1e-10) < d {
            continue;
        }
        accept(linalg::lstsq(&ga, &ha, 1e-12));
    }
    found
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Drops points lying in the convex hull of the remaining ones.
fn extreme_points(mut pool: Vec<DVector<f64>>, tol: &Tolerances) -> Vec<DVector<f64>> {
    let threshold = (10.0 * tol.zero_tol).max(1e-8);
    let mut i = 0;
    while i < pool.len() {
        if pool.len() > 1
            && in_hull(
                &pool[i],
                pool.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, v)| v),
                threshold,
            )
        {
            pool.remove(i);
        } else {
            i += 1;
        }
    }
    pool
}

/// Whether `v` lies (within `threshold`) in the convex hull of `points`.
pub fn in_hull<'a>(
    v: &DVector<f64>,
    points: impl Iterator<Item = &'a DVector<f64>>,
    threshold: f64,
) -> bool {
    hull_distance(v, points) <= threshold
}

/// Residual of the best convex combination of `points` approximating `v`
/// (Euclidean, with the sum-to-one row weighted to be near exact).
pub fn hull_distance<'a>(v: &DVector<f64>, points: impl Iterator<Item = &'a DVector<f64>>) -> f64 {
    const WEIGHT: f64 = 1e3;
    let pts: Vec<&DVector<f64>> = points.collect();
    if pts.is_empty() {
        return f64::INFINITY;
    }
    let p = v.len();
    let mut a = DMatrix::zeros(p + 1, pts.len());
    for (c, q) in pts.iter().enumerate() {
        a.view_mut((0, c), (p, 1)).copy_from(*q);
        a[(p, c)] = WEIGHT;
    }
    let mut b = DVector::zeros(p + 1);
    b.rows_mut(0, p).copy_from(v);
    b[p] = WEIGHT;
    let sol = nnls(&a, &b, 1e-14);
    let lam = &sol.x / sol.x.sum().max(f64::MIN_POSITIVE);
    let combo: DVector<f64> = pts
        .iter()
        .zip(lam.iter())
        .fold(DVector::zeros(p), |acc, (q, &w)| acc + *q * w);
    (combo - v).amax()
}

/// `M(j) = {k : |e_kᵀXτ| ≤ zero_tol}`.
pub fn compute_contact_set(x: &SymMat, t: &DVector<f64>, tol: &Tolerances) -> Result<IndexSet> {
    if t.len() != x.p() {
        return Err(Error::LengthMismatch {
            expected: x.p(),
            found: t.len(),
        });
    }
    let value = x.quad(t);
    if value.abs() > tol.zero_tol {
        return Err(Error::NotAZero { value });
    }
    let xt = x.mul_vec(t);
    Ok((0..x.p())
        .filter(|&k| xt[k].abs() <= tol.zero_tol)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub blocks: Vec<IndexSet>,
    pub witnesses: Vec<SeparationWitness>,
    pub overlapping: bool,
}

/// Block cover as maximal cliques of the mutual-compatibility graph, with
/// conditions a)–c) re-verified on the result.
pub fn partition_blocks(vertices: &[DVector<f64>], contact_sets: &[IndexSet]) -> Result<Partition> {
    let n = vertices.len();
    if contact_sets.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: contact_sets.len(),
        });
    }
    let supports: Vec<IndexSet> = vertices.iter().map(support).collect();
    for j in 0..n {
        if !supports[j].is_subset(&contact_sets[j]) {
            return Err(Error::PartitionVerification(format!(
                "support of vertex {} is not inside its contact set",
                j + 1
            )));
        }
    }
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    i != j
                        && supports[i].is_subset(&contact_sets[j])
                        && supports[j].is_subset(&contact_sets[i])
                })
                .collect()
        })
        .collect();
    let mut blocks = maximal_cliques(&adj);
    blocks.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));

    // a) cover
    let covered = blocks
        .iter()
        .fold(IndexSet::default(), |acc, b| acc.union(b));
    if covered.len() != n {
        return Err(Error::PartitionVerification(
            "blocks do not cover all vertices".into(),
        ));
    }
    // b) block support inside every member's contact set
    for (s, b) in blocks.iter().enumerate() {
        let ps = block_support(vertices, b);
        if let Some(i) = b.iter().find(|&i| !ps.is_subset(&contact_sets[i])) {
            return Err(Error::PartitionVerification(format!(
                "block {} support not inside M({})",
                s + 1,
                i + 1
            )));
        }
    }
    // c) pairwise separation
    let mut witnesses = Vec::new();
    for s in 0..blocks.len() {
        for t in 0..blocks.len() {
            if s == t {
                continue;
            }
            let only_s: Vec<usize> = blocks[s]
                .iter()
                .filter(|&i| !blocks[t].contains(i))
                .collect();
            let only_t: Vec<usize> = blocks[t]
                .iter()
                .filter(|&j| !blocks[s].contains(j))
                .collect();
            if only_s.is_empty() || only_t.is_empty() {
                return Err(Error::PartitionVerification(format!(
                    "blocks {} and {} are nested",
                    s + 1,
                    t + 1
                )));
            }
            for &i0 in &only_s {
                let hit = only_t.iter().find_map(|&j0| {
                    supports[i0]
                        .iter()
                        .find(|&k0| !contact_sets[j0].contains(k0))
                        .map(|k0| (j0, k0))
                });
                let Some((j0, k0)) = hit else {
                    return Err(Error::PartitionVerification(format!(
                        "no separation witness for vertex {} between blocks {} and {}",
                        i0 + 1,
                        s + 1,
                        t + 1
                    )));
                };
                witnesses.push(SeparationWitness {
                    s: Index(s),
                    t: Index(t),
                    i0: Index(i0),
                    j0: Index(j0),
                    k0: Index(k0),
                });
            }
        }
    }
    let total: usize = blocks.iter().map(IndexSet::len).sum();
    Ok(Partition {
        overlapping: total > n,
        blocks,
        witnesses,
    })
}

/// Bron–Kerbosch with pivoting; isolated vertices are singleton cliques.
fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<IndexSet> {
    fn expand(
        adj: &[Vec<bool>],
        r: &mut Vec<usize>,
        p: Vec<usize>,
        x: Vec<usize>,
        out: &mut Vec<IndexSet>,
    ) {
        if p.is_empty() && x.is_empty() {
            out.push(IndexSet::new(r.clone()));
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
            .expect("p or x is nonempty");
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
        let mut p = p;
        let mut x = x;
        for v in candidates {
            r.push(v);
            let np = p.iter().copied().filter(|&w| adj[v][w]).collect();
            let nx = x.iter().copied().filter(|&w| adj[v][w]).collect();
            expand(adj, r, np, nx, out);
            r.pop();
            p.retain(|&w| w != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    if adj.is_empty() {
        return out;
    }
    expand(
        adj,
        &mut Vec::new(),
        (0..adj.len()).collect(),
        Vec::new(),
        &mut out,
    );
    out
}

/// Greedy ascending selection of a maximal independent subset of the
/// block's vertices.
pub fn basis_subset(vertices: &[DVector<f64>], block: &IndexSet, tol: &Tolerances) -> IndexSet {
    let mut chosen: Vec<usize> = Vec::new();
    for j in block.iter() {
        let mut trial: Vec<DVector<f64>> = chosen.iter().map(|&c| vertices[c].clone()).collect();
        trial.push(vertices[j].clone());
        let m = linalg::columns(&trial, vertices[j].len());
        if linalg::rank(&m, tol.rank_tol) == trial.len() {
            chosen.push(j);
        }
    }
    IndexSet::new(chosen)
}

/// `V(I) = {(i, j) : i, j ∈ I, i ≤ j}` in lexicographic order.
pub fn pair_set(block: &IndexSet) -> Vec<(usize, usize)> {
    let idx = block.as_slice();
    let mut out = Vec::with_capacity(idx.len() * (idx.len() + 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a..] {
            out.push((i, j));
        }
    }
    out
}

/// `τ(i) + τ(j)`.
pub fn bar_tau(vertices: &[DVector<f64>], i: usize, j: usize) -> DVector<f64> {
    &vertices[i] + &vertices[j]
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

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn worked_example_vertices() {
        let tol = Tolerances::default();
        let vs = enumerate_zero_vertices(&s4_x(), &tol).unwrap();
        assert_eq!(vs.len(), 2);
        assert!((&vs[0] - v(&[0.5, 0.5, 0.0])).amax() < 1e-12);
        assert!((&vs[1] - v(&[0.0, 0.5, 0.5])).amax() < 1e-12);
    }

    #[test]
    fn identity_has_no_zeros() {
        let vs = enumerate_zero_vertices(&SymMat::identity(3), &Tolerances::default()).unwrap();
        assert!(vs.is_empty());
        let zs = ZeroStructure::compute(&SymMat::identity(3), &Tolerances::default()).unwrap();
        assert!(zs.blocks.is_empty());
    }

    #[test]
    fn non_copositive_is_rejected() {
        let x = SymMat::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).unwrap();
        assert!(matches!(
            enumerate_zero_vertices(&x, &Tolerances::default()),
            Err(Error::NotCopositive { .. })
        ));
    }

    #[test]
    fn psd_kernel_segment_has_two_vertices() {
        // kernel spanned by (1,1,0) and (0,0,1): zeros form a segment
        let x = SymMat::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let vs = enumerate_zero_vertices(&x, &Tolerances::default()).unwrap();
        assert_eq!(vs.len(), 2);
        assert!((&vs[0] - v(&[0.5, 0.5, 0.0])).amax() < 1e-12);
        assert!((&vs[1] - v(&[0.0, 0.0, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn contact_sets() {
        let tol = Tolerances::default();
        let m = compute_contact_set(&s4_x(), &v(&[0.5, 0.5, 0.0]), &tol).unwrap();
        assert_eq!(m, IndexSet::new(vec![0, 1]));
        let m = compute_contact_set(&SymMat::zeros(3), &v(&[0.2, 0.3, 0.5]), &tol).unwrap();
        assert_eq!(m.len(), 3);
        let x = SymMat::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let m = compute_contact_set(&x, &v(&[0.5, 0.5, 0.0]), &tol).unwrap();
        assert_eq!(m, IndexSet::new(vec![0, 1, 2]));
        assert!(matches!(
            compute_contact_set(&SymMat::identity(3), &v(&[1.0, 0.0, 0.0]), &tol),
            Err(Error::NotAZero { .. })
        ));
    }

    #[test]
    fn worked_example_blocks() {
        let zs = ZeroStructure::compute(&s4_x(), &Tolerances::default()).unwrap();
        assert_eq!(zs.blocks.len(), 2);
        assert_eq!(zs.blocks[0].members, IndexSet::new(vec![0]));
        assert_eq!(zs.blocks[1].members, IndexSet::new(vec![1]));
        assert_eq!(zs.blocks[0].support, IndexSet::new(vec![0, 1]));
        assert_eq!(zs.blocks[1].support, IndexSet::new(vec![1, 2]));
        assert_eq!(zs.blocks[0].basis, IndexSet::new(vec![0]));
        assert!(!zs.overlapping);
        assert_eq!(zs.separation_witnesses.len(), 2);
        let w = &zs.separation_witnesses[0];
        assert_eq!((w.i0.0, w.j0.0, w.k0.0), (0, 1, 0));
    }

    #[test]
    fn single_vertex_single_block() {
        let p = partition_blocks(&[v(&[1.0, 0.0])], &[IndexSet::new(vec![0])]).unwrap();
        assert_eq!(p.blocks, vec![IndexSet::new(vec![0])]);
    }

    #[test]
    fn overlapping_cover_is_flagged() {
        // path graph 0 - 1 - 2 gives cliques {0,1} and {1,2}
        let vs = vec![
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 1.0]),
        ];
        let ms = vec![
            IndexSet::new(vec![0, 1]),
            IndexSet::new(vec![0, 1, 2]),
            IndexSet::new(vec![1, 2]),
        ];
        let p = partition_blocks(&vs, &ms).unwrap();
        assert_eq!(
            p.blocks,
            vec![IndexSet::new(vec![0, 1]), IndexSet::new(vec![1, 2])]
        );
        assert!(p.overlapping);
    }

    #[test]
    fn basis_drops_dependent_vertices() {
        let vs = vec![
            v(&[0.5, 0.5, 0.0]),
            v(&[0.5, 0.5, 0.0]),
            v(&[0.0, 0.5, 0.5]),
        ];
        let tol = Tolerances::default();
        assert_eq!(
            basis_subset(&vs, &IndexSet::new(vec![0, 1]), &tol),
            IndexSet::new(vec![0])
        );
        assert_eq!(
            basis_subset(&vs, &IndexSet::new(vec![0, 1, 2]), &tol),
            IndexSet::new(vec![0, 2])
        );
    }

    #[test]
    fn pair_sets() {
        let ps = pair_set(&IndexSet::new(vec![0, 2, 3]));
        assert_eq!(ps, vec![(0, 0), (0, 2), (0, 3), (2, 2), (2, 3), (3, 3)]);
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn structure_serializes_one_based() {
        let zs = ZeroStructure::compute(&s4_x(), &Tolerances::default()).unwrap();
        let js = serde_json::to_value(&zs).unwrap();
        assert_eq!(js["blocks"][1]["support"], serde_json::json!([2, 3]));
        let v0: Vec<f64> = serde_json::from_value(js["vertices"][0].clone()).unwrap();
        assert!((DVector::from_vec(v0) - v(&[0.5, 0.5, 0.0])).amax() < 1e-12);
    }
}
