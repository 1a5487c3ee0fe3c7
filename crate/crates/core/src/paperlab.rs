//! Reference scenarios: a 3×3 worked example with two blocks, the 5×5
//! trigonometric family `H(θ)`, and five pairs where exactly one
//! non-degeneracy hypothesis breaks. Each scenario carries its anchor, an
//! optional ε-path, and a list of expectations that [`run_scenario`] checks
//! one by one.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::complement::{
    check_assumptions, decompose_dual, AssumptionReport, DualDecomposition, Verdict,
};
use crate::cones::{cp_membership, is_copositive, CpVerdict};
use crate::defeq::{rank_certificate, verify_forward, DefiningSystem, PathPoint, WPathPoint};
use crate::error::{Error, Result};
use crate::indices::IndexSet;
use crate::symcore::{lambda_min, SymMat, Tolerances};
use crate::zerostruct::ZeroStructure;

/// Registered scenario names, in listing order.
pub const SCENARIO_NAMES: [&str; 7] = [
    "s4",
    "hildebrand",
    "violation1",
    "violation2",
    "violation3",
    "violation4",
    "violation5",
];

/// ε values sampled along every path.
pub const EPS_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.01];

/// Default parameter of the `H(θ)` family.
pub const THETA_STAR: [f64; 5] = [PI / 5.0; 5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    J,
    Jj,
    Jjj,
    CondI,
    CondII,
    CondIII,
}

impl Check {
    fn label(&self) -> &'static str {
        match self {
            Check::J => "assumption j",
            Check::Jj => "assumption jj",
            Check::Jjj => "assumption jjj",
            Check::CondI => "condition i",
            Check::CondII => "condition ii",
            Check::CondIII => "condition iii",
        }
    }

    fn pick(&self, r: &AssumptionReport) -> Verdict {
        match self {
            Check::J => r.j.verdict,
            Check::Jj => r.jj.verdict,
            Check::Jjj => r.jjj.verdict,
            Check::CondI => r.cond_i.verdict,
            Check::CondII => r.cond_ii.verdict,
            Check::CondIII => r.cond_iii.verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// `|X⁰ • U⁰| ≤ 1e-10`.
    Complementary,
    /// Enumerated vertices equal this set (any order) to 1e-8 in ℓ∞.
    Vertices {
        vertices: Vec<Vec<f64>>,
    },
    Blocks {
        blocks: Vec<IndexSet>,
    },
    Supports {
        supports: Vec<IndexSet>,
    },
    ContactSets {
        contact_sets: Vec<IndexSet>,
    },
    /// Block components of `U⁰`, to 1e-9.
    Components {
        components: Vec<SymMat>,
    },
    Verdict {
        check: Check,
        verdict: Verdict,
    },
    Dimensions {
        p_star: usize,
        m: usize,
    },
    FullRowRank,
    /// `X⁰ = aaᵀ + bbᵀ` to 1e-10.
    SumOfSquares {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Rank {
        rank: usize,
    },
    /// `|X(ε) • U(ε)| ≤ 1e-10` at every path point.
    PathComplementary,
    /// `‖X(ε)U(ε) + U(ε)X(ε)‖_F > 1e-3` and no `W(s, ε)` solves the block
    /// equations, at every path point.
    PathAnticommutatorFails,
    /// `λ_min(X(ε)) < −1e-6` at every path point.
    PathNotPsd,
    /// `U(ε)` has nonzero entries outside the anchor's block supports, so no
    /// block reconstruction exists, at every path point.
    PathLeavesSupport,
    /// `X(ε)` is not copositive at these ε, with a verified witness.
    PathNotCopositive {
        eps: Vec<f64>,
    },
    /// Some `W(s, ε)` is not completely positive at these ε.
    PathBlockNotCp {
        eps: Vec<f64>,
    },
    /// The block equations hold at every path point to `zero_tol`.
    PathEquationsHold,
}

impl Expectation {
    pub fn label(&self) -> String {
        match self {
            Expectation::Complementary => "anchor complementarity".into(),
            Expectation::Vertices { vertices } => format!("{} zero vertices", vertices.len()),
            Expectation::Blocks { blocks } => format!("blocks {}", fmt_sets(blocks)),
            Expectation::Supports { supports } => format!("block supports {}", fmt_sets(supports)),
            Expectation::ContactSets { contact_sets } => {
                format!("contact sets {}", fmt_sets(contact_sets))
            }
            Expectation::Components { components } => {
                format!("{} dual components", components.len())
            }
            Expectation::Verdict { check, verdict } => format!("{} = {}", check.label(), verdict),
            Expectation::Dimensions { p_star, m } => format!("dimensions p*={p_star}, m={m}"),
            Expectation::FullRowRank => "jacobian has full row rank".into(),
            Expectation::SumOfSquares { .. } => "X0 = aa^T + bb^T".into(),
            Expectation::Rank { rank } => format!("rank X0 = {rank}"),
            Expectation::PathComplementary => "complementarity along path".into(),
            Expectation::PathAnticommutatorFails => "anticommutator nonzero along path".into(),
            Expectation::PathNotPsd => "X(eps) not PSD along path".into(),
            Expectation::PathLeavesSupport => "U(eps) leaves block supports".into(),
            Expectation::PathNotCopositive { eps } => {
                format!("X(eps) not copositive at eps={eps:?}")
            }
            Expectation::PathBlockNotCp { eps } => format!("W(s,eps) not CP at eps={eps:?}"),
            Expectation::PathEquationsHold => "block equations hold along path".into(),
        }
    }
}

fn fmt_sets(sets: &[IndexSet]) -> String {
    let parts: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub x0: SymMat,
    pub u0: SymMat,
    /// `(X(ε), U(ε))` pairs.
    pub forward_path: Vec<PathPoint>,
    /// `(X(ε), {W(s, ε)})` tuples over the anchor's blocks.
    pub backward_path: Vec<WPathPoint>,
    pub expectations: Vec<Expectation>,
}

fn sym(rows: &[&[f64]]) -> SymMat {
    SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("fixture matrices are symmetric")
}

fn set1(v: &[usize]) -> IndexSet {
    IndexSet::from_one_based(v)
}

fn normalized(v: &DVector<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn build(name: &str) -> Result<Scenario> {
    match name {
        "s4" => Ok(example_s4()),
        "hildebrand" => hildebrand(&THETA_STAR),
        "violation1" => Ok(violation_j_forward()),
        "violation2" => Ok(violation_jjj_forward()),
        "violation3" => Ok(violation_j_backward()),
        "violation4" => Ok(violation_jjj_backward()),
        "violation5" => Ok(violation_cond_ii()),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// The five violation scenarios, in order.
pub fn violation_scenarios() -> Vec<Scenario> {
    SCENARIO_NAMES[2..]
        .iter()
        .map(|n| build(n).expect("registered"))
        .collect()
}

/// 3×3 pair with two overlapping-support blocks; all hypotheses hold.
pub fn example_s4() -> Scenario {
    let a = DVector::from_vec(vec![1.0, -1.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    let c = DVector::from_vec(vec![0.0, 1.0, 1.0]);
    let x0 = &sym(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]) + &SymMat::outer(&a);
    let bb = SymMat::outer(&b);
    let cc = SymMat::outer(&c);
    let u0 = &bb + &cc;
    let mut expectations = vec![
        Expectation::Complementary,
        Expectation::Vertices {
            vertices: vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]],
        },
        Expectation::Blocks {
            blocks: vec![set1(&[1]), set1(&[2])],
        },
        Expectation::Supports {
            supports: vec![set1(&[1, 2]), set1(&[2, 3])],
        },
        Expectation::ContactSets {
            contact_sets: vec![set1(&[1, 2]), set1(&[2, 3])],
        },
        Expectation::Components {
            components: vec![bb, cc],
        },
    ];
    for check in [
        Check::J,
        Check::Jj,
        Check::Jjj,
        Check::CondI,
        Check::CondII,
        Check::CondIII,
    ] {
        expectations.push(Expectation::Verdict {
            check,
            verdict: Verdict::Pass,
        });
    }
    expectations.push(Expectation::Dimensions { p_star: 6, m: 6 });
    expectations.push(Expectation::FullRowRank);
    Scenario {
        name: "s4".into(),
        description: "3x3 pair with two blocks sharing index 2; every hypothesis holds".into(),
        forward_path: Vec::new(),
        backward_path: Vec::new(),
        x0,
        u0,
        expectations,
    }
}

/// `H(θ)` for arbitrary `θ`.
pub fn hildebrand_matrix(t: &[f64; 5]) -> SymMat {
    let [t1, t2, t3, t4, t5] = *t;
    let c = f64::cos;
    sym(&[
        &[1.0, -c(t4), c(t4 + t5), c(t2 + t3), -c(t3)],
        &[-c(t4), 1.0, -c(t5), c(t1 + t5), c(t4 + t3)],
        &[c(t4 + t5), -c(t5), 1.0, -c(t1), c(t1 + t2)],
        &[c(t3 + t2), c(t1 + t5), -c(t1), 1.0, -c(t2)],
        &[-c(t3), c(t3 + t4), c(t1 + t2), -c(t2), 1.0],
    ])
}

/// `(a(θ), b(θ))` with `H(θ) = aaᵀ + bbᵀ` when `Σθ = π`.
pub fn hildebrand_ab(t: &[f64; 5]) -> (DVector<f64>, DVector<f64>) {
    let [t1, t2, _, t4, t5] = *t;
    let a = DVector::from_vec(vec![
        (t4 + t5).cos(),
        -t5.cos(),
        1.0,
        -t1.cos(),
        (t1 + t2).cos(),
    ]);
    let b = DVector::from_vec(vec![
        (t4 + t5).sin(),
        -t5.sin(),
        0.0,
        t1.sin(),
        -(t1 + t2).sin(),
    ]);
    (a, b)
}

/// The five unnormalized zeros `τ(j, θ)`.
pub fn hildebrand_taus(t: &[f64; 5]) -> Vec<DVector<f64>> {
    let [t1, t2, t3, t4, t5] = *t;
    let s = f64::sin;
    vec![
        DVector::from_vec(vec![s(t5), s(t4 + t5), s(t4), 0.0, 0.0]),
        DVector::from_vec(vec![0.0, s(t1), s(t1 + t5), s(t5), 0.0]),
        DVector::from_vec(vec![0.0, 0.0, s(t2), s(t1 + t2), s(t1)]),
        DVector::from_vec(vec![s(t2), 0.0, 0.0, s(t3), s(t3 + t2)]),
        DVector::from_vec(vec![s(t4 + t3), s(t3), 0.0, 0.0, s(t4)]),
    ]
}

/// `U(θ) = Σ_j τ(j,θ)τ(j,θ)ᵀ`.
pub fn hildebrand_dual(t: &[f64; 5]) -> SymMat {
    hildebrand_taus(t)
        .iter()
        .fold(SymMat::zeros(5), |acc, v| &acc + &SymMat::outer(v))
}

/// `θ(ε) = (θ₁ − ε, θ₂, …, θ₅)`.
pub fn theta_path(theta: &[f64; 5], eps: f64) -> [f64; 5] {
    let mut t = *theta;
    t[0] -= eps;
    t
}

fn hildebrand_path(theta: &[f64; 5]) -> Vec<PathPoint> {
    EPS_GRID
        .iter()
        .filter(|&&eps| eps < theta[0])
        .map(|&eps| {
            let t = theta_path(theta, eps);
            PathPoint {
                eps,
                x: hildebrand_matrix(&t),
                u: hildebrand_dual(&t),
            }
        })
        .collect()
}

/// Validated `H(θ)` scenario; requires `θ > 0` and `Σθ = π`.
pub fn hildebrand(theta: &[f64; 5]) -> Result<Scenario> {
    if theta.iter().any(|&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::InvalidParameter(
            "every theta component must be positive".into(),
        ));
    }
    let sum: f64 = theta.iter().sum();
    if (sum - PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "theta must sum to pi, got {sum}"
        )));
    }
    let (a, b) = hildebrand_ab(theta);
    let vertices = hildebrand_taus(theta).iter().map(normalized).collect();
    let expectations = vec![
        Expectation::SumOfSquares {
            a: a.iter().copied().collect(),
            b: b.iter().copied().collect(),
        },
        Expectation::Rank { rank: 2 },
        Expectation::Complementary,
        Expectation::Vertices { vertices },
        Expectation::Blocks {
            blocks: vec![set1(&[1, 2, 3, 4, 5])],
        },
        Expectation::Supports {
            supports: vec![set1(&[1, 2, 3, 4, 5])],
        },
        Expectation::Verdict {
            check: Check::J,
            verdict: Verdict::Fail,
        },
        Expectation::Verdict {
            check: Check::Jj,
            verdict: Verdict::Pass,
        },
        Expectation::Verdict {
            check: Check::Jjj,
            verdict: Verdict::Pass,
        },
        Expectation::Dimensions { p_star: 15, m: 15 },
        Expectation::PathComplementary,
        Expectation::PathAnticommutatorFails,
        Expectation::PathNotPsd,
    ];
    Ok(Scenario {
        name: "hildebrand".into(),
        description: "5x5 family H(theta) at theta*; the dual has no strictly positive representation".into(),
        x0: hildebrand_matrix(theta),
        u0: hildebrand_dual(theta),
        forward_path: hildebrand_path(theta),
        backward_path: Vec::new(),
        expectations,
    })
}

/// Strictness fails; along `θ(ε)` the block equations have no solution.
pub fn violation_j_forward() -> Scenario {
    let theta = THETA_STAR;
    Scenario {
        name: "violation1".into(),
        description: "H(theta(eps)) path: complementary pairs that violate the block equations"
            .into(),
        x0: hildebrand_matrix(&theta),
        u0: hildebrand_dual(&theta),
        forward_path: hildebrand_path(&theta),
        backward_path: Vec::new(),
        expectations: vec![
            Expectation::Complementary,
            Expectation::Verdict {
                check: Check::J,
                verdict: Verdict::Fail,
            },
            Expectation::Verdict {
                check: Check::Jj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jjj,
                verdict: Verdict::Pass,
            },
            Expectation::PathComplementary,
            Expectation::PathNotPsd,
            Expectation::PathAnticommutatorFails,
        ],
    }
}

/// Contact set strictly larger than the block support; the path leaves it.
pub fn violation_jjj_forward() -> Scenario {
    let x0 = sym(&[&[1.0, -1.0, 0.0], &[-1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let tau = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    let u0 = SymMat::outer(&tau);
    let forward_path = EPS_GRID
        .iter()
        .map(|&eps| {
            let a = DVector::from_vec(vec![1.0, -1.0, eps]);
            let b = DVector::from_vec(vec![0.0, -eps, 1.0]);
            let t = DVector::from_vec(vec![1.0 - eps * eps, 1.0, eps]);
            PathPoint {
                eps,
                x: &SymMat::outer(&a) + &SymMat::outer(&b),
                u: SymMat::outer(&t),
            }
        })
        .collect();
    Scenario {
        name: "violation2".into(),
        description: "3x3 pair with M(1) larger than P*(1); the path leaves the block support"
            .into(),
        x0,
        u0,
        forward_path,
        backward_path: Vec::new(),
        expectations: vec![
            Expectation::Complementary,
            Expectation::Vertices {
                vertices: vec![vec![0.5, 0.5, 0.0]],
            },
            Expectation::Supports {
                supports: vec![set1(&[1, 2])],
            },
            Expectation::ContactSets {
                contact_sets: vec![set1(&[1, 2, 3])],
            },
            Expectation::Verdict {
                check: Check::J,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jjj,
                verdict: Verdict::Fail,
            },
            Expectation::PathComplementary,
            Expectation::PathLeavesSupport,
        ],
    }
}

/// Rank-one dual on a three-vertex block; the block equations admit
/// non-copositive `X(ε)`.
pub fn violation_j_backward() -> Scenario {
    let x0 = sym(&[
        &[1.0, 1.0, 1.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
    ]);
    let e = DVector::from_vec(vec![0.0, 1.0, 1.0, 1.0]);
    let w = SymMat::from_fn(3, |_, _| 1.0);
    let backward_path = EPS_GRID
        .iter()
        .map(|&eps| WPathPoint {
            eps,
            x: sym(&[
                &[1.0, 1.0, 1.0, 1.0],
                &[1.0, 0.0, -eps, eps],
                &[1.0, -eps, 0.0, eps],
                &[1.0, eps, eps, -2.0 * eps],
            ]),
            ws: vec![w.clone()],
        })
        .collect();
    Scenario {
        name: "violation3".into(),
        description:
            "4x4 pair with a rank-one dual; block equations hold but X(eps) is not copositive"
                .into(),
        x0,
        u0: SymMat::outer(&e),
        forward_path: Vec::new(),
        backward_path,
        expectations: vec![
            Expectation::Complementary,
            Expectation::Vertices {
                vertices: vec![
                    vec![0.0, 1.0, 0.0, 0.0],
                    vec![0.0, 0.0, 1.0, 0.0],
                    vec![0.0, 0.0, 0.0, 1.0],
                ],
            },
            Expectation::Blocks {
                blocks: vec![set1(&[1, 2, 3])],
            },
            Expectation::Supports {
                supports: vec![set1(&[2, 3, 4])],
            },
            Expectation::ContactSets {
                contact_sets: vec![set1(&[2, 3, 4]); 3],
            },
            Expectation::Verdict {
                check: Check::J,
                verdict: Verdict::Fail,
            },
            Expectation::Verdict {
                check: Check::Jj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jjj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::CondI,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::CondII,
                verdict: Verdict::Pass,
            },
            Expectation::PathEquationsHold,
            Expectation::PathNotCopositive {
                eps: EPS_GRID.to_vec(),
            },
        ],
    }
}

/// Contact sets exceed the block support; the block equations admit
/// non-copositive `X(ε)`.
pub fn violation_jjj_backward() -> Scenario {
    let x0 = SymMat::diag(&[1.0, 0.0, 0.0]);
    let u0 = sym(&[&[0.0, 0.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
    let w = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let backward_path = EPS_GRID
        .iter()
        .map(|&eps| WPathPoint {
            eps,
            x: sym(&[&[1.0, -eps, 0.0], &[-eps, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
            ws: vec![w.clone()],
        })
        .collect();
    Scenario {
        name: "violation4".into(),
        description: "3x3 pair with M(j) larger than P*(1); block equations hold but X(eps) is not copositive".into(),
        x0,
        u0,
        forward_path: Vec::new(),
        backward_path,
        expectations: vec![
            Expectation::Complementary,
            Expectation::Vertices {
                vertices: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            },
            Expectation::Supports {
                supports: vec![set1(&[2, 3])],
            },
            Expectation::ContactSets {
                contact_sets: vec![set1(&[1, 2, 3]); 2],
            },
            Expectation::Verdict {
                check: Check::J,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jjj,
                verdict: Verdict::Fail,
            },
            Expectation::PathEquationsHold,
            Expectation::PathNotCopositive { eps: EPS_GRID.to_vec() },
        ],
    }
}

/// `W⁰ = E(2)` has no entrywise-positive factor; the path leaves CP.
pub fn violation_cond_ii() -> Scenario {
    let x0 = sym(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
    let backward_path = EPS_GRID
        .iter()
        .map(|&eps| WPathPoint {
            eps,
            x: x0.clone(),
            ws: vec![sym(&[&[1.0, -eps], &[-eps, 1.0]])],
        })
        .collect();
    Scenario {
        name: "violation5".into(),
        description: "3x3 pair whose block dual is the identity; W(1,eps) leaves CP".into(),
        x0,
        u0: SymMat::diag(&[0.0, 1.0, 1.0]),
        forward_path: Vec::new(),
        backward_path,
        expectations: vec![
            Expectation::Complementary,
            Expectation::Vertices {
                vertices: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            },
            Expectation::Supports {
                supports: vec![set1(&[2, 3])],
            },
            Expectation::ContactSets {
                contact_sets: vec![set1(&[2, 3]); 2],
            },
            Expectation::Verdict {
                check: Check::Jj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::Jjj,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::CondI,
                verdict: Verdict::Pass,
            },
            Expectation::Verdict {
                check: Check::CondII,
                verdict: Verdict::Fail,
            },
            Expectation::Verdict {
                check: Check::CondIII,
                verdict: Verdict::Pass,
            },
            Expectation::PathEquationsHold,
            Expectation::PathBlockNotCp {
                eps: EPS_GRID.to_vec(),
            },
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub name: String,
    pub outcomes: Vec<ExpectationOutcome>,
}

impl ScenarioRun {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// Anchor pipeline results shared by the expectation checks.
pub struct Analysis {
    pub zs: Result<ZeroStructure>,
    pub dd: Result<DualDecomposition>,
    pub report: Result<AssumptionReport>,
    pub system: Result<DefiningSystem>,
}

impl Analysis {
    pub fn run(x0: &SymMat, u0: &SymMat, tol: &Tolerances) -> Analysis {
        let zs = ZeroStructure::compute(x0, tol);
        let dd = zs
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|zs| decompose_dual(u0, zs, tol));
        let report = match (&zs, &dd) {
            (Ok(zs), Ok(dd)) => check_assumptions(x0, u0, zs, dd, tol),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        let system = match (&zs, &dd) {
            (Ok(zs), Ok(dd)) => DefiningSystem::build(zs, dd),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        Analysis {
            zs,
            dd,
            report,
            system,
        }
    }
}

fn outcome(label: String, r: Result<(bool, String)>) -> ExpectationOutcome {
    match r {
        Ok((passed, detail)) => ExpectationOutcome {
            label,
            passed,
            detail,
        },
        Err(e) => ExpectationOutcome {
            label,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn get<T>(r: &Result<T>) -> Result<&T> {
    r.as_ref().map_err(Clone::clone)
}

/// Evaluates every expectation of the scenario.
pub fn run_scenario(sc: &Scenario, tol: &Tolerances) -> ScenarioRun {
    let an = Analysis::run(&sc.x0, &sc.u0, tol);
    let outcomes = sc
        .expectations
        .iter()
        .map(|e| outcome(e.label(), check_expectation(sc, &an, e, tol)))
        .collect();
    ScenarioRun {
        name: sc.name.clone(),
        outcomes,
    }
}

fn sets_equal(found: &[IndexSet], expected: &[IndexSet]) -> (bool, String) {
    (found == expected, format!("found {}", fmt_sets(found)))
}

fn check_expectation(
    sc: &Scenario,
    an: &Analysis,
    e: &Expectation,
    tol: &Tolerances,
) -> Result<(bool, String)> {
    match e {
        Expectation::Complementary => {
            let v = sc.x0.dot(&sc.u0).abs();
            Ok((v <= 1e-10, format!("|X0 . U0| = {v:.3e}")))
        }
        Expectation::Vertices { vertices } => {
            let found = &get(&an.zs)?.vertices;
            let expected: Vec<DVector<f64>> = vertices
                .iter()
                .map(|v| DVector::from_column_slice(v))
                .collect();
            let matched = found.len() == expected.len()
                && expected
                    .iter()
                    .all(|v| found.iter().any(|f| (f - v).amax() <= 1e-8));
            Ok((matched, format!("found {} vertices", found.len())))
        }
        Expectation::Blocks { blocks } => {
            let found: Vec<IndexSet> = get(&an.zs)?
                .blocks
                .iter()
                .map(|b| b.members.clone())
                .collect();
            Ok(sets_equal(&found, blocks))
        }
        Expectation::Supports { supports } => {
            let found: Vec<IndexSet> = get(&an.zs)?
                .blocks
                .iter()
                .map(|b| b.support.clone())
                .collect();
            Ok(sets_equal(&found, supports))
        }
        Expectation::ContactSets { contact_sets } => {
            Ok(sets_equal(&get(&an.zs)?.contact_sets, contact_sets))
        }
        Expectation::Components { components } => {
            let dd = get(&an.dd)?;
            let err = if dd.components.len() == components.len() {
                dd.components
                    .iter()
                    .zip(components)
                    .map(|(a, b)| (a - b).max_abs())
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            Ok((err <= 1e-9, format!("max component error {err:.3e}")))
        }
        Expectation::Verdict { check, verdict } => {
            let found = check.pick(get(&an.report)?);
            Ok((found == *verdict, format!("found {found}")))
        }
        Expectation::Dimensions { p_star, m } => {
            let sys = get(&an.system)?;
            Ok((
                sys.p_star == *p_star && sys.m == *m,
                format!("p*={}, m={}, len(z)={}", sys.p_star, sys.m, sys.len()),
            ))
        }
        Expectation::FullRowRank => {
            let sys = get(&an.system)?;
            let cert = rank_certificate(sys, &sys.anchor, tol)?;
            Ok((
                cert.verdict == Verdict::Pass,
                format!(
                    "rank {} of m={}, sigma_m/sigma_1 = {:.3e}",
                    cert.rank_computed, cert.m_expected, cert.ratio
                ),
            ))
        }
        Expectation::SumOfSquares { a, b } => {
            let a = DVector::from_column_slice(a);
            let b = DVector::from_column_slice(b);
            let err = (&(&SymMat::outer(&a) + &SymMat::outer(&b)) - &sc.x0).frobenius();
            Ok((err <= 1e-10, format!("residual {err:.3e}")))
        }
        Expectation::Rank { rank } => {
            let r = crate::linalg::rank(sc.x0.matrix(), tol.rank_tol);
            Ok((r == *rank, format!("rank {r}")))
        }
        Expectation::PathComplementary => {
            let worst = sc
                .forward_path
                .iter()
                .map(|pt| pt.x.dot(&pt.u).abs())
                .fold(0.0, f64::max);
            Ok((
                !sc.forward_path.is_empty() && worst <= 1e-10,
                format!("max |X.U| = {worst:.3e}"),
            ))
        }
        Expectation::PathAnticommutatorFails => {
            let sys = get(&an.system)?;
            let fwd = verify_forward(sys, &sc.forward_path, tol)?;
            let ok = !fwd.entries.is_empty()
                && fwd.entries.iter().all(|e| {
                    e.anticommutator > 1e-3 && e.equation_residual > tol.zero_tol && !e.passed
                });
            let min_anti = fwd
                .entries
                .iter()
                .map(|e| e.anticommutator)
                .fold(f64::INFINITY, f64::min);
            Ok((ok, format!("min ||XU+UX||_F = {min_anti:.3e}")))
        }
        Expectation::PathNotPsd => {
            let worst = sc
                .forward_path
                .iter()
                .map(|pt| lambda_min(&pt.x))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((
                !sc.forward_path.is_empty() && worst < -1e-6,
                format!("max lambda_min = {worst:.3e}"),
            ))
        }
        Expectation::PathLeavesSupport => {
            let sys = get(&an.system)?;
            let fwd = verify_forward(sys, &sc.forward_path, tol)?;
            let ok = !fwd.entries.is_empty()
                && fwd.entries.iter().all(|e| {
                    e.reconstruction_residual > tol.zero_tol && e.equation_residual > tol.zero_tol
                });
            let min_l1 = fwd
                .entries
                .iter()
                .map(|e| e.reconstruction_residual)
                .fold(f64::INFINITY, f64::min);
            Ok((ok, format!("min reconstruction residual {min_l1:.3e}")))
        }
        Expectation::PathNotCopositive { eps } => {
            let mut detail = Vec::new();
            let mut ok = true;
            for &target in eps {
                let Some(pt) = sc.backward_path.iter().find(|p| p.eps == target) else {
                    ok = false;
                    detail.push(format!("eps={target}: missing"));
                    continue;
                };
                let v = is_copositive(&pt.x, tol)?;
                let witnessed = v
                    .witness()
                    .map(|t| pt.x.quad(&DVector::from_column_slice(t)) < -tol.zero_tol)
                    .unwrap_or(false);
                ok &= !v.member && witnessed;
                detail.push(format!("eps={target}: min {:.3e}", v.minimum));
            }
            Ok((ok, detail.join(", ")))
        }
        Expectation::PathBlockNotCp { eps } => {
            let zs = get(&an.zs)?;
            let mut detail = Vec::new();
            let mut ok = true;
            for &target in eps {
                let Some(pt) = sc.backward_path.iter().find(|p| p.eps == target) else {
                    ok = false;
                    detail.push(format!("eps={target}: missing"));
                    continue;
                };
                let mut any = false;
                for (s, w) in pt.ws.iter().enumerate() {
                    let gens: Vec<DVector<f64>> = crate::complement::block_generators(zs, s)
                        .into_iter()
                        .map(|(_, v)| crate::complement::restrict_vec(&v, &zs.blocks[s].support))
                        .collect();
                    any |= cp_membership(w, &gens, tol)?.verdict == CpVerdict::NotMember;
                }
                ok &= any;
                detail.push(format!(
                    "eps={target}: {}",
                    if any { "not CP" } else { "CP or unknown" }
                ));
            }
            Ok((ok, detail.join(", ")))
        }
        Expectation::PathEquationsHold => {
            let sys = get(&an.system)?;
            let mut worst: f64 = 0.0;
            for pt in &sc.backward_path {
                let z = sys.compose(&pt.x, &pt.ws)?;
                worst = worst.max(sys.residual(&z)?.amax());
            }
            Ok((
                !sc.backward_path.is_empty() && worst <= tol.zero_tol,
                format!("max residual {worst:.3e}"),
            ))
        }
    }
}
