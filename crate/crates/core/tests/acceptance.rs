//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use common::*;
use copcomp::complement::{
    check_assumptions, decompose_dual, AssumptionReport, DualDecomposition, Verdict,
};
use copcomp::cones::{cp_membership, is_copositive, CpVerdict};
use copcomp::defeq::{
    anticommutator_product_residual, check_anticommuting_pair, kernel_span_agreement,
    rank_certificate, solve_local, verify_backward, AnticommutingPairCheck, DefiningSystem,
    LocalSolution, WPathPoint,
};
use copcomp::indices::IndexSet;
use copcomp::paperlab;
use copcomp::symcore::{svec, sym_kron};
use copcomp::zerostruct::{enumerate_zero_vertices, ZeroStructure};
use copcomp::{SymMat, Tolerances};
use nalgebra::DVector;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sym(rows: &[[f64; 3]]) -> SymMat {
    SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn pipeline(
    x: &SymMat,
    u: &SymMat,
    tol: &Tolerances,
) -> Result<(ZeroStructure, DualDecomposition, AssumptionReport), String> {
    let zs = ZeroStructure::compute(x, tol).map_err(|e| e.to_string())?;
    let dd = decompose_dual(u, &zs, tol).map_err(|e| e.to_string())?;
    let rep = check_assumptions(x, u, &zs, &dd, tol).map_err(|e| e.to_string())?;
    Ok((zs, dd, rep))
}

fn set(v: &[usize]) -> IndexSet {
    IndexSet::from_one_based(v)
}

fn same_vertex_set(found: &[DVector<f64>], expected: &[DVector<f64>], tol: f64) -> bool {
    found.len() == expected.len()
        && expected
            .iter()
            .all(|e| found.iter().any(|f| (f - e).amax() <= tol))
}

/// Worked 3×3 example, entered directly.
fn criterion_1(tol: &Tolerances) -> Outcome {
    let x = sym(&[[1.0, -1.0, 2.0], [-1.0, 1.0, -1.0], [2.0, -1.0, 1.0]]);
    let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    let c = DVector::from_vec(vec![0.0, 1.0, 1.0]);
    let bb = SymMat::outer(&b);
    let cc = SymMat::outer(&c);
    let u = &bb + &cc;
    let (zs, dd, rep) = pipeline(&x, &u, tol)?;
    let expected = [
        DVector::from_vec(vec![0.5, 0.5, 0.0]),
        DVector::from_vec(vec![0.0, 0.5, 0.5]),
    ];
    ensure(same_vertex_set(&zs.vertices, &expected, 1e-9), || {
        format!("vertices {:?}", zs.vertices)
    })?;
    ensure(zs.contact_sets == vec![set(&[1, 2]), set(&[2, 3])], || {
        format!("contact sets {:?}", zs.contact_sets)
    })?;
    let members: Vec<IndexSet> = zs.blocks.iter().map(|b| b.members.clone()).collect();
    let supports: Vec<IndexSet> = zs.blocks.iter().map(|b| b.support.clone()).collect();
    ensure(members == vec![set(&[1]), set(&[2])], || {
        format!("blocks {members:?}")
    })?;
    ensure(supports == vec![set(&[1, 2]), set(&[2, 3])], || {
        format!("supports {supports:?}")
    })?;
    let comp_err = (&dd.components[0] - &bb)
        .frobenius()
        .max((&dd.components[1] - &cc).frobenius());
    ensure(comp_err <= 1e-10, || {
        format!("component error {comp_err:e}")
    })?;
    for (name, v) in [
        ("j", rep.j.verdict),
        ("jj", rep.jj.verdict),
        ("jjj", rep.jjj.verdict),
    ] {
        ensure(v == Verdict::Pass, || format!("assumption {name} = {v}"))?;
    }
    let sys = DefiningSystem::build(&zs, &dd).map_err(|e| e.to_string())?;
    ensure(sys.m == 6, || format!("m = {}", sys.m))?;
    let cert = rank_certificate(&sys, &sys.anchor, tol).map_err(|e| e.to_string())?;
    ensure(cert.rank_computed == 6 && cert.ratio > 1e-9, || {
        format!("rank {} ratio {:e}", cert.rank_computed, cert.ratio)
    })?;
    Ok(format!("m=6, rank 6, sigma_6/sigma_1 = {:.3e}", cert.ratio))
}

/// `H(θ)` and its zeros, transcribed independently of the library builders.
fn h_entries(t: [f64; 5]) -> SymMat {
    let [t1, t2, t3, t4, t5] = t;
    let c = f64::cos;
    let rows = vec![
        vec![1.0, -c(t4), c(t4 + t5), c(t2 + t3), -c(t3)],
        vec![-c(t4), 1.0, -c(t5), c(t1 + t5), c(t4 + t3)],
        vec![c(t4 + t5), -c(t5), 1.0, -c(t1), c(t1 + t2)],
        vec![c(t3 + t2), c(t1 + t5), -c(t1), 1.0, -c(t2)],
        vec![-c(t3), c(t3 + t4), c(t1 + t2), -c(t2), 1.0],
    ];
    SymMat::from_rows(&rows).unwrap()
}

fn h_zeros(t: [f64; 5]) -> Vec<DVector<f64>> {
    let [t1, t2, t3, t4, t5] = t;
    let s = f64::sin;
    [
        [s(t5), s(t4 + t5), s(t4), 0.0, 0.0],
        [0.0, s(t1), s(t1 + t5), s(t5), 0.0],
        [0.0, 0.0, s(t2), s(t1 + t2), s(t1)],
        [s(t2), 0.0, 0.0, s(t3), s(t3 + t2)],
        [s(t4 + t3), s(t3), 0.0, 0.0, s(t4)],
    ]
    .iter()
    .map(|v| DVector::from_column_slice(v))
    .collect()
}

fn criterion_2(tol: &Tolerances) -> Outcome {
    let th = [PI / 5.0; 5];
    let h = h_entries(th);
    let [t1, t2, _, t4, t5] = th;
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
    let sos = (&(&SymMat::outer(&a) + &SymMat::outer(&b)) - &h).frobenius();
    ensure(sos <= 1e-10, || format!("H - aa^T - bb^T = {sos:e}"))?;
    let zeros = h_zeros(th);
    let u = zeros
        .iter()
        .fold(SymMat::zeros(5), |acc, v| &acc + &SymMat::outer(v));
    let lib = paperlab::hildebrand(&th).map_err(|e| e.to_string())?;
    ensure(
        (&lib.x0 - &h).max_abs() <= 1e-15 && (&lib.u0 - &u).max_abs() <= 1e-15,
        || "library builders disagree with the transcription".into(),
    )?;
    let inner = h.dot(&u).abs();
    ensure(inner <= 1e-10, || format!("H . U = {inner:e}"))?;
    let (zs, _, rep) = pipeline(&h, &u, tol)?;
    let normalized: Vec<DVector<f64>> = zeros.iter().map(|v| v / v.sum()).collect();
    ensure(same_vertex_set(&zs.vertices, &normalized, 1e-8), || {
        format!("vertices {:?}", zs.vertices)
    })?;
    ensure(
        zs.blocks.len() == 1 && zs.blocks[0].members == set(&[1, 2, 3, 4, 5]),
        || format!("{} blocks", zs.blocks.len()),
    )?;
    ensure(rep.j.verdict == Verdict::Fail, || {
        format!("j = {}", rep.j.verdict)
    })?;
    ensure(rep.jj.verdict == Verdict::Pass, || {
        format!("jj = {}", rep.jj.verdict)
    })?;
    ensure(rep.jjj.verdict == Verdict::Pass, || {
        format!("jjj = {}", rep.jjj.verdict)
    })?;
    let mut worst = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for eps in [0.2, 0.1, 0.05] {
        let mut t = th;
        t[0] -= eps;
        let x = h_entries(t);
        let ue = h_zeros(t)
            .iter()
            .fold(SymMat::zeros(5), |acc, v| &acc + &SymMat::outer(v));
        let comp = x.dot(&ue).abs();
        let anti = x.anticommutator(&ue).frobenius();
        let lmin = copcomp::symcore::lambda_min(&x);
        ensure(comp <= 1e-10, || format!("eps={eps}: X.U = {comp:e}"))?;
        ensure(anti > 1e-3, || format!("eps={eps}: ||XU+UX|| = {anti:e}"))?;
        ensure(lmin < -1e-6, || format!("eps={eps}: lambda_min = {lmin:e}"))?;
        worst = (worst.0.max(comp), worst.1.min(anti), worst.2.max(lmin));
    }
    Ok(format!(
        "j=FAIL jj=PASS jjj=PASS; path: max |X.U| {:.1e}, min ||XU+UX|| {:.3e}, max lambda_min {:.3e}",
        worst.0, worst.1, worst.2
    ))
}

fn criterion_3(tol: &Tolerances) -> Outcome {
    let mut notes = Vec::new();
    for name in ["violation2", "violation3", "violation4", "violation5"] {
        let sc = paperlab::build(name).map_err(|e| e.to_string())?;
        let run = paperlab::run_scenario(&sc, tol);
        if let Some(bad) = run.outcomes.iter().find(|o| !o.passed) {
            return Err(format!("{name}: {} ({})", bad.label, bad.detail));
        }
        let (zs, _, rep) = pipeline(&sc.x0, &sc.u0, tol)?;
        match name {
            "violation2" => {
                ensure(rep.jjj.verdict == Verdict::Fail, || {
                    format!("{name}: jjj = {}", rep.jjj.verdict)
                })?;
                ensure(zs.contact_sets[0] != zs.blocks[0].support, || {
                    format!("{name}: M equals P*")
                })?;
                notes.push(format!(
                    "{name}: M={} P*={}",
                    zs.contact_sets[0], zs.blocks[0].support
                ));
            }
            "violation3" | "violation4" => {
                let pt = point(&sc.backward_path, 0.1)?;
                let v = is_copositive(&pt.x, tol).map_err(|e| e.to_string())?;
                let t = v.witness().ok_or_else(|| format!("{name}: no witness"))?;
                let t = DVector::from_column_slice(t);
                let val = pt.x.quad(&t);
                ensure(!v.member && val < 0.0 && t.min() >= 0.0, || {
                    format!("{name}: witness value {val:e}")
                })?;
                notes.push(format!("{name}: t^T X t = {val:.3e}"));
            }
            _ => {
                let pt = point(&sc.backward_path, 0.1)?;
                let w = &pt.ws[0];
                let gens = vec![
                    DVector::from_vec(vec![1.0, 0.0]),
                    DVector::from_vec(vec![0.0, 1.0]),
                ];
                let out = cp_membership(w, &gens, tol).map_err(|e| e.to_string())?;
                ensure(
                    w.get(0, 1) < 0.0 && out.verdict == CpVerdict::NotMember,
                    || format!("{name}: W verdict {:?}", out.verdict),
                )?;
                notes.push(format!("{name}: W(1,0.1) not CP"));
            }
        }
    }
    Ok(notes.join("; "))
}

fn point(path: &[WPathPoint], eps: f64) -> Result<&WPathPoint, String> {
    path.iter()
        .find(|p| p.eps == eps)
        .ok_or_else(|| format!("no path point at eps={eps}"))
}

fn criterion_4a() -> Outcome {
    let mut r = rng(0x4a);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let p = 2 + k % 5;
        let x = random_sym(&mut r, p);
        let u = random_sym(&mut r, p);
        let lhs = sym_kron(&x, &SymMat::identity(p)).map_err(|e| e.to_string())? * svec(&u).data();
        let rhs = svec(&x.anticommutator(&u).scale(0.5)).into_data();
        worst = worst.max((lhs - rhs).amax());
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("100 pairs, max error {worst:.2e}"))
}

fn criterion_4b(tol: &Tolerances) -> Outcome {
    let mut r = rng(0x4b);
    let mut worst: f64 = 0.0;
    for name in paperlab::SCENARIO_NAMES {
        let sc = paperlab::build(name).map_err(|e| e.to_string())?;
        let (zs, dd, _) = pipeline(&sc.x0, &sc.u0, tol)?;
        let sys = DefiningSystem::build(&zs, &dd).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let z = sys.anchor.map(|v| v + r.gen_range(-1e-2..1e-2));
            worst = worst.max(jacobian_fd_error(&sys, &z));
        }
    }
    ensure(worst <= 1e-6, || format!("max relative error {worst:e}"))?;
    Ok(format!(
        "7 anchors x 20 points, max relative error {worst:.2e}"
    ))
}

fn criterion_4c(tol: &Tolerances) -> Outcome {
    let mut r = rng(0x4c);
    let mut with_zeros = 0;
    for k in 0..50 {
        let p = 2 + k % 4;
        let x = structured_copositive(&mut r, p);
        zero_vertex_oracle_agrees(&x, tol).map_err(|e| format!("instance {k}: {e}"))?;
        if !enumerate_zero_vertices(&x, tol)
            .map_err(|e| e.to_string())?
            .is_empty()
        {
            with_zeros += 1;
        }
    }
    Ok(format!(
        "50 matrices agree with the oracle ({with_zeros} with nonempty zero set)"
    ))
}

fn criterion_4d(tol: &Tolerances) -> Outcome {
    let mut r = rng(0x4d);
    let mut worst_product: f64 = 0.0;
    let mut worst_anti: f64 = 0.0;
    for k in 0..50 {
        let p = 2 + k % 5;
        let (x, u) = anticommuting_pair(&mut r, p);
        match check_anticommuting_pair(&x, &u, tol).map_err(|e| e.to_string())? {
            AnticommutingPairCheck::Checked { holds, product, .. } => {
                ensure(holds, || format!("instance {k}: statement fails"))?;
                worst_product = worst_product.max(product);
            }
            AnticommutingPairCheck::NotApplicable { reason } => {
                return Err(format!("instance {k}: {reason}"))
            }
        }
        let (x, w, y) = anticommutator_instance(&mut r, p);
        worst_anti = worst_anti.max(anticommutator_product_residual(&x, &w, &y));
    }
    ensure(worst_product <= 1e-9 && worst_anti <= 1e-9, || {
        format!("residuals {worst_product:e}, {worst_anti:e}")
    })?;
    Ok(format!(
        "50+50 instances, max ||UX|| {worst_product:.2e}, max ||XZ|| {worst_anti:.2e}"
    ))
}

fn criterion_4e(tol: &Tolerances) -> Outcome {
    let mut r = rng(0x4e);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let p = 3 + k % 3;
        let x = psd_with_positive_kernel(&mut r, p, 1 + k % 2);
        let v = enumerate_zero_vertices(&x, tol).map_err(|e| e.to_string())?;
        let (a, b) = kernel_span_agreement(&x, &v, tol);
        worst = worst.max(a).max(b);
    }
    ensure(worst <= 1e-8, || {
        format!("max projection residual {worst:e}")
    })?;
    Ok(format!("20 instances, max projection residual {worst:.2e}"))
}

fn criterion_5(tol: &Tolerances) -> Outcome {
    let sc = paperlab::example_s4();
    let (zs, dd, _) = pipeline(&sc.x0, &sc.u0, tol)?;
    let sys = DefiningSystem::build(&zs, &dd).map_err(|e| e.to_string())?;
    let mut r = rng(0x05);
    let mut worst_res: f64 = 0.0;
    let mut worst_comp: f64 = 0.0;
    for k in 0..20 {
        let x = block_compatible_perturbation(&mut r, &sc.x0, 1e-4);
        let dist = (&x - &sc.x0).frobenius();
        ensure(dist <= 1e-3, || {
            format!("perturbation {k} has size {dist:e}")
        })?;
        let ws = match solve_local(&sys, &x, 1e-3, tol).map_err(|e| e.to_string())? {
            LocalSolution::Converged { ws, residual, .. } => {
                worst_res = worst_res.max(residual);
                ws
            }
            LocalSolution::NoConvergence { residual, .. } => {
                return Err(format!(
                    "perturbation {k}: no convergence, residual {residual:e}"
                ))
            }
        };
        let path = [WPathPoint { eps: dist, x, ws }];
        let rep = verify_backward(&sys, &zs, &path, tol).map_err(|e| e.to_string())?;
        let e = &rep.entries[0];
        ensure(e.copositive && e.complementarity <= 1e-9, || {
            format!(
                "perturbation {k}: copositive={} X.U={:e}",
                e.copositive, e.complementarity
            )
        })?;
        worst_comp = worst_comp.max(e.complementarity);
    }
    Ok(format!(
        "20 perturbations, max residual {worst_res:.2e}, max |X.U| {worst_comp:.2e}"
    ))
}

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let criteria: Vec<Criterion> = vec![
        ("1  worked 3x3 example", Box::new(move || criterion_1(&tol))),
        (
            "2  H(theta*) family and path",
            Box::new(move || criterion_2(&tol)),
        ),
        (
            "3  violation scenarios 2-5",
            Box::new(move || criterion_3(&tol)),
        ),
        ("4a symmetric Kronecker identity", Box::new(criterion_4a)),
        (
            "4b jacobian vs finite differences",
            Box::new(move || criterion_4b(&tol)),
        ),
        (
            "4c zero vertices vs oracle",
            Box::new(move || criterion_4c(&tol)),
        ),
        (
            "4d anticommuting pair statements",
            Box::new(move || criterion_4d(&tol)),
        ),
        (
            "4e kernel-span agreement",
            Box::new(move || criterion_4e(&tol)),
        ),
        (
            "5  local solve round trip",
            Box::new(move || criterion_5(&tol)),
        ),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        match f() {
            Ok(detail) => println!("acceptance {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("acceptance {name}: FAIL ({detail})");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
