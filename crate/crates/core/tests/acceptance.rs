//! Acceptance criteria 1-10, one pass/fail line each.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use copodual::cones::{horn_matrix, is_copositive, is_copositive_with_rounds, CopositivityStatus};
use copodual::dam::{run_dam, BaseItem, DataSet, DeltaItem};
use copodual::dualgen::{build_dual, detect_immobile, GenConfig};
use copodual::lp::{kkt_residuals, solve_lp, LinearProgram, LpStatus};
use copodual::sdpbridge::{ed_feasible, ed_to_edr, edr_feasible, edr_to_ed, random_feasible_ed, EQ_TOL, PSD_TOL};
use copodual::symcore::{dist_to_hull, simplex_grid, SimplexPoint};
use copodual::verify::{slater_probe, weak_duality_gap, SLATER_TOL};
use copodual::{Error, SymMatrix};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_secs), || format!("took {elapsed:?}, limit {limit_secs} s"))
}

fn close(a: &SymMatrix, b: &SymMatrix, tol: f64) -> bool {
    a.sub(b).map(|d| d.max_abs() <= tol).unwrap_or(false)
}

fn c1_non_slater() -> Outcome {
    let start = Instant::now();
    let prog = ex_ns();
    let out = build_dual(&prog, &GenConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(out.m0 == 1, || format!("m0 = {}", out.m0))?;
    check(out.primal_value.abs() <= 1e-6, || format!("primal {}", out.primal_value))?;
    check(out.dual_value.abs() <= 1e-6, || format!("dual {}", out.dual_value))?;
    check(out.gap.abs() <= 1e-6, || format!("gap {:e}", out.gap))?;
    check(close(&out.solution.u(), &SymMatrix::diag(&[1.0, 0.0]), 1e-6), || format!("U = {:?}", out.solution.u()))?;
    check(close(&out.solution.u_level(1), &SymMatrix::diag(&[0.0, 1.0]), 1e-6), || "U₁ mismatch".into())?;
    within(elapsed, 1)?;
    Ok(format!("m0 = 1, gap {:e}, {elapsed:?}", out.gap))
}

fn c2_slater() -> Outcome {
    let start = Instant::now();
    let prog = ex_sl();
    let out = build_dual(&prog, &GenConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(out.m0 == 0 && out.solution.levels.is_empty(), || format!("m0 = {}", out.m0))?;
    check(out.gap.abs() <= 1e-6, || format!("gap {:e}", out.gap))?;
    let top = out.solution.equality_residuals(&prog).map_err(|e| e.to_string())?;
    check(top.levels.is_empty() && top.max_abs() <= 1e-7, || format!("residuals {top:?}"))?;
    within(elapsed, 1)?;
    Ok(format!("m0 = 0, gap {:e}, {elapsed:?}", out.gap))
}

/// Random feasible points near `x⁰`, kept only if the oracle accepts them.
fn c3_weak_duality() -> Outcome {
    let start = Instant::now();
    let cfg = GenConfig::default();
    let mut programs = vec![ex_ns(), ex_sl(), ex_2l()];
    programs.extend(random_programs(22, 303));
    let mut rng = rng(3);
    let (mut pairs, mut worst) = (0usize, f64::INFINITY);
    'outer: for round in 0..40 {
        for prog in &programs {
            // a fresh cost makes a fresh dual
            let c: Vec<f64> = if round == 0 {
                prog.c().to_vec()
            } else {
                prog.c().iter().map(|v| v * rng.gen_range(0.5..1.5)).collect()
            };
            let prog = prog.with_cost(c).map_err(|e| e.to_string())?;
            let Ok(out) = build_dual(&prog, &cfg) else { continue };
            let scale: f64 = rng.gen_range(0.01..10.0);
            let x: Vec<f64> = out.x0.iter().map(|v| v + scale * rng.gen_range(-1.0..1.0)).collect();
            for cand in [out.x0.clone(), x] {
                match weak_duality_gap(&prog, &cand, &out.solution) {
                    Ok(g) => {
                        worst = worst.min(g);
                        pairs += 1;
                        check(g >= -1e-6, || format!("gap {g:e} on pair {pairs}"))?;
                    }
                    Err(Error::PrimalInfeasible { .. }) => {}
                    Err(e) => return Err(e.to_string()),
                }
                if pairs >= 100 {
                    break 'outer;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(pairs >= 100, || format!("only {pairs} feasible pairs"))?;
    within(elapsed, 30)?;
    Ok(format!("{pairs} pairs, smallest gap {worst:e}, {elapsed:?}"))
}

fn random_point(rng: &mut rand_chacha::ChaCha8Rng, p: usize, support: &[usize]) -> SimplexPoint {
    let mut v = vec![0.0; p];
    for &k in support {
        v[k] = rng.gen_range(0.05..1.0);
    }
    SimplexPoint::normalized(v).unwrap()
}

fn random_subset(rng: &mut rand_chacha::ChaCha8Rng, p: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..p).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn c4_dam() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(4);
    let (mut steps, mut worst, mut trials) = (0usize, 0.0_f64, 0usize);
    while trials < 200 {
        let trial = trials;
        let p = rng.gen_range(2..=4);
        let delta_len = rng.gen_range(1..=4);
        let base: Vec<BaseItem> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let s = random_subset(&mut rng, p);
                BaseItem {
                    tau: random_point(&mut rng, p, &s),
                    lambda: (0..p).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    gamma: rng.gen_range(0.1..1.0),
                }
            })
            .collect();
        let hull: Vec<SimplexPoint> = base.iter().map(|b| b.tau.clone()).collect();
        let mut delta = Vec::new();
        for _ in 0..100 {
            if delta.len() == delta_len {
                break;
            }
            // contain some base support about half the time
            let mut s = random_subset(&mut rng, p);
            if rng.gen_bool(0.5) {
                s.extend(hull[rng.gen_range(0..hull.len())].support());
                s.sort_unstable();
                s.dedup();
            }
            let tau = random_point(&mut rng, p, &s);
            // valid sets keep new points off the base hull
            if dist_to_hull(&tau, &hull).map_err(|e| e.to_string())? > 1e-6 {
                delta.push(DeltaItem { tau, gamma: rng.gen_range(0.1..1.0) });
            }
        }
        if delta.is_empty() {
            // the base hull covers the whole simplex
            continue;
        }
        trials += 1;
        let data = DataSet::new(delta, base).map_err(|e| e.to_string())?;
        let out = run_dam(&data, None).map_err(|e| format!("trial {trial}: {e}"))?;
        for st in &out.steps {
            check(st.theta > 0.0 && st.theta < 1.0, || format!("trial {trial}: theta {}", st.theta))?;
        }
        steps += out.steps.len();
        for (a, b) in data.base.iter().zip(&out.data.base) {
            check(a.tau == b.tau, || format!("trial {trial}: base point changed"))?;
        }
        for b in &out.data.base {
            check(b.gamma > 0.0 && b.lambda.iter().all(|v| *v >= 0.0), || format!("trial {trial}: sign"))?;
        }
        for _ in 0..10 {
            let a = random_sym(&mut rng, p);
            let before = data.functional(&a).map_err(|e| e.to_string())?;
            let after = out.data.functional(&a).map_err(|e| e.to_string())?;
            let rel = (before - after).abs() / before.abs().max(1.0);
            worst = worst.max(rel);
            check(rel <= 1e-10, || format!("trial {trial}: relative drift {rel:e}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 10)?;
    Ok(format!("200 sets, {steps} steps, worst drift {worst:e}, {elapsed:?}"))
}

fn pipeline_programs() -> Vec<(String, copodual::model::CopositiveProgram)> {
    let mut v = vec![("ex_ns".to_string(), ex_ns()), ("ex_sl".to_string(), ex_sl()), ("ex_2l".to_string(), ex_2l())];
    v.extend(random_programs(50, 606).into_iter().enumerate().map(|(i, p)| (format!("random {i}"), p)));
    v
}

fn c5_support_bound() -> Outcome {
    let (mut levels, mut largest) = (0usize, 0usize);
    for (name, prog) in pipeline_programs() {
        let out = build_dual(&prog, &GenConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        for t in &out.trace {
            levels += 1;
            largest = largest.max(t.delta_count);
            check(t.delta_count <= prog.n() + 1, || format!("{name} level {}: |ΔI| = {}", t.level, t.delta_count))?;
            check((t.gamma_sum - 1.0).abs() <= 1e-9, || format!("{name} level {}: Σγ = {}", t.level, t.gamma_sum))?;
        }
    }
    Ok(format!("{levels} extractions, largest |ΔI| = {largest}"))
}

fn c6_level_cap() -> Outcome {
    let cfg = GenConfig::default();
    let mut deepest = 0;
    for (name, prog) in pipeline_programs() {
        let out = build_dual(&prog, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let cap = (1usize << prog.p()) - 1;
        check(out.m0 <= cap, || format!("{name}: m0 = {} > {cap}", out.m0))?;
        deepest = deepest.max(out.m0);
        for (a, ta) in out.trace.iter().enumerate() {
            for tb in &out.trace[a + 1..] {
                for s in &tb.supports {
                    check(!ta.supports.contains(s), || format!("{name}: support {s:?} repeats across levels"))?;
                }
            }
        }
    }
    check(matches!(build_dual(&fixture("ex_ns_unbounded.json"), &cfg), Err(Error::Unbounded)), || {
        "unbounded fixture not reported".into()
    })?;
    check(matches!(build_dual(&fixture("infeasible.json"), &cfg), Err(Error::Infeasible { .. })), || {
        "infeasible fixture not reported".into()
    })?;
    Ok(format!("53 programs, deepest m0 = {deepest}"))
}

fn c7_copositivity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(7);
    for p in 1..=5 {
        let v = is_copositive(&SymMatrix::identity(p), 1e-7, 16).map_err(|e| e.to_string())?;
        check(v.status == CopositivityStatus::Copositive, || format!("identity {p}: {:?}", v.status))?;
    }
    for i in 0..100 {
        let p = rng.gen_range(1..=5);
        let d = if i < 50 { random_psd(&mut rng, p) } else { random_nonneg(&mut rng, p) };
        let v = is_copositive(&d, 1e-7, 16).map_err(|e| e.to_string())?;
        check(v.status == CopositivityStatus::Copositive, || format!("matrix {i}: {:?} {:e}", v.status, v.min_value))?;
    }
    let bad = SymMatrix::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).unwrap();
    let v = is_copositive(&bad, 1e-7, 16).map_err(|e| e.to_string())?;
    check(v.status == CopositivityStatus::NotCopositive && v.min_value <= -0.49, || format!("{v:?}"))?;
    let h = is_copositive_with_rounds(&horn_matrix(), 1e-7, 40, 3).map_err(|e| e.to_string())?;
    check(h.status == CopositivityStatus::Copositive, || format!("Horn: {:?}", h.status))?;
    check((-1e-6..=1e-3).contains(&h.min_value), || format!("Horn min {:e}", h.min_value))?;
    let elapsed = start.elapsed();
    within(elapsed, 60)?;
    Ok(format!("witness {:.4}, Horn min {:e}, {elapsed:?}", v.min_value, h.min_value))
}

fn c8_sdp_bridge() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(8);
    let mut worst_eig = f64::INFINITY;
    for i in 0..50 {
        let p = rng.gen_range(1..=5);
        let n = rng.gen_range(0..=3);
        let m0 = rng.gen_range(0..=3);
        let (sdp, ed) = random_feasible_ed(p, n, m0, rng.gen()).map_err(|e| e.to_string())?;
        let edr = ed_to_edr(&sdp, &ed).map_err(|e| format!("case {i}: {e}"))?;
        let r = edr_feasible(&sdp, &edr, EQ_TOL, PSD_TOL).map_err(|e| e.to_string())?;
        check(r.feasible, || format!("case {i}: {r:?}"))?;
        worst_eig = r.level_min_eigs.iter().copied().fold(worst_eig.min(r.u_min_eig), f64::min);
        let (a, b) = (ed.dual_value(&sdp).unwrap(), edr.dual_value(&sdp).unwrap());
        check((a - b).abs() <= 1e-12, || format!("case {i}: objectives {a} vs {b}"))?;
        let back = edr_to_ed(&edr);
        check(ed_feasible(&sdp, &back, EQ_TOL, PSD_TOL).map(|r| r.feasible).unwrap_or(false), || {
            format!("case {i}: embedding infeasible")
        })?;
        check((back.dual_value(&sdp).unwrap() - a).abs() <= 1e-12, || format!("case {i}: embedding objective"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 20)?;
    Ok(format!("50 conversions, smallest Schur eigenvalue {worst_eig:e}, {elapsed:?}"))
}

fn c9_immobile() -> Outcome {
    let cfg = GenConfig::default();
    let grid = simplex_grid(2, cfg.grid).unwrap();
    let ns = detect_immobile(&ex_ns(), &cfg).map_err(|e| e.to_string())?;
    check(ns.by_level.iter().flatten().count() == 1, || format!("found {:?}", ns.by_level))?;
    let tau = &ns.by_level[0][0];
    let target = SimplexPoint::vertex(2, 1);
    check(tau.linf_distance(&target) <= 1e-6, || format!("found {:?}", tau.coords()))?;
    check(!slater_probe(&ex_ns(), &grid, SLATER_TOL).unwrap(), || {
        "probe reports Slater on the non-Slater fixture".into()
    })?;
    let sl = detect_immobile(&ex_sl(), &cfg).map_err(|e| e.to_string())?;
    check(sl.by_level.iter().flatten().count() == 0, || format!("found {:?}", sl.by_level))?;
    check(slater_probe(&ex_sl(), &grid, SLATER_TOL).unwrap(), || "probe misses the Slater point".into())?;
    Ok("τ = (0, 1) on the non-Slater fixture, none on the Slater fixture".into())
}

/// Every vertex of `{y : rows y >= b}` by solving each square subsystem.
fn brute_force_min(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars;
    let m = lp.ineq_rows.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| lp.ineq_rows[idx[i]].0[j]);
        let b = nalgebra::DVector::from_fn(n, |i, _| lp.ineq_rows[idx[i]].1);
        if let Some(y) = a.lu().solve(&b) {
            let y: Vec<f64> = y.iter().copied().collect();
            if lp.ineq_rows.iter().all(|(r, rhs)| dot(r, &y) >= rhs - 1e-9) {
                let v = dot(&lp.objective, &y);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut k = n;
        while k > 0 && idx[k - 1] == m - n + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return best;
        }
        idx[k - 1] += 1;
        for j in k..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn random_lp(rng: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut obj = vec![0.0; n];
    for row in rows.iter().take(n + 1) {
        let w: f64 = rng.gen_range(0.1..1.0);
        for (o, r) in obj.iter_mut().zip(row) {
            *o += w * r;
        }
    }
    let mut lp = LinearProgram::new(obj);
    for row in rows {
        let b = dot(&row, &y0) - rng.gen_range(0.0..1.0);
        lp.add_ineq(row, b);
    }
    lp
}

fn c10_lp() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(10);
    let (mut brute, mut worst) = (0usize, 0.0_f64);
    for i in 0..200 {
        let small = i % 2 == 0;
        let (n, m) = if small {
            let n = rng.gen_range(1..=8);
            (n, rng.gen_range(n + 1..=12))
        } else {
            let n = rng.gen_range(1..=15);
            (n, rng.gen_range(n + 1..=150))
        };
        let lp = random_lp(&mut rng, n, m);
        let sol = solve_lp(&lp).map_err(|e| e.to_string())?;
        check(sol.status == LpStatus::Optimal, || format!("lp {i}: {:?}", sol.status))?;
        let k = kkt_residuals(&lp, &sol);
        let r = [k.stationarity, k.complementarity, k.primal, k.dual_sign, k.duality_gap]
            .into_iter()
            .fold(0.0_f64, f64::max);
        worst = worst.max(r);
        check(r <= 1e-7, || format!("lp {i}: {k:?}"))?;
        if small {
            let b = brute_force_min(&lp).ok_or_else(|| format!("lp {i}: no vertex"))?;
            check((b - sol.value).abs() <= 1e-7 * (1.0 + b.abs()), || {
                format!("lp {i}: simplex {} vs vertices {b}", sol.value)
            })?;
            brute += 1;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 60)?;
    Ok(format!("200 LPs, {brute} enumerated, worst KKT residual {worst:e}, {elapsed:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("strong duality on the non-Slater fixture", c1_non_slater),
        ("strong duality on the Slater fixture", c2_slater),
        ("weak duality on random pairs", c3_weak_duality),
        ("data modification conservation", c4_dam),
        ("support size bound of extracted multipliers", c5_support_bound),
        ("level count and distinct supports", c6_level_cap),
        ("copositivity oracle", c7_copositivity),
        ("semidefinite dual round trip", c8_sdp_bridge),
        ("immobile index detection", c9_immobile),
        ("LP engine", c10_lp),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
