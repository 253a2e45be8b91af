//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::time::Instant;

use common::{max_abs, random_system, random_w, v_oracle, SystemShape};
use polydyn::io;
use polydyn::rng::ScenarioRng;
use polydyn::*;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn box_holds(bbox: &BoundingBox, x: &StateMatrix, tol: f64) -> bool {
    contains(bbox, x, tol).unwrap()
}

/// V(k) row sums and signs for k <= 200, plus snapshot box containment.
fn criteria_1_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ScenarioRng::new(101);
    let mut worst_sum = 0.0f64;
    let mut worst_neg = 0.0f64;
    let mut lib_gap = 0.0f64;
    let mut box_fail = None;
    let mut snapshots = 0usize;
    for trial in 0..100 {
        let sys = random_system(&mut rng, SystemShape::Any);
        let aw = DMatrix::from_diagonal(sys.a.diag()) * sys.w.as_matrix();
        let n = sys.w.n();
        let eye = DMatrix::<f64>::identity(n, n);
        let one_minus_a = &eye - DMatrix::from_diagonal(sys.a.diag());
        let mut v = eye.clone();
        for k in 1..=200 {
            v = &aw * &v + &one_minus_a;
            for row in v.row_iter() {
                worst_sum = worst_sum.max((row.sum() - 1.0).abs());
                worst_neg = worst_neg.min(row.min());
            }
            if matches!(k, 1 | 17 | 200) {
                lib_gap = lib_gap.max(max_abs(&(evolve_v(&sys.w, &sys.a, k).unwrap() - &v)));
            }
        }

        let bbox = bounding_box(&sys.x0).unwrap();
        let opts = IterateOptions {
            tol: 1e-300,
            k_max: 200,
            record_every: 1,
        };
        let (traj, _) = iterate(&sys.w, &sys.a, &sys.x0, &opts).unwrap();
        for (k, x) in traj.steps.iter().zip(&traj.states) {
            snapshots += 1;
            if box_fail.is_none() && !box_holds(&bbox, x, 1e-10) {
                box_fail = Some((trial, *k));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let c1 = ensure(worst_sum <= 1e-12, || format!("row sum off by {worst_sum:e}"))
        .and_then(|_| ensure(worst_neg >= -1e-14, || format!("entry {worst_neg:e}")))
        .and_then(|_| ensure(lib_gap <= 1e-13, || format!("evolve_v differs from recursion by {lib_gap:e}")))
        .and_then(|_| ensure(secs < 10.0, || format!("took {secs:.1} s")))
        .map(|_| format!("100 systems, max |row sum - 1| = {worst_sum:.1e}, min entry = {worst_neg:.1e}, {secs:.2} s"));
    let c2 = match box_fail {
        None => Ok(format!("{snapshots} snapshots inside the X(0) box")),
        Some((t, k)) => Err(format!("system {t} leaves the box at k = {k}")),
    };
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let mut rng = ScenarioRng::new(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sys = random_system(&mut rng, SystemShape::StrictInterior);
        let aw = DMatrix::from_diagonal(sys.a.diag()) * sys.w.as_matrix();
        let rho = spectral_radius(&aw).upper;
        let terms = ((1e-14f64).ln() / rho.ln()).ceil() as usize;
        let opts = IterateOptions {
            tol: 1e-10,
            ..IterateOptions::for_size(sys.w.n(), sys.x0.m())
        };
        let (traj, _) = iterate(&sys.w, &sys.a, &sys.x0, &opts).unwrap();
        ensure(traj.converged, || "iteration did not converge".into())?;
        let closed = closed_form_limit(&sys.w, &sys.a, &sys.x0).unwrap().x_inf;
        let neumann = neumann_limit(&sys.w, &sys.a, terms).unwrap() * sys.x0.as_matrix();
        let it = traj.final_state().as_matrix();
        for d in [
            max_abs(&(it - closed.as_matrix())),
            max_abs(&(it - &neumann)),
            max_abs(&(closed.as_matrix() - &neumann)),
        ] {
            worst = worst.max(d);
        }
    }
    ensure(worst <= 1e-8, || format!("pairwise gap {worst:e}"))?;
    Ok(format!("100 systems, max pairwise gap {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ScenarioRng::new(404);
    let mut spread = 0.0f64;
    let mut perron_gap = 0.0f64;
    for _ in 0..50 {
        let sys = random_system(&mut rng, SystemShape::Any);
        let n = sys.w.n();
        let zero = DampingMatrix::zeros(n);
        let closed = closed_form_limit(&sys.w, &zero, &sys.x0).unwrap();
        ensure(closed.x_inf == sys.x0, || {
            "A = 0 closed form moved X(0)".into()
        })?;
        let opts = IterateOptions::for_size(n, sys.x0.m());
        let (traj, _) = iterate(&sys.w, &zero, &sys.x0, &opts).unwrap();
        ensure(traj.final_state() == &sys.x0, || {
            "A = 0 iteration moved X(0)".into()
        })?;

        let w = random_w(&mut rng, n);
        let ones = DampingMatrix::ones(n);
        let scale = sys.x0.as_matrix().amax().max(1.0);
        let opts = IterateOptions {
            tol: 1e-14 * scale,
            k_max: 1_000_000,
            record_every: 1000,
        };
        let (traj, limit) = iterate(&w, &ones, &sys.x0, &opts).unwrap();
        ensure(traj.converged, || "A = I run did not converge".into())?;
        spread = spread.max(traj.final_state().row_spread());
        let pi = perron_centrality(&w).unwrap();
        for row in limit.v.row_iter() {
            for (x, p) in row.iter().zip(pi.as_slice()) {
                perron_gap = perron_gap.max((x - p).abs());
            }
        }
    }
    ensure(spread < 1e-8, || format!("A = I row spread {spread:e}"))?;
    ensure(perron_gap <= 1e-8, || {
        format!("common row vs Perron vector {perron_gap:e}")
    })?;
    Ok(format!(
        "A = 0 exact; A = I spread {spread:.1e}, Perron gap {perron_gap:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ScenarioRng::new(505);
    let tol = FeasibilityTolerances::default();

    let mut roundtrip = 0.0f64;
    for _ in 0..200 {
        let n = 2 + rng.below(12);
        let m = 1 + rng.below(3);
        let w = random_w(&mut rng, n);
        let x_inf = common::random_state(&mut rng, n, m);
        let a: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.05, 0.95)).collect();
        let d = design_family(&w, &x_inf, &a).unwrap();
        let opts = IterateOptions {
            tol: 1e-13,
            ..IterateOptions::for_size(n, m)
        };
        let (traj, _) = iterate(&w, &d.a, &d.x0, &opts).unwrap();
        roundtrip = roundtrip.max(traj.final_state().max_abs_diff(&x_inf));
    }
    ensure(roundtrip <= 1e-8, || {
        format!("(a) design_family roundtrip {roundtrip:e}")
    })?;

    let mut a_gap = 0.0f64;
    for _ in 0..200 {
        let sys = common::random_identifiable_system(&mut rng);
        let x_inf = closed_form_limit(&sys.w, &sys.a, &sys.x0).unwrap().x_inf;
        let report = solve_damping(&sys.w, &sys.x0, &x_inf, &tol).unwrap();
        ensure(report.feasible, || {
            format!(
                "(b) feasible system reported infeasible: {:?}",
                report.per_node
            )
        })?;
        for (got, want) in report.a.unwrap().iter().zip(sys.a.as_slice()) {
            a_gap = a_gap.max((got - want).abs());
        }
    }
    ensure(a_gap <= 1e-6, || {
        format!("(b) recovered a off by {a_gap:e}")
    })?;

    let mut false_positives = 0;
    for trial in 0..200 {
        let sys = random_system(&mut rng, SystemShape::StrictInterior);
        let bbox = bounding_box(&sys.x0).unwrap();
        let mut x_inf = closed_form_limit(&sys.w, &sys.a, &sys.x0)
            .unwrap()
            .x_inf
            .into_inner();
        // push one or more coordinates out of the box by at least 10% of its width
        let pushes = 1 + rng.below(sys.w.n());
        for _ in 0..pushes {
            let i = rng.below(sys.w.n());
            let h = rng.below(sys.x0.m());
            let width = (bbox.hi[h] - bbox.lo[h]).max(1e-3);
            let out = width * rng.uniform_in(0.1, 2.0);
            x_inf[(i, h)] = if trial % 2 == 0 {
                bbox.hi[h] + out
            } else {
                bbox.lo[h] - out
            };
        }
        let x_inf = StateMatrix::new(x_inf).unwrap();
        if solve_damping(&sys.w, &sys.x0, &x_inf, &tol)
            .unwrap()
            .feasible
        {
            false_positives += 1;
        }
    }
    ensure(false_positives == 0, || {
        format!("(c) {false_positives} exterior targets reported feasible")
    })?;
    Ok(format!(
        "(a) gap {roundtrip:.1e}; (b) a recovered within {a_gap:.1e}; (c) 0/200 false positives"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ScenarioRng::new(606);
    for _ in 0..50 {
        let n = 2 + rng.below(12);
        let w = random_w(&mut rng, n);
        let m = 1 + rng.below(3);
        let x_inf = common::random_state(&mut rng, n, m);
        let u = unbiased_design(&w, &x_inf).unwrap();
        let f = design_family(&w, &x_inf, &vec![0.5; n]).unwrap();
        ensure(u == f, || {
            "unbiased design differs from the a = 0.5 family member".into()
        })?;
    }

    // Reference extremes of an unbiased design: X(0) in [-10.756, 13.655],
    // X(inf) in [2.454, 12.974].
    let (x0_min, x0_max, xi_min, xi_max) = (-10.756, 13.655, 2.454, 12.974);
    ensure(x0_min <= xi_min && xi_max <= x0_max, || {
        "reference extremes out of order".into()
    })?;

    // Same pattern on a cleavage-style target.
    let sys = cleavage_scenario(250, &CleavageParams::default(), 6).unwrap();
    let target = iterate(&sys.w, &sys.a, &sys.x0, &IterateOptions::for_size(250, 1))
        .unwrap()
        .0;
    let x_inf = target.final_state().clone();
    let d = unbiased_design(&sys.w, &x_inf).unwrap();
    let (lo0, hi0) = (d.x0.as_matrix().min(), d.x0.as_matrix().max());
    let (lo, hi) = (x_inf.as_matrix().min(), x_inf.as_matrix().max());
    ensure(lo0 <= lo && hi <= hi0, || {
        format!("X(0) [{lo0}, {hi0}] does not cover X(inf) [{lo}, {hi}]")
    })?;
    ensure(d.residual <= 1e-8, || {
        format!("design residual {:e}", d.residual)
    })?;
    Ok(format!(
        "bit-identical to a = 0.5; reference {x0_min} <= {xi_min}, {xi_max} <= {x0_max}; \
         cleavage target X(0) [{lo0:.3}, {hi0:.3}] covers X(inf) [{lo:.3}, {hi:.3}]"
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ScenarioRng::new(707);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let sys = random_system(&mut rng, SystemShape::StrictInterior);
        let base = closed_form_limit(&sys.w, &sys.a, &sys.x0).unwrap().x_inf;
        for (alpha, beta) in [(1.0, 2.0), (-3.0, 0.5), (10.0, -1.0)] {
            let moved = affine_map(&sys.x0, alpha, beta);
            let lim = closed_form_limit(&sys.w, &sys.a, &moved).unwrap().x_inf;
            worst = worst.max(lim.max_abs_diff(&affine_map(&base, alpha, beta)));
        }
    }
    ensure(worst <= 1e-10, || format!("gap {worst:e}"))?;
    Ok(format!("150 transformed limits, max gap {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut rng = ScenarioRng::new(808);
    let (mut sum_gap, mut fixed_gap, mut match_gap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let sys = random_system(&mut rng, SystemShape::StrictInterior);
        let v = closed_form_limit(&sys.w, &sys.a, &sys.x0).unwrap().v;
        sum_gap = sum_gap.max((net_influence(&v).unwrap().sum() - 1.0).abs());

        let n = sys.w.n();
        let alpha = rng.uniform_in(0.01, 0.99);
        let r = alpha_centrality(&sys.w, alpha).unwrap();
        sum_gap = sum_gap.max((r.sum() - 1.0).abs());
        let rv = DVector::from_column_slice(r.as_slice());
        let rhs = sys.w.as_matrix().transpose() * &rv * alpha
            + DVector::from_element(n, (1.0 - alpha) / n as f64);
        fixed_gap = fixed_gap.max((rhs - &rv).amax());

        let uniform = DampingMatrix::uniform(n, alpha).unwrap();
        let v = v_oracle(&sys.w, &uniform);
        let ni = net_influence(&v).unwrap();
        for (x, y) in r.as_slice().iter().zip(ni.as_slice()) {
            match_gap = match_gap.max((x - y).abs());
        }
    }
    ensure(sum_gap <= 1e-10, || format!("sum off by {sum_gap:e}"))?;
    ensure(fixed_gap <= 1e-10, || {
        format!("fixed point residual {fixed_gap:e}")
    })?;
    ensure(match_gap <= 1e-10, || {
        format!("alpha vs net influence {match_gap:e}")
    })?;
    Ok(format!(
        "sum {sum_gap:.1e}, fixed point {fixed_gap:.1e}, net-influence match {match_gap:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut summary = Vec::new();
    for seed in 0..3 {
        let start = Instant::now();
        let sys = cleavage_scenario(250, &CleavageParams::default(), seed).unwrap();
        let (traj, _) =
            iterate(&sys.w, &sys.a, &sys.x0, &IterateOptions::for_size(250, 1)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        ensure(traj.converged, || {
            format!("seed {seed}: run did not converge")
        })?;
        let before = histogram(&sys.x0, 25).unwrap().significant_modes();
        let after = histogram(traj.final_state(), 25)
            .unwrap()
            .significant_modes();
        ensure(before == 1, || {
            format!("seed {seed}: initial histogram has {before} modes")
        })?;
        ensure(after >= 2, || {
            format!("seed {seed}: final histogram has {after} modes")
        })?;
        let bbox = bounding_box(&sys.x0).unwrap();
        ensure(box_holds(&bbox, traj.final_state(), 1e-10), || {
            format!("seed {seed}: final opinions leave the box")
        })?;
        ensure(secs < 30.0, || format!("seed {seed}: took {secs:.1} s"))?;
        summary.push(format!(
            "seed {seed}: {} steps, modes {before} -> {after}, {secs:.2} s",
            traj.iterations
        ));
    }
    Ok(summary.join("; "))
}

fn seeded_outputs(dir: &std::path::Path) -> Vec<Vec<u8>> {
    let spec: ScenarioSpec = serde_json::from_str(
        r#"{"n": 30, "m": 2, "seed": 1010, "kind": "random-array", "parameters": {}}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for sys in [
        spec.generate().unwrap(),
        cleavage_scenario(250, &CleavageParams::default(), 1010).unwrap(),
    ] {
        let opts = IterateOptions::for_size(sys.w.n(), sys.x0.m());
        let (traj, limit) = iterate(&sys.w, &sys.a, &sys.x0, &opts).unwrap();
        let traj_path = dir.join("trajectory.csv");
        std::fs::write(&traj_path, io::trajectory_to_csv(&traj)).unwrap();
        let limit_path = dir.join("limit.json");
        let doc = io::limit_to_json(&limit, serde_json::json!({ "iterations": traj.iterations }));
        std::fs::write(&limit_path, serde_json::to_string(&doc).unwrap()).unwrap();
        let w_path = dir.join("w.csv");
        io::write_matrix(&w_path, sys.w.as_matrix(), io::Format::Csv).unwrap();
        for p in [traj_path, limit_path, w_path] {
            files.push(std::fs::read(p).unwrap());
        }
    }
    files
}

fn criterion_10() -> Outcome {
    let first = seeded_outputs(tempfile::tempdir().unwrap().path());
    let second = seeded_outputs(tempfile::tempdir().unwrap().path());
    ensure(first == second, || {
        "seeded outputs differ between runs".into()
    })?;
    let bytes: usize = first.iter().map(Vec::len).sum();
    Ok(format!(
        "{} files ({bytes} bytes) bit-identical across runs",
        first.len()
    ))
}

fn main() {
    let (c1, c2) = criteria_1_2();
    let results = [
        ("row-stochasticity of V(k)", c1),
        ("box containment of trajectories", c2),
        ("iterate / closed form / Neumann agreement", criterion_3()),
        ("degenerate A = 0 and A = I cases", criterion_4()),
        ("inverse design roundtrips", criterion_5()),
        ("unbiased design", criterion_6()),
        ("affine invariance", criterion_7()),
        ("centrality identities", criterion_8()),
        ("community cleavage", criterion_9()),
        ("determinism", criterion_10()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
