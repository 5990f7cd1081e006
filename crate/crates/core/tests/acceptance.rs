//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::fs;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use riemvi::geometry::sweep::{sweep_one, Lemma};
use riemvi::geometry::{holonomy_defect, sos_random_search};
use riemvi::harness::{fit_rate, run_experiment, ExperimentConfig, Metric};
use riemvi::manifold::sample::{point_in_ball, tangent_in_ball, unit_tangent};
use riemvi::problems::{make_problem, ProblemSpec, VectorFieldProblem};
use riemvi::solvers::{
    rceg_step, reg_step, rogda_step, rpeg_step, run, Instrument, Method, SolverConfig,
};
use riemvi::{Execution, Manifold, Point, Tangent};

type Outcome = (bool, String);

fn problem(name: &str, params: serde_json::Value) -> VectorFieldProblem {
    make_problem(&ProblemSpec::parse(name, params).unwrap()).unwrap()
}

fn curved_problems() -> Vec<VectorFieldProblem> {
    vec![
        problem("decoupled_saddle", json!({"factor": {"kind": "hyperboloid", "dim": 2}})),
        problem(
            "frechet_mean",
            json!({"manifold": {"kind": "spd", "n": 2}, "data": {"count": 5, "spread": 1.0, "seed": 1}}),
        ),
        problem("sphere_bilinear", json!({})),
    ]
}

fn kernel_suite() -> Outcome {
    let start = Instant::now();
    let kinds = [
        Manifold::euclidean(3),
        Manifold::sphere(2),
        Manifold::hyperboloid(2),
        Manifold::spd(2),
        Manifold::product(vec![Manifold::sphere(2), Manifold::hyperboloid(2)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut iso, mut trip, mut cons) = (0.0f64, 0.0f64, 0.0f64);
    for m in &kinds {
        for _ in 0..1000 {
            let p = point_in_ball(m, &m.origin(), 1.0, &mut rng);
            let q = point_in_ball(m, &p, 1.0, &mut rng);
            let u = tangent_in_ball(m, &p, 2.0, &mut rng);
            let w = m.transport(&u, &q).unwrap();
            iso = iso.max((m.norm(&w) - m.norm(&u)).abs());
            let v = m.log(&p, &q).unwrap();
            trip = trip.max(m.distance(&m.exp(&p, &v).unwrap(), &q).unwrap());
            let back = m.log(&p, &m.exp(&p, &u.scale(0.7)).unwrap()).unwrap();
            trip = trip.max(m.norm(&back.sub(&u.scale(0.7)).unwrap()));
            cons = cons.max((m.distance(&p, &q).unwrap() - m.norm(&v)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = iso <= 1e-10 && trip <= 1e-8 && cons <= 1e-10 && secs < 10.0;
    (ok, format!("max isometry err {iso:.1e}, roundtrip err {trip:.1e}, distance/log err {cons:.1e}, {secs:.1}s"))
}

fn comparison_sweeps() -> Outcome {
    let start = Instant::now();
    let lemmas = [
        Lemma::CosineLower,
        Lemma::CosineUpper,
        Lemma::HessianFirst,
        Lemma::HessianSecond,
        Lemma::DistanceComparison,
        Lemma::JacobiRatio,
    ];
    let manifolds = [Manifold::sphere(2), Manifold::hyperboloid(2), Manifold::spd(2)];
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut short = Vec::new();
    for lemma in lemmas {
        for (i, m) in manifolds.iter().enumerate() {
            let s = sweep_one(m, i, lemma, 10_000, lemma.default_radius(), 2, Execution::Parallel);
            worst = worst.min(s.worst_residual);
            if !s.passed(10_000) {
                ok = false;
                short.push(format!("{}@{}: valid {} failures {}", lemma.name(), s.manifold, s.valid, s.failures));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    (ok, format!("6 lemmas x 3 manifolds x 1e4 valid probes, worst residual {worst:.2e}, {secs:.1}s {}", short.join("; ")))
}

fn holonomy() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut worst_degenerate = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (i, m) in [Manifold::sphere(2), Manifold::hyperboloid(2), Manifold::spd(2)].iter().enumerate() {
        let s = sweep_one(m, i, Lemma::Holonomy, 1000, Lemma::Holonomy.default_radius(), 3, Execution::Parallel);
        ok &= s.passed(1000);
        notes.push(format!("{} worst slack {:.1e}", s.manifold, s.worst_residual));
        for _ in 0..300 {
            let x = point_in_ball(m, &m.origin(), 1.0, &mut rng);
            let y = point_in_ball(m, &x, 0.5, &mut rng);
            let u = unit_tangent(m, &x, &mut rng);
            for (a, b) in [(&y, &y), (&x, &y), (&y, &x)] {
                let d = holonomy_defect(m, &x, a, b, &u).unwrap().defect;
                worst_degenerate = worst_degenerate.max(d);
            }
        }
    }
    ok &= worst_degenerate < 1e-10;
    (ok, format!("{}; degenerate defect max {worst_degenerate:.1e}", notes.join(", ")))
}

fn reg_invariants() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in curved_problems() {
        let ins = Instrument { gaps: false, ..Instrument::default() };
        let cfg = SolverConfig::new(Method::Reg, 10_000).with_record_every(100).with_instrument(ins);
        let tr = run(&p, &cfg, &p.initial_point(0)).unwrap();
        let v = tr.violations;
        ok &= tr.abort.is_none() && v.norm_monotone == 0 && v.boundedness == 0;
        notes.push(format!("{} eta={:.3e} norm={} bound={}", p.name, tr.eta, v.norm_monotone, v.boundedness));
    }
    (ok, notes.join("; "))
}

fn rpeg_lyapunov() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let t = 10_000u64;
    for p in curved_problems() {
        let ins = Instrument { gaps: false, ..Instrument::default() };
        let cfg = SolverConfig::new(Method::Rpeg, t).with_record_every(100).with_instrument(ins);
        let tr = run(&p, &cfg, &p.initial_point(0)).unwrap();
        let b = p.bounds().unwrap();
        assert_eq!(tr.eta, b.step_size_rpeg());
        let cap = 16.0 * b.d * b.d / (b.sigma_bar * t as f64 * tr.eta * tr.eta);
        let fin = tr.final_op_norm * tr.final_op_norm;
        ok &= tr.abort.is_none() && tr.violations.lyapunov == 0 && tr.violations.boundedness == 0 && fin <= cap;
        notes.push(format!(
            "{} phi violations {} ||F(z_T)||^2 {fin:.2e} <= {cap:.2e}",
            p.name, tr.violations.lyapunov
        ));
    }
    (ok, notes.join("; "))
}

fn euclidean_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let n = 4;
        let s = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let a = (&s - s.transpose()) + 0.2 * b.transpose() * &b;
        let a = &a / a.norm();
        let am = a.clone();
        let p = VectorFieldProblem::new(
            "linear",
            Manifold::euclidean(n),
            move |z| Ok(Tangent::from_raw(z.clone(), &am * z.coords())),
            1.0,
        )
        .with_solution(Point::from_raw(DVector::zeros(n)))
        .with_constants(1.0, 2.0);
        let eta = 0.05 + 0.1 * rng.random::<f64>();
        let z0 = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
        let f = |z: &DVector<f64>| &a * z;

        let (mut eg, mut peg, mut og) = (z0.clone(), z0.clone(), z0.clone());
        let (mut peg_prev, mut og_prev) = (z0.clone(), z0.clone());
        let pt = |v: &DVector<f64>| Point::from_raw(v.clone());
        let (mut r_reg, mut r_rceg, mut r_rpeg, mut r_og) = (pt(&z0), pt(&z0), pt(&z0), pt(&z0));
        let mut rpeg_prev = p.field(&r_rpeg).unwrap();
        let mut og_prev_field = p.field(&r_og).unwrap();
        for _ in 0..1000 {
            let half = &eg - eta * f(&eg);
            eg = &eg - eta * f(&half);
            let half = &peg - eta * f(&peg_prev);
            peg = &peg - eta * f(&half);
            peg_prev = half;
            let next = &og - 2.0 * eta * f(&og) + eta * f(&og_prev);
            og_prev = og;
            og = next;

            r_reg = reg_step(&p, &r_reg, &p.field(&r_reg).unwrap(), eta).unwrap().z_next;
            r_rceg = rceg_step(&p, &r_rceg, &p.field(&r_rceg).unwrap(), eta).unwrap().z_next;
            let st = rpeg_step(&p, &r_rpeg, &rpeg_prev, eta).unwrap();
            r_rpeg = st.z_next;
            rpeg_prev = st.field_half;
            let fo = p.field(&r_og).unwrap();
            let next = rogda_step(&p, &r_og, &fo, &og_prev_field, eta).unwrap();
            og_prev_field = fo;
            r_og = next;

            for (x, y) in [(&r_reg, &eg), (&r_rceg, &eg), (&r_rpeg, &peg), (&r_og, &og)] {
                worst = worst.max((x.coords() - y).amax());
            }
        }
        for (method, target) in [(Method::Reg, &eg), (Method::Rceg, &eg), (Method::Rpeg, &peg), (Method::Rogda, &og)] {
            let cfg = SolverConfig::new(method, 1000).with_eta(eta).with_record_every(1000);
            let tr = run(&p, &cfg, &pt(&z0)).unwrap();
            worst = worst.max((tr.final_state.z.coords() - target).amax());
        }
    }
    (worst <= 1e-12, format!("max elementwise deviation over 1e3 steps {worst:.1e}"))
}

struct RateRuns {
    notes: Vec<String>,
    ok7: bool,
    ok8: bool,
    secs: f64,
}

fn rate_runs() -> RateRuns {
    let start = Instant::now();
    let p = problem("euclidean_bilinear", json!({}));
    let t = 100_000u64;
    let z0 = p.initial_point(0);
    let (lo, hi) = (1e3, 1e5);
    let mut notes = Vec::new();
    let mut ok7 = true;
    for method in [Method::Reg, Method::Rpeg] {
        let cfg = SolverConfig::new(method, t).with_record_every(100);
        let tr = run(&p, &cfg, &z0).unwrap();
        let last = fit_rate(&tr.records, Metric::OpNorm, lo, hi).unwrap();
        let avg = fit_rate(&tr.records, Metric::GapAvg, lo, hi).unwrap();
        ok7 &= (-0.6..=-0.4).contains(&last.slope) && (-1.15..=-0.85).contains(&avg.slope);
        notes.push(format!("{method} last {:.3} avg-gap {:.3}", last.slope, avg.slope));
    }
    let ins = Instrument { gaps: false, boundedness: false, ..Instrument::default() };
    let cfg = SolverConfig::new(Method::Rgda, t).with_record_every(100).with_instrument(ins);
    let tr = run(&p, &cfg, &z0).unwrap();
    let g = fit_rate(&tr.records, Metric::OpNorm, lo, hi).unwrap();
    ok7 &= g.slope >= 0.0;
    notes.push(format!("RGDA {:.3}", g.slope));

    let cfg = SolverConfig::new(Method::Rceg, t)
        .with_record_every(100)
        .with_instrument(Instrument { gaps: false, ..Instrument::default() });
    let tr = run(&p, &cfg, &z0).unwrap();
    let best = fit_rate(&tr.records, Metric::OpNormBest, lo, hi).unwrap();
    let ok8 = best.slope <= -0.4;
    notes.push(format!("RCEG best {:.3} (eta {})", best.slope, tr.eta));
    RateRuns { notes, ok7, ok8, secs: start.elapsed().as_secs_f64() }
}

fn sos() -> Outcome {
    let s = sos_random_search(1_000_000, 4, 9, Execution::Parallel);
    (
        s.counterexamples == 0 && s.certified == 1_000_000,
        format!("{} triples drawn, {} satisfied the hypotheses, {} counterexamples", s.drawn, s.certified, s.counterexamples),
    )
}

fn determinism() -> Outcome {
    let body = |dir: &std::path::Path, exec: &str| {
        format!(
            "output_dir = {:?}\nexecution = {exec:?}\nmethods = [\"REG\", \"RPEG\", \"ROGDA\", \"RCEG\"]\niterations = 2000\nrecord_every = 10\nseeds = [0, 1]\n[problem]\nname = \"hyperbolic_rmean_saddle\"\n",
            dir.to_str().unwrap()
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (d, e) in [(a.path(), "parallel"), (b.path(), "sequential")] {
        run_experiment(&ExperimentConfig::from_toml(&body(d, e), &[]).unwrap()).unwrap();
    }
    let mut files: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    let csvs: Vec<_> = files.iter().filter(|f| f.to_string_lossy().ends_with(".csv")).collect();
    let same = csvs
        .iter()
        .all(|f| fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap());
    (same && csvs.len() == 8, format!("{} CSVs compared byte for byte across reruns", csvs.len()))
}

fn main() {
    let started = Instant::now();
    let rates = rate_runs();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "geometry kernel", kernel_suite()),
        (2, "comparison inequality sweeps", comparison_sweeps()),
        (3, "holonomy bound", holonomy()),
        (4, "REG norm monotonicity and boundedness", reg_invariants()),
        (5, "RPEG Lyapunov descent", rpeg_lyapunov()),
        (6, "Euclidean reduction", euclidean_reduction()),
        (
            7,
            "rate exponents on euclidean_bilinear",
            (rates.ok7 && rates.secs < 300.0, format!("{} ({:.0}s)", rates.notes[..3].join(", "), rates.secs)),
        ),
        (8, "RCEG best-iterate rate", (rates.ok8, rates.notes[3].clone())),
        (9, "SOS certificate", sos()),
        (10, "determinism", determinism()),
    ];
    let mut failed = 0;
    for (n, name, (ok, detail)) in &results {
        println!("criterion {n:>2} {}: {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("acceptance: {}/{} passed in {:.1}s", results.len() - failed, results.len(), started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
