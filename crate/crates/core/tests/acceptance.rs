//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with its
//! measured error and runtime; the process fails if any criterion fails.

use std::ops::ControlFlow;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use s2ml::data::synthetic::logistic_dataset;
use s2ml::data::{
    load_dataset, parse_dataset, serialize_dataset, DataError, Dataset, Label, SparseMatrix,
};
use s2ml::harness::{
    compute_f_star, read_trace_csv, run_loaded, write_trace_csv, ExperimentSpec, TraceRecord,
    TRACE_HEADER,
};
use s2ml::parallel::Reduction;
use s2ml::problems::{linear_problem, Batch, Problem, ProblemConfig, ProblemKind};
use s2ml::solvers::{
    lbfgs_direction, run_solver, steihaug_cg, CurvaturePair, Method, SolverConfig,
};

mod common;
use common::{max_abs, max_abs_diff, normal_vec, random_instance};

type Verdict = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gradient finite differences", 5, gradient_check),
        ("hessian-vector finite differences", 5, hessian_check),
        (
            "trust-region subproblem vs brute force",
            10,
            subproblem_oracle,
        ),
        ("l-bfgs two-loop vs dense bfgs", 5, lbfgs_oracle),
        ("solver agreement", 10, solver_agreement),
        ("stron degeneracy", 5, stron_degeneracy),
        (
            "tron vs stron desk-scale comparison",
            60,
            desk_scale_comparison,
        ),
        ("data round trip", 5, data_round_trip),
        ("end-to-end cli", 10, cli_smoke),
        ("anchor values", 5, anchors),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let verdict = verdict.and_then(|detail| {
            if took <= Duration::from_secs(budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        match verdict {
            Ok(detail) => println!("PASS  {name:<40} {:>7.2}s  {detail}", took.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<40} {:>7.2}s  {detail}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const KINDS: [ProblemKind; 2] = [ProblemKind::Logistic, ProblemKind::SvmL2];

/// Fifty instances per loss, each with a random evaluation point. For the
/// squared hinge the point is redrawn until every margin is at least
/// `kink_gap` away from 1.
fn instances(kind: ProblemKind, kink_gap: f64) -> Vec<(Dataset, ProblemConfig, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + kind as u64);
    (0..50)
        .map(|_| {
            let (ds, cfg) = random_instance(&mut rng, kind);
            let dim = cfg.weight_dim(ds.n_cols());
            let w = loop {
                let w = normal_vec(&mut rng, dim);
                if kind == ProblemKind::Logistic
                    || margins(&ds, &cfg, &w).all(|m| (m - 1.0).abs() >= kink_gap)
                {
                    break w;
                }
            };
            (ds, cfg, w)
        })
        .collect()
}

fn margins<'a>(
    ds: &'a Dataset,
    cfg: &ProblemConfig,
    w: &'a [f64],
) -> impl Iterator<Item = f64> + 'a {
    let bias = cfg.add_bias;
    (0..ds.n_rows()).map(move |i| {
        let z = ds.features().row_dot(i, w) + if bias { w[ds.n_cols()] } else { 0.0 };
        ds.labels()[i] * z
    })
}

fn gradient_check() -> Verdict {
    let h = 1e-6;
    let mut worst = 0.0f64;
    for kind in KINDS {
        for (ds, cfg, w) in instances(kind, 0.0) {
            let p = linear_problem(&cfg, &ds, Reduction::Sequential).unwrap();
            let g = p.gradient(&w, &Batch::Full);
            let fd: Vec<f64> = (0..w.len())
                .map(|j| {
                    let (mut up, mut dn) = (w.clone(), w.clone());
                    up[j] += h;
                    dn[j] -= h;
                    (p.objective(&up, &Batch::Full) - p.objective(&dn, &Batch::Full)) / (2.0 * h)
                })
                .collect();
            worst = worst.max(max_abs_diff(&fd, &g) / max_abs(&g).max(1e-8));
        }
    }
    check(
        worst < 1e-6,
        format!("max relative error {worst:.2e} (< 1e-6)"),
    )
}

fn hessian_check() -> Verdict {
    let h = 1e-6;
    let (mut fd_err, mut sym_err, mut lin_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for kind in KINDS {
        for (ds, cfg, w) in instances(kind, 1e-3) {
            let p = linear_problem(&cfg, &ds, Reduction::Sequential).unwrap();
            let dim = w.len();
            let (u, v) = (normal_vec(&mut rng, dim), normal_vec(&mut rng, dim));
            let hv = p.hess_vec(&w, &Batch::Full, &v);
            let shifted =
                |t: f64| -> Vec<f64> { w.iter().zip(&v).map(|(a, b)| a + t * b).collect() };
            let (gp, gm) = (
                p.gradient(&shifted(h), &Batch::Full),
                p.gradient(&shifted(-h), &Batch::Full),
            );
            let fd: Vec<f64> = gp
                .iter()
                .zip(&gm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            fd_err = fd_err.max(max_abs_diff(&fd, &hv) / max_abs(&hv).max(1e-8));

            let hu = p.hess_vec(&w, &Batch::Full, &u);
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let norm = |a: &[f64]| dot(a, a).sqrt();
            let scale = (norm(&u) * norm(&hv)).max(norm(&v) * norm(&hu));
            sym_err = sym_err.max((dot(&u, &hv) - dot(&v, &hu)).abs() / scale);

            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let comb: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = p.hess_vec(&w, &Batch::Full, &comb);
            let rhs: Vec<f64> = hu.iter().zip(&hv).map(|(x, y)| a * x + b * y).collect();
            lin_err = lin_err.max(
                max_abs_diff(&lhs, &rhs) / max_abs(&rhs).max(a.abs() * max_abs(&hu)).max(1e-300),
            );
        }
    }
    check(
        fd_err < 1e-5 && sym_err < 1e-12 && lin_err < 1e-12,
        format!("finite-difference {fd_err:.2e} (< 1e-5), symmetry {sym_err:.2e}, linearity {lin_err:.2e} (< 1e-12)"),
    )
}

/// `g^T s + ½ s^T H s` for a symmetric 2×2 `H`.
fn model2(h: [[f64; 2]; 2], g: [f64; 2], s: [f64; 2]) -> f64 {
    let hs = [
        h[0][0] * s[0] + h[0][1] * s[1],
        h[1][0] * s[0] + h[1][1] * s[1],
    ];
    g[0] * s[0] + g[1] * s[1] + 0.5 * (s[0] * hs[0] + s[1] * hs[1])
}

/// Minimum of the model over the disk by exhaustive search: a 400×400
/// grid, a fine angular scan of the boundary refined by golden section,
/// and the unconstrained minimizer when it is feasible.
fn brute_force_trs(h: [[f64; 2]; 2], g: [f64; 2], radius: f64) -> f64 {
    let m = |s: [f64; 2]| model2(h, g, s);
    let mut best = 0.0f64;
    let n = 400;
    for i in 0..n {
        for j in 0..n {
            let s = [
                radius * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                radius * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
            ];
            if s[0].hypot(s[1]) <= radius {
                best = best.min(m(s));
            }
        }
    }
    let on_circle = |t: f64| m([radius * t.cos(), radius * t.sin()]);
    let k = 3600;
    let step = std::f64::consts::TAU / k as f64;
    let (mut arg, mut val) = (0.0, f64::INFINITY);
    for i in 0..k {
        let t = i as f64 * step;
        if on_circle(t) < val {
            (arg, val) = (t, on_circle(t));
        }
    }
    // golden-section polish inside the winning bracket
    let (mut a, mut b) = (arg - step, arg + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if on_circle(c) < on_circle(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best = best.min(val).min(on_circle(0.5 * (a + b)));
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if h[0][0] > 0.0 && det > 0.0 {
        let s = [
            -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
            -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
        ];
        if s[0].hypot(s[1]) <= radius {
            best = best.min(m(s));
        }
    }
    best
}

fn subproblem_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut indefinite = 0;
    for case in 0..200 {
        let (a, b, c): (f64, f64, f64) = (
            2.0 * rng.sample::<f64, _>(StandardNormal),
            2.0 * rng.sample::<f64, _>(StandardNormal),
            2.0 * rng.sample::<f64, _>(StandardNormal),
        );
        let h = [[a, b], [b, c]];
        let mut g = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        if case % 10 == 0 {
            // nearly hard case: almost no gradient along the lowest eigenvector
            let lo = 0.5 * (a + c) - (0.25 * (a - c).powi(2) + b * b).sqrt();
            let e = if b.abs() > 1e-12 {
                [lo - c, b]
            } else if a <= c {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            };
            let e_norm = e[0].hypot(e[1]);
            let e = [e[0] / e_norm, e[1] / e_norm];
            let t = g[0] * e[0] + g[1] * e[1] - 1e-4;
            g = [g[0] - t * e[0], g[1] - t * e[1]];
        }
        if a * c - b * b < 0.0 || a < 0.0 {
            indefinite += 1;
        }
        let radius = rng.gen_range(0.1..3.0);
        let hess = move |v: &[f64]| {
            vec![
                h[0][0] * v[0] + h[0][1] * v[1],
                h[1][0] * v[0] + h[1][1] * v[1],
            ]
        };
        let sol = steihaug_cg(&hess, &g, radius, 1e-12, 50);
        let s = [sol.step[0], sol.step[1]];
        if s[0].hypot(s[1]) > radius * (1.0 + 1e-12) {
            return Err(format!("case {case}: step outside the trust region"));
        }
        let gap = (model2(h, g, s) - brute_force_trs(h, g, radius)).abs();
        worst = worst.max(gap);
    }
    check(
        worst <= 1e-6,
        format!("max |m(s) − brute force| {worst:.2e} (≤ 1e-6), {indefinite} non-convex cases"),
    )
}

fn lbfgs_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(1..=12);
        let m = rng.gen_range(1..=8);
        // SPD matrix A = BᵀB + ½I supplies exact curvature pairs y = A s
        let bmat: Vec<Vec<f64>> = (0..d).map(|_| normal_vec(&mut rng, d)).collect();
        let a: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d).map(|k| bmat[k][i] * bmat[k][j]).sum::<f64>()
                            + if i == j { 0.5 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let matvec = |mat: &[Vec<f64>], x: &[f64]| -> Vec<f64> {
            mat.iter()
                .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
                .collect()
        };
        let pairs: Vec<CurvaturePair> = (0..m)
            .map(|_| {
                let s = normal_vec(&mut rng, d);
                let y = matvec(&a, &s);
                CurvaturePair::new(s, y).expect("positive curvature")
            })
            .collect();
        let g = normal_vec(&mut rng, d);

        // dense BFGS recursion from H₀ = γI
        let newest = pairs.last().unwrap();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let gamma = dot(&newest.s, &newest.y) / dot(&newest.y, &newest.y);
        let mut hm: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { gamma } else { 0.0 }).collect())
            .collect();
        for p in &pairs {
            let rho = 1.0 / dot(&p.s, &p.y);
            // V = I − ρ y sᵀ, H ← Vᵀ H V + ρ s sᵀ
            let v: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| f64::from(u8::from(i == j)) - rho * p.y[i] * p.s[j])
                        .collect()
                })
                .collect();
            let hv: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).map(|k| hm[i][k] * v[k][j]).sum())
                        .collect()
                })
                .collect();
            hm = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            (0..d).map(|k| v[k][i] * hv[k][j]).sum::<f64>() + rho * p.s[i] * p.s[j]
                        })
                        .collect()
                })
                .collect();
        }
        let dense: Vec<f64> = matvec(&hm, &g).into_iter().map(|x| -x).collect();
        let two_loop = lbfgs_direction(&pairs, &g);
        let norm = |x: &[f64]| dot(x, x).sqrt();
        let diff: Vec<f64> = dense.iter().zip(&two_loop).map(|(p, q)| p - q).collect();
        worst = worst.max(norm(&diff) / norm(&dense));
    }
    check(
        worst <= 1e-10,
        format!("max relative difference {worst:.2e} (≤ 1e-10)"),
    )
}

fn solve_trace(p: &dyn Problem, cfg: &SolverConfig) -> (Vec<(usize, f64, bool)>, f64) {
    let mut seen = Vec::new();
    let out = run_solver(p, cfg, |s| {
        seen.push((s.iter, s.objective, s.step_accepted));
        ControlFlow::Continue(())
    })
    .unwrap();
    (seen, out.objective)
}

fn solver_agreement() -> Verdict {
    let ds = logistic_dataset(200, 20, 0.5, 42);
    let cfg = ProblemConfig::new(ProblemKind::Logistic, 0.01);
    let p = linear_problem(&cfg, &ds, Reduction::default()).unwrap();
    let mut finals = Vec::new();
    let mut tron_monotone = true;
    for m in Method::ALL {
        let sc = SolverConfig {
            grad_tol: 1e-10,
            ..SolverConfig::new(m)
        };
        let (trace, f) = solve_trace(&*p, &sc);
        if m == Method::Tron {
            let accepted: Vec<f64> = trace
                .iter()
                .filter(|t| t.0 == 0 || t.2)
                .map(|t| t.1)
                .collect();
            tron_monotone = accepted.windows(2).all(|w| w[1] <= w[0]);
        }
        finals.push(f);
    }
    let spread = finals
        .iter()
        .fold(0.0f64, |acc, f| acc.max((f - finals[0]).abs()));
    check(
        spread <= 1e-8 && tron_monotone,
        format!("objective spread {spread:.2e} (≤ 1e-8), TRON monotone: {tron_monotone}"),
    )
}

fn stron_degeneracy() -> Verdict {
    let ds = logistic_dataset(400, 25, 0.4, 6);
    let cfg = ProblemConfig::new(ProblemKind::Logistic, 1e-3);
    let p = linear_problem(&cfg, &ds, Reduction::Deterministic).unwrap();
    let run = |m| {
        let sc = SolverConfig {
            batch0_frac: 1.0,
            grad_tol: 1e-10,
            ..SolverConfig::new(m)
        };
        solve_trace(&*p, &sc)
            .0
            .into_iter()
            .map(|t| (t.0, t.1.to_bits()))
            .collect::<Vec<_>>()
    };
    let (tron, stron) = (run(Method::Tron), run(Method::Stron));
    check(
        tron == stron,
        format!(
            "{} iterations, bit-identical: {}",
            tron.len() - 1,
            tron == stron
        ),
    )
}

/// First record at or below `gap`.
fn first_below(trace: &[TraceRecord], gap: f64) -> Option<&TraceRecord> {
    trace.iter().find(|r| r.optimality_gap <= gap)
}

fn desk_scale_comparison() -> Verdict {
    let (n, d) = (5000, 200);
    let mut wins = 0;
    let mut notes = Vec::new();
    for seed in [1u64, 2, 3] {
        let ds = logistic_dataset(n, d, 0.1, seed);
        let cfg = ProblemConfig::new(ProblemKind::Logistic, 1.0 / n as f64);
        let f_star = compute_f_star(&*linear_problem(&cfg, &ds, Reduction::default()).unwrap())
            .map_err(|e| e.to_string())?;
        let spec = ExperimentSpec::new(
            cfg,
            vec![
                SolverConfig::new(Method::Tron),
                SolverConfig::new(Method::Stron),
            ],
            "unused",
        );
        let spec = ExperimentSpec {
            solvers: spec
                .solvers
                .into_iter()
                .map(|s| SolverConfig {
                    rng_seed: seed,
                    ..s
                })
                .collect(),
            ..spec
        };
        let traces = run_loaded(&spec, &ds, None, f_star).map_err(|e| e.to_string())?;
        let t = first_below(&traces["tron"][0], 1e-3);
        let s = first_below(&traces["stron"][0], 1e-3);
        match (t, s) {
            (Some(t), Some(s)) => {
                let ok = s.rows_touched <= t.rows_touched;
                wins += usize::from(ok);
                notes.push(format!(
                    "seed {seed}: rows stron {} vs tron {}, time {:.3}s vs {:.3}s",
                    s.rows_touched, t.rows_touched, s.wall_time_s, t.wall_time_s
                ));
            }
            _ => notes.push(format!("seed {seed}: gap 1e-3 not reached")),
        }
    }
    check(
        wins >= 2,
        format!("{wins}/3 seeds favour stron; {}", notes.join("; ")),
    )
}

fn random_document<R: Rng>(rng: &mut R) -> String {
    let rows = rng.gen_range(0..30);
    let mut text = String::new();
    for _ in 0..rows {
        if rng.gen_bool(0.1) {
            text.push_str("# comment\n");
        }
        text.push_str(["+1", "-1", "1", "0"][rng.gen_range(0..4)]);
        let mut idx: Vec<usize> = (1..50).filter(|_| rng.gen_bool(0.15)).collect();
        // shuffle so indices arrive out of order
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        for i in idx {
            let v: f64 = match rng.gen_range(0..3) {
                0 => rng.sample::<f64, _>(StandardNormal) * 10f64.powi(rng.gen_range(-300..300)),
                1 => f64::from(rng.gen_range(-100i32..100)),
                _ => rng.gen_range(-1.0..1.0),
            };
            text.push_str(&format!(" {i}:{v:e}"));
        }
        if rng.gen_bool(0.2) {
            text.push_str(" # trailing");
        }
        text.push('\n');
    }
    text
}

fn data_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for k in 0..500 {
        let text = random_document(&mut rng);
        let first = parse_dataset(&text, None).map_err(|e| format!("dataset {k}: {e}"))?;
        let second = parse_dataset(&serialize_dataset(&first), Some(first.n_cols()))
            .map_err(|e| e.to_string())?;
        if first != second {
            return Err(format!("dataset {k} changed across a round trip"));
        }
    }
    let comments =
        load_dataset(&common::fixture("comments.svm"), None).map_err(|e| e.to_string())?;
    let zero = load_dataset(&common::fixture("label_zero.svm"), None).map_err(|e| e.to_string())?;
    let unsorted =
        load_dataset(&common::fixture("unsorted.svm"), None).map_err(|e| e.to_string())?;
    let duplicate = load_dataset(&common::fixture("duplicate.svm"), None);
    let fixtures_ok = comments.n_rows() == 3
        && zero.label(0) == Label::Negative
        && unsorted.features().row(0).0 == [1, 4, 8]
        && matches!(duplicate, Err(DataError::DuplicateIndex { .. }));
    check(
        fixtures_ok,
        format!("500 random datasets identical; fixtures handled: {fixtures_ok}"),
    )
}

fn cli_smoke() -> Verdict {
    let dir = common::staged(&["train1000.svm", "test300.svm"]);
    let out = Command::new(env!("CARGO_BIN_EXE_s2ml"))
        .current_dir(dir.path())
        .args([
            "benchmark",
            "--data",
            "train1000.svm",
            "--test-data",
            "test300.svm",
            "--solver",
            "tron",
            "--solver",
            "stron",
            "--out-dir",
            "results",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let results = dir.path().join("results");
    let csv_path = results.join("traces.csv");
    let csv = std::fs::read_to_string(&csv_path).map_err(|e| e.to_string())?;
    let header_ok = csv.lines().next() == Some(TRACE_HEADER.join(",").as_str());

    let mut svgs_ok = true;
    for name in ["gap.svg", "accuracy.svg"] {
        let svg =
            std::fs::read_to_string(results.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let doc = roxmltree::Document::parse(&svg).map_err(|e| format!("{name}: {e}"))?;
        let root = doc.root_element();
        svgs_ok &= root.tag_name().name() == "svg"
            && root.tag_name().namespace() == Some("http://www.w3.org/2000/svg")
            && doc
                .descendants()
                .filter(|n| n.has_tag_name("polyline"))
                .count()
                == 2;
    }

    let traces = read_trace_csv(&csv_path).map_err(|e| e.to_string())?;
    let again = results.join("again.csv");
    write_trace_csv(&traces, &again).map_err(|e| e.to_string())?;
    let lossless = std::fs::read(&again).map_err(|e| e.to_string())? == csv.as_bytes();
    check(
        header_ok && svgs_ok && lossless,
        format!("header exact: {header_ok}, well-formed svg: {svgs_ok}, csv lossless: {lossless}"),
    )
}

fn anchors() -> Verdict {
    let mut sets: Vec<Dataset> = (0..20)
        .map(|s| logistic_dataset(1 + 37 * s, 1 + s % 9, 0.4, s as u64))
        .collect();
    sets.push(load_dataset(&common::fixture("train1000.svm"), None).map_err(|e| e.to_string())?);
    sets.push(
        Dataset::new(
            SparseMatrix::from_sorted_rows(3, &[vec![], vec![]]).unwrap(),
            vec![Label::Positive, Label::Negative],
        )
        .unwrap(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in KINDS {
        for _ in 0..20 {
            sets.push(random_instance(&mut rng, kind).0);
        }
    }
    let mut worst = 0.0f64;
    for ds in &sets {
        for mode in [
            Reduction::Sequential,
            Reduction::Parallel,
            Reduction::Deterministic,
        ] {
            for (kind, expected) in [
                (ProblemKind::Logistic, std::f64::consts::LN_2),
                (ProblemKind::SvmL2, 1.0),
            ] {
                let p = linear_problem(&ProblemConfig::new(kind, 0.0), ds, mode).unwrap();
                let f = p.objective(&vec![0.0; p.dim()], &Batch::Full);
                worst = worst.max((f - expected).abs());
            }
        }
    }
    check(
        worst <= 1e-15,
        format!(
            "{} datasets, max deviation {worst:.1e} (≤ 1e-15)",
            sets.len()
        ),
    )
}
