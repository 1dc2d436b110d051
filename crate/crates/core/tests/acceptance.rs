//! Acceptance suite: one pass/fail line per criterion. Run with
//! `cargo test -p ibplan --test acceptance`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ibplan::bench::{records_csv, run_bench, BenchConfig};
use ibplan::biclique::{biclique_cover, biclique_cover_with_report, validate_cover, FiniteElementGraph};
use ibplan::cdc::{ib_feasible, is_pairwise_ib_representable};
use ibplan::formulation::{ib_waypoint, FootstepParams, Group, VarType};
use ibplan::geometry::{constrained_delaunay, triangulate, Point2};
use ibplan::partition::partition_from_cdt;
use ibplan::scenario::{build_model, gen_env, prepare, solve_prepared, Method, PipelineParams, Prepared};
use ibplan::solver::{solve_lp, solve_milp, Limits, LpStatus};

const SCENARIOS_PER_COUNT: u64 = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// The 300 generated scenarios, prepared once and shared.
struct Corpus {
    items: Vec<(u64, usize, Prepared)>,
    /// Time to triangulate, partition and check each scenario.
    check_times: Vec<Duration>,
}

fn corpus() -> Corpus {
    let mut items = Vec::new();
    let mut check_times = Vec::new();
    for k in 1..=3 {
        for seed in 0..SCENARIOS_PER_COUNT {
            let env = gen_env(seed, k);
            let t = Instant::now();
            let tri = constrained_delaunay(&env).expect("triangulation");
            let p = partition_from_cdt(&tri).expect("partition");
            let _ = is_pairwise_ib_representable(&p.cdc());
            check_times.push(t.elapsed());
            items.push((seed, k, prepare(&env, false).expect("pipeline stages")));
        }
    }
    Corpus { items, check_times }
}

fn c1_representability(c: &Corpus) -> Outcome {
    let failing: Vec<String> = c
        .items
        .iter()
        .filter(|(_, _, p)| !p.ib_check.representable)
        .map(|(s, k, p)| {
            let w = p.ib_check.witness.unwrap_or_default();
            format!("seed {s}/{k} obstacles (triple {:?})", w.map(|v| v + 1))
        })
        .collect();
    let slowest = c.check_times.iter().max().copied().unwrap_or_default();
    let pass = failing.is_empty() && slowest < Duration::from_secs(1);
    let n = c.items.len();
    let mut detail = format!("{}/{n} representable, slowest {:.1} ms", n - failing.len(), slowest.as_secs_f64() * 1e3);
    if !failing.is_empty() {
        detail += &format!("; not representable: {}", failing.join(", "));
    }
    outcome(pass, detail)
}

fn c2_cover_validity(c: &Corpus) -> Outcome {
    let bad = c
        .items
        .iter()
        .filter(|(_, _, p)| validate_cover(&p.cover.cover, &p.conflict).is_err())
        .count();
    outcome(bad == 0, format!("{}/{} covers valid", c.items.len() - bad, c.items.len()))
}

fn c3_separator_bounds(c: &Corpus) -> Outcome {
    let calls: Vec<_> = c.items.iter().flat_map(|(_, _, p)| &p.cover.separators).collect();
    let bad = calls.iter().filter(|r| !r.within_bounds).count();
    outcome(bad == 0, format!("{}/{} separator calls within bounds", calls.len() - bad, calls.len()))
}

fn c4_merge(c: &Corpus) -> Outcome {
    let grew = c.items.iter().filter(|(_, _, p)| p.merged.depth() > p.cover.cover.depth()).count();
    let reductions: Vec<f64> = c
        .items
        .iter()
        .filter(|(_, k, p)| *k == 3 && p.cover.cover.depth() > 0)
        .map(|(_, _, p)| 100.0 * (1.0 - p.merged.depth() as f64 / p.cover.cover.depth() as f64))
        .collect();
    let avg = reductions.iter().sum::<f64>() / reductions.len() as f64;
    outcome(
        grew == 0 && (25.0..=65.0).contains(&avg),
        format!("merged > original in {grew} scenarios; 3-obstacle average reduction {avg:.2}% (band 25-65%)"),
    )
}

fn c5_ideality(c: &Corpus) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut trials = 0;
    let mut bad = Vec::new();
    let chosen: Vec<_> = c.items.iter().filter(|(_, _, p)| p.ib_check.representable).step_by(7).take(20).collect();
    for (seed, k, p) in &chosen {
        let base = ib_waypoint(&p.partition, &p.merged);
        for _ in 0..50 {
            let mut m = base.clone();
            m.objective = (0..m.num_vars()).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
            trials += 1;
            let lp = solve_lp(&m).expect("lp");
            let frac = m.max_fractionality(&lp.values);
            let milp = solve_milp(&m, Limits::default()).expect("milp");
            if lp.status != LpStatus::Optimal || frac > 1e-6 || milp.nodes != 1 {
                bad.push(format!("seed {seed}/{k}: fractionality {frac:.1e}, {} nodes", milp.nodes));
            }
        }
    }
    let pass = chosen.len() == 20 && bad.is_empty();
    let mut detail = format!("{} scenarios, {trials} trials, {} with fractional z or >1 node", chosen.len(), bad.len());
    if let Some(first) = bad.first() {
        detail += &format!(" (first: {first})");
    }
    outcome(pass, detail)
}

fn c6_oracle(c: &Corpus) -> Outcome {
    let mut instances = 0;
    let mut checks = 0u64;
    let mut mismatches = 0u64;
    for (_, _, p) in c.items.iter().filter(|(_, _, p)| p.partition.ground_set.len() <= 16 && p.ib_check.representable) {
        instances += 1;
        let cdc = p.partition.cdc();
        let n = cdc.ground_set_size();
        for cover in [&p.cover.cover, &p.merged] {
            for f in cdc.families() {
                checks += 1;
                mismatches += u64::from(!ib_feasible(cover, f));
            }
            for u in 0..n {
                for v in u..n {
                    for w in v..n {
                        let mut t = vec![u, v, w];
                        t.dedup();
                        checks += 1;
                        mismatches += u64::from(ib_feasible(cover, &t) != cdc.is_feasible(&t));
                    }
                }
            }
        }
    }
    outcome(
        instances > 0 && mismatches == 0,
        format!("{instances} instances with |J| <= 16, {checks} checks, {mismatches} mismatches"),
    )
}

fn c7_equivalence(c: &Corpus) -> Outcome {
    let mut params = PipelineParams { limits: Limits::with_time(60.0), ..PipelineParams::default() };
    params.footstep.steps = 8;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for (seed, _, p) in c.items.iter().filter(|(_, k, _)| *k == 1).take(10) {
        let env = gen_env(*seed, 1);
        let (ib, _, _) = solve_prepared(&env, p, Method::Ib, &params).expect("ib solve");
        let (bm, _, _) = solve_prepared(&env, p, Method::BigM, &params).expect("big-M solve");
        slowest = slowest.max(ib.seconds).max(bm.seconds);
        match (ib.objective, bm.objective) {
            (Some(a), Some(b)) if ib.status.solved() && bm.status.solved() => {
                let ok = ib.status == bm.status && (a - b).abs() <= 1e-6 && ib.seconds <= 60.0 && bm.seconds <= 60.0;
                worst = worst.max((a - b).abs());
                if !ok {
                    pass = false;
                    lines.push(format!("seed {seed}: ib {a} ({:?}) vs big-M {b} ({:?})", ib.status, bm.status));
                }
            }
            _ => {
                pass = false;
                lines.push(format!("seed {seed}: ib {:?}, big-M {:?}", ib.status, bm.status));
            }
        }
    }
    let mut detail = format!("10 scenarios, max |difference| {worst:.1e}, slowest solve {slowest:.2}s");
    if !lines.is_empty() {
        detail += &format!("; {}", lines.join("; "));
    }
    outcome(pass, detail)
}

fn c8_sizes(c: &Corpus) -> Outcome {
    let fp = FootstepParams::default();
    let n = fp.steps;
    let mut checked = 0;
    let mut bad = Vec::new();
    for (seed, k, p) in &c.items {
        let env = gen_env(*seed, *k);
        let d = p.partition.len();
        let rows = p.partition.halfspace_count();
        let j = p.partition.ground_set.len();
        let m = build_model(&env, p, Method::BigM, &fp).expect("big-M model");
        let s = m.summary();
        if (s.binaries, s.continuous, s.inequalities + s.equalities, s.equalities) != (n * d, 0, n * (rows + 1), n) {
            bad.push(format!("big-M seed {seed}/{k}: {s:?}"));
        }
        checked += 1;
        if p.ib_check.representable {
            for (method, cover) in [(Method::Ib, &p.merged), (Method::IbOrig, &p.cover.cover)] {
                let t = cover.depth();
                let m = build_model(&env, p, method, &fp).expect("ib model");
                let s = m.summary();
                let expect = (n * t, n * j, n * (2 * t + 1), n);
                if (s.binaries, s.continuous, s.inequalities + s.equalities, s.equalities) != expect {
                    bad.push(format!("{method} seed {seed}/{k}: {s:?}"));
                }
                // Nothing else in the model is counted as assignment.
                let other = m
                    .variables
                    .iter()
                    .filter(|v| v.group == Group::Assignment && v.var_type == VarType::Continuous)
                    .count();
                if other != n * j {
                    bad.push(format!("{method} seed {seed}/{k}: {other} assignment multipliers"));
                }
                checked += 1;
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} models checked, {} mismatches {}", bad.len(), bad.first().cloned().unwrap_or_default()))
}

/// Delaunay triangulation of `n` random points in the unit square.
fn synthetic(n: usize, seed: u64) -> FiniteElementGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point2> = (0..n).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
    let tri = triangulate(&pts, &[]).expect("triangulation");
    FiniteElementGraph::from_elements(tri.vertices.len(), tri.triangles.iter().map(|t| t.to_vec()).collect())
}

fn c9_complexity() -> Outcome {
    let mut points = Vec::new();
    let mut slowest = 0.0f64;
    let mut covers_ok = true;
    for n in [20usize, 40, 80] {
        let g = synthetic(n, n as u64);
        let complement = g.complement();
        let single = Instant::now();
        let report = biclique_cover_with_report(&g);
        slowest = slowest.max(single.elapsed().as_secs_f64());
        covers_ok &= validate_cover(&report.cover, &complement).is_ok();
        // Repeat small instances so timer resolution does not dominate.
        let start = Instant::now();
        let mut runs = 0;
        while runs < 3 || start.elapsed() < Duration::from_millis(300) {
            std::hint::black_box(biclique_cover(&g));
            runs += 1;
        }
        points.push(((n as f64).ln(), (start.elapsed().as_secs_f64() / runs as f64).ln()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let times: Vec<String> = points.iter().map(|p| format!("{:.2} ms", p.1.exp() * 1e3)).collect();
    outcome(
        covers_ok && slope <= 4.5 && slowest < 10.0,
        format!("n = 20/40/80: {}; log-log slope {slope:.2}; slowest single run {slowest:.2}s", times.join(", ")),
    )
}

fn c10_determinism() -> Outcome {
    let mut params = PipelineParams { limits: Limits { nodes: Some(400), ..Limits::default() }, ..PipelineParams::default() };
    params.footstep.steps = 4;
    let cfg = BenchConfig { seeds: (0..5).collect(), obstacle_counts: vec![1, 2, 3], methods: Method::ALL.to_vec(), params };
    let a = records_csv(&run_bench(&cfg).expect("bench"));
    let b = records_csv(&run_bench(&cfg).expect("bench"));
    let records = a.lines().count() - 1;
    outcome(a == b, format!("{records} records, {} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let start = Instant::now();
    let corpus = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("IB-representability of CDT partitions", Box::new(|| c1_representability(&corpus))),
        ("biclique cover validity", Box::new(|| c2_cover_validity(&corpus))),
        ("separator size bounds", Box::new(|| c3_separator_bounds(&corpus))),
        ("merge monotonicity and reduction", Box::new(|| c4_merge(&corpus))),
        ("ideality of the IB waypoint formulation", Box::new(|| c5_ideality(&corpus))),
        ("IB scheme matches CDC feasibility", Box::new(|| c6_oracle(&corpus))),
        ("big-M and IB optima agree (N = 8)", Box::new(|| c7_equivalence(&corpus))),
        ("formulation size accounting", Box::new(|| c8_sizes(&corpus))),
        ("cover running-time growth", Box::new(c9_complexity)),
        ("bench determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {} - {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/10 passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
