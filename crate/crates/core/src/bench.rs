//! Batch runs over seeds × obstacle counts × methods, with CSV output and
//! the summary tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::scenario::{bench_record, gen_env, BenchRecord, Method, PipelineError, PipelineParams, RunStatus};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    pub obstacle_counts: Vec<usize>,
    pub methods: Vec<Method>,
    pub params: PipelineParams,
}

/// Runs every (seed, count, method) job in parallel. Records come back
/// sorted by obstacle count, seed and method.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, PipelineError> {
    let mut jobs = Vec::new();
    for &k in &cfg.obstacle_counts {
        for &seed in &cfg.seeds {
            for &m in &cfg.methods {
                jobs.push((k, seed, m));
            }
        }
    }
    let mut records = jobs
        .par_iter()
        .map(|&(k, seed, m)| bench_record(&gen_env(seed, k), m, &cfg.params))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.obstacles, r.scenario, r.method));
    Ok(records)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: u64,
    obstacles: usize,
    method: &'a str,
    status: &'a str,
    nodes: usize,
    objective: String,
    binaries: usize,
    continuous: usize,
    inequalities: usize,
    equalities: usize,
    depth_original: usize,
    depth_merged: usize,
    vertices: usize,
    free_faces: usize,
    halfspaces: usize,
}

/// The deterministic columns only; wall-clock times go to
/// [`timings_csv`].
pub fn records_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            scenario: r.scenario,
            obstacles: r.obstacles,
            method: r.method.as_str(),
            status: r.status.as_str(),
            nodes: r.nodes,
            objective: r.objective.map(|o| format!("{o:.9}")).unwrap_or_default(),
            binaries: r.binaries,
            continuous: r.continuous,
            inequalities: r.inequalities,
            equalities: r.equalities,
            depth_original: r.depth_original,
            depth_merged: r.depth_merged,
            vertices: r.vertices,
            free_faces: r.free_faces,
            halfspaces: r.halfspaces,
        })
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8 csv")
}

pub fn timings_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "obstacles", "method", "seconds"]).expect("csv header");
    for r in records {
        w.write_record([
            r.scenario.to_string(),
            r.obstacles.to_string(),
            r.method.to_string(),
            format!("{:.6}", r.seconds),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8 csv")
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn write_table(out: &mut String, title: &str, header: &[String], rows: &[(String, Vec<String>)]) {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(title.len());
    let col_w = header.iter().map(String::len).chain(rows.iter().flat_map(|(_, c)| c.iter().map(String::len))).max().unwrap_or(0);
    let _ = write!(out, "{title:<label_w$}");
    for h in header {
        let _ = write!(out, "  {h:>col_w$}");
    }
    out.push('\n');
    for (label, cells) in rows {
        let _ = write!(out, "{label:<label_w$}");
        for c in cells {
            let _ = write!(out, "  {c:>col_w$}");
        }
        out.push('\n');
    }
    out.push('\n');
}

/// Per-obstacle-count method comparison (solve statistics and assignment
/// sizes), then partition and cover statistics per obstacle count.
pub fn tables(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let mut by_count: BTreeMap<usize, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_count.entry(r.obstacles).or_default().push(r);
    }
    for (&k, recs) in &by_count {
        let methods: Vec<Method> = {
            let mut m: Vec<Method> = recs.iter().map(|r| r.method).collect();
            m.sort();
            m.dedup();
            m
        };
        let mut fastest: BTreeMap<Method, usize> = BTreeMap::new();
        let mut by_scenario: BTreeMap<u64, Vec<&BenchRecord>> = BTreeMap::new();
        for r in recs {
            by_scenario.entry(r.scenario).or_default().push(r);
        }
        for rs in by_scenario.values() {
            let best = rs
                .iter()
                .filter(|r| r.status == RunStatus::Optimal)
                .min_by(|a, b| a.seconds.total_cmp(&b.seconds).then(a.method.cmp(&b.method)));
            if let Some(b) = best {
                *fastest.entry(b.method).or_default() += 1;
            }
        }
        let of = |m: Method| recs.iter().filter(move |r| r.method == m);
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();
        let mut row = |label: &str, f: &dyn Fn(Method) -> String| {
            rows.push((label.to_string(), methods.iter().map(|&m| f(m)).collect()));
        };
        row("Fastest", &|m| fastest.get(&m).copied().unwrap_or(0).to_string());
        row("Timeouts", &|m| {
            of(m).filter(|r| matches!(r.status, RunStatus::TimeLimit | RunStatus::NodeLimit)).count().to_string()
        });
        let times = |m: Method| mean_std(&of(m).filter(|r| r.status.solved()).map(|r| r.seconds).collect::<Vec<_>>());
        row("Solve Time Avg", &|m| format!("{:.2}", times(m).0));
        row("Solve Time Std", &|m| format!("{:.2}", times(m).1));
        let size = |m: Method, f: fn(&BenchRecord) -> usize| {
            format!("{:.2}", mean(of(m).filter(|r| r.status.solved()).map(|r| f(r) as f64)))
        };
        row("Binary Var.", &|m| size(m, |r| r.binaries));
        row("Cont. Var.", &|m| size(m, |r| r.continuous));
        row("Inequalities", &|m| size(m, |r| r.inequalities));
        if recs.iter().any(|r| !r.status.solved()) {
            row("Not IB-repr.", &|m| of(m).filter(|r| !r.status.solved()).count().to_string());
        }
        let header: Vec<String> = methods.iter().map(|m| m.to_string()).collect();
        let title = format!("{k} obstacle{}", if k == 1 { "" } else { "s" });
        write_table(&mut out, &title, &header, &rows);
    }

    // One entry per scenario, whatever the method.
    let mut scenarios: BTreeMap<(usize, u64), &BenchRecord> = BTreeMap::new();
    for r in records {
        scenarios.entry((r.obstacles, r.scenario)).or_insert(r);
    }
    let counts: Vec<usize> = by_count.keys().copied().collect();
    let stat = |k: usize, f: &dyn Fn(&BenchRecord) -> Option<f64>| {
        format!("{:.2}", mean(scenarios.iter().filter(|((c, _), _)| *c == k).filter_map(|(_, r)| f(r))))
    };
    let rows: Vec<(String, Vec<String>)> = vec![
        ("Vertices".into(), counts.iter().map(|&k| stat(k, &|r| Some(r.vertices as f64))).collect()),
        ("B.C. Original".into(), counts.iter().map(|&k| stat(k, &|r| Some(r.depth_original as f64))).collect()),
        ("B.C. Merged".into(), counts.iter().map(|&k| stat(k, &|r| Some(r.depth_merged as f64))).collect()),
        (
            "B.C. Reduction (%)".into(),
            counts.iter().map(|&k| stat(k, &|r| reduction(r.depth_original, r.depth_merged))).collect(),
        ),
        ("Free Faces".into(), counts.iter().map(|&k| stat(k, &|r| Some(r.free_faces as f64))).collect()),
        ("F.F. Halfspaces".into(), counts.iter().map(|&k| stat(k, &|r| Some(r.halfspaces as f64))).collect()),
    ];
    let header: Vec<String> = counts.iter().map(|k| k.to_string()).collect();
    write_table(&mut out, "Obstacles", &header, &rows);
    out
}

/// `100·(1 − merged/original)`; `None` for an empty cover.
pub fn reduction(original: usize, merged: usize) -> Option<f64> {
    (original > 0).then(|| 100.0 * (1.0 - merged as f64 / original as f64))
}

/// Writes `records.csv`, `timings.csv` and `tables.txt` into `dir`.
pub fn write_bench(dir: &Path, records: &[BenchRecord]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("records.csv"), records_csv(records))?;
    fs::write(dir.join("timings.csv"), timings_csv(records))?;
    fs::write(dir.join("tables.txt"), tables(records))?;
    Ok(())
}
