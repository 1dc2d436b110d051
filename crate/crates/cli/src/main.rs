use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ibplan::bench::{run_bench, tables, write_bench, BenchConfig};
use ibplan::biclique::{separator, FiniteElementGraph};
use ibplan::formulation::{footholds, parse_lp, write_lp, Objective};
use ibplan::geometry::Environment;
use ibplan::plot;
use ibplan::scenario::{build_model, gen_env, prepare, solve_prepared, Method, PipelineParams};
use ibplan::solver::{solve_milp, Limits};

#[derive(Parser)]
#[command(name = "ibplan", version, about = "Obstacle-avoiding footstep planning with ideal disjunctive formulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Scenario {
    /// Environment JSON; overrides --seed/--obstacles.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    obstacles: usize,
    /// Greedily merge adjacent free faces.
    #[arg(long)]
    merge_faces: bool,
}

impl Scenario {
    fn load(&self) -> Result<Environment> {
        match &self.env {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let env = Environment::from_json(&text)?;
                env.validate()?;
                Ok(env)
            }
            None => Ok(gen_env(self.seed, self.obstacles)),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Ib,
    IbOrig,
    Bigm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ib => Method::Ib,
            MethodArg::IbOrig => Method::IbOrig,
            MethodArg::Bigm => Method::BigM,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ObjectiveArg {
    L1,
    Quadratic,
}

#[derive(Args, Clone)]
struct Model {
    #[arg(long, value_enum, default_value = "ib")]
    method: MethodArg,
    #[arg(long, default_value_t = 25)]
    steps: usize,
    #[arg(long, value_enum, default_value = "l1")]
    objective: ObjectiveArg,
}

impl Model {
    fn params(&self, scenario: &Scenario, limits: Limits) -> PipelineParams {
        let mut p = PipelineParams { limits, merge_faces: scenario.merge_faces, ..PipelineParams::default() };
        p.footstep.steps = self.steps;
        p.footstep.objective = match self.objective {
            ObjectiveArg::L1 => Objective::L1,
            ObjectiveArg::Quadratic => Objective::Quadratic,
        };
        p
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Stage {
    Triangulation,
    Partition,
    Conflict,
    Separator,
    Solution,
}

#[derive(Copy, Clone, ValueEnum)]
enum CoverFormat {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random environment.
    GenEnv {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Triangulate and partition the free space.
    Partition {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check pairwise IB-representability of the partition.
    CheckIb {
        #[command(flatten)]
        scenario: Scenario,
    },
    /// Compute the biclique cover of the conflict graph.
    Cover {
        #[command(flatten)]
        scenario: Scenario,
        /// Output the cover before merging.
        #[arg(long)]
        original: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: CoverFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the footstep model and print its size summary.
    Formulate {
        #[command(flatten)]
        scenario: Scenario,
        #[command(flatten)]
        model: Model,
    },
    /// Solve the footstep model, or an LP file with --lp.
    Solve {
        #[command(flatten)]
        scenario: Scenario,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Solve this LP file instead of a generated model.
        #[arg(long)]
        lp: Option<PathBuf>,
        /// Write the footholds (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the footstep model as an LP file.
    ExportLp {
        #[command(flatten)]
        scenario: Scenario,
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a pipeline stage as SVG.
    Plot {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, value_enum)]
        stage: Stage,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (seed, obstacle count, method) combination.
    Bench {
        /// Number of seeds, starting at --first-seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        obstacles: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "ib,ib-orig,bigm")]
        methods: Vec<MethodArg>,
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Branch-and-bound node limit per solve; makes results independent
        /// of machine speed.
        #[arg(long)]
        node_limit: Option<usize>,
        #[arg(long)]
        merge_faces: bool,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenEnv { scenario, out } => emit(out.as_deref(), &scenario.load()?.to_json()),
        Command::Partition { scenario, out } => {
            let prep = prepare(&scenario.load()?, scenario.merge_faces)?;
            emit(out.as_deref(), &prep.partition.to_json())
        }
        Command::CheckIb { scenario } => {
            let prep = prepare(&scenario.load()?, scenario.merge_faces)?;
            let check = prep.ib_check;
            let witness = check.witness.map(|w| w.map(|v| v + 1));
            let json = serde_json::json!({ "representable": check.representable, "witness": witness });
            println!("{}", serde_json::to_string_pretty(&json)?);
            if !check.representable {
                std::process::exit(2);
            }
            Ok(())
        }
        Command::Cover { scenario, original, format, out } => {
            let prep = prepare(&scenario.load()?, scenario.merge_faces)?;
            let cover = if original { &prep.cover.cover } else { &prep.merged };
            let text = match format {
                CoverFormat::Table => cover.to_table(),
                CoverFormat::Json => cover.to_json(),
            };
            eprintln!("depth {} (original {}, merged {})", cover.depth(), prep.cover.cover.depth(), prep.merged.depth());
            emit(out.as_deref(), &text)
        }
        Command::Formulate { scenario, model } => {
            let env = scenario.load()?;
            let prep = prepare(&env, scenario.merge_faces)?;
            let params = model.params(&scenario, Limits::default());
            let m = build_model(&env, &prep, model.method.into(), &params.footstep)?;
            println!("{}", m.summary_json());
            Ok(())
        }
        Command::Solve { scenario, model, time_limit, lp, out } => {
            let limits = Limits::with_time(time_limit);
            if let Some(path) = lp {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let m = parse_lp(&text)?;
                let r = solve_milp(&m, limits)?;
                println!("{}", r.to_json());
                return Ok(());
            }
            if matches!(model.objective, ObjectiveArg::Quadratic) {
                bail!("the in-process solver handles linear objectives only; use export-lp for the quadratic model");
            }
            let env = scenario.load()?;
            let prep = prepare(&env, scenario.merge_faces)?;
            let params = model.params(&scenario, limits);
            let (record, m, result) = solve_prepared(&env, &prep, model.method.into(), &params)?;
            println!("{}", result.to_json());
            eprintln!(
                "{} {}: {} nodes, {:.2}s",
                record.method,
                record.status.as_str(),
                record.nodes,
                record.seconds
            );
            if let (Some(path), Some(values)) = (out, &result.values) {
                let steps: Vec<[f64; 2]> = footholds(&m, values).iter().map(|p| [p.x, p.y]).collect();
                fs::write(&path, serde_json::to_string_pretty(&steps)?)?;
            }
            Ok(())
        }
        Command::ExportLp { scenario, model, out } => {
            let env = scenario.load()?;
            let prep = prepare(&env, scenario.merge_faces)?;
            let params = model.params(&scenario, Limits::default());
            let m = build_model(&env, &prep, model.method.into(), &params.footstep)?;
            emit(out.as_deref(), &write_lp(&m))
        }
        Command::Plot { scenario, stage, model, time_limit, out } => {
            let env = scenario.load()?;
            let prep = prepare(&env, scenario.merge_faces)?;
            let svg = match stage {
                Stage::Triangulation => plot::triangulation_svg(&prep.triangulation, env.bounds),
                Stage::Partition => plot::partition_svg(&prep.partition),
                Stage::Conflict => plot::conflict_svg(&prep.partition, &prep.conflict),
                Stage::Separator => {
                    let sep = separator(&FiniteElementGraph::from_cdc(&prep.partition.cdc()));
                    plot::separator_svg(&prep.partition, &sep)
                }
                Stage::Solution => {
                    let params = model.params(&scenario, Limits::with_time(time_limit));
                    let (_, m, result) = solve_prepared(&env, &prep, model.method.into(), &params)?;
                    let Some(values) = result.values else { bail!("no solution found ({:?})", result.status) };
                    plot::solution_svg(&env, &footholds(&m, &values), params.footstep.goal)
                }
            };
            emit(out.as_deref(), &svg)
        }
        Command::Bench { seeds, first_seed, obstacles, methods, steps, time_limit, node_limit, merge_faces, out } => {
            let mut params = PipelineParams {
                limits: Limits { nodes: node_limit, ..Limits::with_time(time_limit) },
                merge_faces,
                ..PipelineParams::default()
            };
            params.footstep.steps = steps;
            let cfg = BenchConfig {
                seeds: (first_seed..first_seed + seeds).collect(),
                obstacle_counts: obstacles,
                methods: methods.into_iter().map(Method::from).collect(),
                params,
            };
            let records = run_bench(&cfg)?;
            write_bench(&out, &records)?;
            print!("{}", tables(&records));
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(())
        }
    }
}
