//! Command-line entry point: instance generation, GA solving, exact
//! oracles, GA-vs-oracle comparison, and the HTTP decision service.
//!
//! Exit codes: 0 success / feasible plan, 2 usage or validation error,
//! 3 best plan infeasible (or no feasible route), 4 instance too large
//! for the requested oracle.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rultour::ga::{history_csv, run_ga_with_mode, EvalMode, GaConfig};
use rultour::oracle::{solve_exhaustive, solve_held_karp, OracleStatus};
use rultour::problem::{generate_instance, Bounds, Point2D, ProblemInstance};
use rultour::service::{plan_body, DecisionService, ServiceConfig};
use serde_json::json;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;

#[derive(Parser)]
#[command(name = "rultour", version, about = "Maintenance tour planning under RUL deadlines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance file
    Gen(GenArgs),
    /// Run the genetic algorithm on an instance file
    Solve(SolveArgs),
    /// Solve an instance exactly
    Oracle(OracleArgs),
    /// Benchmark the GA against the exact oracle on generated instances
    Compare(CompareArgs),
    /// Run the decision service HTTP API
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of assets
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    #[arg(long, default_value_t = 100.0)]
    x_max: f64,
    #[arg(long, default_value_t = 0.0)]
    y_min: f64,
    #[arg(long, default_value_t = 100.0)]
    y_max: f64,
    /// Lower RUL bound, hours
    #[arg(long, default_value_t = 100.0)]
    rul_min: f64,
    /// Upper RUL bound, hours
    #[arg(long, default_value_t = 1000.0)]
    rul_max: f64,
    /// Output instance file
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct GaFlags {
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    crossover_swap_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    mutation_swap_prob: Option<f64>,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long)]
    elitism: Option<usize>,
    #[arg(long)]
    penalty: Option<f64>,
}

impl GaFlags {
    /// Resolves the config; a missing seed is drawn from entropy and
    /// printed so the run can be reproduced.
    fn resolve(&self) -> GaConfig {
        let d = GaConfig::default();
        let seed = self.seed.unwrap_or_else(|| {
            let s: u64 = rand::random();
            println!("seed: {s}");
            s
        });
        GaConfig {
            population_size: self.population.unwrap_or(d.population_size),
            generations: self.generations.unwrap_or(d.generations),
            crossover_prob: self.crossover_prob.unwrap_or(d.crossover_prob),
            crossover_swap_prob: self.crossover_swap_prob.unwrap_or(d.crossover_swap_prob),
            mutation_prob: self.mutation_prob.unwrap_or(d.mutation_prob),
            mutation_swap_prob: self.mutation_swap_prob.unwrap_or(d.mutation_swap_prob),
            tournament_size: self.tournament_size.unwrap_or(d.tournament_size),
            elitism_count: self.elitism.unwrap_or(d.elitism_count),
            penalty_coefficient: self.penalty.unwrap_or(d.penalty_coefficient),
            seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file
    instance: PathBuf,
    #[command(flatten)]
    ga: GaFlags,
    /// Write the convergence history CSV here
    #[arg(long)]
    history: Option<PathBuf>,
    /// Write the plan JSON here
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Evaluate fitness in parallel (output is identical either way)
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    Exhaustive,
    HeldKarp,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "held-karp")]
    method: OracleMethod,
    /// Largest instance the oracle will attempt
    #[arg(long)]
    max_n: Option<usize>,
    /// Write the optimal plan JSON here (stdout otherwise)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Number of generated instances
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Assets per instance
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Base seed; instance i uses seed base + i
    #[arg(long = "base-seed", default_value_t = 0)]
    base_seed: u64,
    /// Lower RUL bound for generated instances
    #[arg(long, default_value_t = 2000.0)]
    rul_min: f64,
    /// Upper RUL bound for generated instances
    #[arg(long, default_value_t = 4000.0)]
    rul_max: f64,
    #[command(flatten)]
    ga: GaFlags,
    /// Write the per-instance report CSV here
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "RULTOUR_PORT", default_value_t = 8080)]
    port: u16,
    /// Append-only RUL update log (in-memory registry when omitted)
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    center_x: f64,
    #[arg(long, default_value_t = 0.0)]
    center_y: f64,
    /// Travel speed, km/h
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Labor wage, currency per hour
    #[arg(long, default_value_t = 0.0)]
    wage: f64,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Serve(args) => cmd_serve(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn load_instance(path: &PathBuf) -> Result<ProblemInstance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ProblemInstance::from_json(&text).map_err(|e| e.to_string())
}

fn cmd_gen(args: GenArgs) -> Result<i32, String> {
    let seed = args.seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        println!("seed: {s}");
        s
    });
    let bounds = Bounds::new(args.x_min, args.x_max, args.y_min, args.y_max);
    let instance = generate_instance(args.n, bounds, (args.rul_min, args.rul_max), seed)
        .map_err(|e| e.to_string())?;
    std::fs::write(&args.out, instance.to_json()).map_err(|e| e.to_string())?;
    println!("{}", args.out.display());
    Ok(EXIT_OK)
}

fn cmd_solve(args: SolveArgs) -> Result<i32, String> {
    let instance = load_instance(&args.instance)?;
    let config = args.ga.resolve();
    let mode = if args.parallel {
        EvalMode::Parallel
    } else {
        EvalMode::Sequential
    };
    let result = run_ga_with_mode(&instance, &config, mode).map_err(|e| e.to_string())?;
    let body = plan_body(&instance, &result);

    if let Some(path) = &args.history {
        std::fs::write(path, history_csv(&result.history)).map_err(|e| e.to_string())?;
    }
    if let Some(path) = &args.plan {
        let mut text = serde_json::to_string_pretty(&body).expect("plan serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| e.to_string())?;
    }
    println!(
        "best distance: {:.6}  fitness: {:.6}  feasible: {}",
        body.total_distance, result.best_evaluation.fitness, body.feasible
    );
    Ok(if body.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_oracle(args: OracleArgs) -> Result<i32, String> {
    let instance = load_instance(&args.instance)?;
    let result = match args.method {
        OracleMethod::Exhaustive => solve_exhaustive(&instance, args.max_n.unwrap_or(10)),
        OracleMethod::HeldKarp => solve_held_karp(&instance, args.max_n.unwrap_or(18)),
    };
    match result.status {
        OracleStatus::InstanceTooLarge => {
            eprintln!(
                "instance too large for this oracle ({} assets); raise --max-n or use held-karp",
                instance.n_assets()
            );
            return Ok(EXIT_TOO_LARGE);
        }
        OracleStatus::NoFeasibleRoute => {
            println!("{}", json!({ "status": "no-feasible-route" }));
            return Ok(EXIT_INFEASIBLE);
        }
        OracleStatus::OptimalFeasible => {}
    }
    let route = result.best_route.as_ref().unwrap();
    let eval = result.best_evaluation.as_ref().unwrap();
    let order: Vec<&str> = route
        .order()
        .iter()
        .map(|&i| instance.assets[i].id.as_str())
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({
        "status": "optimal-feasible",
        "order": order,
        "total_distance": eval.total_distance,
        "arrival_times": eval.arrival_times,
        "feasible": eval.feasible,
    }))
    .expect("plan serializes");
    text.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string())?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn cmd_compare(args: CompareArgs) -> Result<i32, String> {
    if args.n > 18 {
        eprintln!("instance too large for the held-karp oracle (n = {})", args.n);
        return Ok(EXIT_TOO_LARGE);
    }
    let mut rows = String::from(
        "instance,n,oracle_distance,ga_distance,relative_gap,ga_feasible,oracle_ms,ga_ms\n",
    );
    let mut gaps = Vec::new();
    let mut hits = 0usize;
    let mut compared = 0usize;

    for i in 0..args.count {
        let seed = args.base_seed + i as u64;
        let instance = generate_instance(
            args.n,
            Bounds::square(100.0),
            (args.rul_min, args.rul_max),
            seed,
        )
        .map_err(|e| e.to_string())?;

        let t0 = Instant::now();
        let oracle = solve_held_karp(&instance, 18);
        let oracle_ms = t0.elapsed().as_secs_f64() * 1e3;

        let mut flags = args.ga.clone();
        flags.seed = Some(flags.seed.unwrap_or(seed));
        let config = flags.resolve();
        let t1 = Instant::now();
        let ga = run_ga_with_mode(&instance, &config, EvalMode::Sequential)
            .map_err(|e| e.to_string())?;
        let ga_ms = t1.elapsed().as_secs_f64() * 1e3;

        let (oracle_dist, gap) = match (oracle.optimal_distance(), ga.best_evaluation.feasible) {
            (Some(od), true) => {
                let gap = (ga.best_evaluation.total_distance - od) / od;
                gaps.push(gap);
                compared += 1;
                if gap.abs() <= 1e-9 {
                    hits += 1;
                }
                (format!("{od}"), format!("{gap}"))
            }
            (od, _) => (
                od.map(|d| d.to_string()).unwrap_or_else(|| "n/a".into()),
                "n/a".into(),
            ),
        };
        rows.push_str(&format!(
            "gen-{seed},{},{oracle_dist},{},{gap},{},{oracle_ms:.3},{ga_ms:.3}\n",
            args.n, ga.best_evaluation.total_distance, ga.best_evaluation.feasible
        ));
    }

    if let Some(path) = &args.out {
        std::fs::write(path, &rows).map_err(|e| e.to_string())?;
    } else {
        print!("{rows}");
    }
    if compared > 0 {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let max = gaps.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "instances: {}  mean gap: {:.6}  max gap: {:.6}  optimal-hit rate: {:.3}",
            args.count,
            mean,
            max,
            hits as f64 / compared as f64
        );
    } else {
        println!("instances: {}  no feasible GA/oracle pairs to compare", args.count);
    }
    Ok(EXIT_OK)
}

fn cmd_serve(args: ServeArgs) -> Result<i32, String> {
    let config = ServiceConfig {
        center: Point2D::new(args.center_x, args.center_y),
        travel_speed: args.speed,
        hourly_wage: args.wage,
    };
    let service = match &args.log {
        Some(path) => DecisionService::open(config, path).map_err(|e| e.to_string())?,
        None => DecisionService::in_memory(config),
    };
    let shared = Arc::new(Mutex::new(service));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime
        .block_on(rultour::http::serve(shared, args.port))
        .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}
