use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rosterlab::experiment::{compare_to_baseline, grid, load_sweep, run_sweep, SweepConfig, TruthMode};
use rosterlab::reroster::RerosterFile;
use rosterlab::roster::RosterFile;
use rosterlab::scenario::scenario_at;
use rosterlab::{
    generate_instance, load_instance, save_instance, solve_rerostering, solve_rostering, AbsenceScenario,
    GeneratorConfig, HighsBackend, RerosterOptions, ReserveRequirement, RosterOptions, SkillMode, SolveControls,
};

#[derive(Parser)]
#[command(name = "rosterlab", version, about = "Nurse rostering with reserve shifts and roster repair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Generate(GenerateArgs),
    /// Solve one rostering problem and print the cost breakdown.
    Roster(RosterArgs),
    /// Repair a roster against one absence scenario.
    Reroster(RerosterArgs),
    /// Run a grid study over classifier performance and fixed baselines.
    Sweep(SweepArgs),
    /// Ratio grid against a fixed baseline from a finished sweep.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Uniform,
    Hierarchical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Truth {
    Shared,
    PerCell,
}

#[derive(Args)]
struct SolveArgs {
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Per-solve time limit in seconds.
    #[arg(long, default_value_t = 100.0)]
    time_limit: f64,
    /// Echo the solver log.
    #[arg(long)]
    verbose: bool,
}

impl SolveArgs {
    fn controls(&self) -> Result<SolveControls> {
        if !(self.gap >= 0.0) || !(self.time_limit > 0.0) {
            bail!("--gap must be non-negative and --time-limit positive");
        }
        Ok(SolveControls {
            gap_tolerance: self.gap,
            time_limit_seconds: self.time_limit,
            ..SolveControls::default()
        })
    }

    fn backend(&self) -> HighsBackend {
        HighsBackend { verbose: self.verbose }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 35)]
    employees: usize,
    #[arg(long, default_value_t = 28)]
    days: usize,
    #[arg(long, value_enum, default_value_t = Mode::Uniform)]
    mode: Mode,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RosterArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Reserves required on every day.
    #[arg(long, default_value_t = 0, conflicts_with = "reserve_per_day")]
    reserve: u32,
    /// Comma-separated per-day reserve requirement.
    #[arg(long, value_delimiter = ',')]
    reserve_per_day: Option<Vec<u32>>,
    /// Drop the constraints that keep reserve conversions safe.
    #[arg(long)]
    no_guard: bool,
    /// Write the roster as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct RerosterArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Roster JSON written by `roster --out`.
    #[arg(long)]
    roster: PathBuf,
    /// Scenario JSON; when omitted one is drawn from `--rho`, `--seed`, `--index`.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0264)]
    rho: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Keep the original reserve requirement in the repair objective.
    #[arg(long)]
    keep_reserve: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Output directory; an existing sweep there is resumed.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    scenarios: usize,
    /// Spacing of the TPR and RFPR grids.
    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,
    /// Single-cell mode: evaluate only this TPR (requires --rfpr).
    #[arg(long, requires = "rfpr")]
    tpr: Option<f64>,
    #[arg(long, requires = "tpr")]
    rfpr: Option<f64>,
    /// Fixed daily reserve counts to compare against.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    baseline: Vec<u32>,
    /// Daily absence probability.
    #[arg(long, default_value_t = 0.0264)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Truth::Shared)]
    truth: Truth,
    /// Write zero solve times so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Stop scheduling tasks once this much solver time (seconds) is spent.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    no_guard: bool,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    baseline: u32,
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed {s}");
        s
    })
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mode = match a.mode {
        Mode::Uniform => SkillMode::Uniform,
        Mode::Hierarchical => SkillMode::Hierarchical,
    };
    let seed = seed_or_random(a.seed);
    let instance = generate_instance(&GeneratorConfig::new(a.employees, a.days, mode), seed)?;
    match &a.out {
        Some(p) => save_instance(&instance, p)?,
        None => println!("{}", instance.to_json()),
    }
    Ok(())
}

fn roster(a: RosterArgs) -> Result<()> {
    let instance = load_instance(&a.instance)?;
    let reserve = match a.reserve_per_day {
        Some(v) => ReserveRequirement::new(v),
        None => ReserveRequirement::constant(a.reserve, instance.days),
    };
    let options = RosterOptions { conversion_guard: !a.no_guard };
    let r = solve_rostering::<f64>(&instance, &reserve, &a.solve.controls()?, options, &a.solve.backend())?;
    if let Some(s) = &r.solve {
        println!("status {}", s.status);
        println!("gap {}", s.gap.unwrap_or(0.0));
        println!("solve_s {:.3}", s.wall_time);
    }
    let c = &r.costs;
    println!("wages {}", c.wages);
    println!("overtime {}", c.overtime_cost);
    println!("understaffing {}", c.understaff_cost);
    println!("reserve_wages {}", c.reserve_wages);
    println!("shortfall_penalty {}", c.shortfall_penalty);
    println!("reserves {}", r.total_reserves(&instance));
    println!("total {}", c.total);
    if let Some(p) = &a.out {
        write_or_print(Some(p), &RosterFile::from_roster(&instance, &r).to_json())?;
    }
    Ok(())
}

fn reroster(a: RerosterArgs) -> Result<()> {
    let instance = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.roster).with_context(|| format!("reading {}", a.roster.display()))?;
    let file: RosterFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.roster.display()))?;
    let original = file.into_roster(&instance)?;
    let scenario: AbsenceScenario = match &a.scenario {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => {
            if !(0.0..=1.0).contains(&a.rho) {
                bail!("--rho must lie in [0, 1]");
            }
            scenario_at(instance.n_employees(), instance.days, a.rho, seed_or_random(a.seed), a.index)
        }
    };
    scenario.check(instance.n_employees(), instance.days)?;
    let options = RerosterOptions { keep_reserve_requirement: a.keep_reserve };
    let r = solve_rerostering::<f64, f64>(&instance, &original, &scenario, &a.solve.controls()?, options, &a.solve.backend())?;
    if let Some(s) = &r.roster.solve {
        println!("status {}", s.status);
        println!("gap {}", s.gap.unwrap_or(0.0));
        println!("solve_s {:.3}", s.wall_time);
    }
    println!("absences {}", scenario.total());
    println!("base_cost {}", r.costs.base_cost.total);
    println!("change_cost {}", r.costs.change_cost);
    println!("reserves_converted {}", r.changes.total_reserve_conversions());
    println!("working_shift_changes {}", r.metrics.n_working_shift_changes);
    println!("dayoff_changes {}", r.metrics.n_dayoff_changes);
    println!("total {}", r.costs.total);
    if let Some(p) = &a.out {
        write_or_print(Some(p), &RerosterFile::from_result(&instance, &r).to_json())?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    if !(a.grid_step > 0.0 && a.grid_step <= 1.0) {
        bail!("--grid-step must lie in (0, 1]");
    }
    let instance = load_instance(&a.instance)?;
    let (tpr_values, rfpr_values) = match (a.tpr, a.rfpr) {
        (Some(t), Some(r)) => (vec![t], vec![r]),
        _ => (grid(a.grid_step), grid(a.grid_step)),
    };
    let config = SweepConfig {
        instance: a.instance.display().to_string(),
        tpr_values,
        rfpr_values,
        rho: a.rho,
        n_scenarios: a.scenarios,
        baselines: a.baseline,
        controls: a.solve.controls()?,
        seed: seed_or_random(a.seed),
        truth_mode: match a.truth {
            Truth::Shared => TruthMode::Shared,
            Truth::PerCell => TruthMode::PerCell,
        },
        jobs: a.jobs,
        budget_seconds: a.budget,
        record_timing: !a.no_timing,
        roster_options: RosterOptions { conversion_guard: !a.no_guard },
        reroster_options: RerosterOptions::default(),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let result = run_sweep(&instance, &config, Some(&a.out), &a.solve.backend())?;
    let cells = result.cells.iter().filter(|c| c.policy == "ml").count();
    println!("cells {cells}");
    println!("baselines {}", result.cells.len() - cells);
    println!("tasks {}", result.details.len());
    println!("truncated {}", result.truncated);
    println!("out {}", a.out.display());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let sweep = load_sweep(&a.out)?;
    let grid = compare_to_baseline(&sweep, a.baseline)?;
    let csv = a.out.join(format!("ratios_k{}.csv", a.baseline));
    grid.write_csv(&csv)?;
    let contour = a.out.join(format!("contour_k{}.json", a.baseline));
    let text = serde_json::to_string_pretty(&grid.contour)?;
    fs::write(&contour, text).with_context(|| format!("writing {}", contour.display()))?;
    let rows = grid.tpr_values.len() * grid.rfpr_values.len();
    let below = grid.ratios.iter().flatten().flatten().filter(|&&r| r < 1.0).count();
    println!("rows {rows}");
    println!("cells_below_baseline {below}");
    println!("contour_segments {}", grid.contour.len());
    println!("ratios {}", csv.display());
    Ok(())
}

fn error_line(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("arguments", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Roster(a) => roster(a),
        Command::Reroster(a) => reroster(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line("runtime", &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
