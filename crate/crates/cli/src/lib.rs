//! Command-line front end: `simulate`, `effects`, `abtest` and `sweep`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use linkdyn_core::io::{
    write_ab_file, write_effects_file, write_trajectories_file, write_window_effects,
    write_window_trajectories,
};
use linkdyn_core::{
    effect_report, parse_config, seeds, simulate, EffectInputs, Error, InterventionWindow, Result,
    RunMode, RunOutput, Scenario, Trajectory,
};
use rayon::prelude::*;

/// Built-in scenario selected by `--config baseline`.
pub const BASELINE_NAME: &str = "baseline";
const BASELINE_HORIZON: u32 = 400;

#[derive(Debug, Parser)]
#[command(
    name = "linkdyn",
    version,
    about = "Counterfactual link-recommendation simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured modes and write trajectories.csv.
    Simulate(RunArgs),
    /// Run natural, intervened and unmediated modes and write effects.csv.
    Effects(RunArgs),
    /// Run the A/B mode and write per-arm estimates to abtest.csv.
    Abtest(RunArgs),
    /// Repeat `effects` for every entry of `windows`.
    Sweep(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario document, or `baseline` for the built-in defaults.
    #[arg(long, value_name = "PATH")]
    config: String,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Offset added to every run seed.
    #[arg(long, value_name = "INT", default_value_t = 0)]
    seed_base: u64,
    /// Maximum number of trajectories run concurrently.
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,
    /// Also write the final graph of each run as edge and node lists.
    #[arg(long)]
    snapshots: bool,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status: 0 on success, 1 on configuration errors, 2 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(command: Command) -> Result<()> {
    let (kind, args) = match command {
        Command::Simulate(a) => (Kind::Simulate, a),
        Command::Effects(a) => (Kind::Effects, a),
        Command::Abtest(a) => (Kind::Abtest, a),
        Command::Sweep(a) => (Kind::Sweep, a),
    };
    let scenario = load_scenario(&args.config)?;
    if kind == Kind::Sweep && scenario.windows.is_empty() {
        return Err(Error::config("windows", "sweep needs at least one window"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(Error::config("--jobs", "must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    fs::create_dir_all(&args.out)?;
    pool.install(|| match kind {
        Kind::Simulate => run_simulate(&scenario, &args),
        Kind::Effects => run_effects(&scenario, &args),
        Kind::Abtest => run_abtest(&scenario, &args),
        Kind::Sweep => run_sweep(&scenario, &args),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Simulate,
    Effects,
    Abtest,
    Sweep,
}

fn load_scenario(config: &str) -> Result<Scenario> {
    let path = Path::new(config);
    if config == BASELINE_NAME && !path.exists() {
        let s = Scenario::baseline(BASELINE_HORIZON);
        s.validate()?;
        return Ok(s);
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

// Runs every (mode, seed) pair in parallel; results keep the input order.
fn run_all(scenario: &Scenario, jobs: &[(RunMode, u64)]) -> Result<Vec<RunOutput>> {
    jobs.par_iter()
        .map(|&(mode, seed)| simulate(scenario, mode, seed, None))
        .collect()
}

fn jobs_for(scenario: &Scenario, modes: &[RunMode], seed_base: u64) -> Vec<(RunMode, u64)> {
    modes
        .iter()
        .flat_map(|&m| seeds(scenario, seed_base).map(move |s| (m, s)))
        .collect()
}

fn write_snapshots(dir: &Path, tag: &str, runs: &[RunOutput]) -> Result<()> {
    let dir = dir.join("snapshots");
    fs::create_dir_all(&dir)?;
    for r in runs {
        let stem = format!("{tag}{}_{}", r.trajectory.mode.as_str(), r.trajectory.seed);
        r.graph.write_edge_list(BufWriter::new(File::create(
            dir.join(format!("{stem}_edges.csv")),
        )?))?;
        r.graph.write_node_list(BufWriter::new(File::create(
            dir.join(format!("{stem}_nodes.csv")),
        )?))?;
    }
    Ok(())
}

fn trajectories(runs: Vec<RunOutput>) -> Vec<Trajectory> {
    runs.into_iter().map(|r| r.trajectory).collect()
}

fn run_simulate(scenario: &Scenario, args: &RunArgs) -> Result<()> {
    let runs = run_all(
        scenario,
        &jobs_for(scenario, &scenario.modes, args.seed_base),
    )?;
    if args.snapshots {
        write_snapshots(&args.out, "", &runs)?;
    }
    write_trajectories_file(&args.out.join("trajectories.csv"), &trajectories(runs))
}

const EFFECT_MODES: [RunMode; 3] = [RunMode::Natural, RunMode::Intervened, RunMode::Unmediated];

// Splits seed-ordered runs of `EFFECT_MODES` into per-mode slices.
fn by_mode(trajs: &[Trajectory], n_seeds: usize) -> [&[Trajectory]; 3] {
    [0, 1, 2].map(|k| &trajs[k * n_seeds..(k + 1) * n_seeds])
}

fn run_effects(scenario: &Scenario, args: &RunArgs) -> Result<()> {
    let runs = run_all(scenario, &jobs_for(scenario, &EFFECT_MODES, args.seed_base))?;
    if args.snapshots {
        write_snapshots(&args.out, "", &runs)?;
    }
    let trajs = trajectories(runs);
    let [natural, intervened, unmediated] = by_mode(&trajs, scenario.seeds);
    let w = scenario.window();
    let rows = effect_report(EffectInputs {
        natural,
        intervened,
        unmediated,
        t_lo: w.t_lo,
        t_hi: w.t_hi,
    })?;
    write_trajectories_file(&args.out.join("trajectories.csv"), &trajs)?;
    write_effects_file(&args.out.join("effects.csv"), &rows)
}

fn run_abtest(scenario: &Scenario, args: &RunArgs) -> Result<()> {
    let runs = run_all(
        scenario,
        &jobs_for(scenario, &[RunMode::Ab], args.seed_base),
    )?;
    if args.snapshots {
        write_snapshots(&args.out, "", &runs)?;
    }
    let trajs = trajectories(runs);
    write_trajectories_file(&args.out.join("trajectories.csv"), &trajs)?;
    write_ab_file(&args.out.join("abtest.csv"), &trajs)
}

fn run_sweep(scenario: &Scenario, args: &RunArgs) -> Result<()> {
    // natural runs ignore the window, so one batch serves every entry
    let scenarios: Vec<Scenario> = scenario
        .windows
        .iter()
        .map(|w| scenario.clone().with_window(w.t_lo, w.t_hi))
        .collect();
    for s in &scenarios {
        s.validate()?;
    }
    let nat_jobs = jobs_for(scenario, &[RunMode::Natural], args.seed_base);
    let rec_jobs = jobs_for(scenario, &EFFECT_MODES[1..], args.seed_base);
    let natural = run_all(scenario, &nat_jobs)?;
    let recs: Vec<Vec<RunOutput>> = scenarios
        .par_iter()
        .map(|s| run_all(s, &rec_jobs))
        .collect::<Result<_>>()?;
    if args.snapshots {
        write_snapshots(&args.out, "", &natural)?;
        for (w, runs) in scenario.windows.iter().zip(&recs) {
            write_snapshots(&args.out, &format!("{}_", w.label()), runs)?;
        }
    }
    let natural = trajectories(natural);
    let mut traj_batches: Vec<(InterventionWindow, Vec<Trajectory>)> = Vec::new();
    let mut effect_batches = Vec::new();
    for (w, runs) in scenario.windows.iter().zip(recs) {
        let mut trajs = natural.clone();
        trajs.extend(trajectories(runs));
        let [nat, intervened, unmediated] = by_mode(&trajs, scenario.seeds);
        let rows = effect_report(EffectInputs {
            natural: nat,
            intervened,
            unmediated,
            t_lo: w.t_lo,
            t_hi: w.t_hi,
        })?;
        effect_batches.push((*w, rows));
        traj_batches.push((*w, trajs));
    }
    write_window_trajectories(
        BufWriter::new(File::create(args.out.join("trajectories.csv"))?),
        &traj_batches,
    )?;
    write_window_effects(
        BufWriter::new(File::create(args.out.join("effects.csv"))?),
        &effect_batches,
    )
}
