use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ncalloc::clustering::{Task, Worker};
use ncalloc::harness::{
    generate, ingest_tasks, ingest_workers, parse_w_grid, run_pipeline, run_stage1, run_stage2,
    tasks_to_csv, trajectories_to_csv, workers_to_csv, Artifacts, BoundingBox, IngestReport, RunConfig,
    SyntheticSpec,
};

#[derive(Parser)]
#[command(name = "ncalloc", version, about = "Spatial-crowdsourcing task allocation over non-crossing cluster graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunInputs {
    /// Flat `key = value` run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Task CSV: `id,lon,lat[,reward]`.
    #[arg(long)]
    tasks: PathBuf,
    /// Worker CSV: `id,lon,lat[,ability]` or trajectory rows `driver_id,timestamp,lon,lat`.
    #[arg(long)]
    workers: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic workload (tasks.csv, workers.csv, trajectories.csv).
    GenData {
        /// Synthetic workload description; defaults apply when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter, deduplicate and project a task CSV, printing the canonical form.
    IngestTasks {
        #[arg(long = "in")]
        input: PathBuf,
        /// `minlat,minlon,maxlat,maxlon`.
        #[arg(long = "box")]
        bbox: Option<BoundingBox>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the canonical CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce trajectories (or read canonical rows) to workers, printing the canonical form.
    IngestWorkers {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "box")]
        bbox: Option<BoundingBox>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline once and write every intermediate artifact.
    Allocate(RunInputs),
    /// Run the 40-cell grid of layers, evaluation bases and traversal orders.
    Stage1(RunInputs),
    /// Sweep the matching weight on the base configuration.
    Stage2 {
        #[command(flatten)]
        inputs: RunInputs,
        /// `start:end:step` or a comma-separated list.
        #[arg(long, default_value = "0:1:0.1")]
        w_grid: String,
    },
    /// Run the brute-force oracle suites.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { spec, out } => gen_data(spec.as_deref(), &out),
        Command::IngestTasks {
            input,
            bbox,
            config,
            out,
        } => {
            let cfg = config_with_box(config.as_deref(), bbox)?;
            let (tasks, report) = ingest_tasks(open(&input)?, &cfg).context("ingesting tasks")?;
            eprintln!("tasks: {report}");
            emit(out.as_deref(), &tasks_to_csv(&tasks, &cfg.bbox.projection()))
        }
        Command::IngestWorkers {
            input,
            bbox,
            config,
            out,
        } => {
            let cfg = config_with_box(config.as_deref(), bbox)?;
            let (workers, report) = ingest_workers(open(&input)?, &cfg).context("ingesting workers")?;
            eprintln!("workers: {report}");
            emit(out.as_deref(), &workers_to_csv(&workers, &cfg.bbox.projection()))
        }
        Command::Allocate(inputs) => {
            let (cfg, tasks, workers, mut artifacts) = load(&inputs)?;
            let run = run_pipeline(&cfg, &tasks, &workers).context("pipeline")?;
            for (k, v) in run.artifacts.files {
                artifacts.insert(k, v);
            }
            write(&artifacts, &inputs.out)?;
            let r = run.cell.report;
            println!(
                "task clusters {}, worker clusters {}, matched {}",
                run.clustered.tasks.len(),
                run.clustered.workers.len(),
                run.cell.allocation.matched_workers()
            );
            println!(
                "task allocation rate {:.4}, worker utilization rate {:.4}",
                r.task_allocation_rate, r.worker_utilization_rate
            );
            Ok(())
        }
        Command::Stage1(inputs) => {
            let (cfg, tasks, workers, mut artifacts) = load(&inputs)?;
            let report = run_stage1(&cfg, &tasks, &workers).context("stage 1")?;
            let failed = report.cells.values().filter(|r| r.is_err()).count();
            artifacts.nest(".", report.artifacts);
            write(&artifacts, &inputs.out)?;
            println!("{} cells, {} failed", report.cells.len(), failed);
            for (key, e) in report.cells.iter().filter_map(|(k, r)| r.as_ref().err().map(|e| (k, e))) {
                eprintln!("{}: {e}", key.path());
            }
            if failed > 0 {
                bail!("{failed} stage-1 cells failed");
            }
            Ok(())
        }
        Command::Stage2 { inputs, w_grid } => {
            let grid = parse_w_grid(&w_grid)?;
            let (cfg, tasks, workers, mut artifacts) = load(&inputs)?;
            let report = run_stage2(&cfg, &tasks, &workers, &grid).context("stage 2")?;
            artifacts.nest(".", report.artifacts);
            write(&artifacts, &inputs.out)?;
            for (w, r) in &report.points {
                println!(
                    "w={w} requester {:.3} worker {:.3}",
                    r.total_requester_payoff, r.total_worker_payoff
                );
            }
            Ok(())
        }
        Command::Verify { seed } => {
            let reports = ncalloc::verify::run_suite(seed);
            let mut failed = 0;
            for r in &reports {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({} cases, {} failures)", r.name, r.cases, r.failures);
                failed += usize::from(!r.passed());
            }
            if failed > 0 {
                bail!("{failed} oracle suites failed");
            }
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn read_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            text.parse().with_context(|| format!("config {}", p.display()))
        }
    }
}

fn config_with_box(path: Option<&Path>, bbox: Option<BoundingBox>) -> Result<RunConfig> {
    let mut cfg = read_config(path)?;
    if let Some(b) = bbox {
        cfg.bbox = b;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(inputs: &RunInputs) -> Result<(RunConfig, Vec<Task>, Vec<Worker>, Artifacts)> {
    let cfg = read_config(inputs.config.as_deref())?;
    cfg.validate()?;
    let (tasks, tr) = ingest_tasks(open(&inputs.tasks)?, &cfg).context("ingesting tasks")?;
    let (workers, wr) = ingest_workers(open(&inputs.workers)?, &cfg).context("ingesting workers")?;
    let mut artifacts = Artifacts::default();
    artifacts.insert("ingest_report.txt", ingest_text(&tr, &wr));
    Ok((cfg, tasks, workers, artifacts))
}

fn ingest_text(tasks: &IngestReport, workers: &IngestReport) -> String {
    format!("tasks {tasks}\nworkers {workers}\n")
}

fn write(artifacts: &Artifacts, dir: &Path) -> Result<()> {
    artifacts.write_to(dir)?;
    println!("wrote {} files to {}", artifacts.files.len(), dir.display());
    Ok(())
}

fn gen_data(spec: Option<&Path>, out: &Path) -> Result<()> {
    let spec: SyntheticSpec = match spec {
        None => SyntheticSpec::default(),
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .parse()
            .with_context(|| format!("workload {}", p.display()))?,
    };
    let data = generate(&spec)?;
    let proj = spec.bbox.projection();
    let mut files = Artifacts::default();
    files.insert("tasks.csv", tasks_to_csv(&data.tasks, &proj));
    files.insert("workers.csv", workers_to_csv(&data.workers, &proj));
    files.insert("trajectories.csv", trajectories_to_csv(&data.trajectories, &proj));
    write(&files, out)?;
    println!("{} tasks, {} workers", data.tasks.len(), data.workers.len());
    Ok(())
}
