use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wca_core::bench::registry;
use wca_core::harness::{self, Campaign, HarnessError, RunConfig};

/// Worst-case cost search over the benchmark programs.
#[derive(Parser, Debug)]
#[command(name = "wca", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a campaign file and write one report per run plus a summary.
    Campaign {
        file: PathBuf,
        #[arg(long, default_value = "campaign-out")]
        out_dir: PathBuf,
    },
    /// List the benchmark programs and their scale parameters.
    List,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    /// The best-cost curve only.
    Csv,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Benchmark id (`1-2`) or name (`QuickSort`).
    #[arg(long)]
    program: Option<String>,
    /// Scale override, `KEY=VALUE`; repeatable.
    #[arg(long)]
    scale: Vec<String>,
    /// pathfuzz, fuzz or symexe.
    #[arg(long)]
    method: Option<String>,
    /// default or skip-unsat.
    #[arg(long)]
    mapping: Option<String>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    target_cost: Option<i64>,
    #[arg(long)]
    psize: Option<usize>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Path-string length; defaults to the benchmark's bit bound.
    #[arg(long)]
    path_len: Option<usize>,
    /// Estimate the path-string length from random runs.
    #[arg(long)]
    estimate_m: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut kv = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                kv.push((k, v));
            }
        };
        put("program", self.program.clone());
        for sc in &self.scale {
            put("scale", Some(sc.clone()));
        }
        put("method", self.method.clone());
        put("mapping", self.mapping.clone());
        put("budget_seconds", self.budget_seconds.map(|v| v.to_string()));
        put("max_iters", self.max_iters.map(|v| v.to_string()));
        put("target_cost", self.target_cost.map(|v| v.to_string()));
        put("psize", self.psize.map(|v| v.to_string()));
        put("r1", self.r1.map(|v| v.to_string()));
        put("r2", self.r2.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("path_len", self.path_len.map(|v| v.to_string()));
        put("estimate_m", self.estimate_m.then(|| "true".into()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        kv
    }

    fn config(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_kv(&text)?;
        }
        for (k, v) in self.pairs() {
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        HarnessError::Config(_) => ExitCode::from(2),
        HarnessError::Runtime(_) => ExitCode::from(3),
    }
}

fn io_fail(e: io::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(3)
}

fn single(args: &RunArgs) -> ExitCode {
    let cfg = match args.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let report = match harness::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let written = sink(&args.out).and_then(|mut w| {
        match args.format {
            Format::Json => writeln!(w, "{}", report.to_json())?,
            Format::Csv => report.write_csv(&mut w)?,
        }
        w.flush()
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => io_fail(e),
    }
}

fn campaign(file: &Path, out_dir: &Path) -> ExitCode {
    let parsed = std::fs::read_to_string(file)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", file.display())))
        .and_then(|t| Campaign::parse(&t));
    let c = match parsed {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let total = c.cells().len();
    let mut done = 0;
    let report = harness::run_campaign(&c, |r| {
        done += 1;
        match (&r.report, &r.error) {
            (Some(rep), _) => eprintln!(
                "[{done}/{total}] {} {} seed {}: best {} at {} ms",
                r.method, r.program, r.seed, rep.best_cost, rep.time_to_best_ms
            ),
            (None, Some(e)) => eprintln!(
                "[{done}/{total}] {} {} seed {}: failed: {e}",
                r.method, r.program, r.seed
            ),
            (None, None) => {}
        }
    });
    if let Err(e) = harness::write_campaign(out_dir, &report) {
        return io_fail(e);
    }
    print!("{}", report.table());
    ExitCode::SUCCESS
}

fn list() -> ExitCode {
    for b in registry() {
        let params: Vec<String> = b
            .params
            .iter()
            .map(|p| format!("{}={}", p.name, p.default))
            .collect();
        println!("{:<5} {:<16} {}", b.id, b.name, params.join(" "));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Some(Command::Campaign { file, out_dir }) => campaign(file, out_dir),
        Some(Command::List) => list(),
        None if cli.run.program.is_none() && cli.run.config.is_none() => {
            eprintln!("error: --program or --config is required");
            ExitCode::from(2)
        }
        None => single(&cli.run),
    }
}
