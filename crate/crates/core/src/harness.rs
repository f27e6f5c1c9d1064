//! Experiment driver: single runs from a flat configuration, and campaigns
//! over methods × programs × seeds with a per-cell summary.
//!
//! Configuration files are `key = value` lines; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{fuzz_inputs, symexe_search, SymExeParams};
use crate::bench::{lookup, parse_scale, Scale};
use crate::budget::Budget;
use crate::concrete::DEFAULT_STEP_BUDGET;
use crate::evo::{self, EvoParams};
use crate::report::{Method, RunReport};
use crate::solver::SolverContext;
use crate::symbolic::{estimate_m, ExecOptions, MappingMode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    /// Bad flags, keys, values or program names.
    #[error("{0}")]
    Config(String),
    /// The run itself failed.
    #[error("{0}")]
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Parses `key = value` lines. Later keys override earlier ones.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Config(format!(
                "line {}: expected key = value",
                n + 1
            )));
        };
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

/// How the path-string length is chosen when not given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateM {
    pub samples: usize,
    pub margin: f64,
}

impl Default for EstimateM {
    fn default() -> Self {
        Self {
            samples: 200,
            margin: 2.0,
        }
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub program: String,
    pub scale: Scale,
    pub method: Method,
    pub mapping: MappingMode,
    /// `path_len` is ignored here; see [`RunConfig::path_len`].
    pub evo: EvoParams,
    /// Explicit `M`. Otherwise estimated or taken from the benchmark bound.
    pub path_len: Option<usize>,
    pub estimate_m: Option<EstimateM>,
    pub budget: Budget,
    pub frontier_cap: usize,
    pub step_budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            program: String::new(),
            scale: Scale::new(),
            method: Method::PathFuzz,
            mapping: MappingMode::SkipUnsat,
            evo: EvoParams::default(),
            path_len: None,
            estimate_m: None,
            budget: Budget::default(),
            frontier_cap: SymExeParams::default().frontier_cap,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| HarnessError::Config(format!("{key}: bad value `{v}`: {e}")))
}

impl RunConfig {
    /// Sets one key. Keys match the long CLI flags with `_` for `-`.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), HarnessError> {
        match key {
            "program" => self.program = v.to_string(),
            "scale" => {
                let pairs = v.split([',', ';', ' ']).filter(|s| !s.is_empty());
                self.scale.extend(parse_scale(pairs).map_err(config_err)?);
            }
            "method" => self.method = v.parse().map_err(HarnessError::Config)?,
            "mapping" => self.mapping = v.parse().map_err(HarnessError::Config)?,
            "budget_seconds" => self.budget.seconds = Some(num(key, v)?),
            "max_iters" => self.budget.max_iters = Some(num(key, v)?),
            "target_cost" => self.budget.target_cost = Some(num(key, v)?),
            "psize" => {
                self.evo.psize = num(key, v)?;
                self.evo.offspring = self.evo.psize;
            }
            "offspring" => self.evo.offspring = num(key, v)?,
            "r1" => self.evo.r1 = num(key, v)?,
            "r2" => self.evo.r2 = num(key, v)?,
            "beta" => self.evo.beta = num(key, v)?,
            "gamma" => self.evo.gamma = num(key, v)?,
            "mutation_share" => self.evo.mutation_share = num(key, v)?,
            "seed" => self.evo.seed = num(key, v)?,
            "workers" => self.evo.workers = num(key, v)?,
            "path_len" => self.path_len = Some(num(key, v)?),
            "estimate_m" => {
                if num::<bool>(key, v)? {
                    self.estimate_m.get_or_insert_with(EstimateM::default);
                } else {
                    self.estimate_m = None;
                }
            }
            "estimate_samples" => {
                self.estimate_m
                    .get_or_insert_with(EstimateM::default)
                    .samples = num(key, v)?
            }
            "estimate_margin" => {
                self.estimate_m
                    .get_or_insert_with(EstimateM::default)
                    .margin = num(key, v)?
            }
            "frontier_cap" => self.frontier_cap = num(key, v)?,
            "step_budget" => self.step_budget = num(key, v)?,
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<(), HarnessError> {
        for (k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }
}

/// Runs one configuration. The report's `program` field is the benchmark id.
pub fn run(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    if cfg.program.is_empty() {
        return Err(HarnessError::Config("no program given".into()));
    }
    let bench = lookup(&cfg.program).map_err(config_err)?;
    let program = bench.build(&cfg.scale).map_err(config_err)?;
    let opts = ExecOptions {
        step_budget: cfg.step_budget,
    };
    let mut report = match cfg.method {
        Method::PathFuzz => {
            let path_len = match (cfg.path_len, cfg.estimate_m) {
                (Some(m), _) => m,
                (None, Some(e)) => {
                    let mut ctx = SolverContext::for_inputs(&program.inputs);
                    estimate_m(
                        &program,
                        e.samples,
                        e.margin,
                        cfg.evo.seed,
                        cfg.mapping,
                        &mut ctx,
                        &opts,
                    )
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?
                }
                (None, None) => bench.max_bits(&cfg.scale).map_err(config_err)?,
            };
            let params = EvoParams {
                path_len,
                ..cfg.evo.clone()
            };
            params.validate().map_err(config_err)?;
            evo::run(&program, &params, cfg.mapping, &cfg.budget, &opts)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?
        }
        Method::Fuzz => {
            cfg.evo.validate().map_err(config_err)?;
            fuzz_inputs(&program, &cfg.evo, &cfg.budget, cfg.step_budget)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?
        }
        Method::SymExe => {
            let params = SymExeParams {
                frontier_cap: cfg.frontier_cap,
            };
            if params.frontier_cap == 0 {
                return Err(HarnessError::Config("frontier_cap must be positive".into()));
            }
            symexe_search(&program, &params, &cfg.budget, &opts, cfg.evo.seed)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?
        }
    };
    report.program = bench.id.to_string();
    Ok(report)
}

/// A grid of runs sharing one base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub methods: Vec<Method>,
    /// Benchmark ids with their scales.
    pub programs: Vec<(String, Scale)>,
    pub seeds: Vec<u64>,
    /// Runs per (method, program, seed); repetition `r` uses seed `s + r·2^32`.
    pub repetitions: usize,
    pub base: RunConfig,
}

impl Campaign {
    /// Reads a campaign file: `methods`, `programs` (comma separated, each
    /// `id` or `id:K=V;K=V`), `seeds`, `repetitions`, and any run key.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut c = Campaign {
            methods: vec![Method::PathFuzz],
            programs: Vec::new(),
            seeds: vec![0],
            repetitions: 1,
            base: RunConfig::default(),
        };
        let list = |v: &str| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect::<Vec<_>>()
        };
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "methods" => {
                    c.methods = list(&v)
                        .iter()
                        .map(|m| m.parse().map_err(HarnessError::Config))
                        .collect::<Result<_, _>>()?
                }
                "programs" => {
                    c.programs = list(&v)
                        .iter()
                        .map(|p| {
                            let (id, scale) = p.split_once(':').unwrap_or((p, ""));
                            let pairs = scale.split(';').map(str::trim).filter(|s| !s.is_empty());
                            Ok((
                                id.trim().to_string(),
                                parse_scale(pairs).map_err(config_err)?,
                            ))
                        })
                        .collect::<Result<_, HarnessError>>()?
                }
                "seeds" => {
                    c.seeds = list(&v)
                        .iter()
                        .map(|s| num("seeds", s))
                        .collect::<Result<_, _>>()?
                }
                "repetitions" => c.repetitions = num(&k, &v)?,
                _ => c.base.set(&k, &v)?,
            }
        }
        if c.repetitions == 0 {
            return Err(HarnessError::Config(
                "repetitions must be at least 1".into(),
            ));
        }
        if c.programs.is_empty() || c.methods.is_empty() || c.seeds.is_empty() {
            return Err(HarnessError::Config(
                "methods, programs and seeds must be non-empty".into(),
            ));
        }
        for (id, scale) in &c.programs {
            lookup(id)
                .and_then(|b| b.scale(scale))
                .map_err(config_err)?;
        }
        Ok(c)
    }

    pub fn cells(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for m in &self.methods {
            for (id, scale) in &self.programs {
                for &s in &self.seeds {
                    for r in 0..self.repetitions {
                        let mut cfg = self.base.clone();
                        cfg.method = *m;
                        cfg.program = id.clone();
                        cfg.scale = scale.clone();
                        cfg.evo.seed = s.wrapping_add((r as u64) << 32);
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRun {
    pub method: Method,
    pub program: String,
    pub scale: Scale,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Summary of all runs of one method on one program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: Method,
    pub program: String,
    pub scale: Scale,
    pub runs: usize,
    pub failures: usize,
    pub mean_best: Option<f64>,
    pub max_best: Option<i64>,
    pub min_time_to_best_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub runs: Vec<CampaignRun>,
    pub cells: Vec<CellSummary>,
}

/// Runs every cell in order; failures are recorded and the campaign goes on.
pub fn run_campaign(c: &Campaign, mut on_run: impl FnMut(&CampaignRun)) -> CampaignReport {
    let mut runs = Vec::new();
    for cfg in c.cells() {
        let (report, error) = match run(&cfg) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let cr = CampaignRun {
            method: cfg.method,
            program: cfg.program.clone(),
            scale: cfg.scale.clone(),
            seed: cfg.evo.seed,
            report,
            error,
        };
        on_run(&cr);
        runs.push(cr);
    }
    let cells = summarize(&runs);
    CampaignReport { runs, cells }
}

pub fn summarize(runs: &[CampaignRun]) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(String, String, String), Vec<&CampaignRun>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in runs {
        let key = (
            r.method.to_string(),
            r.program.clone(),
            format!("{:?}", r.scale),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let ok: Vec<&RunReport> = rs.iter().filter_map(|r| r.report.as_ref()).collect();
            let best: Vec<i64> = ok.iter().map(|r| r.best_cost).collect();
            CellSummary {
                method: rs[0].method,
                program: rs[0].program.clone(),
                scale: rs[0].scale.clone(),
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                mean_best: (!best.is_empty())
                    .then(|| best.iter().sum::<i64>() as f64 / best.len() as f64),
                max_best: best.iter().copied().max(),
                min_time_to_best_ms: ok.iter().map(|r| r.time_to_best_ms).min(),
            }
        })
        .collect()
}

impl CampaignReport {
    /// Programs as rows, methods as columns: `mean (max) @ min ms`.
    pub fn table(&self) -> String {
        let mut methods: Vec<Method> = Vec::new();
        let mut programs: Vec<String> = Vec::new();
        for c in &self.cells {
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
            let p = program_label(&c.program, &c.scale);
            if !programs.contains(&p) {
                programs.push(p);
            }
        }
        let mut out = String::new();
        let _ = write!(out, "{:<24}", "program");
        for m in &methods {
            let _ = write!(out, " {:>26}", m.to_string());
        }
        out.push('\n');
        for p in &programs {
            let _ = write!(out, "{p:<24}");
            for m in &methods {
                let cell = self
                    .cells
                    .iter()
                    .find(|c| c.method == *m && program_label(&c.program, &c.scale) == *p);
                let text = match cell {
                    Some(CellSummary {
                        mean_best: Some(mean),
                        max_best: Some(max),
                        min_time_to_best_ms: Some(t),
                        ..
                    }) => format!("{mean:.1} ({max}) @ {t} ms"),
                    Some(_) => "failed".to_string(),
                    None => "-".to_string(),
                };
                let _ = write!(out, " {text:>26}");
            }
            out.push('\n');
        }
        out
    }
}

fn program_label(id: &str, scale: &Scale) -> String {
    let s: Vec<String> = scale.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if s.is_empty() {
        id.to_string()
    } else {
        format!("{id} {}", s.join(","))
    }
}

/// File name for one run inside a campaign output directory.
pub fn run_file_name(r: &CampaignRun) -> String {
    let scale: String = r.scale.iter().map(|(k, v)| format!("_{k}{v}")).collect();
    format!("{}_{}{}_s{}.json", r.method, r.program, scale, r.seed)
}

/// Writes one JSON file per run plus `aggregate.json` and `aggregate.txt`.
pub fn write_campaign(dir: &Path, report: &CampaignReport) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in &report.runs {
        let body = serde_json::to_string_pretty(r).expect("runs serialize");
        std::fs::write(dir.join(run_file_name(r)), body)?;
    }
    let agg = serde_json::to_string_pretty(&report.cells).expect("cells serialize");
    std::fs::write(dir.join("aggregate.json"), agg)?;
    std::fs::write(dir.join("aggregate.txt"), report.table())
}
