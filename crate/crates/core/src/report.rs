//! Run reports and best-cost curves.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bench::Scale;
use crate::concrete::ConcreteInput;
use crate::program::InputSpec;
use crate::solver::SolverStats;
use crate::symbolic::{MappingMode, PathString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    PathFuzz,
    Fuzz,
    SymExe,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::PathFuzz => "pathfuzz",
            Method::Fuzz => "fuzz",
            Method::SymExe => "symexe",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pathfuzz" => Ok(Method::PathFuzz),
            "fuzz" => Ok(Method::Fuzz),
            "symexe" => Ok(Method::SymExe),
            other => Err(format!(
                "unknown method `{other}` (expected pathfuzz, fuzz or symexe)"
            )),
        }
    }
}

/// Why a search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    MaxIters,
    Target,
    /// Nothing left to explore.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub elapsed_ms: u64,
    pub best_cost: i64,
    pub evals: u64,
    /// Sampled by the clock rather than by an improvement.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub heartbeat: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub calls: u64,
    pub unsat: u64,
    pub budget_exceeded: u64,
    pub seconds: f64,
    /// Fraction of wall time spent in the solver.
    pub time_share: f64,
}

impl SolverSummary {
    pub fn from_stats(stats: &SolverStats, wall_seconds: f64) -> Self {
        Self {
            calls: stats.sat_calls,
            unsat: stats.unsat_results,
            budget_exceeded: stats.budget_exceeded,
            seconds: stats.solve_seconds,
            time_share: if wall_seconds > 0.0 {
                (stats.solve_seconds / wall_seconds).min(1.0)
            } else {
                0.0
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub program: String,
    pub program_name: String,
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingMode>,
    /// Search parameters as given.
    pub params: Value,
    pub seed: u64,
    pub workers: usize,
    /// `-1` when no feasible path was found.
    pub best_cost: i64,
    pub best_input: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_path: Option<PathString>,
    pub curve: Vec<CurvePoint>,
    pub evals: u64,
    pub generations: u64,
    /// Share of evaluations that were feasible.
    pub sat_rate: f64,
    /// Evaluations that failed with an error.
    pub errors: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
    /// Evaluations cut off by the solver budget.
    pub solver_budget_exceeded: u64,
    /// States dropped from a bounded frontier.
    #[serde(default)]
    pub dropped_states: u64,
    pub solver: SolverSummary,
    pub stop_reason: StopReason,
    pub wall_time_s: f64,
    /// Milliseconds until `best_cost` was first reached.
    pub time_to_best_ms: u64,
}

/// Inputs keyed by name, arrays as JSON arrays.
pub fn input_json(spec: &InputSpec, input: &ConcreteInput) -> Value {
    let mut m = Map::new();
    for (s, v) in spec.scalars.iter().zip(&input.scalars) {
        m.insert(s.name.clone(), Value::from(*v));
    }
    for (a, v) in spec.arrays.iter().zip(&input.arrays) {
        m.insert(a.name.clone(), Value::from(v.clone()));
    }
    Value::Object(m)
}

/// Reverse of [`input_json`].
pub fn input_from_json(spec: &InputSpec, value: &Value) -> Option<ConcreteInput> {
    let obj = value.as_object()?;
    let scalars = spec
        .scalars
        .iter()
        .map(|s| obj.get(&s.name)?.as_i64())
        .collect::<Option<Vec<_>>>()?;
    let arrays = spec
        .arrays
        .iter()
        .map(|a| {
            obj.get(&a.name)?
                .as_array()?
                .iter()
                .map(Value::as_i64)
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(ConcreteInput { scalars, arrays })
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The curve as `elapsed_ms,best_cost,evals` rows.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "elapsed_ms,best_cost,evals")?;
        for p in &self.curve {
            writeln!(out, "{},{},{}", p.elapsed_ms, p.best_cost, p.evals)?;
        }
        Ok(())
    }

    /// Copy with wall-clock dependent fields zeroed and heartbeat samples
    /// removed, for comparing runs.
    pub fn masked(&self) -> RunReport {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        r.time_to_best_ms = 0;
        r.solver.seconds = 0.0;
        r.solver.time_share = 0.0;
        r.curve.retain(|p| !p.heartbeat);
        for p in &mut r.curve {
            p.elapsed_ms = 0;
        }
        r
    }
}

/// Collects curve samples on every improvement plus a periodic heartbeat.
#[derive(Debug, Clone)]
pub struct CurveRecorder {
    start: Instant,
    heartbeat: Duration,
    last_sample: Instant,
    best: Option<i64>,
    best_at_ms: u64,
    points: Vec<CurvePoint>,
}

impl CurveRecorder {
    pub fn new(start: Instant) -> Self {
        Self::with_heartbeat(start, Duration::from_secs(1))
    }

    pub fn with_heartbeat(start: Instant, heartbeat: Duration) -> Self {
        Self {
            start,
            heartbeat,
            last_sample: start,
            best: None,
            best_at_ms: 0,
            points: Vec::new(),
        }
    }

    pub fn elapsed_ms(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    pub fn best(&self) -> Option<i64> {
        self.best
    }

    /// Records `cost` seen after `evals` evaluations; returns true on a new best.
    pub fn observe(&mut self, cost: i64, evals: u64) -> bool {
        let now = Instant::now();
        let elapsed_ms = (now - self.start).as_millis() as u64;
        if self.best.is_none_or(|b| cost > b) {
            self.best = Some(cost);
            self.best_at_ms = elapsed_ms;
            self.points.push(CurvePoint {
                elapsed_ms,
                best_cost: cost,
                evals,
                heartbeat: false,
            });
            self.last_sample = now;
            return true;
        }
        self.tick(evals);
        false
    }

    /// Adds a heartbeat sample if the interval has passed.
    pub fn tick(&mut self, evals: u64) {
        let now = Instant::now();
        if let Some(best) = self.best {
            if now - self.last_sample >= self.heartbeat {
                let elapsed_ms = (now - self.start).as_millis() as u64;
                self.points.push(CurvePoint {
                    elapsed_ms,
                    best_cost: best,
                    evals,
                    heartbeat: true,
                });
                self.last_sample = now;
            }
        }
    }

    /// Final curve, ending in a sample of the final best; and the time the
    /// best was first reached.
    pub fn finish(mut self, evals: u64) -> (Vec<CurvePoint>, u64) {
        if let Some(best) = self.best {
            let elapsed_ms = self.elapsed_ms();
            if self
                .points
                .last()
                .is_none_or(|p| p.evals != evals || p.best_cost != best)
            {
                self.points.push(CurvePoint {
                    elapsed_ms,
                    best_cost: best,
                    evals,
                    heartbeat: true,
                });
            }
        }
        (self.points, self.best_at_ms)
    }
}
