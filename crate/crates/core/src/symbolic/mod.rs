//! Path-string-driven symbolic execution.
//!
//! Inputs become solver variables; locals hold either concrete integers or
//! linear expressions over inputs. A branch whose guard folds to a constant
//! is followed without consuming a bit. Otherwise the mapping decides:
//!
//! * [`MappingMode::Default`] consumes one bit per open branch, asserts the
//!   chosen polarity and checks the whole conjunction at the end.
//! * [`MappingMode::SkipUnsat`] consumes a bit only when both polarities are
//!   satisfiable given the conditions so far, and otherwise takes the only
//!   feasible side for free, so every string maps to a feasible path.
//!   Branches marked always-satisfiable consume a bit without any check.

mod machine;
mod path;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concrete::{random_input_with, run_concrete, ConcreteInput, ExecError, Trace};
use crate::program::{Program, StmtId};
use crate::solver::{Formula, Model, SatResult, SolverContext, SolverError};

pub use machine::SymVal;
pub(crate) use machine::{Event, SymState};
pub use path::{BadBit, PathString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MappingMode {
    #[serde(rename = "default")]
    Default,
    #[serde(rename = "skip-unsat")]
    SkipUnsat,
}

impl fmt::Display for MappingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MappingMode::Default => "default",
            MappingMode::SkipUnsat => "skip-unsat",
        })
    }
}

impl FromStr for MappingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(MappingMode::Default),
            "skip-unsat" | "skip_unsat" => Ok(MappingMode::SkipUnsat),
            other => Err(format!(
                "unknown mapping `{other}` (expected default or skip-unsat)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    /// Maximum number of statements per run.
    pub step_budget: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            step_budget: crate::concrete::DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("path string exhausted after {used} bits before the program terminated")]
    PathTooShort { used: usize },
    #[error("statement {stmt}: unsupported {what}")]
    UnsupportedFeature { stmt: StmtId, what: &'static str },
    #[error("step budget of {0} statements exhausted")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error(
        "branch {stmt} is marked always-satisfiable but the path condition became unsatisfiable"
    )]
    AnnotationViolated { stmt: StmtId },
    #[error("illegal state: {0}")]
    IllegalState(&'static str),
}

/// Result of one symbolic run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub sat: bool,
    pub cost: i64,
    /// Bits consumed.
    pub m: usize,
    /// Asserted branch conditions, in path order.
    pub conditions: Vec<Formula>,
    pub trace_len: u64,
    pub solver_calls: u64,
    /// The solver gave up; `sat` is false in that case.
    pub solver_budget_exceeded: bool,
    /// A model of `conditions` when one was found along the way.
    pub model: Option<Model>,
}

/// The JSON-facing part of a [`PathOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub sat: bool,
    pub cost: i64,
    pub m: usize,
    pub solver_calls: u64,
}

impl PathOutcome {
    pub fn summary(&self) -> OutcomeSummary {
        OutcomeSummary {
            sat: self.sat,
            cost: self.cost,
            m: self.m,
            solver_calls: self.solver_calls,
        }
    }
}

struct Bits<'a> {
    q: &'a PathString,
    used: usize,
}

impl Bits<'_> {
    fn next(&mut self) -> Result<bool, SymError> {
        let b = *self
            .q
            .bits()
            .get(self.used)
            .ok_or(SymError::PathTooShort { used: self.used })?;
        self.used += 1;
        Ok(b)
    }
}

fn literal(cond: &Formula, side: bool) -> Formula {
    if side {
        cond.clone()
    } else {
        cond.negate()
    }
}

fn lower_model(ctx: &SolverContext) -> Model {
    Model(ctx.domains().iter().map(|d| d.lo).collect())
}

/// Runs `program` along the path selected by `q` under `mode`.
pub fn execute(
    program: &Program,
    q: &PathString,
    mode: MappingMode,
    ctx: &mut SolverContext,
    opts: &ExecOptions,
) -> Result<PathOutcome, SymError> {
    ctx.reset();
    let calls_before = ctx.stats().sat_calls;
    let mut state = SymState::initial(program);
    let mut bits = Bits { q, used: 0 };
    let mut conditions = Vec::new();
    // a model of the conditions so far; `None` once an unchecked literal is added
    let mut model = Some(lower_model(ctx));
    let mut checked_any = false;
    let finish = |ctx: &SolverContext, state: &SymState, conditions, used, sat, exceeded, model| {
        PathOutcome {
            sat,
            cost: state.cost,
            m: used,
            conditions,
            trace_len: state.steps,
            solver_calls: ctx.stats().sat_calls - calls_before,
            solver_budget_exceeded: exceeded,
            model,
        }
    };

    loop {
        let (stmt, cond, always_sat) = match state.advance(program, opts.step_budget)? {
            Event::Terminated => break,
            Event::Branch {
                stmt,
                cond,
                always_sat,
            } => (stmt, cond, always_sat),
        };
        let side = match mode {
            MappingMode::Default => {
                checked_any |= !always_sat;
                let bit = bits.next()?;
                model = None;
                bit
            }
            MappingMode::SkipUnsat if always_sat => {
                model = None;
                bits.next()?
            }
            MappingMode::SkipUnsat => {
                checked_any = true;
                let base = match model.take() {
                    Some(m) => m,
                    None => match ctx.check_sat() {
                        Ok(SatResult::Sat) => ctx.get_model()?,
                        Ok(SatResult::Unsat) => return Err(SymError::AnnotationViolated { stmt }),
                        Err(SolverError::BudgetExceeded(_)) => {
                            return Ok(finish(
                                ctx, &state, conditions, bits.used, false, true, None,
                            ));
                        }
                        Err(e) => return Err(e.into()),
                    },
                };
                let free = cond.eval(base.values());
                match ctx.check_extension(&base, &literal(&cond, !free)) {
                    Ok(None) => {
                        model = Some(base);
                        free
                    }
                    Ok(Some(other)) => {
                        if bits.next()? == free {
                            model = Some(base);
                            free
                        } else {
                            model = Some(other);
                            !free
                        }
                    }
                    Err(SolverError::BudgetExceeded(_)) => {
                        return Ok(finish(
                            ctx, &state, conditions, bits.used, false, true, None,
                        ));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let lit = literal(&cond, side);
        ctx.push(lit.clone())?;
        conditions.push(lit);
        state.take(program, side);
    }

    match mode {
        MappingMode::SkipUnsat => Ok(finish(
            ctx, &state, conditions, bits.used, true, false, model,
        )),
        MappingMode::Default if !checked_any => Ok(finish(
            ctx, &state, conditions, bits.used, true, false, None,
        )),
        MappingMode::Default => match ctx.check_sat() {
            Ok(SatResult::Sat) => {
                let m = ctx.get_model().ok();
                Ok(finish(ctx, &state, conditions, bits.used, true, false, m))
            }
            Ok(SatResult::Unsat) => Ok(finish(
                ctx, &state, conditions, bits.used, false, false, None,
            )),
            Err(SolverError::BudgetExceeded(_)) => Ok(finish(
                ctx, &state, conditions, bits.used, false, true, None,
            )),
            Err(e) => Err(e.into()),
        },
    }
}

/// The path string related to the input of `trace`: one bit per branch that
/// consumes a bit under `mode`, `1` when the true side was taken. Replaying
/// the (zero-padded) result reproduces the trace.
pub fn extract_path_string(
    program: &Program,
    trace: &Trace,
    mode: MappingMode,
    ctx: &mut SolverContext,
    opts: &ExecOptions,
) -> Result<PathString, SymError> {
    ctx.reset();
    let input = Model(trace.input.to_flat());
    let mut state = SymState::initial(program);
    let mut bits = Vec::new();
    loop {
        let (cond, always_sat) = match state.advance(program, opts.step_budget)? {
            Event::Terminated => break,
            Event::Branch {
                cond, always_sat, ..
            } => (cond, always_sat),
        };
        let side = cond.eval(input.values());
        let open = match mode {
            MappingMode::Default => true,
            MappingMode::SkipUnsat if always_sat => true,
            MappingMode::SkipUnsat => ctx
                .check_extension(&input, &literal(&cond, !side))?
                .is_some(),
        };
        if open {
            bits.push(side);
        }
        ctx.push(literal(&cond, side))?;
        state.take(program, side);
    }
    debug_assert_eq!(state.cost, trace.total_cost);
    debug_assert_eq!(state.steps as usize, trace.stmts.len());
    Ok(PathString(bits))
}

/// A concrete input satisfying every condition of a satisfiable outcome.
pub fn solve_witness(
    program: &Program,
    outcome: &PathOutcome,
    ctx: &mut SolverContext,
) -> Result<ConcreteInput, SymError> {
    if !outcome.sat {
        return Err(SymError::IllegalState(
            "witness requested for an unsatisfiable outcome",
        ));
    }
    ctx.reset();
    for c in &outcome.conditions {
        ctx.push(c.clone())?;
    }
    match ctx.check_sat()? {
        SatResult::Sat => Ok(ConcreteInput::from_flat(
            &program.inputs,
            ctx.get_model()?.values(),
        )),
        SatResult::Unsat => Err(SymError::IllegalState(
            "outcome conditions are unsatisfiable",
        )),
    }
}

/// Path-string length from `samples` random inputs: `ceil(margin · max bits)`,
/// at least 1.
pub fn estimate_m(
    program: &Program,
    samples: usize,
    margin: f64,
    seed: u64,
    mode: MappingMode,
    ctx: &mut SolverContext,
    opts: &ExecOptions,
) -> Result<usize, SymError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut longest = 0;
    for _ in 0..samples.max(1) {
        let input = random_input_with(&program.inputs, &mut rng);
        let trace = run_concrete(program, &input, opts.step_budget)?;
        longest = longest.max(extract_path_string(program, &trace, mode, ctx, opts)?.len());
    }
    Ok(((longest as f64 * margin).ceil() as usize).max(1))
}

#[cfg(test)]
mod tests;
