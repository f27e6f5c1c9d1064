//! Best-first symbolic execution.
//!
//! Pending branch states sit in a frontier ordered by accumulated cost,
//! deeper states first on ties, then first-in first-out. Expanding a state
//! runs it to its next symbolic branch and queues each feasible side.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::concrete::ConcreteInput;
use crate::program::Program;
use crate::report::{input_json, CurveRecorder, Method, RunReport, SolverSummary, StopReason};
use crate::solver::{Formula, Model, SatResult, SolverContext, SolverError};
use crate::symbolic::{Event, ExecOptions, SymError, SymState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymExeParams {
    /// Frontier size limit.
    pub frontier_cap: usize,
}

impl Default for SymExeParams {
    fn default() -> Self {
        Self {
            frontier_cap: 100_000,
        }
    }
}

/// Conditions as a shared linked list, newest first.
#[derive(Debug)]
struct Cond {
    f: Formula,
    parent: Option<Arc<Cond>>,
}

fn conditions(mut c: &Option<Arc<Cond>>) -> Vec<Formula> {
    let mut out = Vec::new();
    while let Some(node) = c {
        out.push(node.f.clone());
        c = &node.parent;
    }
    out.reverse();
    out
}

struct Node {
    state: SymState,
    conds: Option<Arc<Cond>>,
    model: Model,
    depth: usize,
}

type Key = (Reverse<i64>, Reverse<usize>, u64);

struct Frontier {
    map: BTreeMap<Key, Node>,
    seq: u64,
    cap: usize,
    dropped: u64,
}

impl Frontier {
    fn push(&mut self, node: Node) {
        let key = (Reverse(node.state.cost), Reverse(node.depth), self.seq);
        self.seq += 1;
        self.map.insert(key, node);
        while self.map.len() > self.cap.max(1) {
            // oldest state among the lowest priority ones
            let (c, d, _) = *self.map.keys().next_back().expect("frontier is not empty");
            let victim = *self
                .map
                .range((c, d, 0)..)
                .next()
                .expect("group is not empty")
                .0;
            self.map.remove(&victim);
            self.dropped += 1;
        }
    }

    fn pop(&mut self) -> Option<Node> {
        self.map.pop_first().map(|(_, n)| n)
    }
}

/// Outcome of [`search`] before it is turned into a report.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_cost: Option<i64>,
    pub best_input: Option<ConcreteInput>,
    pub completed_paths: u64,
    pub expansions: u64,
    pub dropped: u64,
    pub stop: StopReason,
}

fn literal(cond: &Formula, side: bool) -> Formula {
    if side {
        cond.clone()
    } else {
        cond.negate()
    }
}

fn search_inner(
    program: &Program,
    params: &SymExeParams,
    budget: &Budget,
    opts: &ExecOptions,
    ctx: &mut SolverContext,
    curve: &mut CurveRecorder,
    start: Instant,
) -> Result<SearchResult, SymError> {
    let mut res = SearchResult {
        best_cost: None,
        best_input: None,
        completed_paths: 0,
        expansions: 0,
        dropped: 0,
        stop: StopReason::Exhausted,
    };
    ctx.reset();
    let model = match ctx.check_sat()? {
        SatResult::Sat => ctx.get_model()?,
        SatResult::Unsat => return Err(SymError::IllegalState("empty input domain")),
    };
    let mut frontier = Frontier {
        map: BTreeMap::new(),
        seq: 0,
        cap: params.frontier_cap,
        dropped: 0,
    };
    frontier.push(Node {
        state: SymState::initial(program),
        conds: None,
        model,
        depth: 0,
    });

    loop {
        if let Some(reason) = budget.check(start, res.expansions, res.best_cost) {
            res.stop = reason;
            break;
        }
        let Some(mut node) = frontier.pop() else {
            break;
        };
        res.expansions += 1;
        match node.state.advance(program, opts.step_budget)? {
            Event::Terminated => {
                res.completed_paths += 1;
                let cost = node.state.cost;
                if res.best_cost.is_none_or(|b| cost > b) {
                    res.best_cost = Some(cost);
                    res.best_input = Some(ConcreteInput::from_flat(
                        &program.inputs,
                        node.model.values(),
                    ));
                }
                curve.observe(cost, res.expansions);
            }
            Event::Branch { cond, .. } => {
                let free = cond.eval(node.model.values());
                ctx.reset();
                for f in conditions(&node.conds) {
                    ctx.push(f)?;
                }
                let other = match ctx.check_extension(&node.model, &literal(&cond, !free)) {
                    Ok(m) => m,
                    Err(SolverError::BudgetExceeded(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                let mut children = vec![(free, node.model)];
                if let Some(m) = other {
                    children.push((!free, m));
                }
                children.sort_by_key(|(side, _)| *side);
                for (side, model) in children {
                    let mut state = node.state.clone();
                    state.take(program, side);
                    let conds = Some(Arc::new(Cond {
                        f: literal(&cond, side),
                        parent: node.conds.clone(),
                    }));
                    frontier.push(Node {
                        state,
                        conds,
                        model,
                        depth: node.depth + 1,
                    });
                }
                curve.tick(res.expansions);
            }
        }
    }
    res.dropped = frontier.dropped;
    Ok(res)
}

/// Best-first search without a report; used by tests and the oracle checks.
pub fn search(
    program: &Program,
    params: &SymExeParams,
    budget: &Budget,
    opts: &ExecOptions,
) -> Result<SearchResult, SymError> {
    let start = Instant::now();
    let mut ctx = SolverContext::for_inputs(&program.inputs);
    search_inner(
        program,
        params,
        budget,
        opts,
        &mut ctx,
        &mut CurveRecorder::new(start),
        start,
    )
}

pub fn symexe_search(
    program: &Program,
    params: &SymExeParams,
    budget: &Budget,
    opts: &ExecOptions,
    seed: u64,
) -> Result<RunReport, SymError> {
    let start = Instant::now();
    let mut ctx = SolverContext::for_inputs(&program.inputs);
    let mut curve = CurveRecorder::new(start);
    let res = search_inner(program, params, budget, opts, &mut ctx, &mut curve, start)?;
    let stats = ctx.take_stats();
    let wall = start.elapsed().as_secs_f64();
    let (points, best_at) = curve.finish(res.expansions);
    Ok(RunReport {
        method: Method::SymExe,
        program: program.name.clone(),
        program_name: program.name.clone(),
        scale: program.scale_params.clone(),
        mapping: None,
        params: serde_json::to_value(params).expect("params serialize"),
        seed,
        workers: 1,
        best_cost: res.best_cost.unwrap_or(-1),
        best_input: res
            .best_input
            .as_ref()
            .map(|i| input_json(&program.inputs, i)),
        best_path: None,
        curve: points,
        evals: res.expansions,
        generations: res.expansions,
        sat_rate: if stats.sat_calls == 0 {
            1.0
        } else {
            1.0 - stats.unsat_results as f64 / stats.sat_calls as f64
        },
        errors: 0,
        first_error: None,
        solver_budget_exceeded: stats.budget_exceeded,
        dropped_states: res.dropped,
        solver: SolverSummary::from_stats(&stats, wall),
        stop_reason: res.stop,
        wall_time_s: wall,
        time_to_best_ms: best_at,
    })
}
