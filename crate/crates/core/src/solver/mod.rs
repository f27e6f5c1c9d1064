//! Bounded-integer constraint solver.
//!
//! Conditions are linear (in)equalities over input variables, where a term
//! may also be `e mod m` for a linear `e` and positive constant `m`. Every
//! variable ranges over a finite interval, so the search (bounds
//! propagation plus backtracking, ascending value order) is complete.

mod search;
mod simplex;
mod smtlib;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::program::{CmpOp, Interval};

pub use search::DEFAULT_SOLVE_BUDGET;

/// Index of a solver variable (the flat input position).
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Var(VarId),
    /// Euclidean remainder of a linear expression by a positive constant.
    Mod(Arc<LinExpr>, i64),
}

/// `Σ coef·atom + constant`, terms sorted by atom with nonzero coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub terms: Vec<(Atom, i64)>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(c: i64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self {
            terms: vec![(Atom::Var(v), 1)],
            constant: 0,
        }
    }

    pub fn as_constant(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.constant)
    }

    /// `self mod m` for `m > 0`; folds constants.
    pub fn modulo(&self, m: i64) -> Self {
        assert!(m > 0, "modulus must be positive");
        match self.as_constant() {
            Some(c) => Self::constant(c.rem_euclid(m)),
            None => Self {
                terms: vec![(Atom::Mod(Arc::new(self.clone()), m), 1)],
                constant: 0,
            },
        }
    }

    pub fn add(&self, other: &LinExpr) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push(other.terms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = self.terms[i].1 + other.terms[j].1;
                    if c != 0 {
                        terms.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self {
            terms,
            constant: self.constant + other.constant,
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::constant(0);
        }
        Self {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn add_constant(&self, c: i64) -> Self {
        Self {
            terms: self.terms.clone(),
            constant: self.constant + c,
        }
    }

    pub fn eval(&self, values: &[i64]) -> i128 {
        let mut acc = self.constant as i128;
        for (a, c) in &self.terms {
            acc += *c as i128 * a.eval(values);
        }
        acc
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        for (a, _) in &self.terms {
            match a {
                Atom::Var(v) => f(*v),
                Atom::Mod(e, _) => e.for_each_var(f),
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(|(a, _)| matches!(a, Atom::Var(_)))
    }
}

impl Atom {
    pub fn eval(&self, values: &[i64]) -> i128 {
        match self {
            Atom::Var(v) => values[*v] as i128,
            Atom::Mod(e, m) => e.eval(values).rem_euclid(*m as i128),
        }
    }
}

/// Relation of a constraint's expression to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Eq,
    Ne,
}

/// `expr rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Constraint {
    pub fn holds(&self, values: &[i64]) -> bool {
        let v = self.expr.eval(values);
        match self.rel {
            Rel::Le => v <= 0,
            Rel::Eq => v == 0,
            Rel::Ne => v != 0,
        }
    }

    /// Normalizes `expr rel 0` into a formula: constants fold to
    /// `True`/`False`, coefficients are divided by their gcd and equalities
    /// get a positive leading coefficient.
    pub fn normalized(expr: LinExpr, rel: Rel) -> Formula {
        if let Some(c) = expr.as_constant() {
            let ok = match rel {
                Rel::Le => c <= 0,
                Rel::Eq => c == 0,
                Rel::Ne => c != 0,
            };
            return if ok { Formula::True } else { Formula::False };
        }
        let g = expr.terms.iter().fold(0, |g, (_, c)| gcd(g, *c));
        let mut expr = expr;
        match rel {
            Rel::Le => {
                if g > 1 {
                    // Σ (a/g)x ≤ floor(-c/g)
                    let rhs = (-expr.constant).div_euclid(g);
                    expr = LinExpr {
                        terms: expr.terms.into_iter().map(|(a, c)| (a, c / g)).collect(),
                        constant: -rhs,
                    };
                }
            }
            Rel::Eq | Rel::Ne => {
                if expr.constant % g != 0 {
                    return if rel == Rel::Eq {
                        Formula::False
                    } else {
                        Formula::True
                    };
                }
                let sign = if expr.terms[0].1 < 0 { -1 } else { 1 };
                let k = g * sign;
                expr = LinExpr {
                    terms: expr.terms.into_iter().map(|(a, c)| (a, c / k)).collect(),
                    constant: expr.constant / k,
                };
            }
        }
        Formula::Atom(Constraint { expr, rel })
    }

    pub fn negate(&self) -> Formula {
        match self.rel {
            // ¬(e ≤ 0) ⇔ -e + 1 ≤ 0
            Rel::Le => Constraint::normalized(self.expr.scale(-1).add_constant(1), Rel::Le),
            Rel::Eq => Formula::Atom(Constraint {
                expr: self.expr.clone(),
                rel: Rel::Ne,
            }),
            Rel::Ne => Formula::Atom(Constraint {
                expr: self.expr.clone(),
                rel: Rel::Eq,
            }),
        }
    }
}

/// Quantifier-free formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Constraint),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// `a op b` as a normalized formula.
    pub fn compare(op: CmpOp, a: &LinExpr, b: &LinExpr) -> Formula {
        match op {
            CmpOp::Lt => Constraint::normalized(a.sub(b).add_constant(1), Rel::Le),
            CmpOp::Le => Constraint::normalized(a.sub(b), Rel::Le),
            CmpOp::Gt => Constraint::normalized(b.sub(a).add_constant(1), Rel::Le),
            CmpOp::Ge => Constraint::normalized(b.sub(a), Rel::Le),
            CmpOp::Eq => Constraint::normalized(a.sub(b), Rel::Eq),
            CmpOp::Ne => Constraint::normalized(a.sub(b), Rel::Ne),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, x) | (x, Formula::True) => x,
            (Formula::And(mut xs), Formula::And(ys)) => {
                xs.extend(ys);
                Formula::And(xs)
            }
            (Formula::And(mut xs), y) | (y, Formula::And(mut xs)) => {
                xs.push(y);
                Formula::And(xs)
            }
            (x, y) => Formula::And(vec![x, y]),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, x) | (x, Formula::False) => x,
            (Formula::Or(mut xs), Formula::Or(ys)) => {
                xs.extend(ys);
                Formula::Or(xs)
            }
            (Formula::Or(mut xs), y) | (y, Formula::Or(mut xs)) => {
                xs.push(y);
                Formula::Or(xs)
            }
            (x, y) => Formula::Or(vec![x, y]),
        }
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(c) => c.negate(),
            Formula::And(xs) => xs
                .iter()
                .map(Formula::negate)
                .fold(Formula::False, Formula::or),
            Formula::Or(xs) => xs
                .iter()
                .map(Formula::negate)
                .fold(Formula::True, Formula::and),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            _ => None,
        }
    }

    pub fn eval(&self, values: &[i64]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(c) => c.holds(values),
            Formula::And(xs) => xs.iter().all(|x| x.eval(values)),
            Formula::Or(xs) => xs.iter().any(|x| x.eval(values)),
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(c) => c.expr.for_each_var(f),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.for_each_var(f)),
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.for_each_var(&mut |v| out.push(v));
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A full assignment, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Model(pub Vec<i64>);

impl Model {
    pub fn get(&self, v: VarId) -> i64 {
        self.0[v]
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("pop on an empty assertion stack")]
    StackUnderflow,
    #[error("illegal state: {0}")]
    IllegalState(&'static str),
    #[error("solver budget of {0} steps exceeded")]
    BudgetExceeded(u64),
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub sat_calls: u64,
    pub unsat_results: u64,
    pub budget_exceeded: u64,
    /// Cumulative time spent deciding, in seconds.
    pub solve_seconds: f64,
}

impl SolverStats {
    pub fn merge(&mut self, other: &SolverStats) {
        self.sat_calls += other.sat_calls;
        self.unsat_results += other.unsat_results;
        self.budget_exceeded += other.budget_exceeded;
        self.solve_seconds += other.solve_seconds;
    }
}

/// Variable domains plus a LIFO stack of asserted formulas.
#[derive(Debug, Clone)]
pub struct SolverContext {
    names: Vec<String>,
    domains: Vec<Interval>,
    stack: Vec<Formula>,
    /// For every variable, the stack positions mentioning it (ascending).
    occurs: Vec<Vec<usize>>,
    model: Option<Model>,
    budget: u64,
    stats: SolverStats,
}

impl PartialEq for SolverContext {
    /// Compares declarations and assertions; statistics are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.domains == other.domains && self.stack == other.stack
    }
}

impl SolverContext {
    pub fn new(vars: Vec<(String, Interval)>) -> Self {
        let (names, domains): (Vec<_>, Vec<_>) = vars.into_iter().unzip();
        let n = domains.len();
        Self {
            names,
            domains,
            stack: Vec::new(),
            occurs: vec![Vec::new(); n],
            model: None,
            budget: DEFAULT_SOLVE_BUDGET,
            stats: SolverStats::default(),
        }
    }

    /// Context over the flattened inputs of a program.
    pub fn for_inputs(spec: &crate::program::InputSpec) -> Self {
        Self::new(
            spec.flat_names()
                .into_iter()
                .zip(spec.flat_domains())
                .collect(),
        )
    }

    pub fn with_budget(mut self, steps: u64) -> Self {
        self.budget = steps;
        self
    }

    pub fn set_budget(&mut self, steps: u64) {
        self.budget = steps;
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Interval] {
        &self.domains
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn assertions(&self) -> &[Formula] {
        &self.stack
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn take_stats(&mut self) -> SolverStats {
        std::mem::take(&mut self.stats)
    }

    /// Clears the assertion stack (statistics are kept).
    pub fn reset(&mut self) {
        self.stack.clear();
        for o in &mut self.occurs {
            o.clear();
        }
        self.model = None;
    }

    pub fn push(&mut self, f: Formula) -> Result<(), SolverError> {
        let mut bad = None;
        f.for_each_var(&mut |v| {
            if v >= self.domains.len() {
                bad = Some(v);
            }
        });
        if let Some(v) = bad {
            return Err(SolverError::UnknownVariable(v));
        }
        let idx = self.stack.len();
        for v in f.vars() {
            self.occurs[v].push(idx);
        }
        self.stack.push(f);
        self.model = None;
        Ok(())
    }

    pub fn pop(&mut self) -> Result<Formula, SolverError> {
        let f = self.stack.pop().ok_or(SolverError::StackUnderflow)?;
        for v in f.vars() {
            self.occurs[v].pop();
        }
        self.model = None;
        Ok(f)
    }

    fn timed<T>(
        &mut self,
        f: impl FnOnce(&Self) -> Result<Option<T>, SolverError>,
    ) -> Result<Option<T>, SolverError> {
        let start = Instant::now();
        let r = f(self);
        self.stats.sat_calls += 1;
        self.stats.solve_seconds += start.elapsed().as_secs_f64();
        match &r {
            Ok(None) => self.stats.unsat_results += 1,
            Err(SolverError::BudgetExceeded(_)) => self.stats.budget_exceeded += 1,
            _ => {}
        }
        r
    }

    /// Decides the conjunction of the stack; on SAT the model is retained
    /// for [`SolverContext::get_model`].
    pub fn check_sat(&mut self) -> Result<SatResult, SolverError> {
        self.model = None;
        let r = self.timed(|ctx| {
            let refs: Vec<&Formula> = ctx.stack.iter().collect();
            let base: Vec<i64> = ctx.domains.iter().map(|d| d.lo).collect();
            search::solve(&ctx.domains, &refs, base, ctx.budget)
        })?;
        Ok(match r {
            Some(m) => {
                self.model = Some(Model(m));
                SatResult::Sat
            }
            None => SatResult::Unsat,
        })
    }

    /// Decides `stack ∧ extra` without changing the stack.
    pub fn check_with(&mut self, extra: &Formula) -> Result<Option<Model>, SolverError> {
        self.timed(|ctx| {
            let mut refs: Vec<&Formula> = ctx.stack.iter().collect();
            refs.push(extra);
            let base: Vec<i64> = ctx.domains.iter().map(|d| d.lo).collect();
            search::solve(&ctx.domains, &refs, base, ctx.budget)
        })
        .map(|r| r.map(Model))
    }

    /// Decides `stack ∧ extra` given a model `base` of the stack alone.
    ///
    /// Only the assertions connected (through shared variables) to `extra`
    /// are searched again; every other variable keeps its value from `base`.
    pub fn check_extension(
        &mut self,
        base: &Model,
        extra: &Formula,
    ) -> Result<Option<Model>, SolverError> {
        debug_assert!(
            self.stack.iter().all(|f| f.eval(base.values())),
            "base is not a model of the stack"
        );
        self.timed(|ctx| {
            let mut seen_var = vec![false; ctx.domains.len()];
            let mut seen_item = vec![false; ctx.stack.len()];
            let mut queue = extra.vars();
            for &v in &queue {
                seen_var[v] = true;
            }
            let mut items = Vec::new();
            while let Some(v) = queue.pop() {
                for &i in &ctx.occurs[v] {
                    if !seen_item[i] {
                        seen_item[i] = true;
                        items.push(i);
                        ctx.stack[i].for_each_var(&mut |w| {
                            if !seen_var[w] {
                                seen_var[w] = true;
                                queue.push(w);
                            }
                        });
                    }
                }
            }
            items.sort_unstable();
            let mut refs: Vec<&Formula> = items.iter().map(|&i| &ctx.stack[i]).collect();
            refs.push(extra);
            search::solve(&ctx.domains, &refs, base.0.clone(), ctx.budget)
        })
        .map(|r| r.map(Model))
    }

    /// Model found by the last [`SolverContext::check_sat`], if it was SAT
    /// and the stack has not changed since.
    pub fn get_model(&self) -> Result<Model, SolverError> {
        self.model.clone().ok_or(SolverError::IllegalState(
            "no satisfiable check precedes get_model",
        ))
    }

    /// Largest value of `objective` over models of the stack.
    pub fn maximize(&mut self, objective: &LinExpr) -> Result<(i64, Model), SolverError> {
        if self.check_sat()? == SatResult::Unsat {
            return Err(SolverError::IllegalState(
                "maximize on an unsatisfiable context",
            ));
        }
        let mut best_model = self.get_model()?;
        let mut lo = objective.eval(best_model.values()) as i64;
        let mut hi = search::upper_bound(&self.domains, objective);
        // invariant: lo is feasible, everything above hi is infeasible
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            let goal = Constraint::normalized(LinExpr::constant(mid).sub(objective), Rel::Le);
            match self.check_with(&goal)? {
                Some(m) => {
                    lo = objective.eval(m.values()) as i64;
                    best_model = m;
                }
                None => hi = mid - 1,
            }
        }
        self.model = Some(best_model.clone());
        Ok((lo, best_model))
    }

    /// QF_LIA problem text for the current context.
    pub fn export_smtlib(&self) -> String {
        smtlib::export(&self.names, &self.domains, &self.stack)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, c) in &self.terms {
            let sep = if first { "" } else { " + " };
            first = false;
            match a {
                Atom::Var(v) => write!(f, "{sep}{c}*x{v}")?,
                Atom::Mod(e, m) => write!(f, "{sep}{c}*(({e}) mod {m})")?,
            }
        }
        if first || self.constant != 0 {
            write!(f, "{}{}", if first { "" } else { " + " }, self.constant)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
