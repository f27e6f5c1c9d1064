//! Exhaustive enumeration of feasible paths, used as an oracle.

use crate::concrete::ConcreteInput;
use crate::program::{Program, StmtId};
use crate::solver::{Formula, Model, SatResult, SolverContext};
use crate::symbolic::{Event, ExecOptions, SymError, SymState};

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Feasible complete paths seen.
    pub paths: usize,
    /// False when the path limit cut the search short.
    pub complete: bool,
    pub max_cost: Option<i64>,
    /// An input following a most expensive path.
    pub best_input: Option<ConcreteInput>,
    /// Annotated branches found with an infeasible side, without duplicates.
    pub violations: Vec<StmtId>,
}

struct Walk<'a> {
    program: &'a Program,
    opts: &'a ExecOptions,
    limit: usize,
    out: Enumeration,
}

fn literal(cond: &Formula, side: bool) -> Formula {
    if side {
        cond.clone()
    } else {
        cond.negate()
    }
}

impl Walk<'_> {
    fn explore(
        &mut self,
        mut state: SymState,
        model: Model,
        ctx: &mut SolverContext,
    ) -> Result<(), SymError> {
        if !self.out.complete {
            return Ok(());
        }
        let (stmt, cond, always_sat) = match state.advance(self.program, self.opts.step_budget)? {
            Event::Terminated => {
                self.out.paths += 1;
                if self.out.max_cost.is_none_or(|c| state.cost > c) {
                    self.out.max_cost = Some(state.cost);
                    self.out.best_input = Some(ConcreteInput::from_flat(
                        &self.program.inputs,
                        model.values(),
                    ));
                }
                if self.out.paths >= self.limit {
                    self.out.complete = false;
                }
                return Ok(());
            }
            Event::Branch {
                stmt,
                cond,
                always_sat,
            } => (stmt, cond, always_sat),
        };
        let free = cond.eval(model.values());
        let other = ctx.check_extension(&model, &literal(&cond, !free))?;
        if other.is_none() && always_sat && !self.out.violations.contains(&stmt) {
            self.out.violations.push(stmt);
        }
        let mut sides = vec![(free, model)];
        if let Some(m) = other {
            sides.push((!free, m));
        }
        // false side first, so paths come out in path-string order
        sides.sort_by_key(|(side, _)| *side);
        for (side, m) in sides {
            let mut next = state.clone();
            next.take(self.program, side);
            ctx.push(literal(&cond, side))?;
            let r = self.explore(next, m, ctx);
            ctx.pop()?;
            r?;
        }
        Ok(())
    }
}

/// Walks every feasible path of `program`, stopping after `limit` paths.
pub fn enumerate_paths(
    program: &Program,
    ctx: &mut SolverContext,
    opts: &ExecOptions,
    limit: usize,
) -> Result<Enumeration, SymError> {
    ctx.reset();
    let model = match ctx.check_sat()? {
        SatResult::Sat => ctx.get_model()?,
        SatResult::Unsat => return Err(SymError::IllegalState("empty input domain")),
    };
    let mut walk = Walk {
        program,
        opts,
        limit: limit.max(1),
        out: Enumeration {
            paths: 0,
            complete: true,
            max_cost: None,
            best_input: None,
            violations: Vec::new(),
        },
    };
    walk.explore(SymState::initial(program), model, ctx)?;
    Ok(walk.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::ProgramBuilder;

    #[test]
    fn counts_feasible_paths_only() {
        // x > 5 then x < 3 is infeasible: 3 paths, not 4
        let mut b = ProgramBuilder::new("p");
        let x = b.input_scalar("x", 0, 9);
        b.if_(x.get().gt(5), |b| b.add_cost(2));
        b.if_(x.get().lt(3), |b| b.add_cost(5));
        let p = b.build();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let e = enumerate_paths(&p, &mut ctx, &ExecOptions::default(), 100).unwrap();
        assert_eq!(e.paths, 3);
        assert!(e.complete);
        assert_eq!(e.max_cost, Some(5));
        assert!(e.best_input.unwrap().scalars[0] < 3);
    }

    #[test]
    fn limit_marks_incomplete() {
        let mut b = ProgramBuilder::new("p");
        let a = b.input_array("a", 4, 0, 1);
        let i = b.local("i");
        b.for_range(i, 0, 4, |b| b.if_(a.at(i).equals(1), |b| b.add_cost(1)));
        let p = b.build();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let e = enumerate_paths(&p, &mut ctx, &ExecOptions::default(), 5).unwrap();
        assert!(!e.complete);
        assert_eq!(e.paths, 5);
        let e = enumerate_paths(&p, &mut ctx, &ExecOptions::default(), 16).unwrap();
        assert_eq!((e.paths, e.complete), (16, false));
        let e = enumerate_paths(&p, &mut ctx, &ExecOptions::default(), 17).unwrap();
        assert_eq!((e.paths, e.complete, e.max_cost), (16, true, Some(4)));
    }

    #[test]
    fn reports_wrong_annotations() {
        let mut b = ProgramBuilder::new("p");
        let x = b.input_scalar("x", 0, 9);
        b.if_(x.get().gt(5), |b| b.add_cost(1));
        b.if_(x.get().gt(7).always_sat(), |b| b.add_cost(1));
        let p = b.build();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let e = enumerate_paths(&p, &mut ctx, &ExecOptions::default(), 100).unwrap();
        assert_eq!(e.violations.len(), 1);
        assert_eq!(e.paths, 3);
    }
}
