//! Symbolic store and the statement-stepping loop shared by every
//! symbolic engine.

use std::sync::Arc;

use super::SymError;
use crate::concrete::{ExecError, MAX_CALL_DEPTH};
use crate::program::{BinOp, Expr, Place, Program, StmtId, StmtKind};
use crate::solver::{Formula, LinExpr};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymVal {
    Con(i64),
    Sym(Arc<LinExpr>),
}

impl SymVal {
    fn lin(&self) -> LinExpr {
        match self {
            SymVal::Con(c) => LinExpr::constant(*c),
            SymVal::Sym(e) => (**e).clone(),
        }
    }

    fn from_lin(e: LinExpr) -> SymVal {
        match e.as_constant() {
            Some(c) => SymVal::Con(c),
            None => SymVal::Sym(Arc::new(e)),
        }
    }
}

pub(crate) enum Event {
    Terminated,
    /// Stopped at a branch whose guard does not fold to a constant.
    Branch {
        stmt: StmtId,
        cond: Formula,
        always_sat: bool,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct SymState {
    pub pc: StmtId,
    scalars: Vec<SymVal>,
    arrays: Vec<Arc<Vec<SymVal>>>,
    stack: Vec<StmtId>,
    pub cost: i64,
    pub steps: u64,
}

impl SymState {
    pub fn initial(program: &Program) -> Self {
        let spec = &program.inputs;
        let mut scalars: Vec<SymVal> = (0..spec.scalars.len())
            .map(|v| SymVal::Sym(Arc::new(LinExpr::var(v))))
            .collect();
        scalars.resize(program.scalar_slots(), SymVal::Con(0));
        let mut arrays = Vec::new();
        for (i, a) in spec.arrays.iter().enumerate() {
            let off = spec.array_offset(i);
            arrays.push(Arc::new(
                (0..a.len)
                    .map(|k| SymVal::Sym(Arc::new(LinExpr::var(off + k))))
                    .collect(),
            ));
        }
        for len in &program.array_lens()[spec.arrays.len()..] {
            arrays.push(Arc::new(vec![SymVal::Con(0); *len]));
        }
        Self {
            pc: Program::ENTRY,
            scalars,
            arrays,
            stack: Vec::new(),
            cost: 0,
            steps: 0,
        }
    }

    fn index(&self, e: &Expr, len: usize, stmt: StmtId) -> Result<usize, SymError> {
        match self.int(e, stmt)? {
            SymVal::Con(i) if i >= 0 && (i as usize) < len => Ok(i as usize),
            SymVal::Con(i) => Err(ExecError::IndexOutOfBounds {
                stmt,
                index: i,
                len,
            }
            .into()),
            SymVal::Sym(_) => Err(SymError::UnsupportedFeature {
                stmt,
                what: "symbolic array index",
            }),
        }
    }

    fn int(&self, e: &Expr, stmt: StmtId) -> Result<SymVal, SymError> {
        Ok(match e {
            Expr::Int(v) => SymVal::Con(*v),
            Expr::Scalar(s) => self.scalars[*s].clone(),
            Expr::Read(a, idx) => {
                let arr = &self.arrays[*a];
                arr[self.index(idx, arr.len(), stmt)?].clone()
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.int(a, stmt)?, self.int(b, stmt)?);
                let overflow = || SymError::from(ExecError::Overflow { stmt });
                match (op, &x, &y) {
                    (BinOp::Add, SymVal::Con(p), SymVal::Con(q)) => {
                        SymVal::Con(p.checked_add(*q).ok_or_else(overflow)?)
                    }
                    (BinOp::Sub, SymVal::Con(p), SymVal::Con(q)) => {
                        SymVal::Con(p.checked_sub(*q).ok_or_else(overflow)?)
                    }
                    (BinOp::Mul, SymVal::Con(p), SymVal::Con(q)) => {
                        SymVal::Con(p.checked_mul(*q).ok_or_else(overflow)?)
                    }
                    (BinOp::Add, _, _) => SymVal::from_lin(x.lin().add(&y.lin())),
                    (BinOp::Sub, _, _) => SymVal::from_lin(x.lin().sub(&y.lin())),
                    (BinOp::Mul, SymVal::Con(k), s) | (BinOp::Mul, s, SymVal::Con(k)) => {
                        SymVal::from_lin(s.lin().scale(*k))
                    }
                    (BinOp::Mul, _, _) => {
                        return Err(SymError::UnsupportedFeature {
                            stmt,
                            what: "product of symbolic values",
                        })
                    }
                    (BinOp::Mod, _, SymVal::Con(m)) if *m <= 0 => {
                        return Err(ExecError::BadModulus { stmt, divisor: *m }.into())
                    }
                    (BinOp::Mod, _, SymVal::Con(m)) => SymVal::from_lin(x.lin().modulo(*m)),
                    (BinOp::Mod, _, SymVal::Sym(_)) => {
                        return Err(SymError::UnsupportedFeature {
                            stmt,
                            what: "symbolic modulus",
                        })
                    }
                }
            }
            _ => {
                return Err(ExecError::Malformed {
                    stmt,
                    detail: "boolean where integer expected",
                }
                .into())
            }
        })
    }

    fn boolean(&self, e: &Expr, stmt: StmtId) -> Result<Formula, SymError> {
        Ok(match e {
            Expr::Bool(b) => {
                if *b {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Expr::Cmp(op, a, b) => {
                let (x, y) = (self.int(a, stmt)?, self.int(b, stmt)?);
                match (&x, &y) {
                    (SymVal::Con(p), SymVal::Con(q)) => {
                        if op.eval(*p, *q) {
                            Formula::True
                        } else {
                            Formula::False
                        }
                    }
                    _ => Formula::compare(*op, &x.lin(), &y.lin()),
                }
            }
            Expr::And(a, b) => Formula::and(self.boolean(a, stmt)?, self.boolean(b, stmt)?),
            Expr::Or(a, b) => Formula::or(self.boolean(a, stmt)?, self.boolean(b, stmt)?),
            Expr::Not(a) => self.boolean(a, stmt)?.negate(),
            _ => {
                return Err(ExecError::Malformed {
                    stmt,
                    detail: "integer where boolean expected",
                }
                .into())
            }
        })
    }

    /// Executes statements until termination or an open branch. At an open
    /// branch `pc` stays on the branch until [`SymState::take`] is called.
    pub fn advance(&mut self, program: &Program, step_budget: u64) -> Result<Event, SymError> {
        loop {
            let pc = self.pc;
            let st = program.statements.get(pc).ok_or(ExecError::Malformed {
                stmt: pc,
                detail: "jump out of range",
            })?;
            if self.steps >= step_budget {
                return Err(SymError::BudgetExceeded(step_budget));
            }
            self.steps += 1;
            let next = |k: usize| -> Result<StmtId, SymError> {
                st.out.get(k).copied().ok_or(
                    ExecError::Malformed {
                        stmt: pc,
                        detail: "missing successor",
                    }
                    .into(),
                )
            };
            self.pc = match &st.kind {
                StmtKind::Assign { target, value } => {
                    let v = self.int(value, pc)?;
                    match target {
                        Place::Scalar(s) => self.scalars[*s] = v,
                        Place::Element(a, idx) => {
                            let i = self.index(idx, self.arrays[*a].len(), pc)?;
                            Arc::make_mut(&mut self.arrays[*a])[i] = v;
                        }
                    }
                    next(0)?
                }
                StmtKind::Branch { guard } => match self.boolean(guard, pc)? {
                    Formula::True => next(1)?,
                    Formula::False => next(0)?,
                    cond => {
                        return Ok(Event::Branch {
                            stmt: pc,
                            cond,
                            always_sat: st.always_sat,
                        });
                    }
                },
                StmtKind::AddCost { amount } => match self.int(amount, pc)? {
                    SymVal::Con(c) => {
                        self.cost = self
                            .cost
                            .checked_add(c)
                            .ok_or(ExecError::Overflow { stmt: pc })?;
                        next(0)?
                    }
                    SymVal::Sym(_) => {
                        return Err(SymError::UnsupportedFeature {
                            stmt: pc,
                            what: "symbolic cost",
                        })
                    }
                },
                StmtKind::Call { resume } => {
                    if self.stack.len() >= MAX_CALL_DEPTH {
                        return Err(ExecError::CallDepth { stmt: pc }.into());
                    }
                    self.stack.push(*resume);
                    next(0)?
                }
                StmtKind::Return => match self.stack.pop() {
                    Some(r) => r,
                    None => return Ok(Event::Terminated),
                },
                StmtKind::Halt => return Ok(Event::Terminated),
            };
        }
    }

    /// Leaves the pending branch on the chosen side.
    pub fn take(&mut self, program: &Program, side: bool) {
        self.pc = program.statements[self.pc].out[side as usize];
    }
}
