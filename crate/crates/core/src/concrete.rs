//! Concrete interpreter, execution traces and random inputs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::program::{BinOp, Expr, InputSpec, Place, Program, StmtId, StmtKind};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Maximum call-stack depth before a run is treated as runaway recursion.
pub const MAX_CALL_DEPTH: usize = 10_000;

/// Values for every declared input, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ConcreteInput {
    pub scalars: Vec<i64>,
    pub arrays: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("expected {expected} {what}, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{name} = {value} is outside {lo}..={hi}")]
    OutOfDomain {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no value given for {0}")]
    Missing(String),
}

impl ConcreteInput {
    /// Rebuilds an input from the flat layout of [`InputSpec::flat_domains`].
    pub fn from_flat(spec: &InputSpec, flat: &[i64]) -> Self {
        let ns = spec.scalars.len();
        let scalars = flat[..ns].to_vec();
        let mut arrays = Vec::with_capacity(spec.arrays.len());
        let mut off = ns;
        for a in &spec.arrays {
            arrays.push(flat[off..off + a.len].to_vec());
            off += a.len;
        }
        Self { scalars, arrays }
    }

    pub fn to_flat(&self) -> Vec<i64> {
        let mut out = self.scalars.clone();
        for a in &self.arrays {
            out.extend_from_slice(a);
        }
        out
    }

    /// Every input at its domain lower bound.
    pub fn lower_bounds(spec: &InputSpec) -> Self {
        let flat: Vec<i64> = spec.flat_domains().iter().map(|d| d.lo).collect();
        Self::from_flat(spec, &flat)
    }

    pub fn conforms(&self, spec: &InputSpec) -> Result<(), InputError> {
        if self.scalars.len() != spec.scalars.len() {
            return Err(InputError::Shape {
                what: "scalars",
                expected: spec.scalars.len(),
                found: self.scalars.len(),
            });
        }
        if self.arrays.len() != spec.arrays.len() {
            return Err(InputError::Shape {
                what: "arrays",
                expected: spec.arrays.len(),
                found: self.arrays.len(),
            });
        }
        for (v, s) in self.scalars.iter().zip(&spec.scalars) {
            if !s.domain.contains(*v) {
                return Err(InputError::OutOfDomain {
                    name: s.name.clone(),
                    value: *v,
                    lo: s.domain.lo,
                    hi: s.domain.hi,
                });
            }
        }
        for (vals, a) in self.arrays.iter().zip(&spec.arrays) {
            if vals.len() != a.len {
                return Err(InputError::Shape {
                    what: "array elements",
                    expected: a.len,
                    found: vals.len(),
                });
            }
            for (i, v) in vals.iter().enumerate() {
                if !a.domain.contains(*v) {
                    return Err(InputError::OutOfDomain {
                        name: format!("{}[{}]", a.name, i),
                        value: *v,
                        lo: a.domain.lo,
                        hi: a.domain.hi,
                    });
                }
            }
        }
        Ok(())
    }

    /// `name = value` lines; arrays print as `A = [1, 2, 3]`.
    pub fn to_kv(&self, spec: &InputSpec) -> String {
        let mut out = String::new();
        for (v, s) in self.scalars.iter().zip(&spec.scalars) {
            let _ = writeln!(out, "{} = {}", s.name, v);
        }
        for (vals, a) in self.arrays.iter().zip(&spec.arrays) {
            let items: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{} = [{}]", a.name, items.join(", "));
        }
        out
    }

    pub fn parse_kv(spec: &InputSpec, text: &str) -> Result<Self, InputError> {
        let mut scalars: Vec<Option<i64>> = vec![None; spec.scalars.len()];
        let mut arrays: Vec<Option<Vec<i64>>> = vec![None; spec.arrays.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| InputError::Syntax {
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `name = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let int = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| syntax(format!("bad integer `{}`", s.trim())))
            };
            if let Some(idx) = spec.scalars.iter().position(|s| s.name == k) {
                scalars[idx] = Some(int(v)?);
            } else if let Some(idx) = spec.arrays.iter().position(|a| a.name == k) {
                let inner = v
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| syntax("expected `[v, ...]`".into()))?;
                let vals = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(int).collect::<Result<Vec<_>, _>>()?
                };
                arrays[idx] = Some(vals);
            } else {
                return Err(syntax(format!("unknown input `{k}`")));
            }
        }
        let input = ConcreteInput {
            scalars: scalars
                .into_iter()
                .zip(&spec.scalars)
                .map(|(v, s)| v.ok_or_else(|| InputError::Missing(s.name.clone())))
                .collect::<Result<_, _>>()?,
            arrays: arrays
                .into_iter()
                .zip(&spec.arrays)
                .map(|(v, a)| v.ok_or_else(|| InputError::Missing(a.name.clone())))
                .collect::<Result<_, _>>()?,
        };
        input.conforms(spec)?;
        Ok(input)
    }
}

/// Uniform sample from every input domain.
pub fn random_input(spec: &InputSpec, seed: u64) -> ConcreteInput {
    random_input_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_input_with<R: Rng + ?Sized>(spec: &InputSpec, rng: &mut R) -> ConcreteInput {
    let flat: Vec<i64> = spec
        .flat_domains()
        .iter()
        .map(|d| rng.gen_range(d.lo..=d.hi))
        .collect();
    ConcreteInput::from_flat(spec, &flat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchRecord {
    pub stmt: StmtId,
    pub taken: bool,
}

/// The statements visited by one concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub input: ConcreteInput,
    pub stmts: Vec<StmtId>,
    pub branches: Vec<BranchRecord>,
    pub total_cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("step budget of {0} statements exhausted")]
    BudgetExceeded(u64),
    #[error("invalid input: {0}")]
    Input(#[from] InputError),
    #[error("statement {stmt}: index {index} out of bounds for length {len}")]
    IndexOutOfBounds {
        stmt: StmtId,
        index: i64,
        len: usize,
    },
    #[error("statement {stmt}: modulus by {divisor}")]
    BadModulus { stmt: StmtId, divisor: i64 },
    #[error("statement {stmt}: arithmetic overflow")]
    Overflow { stmt: StmtId },
    #[error("statement {stmt}: call stack deeper than {MAX_CALL_DEPTH}")]
    CallDepth { stmt: StmtId },
    #[error("statement {stmt}: malformed ({detail})")]
    Malformed { stmt: StmtId, detail: &'static str },
}

struct Machine<'p> {
    program: &'p Program,
    scalars: Vec<i64>,
    arrays: Vec<Vec<i64>>,
}

impl Machine<'_> {
    fn int(&self, e: &Expr, stmt: StmtId) -> Result<i64, ExecError> {
        Ok(match e {
            Expr::Int(v) => *v,
            Expr::Scalar(s) => self.scalars[*s],
            Expr::Read(a, idx) => {
                let i = self.int(idx, stmt)?;
                let arr = &self.arrays[*a];
                if i < 0 || i as usize >= arr.len() {
                    return Err(ExecError::IndexOutOfBounds {
                        stmt,
                        index: i,
                        len: arr.len(),
                    });
                }
                arr[i as usize]
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.int(a, stmt)?, self.int(b, stmt)?);
                let r = match op {
                    BinOp::Add => x.checked_add(y),
                    BinOp::Sub => x.checked_sub(y),
                    BinOp::Mul => x.checked_mul(y),
                    BinOp::Mod => {
                        if y <= 0 {
                            return Err(ExecError::BadModulus { stmt, divisor: y });
                        }
                        Some(x.rem_euclid(y))
                    }
                };
                r.ok_or(ExecError::Overflow { stmt })?
            }
            _ => {
                return Err(ExecError::Malformed {
                    stmt,
                    detail: "boolean where integer expected",
                })
            }
        })
    }

    fn boolean(&self, e: &Expr, stmt: StmtId) -> Result<bool, ExecError> {
        Ok(match e {
            Expr::Bool(b) => *b,
            Expr::Cmp(op, a, b) => op.eval(self.int(a, stmt)?, self.int(b, stmt)?),
            Expr::And(a, b) => self.boolean(a, stmt)? && self.boolean(b, stmt)?,
            Expr::Or(a, b) => self.boolean(a, stmt)? || self.boolean(b, stmt)?,
            Expr::Not(a) => !self.boolean(a, stmt)?,
            _ => {
                return Err(ExecError::Malformed {
                    stmt,
                    detail: "integer where boolean expected",
                })
            }
        })
    }
}

/// Initial scalar and array stores: inputs first, locals zeroed.
fn initial_store(program: &Program, input: &ConcreteInput) -> (Vec<i64>, Vec<Vec<i64>>) {
    let mut scalars = input.scalars.clone();
    scalars.resize(program.scalar_slots(), 0);
    let mut arrays = input.arrays.clone();
    for len in &program.array_lens()[arrays.len()..] {
        arrays.push(vec![0; *len]);
    }
    (scalars, arrays)
}

fn run(
    program: &Program,
    input: &ConcreteInput,
    step_budget: u64,
    record: bool,
) -> Result<Trace, ExecError> {
    input.conforms(&program.inputs)?;
    let (scalars, arrays) = initial_store(program, input);
    let mut m = Machine {
        program,
        scalars,
        arrays,
    };
    let mut stmts = Vec::new();
    let mut branches = Vec::new();
    let mut cost: i64 = 0;
    let mut stack: Vec<StmtId> = Vec::new();
    let mut pc = Program::ENTRY;
    let mut steps = 0u64;
    loop {
        if steps >= step_budget {
            return Err(ExecError::BudgetExceeded(step_budget));
        }
        steps += 1;
        let st = m.program.statements.get(pc).ok_or(ExecError::Malformed {
            stmt: pc,
            detail: "jump out of range",
        })?;
        if record {
            stmts.push(pc);
        }
        let next = |k: usize| {
            st.out.get(k).copied().ok_or(ExecError::Malformed {
                stmt: pc,
                detail: "missing successor",
            })
        };
        pc = match &st.kind {
            StmtKind::Assign { target, value } => {
                let v = m.int(value, pc)?;
                match target {
                    Place::Scalar(s) => m.scalars[*s] = v,
                    Place::Element(a, idx) => {
                        let i = m.int(idx, pc)?;
                        let len = m.arrays[*a].len();
                        if i < 0 || i as usize >= len {
                            return Err(ExecError::IndexOutOfBounds {
                                stmt: pc,
                                index: i,
                                len,
                            });
                        }
                        m.arrays[*a][i as usize] = v;
                    }
                }
                next(0)?
            }
            StmtKind::Branch { guard } => {
                let taken = m.boolean(guard, pc)?;
                if record {
                    branches.push(BranchRecord { stmt: pc, taken });
                }
                next(taken as usize)?
            }
            StmtKind::AddCost { amount } => {
                let c = m.int(amount, pc)?;
                cost = cost
                    .checked_add(c)
                    .ok_or(ExecError::Overflow { stmt: pc })?;
                next(0)?
            }
            StmtKind::Call { resume } => {
                if stack.len() >= MAX_CALL_DEPTH {
                    return Err(ExecError::CallDepth { stmt: pc });
                }
                stack.push(*resume);
                next(0)?
            }
            StmtKind::Return => match stack.pop() {
                Some(r) => r,
                None => break,
            },
            StmtKind::Halt => break,
        };
    }
    Ok(Trace {
        input: input.clone(),
        stmts,
        branches,
        total_cost: cost,
    })
}

/// Runs `program` on `input`, recording every visited statement.
pub fn run_concrete(
    program: &Program,
    input: &ConcreteInput,
    step_budget: u64,
) -> Result<Trace, ExecError> {
    run(program, input, step_budget, true)
}

/// Like [`run_concrete`] but only returns the total cost.
pub fn concrete_cost(
    program: &Program,
    input: &ConcreteInput,
    step_budget: u64,
) -> Result<i64, ExecError> {
    run(program, input, step_budget, false).map(|t| t.total_cost)
}
