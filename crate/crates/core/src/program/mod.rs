//! Analyzable program representation.
//!
//! A [`Program`] is a flat statement graph in which every statement has zero,
//! one or two successors. Statement `0` is always the entry point. Branch
//! statements list their false-successor first and their true-successor
//! second, so a path-string bit of `1` selects `out[1]`.
//!
//! Values are integers. Inputs are bounded integer scalars and fixed-length
//! integer arrays; locals start at zero. Scale parameters (such as `N`) are
//! substituted as literals when the program is built or parsed.

mod builder;
mod text;
mod validate;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

pub use builder::{ArrayHandle, Block, ProgramBuilder, ScalarHandle};
pub use text::{parse_program, ParseError};
pub use validate::{validate, Issue, IssueKind, Severity, ValidationReport};

/// Index of a statement inside [`Program::statements`].
pub type StmtId = usize;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Number of values, saturating.
    pub fn size(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1).min(u64::MAX as i128) as u64
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarInput {
    pub name: String,
    pub domain: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayInput {
    pub name: String,
    pub len: usize,
    pub domain: Interval,
}

/// Declared inputs. Input scalars occupy the first scalar slots of a program
/// and input arrays the first array slots, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputSpec {
    pub scalars: Vec<ScalarInput>,
    pub arrays: Vec<ArrayInput>,
}

impl InputSpec {
    /// Total number of scalar input values once arrays are flattened.
    pub fn flat_len(&self) -> usize {
        self.scalars.len() + self.arrays.iter().map(|a| a.len).sum::<usize>()
    }

    /// Domains of the flattened inputs: scalars first, then array elements.
    pub fn flat_domains(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.flat_len());
        out.extend(self.scalars.iter().map(|s| s.domain));
        for a in &self.arrays {
            out.extend(std::iter::repeat_n(a.domain, a.len));
        }
        out
    }

    /// Human-readable names of the flattened inputs (`A[3]` for elements).
    pub fn flat_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.flat_len());
        out.extend(self.scalars.iter().map(|s| s.name.clone()));
        for a in &self.arrays {
            out.extend((0..a.len).map(|i| format!("{}[{}]", a.name, i)));
        }
        out
    }

    /// Offset of the first element of input array `idx` in the flat layout.
    pub fn array_offset(&self, idx: usize) -> usize {
        self.scalars.len() + self.arrays[..idx].iter().map(|a| a.len).sum::<usize>()
    }
}

/// A non-input scalar or array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    /// `None` for scalars, `Some(len)` for arrays.
    pub len: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Euclidean remainder; the divisor must be a positive constant at run time.
    Mod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
        }
    }
}

/// Expression tree. Integer-valued: `Int`, `Scalar`, `Read`, `Bin`.
/// Boolean-valued: `Bool`, `Cmp`, `And`, `Or`, `Not`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    /// Scalar slot (inputs first, then locals).
    Scalar(usize),
    /// Array slot read at an index.
    Read(usize, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Int,
    Bool,
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Int(v)
    }
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }
    pub fn read(array: usize, index: Expr) -> Self {
        Expr::Read(array, Box::new(index))
    }
    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        Expr::Not(Box::new(a))
    }

    /// Static type, or `None` when operands are ill-typed.
    pub fn type_of(&self) -> Option<ExprType> {
        match self {
            Expr::Int(_) | Expr::Scalar(_) => Some(ExprType::Int),
            Expr::Bool(_) => Some(ExprType::Bool),
            Expr::Read(_, idx) => (idx.type_of()? == ExprType::Int).then_some(ExprType::Int),
            Expr::Bin(_, a, b) => (a.type_of()? == ExprType::Int && b.type_of()? == ExprType::Int)
                .then_some(ExprType::Int),
            Expr::Cmp(_, a, b) => (a.type_of()? == ExprType::Int && b.type_of()? == ExprType::Int)
                .then_some(ExprType::Bool),
            Expr::And(a, b) | Expr::Or(a, b) => (a.type_of()? == ExprType::Bool
                && b.type_of()? == ExprType::Bool)
                .then_some(ExprType::Bool),
            Expr::Not(a) => (a.type_of()? == ExprType::Bool).then_some(ExprType::Bool),
        }
    }

    /// Visits every scalar and array slot referenced by the expression.
    pub fn for_each_ref(&self, f: &mut impl FnMut(SlotRef)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Scalar(s) => f(SlotRef::Scalar(*s)),
            Expr::Read(a, idx) => {
                f(SlotRef::Array(*a));
                idx.for_each_ref(f);
            }
            Expr::Bin(_, a, b) | Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.for_each_ref(f);
                b.for_each_ref(f);
            }
            Expr::Not(a) => a.for_each_ref(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRef {
    Scalar(usize),
    Array(usize),
}

/// Assignment target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    Scalar(usize),
    Element(usize, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Assign {
        target: Place,
        value: Expr,
    },
    Branch {
        guard: Expr,
    },
    AddCost {
        amount: Expr,
    },
    /// Jumps to `out[0]` and pushes `resume` on the call stack.
    Call {
        resume: StmtId,
    },
    /// Pops the call stack and continues at the popped statement; with an
    /// empty call stack the program terminates.
    Return,
    Halt,
}

impl StmtKind {
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::Assign { .. } => "assign",
            StmtKind::Branch { .. } => "branch",
            StmtKind::AddCost { .. } => "add_cost",
            StmtKind::Call { .. } => "call",
            StmtKind::Return => "return",
            StmtKind::Halt => "halt",
        }
    }

    /// Number of successors a well-formed statement of this kind declares.
    pub fn expected_arity(&self) -> usize {
        match self {
            StmtKind::Branch { .. } => 2,
            StmtKind::Halt | StmtKind::Return => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub kind: StmtKind,
    pub out: Vec<StmtId>,
    /// Both sides of this branch are satisfiable from every reachable state.
    pub always_sat: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub scale_params: BTreeMap<String, i64>,
    pub inputs: InputSpec,
    pub locals: Vec<LocalDecl>,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("statement {0} not found")]
pub struct NotFound(pub StmtId);

impl Program {
    pub const ENTRY: StmtId = 0;

    pub fn entry(&self) -> StmtId {
        Self::ENTRY
    }

    /// Successors in declared order; for branches `[false_succ, true_succ]`.
    pub fn successors(&self, id: StmtId) -> Result<&[StmtId], NotFound> {
        self.statements
            .get(id)
            .map(|s| s.out.as_slice())
            .ok_or(NotFound(id))
    }

    pub fn statement(&self, id: StmtId) -> Option<&Statement> {
        self.statements.get(id)
    }

    /// Number of scalar slots (input scalars followed by local scalars).
    pub fn scalar_slots(&self) -> usize {
        self.inputs.scalars.len() + self.locals.iter().filter(|l| l.len.is_none()).count()
    }

    /// Lengths of all array slots (input arrays followed by local arrays).
    pub fn array_lens(&self) -> Vec<usize> {
        self.inputs
            .arrays
            .iter()
            .map(|a| a.len)
            .chain(self.locals.iter().filter_map(|l| l.len))
            .collect()
    }

    pub fn scalar_names(&self) -> Vec<&str> {
        self.inputs
            .scalars
            .iter()
            .map(|s| s.name.as_str())
            .chain(
                self.locals
                    .iter()
                    .filter(|l| l.len.is_none())
                    .map(|l| l.name.as_str()),
            )
            .collect()
    }

    pub fn array_names(&self) -> Vec<&str> {
        self.inputs
            .arrays
            .iter()
            .map(|a| a.name.as_str())
            .chain(
                self.locals
                    .iter()
                    .filter(|l| l.len.is_some())
                    .map(|l| l.name.as_str()),
            )
            .collect()
    }

    /// Statements reachable from the entry, following call targets and
    /// resume points.
    pub fn reachable(&self) -> Vec<bool> {
        let n = self.statements.len();
        let mut seen = vec![false; n];
        if n == 0 {
            return seen;
        }
        let mut queue = VecDeque::from([Self::ENTRY]);
        seen[Self::ENTRY] = true;
        while let Some(id) = queue.pop_front() {
            let st = &self.statements[id];
            let extra = match st.kind {
                StmtKind::Call { resume } => Some(resume),
                _ => None,
            };
            for &next in st.out.iter().chain(extra.iter()) {
                if next < n && !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        text::write_program(self)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
