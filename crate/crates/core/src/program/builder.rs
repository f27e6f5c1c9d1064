//! Structured builder that lowers `if`/`while`/`for` into the flat statement
//! graph. Boolean `and`/`or`/`not` in guards are lowered with short-circuit
//! evaluation, so every emitted branch tests a single comparison.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use super::*;

/// Handle to a scalar slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarHandle(pub usize);

/// Handle to an array slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayHandle(pub usize);

impl ScalarHandle {
    pub fn get(self) -> Expr {
        Expr::Scalar(self.0)
    }
}

impl ArrayHandle {
    pub fn at(self, index: impl Into<Expr>) -> Expr {
        Expr::read(self.0, index.into())
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::Int(v)
    }
}

impl From<ScalarHandle> for Expr {
    fn from(s: ScalarHandle) -> Self {
        s.get()
    }
}

impl From<bool> for Expr {
    fn from(b: bool) -> Self {
        Expr::Bool(b)
    }
}

impl<T: Into<Expr>> Add<T> for Expr {
    type Output = Expr;
    fn add(self, rhs: T) -> Expr {
        Expr::bin(BinOp::Add, self, rhs.into())
    }
}

impl<T: Into<Expr>> Sub<T> for Expr {
    type Output = Expr;
    fn sub(self, rhs: T) -> Expr {
        Expr::bin(BinOp::Sub, self, rhs.into())
    }
}

impl<T: Into<Expr>> Mul<T> for Expr {
    type Output = Expr;
    fn mul(self, rhs: T) -> Expr {
        Expr::bin(BinOp::Mul, self, rhs.into())
    }
}

impl<T: Into<Expr>> Add<T> for ScalarHandle {
    type Output = Expr;
    fn add(self, rhs: T) -> Expr {
        self.get() + rhs
    }
}

impl<T: Into<Expr>> Sub<T> for ScalarHandle {
    type Output = Expr;
    fn sub(self, rhs: T) -> Expr {
        self.get() - rhs
    }
}

impl<T: Into<Expr>> Mul<T> for ScalarHandle {
    type Output = Expr;
    fn mul(self, rhs: T) -> Expr {
        self.get() * rhs
    }
}

impl Expr {
    pub fn lt(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Lt, self, rhs.into())
    }
    pub fn le(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Le, self, rhs.into())
    }
    pub fn gt(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Gt, self, rhs.into())
    }
    pub fn ge(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Ge, self, rhs.into())
    }
    pub fn equals(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Eq, self, rhs.into())
    }
    pub fn differs(self, rhs: impl Into<Expr>) -> Expr {
        Expr::cmp(CmpOp::Ne, self, rhs.into())
    }
    pub fn modulo(self, rhs: impl Into<Expr>) -> Expr {
        Expr::bin(BinOp::Mod, self, rhs.into())
    }
    pub fn and_also(self, rhs: Expr) -> Expr {
        Expr::and(self, rhs)
    }
    pub fn or_else(self, rhs: Expr) -> Expr {
        Expr::or(self, rhs)
    }
    pub fn negate(self) -> Expr {
        Expr::not(self)
    }
    /// Marks every branch emitted for this guard as always satisfiable.
    pub fn always_sat(self) -> Guard {
        Guard {
            expr: self,
            always_sat: true,
        }
    }
}

/// A branch guard plus its annotation.
#[derive(Debug, Clone)]
pub struct Guard {
    pub expr: Expr,
    pub always_sat: bool,
}

impl From<Expr> for Guard {
    fn from(expr: Expr) -> Self {
        Guard {
            expr,
            always_sat: false,
        }
    }
}

/// Dangling edge: successor slot `slot` of statement `stmt`.
type Exit = (StmtId, usize);

/// Alias for builder closures.
pub type Block<'a> = &'a mut ProgramBuilder;

pub struct ProgramBuilder {
    name: String,
    scale_params: BTreeMap<String, i64>,
    inputs: InputSpec,
    locals: Vec<LocalDecl>,
    statements: Vec<Statement>,
    pending: Vec<Exit>,
    scalar_count: usize,
    array_count: usize,
    locals_started: bool,
}

const UNPATCHED: StmtId = usize::MAX;

impl ProgramBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            scale_params: BTreeMap::new(),
            inputs: InputSpec::default(),
            locals: Vec::new(),
            statements: Vec::new(),
            pending: Vec::new(),
            scalar_count: 0,
            array_count: 0,
            locals_started: false,
        }
    }

    pub fn param(&mut self, name: &str, value: i64) -> i64 {
        self.scale_params.insert(name.to_string(), value);
        value
    }

    pub fn input_scalar(&mut self, name: &str, lo: i64, hi: i64) -> ScalarHandle {
        assert!(!self.locals_started, "declare inputs before locals");
        self.inputs.scalars.push(ScalarInput {
            name: name.into(),
            domain: Interval::new(lo, hi),
        });
        self.scalar_count += 1;
        ScalarHandle(self.scalar_count - 1)
    }

    pub fn input_array(&mut self, name: &str, len: usize, lo: i64, hi: i64) -> ArrayHandle {
        assert!(!self.locals_started, "declare inputs before locals");
        self.inputs.arrays.push(ArrayInput {
            name: name.into(),
            len,
            domain: Interval::new(lo, hi),
        });
        self.array_count += 1;
        ArrayHandle(self.array_count - 1)
    }

    pub fn local(&mut self, name: &str) -> ScalarHandle {
        self.locals_started = true;
        self.locals.push(LocalDecl {
            name: name.into(),
            len: None,
        });
        self.scalar_count += 1;
        ScalarHandle(self.scalar_count - 1)
    }

    pub fn local_array(&mut self, name: &str, len: usize) -> ArrayHandle {
        self.locals_started = true;
        self.locals.push(LocalDecl {
            name: name.into(),
            len: Some(len),
        });
        self.array_count += 1;
        ArrayHandle(self.array_count - 1)
    }

    fn emit(&mut self, kind: StmtKind, arity: usize, always_sat: bool) -> StmtId {
        let id = self.statements.len();
        for (s, slot) in self.pending.drain(..) {
            self.statements[s].out[slot] = id;
        }
        self.statements.push(Statement {
            kind,
            out: vec![UNPATCHED; arity],
            always_sat,
        });
        id
    }

    fn emit_simple(&mut self, kind: StmtKind) {
        let id = self.emit(kind, 1, false);
        self.pending.push((id, 0));
    }

    pub fn assign(&mut self, target: ScalarHandle, value: impl Into<Expr>) {
        self.emit_simple(StmtKind::Assign {
            target: Place::Scalar(target.0),
            value: value.into(),
        });
    }

    pub fn store(&mut self, array: ArrayHandle, index: impl Into<Expr>, value: impl Into<Expr>) {
        self.emit_simple(StmtKind::Assign {
            target: Place::Element(array.0, index.into()),
            value: value.into(),
        });
    }

    pub fn add_cost(&mut self, amount: impl Into<Expr>) {
        self.emit_simple(StmtKind::AddCost {
            amount: amount.into(),
        });
    }

    /// Lowers a guard; returns `(true_exits, false_exits)`.
    fn lower_guard(&mut self, expr: Expr, always_sat: bool) -> (Vec<Exit>, Vec<Exit>) {
        match expr {
            Expr::And(a, b) => {
                let (ta, fa) = self.lower_guard(*a, always_sat);
                self.pending = ta;
                let (tb, mut fb) = self.lower_guard(*b, always_sat);
                fb.extend(fa);
                (tb, fb)
            }
            Expr::Or(a, b) => {
                let (ta, fa) = self.lower_guard(*a, always_sat);
                self.pending = fa;
                let (mut tb, fb) = self.lower_guard(*b, always_sat);
                tb.extend(ta);
                (tb, fb)
            }
            Expr::Not(a) => {
                let (t, f) = self.lower_guard(*a, always_sat);
                (f, t)
            }
            guard => {
                let id = self.emit(StmtKind::Branch { guard }, 2, always_sat);
                (vec![(id, 1)], vec![(id, 0)])
            }
        }
    }

    pub fn if_(&mut self, guard: impl Into<Guard>, then: impl FnOnce(&mut Self)) {
        self.if_else(guard, then, |_| {});
    }

    pub fn if_else(
        &mut self,
        guard: impl Into<Guard>,
        then: impl FnOnce(&mut Self),
        otherwise: impl FnOnce(&mut Self),
    ) {
        let g = guard.into();
        let (t, f) = self.lower_guard(g.expr, g.always_sat);
        self.pending = t;
        then(self);
        let after_then = std::mem::take(&mut self.pending);
        self.pending = f;
        otherwise(self);
        self.pending.extend(after_then);
    }

    pub fn while_(&mut self, guard: impl Into<Guard>, body: impl FnOnce(&mut Self)) {
        let g = guard.into();
        let head = self.statements.len();
        let (t, f) = self.lower_guard(g.expr, g.always_sat);
        assert!(
            self.statements.len() > head,
            "loop guard must emit a branch"
        );
        self.pending = t;
        body(self);
        for (s, slot) in self.pending.drain(..) {
            self.statements[s].out[slot] = head;
        }
        self.pending = f;
    }

    /// `var = from; while var < to { body; var = var + 1 }`
    pub fn for_range(
        &mut self,
        var: ScalarHandle,
        from: impl Into<Expr>,
        to: impl Into<Expr>,
        body: impl FnOnce(&mut Self),
    ) {
        self.assign(var, from);
        let to = to.into();
        self.while_(var.get().lt(to), |b| {
            body(b);
            b.assign(var, var + 1);
        });
    }

    /// Terminates the current control-flow path.
    pub fn halt(&mut self) {
        self.emit(StmtKind::Halt, 0, false);
    }

    pub fn build(mut self) -> Program {
        if !self.pending.is_empty() || self.statements.is_empty() {
            self.halt();
        }
        debug_assert!(self
            .statements
            .iter()
            .all(|s| s.out.iter().all(|&o| o != UNPATCHED)));
        Program {
            name: self.name,
            scale_params: self.scale_params,
            inputs: self.inputs,
            locals: self.locals,
            statements: self.statements,
        }
    }
}

impl Program {
    /// Copy of the program with every always-satisfiable marker removed.
    pub fn without_annotations(&self) -> Program {
        let mut p = self.clone();
        for s in &mut p.statements {
            s.always_sat = false;
        }
        p
    }

    /// Ids of branches carrying the always-satisfiable marker.
    pub fn annotated_branches(&self) -> Vec<StmtId> {
        self.statements
            .iter()
            .enumerate()
            .filter(|(_, s)| s.always_sat)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_circuit_and_emits_two_branches() {
        let mut b = ProgramBuilder::new("sc");
        let a = b.input_array("A", 3, 0, 9);
        let j = b.local("j");
        b.assign(j, 2);
        b.while_(j.get().ge(0).and_also(a.at(j).gt(4)), |b| {
            b.add_cost(1);
            b.assign(j, j - 1);
        });
        let p = b.build();
        let branches: Vec<_> = p
            .statements
            .iter()
            .filter(|s| matches!(s.kind, StmtKind::Branch { .. }))
            .collect();
        assert_eq!(branches.len(), 2);
        // false side of the first test jumps straight to the loop exit,
        // which is the same as the false side of the second test
        assert_eq!(branches[0].out[0], branches[1].out[0]);
        assert!(validate(&p).is_ok());
    }

    #[test]
    fn loop_back_edge_targets_head() {
        let mut b = ProgramBuilder::new("loop");
        let i = b.local("i");
        b.for_range(i, 0, 4, |b| b.add_cost(1));
        let p = b.build();
        // statement 1 is the loop head
        assert!(matches!(p.statements[1].kind, StmtKind::Branch { .. }));
        let incr = p.statements.len() - 2;
        assert_eq!(p.statements[incr].out, vec![1]);
    }

    #[test]
    fn empty_program_is_a_single_halt() {
        let p = ProgramBuilder::new("empty").build();
        assert_eq!(p.statements.len(), 1);
        assert!(matches!(p.statements[0].kind, StmtKind::Halt));
    }

    #[test]
    fn annotation_flag_propagates_to_all_atoms() {
        let mut b = ProgramBuilder::new("ann");
        let x = b.input_scalar("x", 0, 9);
        b.if_(x.get().gt(1).and_also(x.get().lt(5)).always_sat(), |b| {
            b.add_cost(1)
        });
        let p = b.build();
        assert_eq!(p.annotated_branches().len(), 2);
        assert!(p.without_annotations().annotated_branches().is_empty());
    }
}
