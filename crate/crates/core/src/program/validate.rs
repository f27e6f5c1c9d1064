use std::fmt;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    NoStatements,
    BranchArity,
    Arity,
    SuccessorOutOfRange,
    DuplicateBranchTargets,
    AnnotationOnNonBranch,
    NoReachableExit,
    Unreachable,
    IllTyped,
    UnknownSlot,
    EmptyDomain,
    ZeroLengthArray,
}

impl IssueKind {
    pub fn label(self) -> &'static str {
        match self {
            IssueKind::NoStatements => "no statements",
            IssueKind::BranchArity => "branch arity",
            IssueKind::Arity => "arity",
            IssueKind::SuccessorOutOfRange => "successor out of range",
            IssueKind::DuplicateBranchTargets => "duplicate branch targets",
            IssueKind::AnnotationOnNonBranch => "annotation on non-branch",
            IssueKind::NoReachableExit => "no reachable exit",
            IssueKind::Unreachable => "unreachable",
            IssueKind::IllTyped => "ill-typed",
            IssueKind::UnknownSlot => "unknown slot",
            IssueKind::EmptyDomain => "empty domain",
            IssueKind::ZeroLengthArray => "zero-length array",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub stmt: Option<StmtId>,
    pub kind: IssueKind,
    pub severity: Severity,
    pub detail: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.stmt {
            Some(id) => write!(
                f,
                "{sev}: statement {id}: {}: {}",
                self.kind.label(),
                self.detail
            ),
            None => write!(f, "{sev}: {}: {}", self.kind.label(), self.detail),
        }
    }
}

/// Every violated structural rule, plus warnings for dead statements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// True when there are no errors (warnings allowed).
    pub fn is_ok(&self) -> bool {
        self.issues.iter().all(|i| i.severity == Severity::Warning)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }

    fn error(&mut self, stmt: Option<StmtId>, kind: IssueKind, detail: impl Into<String>) {
        self.issues.push(Issue {
            stmt,
            kind,
            severity: Severity::Error,
            detail: detail.into(),
        });
    }

    fn warn(&mut self, stmt: Option<StmtId>, kind: IssueKind, detail: impl Into<String>) {
        self.issues.push(Issue {
            stmt,
            kind,
            severity: Severity::Warning,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub fn validate(program: &Program) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = program.statements.len();
    if n == 0 {
        report.error(
            None,
            IssueKind::NoStatements,
            "program has no entry statement",
        );
        return report;
    }

    for s in &program.inputs.scalars {
        if s.domain.is_empty() {
            report.error(
                None,
                IssueKind::EmptyDomain,
                format!("input {} has domain {}", s.name, s.domain),
            );
        }
    }
    for a in &program.inputs.arrays {
        if a.domain.is_empty() {
            report.error(
                None,
                IssueKind::EmptyDomain,
                format!("input {} has domain {}", a.name, a.domain),
            );
        }
        if a.len == 0 {
            report.error(
                None,
                IssueKind::ZeroLengthArray,
                format!("input array {}", a.name),
            );
        }
    }
    for l in &program.locals {
        if l.len == Some(0) {
            report.error(
                None,
                IssueKind::ZeroLengthArray,
                format!("local array {}", l.name),
            );
        }
    }

    let scalars = program.scalar_slots();
    let arrays = program.array_lens().len();
    let check_refs = |e: &Expr, id: StmtId, report: &mut ValidationReport| {
        e.for_each_ref(&mut |r| match r {
            SlotRef::Scalar(s) if s >= scalars => {
                report.error(Some(id), IssueKind::UnknownSlot, format!("scalar slot {s}"))
            }
            SlotRef::Array(a) if a >= arrays => {
                report.error(Some(id), IssueKind::UnknownSlot, format!("array slot {a}"))
            }
            _ => {}
        });
    };

    for (id, st) in program.statements.iter().enumerate() {
        let expected = st.kind.expected_arity();
        if st.out.len() != expected {
            let kind = if matches!(st.kind, StmtKind::Branch { .. }) {
                IssueKind::BranchArity
            } else {
                IssueKind::Arity
            };
            report.error(
                Some(id),
                kind,
                format!(
                    "{} needs {expected} successor(s), has {}",
                    st.kind.name(),
                    st.out.len()
                ),
            );
        }
        for &o in &st.out {
            if o >= n {
                report.error(
                    Some(id),
                    IssueKind::SuccessorOutOfRange,
                    format!("successor {o}"),
                );
            }
        }
        if st.out.len() == 2 && st.out[0] == st.out[1] {
            report.error(
                Some(id),
                IssueKind::DuplicateBranchTargets,
                format!("both sides go to {}", st.out[0]),
            );
        }
        if st.always_sat && !matches!(st.kind, StmtKind::Branch { .. }) {
            report.error(Some(id), IssueKind::AnnotationOnNonBranch, st.kind.name());
        }
        match &st.kind {
            StmtKind::Branch { guard } => {
                if guard.type_of() != Some(ExprType::Bool) {
                    report.error(Some(id), IssueKind::IllTyped, "guard must be boolean");
                }
                check_refs(guard, id, &mut report);
            }
            StmtKind::AddCost { amount } => {
                if amount.type_of() != Some(ExprType::Int) {
                    report.error(Some(id), IssueKind::IllTyped, "cost must be an integer");
                }
                check_refs(amount, id, &mut report);
            }
            StmtKind::Assign { target, value } => {
                if value.type_of() != Some(ExprType::Int) {
                    report.error(
                        Some(id),
                        IssueKind::IllTyped,
                        "assigned value must be an integer",
                    );
                }
                check_refs(value, id, &mut report);
                match target {
                    Place::Scalar(s) if *s >= scalars => {
                        report.error(Some(id), IssueKind::UnknownSlot, format!("scalar slot {s}"))
                    }
                    Place::Scalar(_) => {}
                    Place::Element(a, idx) => {
                        if *a >= arrays {
                            report.error(
                                Some(id),
                                IssueKind::UnknownSlot,
                                format!("array slot {a}"),
                            );
                        }
                        if idx.type_of() != Some(ExprType::Int) {
                            report.error(Some(id), IssueKind::IllTyped, "index must be an integer");
                        }
                        check_refs(idx, id, &mut report);
                    }
                }
            }
            StmtKind::Call { resume } => {
                if *resume >= n {
                    report.error(
                        Some(id),
                        IssueKind::SuccessorOutOfRange,
                        format!("resume point {resume}"),
                    );
                }
            }
            StmtKind::Return | StmtKind::Halt => {}
        }
    }

    // structural errors make graph search meaningless past this point
    if !report.is_ok() {
        return report;
    }

    let reachable = program.reachable();
    let exit_reachable = program
        .statements
        .iter()
        .enumerate()
        .any(|(i, s)| reachable[i] && s.out.is_empty());
    if !exit_reachable {
        report.error(
            None,
            IssueKind::NoReachableExit,
            "no statement without successors is reachable from entry",
        );
    }
    for (id, seen) in reachable.iter().enumerate() {
        if !seen {
            report.warn(
                Some(id),
                IssueKind::Unreachable,
                format!(
                    "{} is unreachable from entry",
                    program.statements[id].kind.name()
                ),
            );
        }
    }
    report
}
