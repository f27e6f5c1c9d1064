//! Line-oriented program text format.
//!
//! ```text
//! program quicksort
//! param N = 4
//! input A[N] in [1, N]
//! local i
//! local left[N]
//! 0 branch (<= 4 1) -> 1,5 @always_sat
//! 1 assign i (+ i 1) -> 2
//! 2 assign (at left i) (at A 0) -> 3
//! 3 add_cost 4 -> 4
//! 4 halt ->
//! ```
//!
//! Header lines declare scale parameters, inputs and locals; statement lines
//! are `id kind expr -> succ[,succ] [@always_sat]` with ids numbered from 0
//! in file order. Expressions are s-expressions. Parameter names are
//! replaced by their values while parsing. `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

pub(super) fn write_program(p: &Program) -> String {
    let scalar_names = p.scalar_names();
    let array_names = p.array_names();
    let mut out = String::new();
    let _ = writeln!(out, "program {}", p.name);
    for (k, v) in &p.scale_params {
        let _ = writeln!(out, "param {k} = {v}");
    }
    for s in &p.inputs.scalars {
        let _ = writeln!(
            out,
            "input {} in [{}, {}]",
            s.name, s.domain.lo, s.domain.hi
        );
    }
    for a in &p.inputs.arrays {
        let _ = writeln!(
            out,
            "input {}[{}] in [{}, {}]",
            a.name, a.len, a.domain.lo, a.domain.hi
        );
    }
    for l in &p.locals {
        match l.len {
            None => {
                let _ = writeln!(out, "local {}", l.name);
            }
            Some(n) => {
                let _ = writeln!(out, "local {}[{}]", l.name, n);
            }
        }
    }
    for (id, st) in p.statements.iter().enumerate() {
        let _ = write!(out, "{id} {}", st.kind.name());
        match &st.kind {
            StmtKind::Assign { target, value } => {
                out.push(' ');
                match target {
                    Place::Scalar(s) => out.push_str(scalar_names[*s]),
                    Place::Element(a, idx) => {
                        let _ = write!(out, "(at {} ", array_names[*a]);
                        write_expr(&mut out, idx, &scalar_names, &array_names);
                        out.push(')');
                    }
                }
                out.push(' ');
                write_expr(&mut out, value, &scalar_names, &array_names);
            }
            StmtKind::Branch { guard } => {
                out.push(' ');
                write_expr(&mut out, guard, &scalar_names, &array_names);
            }
            StmtKind::AddCost { amount } => {
                out.push(' ');
                write_expr(&mut out, amount, &scalar_names, &array_names);
            }
            StmtKind::Call { resume } => {
                let _ = write!(out, " {resume}");
            }
            StmtKind::Return | StmtKind::Halt => {}
        }
        out.push_str(" ->");
        if !st.out.is_empty() {
            out.push(' ');
            let succ: Vec<String> = st.out.iter().map(|s| s.to_string()).collect();
            out.push_str(&succ.join(","));
        }
        if st.always_sat {
            out.push_str(" @always_sat");
        }
        out.push('\n');
    }
    out
}

fn write_expr(out: &mut String, e: &Expr, scalars: &[&str], arrays: &[&str]) {
    match e {
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Scalar(s) => out.push_str(scalars.get(*s).copied().unwrap_or("?")),
        Expr::Read(a, idx) => {
            let _ = write!(out, "(at {} ", arrays.get(*a).copied().unwrap_or("?"));
            write_expr(out, idx, scalars, arrays);
            out.push(')');
        }
        Expr::Bin(op, a, b) => write_call(out, op.symbol(), &[a, b], scalars, arrays),
        Expr::Cmp(op, a, b) => write_call(out, op.symbol(), &[a, b], scalars, arrays),
        Expr::And(a, b) => write_call(out, "and", &[a, b], scalars, arrays),
        Expr::Or(a, b) => write_call(out, "or", &[a, b], scalars, arrays),
        Expr::Not(a) => write_call(out, "not", &[a], scalars, arrays),
    }
}

fn write_call(out: &mut String, head: &str, args: &[&Expr], scalars: &[&str], arrays: &[&str]) {
    out.push('(');
    out.push_str(head);
    for a in args {
        out.push(' ');
        write_expr(out, a, scalars, arrays);
    }
    out.push(')');
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Arrow,
    Comma,
    Atom(String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, toks: &mut Vec<Tok>| {
        if !cur.is_empty() {
            toks.push(Tok::Atom(std::mem::take(cur)));
        }
    };
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' | ',' => {
                flush(&mut cur, &mut toks);
                toks.push(match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    _ => Tok::Comma,
                });
            }
            '-' if cur.is_empty() && chars.peek() == Some(&'>') => {
                chars.next();
                toks.push(Tok::Arrow);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut toks),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut toks);
    toks
}

#[derive(Clone, Copy)]
enum Name {
    Param(i64),
    Scalar(usize),
    Array(usize),
}

struct Names {
    map: HashMap<String, Name>,
}

impl Names {
    fn resolve_int(&self, tok: &str, line: usize) -> Result<i64, ParseError> {
        if let Ok(v) = tok.parse::<i64>() {
            return Ok(v);
        }
        match self.map.get(tok) {
            Some(Name::Param(v)) => Ok(*v),
            _ => err(
                line,
                format!("expected integer or parameter, found `{tok}`"),
            ),
        }
    }
}

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    names: &'a Names,
    line: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match t {
            Some(t) => Ok(t),
            None => err(self.line, "unexpected end of line"),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            Tok::Close => Ok(()),
            t => err(self.line, format!("expected `)`, found {t:?}")),
        }
    }

    fn atom_expr(&self, a: &str) -> Result<Expr, ParseError> {
        if let Ok(v) = a.parse::<i64>() {
            return Ok(Expr::Int(v));
        }
        match a {
            "true" => return Ok(Expr::Bool(true)),
            "false" => return Ok(Expr::Bool(false)),
            _ => {}
        }
        match self.names.map.get(a) {
            Some(Name::Param(v)) => Ok(Expr::Int(*v)),
            Some(Name::Scalar(s)) => Ok(Expr::Scalar(*s)),
            Some(Name::Array(_)) => err(self.line, format!("array `{a}` used as a scalar")),
            None => err(self.line, format!("unknown name `{a}`")),
        }
    }

    fn array(&mut self) -> Result<usize, ParseError> {
        match self.next()? {
            Tok::Atom(a) => match self.names.map.get(&a) {
                Some(Name::Array(i)) => Ok(*i),
                _ => err(self.line, format!("`{a}` is not an array")),
            },
            t => err(self.line, format!("expected array name, found {t:?}")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.next()? {
            Tok::Atom(a) => self.atom_expr(&a),
            Tok::Open => {
                let head = match self.next()? {
                    Tok::Atom(h) => h,
                    t => return err(self.line, format!("expected operator, found {t:?}")),
                };
                let e = match head.as_str() {
                    "at" => {
                        let arr = self.array()?;
                        Expr::read(arr, self.expr()?)
                    }
                    "not" => Expr::not(self.expr()?),
                    op => {
                        let a = self.expr()?;
                        let b = self.expr()?;
                        match op {
                            "+" => Expr::bin(BinOp::Add, a, b),
                            "-" => Expr::bin(BinOp::Sub, a, b),
                            "*" => Expr::bin(BinOp::Mul, a, b),
                            "mod" => Expr::bin(BinOp::Mod, a, b),
                            "<" => Expr::cmp(CmpOp::Lt, a, b),
                            "<=" => Expr::cmp(CmpOp::Le, a, b),
                            "=" => Expr::cmp(CmpOp::Eq, a, b),
                            "!=" => Expr::cmp(CmpOp::Ne, a, b),
                            ">" => Expr::cmp(CmpOp::Gt, a, b),
                            ">=" => Expr::cmp(CmpOp::Ge, a, b),
                            "and" => Expr::and(a, b),
                            "or" => Expr::or(a, b),
                            other => return err(self.line, format!("unknown operator `{other}`")),
                        }
                    }
                };
                self.expect_close()?;
                Ok(e)
            }
            t => err(self.line, format!("unexpected token {t:?}")),
        }
    }

    fn place(&mut self) -> Result<Place, ParseError> {
        match self.next()? {
            Tok::Atom(a) => match self.names.map.get(&a) {
                Some(Name::Scalar(s)) => Ok(Place::Scalar(*s)),
                _ => err(self.line, format!("`{a}` is not an assignable scalar")),
            },
            Tok::Open => {
                match self.next()? {
                    Tok::Atom(h) if h == "at" => {}
                    t => return err(self.line, format!("expected `at`, found {t:?}")),
                }
                let arr = self.array()?;
                let idx = self.expr()?;
                self.expect_close()?;
                Ok(Place::Element(arr, idx))
            }
            t => err(
                self.line,
                format!("expected assignment target, found {t:?}"),
            ),
        }
    }
}

/// `NAME[len]` → (NAME, Some(len token)); `NAME` → (NAME, None).
fn split_indexed(tok: &str) -> (&str, Option<&str>) {
    match (tok.find('['), tok.strip_suffix(']')) {
        (Some(i), Some(_)) => (&tok[..i], Some(&tok[i + 1..tok.len() - 1])),
        _ => (tok, None),
    }
}

fn parse_interval(rest: &str, names: &Names, line: usize) -> Result<Interval, ParseError> {
    let rest = rest.trim();
    let inner = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| ParseError {
            line,
            message: format!("expected `[lo, hi]`, found `{rest}`"),
        })?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return err(line, "interval needs two bounds");
    }
    Ok(Interval::new(
        names.resolve_int(parts[0], line)?,
        names.resolve_int(parts[1], line)?,
    ))
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut name = None;
    let mut scale_params = BTreeMap::new();
    let mut inputs = InputSpec::default();
    let mut locals = Vec::new();
    let mut names = Names {
        map: HashMap::new(),
    };
    let mut statements = Vec::new();
    // deferred until all declarations are known
    let mut stmt_lines: Vec<(usize, &str)> = Vec::new();

    let declare = |names: &mut Names, n: &str, v: Name, line: usize| -> Result<(), ParseError> {
        if names.map.insert(n.to_string(), v).is_some() {
            return err(line, format!("duplicate name `{n}`"));
        }
        Ok(())
    };
    let mut scalar_inputs = 0usize;
    let mut array_inputs = 0usize;
    let mut local_scalars: Vec<String> = Vec::new();
    let mut local_arrays: Vec<String> = Vec::new();

    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "program" => name = Some(rest.to_string()),
            "param" => {
                let (k, v) = rest.split_once('=').ok_or_else(|| ParseError {
                    line: line_no,
                    message: "expected `param NAME = VALUE`".into(),
                })?;
                let k = k.trim();
                let v: i64 = v.trim().parse().map_err(|_| ParseError {
                    line: line_no,
                    message: format!("bad parameter value `{}`", v.trim()),
                })?;
                declare(&mut names, k, Name::Param(v), line_no)?;
                scale_params.insert(k.to_string(), v);
            }
            "input" => {
                if !local_scalars.is_empty() || !local_arrays.is_empty() {
                    return err(line_no, "inputs must be declared before locals");
                }
                let (decl, interval) = rest.split_once(" in ").ok_or_else(|| ParseError {
                    line: line_no,
                    message: "expected `input NAME in [lo, hi]`".into(),
                })?;
                let domain = parse_interval(interval, &names, line_no)?;
                match split_indexed(decl.trim()) {
                    (n, None) => {
                        declare(&mut names, n, Name::Scalar(scalar_inputs), line_no)?;
                        scalar_inputs += 1;
                        inputs.scalars.push(ScalarInput {
                            name: n.to_string(),
                            domain,
                        });
                    }
                    (n, Some(len)) => {
                        let len = names.resolve_int(len, line_no)?;
                        if len < 0 {
                            return err(line_no, "negative array length");
                        }
                        declare(&mut names, n, Name::Array(array_inputs), line_no)?;
                        array_inputs += 1;
                        inputs.arrays.push(ArrayInput {
                            name: n.to_string(),
                            len: len as usize,
                            domain,
                        });
                    }
                }
            }
            "local" => match split_indexed(rest) {
                (n, None) => {
                    local_scalars.push(n.to_string());
                    locals.push(LocalDecl {
                        name: n.to_string(),
                        len: None,
                    });
                }
                (n, Some(len)) => {
                    let len = names.resolve_int(len, line_no)?;
                    if len < 0 {
                        return err(line_no, "negative array length");
                    }
                    local_arrays.push(n.to_string());
                    locals.push(LocalDecl {
                        name: n.to_string(),
                        len: Some(len as usize),
                    });
                }
            },
            h if h.chars().all(|c| c.is_ascii_digit()) => stmt_lines.push((line_no, line)),
            other => return err(line_no, format!("unknown directive `{other}`")),
        }
    }

    for (k, n) in local_scalars.iter().enumerate() {
        declare(&mut names, n, Name::Scalar(scalar_inputs + k), 0)?;
    }
    for (k, n) in local_arrays.iter().enumerate() {
        declare(&mut names, n, Name::Array(array_inputs + k), 0)?;
    }

    for (line_no, line) in stmt_lines {
        let toks = tokenize(line);
        let id: usize = match toks.first() {
            Some(Tok::Atom(a)) => a.parse().map_err(|_| ParseError {
                line: line_no,
                message: "bad id".into(),
            })?,
            _ => return err(line_no, "missing statement id"),
        };
        if id != statements.len() {
            return err(
                line_no,
                format!(
                    "statement id {id} out of order, expected {}",
                    statements.len()
                ),
            );
        }
        let kind_tok = match toks.get(1) {
            Some(Tok::Atom(k)) => k.clone(),
            _ => return err(line_no, "missing statement kind"),
        };
        let mut p = ExprParser {
            toks: &toks,
            pos: 2,
            names: &names,
            line: line_no,
        };
        let kind = match kind_tok.as_str() {
            "assign" => {
                let target = p.place()?;
                let value = p.expr()?;
                StmtKind::Assign { target, value }
            }
            "branch" => StmtKind::Branch { guard: p.expr()? },
            "add_cost" => StmtKind::AddCost { amount: p.expr()? },
            "call" => match p.next()? {
                Tok::Atom(a) => StmtKind::Call {
                    resume: a.parse().map_err(|_| ParseError {
                        line: line_no,
                        message: "bad resume id".into(),
                    })?,
                },
                t => return err(line_no, format!("expected resume id, found {t:?}")),
            },
            "return" => StmtKind::Return,
            "halt" => StmtKind::Halt,
            other => return err(line_no, format!("unknown statement kind `{other}`")),
        };
        if p.next()? != Tok::Arrow {
            return err(line_no, "expected `->`");
        }
        let mut out = Vec::new();
        let mut always_sat = false;
        let mut expect_succ = true;
        while let Some(t) = p.peek().cloned() {
            p.pos += 1;
            match t {
                Tok::Atom(a) if a == "@always_sat" => always_sat = true,
                Tok::Atom(a) if expect_succ => {
                    out.push(a.parse().map_err(|_| ParseError {
                        line: line_no,
                        message: format!("bad successor `{a}`"),
                    })?);
                    expect_succ = false;
                }
                Tok::Comma if !expect_succ => expect_succ = true,
                t => return err(line_no, format!("unexpected token {t:?} in successor list")),
            }
        }
        statements.push(Statement {
            kind,
            out,
            always_sat,
        });
    }

    Ok(Program {
        name: name.ok_or(ParseError {
            line: 0,
            message: "missing `program` line".into(),
        })?,
        scale_params,
        inputs,
        locals,
        statements,
    })
}
