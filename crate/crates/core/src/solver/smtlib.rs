//! SMT-LIB v2 (QF_LIA) export.

use std::fmt::Write as _;

use super::{Atom, Formula, LinExpr, Rel};
use crate::program::Interval;

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.$".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

fn numeral(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

fn term(names: &[String], e: &LinExpr) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(e.terms.len() + 1);
    for (a, c) in &e.terms {
        let atom = match a {
            Atom::Var(v) => symbol(&names[*v]),
            Atom::Mod(inner, m) => format!("(mod {} {})", term(names, inner), m),
        };
        parts.push(if *c == 1 {
            atom
        } else {
            format!("(* {} {})", numeral(*c), atom)
        });
    }
    if e.constant != 0 || parts.is_empty() {
        parts.push(numeral(e.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap_or_default()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn formula(names: &[String], f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Atom(c) => {
            let e = term(names, &c.expr);
            match c.rel {
                Rel::Le => format!("(<= {e} 0)"),
                Rel::Eq => format!("(= {e} 0)"),
                Rel::Ne => format!("(not (= {e} 0))"),
            }
        }
        Formula::And(xs) if xs.is_empty() => "true".into(),
        Formula::Or(xs) if xs.is_empty() => "false".into(),
        Formula::And(xs) => {
            format!(
                "(and {})",
                xs.iter()
                    .map(|x| formula(names, x))
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        }
        Formula::Or(xs) => {
            format!(
                "(or {})",
                xs.iter()
                    .map(|x| formula(names, x))
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        }
    }
}

pub(super) fn export(names: &[String], domains: &[Interval], stack: &[Formula]) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    for n in names {
        let _ = writeln!(out, "(declare-const {} Int)", symbol(n));
    }
    for (n, d) in names.iter().zip(domains) {
        let s = symbol(n);
        let _ = writeln!(
            out,
            "(assert (and (<= {} {s}) (<= {s} {})))",
            numeral(d.lo),
            numeral(d.hi)
        );
    }
    for f in stack {
        let _ = writeln!(out, "(assert {})", formula(names, f));
    }
    out.push_str("(check-sat)\n");
    out
}
