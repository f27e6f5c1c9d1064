//! Bounds propagation and backtracking search, pruned by an exact check of
//! the linear relaxation at every node.
//!
//! `e mod m` terms are linearized on the fly: a remainder variable `r` in
//! `[0, m-1]` and a quotient variable `q` are introduced with `e = m·q + r`.
//! Independent groups of variables are solved separately.

use std::collections::HashMap;

use super::simplex::{self, Lp, Row};
use super::{Atom, Formula, LinExpr, Rel, SolverError};
use crate::program::Interval;

pub const DEFAULT_SOLVE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone)]
struct Lin {
    terms: Vec<(usize, i64)>,
    c: i64,
    rel: Rel,
}

#[derive(Debug, Clone)]
enum Lf {
    Lin(Lin),
    And(Vec<Lf>),
    Or(Vec<Lf>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn clamp64(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// Converts global formulas into local constraints over problem variables.
struct Lowering<'a> {
    domains: &'a [Interval],
    local_of: Vec<usize>,
    global: Vec<Option<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    mods: HashMap<(LinExpr, i64), usize>,
    lins: Vec<Lin>,
    complex: Vec<Lf>,
}

impl Lowering<'_> {
    fn new_var(&mut self, global: Option<usize>, lo: i64, hi: i64) -> usize {
        self.global.push(global);
        self.lo.push(lo);
        self.hi.push(hi);
        self.lo.len() - 1
    }

    fn var(&mut self, v: usize) -> usize {
        if self.local_of[v] != usize::MAX {
            return self.local_of[v];
        }
        let d = self.domains[v];
        let l = self.new_var(Some(v), d.lo, d.hi);
        self.local_of[v] = l;
        l
    }

    fn bounds(&self, terms: &[(usize, i64)], c: i64) -> (i128, i128) {
        let mut lo = c as i128;
        let mut hi = c as i128;
        for &(x, a) in terms {
            let p = a as i128 * self.lo[x] as i128;
            let q = a as i128 * self.hi[x] as i128;
            lo += p.min(q);
            hi += p.max(q);
        }
        (lo, hi)
    }

    fn linear(&mut self, e: &LinExpr) -> (Vec<(usize, i64)>, i64) {
        let mut terms: Vec<(usize, i64)> = Vec::with_capacity(e.terms.len());
        for (atom, coef) in &e.terms {
            let x = match atom {
                Atom::Var(v) => self.var(*v),
                Atom::Mod(inner, m) => self.remainder(inner, *m),
            };
            terms.push((x, *coef));
        }
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for (x, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += a,
                _ => merged.push((x, a)),
            }
        }
        merged.retain(|t| t.1 != 0);
        (merged, e.constant)
    }

    fn remainder(&mut self, inner: &LinExpr, m: i64) -> usize {
        let key = (inner.clone(), m);
        if let Some(&r) = self.mods.get(&key) {
            return r;
        }
        let (mut terms, c) = self.linear(inner);
        let (elo, ehi) = self.bounds(&terms, c);
        let m128 = m as i128;
        let (qlo, qhi) = (floor_div(elo, m128), floor_div(ehi, m128));
        let q = self.new_var(None, clamp64(qlo), clamp64(qhi));
        let r = self.new_var(None, 0, m - 1);
        // e - m·q - r = 0
        terms.push((q, -m));
        terms.push((r, -1));
        self.lins.push(Lin {
            terms,
            c,
            rel: Rel::Eq,
        });
        self.mods.insert(key, r);
        r
    }

    /// Returns false when the formula is trivially false.
    fn add(&mut self, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::And(xs) => xs.iter().all(|x| self.add(x)),
            Formula::Atom(c) => {
                let (terms, k) = self.linear(&c.expr);
                self.lins.push(Lin {
                    terms,
                    c: k,
                    rel: c.rel,
                });
                true
            }
            Formula::Or(_) => {
                let lf = self.lower(f);
                self.complex.push(lf);
                true
            }
        }
    }

    fn lower(&mut self, f: &Formula) -> Lf {
        match f {
            Formula::True => Lf::And(Vec::new()),
            Formula::False => Lf::Or(Vec::new()),
            Formula::Atom(c) => {
                let (terms, k) = self.linear(&c.expr);
                Lf::Lin(Lin {
                    terms,
                    c: k,
                    rel: c.rel,
                })
            }
            Formula::And(xs) => Lf::And(xs.iter().map(|x| self.lower(x)).collect()),
            Formula::Or(xs) => Lf::Or(xs.iter().map(|x| self.lower(x)).collect()),
        }
    }
}

fn lf_vars(f: &Lf, out: &mut Vec<usize>) {
    match f {
        Lf::Lin(l) => out.extend(l.terms.iter().map(|t| t.0)),
        Lf::And(xs) | Lf::Or(xs) => xs.iter().for_each(|x| lf_vars(x, out)),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// One independent group: constraints `0..lins.len()` are linear, the rest
/// index into `complex`.
struct Component<'a> {
    vars: Vec<usize>,
    lins: Vec<&'a Lin>,
    complex: Vec<&'a Lf>,
    lp: Option<Vec<Row>>,
}

impl Component<'_> {
    /// Linear relaxation over positions in `vars`. Single-variable
    /// constraints are left to propagation; `None` when nothing is left.
    fn relaxation(&self) -> Option<Vec<Row>> {
        let mut pos = vec![0; self.vars.iter().max().map_or(0, |m| m + 1)];
        for (k, &x) in self.vars.iter().enumerate() {
            pos[x] = k;
        }
        let rows: Vec<Row> = self
            .lins
            .iter()
            .filter(|l| l.rel != Rel::Ne && l.terms.len() > 1)
            .map(|l| Row {
                terms: l.terms.iter().map(|&(x, a)| (pos[x], a)).collect(),
                lo: (l.rel == Rel::Eq).then_some(-l.c),
                hi: Some(-l.c),
            })
            .collect();
        (!rows.is_empty()).then_some(rows)
    }
}

const MAX_PIVOTS: usize = 5_000;

struct Engine {
    steps: u64,
    budget: u64,
    hint: Vec<i64>,
    /// Constraint ids (local to the owning component) per variable.
    watch: Vec<Vec<usize>>,
}

#[derive(Debug)]
struct Conflict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relaxed {
    Infeasible,
    Solved,
    Open,
}

impl Engine {
    fn tick(&mut self) -> Result<(), SolverError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(SolverError::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn revise_le(
        terms: &[(usize, i64)],
        c: i64,
        sign: i64,
        lo: &mut [i64],
        hi: &mut [i64],
        changed: &mut Vec<usize>,
    ) -> Result<bool, Conflict> {
        let mut minsum = (sign * c) as i128;
        for &(x, a) in terms {
            let a = (a * sign) as i128;
            minsum += (a * lo[x] as i128).min(a * hi[x] as i128);
        }
        if minsum > 0 {
            return Err(Conflict);
        }
        let mut any = false;
        for &(x, a) in terms {
            let a = (a * sign) as i128;
            let own = (a * lo[x] as i128).min(a * hi[x] as i128);
            let slack = own - minsum;
            if a > 0 {
                let nh = floor_div(slack, a);
                if nh < hi[x] as i128 {
                    hi[x] = nh as i64;
                    changed.push(x);
                    any = true;
                }
            } else {
                let nl = ceil_div(slack, a);
                if nl > lo[x] as i128 {
                    lo[x] = nl as i64;
                    changed.push(x);
                    any = true;
                }
            }
            if lo[x] > hi[x] {
                return Err(Conflict);
            }
        }
        Ok(any)
    }

    fn revise_lin(
        l: &Lin,
        lo: &mut [i64],
        hi: &mut [i64],
        changed: &mut Vec<usize>,
    ) -> Result<(), Conflict> {
        match l.rel {
            Rel::Le => {
                Self::revise_le(&l.terms, l.c, 1, lo, hi, changed)?;
            }
            Rel::Eq => loop {
                let a = Self::revise_le(&l.terms, l.c, 1, lo, hi, changed)?;
                let b = Self::revise_le(&l.terms, l.c, -1, lo, hi, changed)?;
                if !a && !b {
                    break;
                }
            },
            Rel::Ne => {
                let mut open = None;
                let mut rest = l.c as i128;
                for &(x, a) in &l.terms {
                    if lo[x] == hi[x] {
                        rest += a as i128 * lo[x] as i128;
                    } else if open.is_some() {
                        return Ok(());
                    } else {
                        open = Some((x, a));
                    }
                }
                match open {
                    None if rest == 0 => return Err(Conflict),
                    None => {}
                    Some((x, a)) => {
                        // a·x + rest ≠ 0
                        let a = a as i128;
                        if rest % a == 0 {
                            let v = -rest / a;
                            if v == lo[x] as i128 {
                                lo[x] += 1;
                                changed.push(x);
                            } else if v == hi[x] as i128 {
                                hi[x] -= 1;
                                changed.push(x);
                            }
                            if lo[x] > hi[x] {
                                return Err(Conflict);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn truth_lin(l: &Lin, lo: &[i64], hi: &[i64]) -> Truth {
        let mut min = l.c as i128;
        let mut max = l.c as i128;
        for &(x, a) in &l.terms {
            let p = a as i128 * lo[x] as i128;
            let q = a as i128 * hi[x] as i128;
            min += p.min(q);
            max += p.max(q);
        }
        match l.rel {
            Rel::Le if max <= 0 => Truth::True,
            Rel::Le if min > 0 => Truth::False,
            Rel::Eq if min == 0 && max == 0 => Truth::True,
            Rel::Eq if min > 0 || max < 0 => Truth::False,
            Rel::Ne if min > 0 || max < 0 => Truth::True,
            Rel::Ne if min == 0 && max == 0 => Truth::False,
            _ => Truth::Unknown,
        }
    }

    fn truth(f: &Lf, lo: &[i64], hi: &[i64]) -> Truth {
        match f {
            Lf::Lin(l) => Self::truth_lin(l, lo, hi),
            Lf::And(xs) => {
                let mut t = Truth::True;
                for x in xs {
                    match Self::truth(x, lo, hi) {
                        Truth::False => return Truth::False,
                        Truth::Unknown => t = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                t
            }
            Lf::Or(xs) => {
                let mut t = Truth::False;
                for x in xs {
                    match Self::truth(x, lo, hi) {
                        Truth::True => return Truth::True,
                        Truth::Unknown => t = Truth::Unknown,
                        Truth::False => {}
                    }
                }
                t
            }
        }
    }

    /// Enforces `f`, propagating when it is forced down to linear parts.
    fn enforce(
        f: &Lf,
        lo: &mut [i64],
        hi: &mut [i64],
        changed: &mut Vec<usize>,
    ) -> Result<(), Conflict> {
        match f {
            Lf::Lin(l) => Self::revise_lin(l, lo, hi, changed),
            Lf::And(xs) => xs
                .iter()
                .try_for_each(|x| Self::enforce(x, lo, hi, changed)),
            Lf::Or(xs) => {
                let mut open = None;
                for x in xs {
                    match Self::truth(x, lo, hi) {
                        Truth::True => return Ok(()),
                        Truth::False => {}
                        Truth::Unknown if open.is_some() => return Ok(()),
                        Truth::Unknown => open = Some(x),
                    }
                }
                match open {
                    None => Err(Conflict),
                    Some(x) => Self::enforce(x, lo, hi, changed),
                }
            }
        }
    }

    fn propagate(
        &mut self,
        comp: &Component<'_>,
        lo: &mut [i64],
        hi: &mut [i64],
        mut queue: Vec<usize>,
    ) -> Result<bool, SolverError> {
        let total = comp.lins.len() + comp.complex.len();
        let mut queued = vec![false; total];
        for &q in &queue {
            queued[q] = true;
        }
        let mut changed = Vec::new();
        while let Some(ci) = queue.pop() {
            queued[ci] = false;
            self.tick()?;
            changed.clear();
            let r = if ci < comp.lins.len() {
                Self::revise_lin(comp.lins[ci], lo, hi, &mut changed)
            } else {
                Self::enforce(comp.complex[ci - comp.lins.len()], lo, hi, &mut changed)
            };
            if r.is_err() {
                return Ok(false);
            }
            for &x in &changed {
                for &w in &self.watch[x] {
                    if !queued[w] {
                        queued[w] = true;
                        queue.push(w);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Checks the linear relaxation under the current bounds. An integral
    /// relaxed solution that satisfies every constraint is adopted by
    /// fixing the bounds to it.
    fn relax(
        &mut self,
        comp: &Component<'_>,
        lo: &mut [i64],
        hi: &mut [i64],
    ) -> Result<Relaxed, SolverError> {
        let Some(rows) = &comp.lp else {
            return Ok(Relaxed::Open);
        };
        self.tick()?;
        let pick = |v: &[i64]| comp.vars.iter().map(|&x| v[x]).collect::<Vec<_>>();
        let (l, h, start) = (pick(lo), pick(hi), pick(&self.hint));
        let point = match simplex::feasible(&l, &h, rows, &start, MAX_PIVOTS) {
            Lp::Infeasible => return Ok(Relaxed::Infeasible),
            Lp::Unknown => return Ok(Relaxed::Open),
            Lp::Feasible(p) => p,
        };
        let Some(point) = point.into_iter().collect::<Option<Vec<i64>>>() else {
            return Ok(Relaxed::Open);
        };
        let (mut l2, mut h2) = (lo.to_vec(), hi.to_vec());
        for (&x, &v) in comp.vars.iter().zip(&point) {
            l2[x] = v;
            h2[x] = v;
        }
        let ok = comp
            .lins
            .iter()
            .all(|c| Self::truth_lin(c, &l2, &h2) == Truth::True)
            && comp
                .complex
                .iter()
                .all(|f| Self::truth(f, &l2, &h2) == Truth::True);
        if ok {
            lo.copy_from_slice(&l2);
            hi.copy_from_slice(&h2);
            return Ok(Relaxed::Solved);
        }
        Ok(Relaxed::Open)
    }

    /// Tries the hint, then the hint with one variable changed so that the
    /// violated linear constraints hold. Fixes the bounds on success.
    fn repair(
        &mut self,
        comp: &Component<'_>,
        lo: &mut [i64],
        hi: &mut [i64],
    ) -> Result<bool, SolverError> {
        let Some(point) = self.repaired(comp, lo, hi)? else {
            return Ok(false);
        };
        for &x in &comp.vars {
            lo[x] = point[x];
            hi[x] = point[x];
        }
        Ok(true)
    }

    fn repaired(
        &mut self,
        comp: &Component<'_>,
        lo: &[i64],
        hi: &[i64],
    ) -> Result<Option<Vec<i64>>, SolverError> {
        self.tick()?;
        let mut point: Vec<i64> = lo.to_vec();
        for &x in &comp.vars {
            point[x] = self.hint[x].clamp(lo[x], hi[x]);
        }
        let holds = |c: usize, p: &[i64]| {
            if c < comp.lins.len() {
                Self::truth_lin(comp.lins[c], p, p) == Truth::True
            } else {
                Self::truth(comp.complex[c - comp.lins.len()], p, p) == Truth::True
            }
        };
        let total = comp.lins.len() + comp.complex.len();
        let violated: Vec<usize> = (0..total).filter(|&c| !holds(c, &point)).collect();
        if violated.is_empty() {
            return Ok(Some(point));
        }
        if violated.iter().any(|&c| c >= comp.lins.len()) {
            return Ok(None);
        }
        let first = comp.lins[violated[0]];
        for &(x, a) in &first.terms {
            self.tick()?;
            let (a, px) = (a as i128, point[x] as i128);
            let s: i128 = first
                .terms
                .iter()
                .map(|&(y, b)| b as i128 * point[y] as i128)
                .sum::<i128>()
                + first.c as i128;
            // a·v + (s - a·px) must satisfy the relation
            let rest = s - a * px;
            let candidates: Vec<i128> = match first.rel {
                Rel::Le if a > 0 => vec![floor_div(-rest, a)],
                Rel::Le => vec![ceil_div(-rest, a)],
                Rel::Eq if rest % a == 0 => vec![-rest / a],
                Rel::Eq => vec![],
                Rel::Ne => vec![px - 1, px + 1],
            };
            for v in candidates {
                if v < lo[x] as i128 || v > hi[x] as i128 {
                    continue;
                }
                let old = point[x];
                point[x] = v as i64;
                let watched = &self.watch[x];
                if violated.iter().chain(watched).all(|&c| holds(c, &point)) {
                    return Ok(Some(point));
                }
                point[x] = old;
            }
        }
        Ok(None)
    }

    fn search(
        &mut self,
        comp: &Component<'_>,
        lo: &mut Vec<i64>,
        hi: &mut Vec<i64>,
    ) -> Result<bool, SolverError> {
        match self.relax(comp, lo, hi)? {
            Relaxed::Infeasible => Ok(false),
            Relaxed::Solved => Ok(true),
            Relaxed::Open => self.dfs(comp, lo, hi),
        }
    }

    fn dfs(
        &mut self,
        comp: &Component<'_>,
        lo: &mut Vec<i64>,
        hi: &mut Vec<i64>,
    ) -> Result<bool, SolverError> {
        // first-fail: smallest open domain, lowest index on ties
        let pick = comp
            .vars
            .iter()
            .copied()
            .filter(|&x| lo[x] < hi[x])
            .min_by_key(|&x| (hi[x] as i128 - lo[x] as i128, x));
        let Some(x) = pick else {
            let ok = comp
                .lins
                .iter()
                .all(|l| Self::truth_lin(l, lo, hi) == Truth::True)
                && comp
                    .complex
                    .iter()
                    .all(|f| Self::truth(f, lo, hi) == Truth::True);
            return Ok(ok);
        };
        let watch = self.watch[x].clone();
        let h = self.hint[x].clamp(lo[x], hi[x]);
        for v in std::iter::once(h).chain((lo[x]..=hi[x]).filter(|&v| v != h)) {
            self.tick()?;
            let mut l2 = lo.clone();
            let mut h2 = hi.clone();
            l2[x] = v;
            h2[x] = v;
            if self.propagate(comp, &mut l2, &mut h2, watch.clone())?
                && self.search(comp, &mut l2, &mut h2)?
            {
                *lo = l2;
                *hi = h2;
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Solves the conjunction of `formulas`. Variables they mention get the
/// first solution in search order, which tries each variable's `base`
/// value before the rest of its domain ascending; all other variables keep
/// `base`.
pub(super) fn solve(
    domains: &[Interval],
    formulas: &[&Formula],
    mut base: Vec<i64>,
    budget: u64,
) -> Result<Option<Vec<i64>>, SolverError> {
    let mut low = Lowering {
        domains,
        local_of: vec![usize::MAX; domains.len()],
        global: Vec::new(),
        lo: Vec::new(),
        hi: Vec::new(),
        mods: HashMap::new(),
        lins: Vec::new(),
        complex: Vec::new(),
    };
    for f in formulas {
        if !low.add(f) {
            return Ok(None);
        }
    }
    let n = low.lo.len();
    if low.lo.iter().zip(&low.hi).any(|(l, h)| l > h) {
        return Ok(None);
    }

    let mut uf = UnionFind((0..n).collect());
    let mut scratch = Vec::new();
    let lin_vars: Vec<Vec<usize>> = low
        .lins
        .iter()
        .map(|l| l.terms.iter().map(|t| t.0).collect())
        .collect();
    let complex_vars: Vec<Vec<usize>> = low
        .complex
        .iter()
        .map(|f| {
            scratch.clear();
            lf_vars(f, &mut scratch);
            scratch.sort_unstable();
            scratch.dedup();
            scratch.clone()
        })
        .collect();
    for vs in lin_vars.iter().chain(&complex_vars) {
        for w in vs.windows(2) {
            uf.union(w[0], w[1]);
        }
    }

    // group constraints and variables by component root
    let mut group_of = vec![usize::MAX; n];
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut comps: Vec<Component<'_>> = Vec::new();
    for x in 0..n {
        let r = uf.find(x);
        if group_of[r] == usize::MAX {
            group_of[r] = comps.len();
            comps.push(Component {
                vars: Vec::new(),
                lins: Vec::new(),
                complex: Vec::new(),
                lp: None,
            });
        }
        let g = group_of[r];
        comps[g].vars.push(x);
    }
    // constant constraints (no variables) are checked directly
    let mut lo = low.lo.clone();
    let mut hi = low.hi.clone();
    for (i, l) in low.lins.iter().enumerate() {
        match lin_vars[i].first() {
            Some(&x) => {
                let g = group_of[uf.find(x)];
                let c = &mut comps[g];
                let id = c.lins.len();
                c.lins.push(l);
                for &v in &lin_vars[i] {
                    watch[v].push(id);
                }
            }
            None => {
                if Engine::truth_lin(l, &lo, &hi) != Truth::True {
                    return Ok(None);
                }
            }
        }
    }
    let mut complex_by_comp: Vec<Vec<(usize, &Lf)>> = vec![Vec::new(); comps.len()];
    for (i, f) in low.complex.iter().enumerate() {
        match complex_vars[i].first() {
            Some(&x) => complex_by_comp[group_of[uf.find(x)]].push((i, f)),
            None => {
                if Engine::truth(f, &lo, &hi) != Truth::True {
                    return Ok(None);
                }
            }
        }
    }
    for (g, list) in complex_by_comp.into_iter().enumerate() {
        let c = &mut comps[g];
        for (i, f) in list {
            let id = c.lins.len() + c.complex.len();
            c.complex.push(f);
            for &v in &complex_vars[i] {
                watch[v].push(id);
            }
        }
    }
    for c in &mut comps {
        c.lp = c.relaxation();
    }
    let hint: Vec<i64> = low
        .global
        .iter()
        .enumerate()
        .map(|(x, g)| g.map_or(low.lo[x], |g| base[g]))
        .collect();
    let mut engine = Engine {
        steps: 0,
        budget,
        hint,
        watch,
    };
    for comp in &comps {
        if comp.lins.is_empty() && comp.complex.is_empty() {
            continue;
        }
        let all: Vec<usize> = (0..comp.lins.len() + comp.complex.len()).rev().collect();
        if !engine.propagate(comp, &mut lo, &mut hi, all)? {
            return Ok(None);
        }
        if !engine.repair(comp, &mut lo, &mut hi)? && !engine.search(comp, &mut lo, &mut hi)? {
            return Ok(None);
        }
    }
    for (x, g) in low.global.iter().enumerate() {
        if let Some(g) = g {
            base[*g] = lo[x];
        }
    }
    Ok(Some(base))
}

/// Upper bound of `e` over the variable domains.
pub(super) fn upper_bound(domains: &[Interval], e: &LinExpr) -> i64 {
    let mut acc = e.constant as i128;
    for (atom, c) in &e.terms {
        let c = *c as i128;
        acc += match atom {
            Atom::Var(v) => (c * domains[*v].lo as i128).max(c * domains[*v].hi as i128),
            Atom::Mod(_, m) => (c * (*m as i128 - 1)).max(0),
        };
    }
    clamp64(acc)
}
