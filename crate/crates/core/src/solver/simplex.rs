//! Exact feasibility of a linear relaxation with the bounded simplex
//! method (Bland's rule). Arithmetic is rational over `i128`; any overflow
//! gives up and reports "unknown".

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Q {
    n: i128,
    d: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q {
    const ZERO: Q = Q { n: 0, d: 1 };

    fn int(v: i64) -> Q {
        Q { n: v as i128, d: 1 }
    }

    fn make(n: i128, d: i128) -> Option<Q> {
        if n == 0 {
            return Some(Q::ZERO);
        }
        if d == 1 {
            return Some(Q { n, d });
        }
        let g = gcd(n, d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Q { n, d })
    }

    fn add(self, o: Q) -> Option<Q> {
        if self.d == 1 && o.d == 1 {
            return Some(Q {
                n: self.n.checked_add(o.n)?,
                d: 1,
            });
        }
        if self.d == o.d {
            return Q::make(self.n.checked_add(o.n)?, self.d);
        }
        let g = gcd(self.d, o.d);
        let a = self.n.checked_mul(o.d / g)?;
        let b = o.n.checked_mul(self.d / g)?;
        Q::make(a.checked_add(b)?, (self.d / g).checked_mul(o.d)?)
    }

    fn sub(self, o: Q) -> Option<Q> {
        self.add(Q {
            n: o.n.checked_neg()?,
            d: o.d,
        })
    }

    fn mul(self, o: Q) -> Option<Q> {
        if self.n == 0 || o.n == 0 {
            return Some(Q::ZERO);
        }
        if self.d == 1 && o.d == 1 {
            return Some(Q {
                n: self.n.checked_mul(o.n)?,
                d: 1,
            });
        }
        let g1 = gcd(self.n, o.d);
        let g2 = gcd(o.n, self.d);
        Q::make(
            (self.n / g1).checked_mul(o.n / g2)?,
            (self.d / g2).checked_mul(o.d / g1)?,
        )
    }

    fn div(self, o: Q) -> Option<Q> {
        self.mul(Q::make(o.d, o.n)?)
    }

    fn signum(self) -> i128 {
        self.n.signum()
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        let l = self.n.checked_mul(o.d);
        let r = o.n.checked_mul(self.d);
        match (l, r) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => (self.n as f64 / self.d as f64).total_cmp(&(o.n as f64 / o.d as f64)),
        }
    }
}

/// `lo <= Σ a·x <= hi` with either side optional.
#[derive(Debug, Clone)]
pub(super) struct Row {
    pub terms: Vec<(usize, i64)>,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

/// Sparse row, sorted by column.
type Sparse = Vec<(usize, Q)>;

fn coef(row: &Sparse, col: usize) -> Q {
    row.binary_search_by_key(&col, |e| e.0)
        .map_or(Q::ZERO, |k| row[k].1)
}

/// `x + c·y`, dropping column `skip` from `x`.
fn axpy(x: &Sparse, c: Q, y: &Sparse, skip: usize) -> Option<Sparse> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut a, mut b) = (0, 0);
    while a < x.len() || b < y.len() {
        let ca = x.get(a).map_or(usize::MAX, |e| e.0);
        let cb = y.get(b).map_or(usize::MAX, |e| e.0);
        let (col, v) = match ca.cmp(&cb) {
            Ordering::Less => {
                a += 1;
                (ca, x[a - 1].1)
            }
            Ordering::Greater => {
                b += 1;
                (cb, c.mul(y[b - 1].1)?)
            }
            Ordering::Equal => {
                a += 1;
                b += 1;
                (ca, x[a - 1].1.add(c.mul(y[b - 1].1)?)?)
            }
        };
        if col != skip && v.n != 0 {
            out.push((col, v));
        }
    }
    Some(out)
}

struct Tableau {
    /// `rows[i]` expresses `basic[i]` over the nonbasic variables.
    rows: Vec<Sparse>,
    basic: Vec<usize>,
    val: Vec<Q>,
    lb: Vec<Option<Q>>,
    ub: Vec<Option<Q>>,
}

impl Tableau {
    fn below(&self, v: usize) -> bool {
        self.lb[v].is_some_and(|l| self.val[v] < l)
    }

    fn above(&self, v: usize) -> bool {
        self.ub[v].is_some_and(|u| self.val[v] > u)
    }

    fn can_raise(&self, v: usize) -> bool {
        self.ub[v].is_none_or(|u| self.val[v] < u)
    }

    fn can_lower(&self, v: usize) -> bool {
        self.lb[v].is_none_or(|l| self.val[v] > l)
    }

    fn pivot_and_update(&mut self, i: usize, j: usize, target: Q) -> Option<()> {
        let b = self.basic[i];
        let a = coef(&self.rows[i], j);
        let theta = target.sub(self.val[b])?.div(a)?;
        self.val[b] = target;
        self.val[j] = self.val[j].add(theta)?;
        for k in 0..self.rows.len() {
            if k != i {
                let c = coef(&self.rows[k], j);
                if c.n != 0 {
                    let bk = self.basic[k];
                    self.val[bk] = self.val[bk].add(c.mul(theta)?)?;
                }
            }
        }
        // x_j = (x_b - Σ_{l≠j} t_l x_l) / a
        let inv = Q::int(1).div(a)?;
        let minus_inv = Q {
            n: inv.n.checked_neg()?,
            d: inv.d,
        };
        let mut row: Sparse = Vec::with_capacity(self.rows[i].len());
        for &(l, t) in &self.rows[i] {
            if l != j {
                row.push((l, t.mul(minus_inv)?));
            }
        }
        let at = row.partition_point(|e| e.0 < b);
        row.insert(at, (b, inv));
        for k in 0..self.rows.len() {
            if k == i {
                continue;
            }
            let c = coef(&self.rows[k], j);
            if c.n != 0 {
                self.rows[k] = axpy(&self.rows[k], c, &row, j)?;
            }
        }
        self.rows[i] = row;
        self.basic[i] = j;
        Some(())
    }

    fn check(&mut self, max_pivots: usize) -> Option<bool> {
        for _ in 0..max_pivots {
            // smallest violating basic variable
            let Some((i, raise)) = (0..self.rows.len())
                .filter_map(|i| {
                    let b = self.basic[i];
                    if self.below(b) {
                        Some((i, true))
                    } else if self.above(b) {
                        Some((i, false))
                    } else {
                        None
                    }
                })
                .min_by_key(|&(i, _)| self.basic[i])
            else {
                return Some(true);
            };
            // rows hold nonbasic columns only, in increasing order
            let entering = self.rows[i].iter().find(|&&(l, t)| {
                let s = t.signum();
                if raise {
                    (s > 0 && self.can_raise(l)) || (s < 0 && self.can_lower(l))
                } else {
                    (s > 0 && self.can_lower(l)) || (s < 0 && self.can_raise(l))
                }
            });
            let Some(&(j, _)) = entering else {
                return Some(false);
            };
            let b = self.basic[i];
            let target =
                if raise { self.lb[b] } else { self.ub[b] }.expect("violated bound exists");
            self.pivot_and_update(i, j, target)?;
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Lp {
    Infeasible,
    /// A rational solution; `None` marks the fractional coordinates.
    Feasible(Vec<Option<i64>>),
    Unknown,
}

/// Whether `rows` have a rational solution with `lo <= x <= hi`. `start`
/// is the initial point of the search.
pub(super) fn feasible(
    lo: &[i64],
    hi: &[i64],
    rows: &[Row],
    start: &[i64],
    max_pivots: usize,
) -> Lp {
    match solve(lo, hi, rows, start, max_pivots) {
        Some((true, val)) => Lp::Feasible(
            val.iter()
                .map(|q| (q.d == 1).then(|| q.n.clamp(i64::MIN as i128, i64::MAX as i128) as i64))
                .collect(),
        ),
        Some((false, _)) => Lp::Infeasible,
        None => Lp::Unknown,
    }
}

fn solve(
    lo: &[i64],
    hi: &[i64],
    rows: &[Row],
    start: &[i64],
    max_pivots: usize,
) -> Option<(bool, Vec<Q>)> {
    let n = lo.len();
    let width = n + rows.len();
    let mut t = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basic: Vec::with_capacity(rows.len()),
        val: Vec::with_capacity(width),
        lb: Vec::with_capacity(width),
        ub: Vec::with_capacity(width),
    };
    for x in 0..n {
        t.val.push(Q::int(start[x].clamp(lo[x], hi[x])));
        t.lb.push(Some(Q::int(lo[x])));
        t.ub.push(Some(Q::int(hi[x])));
    }
    for (i, r) in rows.iter().enumerate() {
        let mut terms: Sparse = Vec::with_capacity(r.terms.len());
        let mut v = Q::ZERO;
        for &(x, a) in &r.terms {
            terms.push((x, Q::int(a)));
            v = v.add(Q::int(a).mul(t.val[x])?)?;
        }
        terms.sort_unstable_by_key(|e| e.0);
        t.rows.push(terms);
        t.basic.push(n + i);
        t.val.push(v);
        t.lb.push(r.lo.map(Q::int));
        t.ub.push(r.hi.map(Q::int));
    }
    let ok = t.check(max_pivots)?;
    t.val.truncate(n);
    Some((ok, t.val))
}
