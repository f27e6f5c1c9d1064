//! Variation operators on path strings. Positions are 1-based and drawn
//! from the used bits only; results keep the population length `M`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::symbolic::PathString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    /// Flip one bit.
    A,
    /// Flip one bit and redraw every bit after it.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossoverKind {
    /// Suffix of `q1` replaced by a suffix of `q2`.
    A,
    /// Substring of `q1` replaced by a substring of `q2`.
    B,
    /// Substring of `q2` inserted into `q1`.
    C,
}

/// Mutation at position `p` (1-based).
pub fn mutate_at<R: Rng + ?Sized>(
    q: &PathString,
    p: usize,
    kind: MutationKind,
    rng: &mut R,
) -> PathString {
    let mut bits = q.0.clone();
    let k = p - 1;
    bits[k] = !bits[k];
    if kind == MutationKind::B {
        for b in &mut bits[k + 1..] {
            *b = rng.gen();
        }
    }
    PathString(bits)
}

/// Mutation at a uniform position among the first `m` bits.
pub fn mutate<R: Rng + ?Sized>(
    q: &PathString,
    m: usize,
    kind: MutationKind,
    rng: &mut R,
) -> PathString {
    let m = m.min(q.len());
    if m == 0 {
        return q.clone();
    }
    let p = rng.gen_range(1..=m);
    mutate_at(q, p, kind, rng)
}

/// Cut points, all 1-based: `q1[a1..=b1]` and `q2[a2..=b2]`. Kind A uses
/// `b1`/`a2` as "cut after" / "resume at" points, kind C inserts after `b1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cuts {
    pub a1: usize,
    pub b1: usize,
    pub a2: usize,
    pub b2: usize,
}

pub fn crossover_at(
    q1: &PathString,
    q2: &PathString,
    kind: CrossoverKind,
    cuts: Cuts,
    len: usize,
) -> PathString {
    let (x, y) = (q1.bits(), q2.bits());
    let mut bits: Vec<bool> = match kind {
        CrossoverKind::A => x[..cuts.b1].iter().chain(&y[cuts.a2..]).copied().collect(),
        CrossoverKind::B => x[..cuts.a1 - 1]
            .iter()
            .chain(&y[cuts.a2 - 1..cuts.b2])
            .chain(&x[cuts.b1..])
            .copied()
            .collect(),
        CrossoverKind::C => x[..cuts.b1]
            .iter()
            .chain(&y[cuts.a2 - 1..cuts.b2])
            .chain(&x[cuts.b1..])
            .copied()
            .collect(),
    };
    bits.resize(len, false);
    PathString(bits)
}

fn ordered_pair<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (usize, usize) {
    let (a, b) = (rng.gen_range(1..=m), rng.gen_range(1..=m));
    (a.min(b), a.max(b))
}

/// Crossover with uniform cut points in `[1, m1] × [1, m2]`; the result is
/// truncated or zero-padded to `len`. Returns `q1` when either side used no bits.
pub fn crossover<R: Rng + ?Sized>(
    q1: &PathString,
    m1: usize,
    q2: &PathString,
    m2: usize,
    kind: CrossoverKind,
    len: usize,
    rng: &mut R,
) -> PathString {
    let (m1, m2) = (m1.min(q1.len()), m2.min(q2.len()));
    if m1 == 0 || m2 == 0 {
        return q1.clone().normalized(len);
    }
    let cuts = match kind {
        CrossoverKind::A => {
            let (b1, a2) = (rng.gen_range(1..=m1), rng.gen_range(1..=m2));
            Cuts {
                a1: 1,
                b1,
                a2,
                b2: m2,
            }
        }
        CrossoverKind::B => {
            let (a1, b1) = ordered_pair(m1, rng);
            let (a2, b2) = ordered_pair(m2, rng);
            Cuts { a1, b1, a2, b2 }
        }
        CrossoverKind::C => {
            let b1 = rng.gen_range(1..=m1);
            let (a2, b2) = ordered_pair(m2, rng);
            Cuts { a1: 1, b1, a2, b2 }
        }
    };
    crossover_at(q1, q2, kind, cuts, len)
}
