//! Survivor selection shared by both evolutionary searches.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::symbolic::PathString;

/// Length of the common prefix of the first `m1` and `m2` bits.
pub fn lcp(q1: &PathString, m1: usize, q2: &PathString, m2: usize) -> usize {
    let n = m1.min(m2).min(q1.len()).min(q2.len());
    q1.bits()[..n]
        .iter()
        .zip(&q2.bits()[..n])
        .take_while(|(a, b)| a == b)
        .count()
}

/// `LCP(q1, q2) / sqrt(m1 · m2)`; zero when either string used no bits.
pub fn similarity(q1: &PathString, m1: usize, q2: &PathString, m2: usize) -> f64 {
    if m1 == 0 || m2 == 0 {
        return 0.0;
    }
    lcp(q1, m1, q2, m2) as f64 / ((m1 as f64) * (m2 as f64)).sqrt()
}

/// Crowdingness of every member: the sum of its similarity to all others.
pub fn crowdingness(pop: &[(&PathString, usize)]) -> Vec<f64> {
    crowd_by(pop.len(), |a, b| {
        similarity(pop[a].0, pop[a].1, pop[b].0, pop[b].1)
    })
}

/// Crowdingness under an arbitrary symmetric similarity.
pub fn crowd_by(n: usize, sim: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut crowd = vec![0.0; n];
    for a in 0..n {
        for b in a + 1..n {
            let s = sim(a, b);
            crowd[a] += s;
            crowd[b] += s;
        }
    }
    crowd
}

/// Selection weight for perf rank `i` and crowding rank `j`.
pub fn weight(i: usize, j: usize, beta: f64, gamma: f64) -> f64 {
    (i as f64).powf(-beta) * (j as f64).powf(-gamma)
}

/// 1-based competition ranks ("1224"): equal keys share the best rank.
/// `better(a, b)` is true when `a` ranks ahead of `b`.
pub fn competition_ranks<T>(keys: &[T], better: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    keys.iter()
        .map(|k| 1 + keys.iter().filter(|o| better(o, k)).count())
        .collect()
}

/// Survivor counts for the elite, top and weighted groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub elite: usize,
    pub top: usize,
    pub rest: usize,
}

/// Splits `psize` by `r1`, `r2`, `1 - r1 - r2` with largest remainders.
/// The elite group keeps at least one slot.
pub fn counts(psize: usize, r1: f64, r2: f64) -> Counts {
    let shares = [r1, r2, (1.0 - r1 - r2).max(0.0)];
    let total: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares
        .iter()
        .map(|s| {
            if total > 0.0 {
                s / total * psize as f64
            } else {
                0.0
            }
        })
        .collect();
    let mut c: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let mut left = psize - c.iter().sum::<usize>();
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        c[k] += 1;
        left -= 1;
    }
    if c[0] == 0 && psize > 0 {
        let donor = if c[2] >= c[1] { 2 } else { 1 };
        c[donor] -= 1;
        c[0] = 1;
    }
    Counts {
        elite: c[0],
        top: c[1],
        rest: c[2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectParams {
    pub psize: usize,
    pub r1: f64,
    pub r2: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Indices of the survivors in the previous population and in the offspring.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Survivors {
    pub prev: Vec<usize>,
    pub offspring: Vec<usize>,
}

impl Survivors {
    pub fn len(&self) -> usize {
        self.prev.len() + self.offspring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws `k` items without replacement, each draw proportional to weight.
pub fn sample_weighted<R: Rng + ?Sized>(
    mut items: Vec<(usize, f64)>,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(k.min(items.len()));
    while out.len() < k && !items.is_empty() {
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        let mut r = rng.gen::<f64>() * total;
        let mut pick = items.len() - 1;
        for (n, (_, w)) in items.iter().enumerate() {
            if r < *w {
                pick = n;
                break;
            }
            r -= w;
        }
        out.push(items.remove(pick).0);
    }
    out
}

/// Index of the first maximum.
pub fn best_index(perf: &[i64]) -> Option<usize> {
    (0..perf.len()).rev().max_by_key(|&k| perf[k])
}

/// Chooses the next generation.
///
/// 1. `elite` members of the previous population, uniformly at random but
///    always including its best one.
/// 2. The `top` offspring by performance.
/// 3. `rest` more offspring without replacement, weighted by
///    `i^-beta · j^-gamma` with `i` the performance rank and `j` the rank by
///    ascending crowdingness within the leftover offspring.
///
/// Missing offspring are made up from the previous population by
/// performance. The result has `min(psize, |prev| + |offspring|)` members.
pub fn select<R: Rng + ?Sized>(
    prev_perf: &[i64],
    off_perf: &[i64],
    off_crowd: &[f64],
    p: &SelectParams,
    rng: &mut R,
) -> Survivors {
    debug_assert_eq!(off_perf.len(), off_crowd.len());
    let c = counts(p.psize, p.r1, p.r2);
    let mut out = Survivors::default();

    // 1. elite
    if let Some(best) = best_index(prev_perf) {
        out.prev.push(best);
        let mut others: Vec<usize> = (0..prev_perf.len()).filter(|&k| k != best).collect();
        others.shuffle(rng);
        out.prev
            .extend(others.into_iter().take(c.elite.saturating_sub(1)));
    }

    // 2. top offspring
    let mut by_perf: Vec<usize> = (0..off_perf.len()).collect();
    by_perf.sort_by(|&a, &b| off_perf[b].cmp(&off_perf[a]).then(a.cmp(&b)));
    out.offspring.extend(by_perf.iter().take(c.top));

    // 3. weighted rest
    let pool: Vec<usize> = by_perf.iter().skip(c.top).copied().collect();
    let i_rank = competition_ranks(
        &pool.iter().map(|&k| off_perf[k]).collect::<Vec<_>>(),
        |a, b| a > b,
    );
    let j_rank = competition_ranks(
        &pool.iter().map(|&k| off_crowd[k]).collect::<Vec<_>>(),
        |a, b| a < b,
    );
    let weighted: Vec<(usize, f64)> = pool
        .iter()
        .enumerate()
        .map(|(n, &k)| (k, weight(i_rank[n], j_rank[n], p.beta, p.gamma)))
        .collect();
    out.offspring.extend(sample_weighted(weighted, c.rest, rng));

    // shortfall from the previous population
    let want = p.psize.min(prev_perf.len() + off_perf.len());
    if out.len() < want {
        let mut rest: Vec<usize> = (0..prev_perf.len())
            .filter(|k| !out.prev.contains(k))
            .collect();
        rest.sort_by(|&a, &b| prev_perf[b].cmp(&prev_perf[a]).then(a.cmp(&b)));
        let need = want - out.len();
        out.prev.extend(rest.into_iter().take(need));
    }
    if out.len() < want {
        // previous population exhausted: take leftover offspring by rank
        let need = want - out.len();
        let extra: Vec<usize> = by_perf
            .iter()
            .filter(|k| !out.offspring.contains(k))
            .take(need)
            .copied()
            .collect();
        out.offspring.extend(extra);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PathString {
        s.parse().unwrap()
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(similarity(&ps("00"), 2, &ps("01"), 2), 0.5);
        assert_eq!(similarity(&ps("0110"), 4, &ps("0110"), 4), 1.0);
        // padding beyond m is ignored
        assert_eq!(similarity(&ps("0111"), 2, &ps("0100"), 2), 1.0);
        assert_eq!(similarity(&ps("1"), 0, &ps("1"), 1), 0.0);
    }

    #[test]
    fn three_identical_strings_have_crowd_two() {
        let q = ps("10110");
        let c = crowdingness(&[(&q, 5), (&q, 5), (&q, 5)]);
        assert_eq!(c, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn weight_law() {
        assert_eq!(weight(1, 1, 1.0, 0.5), 1.0);
        assert_eq!(weight(2, 1, 1.0, 0.5), 0.5);
        assert!((weight(1, 4, 1.0, 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn competition_ranking() {
        assert_eq!(
            competition_ranks(&[5, 7, 5, 1], |a, b| a > b),
            vec![2, 1, 2, 4]
        );
    }

    #[test]
    fn default_counts() {
        assert_eq!(
            counts(50, 0.2, 0.4),
            Counts {
                elite: 10,
                top: 20,
                rest: 20
            }
        );
        assert_eq!(
            counts(2, 0.2, 0.4),
            Counts {
                elite: 1,
                top: 1,
                rest: 0
            }
        );
        assert_eq!(
            counts(3, 0.0, 0.5),
            Counts {
                elite: 1,
                top: 1,
                rest: 1
            }
        );
        assert_eq!(
            counts(7, 1.0, 0.0),
            Counts {
                elite: 7,
                top: 0,
                rest: 0
            }
        );
    }

    #[test]
    fn large_beta_prefers_performance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let off: Vec<i64> = (0..20).collect();
        let crowd = vec![0.0; 20];
        let p = SelectParams {
            psize: 6,
            r1: 0.0,
            r2: 0.0,
            beta: 50.0,
            gamma: 0.5,
        };
        let s = select(&[0], &off, &crowd, &p, &mut rng);
        let mut got = s.offspring.clone();
        got.sort();
        assert_eq!(got, vec![15, 16, 17, 18, 19]);
    }

    proptest! {
        #[test]
        fn exact_size_and_elitism(
            prev in proptest::collection::vec(-1i64..40, 2..30),
            off in proptest::collection::vec(-1i64..40, 1..40),
            r1 in 0.0f64..0.5,
            r2 in 0.0f64..0.5,
            psize in 2usize..30,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let crowd: Vec<f64> = off.iter().map(|v| (*v as f64 * 0.37).sin().abs()).collect();
            let p = SelectParams { psize, r1, r2, beta: 1.0, gamma: 0.5 };
            let s = select(&prev, &off, &crowd, &p, &mut rng);
            prop_assert_eq!(s.len(), psize.min(prev.len() + off.len()));
            prop_assert!(s.prev.contains(&best_index(&prev).unwrap()));
            let mut a = s.prev.clone(); a.sort(); a.dedup();
            let mut b = s.offspring.clone(); b.sort(); b.dedup();
            prop_assert_eq!(a.len(), s.prev.len());
            prop_assert_eq!(b.len(), s.offspring.len());
        }

        #[test]
        fn counts_sum_to_psize(psize in 1usize..500, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let r2 = r2 * (1.0 - r1);
            let c = counts(psize, r1, r2);
            prop_assert_eq!(c.elite + c.top + c.rest, psize);
            prop_assert!(c.elite >= 1);
        }
    }
}
