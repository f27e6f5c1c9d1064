//! The benchmark corpus.
//!
//! Each entry builds a [`Program`] from named scale parameters. Inputs are
//! bounded integers; graphs are adjacency matrices over `N` vertices. Where
//! a worst-case cost is known in closed form the entry carries it together
//! with an input that attains it.

mod programs;

use std::collections::BTreeMap;
use std::fmt;

use crate::concrete::ConcreteInput;
use crate::program::Program;

/// Named scale parameters, e.g. `N = 16`.
pub type Scale = BTreeMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("no benchmark named `{0}`")]
    UnknownBenchmark(String),
    #[error("{bench} has no scale parameter `{param}`")]
    UnknownParam { bench: &'static str, param: String },
    #[error("{bench}: {param} = {value} is unsupported (allowed {min}..={max})")]
    Unsupported {
        bench: &'static str,
        param: String,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("bad scale assignment `{0}` (expected key=value)")]
    BadScale(String),
}

/// A scale parameter with its default and supported range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: i64,
    pub min: i64,
    pub max: i64,
}

const fn p(name: &'static str, default: i64, min: i64, max: i64) -> ParamSpec {
    ParamSpec {
        name,
        default,
        min,
        max,
    }
}

type Build = fn(&Scale) -> Program;
type Analytic = fn(&Scale) -> i64;
type Witness = fn(&Scale) -> ConcreteInput;
type Bits = fn(&Scale) -> usize;

pub struct Benchmark {
    pub id: &'static str,
    pub name: &'static str,
    /// How cost is counted.
    pub cost_model: &'static str,
    /// Derivation of [`Benchmark::known_max`], empty when there is none.
    pub max_note: &'static str,
    pub params: &'static [ParamSpec],
    build: Build,
    known_max: Option<Analytic>,
    witness: Option<Witness>,
    max_bits: Bits,
}

impl fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Benchmark")
            .field("id", &self.id)
            .field("name", &self.name)
            .finish()
    }
}

impl Benchmark {
    pub fn default_scale(&self) -> Scale {
        self.params
            .iter()
            .map(|p| (p.name.to_string(), p.default))
            .collect()
    }

    /// The default scale with `overrides` applied and range-checked.
    pub fn scale(&self, overrides: &Scale) -> Result<Scale, BenchError> {
        let mut scale = self.default_scale();
        for (k, v) in overrides {
            let spec = self.params.iter().find(|p| p.name == k).ok_or_else(|| {
                BenchError::UnknownParam {
                    bench: self.id,
                    param: k.clone(),
                }
            })?;
            if *v < spec.min || *v > spec.max {
                return Err(BenchError::Unsupported {
                    bench: self.id,
                    param: k.clone(),
                    value: *v,
                    min: spec.min,
                    max: spec.max,
                });
            }
            scale.insert(k.clone(), *v);
        }
        Ok(scale)
    }

    pub fn build(&self, overrides: &Scale) -> Result<Program, BenchError> {
        Ok((self.build)(&self.scale(overrides)?))
    }

    pub fn build_default(&self) -> Program {
        (self.build)(&self.default_scale())
    }

    pub fn known_max(&self, overrides: &Scale) -> Result<Option<i64>, BenchError> {
        let s = self.scale(overrides)?;
        Ok(self.known_max.map(|f| f(&s)))
    }

    /// An input attaining [`Benchmark::known_max`].
    pub fn witness(&self, overrides: &Scale) -> Result<Option<ConcreteInput>, BenchError> {
        let s = self.scale(overrides)?;
        Ok(self.witness.map(|f| f(&s)))
    }

    /// Path-string length long enough for every path under either mapping.
    pub fn max_bits(&self, overrides: &Scale) -> Result<usize, BenchError> {
        let s = self.scale(overrides)?;
        Ok((self.max_bits)(&s).max(1))
    }

    pub fn annotated(&self) -> bool {
        !self.build_default().annotated_branches().is_empty()
    }
}

/// Parses `key=value` pairs, as given on the command line.
pub fn parse_scale<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Scale, BenchError> {
    let mut scale = Scale::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| BenchError::BadScale(pair.to_string()))?;
        let v = v
            .trim()
            .parse()
            .map_err(|_| BenchError::BadScale(pair.to_string()))?;
        scale.insert(k.trim().to_string(), v);
    }
    Ok(scale)
}

fn n(s: &Scale) -> i64 {
    s["N"]
}

fn nu(s: &Scale) -> usize {
    s["N"] as usize
}

fn tri(s: &Scale) -> usize {
    nu(s) * nu(s).saturating_sub(1) / 2
}

fn array(values: Vec<i64>) -> ConcreteInput {
    ConcreteInput {
        scalars: vec![],
        arrays: vec![values],
    }
}

fn descending(s: &Scale) -> ConcreteInput {
    array((1..=n(s)).rev().collect())
}

fn ascending(s: &Scale) -> ConcreteInput {
    array((1..=n(s)).collect())
}

fn floor_log2_sum(s: &Scale) -> i64 {
    (1..=n(s)).map(|k| 63 - k.leading_zeros() as i64).sum()
}

/// Row-major `n × n` weights with `f(u, v)` off the diagonal.
fn weights(n: i64, f: impl Fn(i64, i64) -> i64) -> ConcreteInput {
    let mut w = Vec::with_capacity((n * n) as usize);
    for u in 0..n {
        for v in 0..n {
            w.push(if u == v { 2 * n } else { f(u, v) });
        }
    }
    array(w)
}

const SORT: &[ParamSpec] = &[p("N", 8, 1, 512)];
const HEAP: &[ParamSpec] = &[p("N", 16, 1, 4096)];
const GRAPH8: &[ParamSpec] = &[p("N", 8, 2, 64)];
const GRAPH10: &[ParamSpec] = &[p("N", 10, 2, 64)];
const HASH: &[ParamSpec] = &[p("N", 8, 1, 512), p("P", 13, 1, 512)];
const STRING: &[ParamSpec] = &[p("N", 16, 1, 4096), p("K", 256, 2, 1 << 20)];
const BYTES: &[ParamSpec] = &[p("N", 20, 1, 4096), p("V", 255, 1, 1 << 20)];

static REGISTRY: [Benchmark; 15] = [
    Benchmark {
        id: "1-1",
        name: "InsertionSort",
        cost_model: "one unit per element shift",
        max_note: "reverse-sorted input shifts every pair: N(N-1)/2",
        params: SORT,
        build: programs::insertion_sort,
        known_max: Some(|s| n(s) * (n(s) - 1) / 2),
        witness: Some(descending),
        max_bits: tri,
    },
    Benchmark {
        id: "1-2",
        name: "QuickSort",
        cost_model: "AddCost(N) on every call with N >= 2; first element as pivot, three-way partition",
        max_note: "sorted input peels one element per call: 2 + 3 + ... + N = N(N+1)/2 - 1",
        params: SORT,
        build: programs::quick_sort,
        known_max: Some(|s| n(s) * (n(s) + 1) / 2 - 1),
        witness: Some(ascending),
        max_bits: |s| nu(s) * nu(s).saturating_sub(1),
    },
    Benchmark {
        id: "1-3",
        name: "HeapInsertion",
        cost_model: "one unit per sift-up swap while inserting A[0..N] into a min-heap",
        max_note: "descending input sifts every new element to the root: sum of floor(log2 k), k = 1..N",
        params: HEAP,
        build: programs::heap_insertion,
        known_max: Some(floor_log2_sum),
        witness: Some(descending),
        max_bits: |s| floor_log2_sum(s) as usize,
    },
    Benchmark {
        id: "1-4",
        name: "Dijkstra",
        cost_model: "one unit per distance assignment, single source 0, complete digraph with weights in [1, 2N]",
        max_note: "every finished vertex improves all unfinished ones: N(N-1)/2",
        params: GRAPH8,
        build: programs::dijkstra,
        known_max: Some(|s| n(s) * (n(s) - 1) / 2),
        witness: Some(|s| {
            let n = n(s);
            weights(n, |u, v| if v == u + 1 { 1 } else if v > u + 1 { 2 * (n - u) } else { 2 * n })
        }),
        max_bits: |s| nu(s) * (nu(s) - 1),
    },
    Benchmark {
        id: "1-5",
        name: "BSTInsertion",
        cost_model: "one unit per key comparison while inserting A[0..N] into an unbalanced BST",
        max_note: "sorted input builds a chain: N(N-1)/2",
        params: SORT,
        build: programs::bst_insertion,
        known_max: Some(|s| n(s) * (n(s) - 1) / 2),
        witness: Some(ascending),
        max_bits: tri,
    },
    Benchmark {
        id: "1-6",
        name: "BellmanFord",
        cost_model: "one unit per edge visit; rounds stop early once nothing changes",
        max_note: "a chain 0 -> N-1 -> N-2 -> ... -> 1 advances one vertex per round, so all N-1 rounds run: (N-1) N (N-1)",
        params: GRAPH8,
        build: programs::bellman_ford,
        known_max: Some(|s| (n(s) - 1) * n(s) * (n(s) - 1)),
        witness: Some(|s| {
            let n = n(s);
            weights(n, |u, v| if (u == 0 && v == n - 1) || (u >= 2 && v == u - 1) { 1 } else { 2 * n })
        }),
        max_bits: |s| (nu(s) - 1) * nu(s) * (nu(s) - 1),
    },
    Benchmark {
        id: "1-7",
        name: "BellmanFordQueue",
        cost_model: "one unit per edge visit from a dequeued vertex (FIFO queue with membership flags)",
        max_note: "",
        params: GRAPH8,
        build: programs::bellman_ford_queue,
        known_max: None,
        witness: None,
        max_bits: |s| 4 * nu(s).pow(3),
    },
    Benchmark {
        id: "1-8",
        name: "HashTable",
        cost_model: "one unit per chain key comparison; bucket = value mod P chosen by an equality chain, duplicates skipped",
        max_note: "N distinct keys in one bucket: N(N-1)/2",
        params: HASH,
        build: programs::hash_table,
        known_max: Some(|s| n(s) * (n(s) - 1) / 2),
        witness: Some(|s| array((0..n(s)).map(|k| 1 + s["P"] * k).map(|x| x % (s["P"] * n(s))).collect())),
        max_bits: |s| nu(s) * (s["P"] as usize - 1) + tri(s),
    },
    Benchmark {
        id: "2-1",
        name: "InsertionSort'",
        cost_model: "one unit per loop-condition evaluation and per outer iteration",
        max_note: "reverse-sorted input: N outer tests, N-1 iterations, N^2 - 1 inner tests",
        params: SORT,
        build: programs::insertion_sort_jumps,
        known_max: Some(|s| n(s) * n(s) + 2 * n(s) - 2),
        witness: Some(descending),
        max_bits: tri,
    },
    Benchmark {
        id: "3-1",
        name: "IsPalindrome",
        cost_model: "one unit per character comparison; compares all N mirrored pairs, stops at a mismatch",
        max_note: "any palindrome: N",
        params: STRING,
        build: programs::is_palindrome,
        known_max: Some(n),
        witness: Some(|s| array(vec![0; nu(s)])),
        max_bits: nu,
    },
    Benchmark {
        id: "3-2",
        name: "IsPalindrome'",
        cost_model: "one unit per character comparison; compares the first floor(N/2) mirrored pairs",
        max_note: "any palindrome: floor(N/2)",
        params: STRING,
        build: programs::is_palindrome_half,
        known_max: Some(|s| n(s) / 2),
        witness: Some(|s| array(vec![0; nu(s)])),
        max_bits: |s| nu(s) / 2,
    },
    Benchmark {
        id: "3-3",
        name: "MemoryFill",
        cost_model: "one unit per nonzero element copied",
        max_note: "no zeros: N",
        params: BYTES,
        build: programs::memory_fill,
        known_max: Some(n),
        witness: Some(|s| array(vec![s["V"]; nu(s)])),
        max_bits: nu,
    },
    Benchmark {
        id: "3-4",
        name: "Alternate0",
        cost_model: "+6 when an element switches between zero and nonzero relative to the previous one (initially nonzero), +1 otherwise",
        max_note: "alternating 0 / nonzero starting with 0: 6N",
        params: BYTES,
        build: programs::alternate0,
        known_max: Some(|s| 6 * n(s)),
        witness: Some(|s| array((0..n(s)).map(|i| if i % 2 == 0 { 0 } else { s["V"] }).collect())),
        max_bits: nu,
    },
    Benchmark {
        id: "3-5",
        name: "DFS",
        cost_model: "one unit per adjacency check, N per expanded vertex, undirected graph from the upper triangle of E",
        max_note: "connected graph expands every vertex: N^2",
        params: GRAPH10,
        build: programs::dfs,
        known_max: Some(|s| n(s) * n(s)),
        witness: Some(|s| array(vec![1; nu(s) * nu(s)])),
        max_bits: tri,
    },
    Benchmark {
        id: "3-6",
        name: "BFS",
        cost_model: "one unit per adjacency check, N per dequeued vertex, undirected graph from the upper triangle of E",
        max_note: "connected graph dequeues every vertex: N^2",
        params: GRAPH10,
        build: programs::bfs,
        known_max: Some(|s| n(s) * n(s)),
        witness: Some(|s| array(vec![1; nu(s) * nu(s)])),
        max_bits: tri,
    },
];

pub fn registry() -> &'static [Benchmark] {
    &REGISTRY
}

/// Finds a benchmark by id (`1-2`) or name (`QuickSort`, case-insensitive).
pub fn lookup(key: &str) -> Result<&'static Benchmark, BenchError> {
    REGISTRY
        .iter()
        .find(|b| b.id == key || b.name.eq_ignore_ascii_case(key))
        .ok_or_else(|| BenchError::UnknownBenchmark(key.to_string()))
}

#[cfg(test)]
mod tests;
