//! Builders for the benchmark programs.

use super::Scale;
use crate::program::{ArrayHandle, Expr, Program, ProgramBuilder, ScalarHandle};

fn param(b: &mut ProgramBuilder, scale: &Scale, name: &str) -> i64 {
    b.param(name, scale[name])
}

/// Reads the undirected edge flag between concrete vertices `u` and `v`
/// from the upper triangle of the `n × n` matrix `e` into `out`.
fn read_edge(
    b: &mut ProgramBuilder,
    e: ArrayHandle,
    n: i64,
    u: ScalarHandle,
    v: ScalarHandle,
    out: ScalarHandle,
) {
    b.if_else(
        u.get().lt(v),
        |b| b.assign(out, e.at(u * n + v)),
        |b| b.assign(out, e.at(v * n + u)),
    );
}

pub(super) fn insertion_sort(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("InsertionSort");
    let n = param(&mut b, scale, "N");
    let a = b.input_array("A", n as usize, 1, n);
    let i = b.local("i");
    let j = b.local("j");
    let x = b.local("x");
    b.for_range(i, 1, n, |b| {
        b.assign(x, a.at(i));
        b.assign(j, i - 1);
        b.while_(j.get().ge(0).and_also(a.at(j).gt(x)).always_sat(), |b| {
            b.store(a, j + 1, a.at(j));
            b.add_cost(1);
            b.assign(j, j - 1);
        });
        b.store(a, j + 1, x);
    });
    b.build()
}

pub(super) fn quick_sort(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("QuickSort");
    let n = param(&mut b, scale, "N");
    let len = n as usize;
    let a = b.input_array("A", len, 1, n);
    let seg_lo = b.local_array("seg_lo", len + 2);
    let seg_len = b.local_array("seg_len", len + 2);
    let left = b.local_array("left", len);
    let mid = b.local_array("mid", len);
    let right = b.local_array("right", len);
    let sp = b.local("sp");
    let s = b.local("s");
    let m = b.local("m");
    let pivot = b.local("pivot");
    let v = b.local("v");
    let i = b.local("i");
    let nl = b.local("nl");
    let nm = b.local("nm");
    let nr = b.local("nr");

    // one stack frame per pending call QuickSort(A[s..s+m])
    b.store(seg_lo, 0, 0);
    b.store(seg_len, 0, n);
    b.assign(sp, 1);
    b.while_(sp.get().gt(0), |b| {
        b.assign(sp, sp - 1);
        b.assign(s, seg_lo.at(sp));
        b.assign(m, seg_len.at(sp));
        b.if_(m.get().ge(2), |b| {
            b.add_cost(m);
            b.assign(pivot, a.at(s));
            b.assign(nl, 0);
            b.store(mid, 0, a.at(s));
            b.assign(nm, 1);
            b.assign(nr, 0);
            b.for_range(i, 1, m, |b| {
                b.assign(v, a.at(s + i));
                b.if_else(
                    v.get().lt(pivot).always_sat(),
                    |b| {
                        b.store(left, nl, v);
                        b.assign(nl, nl + 1);
                    },
                    |b| {
                        b.if_else(
                            v.get().equals(pivot).always_sat(),
                            |b| {
                                b.store(mid, nm, v);
                                b.assign(nm, nm + 1);
                            },
                            |b| {
                                b.store(right, nr, v);
                                b.assign(nr, nr + 1);
                            },
                        )
                    },
                );
            });
            // A[s..] = left ++ mid ++ right
            b.for_range(i, 0, nl, |b| b.store(a, s + i, left.at(i)));
            b.for_range(i, 0, nm, |b| b.store(a, s + nl + i, mid.at(i)));
            b.for_range(i, 0, nr, |b| b.store(a, s + nl + nm + i, right.at(i)));
            // the left call runs first, so it goes on top
            b.store(seg_lo, sp, s + nl + nm);
            b.store(seg_len, sp, nr);
            b.store(seg_lo, sp + 1, s);
            b.store(seg_len, sp + 1, nl);
            b.assign(sp, sp + 2);
        });
    });
    b.build()
}

pub(super) fn heap_insertion(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("HeapInsertion");
    let n = param(&mut b, scale, "N");
    let a = b.input_array("A", n as usize, 1, n);
    let heap = b.local_array("heap", n as usize);
    let parent = b.local_array("parent", n as usize);
    let i = b.local("i");
    let k = b.local("k");
    let t = b.local("t");
    for c in 1..n {
        b.store(parent, c, (c - 1) / 2);
    }
    b.for_range(i, 0, n, |b| {
        b.store(heap, i, a.at(i));
        b.assign(k, i);
        b.while_(
            k.get().gt(0).and_also(heap.at(parent.at(k)).gt(heap.at(k))),
            |b| {
                b.assign(t, heap.at(k));
                b.store(heap, k, heap.at(parent.at(k)));
                b.store(heap, parent.at(k), t);
                b.add_cost(1);
                b.assign(k, parent.at(k));
            },
        );
    });
    b.build()
}

pub(super) fn dijkstra(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("Dijkstra");
    let n = param(&mut b, scale, "N");
    let w = b.input_array("W", (n * n) as usize, 1, 2 * n);
    let dist = b.local_array("dist", n as usize);
    let known = b.local_array("known", n as usize);
    let done = b.local_array("done", n as usize);
    let it = b.local("it");
    let u = b.local("u");
    let v = b.local("v");
    b.store(known, 0, 1);
    b.for_range(it, 0, n, |b| {
        // closest reached vertex not yet finished
        b.assign(u, -1);
        b.for_range(v, 0, n, |b| {
            b.if_(done.at(v).equals(0).and_also(known.at(v).equals(1)), |b| {
                b.if_else(
                    u.get().lt(0),
                    |b| b.assign(u, v),
                    |b| b.if_(dist.at(v).lt(dist.at(u)), |b| b.assign(u, v)),
                );
            });
        });
        b.if_(u.get().ge(0), |b| {
            b.store(done, u, 1);
            b.for_range(v, 0, n, |b| {
                b.if_(done.at(v).equals(0), |b| {
                    b.if_else(
                        known.at(v).equals(0),
                        |b| {
                            b.store(dist, v, dist.at(u) + w.at(u * n + v));
                            b.store(known, v, 1);
                            b.add_cost(1);
                        },
                        |b| {
                            b.if_((dist.at(u) + w.at(u * n + v)).lt(dist.at(v)), |b| {
                                b.store(dist, v, dist.at(u) + w.at(u * n + v));
                                b.add_cost(1);
                            });
                        },
                    );
                });
            });
        });
    });
    b.build()
}

pub(super) fn bst_insertion(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("BSTInsertion");
    let n = param(&mut b, scale, "N");
    let len = n as usize;
    let a = b.input_array("A", len, 1, n);
    let key = b.local_array("key", len);
    let lc = b.local_array("lc", len);
    let rc = b.local_array("rc", len);
    let i = b.local("i");
    let cur = b.local("cur");
    let placed = b.local("placed");
    b.for_range(i, 0, n, |b| {
        b.store(lc, i, -1);
        b.store(rc, i, -1);
    });
    b.store(key, 0, a.at(0));
    b.for_range(i, 1, n, |b| {
        b.store(key, i, a.at(i));
        b.assign(cur, 0);
        b.assign(placed, 0);
        b.while_(placed.get().equals(0), |b| {
            b.add_cost(1);
            b.if_else(
                a.at(i).lt(key.at(cur)),
                |b| {
                    b.if_else(
                        lc.at(cur).lt(0),
                        |b| {
                            b.store(lc, cur, i);
                            b.assign(placed, 1);
                        },
                        |b| b.assign(cur, lc.at(cur)),
                    )
                },
                |b| {
                    b.if_else(
                        rc.at(cur).lt(0),
                        |b| {
                            b.store(rc, cur, i);
                            b.assign(placed, 1);
                        },
                        |b| b.assign(cur, rc.at(cur)),
                    )
                },
            );
        });
    });
    b.build()
}

pub(super) fn bellman_ford(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("BellmanFord");
    let n = param(&mut b, scale, "N");
    let w = b.input_array("W", (n * n) as usize, 1, 2 * n);
    let dist = b.local_array("dist", n as usize);
    let known = b.local_array("known", n as usize);
    let round = b.local("round");
    let changed = b.local("changed");
    let u = b.local("u");
    let v = b.local("v");
    b.store(known, 0, 1);
    b.assign(changed, 1);
    b.while_(
        round.get().lt(n - 1).and_also(changed.get().equals(1)),
        |b| {
            b.assign(changed, 0);
            b.for_range(u, 0, n, |b| {
                b.for_range(v, 0, n, |b| {
                    b.if_(u.get().differs(v), |b| {
                        b.add_cost(1);
                        b.if_(known.at(u).equals(1), |b| {
                            b.if_else(
                                known.at(v).equals(0),
                                |b| {
                                    b.store(dist, v, dist.at(u) + w.at(u * n + v));
                                    b.store(known, v, 1);
                                    b.assign(changed, 1);
                                },
                                |b| {
                                    b.if_((dist.at(u) + w.at(u * n + v)).lt(dist.at(v)), |b| {
                                        b.store(dist, v, dist.at(u) + w.at(u * n + v));
                                        b.assign(changed, 1);
                                    });
                                },
                            );
                        });
                    });
                });
            });
            b.assign(round, round + 1);
        },
    );
    b.build()
}

pub(super) fn bellman_ford_queue(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("BellmanFordQueue");
    let n = param(&mut b, scale, "N");
    let w = b.input_array("W", (n * n) as usize, 1, 2 * n);
    let dist = b.local_array("dist", n as usize);
    let known = b.local_array("known", n as usize);
    let inq = b.local_array("inq", n as usize);
    let queue = b.local_array("queue", n as usize);
    let head = b.local("head");
    let size = b.local("size");
    let u = b.local("u");
    let v = b.local("v");
    let relax = b.local("relax");
    b.store(known, 0, 1);
    b.store(queue, 0, 0);
    b.store(inq, 0, 1);
    b.assign(size, 1);
    b.while_(size.get().gt(0), |b| {
        b.assign(u, queue.at(head));
        b.assign(head, (head + 1).modulo(n));
        b.assign(size, size - 1);
        b.store(inq, u, 0);
        b.for_range(v, 0, n, |b| {
            b.if_(u.get().differs(v), |b| {
                b.add_cost(1);
                b.assign(relax, 0);
                b.if_else(
                    known.at(v).equals(0),
                    |b| b.assign(relax, 1),
                    |b| {
                        b.if_((dist.at(u) + w.at(u * n + v)).lt(dist.at(v)), |b| {
                            b.assign(relax, 1)
                        })
                    },
                );
                b.if_(relax.get().equals(1), |b| {
                    b.store(dist, v, dist.at(u) + w.at(u * n + v));
                    b.store(known, v, 1);
                    b.if_(inq.at(v).equals(0), |b| {
                        b.store(queue, (head + size).modulo(n), v);
                        b.assign(size, size + 1);
                        b.store(inq, v, 1);
                    });
                });
            });
        });
    });
    b.build()
}

pub(super) fn hash_table(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("HashTable");
    let n = param(&mut b, scale, "N");
    let p = param(&mut b, scale, "P");
    let a = b.input_array("A", n as usize, 0, p * n - 1);
    let keys = b.local_array("keys", n as usize);
    let next = b.local_array("next", n as usize);
    let head = b.local_array("head", p as usize);
    let i = b.local("i");
    let x = b.local("x");
    let bucket = b.local("bucket");
    let cur = b.local("cur");
    let found = b.local("found");
    let size = b.local("size");
    b.for_range(i, 0, p, |b| b.store(head, i, -1));
    b.for_range(i, 0, n, |b| {
        b.assign(x, a.at(i));
        select_bucket(b, x, p, bucket, 0);
        b.assign(cur, head.at(bucket));
        b.assign(found, 0);
        b.while_(cur.get().ge(0).and_also(found.get().equals(0)), |b| {
            b.add_cost(1);
            b.if_else(
                keys.at(cur).equals(x),
                |b| b.assign(found, 1),
                |b| b.assign(cur, next.at(cur)),
            );
        });
        b.if_(found.get().equals(0), |b| {
            b.store(keys, size, x);
            b.store(next, size, head.at(bucket));
            b.store(head, bucket, size);
            b.assign(size, size + 1);
        });
    });
    b.build()
}

/// `bucket = x mod p` as a chain of equality tests, one per bucket.
fn select_bucket(b: &mut ProgramBuilder, x: ScalarHandle, p: i64, bucket: ScalarHandle, k: i64) {
    if k == p - 1 {
        b.assign(bucket, k);
        return;
    }
    b.if_else(
        x.get().modulo(p).equals(k),
        |b| b.assign(bucket, k),
        |b| select_bucket(b, x, p, bucket, k + 1),
    );
}

pub(super) fn insertion_sort_jumps(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("InsertionSort'");
    let n = param(&mut b, scale, "N");
    let a = b.input_array("A", n as usize, 1, n);
    let i = b.local("i");
    let j = b.local("j");
    let x = b.local("x");
    let scan = b.local("scan");
    // one unit per evaluated loop condition and per outer iteration
    b.assign(i, 1);
    b.add_cost(1);
    b.while_(i.get().lt(n), |b| {
        b.add_cost(1);
        b.assign(x, a.at(i));
        b.assign(j, i - 1);
        b.assign(scan, 1);
        b.add_cost(1);
        b.while_(scan.get().equals(1), |b| {
            b.if_else(
                j.get().ge(0),
                |b| {
                    b.add_cost(1);
                    b.if_else(
                        a.at(j).gt(x),
                        |b| {
                            b.store(a, j + 1, a.at(j));
                            b.assign(j, j - 1);
                            b.add_cost(1);
                        },
                        |b| b.assign(scan, 0),
                    );
                },
                |b| b.assign(scan, 0),
            );
        });
        b.store(a, j + 1, x);
        b.assign(i, i + 1);
        b.add_cost(1);
    });
    b.build()
}

pub(super) fn is_palindrome(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("IsPalindrome");
    let n = param(&mut b, scale, "N");
    let k = param(&mut b, scale, "K");
    let s = b.input_array("S", n as usize, 0, k - 1);
    let i = b.local("i");
    let ok = b.local("ok");
    b.assign(ok, 1);
    b.while_(i.get().lt(n).and_also(ok.get().equals(1)), |b| {
        b.add_cost(1);
        b.if_else(
            s.at(i).equals(s.at(Expr::from(n - 1) - i)),
            |b| b.assign(i, i + 1),
            |b| b.assign(ok, 0),
        );
    });
    b.build()
}

pub(super) fn is_palindrome_half(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("IsPalindrome'");
    let n = param(&mut b, scale, "N");
    let k = param(&mut b, scale, "K");
    let s = b.input_array("S", n as usize, 0, k - 1);
    let i = b.local("i");
    let ok = b.local("ok");
    b.assign(ok, 1);
    b.while_(i.get().lt(n / 2).and_also(ok.get().equals(1)), |b| {
        b.add_cost(1);
        b.if_else(
            s.at(i).equals(s.at(Expr::from(n - 1) - i)).always_sat(),
            |b| b.assign(i, i + 1),
            |b| b.assign(ok, 0),
        );
    });
    b.build()
}

pub(super) fn memory_fill(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("MemoryFill");
    let n = param(&mut b, scale, "N");
    let v = param(&mut b, scale, "V");
    let src = b.input_array("SRC", n as usize, 0, v);
    let dst = b.local_array("dst", n as usize);
    let i = b.local("i");
    b.for_range(i, 0, n, |b| {
        b.if_(src.at(i).differs(0).always_sat(), |b| {
            b.store(dst, i, src.at(i));
            b.add_cost(1);
        });
    });
    b.build()
}

pub(super) fn alternate0(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("Alternate0");
    let n = param(&mut b, scale, "N");
    let v = param(&mut b, scale, "V");
    let a = b.input_array("A", n as usize, 0, v);
    let i = b.local("i");
    let prev_zero = b.local("prev_zero");
    // switching between zero and nonzero runs is expensive
    b.for_range(i, 0, n, |b| {
        b.if_else(
            a.at(i).equals(0).always_sat(),
            |b| {
                b.if_else(
                    prev_zero.get().equals(0),
                    |b| b.add_cost(6),
                    |b| b.add_cost(1),
                );
                b.assign(prev_zero, 1);
            },
            |b| {
                b.if_else(
                    prev_zero.get().equals(1),
                    |b| b.add_cost(6),
                    |b| b.add_cost(1),
                );
                b.assign(prev_zero, 0);
            },
        );
    });
    b.build()
}

pub(super) fn dfs(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("DFS");
    let n = param(&mut b, scale, "N");
    let len = n as usize;
    let e = b.input_array("E", len * len, 0, 1);
    let visited = b.local_array("visited", len);
    let st_u = b.local_array("st_u", len);
    let st_next = b.local_array("st_next", len);
    let sp = b.local("sp");
    let u = b.local("u");
    let v = b.local("v");
    let edge = b.local("edge");
    b.store(visited, 0, 1);
    b.store(st_u, 0, 0);
    b.store(st_next, 0, 0);
    b.assign(sp, 1);
    b.while_(sp.get().gt(0), |b| {
        b.assign(u, st_u.at(sp - 1));
        b.assign(v, st_next.at(sp - 1));
        b.if_else(
            v.get().lt(n),
            |b| {
                b.store(st_next, sp - 1, v + 1);
                b.add_cost(1);
                b.if_(u.get().differs(v).and_also(visited.at(v).equals(0)), |b| {
                    read_edge(b, e, n, u, v, edge);
                    b.if_(edge.get().equals(1), |b| {
                        b.store(visited, v, 1);
                        b.store(st_u, sp, v);
                        b.store(st_next, sp, 0);
                        b.assign(sp, sp + 1);
                    });
                });
            },
            |b| b.assign(sp, sp - 1),
        );
    });
    b.build()
}

pub(super) fn bfs(scale: &Scale) -> Program {
    let mut b = ProgramBuilder::new("BFS");
    let n = param(&mut b, scale, "N");
    let len = n as usize;
    let e = b.input_array("E", len * len, 0, 1);
    let visited = b.local_array("visited", len);
    let queue = b.local_array("queue", len);
    let head = b.local("head");
    let tail = b.local("tail");
    let u = b.local("u");
    let v = b.local("v");
    let edge = b.local("edge");
    b.store(visited, 0, 1);
    b.store(queue, 0, 0);
    b.assign(tail, 1);
    b.while_(head.get().lt(tail), |b| {
        b.assign(u, queue.at(head));
        b.assign(head, head + 1);
        b.for_range(v, 0, n, |b| {
            b.add_cost(1);
            b.if_(u.get().differs(v).and_also(visited.at(v).equals(0)), |b| {
                read_edge(b, e, n, u, v, edge);
                b.if_(edge.get().equals(1), |b| {
                    b.store(visited, v, 1);
                    b.store(queue, tail, v);
                    b.assign(tail, tail + 1);
                });
            });
        });
    });
    b.build()
}
