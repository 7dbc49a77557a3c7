//! Brute-force reference oracles used by the `ctgraph` test suites.
//!
//! Everything here works on plain `(u, r, v)` edge triples over `u32` node
//! ids and deliberately shares no code with the library under test: walks and
//! paths are enumerated by exhaustive depth-first recursion, distances by
//! exhaustive search, linear algebra by scalar loops.

use std::collections::{BTreeMap, BTreeSet};

/// A directed labeled edge `(u, r, v)`.
pub type Edge = (u32, u32, u32);

fn out_edges(edges: &[Edge], u: u32) -> Vec<Edge> {
    let mut es: Vec<Edge> = edges.iter().copied().filter(|e| e.0 == u).collect();
    es.sort_unstable();
    es
}

/// Every edge that lies on at least one walk `s -> ... -> t` of length <= k.
///
/// Exhaustive DFS over walks (node revisits allowed); whenever the walk sits
/// on `t`, all edges traversed so far are marked.
pub fn walk_edge_cover(edges: &[Edge], s: u32, t: u32, k: usize) -> BTreeSet<Edge> {
    let mut covered = BTreeSet::new();
    let mut stack: Vec<Edge> = Vec::new();
    fn go(
        edges: &[Edge],
        node: u32,
        t: u32,
        remaining: usize,
        stack: &mut Vec<Edge>,
        covered: &mut BTreeSet<Edge>,
    ) {
        if node == t && !stack.is_empty() {
            for e in stack.iter() {
                covered.insert(*e);
            }
        }
        if remaining == 0 {
            return;
        }
        for e in out_edges(edges, node) {
            stack.push(e);
            go(edges, e.2, t, remaining - 1, stack, covered);
            stack.pop();
        }
    }
    go(edges, s, t, k, &mut stack, &mut covered);
    covered
}

/// All simple `s -> t` paths of length <= k, as edge sequences.
///
/// Returns `(paths, truncated)`; enumeration stops once `cap` paths have
/// been collected.
pub fn simple_paths(edges: &[Edge], s: u32, t: u32, k: usize, cap: usize) -> (Vec<Vec<Edge>>, bool) {
    let mut out = Vec::new();
    let mut truncated = false;
    let mut stack: Vec<Edge> = Vec::new();
    let mut visited: BTreeSet<u32> = BTreeSet::new();
    visited.insert(s);
    fn go(
        edges: &[Edge],
        node: u32,
        t: u32,
        remaining: usize,
        stack: &mut Vec<Edge>,
        visited: &mut BTreeSet<u32>,
        out: &mut Vec<Vec<Edge>>,
        cap: usize,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        if node == t && !stack.is_empty() {
            if out.len() == cap {
                *truncated = true;
            } else {
                out.push(stack.clone());
            }
            return;
        }
        if remaining == 0 {
            return;
        }
        for e in out_edges(edges, node) {
            if visited.contains(&e.2) && e.2 != t {
                continue;
            }
            stack.push(e);
            let added = visited.insert(e.2);
            go(edges, e.2, t, remaining - 1, stack, visited, out, cap, truncated);
            if added {
                visited.remove(&e.2);
            }
            stack.pop();
        }
    }
    go(edges, s, t, k, &mut stack, &mut visited, &mut out, cap, &mut truncated);
    (out, truncated)
}

/// Shortest distance from `root` to every node reachable within `k` hops,
/// found by exhaustive enumeration of simple walks up to length `k`.
///
/// With `reverse` set, edges are followed backwards (distance TO `root`).
pub fn shortest_distances(edges: &[Edge], root: u32, k: usize, reverse: bool) -> BTreeMap<u32, usize> {
    let oriented: Vec<Edge> = if reverse {
        edges.iter().map(|&(u, r, v)| (v, r, u)).collect()
    } else {
        edges.to_vec()
    };
    let mut best: BTreeMap<u32, usize> = BTreeMap::new();
    best.insert(root, 0);
    let mut visited: BTreeSet<u32> = BTreeSet::new();
    visited.insert(root);
    fn go(
        edges: &[Edge],
        node: u32,
        depth: usize,
        k: usize,
        visited: &mut BTreeSet<u32>,
        best: &mut BTreeMap<u32, usize>,
    ) {
        if depth == k {
            return;
        }
        for e in out_edges(edges, node) {
            if visited.contains(&e.2) {
                continue;
            }
            let d = depth + 1;
            let cur = best.get(&e.2).copied();
            if cur.map_or(true, |c| d < c) {
                best.insert(e.2, d);
            }
            visited.insert(e.2);
            go(edges, e.2, d, k, visited, best);
            visited.remove(&e.2);
        }
    }
    go(&oriented, root, 0, k, &mut visited, &mut best);
    best
}

/// `W * x` by scalar triple loop, `w` row-major with shape `(rows, cols)`.
pub fn matvec_naive(w: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), rows * cols);
    assert_eq!(x.len(), cols);
    let mut y = vec![0.0; rows];
    for i in 0..rows {
        let mut acc = 0.0;
        for j in 0..cols {
            acc += w[i * cols + j] * x[j];
        }
        y[i] = acc;
    }
    y
}

/// Scalar-loop L2 norm.
pub fn l2_norm_naive(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for v in x {
        acc += v * v;
    }
    acc.sqrt()
}

/// Scalar-loop dot product.
pub fn dot_naive(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Central finite difference of `f` at `x0` with step `h`.
pub fn central_diff(mut f: impl FnMut(f64) -> f64, x0: f64, h: f64) -> f64 {
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Relative error of `analytic` against the reference value `numeric`.
///
/// Both magnitudes below `atol` count as an exact match.
pub fn relative_error(analytic: f64, numeric: f64, atol: f64) -> f64 {
    if analytic.abs() < atol && numeric.abs() < atol {
        0.0
    } else {
        (analytic - numeric).abs() / numeric.abs().max(atol)
    }
}
