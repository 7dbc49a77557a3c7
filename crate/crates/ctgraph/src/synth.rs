//! Seeded synthetic graph generators for tests, statistics runs, and the
//! linear-scaling benchmark.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::kg::{EntityId, KnowledgeGraph, KnowledgeGraphBuilder};

/// Directed Erdos-Renyi-style graph: every ordered pair (u, v), u != v,
/// carries an edge with probability `p`, labeled with a uniformly chosen
/// relation. All `n` entities are interned even when isolated.
pub fn erdos_renyi_kg(n: usize, p: f64, num_relations: usize, seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut builder = KnowledgeGraphBuilder::new();
    for u in 0..n {
        builder.intern_entity(&format!("n{u}"));
    }
    for r in 0..num_relations.max(1) {
        builder.intern_relation(&format!("rel{r}"));
    }
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            if rng.gen::<f64>() < p {
                let r = rng.gen_range(0..num_relations.max(1));
                builder.add_triple(&format!("n{u}"), &format!("rel{r}"), &format!("n{v}"));
            }
        }
    }
    builder.build()
}

/// A layered source-to-target graph used by the benchmark: `s`, then
/// `inner_layers` fully-connected layers of `width` nodes, then `t`.
/// Every edge lies on an s->t path of length `inner_layers + 1`, so the
/// whole graph is its own transition graph for `k >= inner_layers + 1`.
/// Edge count: `2 * width + (inner_layers - 1) * width^2`.
pub fn layered_kg(
    width: usize,
    inner_layers: usize,
    num_relations: usize,
) -> (KnowledgeGraph, EntityId, EntityId) {
    assert!(width >= 1 && inner_layers >= 1);
    let mut builder = KnowledgeGraphBuilder::new();
    let rel = |i: usize| format!("rel{}", i % num_relations.max(1));
    let node = |layer: usize, i: usize| format!("L{layer}_{i}");
    let mut edge_idx = 0usize;
    for i in 0..width {
        builder.add_triple("s", &rel(edge_idx), &node(1, i));
        edge_idx += 1;
    }
    for layer in 1..inner_layers {
        for i in 0..width {
            for j in 0..width {
                builder.add_triple(&node(layer, i), &rel(edge_idx), &node(layer + 1, j));
                edge_idx += 1;
            }
        }
    }
    for i in 0..width {
        builder.add_triple(&node(inner_layers, i), &rel(edge_idx), "t");
        edge_idx += 1;
    }
    let kg = builder.build();
    let s = kg.entity_id("s").unwrap();
    let t = kg.entity_id("t").unwrap();
    (kg, s, t)
}

/// Width whose layered graph (3 inner layers) has roughly `target_edges`
/// edges: solves `2w + 2w^2 = m`.
pub fn layered_width_for_edges(target_edges: usize) -> usize {
    let m = target_edges as f64;
    (((1.0 + 2.0 * m).sqrt() - 1.0) / 2.0).round().max(1.0) as usize
}

/// Deterministically picks up to `count` (s, t) pairs with distinct
/// endpoints from the graph's entities.
pub fn sample_pairs(kg: &KnowledgeGraph, count: usize, seed: u64) -> Vec<(EntityId, EntityId)> {
    let n = kg.num_entities();
    if n < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while pairs.len() < count && attempts < count * 50 {
        attempts += 1;
        let s = rng.gen_range(0..n) as u32;
        let t = rng.gen_range(0..n) as u32;
        if s == t {
            continue;
        }
        let pair = (EntityId(s), EntityId(t));
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_is_seeded() {
        let a = erdos_renyi_kg(15, 0.2, 3, 7);
        let b = erdos_renyi_kg(15, 0.2, 3, 7);
        assert_eq!(a.num_triples(), b.num_triples());
        assert_eq!(a.num_entities(), 15);
        let ta: Vec<_> = a.triples().collect();
        let tb: Vec<_> = b.triples().collect();
        assert_eq!(ta, tb);
    }

    #[test]
    fn erdos_renyi_extremes() {
        let empty = erdos_renyi_kg(10, 0.0, 2, 1);
        assert_eq!(empty.num_triples(), 0);
        let full = erdos_renyi_kg(10, 1.0, 2, 1);
        assert_eq!(full.num_triples(), 90);
    }

    #[test]
    fn layered_edge_count_formula() {
        let (kg, s, t) = layered_kg(5, 3, 4);
        assert_eq!(kg.num_triples(), 2 * 5 + 2 * 25);
        assert_ne!(s, t);
    }

    #[test]
    fn layered_width_solves_edge_target() {
        for &m in &[1000usize, 2000, 4000, 8000] {
            let w = layered_width_for_edges(m);
            let actual = 2 * w + 2 * w * w;
            let err = (actual as f64 - m as f64).abs() / m as f64;
            assert!(err < 0.15, "width {w} gives {actual} edges for target {m}");
        }
    }

    #[test]
    fn sampled_pairs_are_distinct_and_seeded() {
        let kg = erdos_renyi_kg(12, 0.3, 2, 3);
        let a = sample_pairs(&kg, 10, 9);
        let b = sample_pairs(&kg, 10, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|(s, t)| s != t));
    }
}
