//! Condensation of a transition graph: one condensed path per edge.
//!
//! Two BFS shortest-path trees are built inside the transition graph, one
//! rooted at `s` over forward edges and one rooted at `t` over reverse
//! edges. The condensed path for an edge `(u, r, v)` is then the canonical
//! shortest `s -> u` segment, the edge itself, and the canonical shortest
//! `v -> t` segment. The number of condensed paths equals the number of
//! transition-graph edges, so the whole construction stays linear in the
//! edge count for a fixed hop bound.
//!
//! Condensed paths are walks: nodes may repeat across the three segments.
//! Forbidding revisits would break the per-edge construction.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId};
use crate::transition::{enumerate_paths, Path, TgEdge, TransitionGraph};

/// Which way a shortest-path tree points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeDirection {
    /// Rooted at the source; parent(v) is the predecessor on a shortest
    /// root -> v path.
    FromSource,
    /// Rooted at the target; parent(v) is the successor on a shortest
    /// v -> root path.
    ToTarget,
}

/// Segment-selection strategy for condensed-path prefixes and suffixes.
/// Only shortest-path search is implemented; fattest-path search would need
/// an edge-capacity definition that plain knowledge graphs do not carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SegmentStrategy {
    #[default]
    Shortest,
}

/// BFS shortest-path tree inside a transition graph.
///
/// Ties are broken toward the parent with the smallest entity id, then the
/// smallest relation id, so the tree is a pure function of the graph.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    root: EntityId,
    direction: TreeDirection,
    parent: BTreeMap<EntityId, (EntityId, RelationId)>,
    depth: BTreeMap<EntityId, usize>,
}

impl ShortestPathTree {
    pub fn root(&self) -> EntityId {
        self.root
    }

    pub fn direction(&self) -> TreeDirection {
        self.direction
    }

    pub fn depth(&self, node: EntityId) -> Option<usize> {
        self.depth.get(&node).copied()
    }

    pub fn parent(&self, node: EntityId) -> Option<(EntityId, RelationId)> {
        self.parent.get(&node).copied()
    }

    /// The canonical shortest segment between `node` and the root:
    /// root -> node for a from-source tree, node -> root for a to-target
    /// tree. `node == root` yields the empty segment.
    pub fn segment(&self, node: EntityId) -> Result<Segment> {
        if !self.depth.contains_key(&node) {
            return Err(Error::Precondition(format!(
                "node {} is not in the shortest-path tree",
                node.0
            )));
        }
        let mut chain_nodes = vec![node];
        let mut chain_rels = Vec::new();
        let mut cur = node;
        while let Some(&(p, r)) = self.parent.get(&cur) {
            chain_nodes.push(p);
            chain_rels.push(r);
            cur = p;
        }
        match self.direction {
            TreeDirection::FromSource => {
                chain_nodes.reverse();
                chain_rels.reverse();
            }
            TreeDirection::ToTarget => {}
        }
        Ok(Segment {
            nodes: chain_nodes,
            relations: chain_rels,
        })
    }
}

/// Breadth-first shortest-path tree from `root` inside the transition graph.
pub fn shortest_path_tree(
    tg: &TransitionGraph,
    root: EntityId,
    direction: TreeDirection,
) -> Result<ShortestPathTree> {
    if !tg.contains_node(root) {
        return Err(Error::Precondition(format!(
            "root {} is not a transition-graph node",
            root.0
        )));
    }
    let mut parent = BTreeMap::new();
    let mut depth = BTreeMap::new();
    depth.insert(root, 0usize);
    // Layers are processed in ascending node order; the first discoverer of
    // a node is therefore its smallest-id minimal-depth parent, and sorted
    // adjacency hands us the smallest relation id for that parent.
    let mut frontier = vec![root];
    let mut d = 0usize;
    while !frontier.is_empty() {
        d += 1;
        let mut next_frontier = Vec::new();
        for &node in &frontier {
            let adjacency = match direction {
                TreeDirection::FromSource => tg.forward_local(node),
                TreeDirection::ToTarget => tg.reverse_local(node),
            };
            for &(r, next) in adjacency {
                if !depth.contains_key(&next) {
                    depth.insert(next, d);
                    parent.insert(next, (node, r));
                    next_frontier.push(next);
                }
            }
        }
        next_frontier.sort_unstable();
        next_frontier.dedup();
        frontier = next_frontier;
    }
    Ok(ShortestPathTree {
        root,
        direction,
        parent,
        depth,
    })
}

/// A contiguous run of steps; empty segments hold a single anchor node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    nodes: Vec<EntityId>,
    relations: Vec<RelationId>,
}

impl Segment {
    pub fn empty(at: EntityId) -> Self {
        Self {
            nodes: vec![at],
            relations: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn relations(&self) -> &[RelationId] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = TgEdge> + '_ {
        self.relations
            .iter()
            .enumerate()
            .map(move |(i, &r)| (self.nodes[i], r, self.nodes[i + 1]))
    }
}

/// The condensed path associated with one transition-graph edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondensedPath {
    pub via: TgEdge,
    pub prefix: Segment,
    pub suffix: Segment,
    pub total_length: usize,
}

impl CondensedPath {
    /// The full s -> t walk: prefix, via edge, suffix.
    pub fn walk(&self) -> (Vec<EntityId>, Vec<RelationId>) {
        let (u, r, v) = self.via;
        let mut nodes = self.prefix.nodes.clone();
        debug_assert_eq!(nodes.last(), Some(&u));
        let mut rels = self.prefix.relations.clone();
        rels.push(r);
        nodes.push(v);
        nodes.extend_from_slice(&self.suffix.nodes[1..]);
        rels.extend_from_slice(&self.suffix.relations);
        (nodes, rels)
    }

    /// Every edge used by the walk, via edge included.
    pub fn edges(&self) -> impl Iterator<Item = TgEdge> + '_ {
        self.prefix
            .edges()
            .chain(std::iter::once(self.via))
            .chain(self.suffix.edges())
    }
}

/// The condensed transition graph: one condensed path per edge.
#[derive(Clone, Debug)]
pub struct CondensedGraph {
    pub source: EntityId,
    pub target: EntityId,
    pub k: usize,
    pub paths: Vec<CondensedPath>,
}

impl CondensedGraph {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn via_edges(&self) -> impl Iterator<Item = TgEdge> + '_ {
        self.paths.iter().map(|p| p.via)
    }
}

/// Builds the condensed graph. An empty transition graph condenses to an
/// empty condensed graph.
pub fn build_condensed_graph(tg: &TransitionGraph) -> Result<CondensedGraph> {
    if tg.is_empty() {
        return Ok(CondensedGraph {
            source: tg.source(),
            target: tg.target(),
            k: tg.k(),
            paths: Vec::new(),
        });
    }
    let source_tree = shortest_path_tree(tg, tg.source(), TreeDirection::FromSource)?;
    let target_tree = shortest_path_tree(tg, tg.target(), TreeDirection::ToTarget)?;
    let mut paths = Vec::with_capacity(tg.num_edges());
    for &(u, r, v) in tg.edges() {
        let prefix = source_tree.segment(u)?;
        let suffix = target_tree.segment(v)?;
        let total_length = prefix.len() + 1 + suffix.len();
        debug_assert!(total_length <= tg.k());
        paths.push(CondensedPath {
            via: (u, r, v),
            prefix,
            suffix,
            total_length,
        });
    }
    Ok(CondensedGraph {
        source: tg.source(),
        target: tg.target(),
        k: tg.k(),
        paths,
    })
}

/// Coverage of the transition graph and of oracle-enumerated paths by the
/// condensed graph.
#[derive(Clone, Copy, Debug)]
pub struct CoverageStats {
    /// Fraction of transition-graph edges used by at least one condensed path.
    pub edge_coverage: f64,
    /// Fraction of distinct oracle-path edges covered by the union of
    /// condensed-path edges.
    pub oracle_edge_coverage: f64,
    /// True when every oracle path decomposes edge-by-edge into condensed paths.
    pub all_paths_decomposable: bool,
    pub oracle_paths: usize,
}

/// Compares a condensed graph against oracle-enumerated paths of the same
/// transition graph.
pub fn coverage_report(
    tg: &TransitionGraph,
    cg: &CondensedGraph,
    oracle_paths: &[Path],
) -> Result<CoverageStats> {
    if cg.source != tg.source() || cg.target != tg.target() || cg.k != tg.k() {
        return Err(Error::Precondition(
            "condensed graph and transition graph disagree on (s, t, k)".into(),
        ));
    }
    let covered: std::collections::BTreeSet<TgEdge> =
        cg.paths.iter().flat_map(|p| p.edges()).collect();
    let total_edges = tg.num_edges();
    let covered_tg = tg.edges().iter().filter(|e| covered.contains(e)).count();
    let edge_coverage = if total_edges == 0 {
        1.0
    } else {
        covered_tg as f64 / total_edges as f64
    };

    let oracle_edges: std::collections::BTreeSet<TgEdge> =
        oracle_paths.iter().flat_map(|p| p.edges()).collect();
    let covered_oracle = oracle_edges.iter().filter(|e| covered.contains(*e)).count();
    let oracle_edge_coverage = if oracle_edges.is_empty() {
        1.0
    } else {
        covered_oracle as f64 / oracle_edges.len() as f64
    };
    let all_paths_decomposable = oracle_paths
        .iter()
        .all(|p| p.edges().all(|e| covered.contains(&e)));

    Ok(CoverageStats {
        edge_coverage,
        oracle_edge_coverage,
        all_paths_decomposable,
        oracle_paths: oracle_paths.len(),
    })
}

/// Enumerated-versus-condensed path counts for one transition graph.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct PathCountStats {
    pub enumerated: usize,
    pub truncated: bool,
    pub condensed: usize,
    /// enumerated / condensed; 0 when the graph is empty.
    pub ratio: f64,
}

/// Counts oracle-enumerated paths (up to `cap`) against condensed paths.
/// The condensed count always equals the transition-graph edge count.
pub fn path_count_stats(
    tg: &TransitionGraph,
    cg: &CondensedGraph,
    cap: usize,
) -> Result<PathCountStats> {
    let e = enumerate_paths(tg, cap)?;
    let condensed = cg.paths.len();
    let enumerated = e.paths.len();
    let ratio = if condensed == 0 {
        0.0
    } else {
        enumerated as f64 / condensed as f64
    };
    Ok(PathCountStats {
        enumerated,
        truncated: e.truncated,
        condensed,
        ratio,
    })
}

fn segment_text(seg: &Segment, kg: &KnowledgeGraph) -> Result<String> {
    if seg.is_empty() {
        return Ok("-".to_owned());
    }
    let mut parts = Vec::with_capacity(seg.nodes.len() + seg.relations.len());
    for (i, &n) in seg.nodes.iter().enumerate() {
        parts.push(kg.entity_name(n)?.to_owned());
        if let Some(&r) = seg.relations.get(i) {
            parts.push(kg.relation_name(r)?.to_owned());
        }
    }
    Ok(parts.join(" "))
}

/// Writes the condensed-graph serialization: a `s<TAB>t<TAB>k` header, then
/// one `via<TAB>u r v<TAB>prefix-steps<TAB>suffix-steps` line per condensed
/// path ("-" for an empty segment).
pub fn write_condensed_graph(
    cg: &CondensedGraph,
    kg: &KnowledgeGraph,
    mut w: impl Write,
) -> Result<()> {
    writeln!(
        w,
        "{}\t{}\t{}",
        kg.entity_name(cg.source)?,
        kg.entity_name(cg.target)?,
        cg.k
    )?;
    for p in &cg.paths {
        let (u, r, v) = p.via;
        writeln!(
            w,
            "via\t{} {} {}\t{}\t{}",
            kg.entity_name(u)?,
            kg.relation_name(r)?,
            kg.entity_name(v)?,
            segment_text(&p.prefix, kg)?,
            segment_text(&p.suffix, kg)?
        )?;
    }
    Ok(())
}
