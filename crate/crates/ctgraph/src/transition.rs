//! The (s,t)-transition graph: the subgraph of edges lying on some walk from
//! `s` to `t` of length at most `k`.
//!
//! Extraction runs one breadth-first search from `s` over forward adjacency
//! and one from `t` over reverse adjacency, then keeps exactly the edges
//! `(u, r, v)` with `dist_s(u) + 1 + dist_t(v) <= k`. Every edge of a
//! shortest path to a kept endpoint passes the same filter, so distances
//! measured inside the extracted subgraph coincide with the knowledge-graph
//! distances and every node stays reachable from `s` and co-reachable to `t`.

use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kg::{Direction, EntityId, KnowledgeGraph, RelationId, Triple};

/// A directed labeled transition-graph edge `(u, r, v)`.
pub type TgEdge = (EntityId, RelationId, EntityId);

/// The k-hop (s,t)-transition graph.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    source: EntityId,
    target: EntityId,
    k: usize,
    edges: Vec<TgEdge>,
    nodes: Vec<EntityId>,
    dist_from_source: BTreeMap<EntityId, usize>,
    dist_to_target: BTreeMap<EntityId, usize>,
    fwd: BTreeMap<EntityId, Vec<(RelationId, EntityId)>>,
    rev: BTreeMap<EntityId, Vec<(RelationId, EntityId)>>,
}

impl TransitionGraph {
    /// Builds a transition graph from an explicit edge set, recomputing both
    /// distance maps by BFS inside the edge set and validating the hop-bound
    /// closure property.
    pub fn from_edges(
        source: EntityId,
        target: EntityId,
        k: usize,
        mut edges: Vec<TgEdge>,
    ) -> Result<Self> {
        if k < 1 {
            return Err(Error::Precondition("hop bound k must be >= 1".into()));
        }
        if source == target {
            return Err(Error::Precondition(
                "transition graph endpoints must differ (s = t)".into(),
            ));
        }
        edges.sort_unstable();
        edges.dedup();
        if edges.is_empty() {
            return Ok(Self::empty(source, target, k));
        }

        let mut fwd: BTreeMap<EntityId, Vec<(RelationId, EntityId)>> = BTreeMap::new();
        let mut rev: BTreeMap<EntityId, Vec<(RelationId, EntityId)>> = BTreeMap::new();
        let mut nodes: Vec<EntityId> = Vec::new();
        for &(u, r, v) in &edges {
            fwd.entry(u).or_default().push((r, v));
            rev.entry(v).or_default().push((r, u));
            nodes.push(u);
            nodes.push(v);
        }
        nodes.sort_unstable();
        nodes.dedup();
        for list in fwd.values_mut().chain(rev.values_mut()) {
            list.sort_unstable_by_key(|&(r, v)| (v, r));
        }

        let dist_from_source = bfs_distances(&fwd, source, k);
        let dist_to_target = bfs_distances(&rev, target, k);
        for &(u, r, v) in &edges {
            let du = dist_from_source.get(&u).copied();
            let dv = dist_to_target.get(&v).copied();
            match (du, dv) {
                (Some(du), Some(dv)) if du + 1 + dv <= k => {}
                _ => {
                    return Err(Error::Precondition(format!(
                        "edge ({},{},{}) is not on any s->t walk within {k} hops",
                        u.0, r.0, v.0
                    )))
                }
            }
        }

        Ok(Self {
            source,
            target,
            k,
            edges,
            nodes,
            dist_from_source,
            dist_to_target,
            fwd,
            rev,
        })
    }

    fn empty(source: EntityId, target: EntityId, k: usize) -> Self {
        Self {
            source,
            target,
            k,
            edges: Vec::new(),
            nodes: Vec::new(),
            dist_from_source: BTreeMap::new(),
            dist_to_target: BTreeMap::new(),
            fwd: BTreeMap::new(),
            rev: BTreeMap::new(),
        }
    }

    pub fn source(&self) -> EntityId {
        self.source
    }

    pub fn target(&self) -> EntityId {
        self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical `(u, r, v)` ascending order.
    pub fn edges(&self) -> &[TgEdge] {
        &self.edges
    }

    pub fn nodes(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn contains_node(&self, node: EntityId) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn dist_from_source(&self, node: EntityId) -> Option<usize> {
        self.dist_from_source.get(&node).copied()
    }

    pub fn dist_to_target(&self, node: EntityId) -> Option<usize> {
        self.dist_to_target.get(&node).copied()
    }

    /// Outgoing adjacency inside the transition graph, sorted by (neighbor, relation).
    pub fn forward_local(&self, node: EntityId) -> &[(RelationId, EntityId)] {
        self.fwd.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Incoming adjacency inside the transition graph, sorted by (neighbor, relation).
    pub fn reverse_local(&self, node: EntityId) -> &[(RelationId, EntityId)] {
        self.rev.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn bfs_distances(
    adj: &BTreeMap<EntityId, Vec<(RelationId, EntityId)>>,
    root: EntityId,
    limit: usize,
) -> BTreeMap<EntityId, usize> {
    let mut dist = BTreeMap::new();
    dist.insert(root, 0usize);
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(node) = queue.pop_front() {
        let d = dist[&node];
        if d == limit {
            continue;
        }
        if let Some(list) = adj.get(&node) {
            for &(_, next) in list {
                if !dist.contains_key(&next) {
                    dist.insert(next, d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}

fn kg_bfs_distances(
    kg: &KnowledgeGraph,
    root: EntityId,
    direction: Direction,
    limit: usize,
    exclude: Option<Triple>,
) -> Result<BTreeMap<EntityId, usize>> {
    let mut dist = BTreeMap::new();
    dist.insert(root, 0usize);
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(node) = queue.pop_front() {
        let d = dist[&node];
        if d == limit {
            continue;
        }
        for &(r, next) in kg.neighbors(node, direction)? {
            if let Some(ex) = exclude {
                let skip = match direction {
                    Direction::Forward => node == ex.head && r == ex.relation && next == ex.tail,
                    Direction::Reverse => next == ex.head && r == ex.relation && node == ex.tail,
                };
                if skip {
                    continue;
                }
            }
            if !dist.contains_key(&next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    Ok(dist)
}

/// Extracts the k-hop (s,t)-transition graph. Returns an empty graph when
/// `t` is unreachable from `s` within `k` hops.
pub fn extract_transition_graph(
    kg: &KnowledgeGraph,
    s: EntityId,
    t: EntityId,
    k: usize,
) -> Result<TransitionGraph> {
    extract_transition_graph_excluding(kg, s, t, k, None)
}

/// Like [`extract_transition_graph`], but skips one specific edge, used at
/// evaluation time to hide a test pair's own gold edge from path search.
pub fn extract_transition_graph_excluding(
    kg: &KnowledgeGraph,
    s: EntityId,
    t: EntityId,
    k: usize,
    exclude: Option<Triple>,
) -> Result<TransitionGraph> {
    if k < 1 {
        return Err(Error::Precondition("hop bound k must be >= 1".into()));
    }
    if s == t {
        return Err(Error::Precondition(
            "transition graph endpoints must differ (s = t)".into(),
        ));
    }
    kg.entity_name(s)?;
    kg.entity_name(t)?;

    let dist_s = kg_bfs_distances(kg, s, Direction::Forward, k, exclude)?;
    let dist_t = kg_bfs_distances(kg, t, Direction::Reverse, k, exclude)?;

    let mut edges = Vec::new();
    for (&u, &du) in &dist_s {
        if du + 1 > k {
            continue;
        }
        for &(r, v) in kg.neighbors(u, Direction::Forward)? {
            if let Some(ex) = exclude {
                if u == ex.head && r == ex.relation && v == ex.tail {
                    continue;
                }
            }
            if let Some(&dv) = dist_t.get(&v) {
                if du + 1 + dv <= k {
                    edges.push((u, r, v));
                }
            }
        }
    }
    TransitionGraph::from_edges(s, t, k, edges)
}

/// A simple s->t path: nodes are pairwise distinct, length <= k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    nodes: Vec<EntityId>,
    relations: Vec<RelationId>,
}

impl Path {
    pub fn new(nodes: Vec<EntityId>, relations: Vec<RelationId>) -> Result<Self> {
        if nodes.len() != relations.len() + 1 {
            return Err(Error::Shape(format!(
                "path with {} nodes needs {} relations, got {}",
                nodes.len(),
                nodes.len().saturating_sub(1),
                relations.len()
            )));
        }
        Ok(Self { nodes, relations })
    }

    pub fn nodes(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn relations(&self) -> &[RelationId] {
        &self.relations
    }

    /// Number of edges.
    pub fn length(&self) -> usize {
        self.relations.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = TgEdge> + '_ {
        self.relations
            .iter()
            .enumerate()
            .map(move |(i, &r)| (self.nodes[i], r, self.nodes[i + 1]))
    }
}

/// Result of exhaustive path enumeration.
#[derive(Clone, Debug)]
pub struct PathEnumeration {
    pub paths: Vec<Path>,
    pub truncated: bool,
}

/// Enumerates all simple s->t paths of length <= k inside the transition
/// graph, depth first, neighbors in sorted adjacency order. Stops with the
/// truncation flag once `cap` paths were collected.
pub fn enumerate_paths(tg: &TransitionGraph, cap: usize) -> Result<PathEnumeration> {
    if cap < 1 {
        return Err(Error::Precondition("enumeration cap must be >= 1".into()));
    }
    let mut out = Vec::new();
    let mut truncated = false;
    if tg.is_empty() {
        return Ok(PathEnumeration { paths: out, truncated });
    }

    let mut node_stack = vec![tg.source()];
    let mut rel_stack: Vec<RelationId> = Vec::new();
    let mut visited: Vec<EntityId> = vec![tg.source()];

    fn dfs(
        tg: &TransitionGraph,
        node: EntityId,
        node_stack: &mut Vec<EntityId>,
        rel_stack: &mut Vec<RelationId>,
        visited: &mut Vec<EntityId>,
        out: &mut Vec<Path>,
        cap: usize,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        if node == tg.target() {
            if out.len() == cap {
                *truncated = true;
            } else {
                out.push(Path {
                    nodes: node_stack.clone(),
                    relations: rel_stack.clone(),
                });
            }
            return;
        }
        let used = rel_stack.len();
        for &(r, next) in tg.forward_local(node) {
            // dist_to_target is a lower bound on the remaining hops needed.
            let lower = match tg.dist_to_target(next) {
                Some(d) => d,
                None => continue,
            };
            if used + 1 + lower > tg.k() {
                continue;
            }
            if visited.contains(&next) {
                continue;
            }
            node_stack.push(next);
            rel_stack.push(r);
            visited.push(next);
            dfs(tg, next, node_stack, rel_stack, visited, out, cap, truncated);
            visited.pop();
            rel_stack.pop();
            node_stack.pop();
        }
    }

    dfs(
        tg,
        tg.source(),
        &mut node_stack,
        &mut rel_stack,
        &mut visited,
        &mut out,
        cap,
        &mut truncated,
    );
    Ok(PathEnumeration { paths: out, truncated })
}

/// Renders one `u -r-> v` step as its fixed natural-language clause.
fn clause(kg: &KnowledgeGraph, u: EntityId, r: RelationId, v: EntityId) -> Result<String> {
    Ok(format!(
        "the relationship between {} and {} is {}",
        kg.entity_name(u)?,
        kg.relation_name(r)?,
        kg.entity_name(v)?
    ))
}

/// Textualizes an alternating node/relation sequence, one clause per step,
/// clauses joined by ", ". Empty step sequences yield the empty string.
pub fn textualize_steps(
    nodes: &[EntityId],
    relations: &[RelationId],
    kg: &KnowledgeGraph,
) -> Result<String> {
    if relations.is_empty() {
        return Ok(String::new());
    }
    if nodes.len() != relations.len() + 1 {
        return Err(Error::Shape("steps must alternate nodes and relations".into()));
    }
    let mut clauses = Vec::with_capacity(relations.len());
    for (i, &r) in relations.iter().enumerate() {
        clauses.push(clause(kg, nodes[i], r, nodes[i + 1])?);
    }
    Ok(clauses.join(", "))
}

/// T(path): the textual description of a path.
pub fn textualize_path(path: &Path, kg: &KnowledgeGraph) -> Result<String> {
    textualize_steps(path.nodes(), path.relations(), kg)
}

/// Writes the edge-list serialization: a `s<TAB>t<TAB>k` header line, then
/// one `u<TAB>r<TAB>v` line per edge in canonical order, all surface forms.
pub fn write_transition_graph(
    tg: &TransitionGraph,
    kg: &KnowledgeGraph,
    mut w: impl Write,
) -> Result<()> {
    writeln!(
        w,
        "{}\t{}\t{}",
        kg.entity_name(tg.source())?,
        kg.entity_name(tg.target())?,
        tg.k()
    )?;
    for &(u, r, v) in tg.edges() {
        writeln!(
            w,
            "{}\t{}\t{}",
            kg.entity_name(u)?,
            kg.relation_name(r)?,
            kg.entity_name(v)?
        )?;
    }
    Ok(())
}

/// Reads the edge-list serialization back against the same knowledge graph.
pub fn read_transition_graph(kg: &KnowledgeGraph, r: impl BufRead) -> Result<TransitionGraph> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: "<transition graph>".into(),
            line: 1,
            msg: "missing header line".into(),
        })??;
    let parts: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            path: "<transition graph>".into(),
            line: 1,
            msg: "header must be s<TAB>t<TAB>k".into(),
        });
    }
    let s = kg
        .entity_id(parts[0])
        .ok_or_else(|| Error::UnknownEntity(parts[0].to_owned()))?;
    let t = kg
        .entity_id(parts[1])
        .ok_or_else(|| Error::UnknownEntity(parts[1].to_owned()))?;
    let k: usize = parts[2].parse().map_err(|_| Error::Parse {
        path: "<transition graph>".into(),
        line: 1,
        msg: format!("bad hop bound `{}`", parts[2]),
    })?;
    let mut edges = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: "<transition graph>".into(),
                line: idx + 2,
                msg: "expected u<TAB>r<TAB>v".into(),
            });
        }
        let u = kg
            .entity_id(fields[0])
            .ok_or_else(|| Error::UnknownEntity(fields[0].to_owned()))?;
        let rel = kg
            .relation_id(fields[1])
            .ok_or_else(|| Error::UnknownRelation(fields[1].to_owned()))?;
        let v = kg
            .entity_id(fields[2])
            .ok_or_else(|| Error::UnknownEntity(fields[2].to_owned()))?;
        edges.push((u, rel, v));
    }
    TransitionGraph::from_edges(s, t, k, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::KnowledgeGraph;
    use std::io::Cursor;

    fn graph(tsv: &str) -> KnowledgeGraph {
        KnowledgeGraph::from_tsv_reader(Cursor::new(tsv), "test").unwrap()
    }

    fn diamond_with_stray() -> KnowledgeGraph {
        // s->a, a->t, s->b, b->t, plus a->c where c cannot reach t
        graph("s\tr\ta\na\tr\tt\ns\tr\tb\nb\tr\tt\na\tr\tc\n")
    }

    fn ids(kg: &KnowledgeGraph, s: &str, t: &str) -> (EntityId, EntityId) {
        (kg.entity_id(s).unwrap(), kg.entity_id(t).unwrap())
    }

    #[test]
    fn single_edge_k1() {
        let kg = graph("s\tr\tt\n");
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 1).unwrap();
        assert_eq!(tg.num_edges(), 1);
        assert_eq!(tg.num_nodes(), 2);
        assert_eq!(tg.dist_from_source(s), Some(0));
        assert_eq!(tg.dist_to_target(t), Some(0));
    }

    #[test]
    fn diamond_excludes_stray_edge() {
        let kg = diamond_with_stray();
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 2).unwrap();
        assert_eq!(tg.num_edges(), 4);
        let c = kg.entity_id("c").unwrap();
        assert!(!tg.contains_node(c));
    }

    #[test]
    fn unreachable_target_yields_empty_graph() {
        let kg = graph("s\tr\ta\nt\tr\tb\n");
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 4).unwrap();
        assert!(tg.is_empty());
        assert_eq!(tg.num_nodes(), 0);
    }

    #[test]
    fn equal_endpoints_is_precondition_error() {
        let kg = graph("s\tr\tt\n");
        let s = kg.entity_id("s").unwrap();
        assert!(matches!(
            extract_transition_graph(&kg, s, s, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn invalid_endpoint_is_lookup_error() {
        let kg = graph("s\tr\tt\n");
        let s = kg.entity_id("s").unwrap();
        assert!(extract_transition_graph(&kg, s, EntityId(77), 2).is_err());
    }

    #[test]
    fn excluding_the_only_edge_empties_the_graph() {
        let kg = graph("s\tr\tt\n");
        let (s, t) = ids(&kg, "s", "t");
        let gold = Triple {
            head: s,
            relation: kg.relation_id("r").unwrap(),
            tail: t,
        };
        let tg = extract_transition_graph_excluding(&kg, s, t, 4, Some(gold)).unwrap();
        assert!(tg.is_empty());
    }

    #[test]
    fn enumerate_diamond_two_paths() {
        let kg = diamond_with_stray();
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 2).unwrap();
        let e = enumerate_paths(&tg, 100).unwrap();
        assert_eq!(e.paths.len(), 2);
        assert!(!e.truncated);
        for p in &e.paths {
            assert_eq!(p.nodes().first(), Some(&s));
            assert_eq!(p.nodes().last(), Some(&t));
            assert!(p.length() <= 2);
        }
    }

    #[test]
    fn enumerate_complete_digraph_on_four_nodes() {
        // all 12 ordered pairs over {s,a,b,t}; expected simple paths of
        // length <= 3 from s to t:
        //   s->t; s->a->t; s->b->t; s->a->b->t; s->b->a->t
        let mut tsv = String::new();
        let names = ["s", "a", "b", "t"];
        for &x in &names {
            for &y in &names {
                if x != y {
                    tsv.push_str(&format!("{x}\tr\t{y}\n"));
                }
            }
        }
        let kg = graph(&tsv);
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 3).unwrap();
        let e = enumerate_paths(&tg, 1000).unwrap();
        assert_eq!(e.paths.len(), 5);
        assert!(!e.truncated);
    }

    #[test]
    fn cap_truncates_enumeration() {
        let kg = diamond_with_stray();
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 2).unwrap();
        let e = enumerate_paths(&tg, 1).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert!(e.truncated);
    }

    #[test]
    fn enumeration_order_is_stable() {
        let kg = diamond_with_stray();
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 2).unwrap();
        let a = enumerate_paths(&tg, 100).unwrap();
        let b = enumerate_paths(&tg, 100).unwrap();
        assert_eq!(a.paths, b.paths);
    }

    #[test]
    fn textualize_single_step() {
        let kg = graph("s\tr1\tv1\n");
        let p = Path::new(
            vec![kg.entity_id("s").unwrap(), kg.entity_id("v1").unwrap()],
            vec![kg.relation_id("r1").unwrap()],
        )
        .unwrap();
        assert_eq!(
            textualize_path(&p, &kg).unwrap(),
            "the relationship between s and v1 is r1"
        );
    }

    #[test]
    fn textualize_two_steps() {
        let kg = graph("s\tr1\tv1\nv1\tr2\tt\n");
        let p = Path::new(
            vec![
                kg.entity_id("s").unwrap(),
                kg.entity_id("v1").unwrap(),
                kg.entity_id("t").unwrap(),
            ],
            vec![kg.relation_id("r1").unwrap(), kg.relation_id("r2").unwrap()],
        )
        .unwrap();
        assert_eq!(
            textualize_path(&p, &kg).unwrap(),
            "the relationship between s and v1 is r1, the relationship between v1 and t is r2"
        );
    }

    #[test]
    fn textualize_named_relation() {
        let kg = graph("s\tco_author\tt\n");
        let p = Path::new(
            vec![kg.entity_id("s").unwrap(), kg.entity_id("t").unwrap()],
            vec![kg.relation_id("co_author").unwrap()],
        )
        .unwrap();
        assert_eq!(
            textualize_path(&p, &kg).unwrap(),
            "the relationship between s and t is co_author"
        );
    }

    #[test]
    fn edge_list_round_trip() {
        let kg = diamond_with_stray();
        let (s, t) = ids(&kg, "s", "t");
        let tg = extract_transition_graph(&kg, s, t, 2).unwrap();
        let mut buf = Vec::new();
        write_transition_graph(&tg, &kg, &mut buf).unwrap();
        let back = read_transition_graph(&kg, Cursor::new(&buf)).unwrap();
        assert_eq!(back.edges(), tg.edges());
        assert_eq!(back.source(), tg.source());
        assert_eq!(back.k(), tg.k());
    }
}
