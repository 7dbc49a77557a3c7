//! Triple store: interned entities/relations and sorted adjacency lists.
//!
//! Triples are loaded from tab-separated UTF-8 files (`head<TAB>relation<TAB>tail`,
//! `#`-prefixed comment lines allowed). Ids are dense and assigned in first-appearance
//! order, exact duplicate triples are dropped, and both a forward and a reverse
//! adjacency index are kept so traversal works in either direction. The graph is
//! immutable after construction and safe to share across threads.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense id of an interned entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub u32);

/// Dense id of an interned relation type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A directed labeled edge of the knowledge graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

/// Traversal direction for adjacency queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// Supported triple file formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleFormat {
    Tsv,
}

/// A triple as read from disk, before interning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

#[derive(Default)]
struct Interner {
    names: IndexSet<String>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(idx) = self.names.get_index_of(name) {
            idx as u32
        } else {
            let (idx, _) = self.names.insert_full(name.to_owned());
            idx as u32
        }
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.names.get_index_of(name).map(|i| i as u32)
    }

    fn name(&self, id: u32) -> Option<&str> {
        self.names.get_index(id as usize).map(String::as_str)
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

/// Incremental construction of a [`KnowledgeGraph`].
#[derive(Default)]
pub struct KnowledgeGraphBuilder {
    entities: Interner,
    relations: Interner,
    triples: Vec<(u32, u32, u32)>,
    seen: HashSet<(u32, u32, u32)>,
}

impl KnowledgeGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns an entity without adding any triple. Lets a graph contain
    /// isolated nodes, which never arise from triple files.
    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        EntityId(self.entities.intern(name))
    }

    pub fn intern_relation(&mut self, name: &str) -> RelationId {
        RelationId(self.relations.intern(name))
    }

    /// Adds one triple; returns false when it was an exact duplicate.
    pub fn add_triple(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        let h = self.entities.intern(head);
        let r = self.relations.intern(relation);
        let t = self.entities.intern(tail);
        if self.seen.insert((h, r, t)) {
            self.triples.push((h, r, t));
            true
        } else {
            false
        }
    }

    pub fn build(self) -> KnowledgeGraph {
        let n = self.entities.len();
        let mut forward: Vec<Vec<(RelationId, EntityId)>> = vec![Vec::new(); n];
        let mut reverse: Vec<Vec<(RelationId, EntityId)>> = vec![Vec::new(); n];
        for &(h, r, t) in &self.triples {
            forward[h as usize].push((RelationId(r), EntityId(t)));
            reverse[t as usize].push((RelationId(r), EntityId(h)));
        }
        // Sorted by (neighbor id, relation id) so traversal order is stable.
        for list in forward.iter_mut().chain(reverse.iter_mut()) {
            list.sort_unstable_by_key(|&(r, v)| (v, r));
        }
        KnowledgeGraph {
            entities: self.entities,
            relations: self.relations,
            forward,
            reverse,
            triple_count: self.triples.len(),
        }
    }
}

/// Interned, indexed, immutable triple store.
pub struct KnowledgeGraph {
    entities: Interner,
    relations: Interner,
    forward: Vec<Vec<(RelationId, EntityId)>>,
    reverse: Vec<Vec<(RelationId, EntityId)>>,
    triple_count: usize,
}

impl KnowledgeGraph {
    /// Loads a triple file. Empty files yield an empty graph.
    pub fn load_triples(path: impl AsRef<Path>, format: TripleFormat) -> Result<Self> {
        let TripleFormat::Tsv = format;
        let path = path.as_ref();
        let file = File::open(path)?;
        Self::from_tsv_reader(file, &path.display().to_string())
    }

    /// Parses TSV triples from any reader; `label` only decorates parse errors.
    pub fn from_tsv_reader(reader: impl Read, label: &str) -> Result<Self> {
        let mut builder = KnowledgeGraphBuilder::new();
        for raw in parse_tsv_triples(reader, label)? {
            builder.add_triple(&raw.head, &raw.relation, &raw.tail);
        }
        Ok(builder.build())
    }

    /// Builds a graph from already-parsed raw triples.
    pub fn from_raw_triples(triples: &[RawTriple]) -> Self {
        let mut builder = KnowledgeGraphBuilder::new();
        for t in triples {
            builder.add_triple(&t.head, &t.relation, &t.tail);
        }
        builder.build()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_triples(&self) -> usize {
        self.triple_count
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relations.get(name).map(RelationId)
    }

    pub fn entity_name(&self, id: EntityId) -> Result<&str> {
        self.entities.name(id.0).ok_or(Error::InvalidEntityId(id.0))
    }

    pub fn relation_name(&self, id: RelationId) -> Result<&str> {
        self.relations
            .name(id.0)
            .ok_or_else(|| Error::UnknownRelation(format!("relation id {}", id.0)))
    }

    /// Sorted adjacency of `node` in the given direction.
    pub fn neighbors(&self, node: EntityId, direction: Direction) -> Result<&[(RelationId, EntityId)]> {
        let lists = match direction {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        };
        lists
            .get(node.0 as usize)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidEntityId(node.0))
    }

    pub fn contains_triple(&self, t: Triple) -> bool {
        self.forward
            .get(t.head.0 as usize)
            .map_or(false, |list| list.contains(&(t.relation, t.tail)))
    }

    /// All stored triples, in forward-adjacency order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.forward.iter().enumerate().flat_map(|(h, list)| {
            list.iter().map(move |&(r, t)| Triple {
                head: EntityId(h as u32),
                relation: r,
                tail: t,
            })
        })
    }

    pub fn entity_names(&self) -> impl Iterator<Item = &str> {
        self.entities.names.iter().map(String::as_str)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.names.iter().map(String::as_str)
    }

    /// Writes an `id<TAB>string` vocabulary file.
    pub fn dump_entity_vocab(&self, mut w: impl Write) -> Result<()> {
        for (i, name) in self.entity_names().enumerate() {
            writeln!(w, "{i}\t{name}")?;
        }
        Ok(())
    }

    pub fn dump_relation_vocab(&self, mut w: impl Write) -> Result<()> {
        for (i, name) in self.relation_names().enumerate() {
            writeln!(w, "{i}\t{name}")?;
        }
        Ok(())
    }
}

/// Parses `head<TAB>relation<TAB>tail` lines; `#` starts a comment line and
/// blank lines are skipped. Malformed lines abort with their line number.
pub fn parse_tsv_triples(reader: impl Read, label: &str) -> Result<Vec<RawTriple>> {
    let reader = BufReader::new(reader);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (head, relation, tail) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(r), Some(t), None) if !h.is_empty() && !r.is_empty() && !t.is_empty() => {
                (h, r, t)
            }
            _ => {
                return Err(Error::Parse {
                    path: label.to_owned(),
                    line: idx + 1,
                    msg: "expected head<TAB>relation<TAB>tail".to_owned(),
                })
            }
        };
        out.push(RawTriple {
            head: head.to_owned(),
            relation: relation.to_owned(),
            tail: tail.to_owned(),
        });
    }
    Ok(out)
}

/// Train/dev/test triples as read from disk.
///
/// The knowledge graph used for path search must be built from the train
/// portion only, so test pairs never see their own gold edge.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<RawTriple>,
    pub dev: Vec<RawTriple>,
    pub test: Vec<RawTriple>,
    pub warnings: Vec<String>,
}

impl DatasetSplit {
    /// Relation vocabulary of the whole split, in first-appearance order.
    pub fn relation_vocabulary(&self) -> Vec<String> {
        let mut seen = IndexSet::new();
        for t in self.train.iter().chain(self.dev.iter()).chain(self.test.iter()) {
            seen.insert(t.relation.clone());
        }
        seen.into_iter().collect()
    }
}

/// Loads a dataset split. `dev` may be absent; a missing test file is a
/// configuration error. Using the same file for train and test is allowed
/// but flagged as leakage.
pub fn load_split(
    train: impl AsRef<Path>,
    dev: Option<&Path>,
    test: impl AsRef<Path>,
) -> Result<DatasetSplit> {
    let train_path = train.as_ref();
    let test_path = test.as_ref();
    if !test_path.exists() {
        return Err(Error::Config(format!(
            "test file `{}` is missing",
            test_path.display()
        )));
    }
    let train_triples = parse_tsv_triples(File::open(train_path)?, &train_path.display().to_string())?;
    let dev_triples = match dev {
        Some(p) => parse_tsv_triples(File::open(p)?, &p.display().to_string())?,
        None => Vec::new(),
    };
    let test_triples = parse_tsv_triples(File::open(test_path)?, &test_path.display().to_string())?;
    let mut warnings = Vec::new();
    if train_path == test_path {
        let msg = format!(
            "train and test point at the same file `{}`: evaluation will leak its own gold edges",
            train_path.display()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(DatasetSplit {
        train: train_triples,
        dev: dev_triples,
        test: test_triples,
        warnings,
    })
}
