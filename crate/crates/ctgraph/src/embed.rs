//! Text-embedding backends.
//!
//! Three interchangeable backends produce fixed-dimension vectors for path
//! texts, edge texts, and relation names:
//!
//! - `deterministic-seeded`: whitespace tokens are hashed to seeded random
//!   unit vectors, averaged, and L2-normalized. A pure function of
//!   (seed, dim, text); the default at desk scale.
//! - `file-table`: exact-string lookup in a `text<TAB>v1,v2,...,vd` file.
//! - `http-service`: POST `{"text": ...}` to `<endpoint>/embed`, expecting
//!   `{"vector": [...]}` back (feature `http`).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::condense::Segment;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::linalg::{l2_norm, NORM_EPS};
use crate::transition::textualize_steps;

/// A finite fixed-dimension embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("embedding has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Which embedding backend to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderBackend {
    DeterministicSeeded,
    FileTable,
    HttpService,
}

/// Embedder configuration; exactly one backend is active.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedderConfig {
    pub backend: EmbedderBackend,
    pub dim: usize,
    pub seed: u64,
    pub table_path: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub retries: u32,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            backend: EmbedderBackend::DeterministicSeeded,
            dim: 64,
            seed: 42,
            table_path: None,
            endpoint: None,
            retries: 0,
        }
    }
}

/// A constructed embedding backend.
pub enum Embedder {
    Deterministic {
        dim: usize,
        seed: u64,
    },
    Table {
        dim: usize,
        table: HashMap<String, Vec<f64>>,
    },
    #[cfg(feature = "http")]
    Http {
        dim: usize,
        endpoint: String,
        retries: u32,
    },
}

impl Embedder {
    pub fn from_config(cfg: &EmbedderConfig) -> Result<Self> {
        if cfg.dim < 1 {
            return Err(Error::Config("embedding dimension must be >= 1".into()));
        }
        match cfg.backend {
            EmbedderBackend::DeterministicSeeded => Ok(Self::Deterministic {
                dim: cfg.dim,
                seed: cfg.seed,
            }),
            EmbedderBackend::FileTable => {
                let path = cfg
                    .table_path
                    .as_ref()
                    .ok_or_else(|| Error::Config("file-table backend needs table_path".into()))?;
                Ok(Self::Table {
                    dim: cfg.dim,
                    table: load_table(path, cfg.dim)?,
                })
            }
            EmbedderBackend::HttpService => {
                #[cfg(feature = "http")]
                {
                    let endpoint = cfg
                        .endpoint
                        .clone()
                        .ok_or_else(|| Error::Config("http-service backend needs endpoint".into()))?;
                    Ok(Self::Http {
                        dim: cfg.dim,
                        endpoint,
                        retries: cfg.retries,
                    })
                }
                #[cfg(not(feature = "http"))]
                {
                    Err(Error::Config(
                        "http-service backend requires the `http` feature".into(),
                    ))
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Deterministic { dim, .. } => *dim,
            Self::Table { dim, .. } => *dim,
            #[cfg(feature = "http")]
            Self::Http { dim, .. } => *dim,
        }
    }

    /// Embeds a non-empty text.
    pub fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        if text.is_empty() {
            return Err(Error::Precondition("cannot embed the empty text".into()));
        }
        match self {
            Self::Deterministic { dim, seed } => Ok(deterministic_embedding(*dim, *seed, text)),
            Self::Table { table, .. } => table
                .get(text)
                .cloned()
                .map(|values| EmbeddingVector { values })
                .ok_or_else(|| Error::TableMiss(text.to_owned())),
            #[cfg(feature = "http")]
            Self::Http {
                dim,
                endpoint,
                retries,
            } => http_embedding(endpoint, *retries, *dim, text),
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Seeded unit vector for one token; platform-independent.
fn token_vector(dim: usize, seed: u64, token: &str) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ fnv1a(token.as_bytes()));
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = l2_norm(&v).max(NORM_EPS);
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

fn deterministic_embedding(dim: usize, seed: u64, text: &str) -> EmbeddingVector {
    let mut acc = vec![0.0f64; dim];
    let mut count = 0usize;
    for token in text.split_whitespace() {
        let tv = token_vector(dim, seed, token);
        for (a, x) in acc.iter_mut().zip(&tv) {
            *a += x;
        }
        count += 1;
    }
    if count == 0 {
        return EmbeddingVector { values: acc };
    }
    for a in acc.iter_mut() {
        *a /= count as f64;
    }
    let norm = l2_norm(&acc).max(NORM_EPS);
    for a in acc.iter_mut() {
        *a /= norm;
    }
    EmbeddingVector { values: acc }
}

/// Loads a `text<TAB>v1,v2,...,vd` table.
pub fn load_table(path: impl AsRef<Path>, dim: usize) -> Result<HashMap<String, Vec<f64>>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut table = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (text, rest) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            msg: "expected text<TAB>v1,v2,...".into(),
        })?;
        let values: std::result::Result<Vec<f64>, _> =
            rest.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            msg: format!("bad vector component: {e}"),
        })?;
        if values.len() != dim {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("expected {dim} components, got {}", values.len()),
            });
        }
        table.insert(text.to_owned(), values);
    }
    Ok(table)
}

#[cfg(feature = "http")]
fn http_embedding(endpoint: &str, retries: u32, dim: usize, text: &str) -> Result<EmbeddingVector> {
    #[derive(Serialize)]
    struct Req<'a> {
        text: &'a str,
    }
    #[derive(Deserialize)]
    struct Resp {
        vector: Vec<f64>,
    }
    let url = format!("{}/embed", endpoint.trim_end_matches('/'));
    let mut last_err = String::new();
    for attempt in 1..=retries + 1 {
        match ureq::post(&url).send_json(Req { text }) {
            Ok(mut resp) => match resp.body_mut().read_json::<Resp>() {
                Ok(body) => {
                    if body.vector.len() != dim {
                        return Err(Error::Shape(format!(
                            "embedding service returned {} components, expected {dim}",
                            body.vector.len()
                        )));
                    }
                    return EmbeddingVector::new(body.vector);
                }
                Err(e) => last_err = format!("bad response body: {e}"),
            },
            Err(e) => last_err = e.to_string(),
        }
        log::debug!("embed attempt {attempt} failed: {last_err}");
    }
    Err(Error::Transport {
        attempts: retries + 1,
        msg: last_err,
    })
}

/// Embeds a path segment: textualize with the clause grammar, then embed.
/// The empty segment embeds to the zero vector.
pub fn embed_segment(
    embedder: &Embedder,
    segment: &Segment,
    kg: &KnowledgeGraph,
) -> Result<EmbeddingVector> {
    if segment.is_empty() {
        return Ok(EmbeddingVector::zeros(embedder.dim()));
    }
    let text = textualize_steps(segment.nodes(), segment.relations(), kg)?;
    embedder.embed_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::KnowledgeGraph;
    use crate::linalg::cosine;
    use std::io::Cursor;

    fn det(dim: usize, seed: u64) -> Embedder {
        Embedder::Deterministic { dim, seed }
    }

    #[test]
    fn deterministic_backend_is_pure() {
        let e = det(32, 7);
        let a = e.embed_text("alpha beta gamma").unwrap();
        let b = e.embed_text("alpha beta gamma").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_is_unit_norm() {
        let e = det(64, 42);
        let v = e.embed_text("some words here").unwrap();
        assert!((l2_norm(v.values()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn different_seeds_differ() {
        let a = det(32, 1).embed_text("same text").unwrap();
        let b = det(32, 2).embed_text("same text").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn empty_text_is_precondition_error() {
        assert!(det(8, 0).embed_text("").is_err());
    }

    #[test]
    fn unrelated_texts_are_near_orthogonal() {
        // Monte-Carlo check of random-projection near-orthogonality: texts
        // over disjoint token sets should have cosine well inside (-0.5, 0.5).
        let e = det(64, 42);
        let mut inside = 0usize;
        let trials = 1000;
        for i in 0..trials {
            let a = e.embed_text(&format!("left{i} mid{i} end{i}")).unwrap();
            let b = e.embed_text(&format!("other{i} words{i} now{i}")).unwrap();
            let c = cosine(a.values(), b.values());
            if c.abs() < 0.5 {
                inside += 1;
            }
        }
        assert!(inside >= 990, "only {inside}/{trials} inside (-0.5, 0.5)");
    }

    #[test]
    fn table_backend_hits_and_misses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.tsv");
        std::fs::write(&path, "hello\t1.0,0.0\nworld\t0.0,1.0\n").unwrap();
        let cfg = EmbedderConfig {
            backend: EmbedderBackend::FileTable,
            dim: 2,
            table_path: Some(path),
            ..Default::default()
        };
        let e = Embedder::from_config(&cfg).unwrap();
        assert_eq!(e.embed_text("hello").unwrap().values(), &[1.0, 0.0]);
        assert!(matches!(e.embed_text("nope"), Err(Error::TableMiss(_))));
    }

    #[test]
    fn table_dimension_is_validated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.tsv");
        std::fs::write(&path, "hello\t1.0,0.0,3.0\n").unwrap();
        assert!(load_table(&path, 2).is_err());
    }

    #[test]
    fn empty_segment_embeds_to_zero() {
        let kg = KnowledgeGraph::from_tsv_reader(Cursor::new("s\tr\tt\n"), "t").unwrap();
        let e = det(16, 3);
        let seg = Segment::empty(kg.entity_id("s").unwrap());
        let v = embed_segment(&e, &seg, &kg).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.dim(), 16);
    }

    #[test]
    fn segment_embedding_equals_text_embedding() {
        let kg = KnowledgeGraph::from_tsv_reader(Cursor::new("s\tr1\tv1\n"), "t").unwrap();
        let e = det(16, 3);
        let tg = crate::transition::extract_transition_graph(
            &kg,
            kg.entity_id("s").unwrap(),
            kg.entity_id("v1").unwrap(),
            1,
        )
        .unwrap();
        let tree =
            crate::condense::shortest_path_tree(&tg, tg.source(), crate::condense::TreeDirection::FromSource)
                .unwrap();
        let seg = tree.segment(kg.entity_id("v1").unwrap()).unwrap();
        let via_segment = embed_segment(&e, &seg, &kg).unwrap();
        let direct = e
            .embed_text("the relationship between s and v1 is r1")
            .unwrap();
        assert_eq!(via_segment, direct);
    }
}
