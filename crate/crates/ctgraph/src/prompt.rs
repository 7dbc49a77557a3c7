//! Soft-prompt assembly: project a graph embedding into `l` prefix token
//! vectors, attach the instruction and query sentence, and export the bundle
//! for a downstream language model. Hard-prompt assembly (raw path texts)
//! lives here too.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::linalg::{l2_norm, Matrix, NORM_EPS};
use crate::transition::{textualize_path, Path as TgPath};

/// Placeholder the instruction template must contain; it is replaced by the
/// comma-separated candidate relation list.
pub const CANDIDATES_PLACEHOLDER: &str = "{candidates}";

/// Linear map from the graph embedding into `l` rows of width `d_llm`.
#[derive(Clone, Debug)]
pub struct PrefixProjection {
    w: Matrix, // (l * d_llm) x d
    l: usize,
    d_llm: usize,
}

impl PrefixProjection {
    /// Seeded init with unit-norm Gaussian rows, near-orthogonal for large d.
    /// Frozen after construction.
    pub fn seeded(l: usize, d_llm: usize, d: usize, seed: u64) -> Result<Self> {
        if l < 1 || d_llm < 1 || d < 1 {
            return Err(Error::Config("prefix projection dims must be >= 1".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut w = Matrix::from_fn(l * d_llm, d, |_, _| StandardNormal.sample(&mut rng));
        for i in 0..w.rows() {
            let norm = l2_norm(w.row(i)).max(NORM_EPS);
            for j in 0..d {
                w.set(i, j, w.get(i, j) / norm);
            }
        }
        Ok(Self { w, l, d_llm })
    }

    pub fn from_matrix(w: Matrix, l: usize, d_llm: usize) -> Result<Self> {
        if w.rows() != l * d_llm {
            return Err(Error::Shape(format!(
                "projection needs {} rows for l={l}, d_llm={d_llm}, got {}",
                l * d_llm,
                w.rows()
            )));
        }
        Ok(Self { w, l, d_llm })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d_llm(&self) -> usize {
        self.d_llm
    }

    /// `W h`, reshaped row-major into `l` prefix token vectors.
    pub fn project(&self, h: &EmbeddingVector) -> Result<Vec<Vec<f64>>> {
        let flat = self.w.matvec(h.values())?;
        Ok(flat.chunks(self.d_llm).map(<[f64]>::to_vec).collect())
    }
}

/// Resolves the instruction template against the candidate relation list.
pub fn resolve_instruction(template: &str, candidates: &[String]) -> Result<String> {
    if !template.contains(CANDIDATES_PLACEHOLDER) {
        return Err(Error::Config(format!(
            "instruction template must contain the {CANDIDATES_PLACEHOLDER} placeholder"
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Config("candidate relation list is empty".into()));
    }
    Ok(template.replace(CANDIDATES_PLACEHOLDER, &candidates.join(", ")))
}

/// The fixed query sentence for a pair.
pub fn query_sentence(head: &str, tail: &str) -> String {
    format!("what is the relationship between {head} and {tail} ?")
}

/// Surface forms of the pair inside a [`PromptBundle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairNames {
    pub head: String,
    pub tail: String,
}

/// Prefix vectors plus instruction and query, ready for export or a
/// generation call. Serializes exactly in this field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub pair: PairNames,
    pub l: usize,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub instruction: String,
    pub query: String,
}

/// Assembles the soft-prompt bundle for one pair.
pub fn assemble_prompt(
    prefix: Vec<Vec<f64>>,
    instruction_template: &str,
    head: &str,
    tail: &str,
    candidates: &[String],
) -> Result<PromptBundle> {
    if head.is_empty() || tail.is_empty() {
        return Err(Error::Precondition("entity names must be non-empty".into()));
    }
    let l = prefix.len();
    let dim = prefix.first().map(Vec::len).unwrap_or(0);
    if l == 0 || prefix.iter().any(|row| row.len() != dim) {
        return Err(Error::Shape("prefix rows must be non-empty and uniform".into()));
    }
    Ok(PromptBundle {
        pair: PairNames {
            head: head.to_owned(),
            tail: tail.to_owned(),
        },
        l,
        dim,
        vectors: prefix,
        instruction: resolve_instruction(instruction_template, candidates)?,
        query: query_sentence(head, tail),
    })
}

/// Concatenates path texts, then the resolved instruction and the query,
/// newline-separated, truncating at `max_chars` characters. Returns the
/// prompt and whether it was truncated.
pub fn assemble_hard_prompt_from_texts(
    texts: &[String],
    instruction: &str,
    head: &str,
    tail: &str,
    max_chars: usize,
) -> (String, bool) {
    let mut parts: Vec<&str> = texts.iter().map(String::as_str).collect();
    parts.push(instruction);
    let query = query_sentence(head, tail);
    parts.push(&query);
    let full = parts.join("\n");
    if full.chars().count() > max_chars {
        (full.chars().take(max_chars).collect(), true)
    } else {
        (full, false)
    }
}

/// Hard prompt straight from enumerated paths.
pub fn assemble_hard_prompt(
    paths: &[TgPath],
    kg: &KnowledgeGraph,
    instruction: &str,
    head: &str,
    tail: &str,
    max_chars: usize,
) -> Result<(String, bool)> {
    let texts: Vec<String> = paths
        .iter()
        .map(|p| textualize_path(p, kg))
        .collect::<Result<_>>()?;
    Ok(assemble_hard_prompt_from_texts(
        &texts, instruction, head, tail, max_chars,
    ))
}

/// Writes the bundle as a JSON document; floating-point values round-trip
/// bit-exactly through [`load_prefix`].
pub fn export_prefix(bundle: &PromptBundle, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, bundle)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_prefix(path: impl AsRef<Path>) -> Result<PromptBundle> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// What to send to the generation service.
#[derive(Clone, Debug)]
pub enum GenerationPrompt<'a> {
    /// Plain text prompt.
    Hard(&'a str),
    /// Prefix vectors with instruction and query.
    Soft(&'a PromptBundle),
}

/// POSTs the prompt to `<endpoint>/generate` and returns the raw generated
/// text, unnormalized; matching against candidates happens downstream.
/// Single attempt, no retries.
#[cfg(feature = "http")]
pub fn llm_generate(endpoint: &str, prompt: &GenerationPrompt<'_>) -> Result<String> {
    #[derive(Serialize)]
    struct HardReq<'a> {
        prompt: &'a str,
    }
    #[derive(Serialize)]
    struct SoftReq<'a> {
        prefix: &'a [Vec<f64>],
        instruction: &'a str,
        query: &'a str,
    }
    #[derive(Deserialize)]
    struct Resp {
        text: String,
    }
    let url = format!("{}/generate", endpoint.trim_end_matches('/'));
    let sent = match prompt {
        GenerationPrompt::Hard(text) => ureq::post(&url).send_json(HardReq { prompt: text }),
        GenerationPrompt::Soft(bundle) => ureq::post(&url).send_json(SoftReq {
            prefix: &bundle.vectors,
            instruction: &bundle.instruction,
            query: &bundle.query,
        }),
    };
    match sent {
        Ok(mut resp) => {
            let body: Resp = resp.body_mut().read_json().map_err(|e| Error::Transport {
                attempts: 1,
                msg: format!("bad response body: {e}"),
            })?;
            log::debug!("generation response: {:?}", body.text);
            Ok(body.text)
        }
        Err(e) => Err(Error::Transport {
            attempts: 1,
            msg: e.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEMPLATE: &str = "Pick one relation from: {candidates}.";

    fn cands() -> Vec<String> {
        vec!["co_author".into(), "advisor".into()]
    }

    #[test]
    fn zero_projection_gives_zero_rows() {
        let proj = PrefixProjection::from_matrix(Matrix::zeros(6, 4), 2, 3).unwrap();
        let h = EmbeddingVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let rows = proj.project(&h).unwrap();
        assert_eq!(rows, vec![vec![0.0; 3]; 2]);
    }

    #[test]
    fn identity_projection_reproduces_embedding() {
        let proj = PrefixProjection::from_matrix(Matrix::identity(4), 1, 4).unwrap();
        let h = EmbeddingVector::new(vec![0.5, -1.0, 2.0, 0.0]).unwrap();
        assert_eq!(proj.project(&h).unwrap(), vec![vec![0.5, -1.0, 2.0, 0.0]]);
    }

    #[test]
    fn seeded_projection_has_l_rows() {
        let proj = PrefixProjection::seeded(3, 5, 8, 42).unwrap();
        let h = EmbeddingVector::new(vec![1.0; 8]).unwrap();
        let rows = proj.project(&h).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.len() == 5));
    }

    #[test]
    fn projection_is_linear() {
        let proj = PrefixProjection::seeded(2, 3, 4, 7).unwrap();
        let h1 = EmbeddingVector::new(vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let h2 = EmbeddingVector::new(vec![-0.5, 0.25, 3.0, 1.0]).unwrap();
        let (alpha, beta) = (0.7, -1.3);
        let combined = EmbeddingVector::new(
            h1.values()
                .iter()
                .zip(h2.values())
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
        .unwrap();
        let lhs = proj.project(&combined).unwrap();
        let p1 = proj.project(&h1).unwrap();
        let p2 = proj.project(&h2).unwrap();
        for (i, row) in lhs.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let rhs = alpha * p1[i][j] + beta * p2[i][j];
                assert!((v - rhs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn query_matches_fixed_template() {
        let b = assemble_prompt(
            vec![vec![0.0; 3]],
            TEMPLATE,
            "David E. Rumelhart",
            "Geoffrey E. Hinton",
            &cands(),
        )
        .unwrap();
        assert_eq!(
            b.query,
            "what is the relationship between David E. Rumelhart and Geoffrey E. Hinton ?"
        );
        assert!(b.instruction.contains("co_author, advisor"));
    }

    #[test]
    fn template_without_placeholder_is_config_error() {
        let err = assemble_prompt(vec![vec![0.0]], "no placeholder", "a", "b", &cands()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn empty_candidates_is_config_error() {
        let err = assemble_prompt(vec![vec![0.0]], TEMPLATE, "a", "b", &[]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn assembly_is_deterministic() {
        let a = assemble_prompt(vec![vec![0.25, 0.5]], TEMPLATE, "x", "y", &cands()).unwrap();
        let b = assemble_prompt(vec![vec![0.25, 0.5]], TEMPLATE, "x", "y", &cands()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn hard_prompt_with_no_paths_is_instruction_plus_query() {
        let (text, truncated) = assemble_hard_prompt_from_texts(&[], "do it", "a", "b", 4096);
        assert_eq!(text, "do it\nwhat is the relationship between a and b ?");
        assert!(!truncated);
    }

    #[test]
    fn hard_prompt_truncates_at_max_chars() {
        let texts: Vec<String> = (0..200).map(|i| format!("path text number {i}")).collect();
        let (text, truncated) = assemble_hard_prompt_from_texts(&texts, "inst", "a", "b", 128);
        assert!(truncated);
        assert_eq!(text.chars().count(), 128);
    }

    #[test]
    fn export_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.json");
        let bundle = assemble_prompt(
            vec![vec![0.1 + 0.2, std::f64::consts::PI], vec![-0.0, 1e-300]],
            TEMPLATE,
            "h",
            "t",
            &cands(),
        )
        .unwrap();
        export_prefix(&bundle, &path).unwrap();
        let back = load_prefix(&path).unwrap();
        assert_eq!(back, bundle);
        for (a, b) in bundle.vectors.iter().flatten().zip(back.vectors.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn export_zero_prefix_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.json");
        let bundle = assemble_prompt(vec![vec![0.0; 3]; 2], TEMPLATE, "h", "t", &cands()).unwrap();
        export_prefix(&bundle, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["l"], 2);
        assert_eq!(parsed["dim"], 3);
        assert_eq!(parsed["vectors"].as_array().unwrap().len(), 2);
        assert!(parsed["vectors"][0]
            .as_array()
            .unwrap()
            .iter()
            .all(|v| v.as_f64() == Some(0.0)));
    }
}
