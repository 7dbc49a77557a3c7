//! Zero-shot relation prediction over a candidate set, baseline scoring
//! functions, micro precision/recall/F1, and the relation-masking harness.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::kg::{DatasetSplit, EntityId, RelationId};
use crate::linalg::{cosine, l2_norm};

/// TransE: `-||e_h + e_r - e_t||_2`, higher is better.
pub fn score_transe(e_h: &[f64], e_r: &[f64], e_t: &[f64]) -> Result<f64> {
    check_dims(e_h, e_r, e_t)?;
    let diff: Vec<f64> = e_h
        .iter()
        .zip(e_r)
        .zip(e_t)
        .map(|((h, r), t)| h + r - t)
        .collect();
    Ok(-l2_norm(&diff))
}

/// DistMult: trilinear form `sum_i h_i r_i t_i`.
pub fn score_distmult(e_h: &[f64], e_r: &[f64], e_t: &[f64]) -> Result<f64> {
    check_dims(e_h, e_r, e_t)?;
    Ok(e_h
        .iter()
        .zip(e_r)
        .zip(e_t)
        .map(|((h, r), t)| h * r * t)
        .sum())
}

/// ComplEx: `Re(sum_j h_j r_j conj(t_j))` with the first half of each vector
/// as real parts and the second half as imaginary parts. Dim must be even.
pub fn score_complex(e_h: &[f64], e_r: &[f64], e_t: &[f64]) -> Result<f64> {
    check_dims(e_h, e_r, e_t)?;
    if e_h.len() % 2 != 0 {
        return Err(Error::Shape(format!(
            "ComplEx needs an even dimension, got {}",
            e_h.len()
        )));
    }
    let c = e_h.len() / 2;
    let mut score = 0.0;
    for j in 0..c {
        let (hr, hi) = (e_h[j], e_h[c + j]);
        let (rr, ri) = (e_r[j], e_r[c + j]);
        let (tr, ti) = (e_t[j], e_t[c + j]);
        // Re( (hr + i hi)(rr + i ri)(tr - i ti) )
        score += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
    }
    Ok(score)
}

fn check_dims(a: &[f64], b: &[f64], c: &[f64]) -> Result<()> {
    if a.len() != b.len() || b.len() != c.len() {
        return Err(Error::Shape(format!(
            "score inputs must share a dimension, got {}/{}/{}",
            a.len(),
            b.len(),
            c.len()
        )));
    }
    Ok(())
}

/// How a prediction was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    EmbeddingSimilarity,
    LlmGeneration,
    BaselineTranse,
    BaselineDistmult,
    BaselineComplex,
}

impl ScorerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EmbeddingSimilarity => "embedding-similarity",
            Self::LlmGeneration => "llm-generation",
            Self::BaselineTranse => "baseline-transe",
            Self::BaselineDistmult => "baseline-distmult",
            Self::BaselineComplex => "baseline-complex",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "embedding-similarity" => Ok(Self::EmbeddingSimilarity),
            "llm-generation" => Ok(Self::LlmGeneration),
            "baseline-transe" => Ok(Self::BaselineTranse),
            "baseline-distmult" => Ok(Self::BaselineDistmult),
            "baseline-complex" => Ok(Self::BaselineComplex),
            other => Err(Error::Config(format!("unknown scorer `{other}`"))),
        }
    }
}

/// The candidate relations for one pair; ids index the evaluation
/// vocabulary, names carry the surface forms.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    pub pair: (EntityId, EntityId),
    pub relations: Vec<(RelationId, String)>,
}

impl CandidateSet {
    pub fn new(pair: (EntityId, EntityId), mut relations: Vec<(RelationId, String)>) -> Result<Self> {
        if relations.is_empty() {
            return Err(Error::Precondition("candidate set must be non-empty".into()));
        }
        relations.sort_by_key(|&(id, _)| id);
        Ok(Self { pair, relations })
    }
}

/// One prediction for one test instance; `predicted` is `None` for the
/// invalid marker (an unmatched generation), which counts as wrong.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub head: String,
    pub tail: String,
    pub gold: String,
    pub predicted: Option<String>,
    pub source: ScorerKind,
    pub score: f64,
}

/// Argmax over candidates with ties broken toward the smallest relation id.
/// `scores` must be aligned with candidate order (ascending ids).
pub fn argmax_candidate<'a>(
    candidates: &'a CandidateSet,
    scores: &[f64],
) -> Result<(&'a (RelationId, String), f64)> {
    if scores.len() != candidates.relations.len() {
        return Err(Error::Shape("one score per candidate required".into()));
    }
    let mut best = 0usize;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Ok((&candidates.relations[best], scores[best]))
}

/// Scores every candidate with one of the three translation/bilinear
/// baselines on text embeddings of the entity and relation names.
pub fn baseline_scores(
    kind: ScorerKind,
    embedder: &Embedder,
    head_name: &str,
    tail_name: &str,
    candidates: &CandidateSet,
) -> Result<Vec<f64>> {
    let e_h = embedder.embed_text(head_name)?.into_values();
    let e_t = embedder.embed_text(tail_name)?.into_values();
    candidates
        .relations
        .iter()
        .map(|(_, name)| {
            let e_r = embedder.embed_text(name)?.into_values();
            match kind {
                ScorerKind::BaselineTranse => score_transe(&e_h, &e_r, &e_t),
                ScorerKind::BaselineDistmult => score_distmult(&e_h, &e_r, &e_t),
                ScorerKind::BaselineComplex => score_complex(&e_h, &e_r, &e_t),
                other => Err(Error::Config(format!(
                    "{} is not a baseline scorer",
                    other.as_str()
                ))),
            }
        })
        .collect()
}

/// Scores candidates by cosine between the condensed-graph embedding and
/// each relation-name embedding.
pub fn graph_similarity_scores(
    graph_embedding: &[f64],
    embedder: &Embedder,
    candidates: &CandidateSet,
) -> Result<Vec<f64>> {
    candidates
        .relations
        .iter()
        .map(|(_, name)| {
            let e_r = embedder.embed_text(name)?;
            Ok(cosine(graph_embedding, e_r.values()))
        })
        .collect()
}

/// Normalizes free text for candidate matching: trim, lowercase, collapse
/// internal whitespace, spaces to underscores.
pub fn normalize_relation_name(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Matches generated text against the candidate set after normalizing both
/// sides; `None` is the invalid marker.
pub fn match_generated<'a>(
    candidates: &'a CandidateSet,
    generated: &str,
) -> Option<&'a (RelationId, String)> {
    let wanted = normalize_relation_name(generated);
    candidates
        .relations
        .iter()
        .find(|(_, name)| normalize_relation_name(name) == wanted)
}

/// Micro-averaged precision/recall/F1. With exactly one prediction per
/// instance (invalid markers included in both denominators) the three
/// values coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n: usize,
}

pub fn micro_prf(records: &[PredictionRecord]) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::Precondition("need at least one prediction".into()));
    }
    let n = records.len();
    let correct = records
        .iter()
        .filter(|r| r.predicted.as_deref() == Some(r.gold.as_str()))
        .count();
    let precision = correct as f64 / n as f64;
    let recall = correct as f64 / n as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        precision,
        recall,
        f1,
        n,
    })
}

/// Hard error when the relation vocabularies of the encoder's training KG
/// and the evaluation KG intersect; zero-shot evaluation requires them to be
/// disjoint.
pub fn ensure_disjoint_relation_vocabs(
    train_relations: &BTreeSet<String>,
    eval_relations: &BTreeSet<String>,
) -> Result<()> {
    let overlap: Vec<&String> = train_relations.intersection(eval_relations).collect();
    if overlap.is_empty() {
        return Ok(());
    }
    let mut shown: Vec<&str> = overlap.iter().take(5).map(|s| s.as_str()).collect();
    if overlap.len() > shown.len() {
        shown.push("...");
    }
    Err(Error::Config(format!(
        "zero-shot hygiene violation: {} relation type(s) shared between the \
         training KG and the evaluation KG ({})",
        overlap.len(),
        shown.join(", ")
    )))
}

/// Masks a fraction of test-set relation types out of the training triples:
/// `ceil(fraction * |R_test|)` types are picked by seeded shuffle and every
/// train triple using one of them is removed. Dev and test stay untouched.
/// Returns the masked split and the masked relation names.
pub fn mask_relations(
    split: &DatasetSplit,
    fraction: f64,
    seed: u64,
) -> Result<(DatasetSplit, Vec<String>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Precondition(
            "mask fraction must satisfy 0 <= fraction < 1".into(),
        ));
    }
    let mut test_relations: Vec<String> = {
        let set: BTreeSet<&str> = split.test.iter().map(|t| t.relation.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    };
    let count = (fraction * test_relations.len() as f64).ceil() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    test_relations.shuffle(&mut rng);
    let mut masked: Vec<String> = test_relations.into_iter().take(count).collect();
    masked.sort();

    let masked_set: BTreeSet<&str> = masked.iter().map(String::as_str).collect();
    let mut out = split.clone();
    out.train
        .retain(|t| !masked_set.contains(t.relation.as_str()));
    Ok((out, masked))
}

/// Writes `head,tail,gold,predicted,source,score` CSV rows; the invalid
/// marker serializes as `<invalid>`.
pub fn write_predictions_csv(mut w: impl Write, records: &[PredictionRecord]) -> Result<()> {
    writeln!(w, "head,tail,gold,predicted,source,score")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            csv_field(&r.head),
            csv_field(&r.tail),
            csv_field(&r.gold),
            csv_field(r.predicted.as_deref().unwrap_or("<invalid>")),
            r.source.as_str(),
            r.score
        )?;
    }
    Ok(())
}

/// Reads records written by [`write_predictions_csv`].
pub fn read_predictions_csv(r: impl BufRead) -> Result<Vec<PredictionRecord>> {
    let mut lines = r.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim_end() != "head,tail,gold,predicted,source,score" {
                return Err(Error::Parse {
                    path: "<predictions>".into(),
                    line: 1,
                    msg: "unexpected header".into(),
                });
            }
        }
        None => return Ok(Vec::new()),
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields = parse_csv_line(&line).ok_or_else(|| Error::Parse {
            path: "<predictions>".into(),
            line: idx + 2,
            msg: "expected 6 fields".into(),
        })?;
        let score: f64 = fields[5].parse().map_err(|_| Error::Parse {
            path: "<predictions>".into(),
            line: idx + 2,
            msg: format!("bad score `{}`", fields[5]),
        })?;
        out.push(PredictionRecord {
            head: fields[0].clone(),
            tail: fields[1].clone(),
            gold: fields[2].clone(),
            predicted: if fields[3] == "<invalid>" {
                None
            } else {
                Some(fields[3].clone())
            },
            source: ScorerKind::parse(&fields[4])?,
            score,
        });
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn parse_csv_line(line: &str) -> Option<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        if quoted {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    cur.push('"');
                }
                '"' => quoted = false,
                other => cur.push(other),
            }
        } else {
            match c {
                '"' if cur.is_empty() => quoted = true,
                ',' => fields.push(std::mem::take(&mut cur)),
                other => cur.push(other),
            }
        }
    }
    fields.push(cur);
    if fields.len() == 6 {
        Some(fields)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::RawTriple;

    fn vec3(a: f64, b: f64, c: f64) -> Vec<f64> {
        vec![a, b, c]
    }

    #[test]
    fn transe_perfect_translation_scores_zero() {
        let h = vec3(0.1, 0.2, 0.3);
        let r = vec3(1.0, -1.0, 0.5);
        let t: Vec<f64> = h.iter().zip(&r).map(|(a, b)| a + b).collect();
        assert_eq!(score_transe(&h, &r, &t).unwrap(), 0.0);
    }

    #[test]
    fn transe_unit_offset_scores_minus_one() {
        let zero = vec3(0.0, 0.0, 0.0);
        let t = vec3(1.0, 0.0, 0.0);
        assert_eq!(score_transe(&zero, &zero, &t).unwrap(), -1.0);
    }

    #[test]
    fn transe_matches_scalar_oracle() {
        let h = [0.3, -0.7, 1.1, 0.0, 2.5, -1.3, 0.4, 0.9];
        let r = [1.0, 0.5, -0.25, 0.75, -2.0, 0.1, 0.0, -0.6];
        let t = [0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2];
        let diff: Vec<f64> = (0..8).map(|i| h[i] + r[i] - t[i]).collect();
        let expect = -ctgraph_testkit::l2_norm_naive(&diff);
        assert!((score_transe(&h, &r, &t).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn distmult_ones_relation_reduces_to_dot() {
        let h = vec3(0.5, -2.0, 1.5);
        let ones = vec3(1.0, 1.0, 1.0);
        let t = vec3(2.0, 0.25, -1.0);
        let expect = ctgraph_testkit::dot_naive(&h, &t);
        assert!((score_distmult(&h, &ones, &t).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn distmult_zero_argument_scores_zero() {
        let h = vec3(0.5, -2.0, 1.5);
        let zero = vec3(0.0, 0.0, 0.0);
        assert_eq!(score_distmult(&h, &zero, &h).unwrap(), 0.0);
    }

    #[test]
    fn complex_with_zero_imaginary_equals_distmult() {
        let hr = [0.3, -0.7, 1.1, 0.4];
        let rr = [1.0, 0.5, -0.25, 0.75];
        let tr = [0.2, -0.2, 2.0, 0.6];
        let mut h = hr.to_vec();
        h.extend_from_slice(&[0.0; 4]);
        let mut r = rr.to_vec();
        r.extend_from_slice(&[0.0; 4]);
        let mut t = tr.to_vec();
        t.extend_from_slice(&[0.0; 4]);
        let complex = score_complex(&h, &r, &t).unwrap();
        let distmult = score_distmult(&hr, &rr, &tr).unwrap();
        assert_eq!(complex, distmult);
    }

    #[test]
    fn complex_self_pair_with_real_ones_is_modulus_sum() {
        let h = vec![0.5, -1.0, 0.25, 2.0]; // c = 2: real (0.5, -1.0), imag (0.25, 2.0)
        let mut r = vec![1.0, 1.0];
        r.extend_from_slice(&[0.0, 0.0]);
        let score = score_complex(&h, &r, &h).unwrap();
        let expect = 0.5f64.powi(2) + 1.0 + 0.25f64.powi(2) + 4.0;
        assert!((score - expect).abs() <= 1e-12);
    }

    #[test]
    fn complex_matches_complex_arithmetic_oracle() {
        let h = [0.3, -0.7, 1.1, 0.4, -0.2, 0.9, 0.05, -1.4];
        let r = [1.0, 0.5, -0.25, 0.75, 0.6, -0.3, 0.8, 0.2];
        let t = [0.2, -0.2, 2.0, 0.6, -0.5, 0.33, 1.25, -0.75];
        let c = 4;
        let mut expect = 0.0;
        for j in 0..c {
            // (a+bi)(c+di)(e-fi), take the real part
            let (a, b) = (h[j], h[c + j]);
            let (cc, d) = (r[j], r[c + j]);
            let (e, f) = (t[j], t[c + j]);
            let (p_re, p_im) = (a * cc - b * d, a * d + b * cc);
            expect += p_re * e + p_im * f;
        }
        assert!((score_complex(&h, &r, &t).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn complex_rejects_odd_dimension() {
        let v = vec![1.0, 2.0, 3.0];
        assert!(score_complex(&v, &v, &v).is_err());
    }

    fn candidates(names: &[&str]) -> CandidateSet {
        CandidateSet::new(
            (EntityId(0), EntityId(1)),
            names
                .iter()
                .enumerate()
                .map(|(i, n)| (RelationId(i as u32), n.to_string()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn argmax_breaks_ties_toward_smallest_id() {
        let cands = candidates(&["a", "b", "c"]);
        let (winner, score) = argmax_candidate(&cands, &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(winner.0, RelationId(0));
        assert_eq!(score, 0.5);
    }

    #[test]
    fn single_candidate_always_wins() {
        let cands = candidates(&["only"]);
        let (winner, _) = argmax_candidate(&cands, &[-123.0]).unwrap();
        assert_eq!(winner.1, "only");
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_relation_name("  Co  Author \n"), "co_author");
        assert_eq!(normalize_relation_name("co_author"), "co_author");
    }

    #[test]
    fn generation_matching_and_invalid_marker() {
        let cands = candidates(&["co_author", "advisor"]);
        assert_eq!(
            match_generated(&cands, "  Co Author ").map(|c| c.1.as_str()),
            Some("co_author")
        );
        assert!(match_generated(&cands, "unrelated").is_none());
    }

    fn record(gold: &str, predicted: Option<&str>) -> PredictionRecord {
        PredictionRecord {
            head: "h".into(),
            tail: "t".into(),
            gold: gold.into(),
            predicted: predicted.map(str::to_owned),
            source: ScorerKind::EmbeddingSimilarity,
            score: 0.0,
        }
    }

    #[test]
    fn micro_all_correct() {
        let recs = vec![record("a", Some("a")), record("b", Some("b"))];
        let m = micro_prf(&recs).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn micro_all_wrong() {
        let recs = vec![record("a", Some("b")), record("b", None)];
        let m = micro_prf(&recs).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn micro_identity_under_single_label_regime() {
        let recs = vec![
            record("a", Some("a")),
            record("b", Some("a")),
            record("c", Some("c")),
            record("d", None),
        ];
        let m = micro_prf(&recs).unwrap();
        assert_eq!(m.precision, m.recall);
        assert_eq!(m.precision, m.f1);
        assert_eq!(m.n, 4);
    }

    fn toy_split() -> DatasetSplit {
        let t = |h: &str, r: &str, t2: &str| RawTriple {
            head: h.into(),
            relation: r.into(),
            tail: t2.into(),
        };
        DatasetSplit {
            train: vec![
                t("a", "r1", "b"),
                t("b", "r2", "c"),
                t("c", "r3", "d"),
                t("d", "r4", "a"),
                t("a", "r4", "c"),
            ],
            dev: vec![],
            test: vec![
                t("a", "r1", "c"),
                t("b", "r2", "d"),
                t("c", "r3", "a"),
                t("d", "r4", "b"),
            ],
            warnings: vec![],
        }
    }

    #[test]
    fn mask_fraction_zero_is_identity() {
        let split = toy_split();
        let (masked, names) = mask_relations(&split, 0.0, 42).unwrap();
        assert!(names.is_empty());
        assert_eq!(masked.train.len(), split.train.len());
    }

    #[test]
    fn mask_half_of_four_relations_removes_two_types() {
        let split = toy_split();
        let (masked, names) = mask_relations(&split, 0.5, 42).unwrap();
        assert_eq!(names.len(), 2);
        let remaining: BTreeSet<&str> = masked.train.iter().map(|t| t.relation.as_str()).collect();
        for n in &names {
            assert!(!remaining.contains(n.as_str()));
        }
        assert_eq!(masked.test.len(), split.test.len());
    }

    #[test]
    fn mask_is_deterministic_in_the_seed() {
        let split = toy_split();
        let (_, a) = mask_relations(&split, 0.5, 7).unwrap();
        let (_, b) = mask_relations(&split, 0.5, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mask_rejects_bad_fraction() {
        let split = toy_split();
        assert!(mask_relations(&split, 1.0, 0).is_err());
        assert!(mask_relations(&split, -0.1, 0).is_err());
    }

    #[test]
    fn disjoint_vocabs_pass_and_overlap_fails() {
        let a: BTreeSet<String> = ["r1", "r2"].iter().map(|s| s.to_string()).collect();
        let b: BTreeSet<String> = ["q1", "q2"].iter().map(|s| s.to_string()).collect();
        assert!(ensure_disjoint_relation_vocabs(&a, &b).is_ok());
        let c: BTreeSet<String> = ["r2", "q9"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            ensure_disjoint_relation_vocabs(&a, &c),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn predictions_csv_round_trip() {
        let recs = vec![
            record("a", Some("a")),
            PredictionRecord {
                head: "name, with comma".into(),
                tail: "t".into(),
                gold: "g".into(),
                predicted: None,
                source: ScorerKind::BaselineTranse,
                score: -1.25,
            },
        ];
        let mut buf = Vec::new();
        write_predictions_csv(&mut buf, &recs).unwrap();
        let back = read_predictions_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn scale_invariance_of_argmax() {
        // multiplying every candidate-relation embedding by the same
        // positive scalar must not change the DistMult or cosine argmax;
        // translating e_h and e_t by a common offset must not change the
        // TransE argmax.
        let h = [0.3, -0.7, 1.1, 0.4];
        let t = [0.2, -0.2, 2.0, 0.6];
        let rels: Vec<Vec<f64>> = vec![
            vec![1.0, 0.5, -0.25, 0.75],
            vec![-0.6, 0.4, 0.9, -0.1],
            vec![0.05, 1.4, 0.3, 0.2],
        ];
        let argmax = |scores: &[f64]| {
            scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        };
        for &scale in &[0.5, 2.0, 17.0] {
            let plain: Vec<f64> = rels
                .iter()
                .map(|r| score_distmult(&h, r, &t).unwrap())
                .collect();
            let scaled: Vec<f64> = rels
                .iter()
                .map(|r| {
                    let rs: Vec<f64> = r.iter().map(|x| x * scale).collect();
                    score_distmult(&h, &rs, &t).unwrap()
                })
                .collect();
            assert_eq!(argmax(&plain), argmax(&scaled));

            let plain_cos: Vec<f64> = rels.iter().map(|r| cosine(&h, r)).collect();
            let scaled_cos: Vec<f64> = rels
                .iter()
                .map(|r| {
                    let rs: Vec<f64> = r.iter().map(|x| x * scale).collect();
                    cosine(&h, &rs)
                })
                .collect();
            assert_eq!(argmax(&plain_cos), argmax(&scaled_cos));
        }
        let offset = [5.0, -3.0, 2.0, 0.5];
        let h2: Vec<f64> = h.iter().zip(&offset).map(|(a, b)| a + b).collect();
        let t2: Vec<f64> = t.iter().zip(&offset).map(|(a, b)| a + b).collect();
        let plain: Vec<f64> = rels.iter().map(|r| score_transe(&h, r, &t).unwrap()).collect();
        let shifted: Vec<f64> = rels
            .iter()
            .map(|r| score_transe(&h2, r, &t2).unwrap())
            .collect();
        assert_eq!(argmax(&plain), argmax(&shifted));
    }
}
