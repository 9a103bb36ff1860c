use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::corpus::Post;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingError {
    #[error("embedding failed for {} post(s): {}", .0.len(), .0.iter().map(|e| format!("{}: {}", e.post_id, e.reason)).collect::<Vec<_>>().join("; "))]
    Batch(Vec<PostEmbeddingError>),
    #[error("sidecar {path}: line {line}: {reason}")]
    Sidecar { path: String, line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostEmbeddingError {
    pub post_id: String,
    pub reason: String,
}

/// Source of post vectors. A provider is built for one corpus snapshot;
/// identical posts always receive identical vectors.
pub trait EmbeddingProvider<S: Scalar> {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, post: &Post) -> Result<EmbeddingVector<S>, String>;
}

/// Embeds every post; any failure aborts the batch with a per-post report.
pub fn embed_all<S: Scalar>(provider: &dyn EmbeddingProvider<S>, posts: &[Post]) -> Result<Vec<EmbeddingVector<S>>, EmbeddingError> {
    let mut vectors = Vec::with_capacity(posts.len());
    let mut failures = Vec::new();
    for post in posts {
        match provider.embed(post) {
            Ok(v) => vectors.push(v),
            Err(reason) => failures.push(PostEmbeddingError {
                post_id: post.id.clone(),
                reason,
            }),
        }
    }
    if failures.is_empty() {
        Ok(vectors)
    } else {
        Err(EmbeddingError::Batch(failures))
    }
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// TF-IDF fitted on a corpus: raw term counts weighted by
/// `ln((1 + N) / (1 + df)) + 1`, then L2-normalized. Vocabulary indices
/// follow lexicographic term order.
#[derive(Debug, Clone)]
pub struct TfIdf<S> {
    vocabulary: HashMap<String, u32>,
    idf: Vec<S>,
}

impl<S: Scalar> TfIdf<S> {
    pub fn fit<'a>(documents: impl IntoIterator<Item = &'a str>) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for doc in documents {
            n_docs += 1;
            let mut terms: Vec<String> = tokenize(doc).collect();
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        let n = S::from_count(n_docs);
        let mut vocabulary = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, count)) in df.into_iter().enumerate() {
            vocabulary.insert(term, i as u32);
            idf.push(((S::one() + n) / (S::one() + S::from_count(count))).ln() + S::one());
        }
        TfIdf { vocabulary, idf }
    }

    pub fn fit_posts(posts: &[Post]) -> Self {
        let texts: Vec<String> = posts.iter().map(Post::embedding_text).collect();
        Self::fit(texts.iter().map(String::as_str))
    }

    pub fn vocabulary_size(&self) -> usize {
        self.idf.len()
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.vocabulary.get(term).copied()
    }

    /// Out-of-vocabulary terms are dropped.
    pub fn transform(&self, text: &str) -> EmbeddingVector<S> {
        let pairs = tokenize(text)
            .filter_map(|t| self.vocabulary.get(&t).copied())
            .map(|i| (i, self.idf[i as usize]))
            .collect();
        EmbeddingVector::from_sparse(self.idf.len(), pairs).normalized()
    }
}

impl<S: Scalar> EmbeddingProvider<S> for TfIdf<S> {
    fn name(&self) -> &str {
        "tfidf"
    }

    fn dimension(&self) -> usize {
        self.vocabulary_size()
    }

    fn embed(&self, post: &Post) -> Result<EmbeddingVector<S>, String> {
        Ok(self.transform(&post.embedding_text()))
    }
}

/// One line of a sidecar embedding file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Precomputed vectors keyed by post id, loaded from a sidecar JSONL file.
#[derive(Debug, Clone)]
pub struct PrecomputedVectors<S> {
    dimension: usize,
    vectors: HashMap<String, EmbeddingVector<S>>,
}

impl<S: Scalar> PrecomputedVectors<S> {
    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = std::fs::File::open(path).map_err(|e| EmbeddingError::Sidecar {
            path: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })?;
        Self::read(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Every record must share the first record's dimension.
    pub fn read<R: BufRead>(reader: R, origin: &str) -> Result<Self, EmbeddingError> {
        let err = |line: usize, reason: String| EmbeddingError::Sidecar {
            path: origin.to_string(),
            line,
            reason,
        };
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| err(line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SidecarRecord = serde_json::from_str(&line).map_err(|e| err(line_no, e.to_string()))?;
            let dim = *dimension.get_or_insert(record.vector.len());
            if record.vector.len() != dim {
                return Err(err(
                    line_no,
                    format!("vector for `{}` has dimension {}, expected {dim}", record.id, record.vector.len()),
                ));
            }
            if record.vector.iter().any(|v| !v.is_finite()) {
                return Err(err(line_no, format!("vector for `{}` has non-finite values", record.id)));
            }
            let values: Vec<S> = record.vector.iter().map(|&v| S::from_f64_lossy(v)).collect();
            if vectors.insert(record.id.clone(), EmbeddingVector::from_dense(&values)).is_some() {
                return Err(err(line_no, format!("duplicate id `{}`", record.id)));
            }
        }
        Ok(PrecomputedVectors {
            dimension: dimension.unwrap_or(0),
            vectors,
        })
    }
}

impl<S: Scalar> EmbeddingProvider<S> for PrecomputedVectors<S> {
    fn name(&self) -> &str {
        "file"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, post: &Post) -> Result<EmbeddingVector<S>, String> {
        self.vectors
            .get(&post.id)
            .cloned()
            .ok_or_else(|| "no vector in sidecar file".to_string())
    }
}

/// Writes vectors in the sidecar format, dense.
pub fn write_sidecar<S: Scalar, W: Write>(mut out: W, ids: &[String], vectors: &[EmbeddingVector<S>]) -> std::io::Result<()> {
    for (id, v) in ids.iter().zip(vectors) {
        let record = SidecarRecord {
            id: id.clone(),
            vector: v.to_dense().iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Which provider a workspace uses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ProviderSpec {
    #[default]
    TfIdf,
    File(PathBuf),
}

impl ProviderSpec {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tfidf" => Some(ProviderSpec::TfIdf),
            _ => s
                .strip_prefix("file:")
                .filter(|p| !p.is_empty())
                .map(|p| ProviderSpec::File(PathBuf::from(p))),
        }
    }

    pub fn embed<S: Scalar>(&self, posts: &[Post]) -> Result<Vec<EmbeddingVector<S>>, EmbeddingError> {
        match self {
            ProviderSpec::TfIdf => embed_all(&TfIdf::<S>::fit_posts(posts), posts),
            ProviderSpec::File(path) => embed_all(&PrecomputedVectors::<S>::load(path)?, posts),
        }
    }
}

impl std::fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProviderSpec::TfIdf => f.write_str("tfidf"),
            ProviderSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_lowercases_and_splits() {
        let t: Vec<_> = tokenize("Hello, WORLD! c++ is-fun 2021").collect();
        assert_eq!(t, ["hello", "world", "c", "is", "fun", "2021"]);
    }

    #[test]
    fn three_document_hand_computed_cosine() {
        // N = 3; df(cat) = 1, df(dog) = 2, df(fish) = 1
        let model = TfIdf::<f64>::fit(["cat cat dog", "dog", "fish"]);
        let a = model.transform("cat cat dog");
        let b = model.transform("dog");
        let idf_cat = (4.0f64 / 2.0).ln() + 1.0;
        let idf_dog = (4.0f64 / 3.0).ln() + 1.0;
        let norm_a = ((2.0 * idf_cat).powi(2) + idf_dog.powi(2)).sqrt();
        let expected = idf_dog / norm_a;
        assert!((a.cosine(&b) - expected).abs() < 1e-9, "{} vs {expected}", a.cosine(&b));
        // frozen value of the expression above
        assert!((expected - 0.355_432_467_850_417).abs() < 1e-12);
        let c = model.transform("fish");
        assert_eq!(a.cosine(&c), 0.0);
    }

    #[test]
    fn identical_posts_get_identical_vectors() {
        let posts = vec![Post::new("a", "same", "text here"), Post::new("b", "same", "text here"), Post::new("c", "x", "y")];
        let v: Vec<EmbeddingVector<f64>> = ProviderSpec::TfIdf.embed(&posts).unwrap();
        assert_eq!(v[0], v[1]);
        assert!(v.iter().all(|x| x.dimension() == v[0].dimension()));
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sidecar_dimension_is_enforced() {
        let src = "{\"id\":\"a\",\"vector\":[1,0,0]}\n{\"id\":\"b\",\"vector\":[1,0]}\n";
        let err = PrecomputedVectors::<f64>::read(src.as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, EmbeddingError::Sidecar { line: 2, .. }));
    }

    #[test]
    fn missing_sidecar_vector_aborts_batch() {
        let src = "{\"id\":\"a\",\"vector\":[1,0]}\n";
        let provider = PrecomputedVectors::<f64>::read(src.as_bytes(), "mem").unwrap();
        let posts = vec![Post::new("a", "t", ""), Post::new("b", "t", ""), Post::new("c", "t", "")];
        match embed_all(&provider, &posts).unwrap_err() {
            EmbeddingError::Batch(errs) => {
                let ids: Vec<_> = errs.iter().map(|e| e.post_id.as_str()).collect();
                assert_eq!(ids, ["b", "c"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let vecs = vec![EmbeddingVector::from_dense(&[0.5f64, 0.0, 1.5]), EmbeddingVector::from_dense(&[0.0, 2.0, 0.0])];
        let mut buf = Vec::new();
        write_sidecar(&mut buf, &ids, &vecs).unwrap();
        let loaded = PrecomputedVectors::<f64>::read(buf.as_slice(), "mem").unwrap();
        assert_eq!(loaded.dimension(), 3);
        assert_eq!(loaded.embed(&Post::new("b", "t", "")).unwrap(), vecs[1]);
    }

    #[test]
    fn provider_spec_parsing() {
        assert_eq!(ProviderSpec::parse("tfidf"), Some(ProviderSpec::TfIdf));
        assert_eq!(ProviderSpec::parse("file:/tmp/x.jsonl"), Some(ProviderSpec::File("/tmp/x.jsonl".into())));
        assert_eq!(ProviderSpec::parse("file:"), None);
        assert_eq!(ProviderSpec::parse("use"), None);
    }
}
