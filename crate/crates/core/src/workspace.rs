//! The sandbox: posts, the applied configuration with its per-post results,
//! collections, embeddings and every query built on them.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, Highlight, HighlightMap, ImpactNode};
use crate::collections::{CollectionKind, Collections, CoverageRatio};
use crate::corpus::{read_jsonl, ImportReport, Post};
use crate::error::{Error, Result};
use crate::rules::{evaluate_post, parse_config, ComplexityMetrics, MatchResult, MatchSpan, ParseError, PostEvaluation, RuleSet, TriggerRef};
use crate::similarity::{self, Distribution, EmbeddingError, ProviderSpec, SimilarityScore};
use crate::store::Store;
use crate::Embedding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    /// Newest first.
    New,
    /// Highest score first.
    Top,
    /// Most similar to the reference first.
    FpfnMisses,
    /// Least similar to the reference first.
    FpfnFalseAlarms,
}

impl FromStr for SortOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "new" => SortOrder::New,
            "top" => SortOrder::Top,
            "fpfn_misses" | "fpfn-misses" | "fpfn" => SortOrder::FpfnMisses,
            "fpfn_false_alarms" | "fpfn-false-alarms" => SortOrder::FpfnFalseAlarms,
            _ => {
                return Err(Error::BadArgument {
                    what: "sort",
                    value: s.to_string(),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    #[default]
    All,
    Filtered,
    Unfiltered,
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Bucket::All,
            "filtered" => Bucket::Filtered,
            "unfiltered" => Bucket::Unfiltered,
            _ => {
                return Err(Error::BadArgument {
                    what: "bucket",
                    value: s.to_string(),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandboxSummary {
    pub total_posts: usize,
    pub filtered_posts: usize,
    pub ratio: f64,
}

/// One row of a post listing.
#[derive(Debug, Clone, Serialize)]
pub struct ListedPost<'a> {
    pub post: &'a Post,
    pub result: &'a MatchResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collection: Option<CollectionKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

/// Snapshot of what an embedding pass needs, so it can run without holding
/// the workspace.
#[derive(Debug, Clone)]
pub struct EmbeddingJob {
    generation: u64,
    provider: ProviderSpec,
    posts: Vec<Post>,
}

impl EmbeddingJob {
    pub fn run(self) -> EmbeddingOutcome {
        EmbeddingOutcome {
            generation: self.generation,
            result: self.provider.embed(&self.posts),
        }
    }
}

#[derive(Debug)]
pub struct EmbeddingOutcome {
    generation: u64,
    result: std::result::Result<Vec<Embedding>, EmbeddingError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingStatus {
    Pending,
    Ready,
    Failed,
}

#[derive(Debug, Clone)]
enum EmbeddingState {
    Pending,
    Ready(Vec<Embedding>),
    Failed(EmbeddingError),
}

#[derive(Debug)]
pub struct Workspace {
    posts: Vec<Post>,
    index: HashMap<String, usize>,
    config: Option<RuleSet>,
    evaluations: Vec<PostEvaluation>,
    results: Vec<MatchResult>,
    collections: Collections,
    provider: ProviderSpec,
    embeddings: EmbeddingState,
    generation: u64,
    reference: Option<Embedding>,
    scores: Option<Vec<f64>>,
    store: Option<Store>,
}

impl Workspace {
    /// In-memory workspace with nothing persisted.
    pub fn new(provider: ProviderSpec) -> Self {
        Workspace {
            posts: Vec::new(),
            index: HashMap::new(),
            config: None,
            evaluations: Vec::new(),
            results: Vec::new(),
            collections: Collections::default(),
            provider,
            embeddings: EmbeddingState::Ready(Vec::new()),
            generation: 0,
            reference: None,
            scores: None,
            store: None,
        }
    }

    /// Opens (or creates) a persisted workspace. Embeddings start pending;
    /// call [`Workspace::embed_now`] or run an [`EmbeddingJob`].
    pub fn open(dir: impl Into<PathBuf>, provider: ProviderSpec) -> Result<Self> {
        let store = Store::open(dir)?;
        let mut ws = Workspace::new(provider);
        let posts = store.load_posts()?;
        let config = store.load_config()?;
        let collections = store.load_collections()?;
        ws.add_posts(posts);
        if let Some(yaml) = config {
            ws.install_config(Some(parse_config(&yaml)?));
        }
        ws.collections = collections;
        ws.collections.validate(|id| ws.index.contains_key(id))?;
        ws.store = Some(store);
        Ok(ws)
    }

    pub fn provider(&self) -> &ProviderSpec {
        &self.provider
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.index.get(id).map(|&i| &self.posts[i])
    }

    pub fn result(&self, id: &str) -> Option<&MatchResult> {
        self.index.get(id).map(|&i| &self.results[i])
    }

    pub fn results(&self) -> &[MatchResult] {
        &self.results
    }

    pub fn config(&self) -> Option<&RuleSet> {
        self.config.as_ref()
    }

    pub fn collections(&self) -> &Collections {
        &self.collections
    }

    pub fn embeddings_ready(&self) -> bool {
        matches!(self.embeddings, EmbeddingState::Ready(_))
    }

    pub fn embedding_status(&self) -> EmbeddingStatus {
        match self.embeddings {
            EmbeddingState::Pending => EmbeddingStatus::Pending,
            EmbeddingState::Ready(_) => EmbeddingStatus::Ready,
            EmbeddingState::Failed(_) => EmbeddingStatus::Failed,
        }
    }

    pub fn embeddings(&self) -> Option<&[Embedding]> {
        match &self.embeddings {
            EmbeddingState::Ready(v) => Some(v),
            _ => None,
        }
    }

    /// Imports a JSONL batch. Accepted posts are persisted and evaluated
    /// against the current configuration; embeddings go back to pending.
    pub fn import_jsonl<R: BufRead>(&mut self, source: R) -> Result<ImportReport> {
        let existing: HashSet<String> = self.index.keys().cloned().collect();
        let (posts, report) = read_jsonl(source, &existing)?;
        if let Some(store) = &self.store {
            store.append_posts(&posts)?;
        }
        self.add_posts(posts);
        Ok(report)
    }

    fn add_posts(&mut self, posts: Vec<Post>) {
        if posts.is_empty() {
            return;
        }
        let empty = RuleSet::empty();
        let rules = self.config.as_ref().unwrap_or(&empty);
        for post in posts {
            let eval = evaluate_post(rules, &post);
            self.results.push(eval.to_match_result());
            self.evaluations.push(eval);
            self.index.insert(post.id.clone(), self.posts.len());
            self.posts.push(post);
        }
        self.generation += 1;
        self.embeddings = EmbeddingState::Pending;
        self.reference = None;
        self.scores = None;
    }

    /// `None` when embeddings are already current.
    pub fn embedding_job(&self) -> Option<EmbeddingJob> {
        (!self.embeddings_ready()).then(|| EmbeddingJob {
            generation: self.generation,
            provider: self.provider.clone(),
            posts: self.posts.clone(),
        })
    }

    /// Installs vectors from a finished job. Returns false for a stale job
    /// (posts were imported after it started).
    pub fn install_embeddings(&mut self, outcome: EmbeddingOutcome) -> bool {
        if outcome.generation != self.generation {
            return false;
        }
        self.embeddings = match outcome.result {
            Ok(vectors) => EmbeddingState::Ready(vectors),
            Err(e) => EmbeddingState::Failed(e),
        };
        self.refresh_reference();
        true
    }

    /// Computes embeddings synchronously. Returns the number of vectors.
    pub fn embed_now(&mut self) -> Result<usize> {
        if let Some(job) = self.embedding_job() {
            self.install_embeddings(job.run());
        }
        match &self.embeddings {
            EmbeddingState::Ready(v) => Ok(v.len()),
            EmbeddingState::Failed(e) => Err(e.clone().into()),
            EmbeddingState::Pending => Err(Error::Pending),
        }
    }

    /// Parses and applies a configuration, recomputing every post's result.
    pub fn apply_config(&mut self, yaml: &str) -> std::result::Result<ComplexityMetrics, ParseError> {
        let ruleset = parse_config(yaml)?;
        let metrics = ruleset.complexity();
        if let Some(store) = &self.store {
            if let Err(e) = store.save_config(Some(yaml)) {
                log::error!("could not persist configuration: {e}");
            }
        }
        self.install_config(Some(ruleset));
        Ok(metrics)
    }

    pub fn clear_config(&mut self) -> Result<()> {
        if let Some(store) = &self.store {
            store.save_config(None)?;
        }
        self.install_config(None);
        Ok(())
    }

    fn install_config(&mut self, config: Option<RuleSet>) {
        let empty = RuleSet::empty();
        let rules = config.as_ref().unwrap_or(&empty);
        self.evaluations = self.posts.iter().map(|p| evaluate_post(rules, p)).collect();
        self.results = self.evaluations.iter().map(PostEvaluation::to_match_result).collect();
        self.config = config;
    }

    fn is_filtered(&self, id: &str) -> bool {
        self.result(id).is_some_and(|r| r.filtered)
    }

    pub fn summary(&self) -> Result<SandboxSummary> {
        if self.posts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let filtered = self.results.iter().filter(|r| r.filtered).count();
        Ok(SandboxSummary {
            total_posts: self.posts.len(),
            filtered_posts: filtered,
            ratio: filtered as f64 / self.posts.len() as f64,
        })
    }

    /// Posts in the requested bucket and order. Ties break by id ascending.
    pub fn list_posts(&self, sort: SortOrder, bucket: Bucket) -> Result<Vec<ListedPost<'_>>> {
        let scores = match sort {
            SortOrder::FpfnMisses | SortOrder::FpfnFalseAlarms => Some(self.require_scores()?),
            _ => None,
        };
        let mut idx: Vec<usize> = (0..self.posts.len())
            .filter(|&i| match bucket {
                Bucket::All => true,
                Bucket::Filtered => self.results[i].filtered,
                Bucket::Unfiltered => !self.results[i].filtered,
            })
            .collect();
        let by_id = |a: usize, b: usize| self.posts[a].id.cmp(&self.posts[b].id);
        match sort {
            SortOrder::New => idx.sort_by(|&a, &b| self.posts[b].created_utc.cmp(&self.posts[a].created_utc).then(by_id(a, b))),
            SortOrder::Top => idx.sort_by(|&a, &b| self.posts[b].score.cmp(&self.posts[a].score).then(by_id(a, b))),
            SortOrder::FpfnMisses => {
                let s = scores.expect("scores checked above");
                idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(by_id(a, b)));
            }
            SortOrder::FpfnFalseAlarms => {
                let s = scores.expect("scores checked above");
                idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(by_id(a, b)));
            }
        }
        Ok(idx
            .into_iter()
            .map(|i| ListedPost {
                post: &self.posts[i],
                result: &self.results[i],
                collection: self.collections.kind_of(&self.posts[i].id),
                similarity: self.scores.as_ref().map(|s| s[i]),
            })
            .collect())
    }

    pub fn add_to_collection(&mut self, kind: CollectionKind, post_id: &str) -> Result<&[String]> {
        if !self.index.contains_key(post_id) {
            return Err(Error::UnknownPost(post_id.to_string()));
        }
        if self.collections.add(kind, post_id) {
            self.collections_changed()?;
        }
        Ok(self.collections.members(kind))
    }

    pub fn remove_from_collection(&mut self, kind: CollectionKind, post_id: &str) -> Result<&[String]> {
        if !self.index.contains_key(post_id) {
            return Err(Error::UnknownPost(post_id.to_string()));
        }
        if self.collections.remove(kind, post_id) {
            self.collections_changed()?;
        }
        Ok(self.collections.members(kind))
    }

    /// Replaces both collections at once.
    pub fn set_collections(&mut self, collections: Collections) -> Result<()> {
        collections.validate(|id| self.index.contains_key(id))?;
        self.collections = collections;
        self.collections_changed()
    }

    fn collections_changed(&mut self) -> Result<()> {
        if let Some(store) = &self.store {
            store.save_collections(&self.collections)?;
        }
        self.refresh_reference();
        Ok(())
    }

    pub fn coverage(&self, kind: CollectionKind) -> Result<CoverageRatio> {
        self.collections.coverage(kind, |id| self.is_filtered(id))
    }

    fn refresh_reference(&mut self) {
        let EmbeddingState::Ready(vectors) = &self.embeddings else {
            self.reference = None;
            self.scores = None;
            return;
        };
        let members = self.collections.should_filter.iter().filter_map(|id| self.index.get(id)).map(|&i| &vectors[i]);
        self.reference = similarity::reference_vector(members);
        self.scores = self
            .reference
            .as_ref()
            .map(|r| vectors.iter().map(|v| v.cosine(r)).collect());
    }

    fn require_ready(&self) -> Result<()> {
        match &self.embeddings {
            EmbeddingState::Ready(_) => Ok(()),
            EmbeddingState::Pending => Err(Error::Pending),
            EmbeddingState::Failed(e) => Err(e.clone().into()),
        }
    }

    fn require_scores(&self) -> Result<&[f64]> {
        self.require_ready()?;
        self.scores.as_deref().ok_or(Error::EmptyReference)
    }

    /// Normalized mean embedding of the should-filter collection.
    pub fn reference_vector(&self) -> Result<&Embedding> {
        self.require_ready()?;
        self.reference.as_ref().ok_or(Error::EmptyReference)
    }

    pub fn similarity(&self, post_id: &str) -> Option<f64> {
        let i = *self.index.get(post_id)?;
        self.scores.as_ref().map(|s| s[i])
    }

    fn scored(&self) -> Result<impl Iterator<Item = (&str, bool, f64)>> {
        let scores = self.require_scores()?;
        Ok(self
            .posts
            .iter()
            .zip(&self.results)
            .zip(scores)
            .map(|((p, r), &s)| (p.id.as_str(), r.filtered, s)))
    }

    pub fn rank_misses(&self) -> Result<Vec<SimilarityScore<f64>>> {
        Ok(similarity::rank_misses(self.scored()?))
    }

    pub fn rank_false_alarms(&self) -> Result<Vec<SimilarityScore<f64>>> {
        Ok(similarity::rank_false_alarms(self.scored()?))
    }

    /// Statistics of the similarity scores of the filtered posts.
    pub fn filtered_similarity_distribution(&self) -> Result<Distribution<f64>> {
        let scores: Vec<f64> = self.rank_false_alarms()?.into_iter().map(|s| s.score).collect();
        Distribution::from_samples(&scores).ok_or(Error::EmptyDistribution)
    }

    pub fn impact_tree(&self) -> Result<ImpactNode> {
        let config = self.config.as_ref().ok_or(Error::NoConfig)?;
        Ok(analysis::impact_tree(
            config,
            self.evaluations
                .iter()
                .zip(&self.posts)
                .map(|(e, p)| (e, self.collections.kind_of(&p.id))),
        ))
    }

    pub fn highlights_for_post(&self, post_id: &str) -> Result<Vec<Highlight>> {
        let result = self.result(post_id).ok_or_else(|| Error::UnknownPost(post_id.to_string()))?;
        Ok(analysis::highlights(result))
    }

    pub fn triggers_to_spans(&self, trigger: TriggerRef) -> Result<Vec<MatchSpan>> {
        let config = self.config.as_ref().ok_or(Error::NoConfig)?;
        if !config.is_valid_trigger(trigger) {
            return Err(Error::InvalidTrigger(trigger));
        }
        Ok(analysis::spans_for_trigger(&self.results, trigger))
    }

    pub fn highlight_map(&self) -> HighlightMap {
        HighlightMap::build(&self.results)
    }

    /// Writes the current vectors in the sidecar format.
    pub fn write_sidecar<W: std::io::Write>(&self, out: W) -> Result<()> {
        self.require_ready()?;
        let ids: Vec<String> = self.posts.iter().map(|p| p.id.clone()).collect();
        similarity::write_sidecar(out, &ids, self.embeddings().unwrap_or_default())?;
        Ok(())
    }
}
