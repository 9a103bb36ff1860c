//! Post embeddings, the reference vector built from the should-filter
//! collection, and the misses / false-alarms rankings.

mod provider;
mod stats;
mod vector;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use provider::{
    embed_all, tokenize, write_sidecar, EmbeddingError, EmbeddingProvider, PostEmbeddingError, PrecomputedVectors,
    ProviderSpec, SidecarRecord, TfIdf,
};
pub use stats::Distribution;
pub use vector::EmbeddingVector;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore<S> {
    pub post_id: String,
    pub score: S,
}

/// Normalized mean of the given vectors; `None` when there are none.
pub fn reference_vector<'a, S: Scalar>(members: impl IntoIterator<Item = &'a EmbeddingVector<S>>) -> Option<EmbeddingVector<S>> {
    EmbeddingVector::mean(members).map(|m| m.normalized())
}

/// Higher scores first, ties by id ascending.
pub fn sort_descending<S: Scalar>(scores: &mut [SimilarityScore<S>]) {
    scores.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.post_id.cmp(&b.post_id))
    });
}

/// Lower scores first, ties by id ascending.
pub fn sort_ascending<S: Scalar>(scores: &mut [SimilarityScore<S>]) {
    scores.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.post_id.cmp(&b.post_id))
    });
}

/// Unfiltered posts, most similar to the reference first.
pub fn rank_misses<'a, S: Scalar>(posts: impl IntoIterator<Item = (&'a str, bool, S)>) -> Vec<SimilarityScore<S>> {
    let mut out: Vec<_> = posts
        .into_iter()
        .filter(|(_, filtered, _)| !filtered)
        .map(|(id, _, score)| SimilarityScore {
            post_id: id.to_string(),
            score,
        })
        .collect();
    sort_descending(&mut out);
    out
}

/// Filtered posts, least similar to the reference first.
pub fn rank_false_alarms<'a, S: Scalar>(posts: impl IntoIterator<Item = (&'a str, bool, S)>) -> Vec<SimilarityScore<S>> {
    let mut out: Vec<_> = posts
        .into_iter()
        .filter(|(_, filtered, _)| *filtered)
        .map(|(id, _, score)| SimilarityScore {
            post_id: id.to_string(),
            score,
        })
        .collect();
    sort_ascending(&mut out);
    out
}
