//! Where planted target posts land in each sort order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workspace::{Bucket, SortOrder, Workspace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub sort: SortOrder,
    /// Mean over targets of `rank / N`, with ranks starting at 1.
    pub mean_normalized_rank: f64,
    pub targets: usize,
    pub posts: usize,
}

/// Normalized rank of every target in the full post list under `sort`.
pub fn normalized_ranks(ws: &Workspace, targets: &[String], sort: SortOrder) -> Result<Vec<f64>> {
    let listed = ws.list_posts(sort, Bucket::All)?;
    let n = listed.len();
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    let position: std::collections::HashMap<&str, usize> =
        listed.iter().enumerate().map(|(i, l)| (l.post.id.as_str(), i)).collect();
    targets
        .iter()
        .map(|t| {
            position
                .get(t.as_str())
                .map(|&i| (i + 1) as f64 / n as f64)
                .ok_or_else(|| Error::UnknownPost(t.clone()))
        })
        .collect()
}

pub fn rank_experiment(ws: &Workspace, targets: &[String], sorts: &[SortOrder]) -> Result<Vec<RankRow>> {
    if targets.is_empty() {
        return Err(Error::BadArgument {
            what: "targets",
            value: "empty list".to_string(),
        });
    }
    sorts
        .iter()
        .map(|&sort| {
            let ranks = normalized_ranks(ws, targets, sort)?;
            Ok(RankRow {
                sort,
                mean_normalized_rank: ranks.iter().sum::<f64>() / ranks.len() as f64,
                targets: ranks.len(),
                posts: ws.posts().len(),
            })
        })
        .collect()
}
