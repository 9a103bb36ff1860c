//! Batch evaluation report shared by the CLI and the HTTP service.

use serde::{Deserialize, Serialize};

use crate::analysis::ImpactNode;
use crate::collections::{CollectionKind, CoverageRatio};
use crate::error::{Error, Result};
use crate::rules::ComplexityMetrics;
use crate::similarity::Distribution;
use crate::workspace::{SandboxSummary, Workspace};

pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPost {
    pub id: String,
    pub title: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSection {
    pub should_filter: Option<CoverageRatio>,
    pub avoid_filter: Option<CoverageRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub embedding_provider: String,
    pub summary: SandboxSummary,
    pub complexity: ComplexityMetrics,
    pub coverage: CoverageSection,
    /// `None` when there is no reference (empty should-filter collection).
    pub top_misses: Option<Vec<RankedPost>>,
    pub top_false_alarms: Option<Vec<RankedPost>>,
    pub similarity_distribution: Option<Distribution<f64>>,
    pub impact: ImpactNode,
}

impl Report {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Builds the report for the workspace's current state. Embeddings must be
/// ready when the should-filter collection is non-empty.
pub fn build_report(ws: &Workspace, top_k: usize) -> Result<Report> {
    let summary = ws.summary()?;
    let config = ws.config().ok_or(Error::NoConfig)?;
    let impact = ws.impact_tree()?;

    let optional = |r: Result<CoverageRatio>| match r {
        Ok(c) => Ok(Some(c)),
        Err(Error::EmptyCollection) => Ok(None),
        Err(e) => Err(e),
    };
    let coverage = CoverageSection {
        should_filter: optional(ws.coverage(CollectionKind::ShouldFilter))?,
        avoid_filter: optional(ws.coverage(CollectionKind::AvoidFilter))?,
    };

    let ranked = |list: Vec<crate::similarity::SimilarityScore<f64>>| -> Vec<RankedPost> {
        list.into_iter()
            .take(top_k)
            .map(|s| RankedPost {
                title: ws.post(&s.post_id).map(|p| p.title.clone()).unwrap_or_default(),
                id: s.post_id,
                similarity: s.score,
            })
            .collect()
    };
    let (top_misses, top_false_alarms, similarity_distribution) = match ws.rank_misses() {
        Ok(misses) => {
            let distribution = match ws.filtered_similarity_distribution() {
                Ok(d) => Some(d),
                Err(Error::EmptyDistribution) => None,
                Err(e) => return Err(e),
            };
            (Some(ranked(misses)), Some(ranked(ws.rank_false_alarms()?)), distribution)
        }
        Err(Error::EmptyReference) => (None, None, None),
        Err(e) => return Err(e),
    };

    Ok(Report {
        report_version: REPORT_VERSION,
        embedding_provider: ws.provider().to_string(),
        summary,
        complexity: config.complexity(),
        coverage,
        top_misses,
        top_false_alarms,
        similarity_distribution,
        impact,
    })
}
