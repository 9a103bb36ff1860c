//! The two moderator-curated post sets and their coverage ratios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectionKind {
    /// Posts the rules should catch.
    ShouldFilter,
    /// Posts the rules must leave alone.
    AvoidFilter,
}

impl CollectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CollectionKind::ShouldFilter => "should_filter",
            CollectionKind::AvoidFilter => "avoid_filter",
        }
    }

    pub fn other(self) -> Self {
        match self {
            CollectionKind::ShouldFilter => CollectionKind::AvoidFilter,
            CollectionKind::AvoidFilter => CollectionKind::ShouldFilter,
        }
    }
}

impl fmt::Display for CollectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "should_filter" | "should-filter" => Ok(CollectionKind::ShouldFilter),
            "avoid_filter" | "avoid-filter" | "avoid" => Ok(CollectionKind::AvoidFilter),
            _ => Err(Error::BadArgument {
                what: "collection",
                value: s.to_string(),
            }),
        }
    }
}

/// Both collections. A post id is in at most one of them; adding an id to
/// one collection moves it out of the other. This is also the JSON
/// export format.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Collections {
    #[serde(default)]
    pub should_filter: Vec<String>,
    #[serde(default)]
    pub avoid_filter: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRatio {
    pub kind: CollectionKind,
    pub matched: usize,
    pub total: usize,
    pub ratio: f64,
}

impl Collections {
    pub fn members(&self, kind: CollectionKind) -> &[String] {
        match kind {
            CollectionKind::ShouldFilter => &self.should_filter,
            CollectionKind::AvoidFilter => &self.avoid_filter,
        }
    }

    fn members_mut(&mut self, kind: CollectionKind) -> &mut Vec<String> {
        match kind {
            CollectionKind::ShouldFilter => &mut self.should_filter,
            CollectionKind::AvoidFilter => &mut self.avoid_filter,
        }
    }

    pub fn kind_of(&self, post_id: &str) -> Option<CollectionKind> {
        [CollectionKind::ShouldFilter, CollectionKind::AvoidFilter]
            .into_iter()
            .find(|&k| self.members(k).iter().any(|m| m == post_id))
    }

    /// Adds `post_id`, moving it out of the other collection if needed.
    /// Returns true when membership changed.
    pub fn add(&mut self, kind: CollectionKind, post_id: &str) -> bool {
        if self.kind_of(post_id) == Some(kind) {
            return false;
        }
        self.members_mut(kind.other()).retain(|m| m != post_id);
        self.members_mut(kind).push(post_id.to_string());
        true
    }

    pub fn remove(&mut self, kind: CollectionKind, post_id: &str) -> bool {
        let members = self.members_mut(kind);
        let before = members.len();
        members.retain(|m| m != post_id);
        members.len() != before
    }

    /// Checks that every member satisfies `exists` and no id is listed
    /// twice or in both collections.
    pub fn validate(&self, exists: impl Fn(&str) -> bool) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for id in self.should_filter.iter().chain(&self.avoid_filter) {
            if !exists(id) {
                return Err(Error::UnknownPost(id.clone()));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::BadArgument {
                    what: "duplicate collection member",
                    value: id.clone(),
                });
            }
        }
        Ok(())
    }

    /// Share of members that the current configuration filters.
    pub fn coverage(&self, kind: CollectionKind, is_filtered: impl Fn(&str) -> bool) -> Result<CoverageRatio> {
        let members = self.members(kind);
        if members.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let matched = members.iter().filter(|m| is_filtered(m)).count();
        Ok(CoverageRatio {
            kind,
            matched,
            total: members.len(),
            ratio: matched as f64 / members.len() as f64,
        })
    }
}
