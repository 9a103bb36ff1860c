//! AutoModerator-style rules: the parsed configuration model, the YAML
//! front end, and the per-post matcher.
//!
//! A configuration is a stream of YAML documents, one rule per document.
//! Every key of a rule document is either a text check or rule metadata:
//!
//! ```yaml
//! ---
//! title+body (includes-word): [degree, bootcamp]
//! ~title (case-sensitive): ["Weather"]
//! action: filter
//! action_reason: "career switch FAQ"
//! ```
//!
//! Check keys have the form `[~]<target>[#label] [(<modifier>, ...)]` where
//! target is `title`, `body` or `title+body`. A leading `~` negates the
//! check. The `#label` suffix lets one rule hold several checks on the same
//! field. Modifiers are `includes-word` (default), `includes`, `full-exact`,
//! `regex` and `case-sensitive`.

mod matcher;
mod parse;
mod serialize;

use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use matcher::{evaluate_post, match_post, CheckEvaluation, Occurrence, PostEvaluation, RuleEvaluation};
pub use parse::{parse_config, Diagnostic, DiagnosticKind, ParseError};

/// Parsed configuration. Rules keep their source order.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub source_text: String,
}

impl RuleSet {
    /// A configuration with no rules; nothing is ever filtered.
    pub fn empty() -> Self {
        RuleSet {
            rules: Vec::new(),
            source_text: String::new(),
        }
    }

    pub fn complexity(&self) -> ComplexityMetrics {
        let check_count = self.rules.iter().map(|r| r.checks.len()).sum();
        let string_count = self
            .rules
            .iter()
            .flat_map(|r| &r.checks)
            .map(|c| c.patterns.len())
            .sum();
        ComplexityMetrics {
            rule_count: self.rules.len(),
            check_count,
            string_count,
        }
    }

    pub fn pattern(&self, trigger: TriggerRef) -> Option<&StringPattern> {
        self.rules
            .get(trigger.rule_index)?
            .checks
            .get(trigger.check_index)?
            .patterns
            .get(trigger.string_index)
    }

    pub fn is_valid_trigger(&self, trigger: TriggerRef) -> bool {
        self.pattern(trigger).is_some()
    }

    /// Renders the rules back to YAML in the supported subset. The output
    /// parses to a rule set equal to `self`.
    pub fn to_yaml(&self) -> String {
        serialize::to_yaml(self)
    }
}

/// Semantic equality: source text and formatting are ignored.
impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityMetrics {
    pub rule_count: usize,
    pub check_count: usize,
    pub string_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub index: usize,
    pub checks: Vec<Check>,
    pub action: Option<Action>,
    pub action_reason: Option<String>,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Remove,
    Filter,
    Spam,
    Report,
    Approve,
    Comment,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Remove => "remove",
            Action::Filter => "filter",
            Action::Spam => "spam",
            Action::Report => "report",
            Action::Approve => "approve",
            Action::Comment => "comment",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Some(match name {
            "remove" => Action::Remove,
            "filter" => Action::Filter,
            "spam" => Action::Spam,
            "report" => Action::Report,
            "approve" => Action::Approve,
            "comment" => Action::Comment,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub index: usize,
    pub field_target: FieldTarget,
    pub match_mode: MatchMode,
    pub case_sensitive: bool,
    pub negated: bool,
    /// The `#label` suffix of the key, if any.
    pub label: Option<String>,
    pub patterns: Vec<StringPattern>,
}

impl Check {
    /// The check's key as it would appear in a configuration.
    pub fn key(&self) -> String {
        let mut key = String::new();
        if self.negated {
            key.push('~');
        }
        key.push_str(self.field_target.as_str());
        if let Some(label) = &self.label {
            key.push('#');
            key.push_str(label);
        }
        key.push_str(" (");
        key.push_str(self.match_mode.as_str());
        if self.case_sensitive {
            key.push_str(", case-sensitive");
        }
        key.push(')');
        key
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTarget {
    Title,
    Body,
    TitleAndBody,
}

impl FieldTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldTarget::Title => "title",
            FieldTarget::Body => "body",
            FieldTarget::TitleAndBody => "title+body",
        }
    }

    pub fn fields(self) -> &'static [Field] {
        match self {
            FieldTarget::Title => &[Field::Title],
            FieldTarget::Body => &[Field::Body],
            FieldTarget::TitleAndBody => &[Field::Title, Field::Body],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    IncludesWord,
    Includes,
    FullExact,
    Regex,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::IncludesWord => "includes-word",
            MatchMode::Includes => "includes",
            MatchMode::FullExact => "full-exact",
            MatchMode::Regex => "regex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Literal,
    Regex,
}

#[derive(Debug, Clone)]
pub struct StringPattern {
    pub index: usize,
    pub text: String,
    pub kind: PatternKind,
    pub(crate) compiled: Option<Regex>,
}

impl StringPattern {
    pub(crate) fn literal(index: usize, text: impl Into<String>) -> Self {
        StringPattern {
            index,
            text: text.into(),
            kind: PatternKind::Literal,
            compiled: None,
        }
    }
}

impl PartialEq for StringPattern {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.text == other.text && self.kind == other.kind
    }
}

/// Post field a span lives in. Title sorts before body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Body,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Title => "title",
            Field::Body => "body",
        })
    }
}

/// Address of one string in a rule set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriggerRef {
    pub rule_index: usize,
    pub check_index: usize,
    pub string_index: usize,
}

impl TriggerRef {
    pub fn new(rule_index: usize, check_index: usize, string_index: usize) -> Self {
        TriggerRef {
            rule_index,
            check_index,
            string_index,
        }
    }
}

impl fmt::Display for TriggerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.rule_index, self.check_index, self.string_index)
    }
}

/// Character range in a post field that a string matched. Offsets count
/// Unicode scalar values; `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchSpan {
    pub post_id: String,
    pub field: Field,
    pub start: usize,
    pub end: usize,
    pub trigger: TriggerRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub post_id: String,
    pub filtered: bool,
    pub triggers: Vec<TriggerRef>,
    pub spans: Vec<MatchSpan>,
}

impl MatchResult {
    pub fn unfiltered(post_id: impl Into<String>) -> Self {
        MatchResult {
            post_id: post_id.into(),
            filtered: false,
            triggers: Vec::new(),
            spans: Vec::new(),
        }
    }
}
