//! Per-part impact statistics and the span <-> rule-part highlight maps.
//!
//! Counts are distinct posts. String-level counts look at the string against
//! its check's fields only, independent of sibling checks, so an over-broad
//! keyword shows up even when the rest of its rule holds it back. Check
//! counts are likewise independent of sibling checks; a negated check counts
//! the posts that satisfy the negation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::collections::CollectionKind;
use crate::rules::{Field, MatchResult, MatchSpan, PostEvaluation, RuleSet, TriggerRef};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub matched: usize,
    pub population: usize,
    /// `None` when the population is empty.
    pub ratio: Option<f64>,
}

impl Bar {
    fn new(matched: usize, population: usize) -> Self {
        Bar {
            matched,
            population,
            ratio: (population > 0).then(|| matched as f64 / population as f64),
        }
    }
}

/// Matched counts in the whole sandbox and in each collection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationCounts {
    pub sandbox: Bar,
    pub should_filter: Bar,
    pub avoid_filter: Bar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Config,
    Rule,
    Check,
    String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactNode {
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub string: Option<usize>,
    pub label: String,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub negated: bool,
    pub counts: PopulationCounts,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<ImpactNode>,
}

impl ImpactNode {
    /// Depth-first, document order.
    pub fn walk(&self) -> Vec<&ImpactNode> {
        let mut out = vec![self];
        for child in &self.children {
            out.extend(child.walk());
        }
        out
    }

    pub fn find(&self, rule: Option<usize>, check: Option<usize>, string: Option<usize>) -> Option<&ImpactNode> {
        self.walk()
            .into_iter()
            .find(|n| n.rule == rule && n.check == check && n.string == string)
    }
}

#[derive(Default, Clone, Copy)]
struct Tally([usize; 3]);

impl Tally {
    fn hit(&mut self, membership: Option<CollectionKind>) {
        self.0[0] += 1;
        match membership {
            Some(CollectionKind::ShouldFilter) => self.0[1] += 1,
            Some(CollectionKind::AvoidFilter) => self.0[2] += 1,
            None => {}
        }
    }

    fn counts(self, sizes: Tally) -> PopulationCounts {
        PopulationCounts {
            sandbox: Bar::new(self.0[0], sizes.0[0]),
            should_filter: Bar::new(self.0[1], sizes.0[1]),
            avoid_filter: Bar::new(self.0[2], sizes.0[2]),
        }
    }
}

/// Builds the config -> rule -> check -> string tree. `membership` gives the
/// collection (if any) of the post behind each evaluation.
pub fn impact_tree<'a>(
    ruleset: &RuleSet,
    evaluations: impl IntoIterator<Item = (&'a PostEvaluation, Option<CollectionKind>)>,
) -> ImpactNode {
    let mut sizes = Tally::default();
    let mut config = Tally::default();
    let mut rules: Vec<Tally> = vec![Tally::default(); ruleset.rules.len()];
    let mut checks: Vec<Vec<Tally>> = ruleset.rules.iter().map(|r| vec![Tally::default(); r.checks.len()]).collect();
    let mut strings: Vec<Vec<Vec<Tally>>> = ruleset
        .rules
        .iter()
        .map(|r| r.checks.iter().map(|c| vec![Tally::default(); c.patterns.len()]).collect())
        .collect();

    for (eval, membership) in evaluations {
        sizes.hit(membership);
        if eval.filtered() {
            config.hit(membership);
        }
        for (r, rule) in eval.rules.iter().enumerate() {
            if rule.matched {
                rules[r].hit(membership);
            }
            for (c, check) in rule.checks.iter().enumerate() {
                if check.satisfied {
                    checks[r][c].hit(membership);
                }
                for (s, occurrences) in check.occurrences.iter().enumerate() {
                    if !occurrences.is_empty() {
                        strings[r][c][s].hit(membership);
                    }
                }
            }
        }
    }

    let children = ruleset
        .rules
        .iter()
        .enumerate()
        .map(|(r, rule)| ImpactNode {
            kind: NodeKind::Rule,
            rule: Some(r),
            check: None,
            string: None,
            label: match rule.action {
                Some(action) => format!("rule {r} ({})", action.as_str()),
                None => format!("rule {r}"),
            },
            negated: false,
            counts: rules[r].counts(sizes),
            children: rule
                .checks
                .iter()
                .enumerate()
                .map(|(c, check)| ImpactNode {
                    kind: NodeKind::Check,
                    rule: Some(r),
                    check: Some(c),
                    string: None,
                    label: check.key(),
                    negated: check.negated,
                    counts: checks[r][c].counts(sizes),
                    children: check
                        .patterns
                        .iter()
                        .enumerate()
                        .map(|(s, pattern)| ImpactNode {
                            kind: NodeKind::String,
                            rule: Some(r),
                            check: Some(c),
                            string: Some(s),
                            label: pattern.text.clone(),
                            negated: false,
                            counts: strings[r][c][s].counts(sizes),
                            children: Vec::new(),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();

    ImpactNode {
        kind: NodeKind::Config,
        rule: None,
        check: None,
        string: None,
        label: "configuration".to_string(),
        negated: false,
        counts: config.counts(sizes),
        children,
    }
}

/// A highlighted character range, without the trigger.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpanKey {
    pub post_id: String,
    pub field: Field,
    pub start: usize,
    pub end: usize,
}

impl From<&MatchSpan> for SpanKey {
    fn from(s: &MatchSpan) -> Self {
        SpanKey {
            post_id: s.post_id.clone(),
            field: s.field,
            start: s.start,
            end: s.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub span: SpanKey,
    pub triggers: Vec<TriggerRef>,
}

/// Distinct spans of one post, each with every trigger that produced it.
pub fn highlights(result: &MatchResult) -> Vec<Highlight> {
    let mut grouped: BTreeMap<SpanKey, Vec<TriggerRef>> = BTreeMap::new();
    for span in &result.spans {
        grouped.entry(SpanKey::from(span)).or_default().push(span.trigger);
    }
    grouped
        .into_iter()
        .map(|(span, mut triggers)| {
            triggers.sort();
            triggers.dedup();
            Highlight { span, triggers }
        })
        .collect()
}

/// Both directions of the span/trigger relation over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HighlightMap {
    pub span_to_triggers: BTreeMap<SpanKey, Vec<TriggerRef>>,
    pub trigger_to_spans: BTreeMap<TriggerRef, Vec<SpanKey>>,
}

impl HighlightMap {
    pub fn build<'a>(results: impl IntoIterator<Item = &'a MatchResult>) -> Self {
        let mut map = HighlightMap::default();
        for result in results {
            for span in &result.spans {
                let key = SpanKey::from(span);
                map.span_to_triggers.entry(key.clone()).or_default().push(span.trigger);
                map.trigger_to_spans.entry(span.trigger).or_default().push(key);
            }
        }
        for v in map.span_to_triggers.values_mut() {
            v.sort();
            v.dedup();
        }
        for v in map.trigger_to_spans.values_mut() {
            v.sort();
            v.dedup();
        }
        map
    }

    /// True when `(span, trigger)` pairs read from either side are the same set.
    pub fn is_exact_inverse(&self) -> bool {
        let forward: std::collections::BTreeSet<(&SpanKey, &TriggerRef)> = self
            .span_to_triggers
            .iter()
            .flat_map(|(s, ts)| ts.iter().map(move |t| (s, t)))
            .collect();
        let backward: std::collections::BTreeSet<(&SpanKey, &TriggerRef)> = self
            .trigger_to_spans
            .iter()
            .flat_map(|(t, ss)| ss.iter().map(move |s| (s, t)))
            .collect();
        forward == backward
    }
}

/// Every span the trigger produced across the given results, in post order.
pub fn spans_for_trigger<'a>(results: impl IntoIterator<Item = &'a MatchResult>, trigger: TriggerRef) -> Vec<MatchSpan> {
    results
        .into_iter()
        .flat_map(|r| r.spans.iter().filter(|s| s.trigger == trigger).cloned())
        .collect()
}
