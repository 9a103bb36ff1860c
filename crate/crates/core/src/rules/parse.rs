use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use regex::{Regex, RegexBuilder};
use serde::Serialize;
use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::Marker;

use super::{Action, Check, FieldTarget, MatchMode, PatternKind, Rule, RuleSet, StringPattern};

/// Compiled-program size cap for moderator regexes.
const REGEX_SIZE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Syntax,
    EmptyConfig,
    NotAMapping,
    UnsupportedKey,
    UnknownFieldTarget,
    UnknownModifier,
    ConflictingModifiers,
    DuplicateCheck,
    InvalidPatterns,
    EmptyPattern,
    InvalidRegex,
    InvalidAction,
    NoChecks,
    UnsupportedYaml,
}

/// One problem found in a configuration. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        let mut loc = Vec::new();
        if let Some(r) = self.rule {
            loc.push(format!("rule {r}"));
        }
        if let Some(c) = self.check {
            loc.push(format!("check {c}"));
        }
        if let Some(p) = self.pattern {
            loc.push(format!("pattern {p}"));
        }
        if !loc.is_empty() {
            write!(f, " ({})", loc.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("invalid configuration: {}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    fn single(d: Diagnostic) -> Self {
        ParseError { diagnostics: vec![d] }
    }

    pub fn first_kind(&self) -> Option<DiagnosticKind> {
        self.diagnostics.first().map(|d| d.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

impl From<Marker> for Pos {
    fn from(m: Marker) -> Self {
        Pos {
            line: m.line(),
            column: m.col() + 1,
        }
    }
}

#[derive(Debug)]
enum NodeKind {
    Scalar(String),
    Seq(Vec<Node>),
    Map(Vec<(Node, Node)>),
    Alias,
}

#[derive(Debug)]
struct Node {
    kind: NodeKind,
    pos: Pos,
}

impl Node {
    fn is_null(&self) -> bool {
        matches!(&self.kind, NodeKind::Scalar(s) if s.is_empty() || s == "~" || s == "null")
    }
}

/// Builds a position-annotated tree from parser events.
#[derive(Default)]
struct TreeBuilder {
    documents: Vec<Node>,
    stack: Vec<(Node, Option<Node>)>,
}

impl TreeBuilder {
    fn push_value(&mut self, node: Node) {
        match self.stack.last_mut() {
            None => self.documents.push(node),
            Some((parent, pending_key)) => match &mut parent.kind {
                NodeKind::Seq(items) => items.push(node),
                NodeKind::Map(entries) => match pending_key.take() {
                    Some(key) => entries.push((key, node)),
                    None => *pending_key = Some(node),
                },
                _ => unreachable!("only collections are pushed on the stack"),
            },
        }
    }
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        let pos = Pos::from(mark);
        match ev {
            Event::Scalar(value, ..) => self.push_value(Node {
                kind: NodeKind::Scalar(value),
                pos,
            }),
            Event::Alias(_) => self.push_value(Node {
                kind: NodeKind::Alias,
                pos,
            }),
            Event::SequenceStart(..) => self.stack.push((
                Node {
                    kind: NodeKind::Seq(Vec::new()),
                    pos,
                },
                None,
            )),
            Event::MappingStart(..) => self.stack.push((
                Node {
                    kind: NodeKind::Map(Vec::new()),
                    pos,
                },
                None,
            )),
            Event::SequenceEnd | Event::MappingEnd => {
                if let Some((node, _)) = self.stack.pop() {
                    self.push_value(node);
                }
            }
            _ => {}
        }
    }
}

/// Parses a YAML stream of rule documents. Every problem found is reported,
/// not just the first.
pub fn parse_config(yaml_text: &str) -> Result<RuleSet, ParseError> {
    let mut builder = TreeBuilder::default();
    Parser::new_from_str(yaml_text)
        .load(&mut builder, true)
        .map_err(|e| {
            ParseError::single(Diagnostic {
                kind: DiagnosticKind::Syntax,
                message: e.info().to_string(),
                line: e.marker().line(),
                column: e.marker().col() + 1,
                rule: None,
                check: None,
                pattern: None,
                key: None,
            })
        })?;

    let mut diagnostics = Vec::new();
    let mut rules = Vec::new();
    for doc in builder.documents.iter().filter(|d| !d.is_null()) {
        let index = rules.len();
        let mut ctx = RuleContext {
            rule: index,
            diagnostics: &mut diagnostics,
        };
        if let Some(rule) = ctx.parse_rule(doc) {
            rules.push(rule);
        } else {
            // keep numbering stable for later documents
            rules.push(Rule {
                index,
                checks: Vec::new(),
                action: None,
                action_reason: None,
                comment: None,
            });
        }
    }

    if rules.is_empty() && diagnostics.is_empty() {
        diagnostics.push(Diagnostic {
            kind: DiagnosticKind::EmptyConfig,
            message: "configuration contains no rules".to_string(),
            line: 1,
            column: 1,
            rule: None,
            check: None,
            pattern: None,
            key: None,
        });
    }
    if !diagnostics.is_empty() {
        return Err(ParseError { diagnostics });
    }
    Ok(RuleSet {
        rules,
        source_text: yaml_text.to_string(),
    })
}

struct RuleContext<'a> {
    rule: usize,
    diagnostics: &'a mut Vec<Diagnostic>,
}

struct CheckKey {
    negated: bool,
    target: FieldTarget,
    label: Option<String>,
    match_mode: MatchMode,
    case_sensitive: bool,
}

fn key_regex() -> &'static Regex {
    static KEY: OnceLock<Regex> = OnceLock::new();
    KEY.get_or_init(|| {
        Regex::new(r"^(~?)\s*([A-Za-z_+]+)(?:#([A-Za-z0-9_-]*))?\s*(?:\((.*)\))?\s*$").expect("static regex")
    })
}

const METADATA_KEYS: [&str; 3] = ["action", "action_reason", "comment"];

impl RuleContext<'_> {
    fn report(&mut self, kind: DiagnosticKind, pos: Pos, message: impl Into<String>) -> &mut Diagnostic {
        self.diagnostics.push(Diagnostic {
            kind,
            message: message.into(),
            line: pos.line,
            column: pos.column,
            rule: Some(self.rule),
            check: None,
            pattern: None,
            key: None,
        });
        self.diagnostics.last_mut().expect("just pushed")
    }

    fn parse_rule(&mut self, doc: &Node) -> Option<Rule> {
        let NodeKind::Map(entries) = &doc.kind else {
            self.report(DiagnosticKind::NotAMapping, doc.pos, "a rule must be a mapping of checks and actions");
            return None;
        };
        let errors_before = self.diagnostics.len();
        let mut rule = Rule {
            index: self.rule,
            checks: Vec::new(),
            action: None,
            action_reason: None,
            comment: None,
        };
        let mut seen_keys = HashSet::new();

        for (key_node, value) in entries {
            let NodeKind::Scalar(raw_key) = &key_node.kind else {
                self.report(DiagnosticKind::UnsupportedYaml, key_node.pos, "keys must be plain strings");
                continue;
            };
            let key = raw_key.trim();
            if METADATA_KEYS.contains(&key) {
                if !seen_keys.insert(key.to_string()) {
                    self.report(DiagnosticKind::DuplicateCheck, key_node.pos, format!("duplicate key `{key}`"))
                        .key = Some(key.to_string());
                    continue;
                }
                self.parse_metadata(&mut rule, key, key_node.pos, value);
                continue;
            }

            let check_index = rule.checks.len();
            let Some(parsed) = self.parse_check_key(key, key_node.pos, check_index) else {
                continue;
            };
            let canonical = format!(
                "{}{}#{}",
                if parsed.negated { "~" } else { "" },
                parsed.target.as_str(),
                parsed.label.as_deref().unwrap_or("")
            );
            if !seen_keys.insert(canonical) {
                let d = self.report(
                    DiagnosticKind::DuplicateCheck,
                    key_node.pos,
                    format!("duplicate check on `{key}`; use a `#label` suffix to add another check on the same field"),
                );
                d.check = Some(check_index);
                d.key = Some(key.to_string());
                continue;
            }
            if let Some(patterns) = self.parse_patterns(value, &parsed, check_index, key) {
                rule.checks.push(Check {
                    index: check_index,
                    field_target: parsed.target,
                    match_mode: parsed.match_mode,
                    case_sensitive: parsed.case_sensitive,
                    negated: parsed.negated,
                    label: parsed.label,
                    patterns,
                });
            } else {
                // placeholder keeps later check indices aligned with source order
                rule.checks.push(Check {
                    index: check_index,
                    field_target: parsed.target,
                    match_mode: parsed.match_mode,
                    case_sensitive: parsed.case_sensitive,
                    negated: parsed.negated,
                    label: parsed.label,
                    patterns: Vec::new(),
                });
            }
        }

        if rule.checks.is_empty() && self.diagnostics.len() == errors_before {
            self.report(DiagnosticKind::NoChecks, doc.pos, "rule has no checks");
        }
        (self.diagnostics.len() == errors_before).then_some(rule)
    }

    fn parse_metadata(&mut self, rule: &mut Rule, key: &str, key_pos: Pos, value: &Node) {
        let NodeKind::Scalar(text) = &value.kind else {
            self.report(DiagnosticKind::UnsupportedYaml, value.pos, format!("`{key}` must be a single string"))
                .key = Some(key.to_string());
            return;
        };
        match key {
            "action" => match Action::from_name(text.trim()) {
                Some(action) => rule.action = Some(action),
                None => {
                    self.report(
                        DiagnosticKind::InvalidAction,
                        value.pos,
                        format!("unknown action `{text}`; expected one of remove, filter, spam, report, approve, comment"),
                    )
                    .key = Some(key.to_string());
                }
            },
            "action_reason" => rule.action_reason = Some(text.clone()),
            "comment" => rule.comment = Some(text.clone()),
            _ => unreachable!("metadata key checked by caller at {key_pos:?}"),
        }
    }

    fn parse_check_key(&mut self, key: &str, pos: Pos, check_index: usize) -> Option<CheckKey> {
        let Some(caps) = key_regex().captures(key) else {
            self.report(DiagnosticKind::UnsupportedKey, pos, format!("unsupported key `{key}`"))
                .key = Some(key.to_string());
            return None;
        };
        let negated = !caps[1].is_empty();
        let name = &caps[2];
        let label = caps.get(3).map(|m| m.as_str().to_string()).filter(|l| !l.is_empty());
        let modifiers = caps.get(4).map(|m| m.as_str());

        let target = match name {
            "title" => FieldTarget::Title,
            "body" => FieldTarget::Body,
            "title+body" | "body+title" => FieldTarget::TitleAndBody,
            _ => {
                let looks_like_check = negated || modifiers.is_some() || label.is_some() || name.contains('+');
                let (kind, message) = if looks_like_check {
                    (
                        DiagnosticKind::UnknownFieldTarget,
                        format!("unknown field target `{name}`; supported targets are title, body, title+body"),
                    )
                } else {
                    (DiagnosticKind::UnsupportedKey, format!("unsupported key `{key}`"))
                };
                let d = self.report(kind, pos, message);
                d.key = Some(key.to_string());
                if looks_like_check {
                    d.check = Some(check_index);
                }
                return None;
            }
        };

        let mut match_mode = None;
        let mut case_sensitive = false;
        let mut ok = true;
        for modifier in modifiers.into_iter().flat_map(|m| m.split(',')).map(str::trim) {
            if modifier.is_empty() {
                continue;
            }
            let mode = match modifier {
                "includes-word" => Some(MatchMode::IncludesWord),
                "includes" => Some(MatchMode::Includes),
                "full-exact" => Some(MatchMode::FullExact),
                "regex" => Some(MatchMode::Regex),
                "case-sensitive" => {
                    case_sensitive = true;
                    None
                }
                other => {
                    let d = self.report(
                        DiagnosticKind::UnknownModifier,
                        pos,
                        format!("unknown modifier `{other}`; supported: includes-word, includes, full-exact, regex, case-sensitive"),
                    );
                    d.check = Some(check_index);
                    d.key = Some(key.to_string());
                    ok = false;
                    None
                }
            };
            if let Some(mode) = mode {
                if match_mode.is_some_and(|m| m != mode) {
                    let d = self.report(
                        DiagnosticKind::ConflictingModifiers,
                        pos,
                        format!("`{key}` names more than one match mode"),
                    );
                    d.check = Some(check_index);
                    d.key = Some(key.to_string());
                    ok = false;
                }
                match_mode = Some(mode);
            }
        }
        ok.then(|| CheckKey {
            negated,
            target,
            label,
            match_mode: match_mode.unwrap_or_default(),
            case_sensitive,
        })
    }

    fn parse_patterns(&mut self, value: &Node, key: &CheckKey, check_index: usize, raw_key: &str) -> Option<Vec<StringPattern>> {
        let items: Vec<&Node> = match &value.kind {
            NodeKind::Scalar(_) if value.is_null() => Vec::new(),
            NodeKind::Scalar(_) => vec![value],
            NodeKind::Seq(items) => items.iter().collect(),
            NodeKind::Map(_) | NodeKind::Alias => {
                let d = self.report(
                    DiagnosticKind::InvalidPatterns,
                    value.pos,
                    format!("`{raw_key}` must be a string or a list of strings"),
                );
                d.check = Some(check_index);
                return None;
            }
        };
        if items.is_empty() {
            let d = self.report(DiagnosticKind::InvalidPatterns, value.pos, format!("`{raw_key}` has no strings"));
            d.check = Some(check_index);
            return None;
        }

        let mut ok = true;
        let mut patterns = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            let NodeKind::Scalar(text) = &item.kind else {
                let d = self.report(DiagnosticKind::InvalidPatterns, item.pos, "patterns must be strings");
                d.check = Some(check_index);
                d.pattern = Some(i);
                ok = false;
                continue;
            };
            if text.is_empty() {
                let d = self.report(DiagnosticKind::EmptyPattern, item.pos, "empty pattern");
                d.check = Some(check_index);
                d.pattern = Some(i);
                ok = false;
                continue;
            }
            let mut pattern = StringPattern::literal(i, text.clone());
            if key.match_mode == MatchMode::Regex {
                pattern.kind = PatternKind::Regex;
                match RegexBuilder::new(text)
                    .case_insensitive(!key.case_sensitive)
                    .size_limit(REGEX_SIZE_LIMIT)
                    .build()
                {
                    Ok(re) => pattern.compiled = Some(re),
                    Err(e) => {
                        let d = self.report(
                            DiagnosticKind::InvalidRegex,
                            item.pos,
                            format!("invalid regex `{text}`: {}", last_line(&e.to_string())),
                        );
                        d.check = Some(check_index);
                        d.pattern = Some(i);
                        ok = false;
                        continue;
                    }
                }
            }
            patterns.push(pattern);
        }
        ok.then_some(patterns)
    }
}

fn last_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .rfind(|l| !l.is_empty())
        .unwrap_or(s)
        .to_string()
}
