//! Shared helpers for the integration tests: a plain model of a rule
//! configuration, its YAML rendering, a brute-force matcher over the model,
//! and dense-vector cosine for checking similarity scores.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use proptest::sample::select;

use sandbox_core::rules::{Field, MatchSpan, TriggerRef};
use sandbox_core::{MatchResult, Post};

pub const VOCAB: &[&str] = &[
    "cat", "cats", "concat", "dog", "hot", "hotdog", "work", "job", "remote", "red", "blue", "c++", "a", "aa", "the", "new",
    "old", "car", "card", "x-ray",
];
const SEPARATORS: &[&str] = &[" ", " ", " ", "  ", ", ", ".", "-", "", "\n"];
const PADDING: &[&str] = &["", "", " ", "\t", "  "];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Title,
    Body,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Word,
    Substring,
    Exact,
}

#[derive(Debug, Clone)]
pub struct CheckModel {
    pub target: Target,
    pub mode: Mode,
    pub case_sensitive: bool,
    pub negated: bool,
    pub patterns: Vec<String>,
}

pub type ConfigModel = Vec<Vec<CheckModel>>;

fn cased(word: &str, case: u8) -> String {
    match case {
        0 => word.to_string(),
        1 => word.to_uppercase(),
        _ => {
            let mut c = word.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect(),
                None => String::new(),
            }
        }
    }
}

pub fn word() -> impl Strategy<Value = String> {
    (select(VOCAB), prop_oneof![3 => Just(0u8), 1 => Just(1u8), 1 => Just(2u8)]).prop_map(|(w, c)| cased(w, c))
}

pub fn field_text() -> impl Strategy<Value = String> {
    (prop::collection::vec((word(), select(SEPARATORS)), 0..8), select(PADDING), select(PADDING)).prop_map(|(words, lead, trail)| {
        let mut s = lead.to_string();
        let n = words.len();
        for (i, (w, sep)) in words.into_iter().enumerate() {
            s.push_str(&w);
            if i + 1 < n {
                s.push_str(sep);
            }
        }
        s.push_str(trail);
        s
    })
}

pub fn post() -> impl Strategy<Value = Post> {
    (field_text(), field_text()).prop_map(|(t, b)| Post::new("p", t, b))
}

fn pattern() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => word(),
        1 => (word(), word()).prop_map(|(a, b)| format!("{a} {b}")),
    ]
}

pub fn check() -> impl Strategy<Value = CheckModel> {
    (
        select(&[Target::Title, Target::Body, Target::Both][..]),
        select(&[Mode::Word, Mode::Substring, Mode::Exact][..]),
        prop::bool::weighted(0.3),
        prop::bool::weighted(0.25),
        prop::collection::vec(pattern(), 1..=4),
    )
        .prop_map(|(target, mode, case_sensitive, negated, mut patterns)| {
            let mut seen = std::collections::HashSet::new();
            patterns.retain(|p| seen.insert(p.clone()));
            CheckModel {
                target,
                mode,
                case_sensitive,
                negated,
                patterns,
            }
        })
}

pub fn config() -> impl Strategy<Value = ConfigModel> {
    prop::collection::vec(prop::collection::vec(check(), 1..=3), 1..=3)
}

/// YAML for the model. Every check carries a distinct label so several
/// checks may share a field.
pub fn render(config: &ConfigModel) -> String {
    let mut out = String::new();
    for (r, rule) in config.iter().enumerate() {
        out.push_str("---\n");
        for (c, check) in rule.iter().enumerate() {
            let target = match check.target {
                Target::Title => "title",
                Target::Body => "body",
                Target::Both => "title+body",
            };
            let mut mods = Vec::new();
            match check.mode {
                Mode::Word if (r + c) % 2 == 0 => {}
                Mode::Word => mods.push("includes-word"),
                Mode::Substring => mods.push("includes"),
                Mode::Exact => mods.push("full-exact"),
            }
            if check.case_sensitive {
                mods.push("case-sensitive");
            }
            let mods = if mods.is_empty() { String::new() } else { format!(" ({})", mods.join(", ")) };
            let neg = if check.negated { "~" } else { "" };
            let patterns: Vec<String> = check.patterns.iter().map(|p| format!("{p:?}")).collect();
            out.push_str(&format!("\"{neg}{target}#c{c}{mods}\": [{}]\n", patterns.join(", ")));
        }
    }
    out
}

fn eq_chars(a: &str, b: &str, case_sensitive: bool) -> bool {
    if case_sensitive {
        a == b
    } else {
        a.to_lowercase() == b.to_lowercase()
    }
}

/// Every (start, end) character range of `text` where `pattern` occurs,
/// found by trying each start offset.
pub fn brute_occurrences(text: &str, pattern: &str, mode: Mode, case_sensitive: bool) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = pattern.chars().count();
    if mode == Mode::Exact {
        let trimmed = text.trim();
        let lead = text.chars().take_while(|c| c.is_whitespace()).count();
        return if !trimmed.is_empty() && eq_chars(trimmed, pattern, case_sensitive) {
            vec![(lead, lead + trimmed.chars().count())]
        } else {
            Vec::new()
        };
    }
    let first_alnum = pattern.chars().next().is_some_and(char::is_alphanumeric);
    let last_alnum = pattern.chars().last().is_some_and(char::is_alphanumeric);
    let mut out = Vec::new();
    for start in 0..chars.len() {
        let end = start + n;
        if end > chars.len() {
            break;
        }
        let candidate: String = chars[start..end].iter().collect();
        if !eq_chars(&candidate, pattern, case_sensitive) {
            continue;
        }
        if mode == Mode::Word {
            if first_alnum && start > 0 && chars[start - 1].is_alphanumeric() {
                continue;
            }
            if last_alnum && end < chars.len() && chars[end].is_alphanumeric() {
                continue;
            }
        }
        out.push((start, end));
    }
    out
}

/// Evaluates the model directly against the post.
pub fn brute_match(config: &ConfigModel, post: &Post) -> MatchResult {
    let mut filtered = false;
    let mut triggers = Vec::new();
    let mut spans = Vec::new();
    for (r, rule) in config.iter().enumerate() {
        let mut rule_triggers = Vec::new();
        let mut rule_spans = Vec::new();
        let mut all = true;
        for (c, check) in rule.iter().enumerate() {
            let fields: &[Field] = match check.target {
                Target::Title => &[Field::Title],
                Target::Body => &[Field::Body],
                Target::Both => &[Field::Title, Field::Body],
            };
            let mut any = false;
            for (s, pattern) in check.patterns.iter().enumerate() {
                let trigger = TriggerRef {
                    rule_index: r,
                    check_index: c,
                    string_index: s,
                };
                let mut hit = false;
                for &field in fields {
                    let text = match field {
                        Field::Title => &post.title,
                        Field::Body => &post.body,
                    };
                    for (start, end) in brute_occurrences(text, pattern, check.mode, check.case_sensitive) {
                        hit = true;
                        rule_spans.push(MatchSpan {
                            post_id: post.id.clone(),
                            field,
                            start,
                            end,
                            trigger,
                        });
                    }
                }
                if hit {
                    any = true;
                    rule_triggers.push(trigger);
                }
            }
            if any == check.negated {
                all = false;
            }
        }
        if all {
            filtered = true;
            triggers.extend(rule_triggers);
            spans.extend(rule_spans);
        }
    }
    spans.sort();
    MatchResult {
        post_id: post.id.clone(),
        filtered,
        triggers,
        spans,
    }
}

pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Dense TF-IDF computed from the textbook definition.
pub fn dense_tfidf(posts: &[Post]) -> Vec<Vec<f64>> {
    let docs: Vec<Vec<String>> = posts.iter().map(|p| tokens(&format!("{}\n{}", p.title, p.body))).collect();
    let vocab: BTreeSet<&String> = docs.iter().flatten().collect();
    let index: HashMap<&String, usize> = vocab.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let n = docs.len() as f64;
    let mut df = vec![0.0; vocab.len()];
    for doc in &docs {
        for t in doc.iter().collect::<BTreeSet<_>>() {
            df[index[t]] += 1.0;
        }
    }
    docs.iter()
        .map(|doc| {
            let mut v = vec![0.0; vocab.len()];
            for t in doc {
                v[index[t]] += 1.0;
            }
            for (i, x) in v.iter_mut().enumerate() {
                *x *= ((1.0 + n) / (1.0 + df[i])).ln() + 1.0;
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect()
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

pub fn posts_jsonl(posts: &[(&str, &str, &str)]) -> String {
    posts
        .iter()
        .enumerate()
        .map(|(i, (id, title, body))| {
            serde_json::json!({"id": id, "title": title, "body": body, "author": "u", "created_utc": 1000 + i as i64, "score": i})
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
