use super::{Check, Field, MatchMode, MatchResult, MatchSpan, RuleSet, StringPattern, TriggerRef};
use crate::corpus::Post;

/// One place a string matched inside a post field, in character offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub field: Field,
    pub start: usize,
    pub end: usize,
}

/// Raw outcome of one check: its verdict plus every occurrence of every
/// pattern, regardless of negation.
#[derive(Debug, Clone)]
pub struct CheckEvaluation {
    pub satisfied: bool,
    pub occurrences: Vec<Vec<Occurrence>>,
}

impl CheckEvaluation {
    pub fn pattern_matched(&self, string_index: usize) -> bool {
        self.occurrences
            .get(string_index)
            .is_some_and(|occ| !occ.is_empty())
    }
}

#[derive(Debug, Clone)]
pub struct RuleEvaluation {
    pub matched: bool,
    pub checks: Vec<CheckEvaluation>,
}

/// Full evaluation of a rule set against one post. Every rule, check and
/// pattern is evaluated (no short-circuit) so impact counts can be derived
/// from the same pass.
#[derive(Debug, Clone)]
pub struct PostEvaluation {
    pub post_id: String,
    pub rules: Vec<RuleEvaluation>,
}

impl PostEvaluation {
    pub fn filtered(&self) -> bool {
        self.rules.iter().any(|r| r.matched)
    }

    pub fn to_match_result(&self) -> MatchResult {
        let mut triggers = Vec::new();
        let mut spans = Vec::new();
        for (r, rule) in self.rules.iter().enumerate() {
            if !rule.matched {
                continue;
            }
            for (c, check) in rule.checks.iter().enumerate() {
                // a satisfied negated check has no occurrences, so it adds nothing here
                for (s, occurrences) in check.occurrences.iter().enumerate() {
                    if occurrences.is_empty() {
                        continue;
                    }
                    let trigger = TriggerRef::new(r, c, s);
                    triggers.push(trigger);
                    spans.extend(occurrences.iter().map(|o| MatchSpan {
                        post_id: self.post_id.clone(),
                        field: o.field,
                        start: o.start,
                        end: o.end,
                        trigger,
                    }));
                }
            }
        }
        spans.sort();
        MatchResult {
            post_id: self.post_id.clone(),
            filtered: self.filtered(),
            triggers,
            spans,
        }
    }
}

/// Post field prepared for matching.
struct FieldText<'a> {
    text: &'a str,
    chars: Vec<char>,
    folded: Vec<char>,
}

impl<'a> FieldText<'a> {
    fn new(text: &'a str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let folded = chars.iter().map(|&c| fold(c)).collect();
        FieldText { text, chars, folded }
    }
}

/// Simple one-to-one case fold. Characters whose lowercase form is more than
/// one scalar value are left as they are, so character offsets in the folded
/// text line up with the original.
pub(crate) fn fold(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

pub fn match_post(ruleset: &RuleSet, post: &Post) -> MatchResult {
    evaluate_post(ruleset, post).to_match_result()
}

pub fn evaluate_post(ruleset: &RuleSet, post: &Post) -> PostEvaluation {
    let title = FieldText::new(&post.title);
    let body = FieldText::new(&post.body);
    let rules = ruleset
        .rules
        .iter()
        .map(|rule| {
            let checks: Vec<CheckEvaluation> = rule
                .checks
                .iter()
                .map(|check| evaluate_check(check, &title, &body))
                .collect();
            let matched = !checks.is_empty() && checks.iter().all(|c| c.satisfied);
            RuleEvaluation { matched, checks }
        })
        .collect();
    PostEvaluation {
        post_id: post.id.clone(),
        rules,
    }
}

fn evaluate_check(check: &Check, title: &FieldText<'_>, body: &FieldText<'_>) -> CheckEvaluation {
    let occurrences: Vec<Vec<Occurrence>> = check
        .patterns
        .iter()
        .map(|pattern| {
            let mut found = Vec::new();
            for &field in check.field_target.fields() {
                let text = match field {
                    Field::Title => title,
                    Field::Body => body,
                };
                for (start, end) in find_pattern(check, pattern, text) {
                    found.push(Occurrence { field, start, end });
                }
            }
            found
        })
        .collect();
    let any = occurrences.iter().any(|o| !o.is_empty());
    CheckEvaluation {
        satisfied: any != check.negated,
        occurrences,
    }
}

fn find_pattern(check: &Check, pattern: &StringPattern, field: &FieldText<'_>) -> Vec<(usize, usize)> {
    match check.match_mode {
        MatchMode::Regex => match &pattern.compiled {
            Some(re) => find_regex(re, field.text),
            None => Vec::new(),
        },
        mode => {
            let hay = if check.case_sensitive { &field.chars } else { &field.folded };
            let needle: Vec<char> = if check.case_sensitive {
                pattern.text.chars().collect()
            } else {
                pattern.text.chars().map(fold).collect()
            };
            match mode {
                MatchMode::FullExact => full_exact(hay, &field.chars, &needle).into_iter().collect(),
                MatchMode::IncludesWord => find_literal(hay, &field.chars, &needle, true),
                _ => find_literal(hay, &field.chars, &needle, false),
            }
        }
    }
}

/// Every start position where `needle` occurs in `hay`, overlapping
/// occurrences included. With `whole_word`, an occurrence whose first (last)
/// character is alphanumeric must not be preceded (followed) by an
/// alphanumeric character.
pub(crate) fn find_literal(hay: &[char], original: &[char], needle: &[char], whole_word: bool) -> Vec<(usize, usize)> {
    let n = needle.len();
    if n == 0 || n > hay.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for start in 0..=hay.len() - n {
        if hay[start..start + n] != *needle {
            continue;
        }
        let end = start + n;
        if whole_word && !at_word_edges(original, start, end, needle) {
            continue;
        }
        out.push((start, end));
    }
    out
}

fn at_word_edges(original: &[char], start: usize, end: usize, needle: &[char]) -> bool {
    let left_ok = !is_word_char(needle[0]) || start == 0 || !is_word_char(original[start - 1]);
    let right_ok = !is_word_char(needle[needle.len() - 1]) || end == original.len() || !is_word_char(original[end]);
    left_ok && right_ok
}

/// The whole field, trimmed of surrounding whitespace, must equal the needle.
pub(crate) fn full_exact(hay: &[char], original: &[char], needle: &[char]) -> Option<(usize, usize)> {
    let start = original.iter().position(|c| !c.is_whitespace())?;
    let end = original.iter().rposition(|c| !c.is_whitespace())? + 1;
    (!needle.is_empty() && hay[start..end] == *needle).then_some((start, end))
}

/// Non-overlapping leftmost-first matches converted to character offsets.
/// Empty matches are skipped.
fn find_regex(re: &regex::Regex, text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut byte_pos = 0;
    let mut char_pos = 0;
    for m in re.find_iter(text) {
        if m.start() == m.end() {
            continue;
        }
        char_pos += text[byte_pos..m.start()].chars().count();
        let start = char_pos;
        char_pos += text[m.start()..m.end()].chars().count();
        byte_pos = m.end();
        out.push((start, char_pos));
    }
    out
}
