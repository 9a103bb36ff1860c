use super::RuleSet;

pub(super) fn to_yaml(ruleset: &RuleSet) -> String {
    let mut out = String::new();
    for rule in &ruleset.rules {
        out.push_str("---\n");
        for check in &rule.checks {
            out.push_str(&quote(&check.key()));
            out.push_str(": [");
            let patterns: Vec<String> = check.patterns.iter().map(|p| quote(&p.text)).collect();
            out.push_str(&patterns.join(", "));
            out.push_str("]\n");
        }
        if let Some(action) = rule.action {
            out.push_str("action: ");
            out.push_str(action.as_str());
            out.push('\n');
        }
        if let Some(reason) = &rule.action_reason {
            out.push_str("action_reason: ");
            out.push_str(&quote(reason));
            out.push('\n');
        }
        if let Some(comment) = &rule.comment {
            out.push_str("comment: ");
            out.push_str(&quote(comment));
            out.push('\n');
        }
    }
    out
}

/// YAML double-quoted scalar.
fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\r' => q.push_str("\\r"),
            '\t' => q.push_str("\\t"),
            c if c.is_control() => q.push_str(&format!("\\u{:04x}", c as u32)),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}
