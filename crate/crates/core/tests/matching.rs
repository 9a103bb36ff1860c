mod common;

use proptest::prelude::*;

use common::{brute_match, config, post, render, CheckModel, Mode};
use sandbox_core::rules::{match_post, Field};
use sandbox_core::{parse_config, Post, RuleSet};

fn compile(model: &common::ConfigModel) -> RuleSet {
    let yaml = render(model);
    parse_config(&yaml).unwrap_or_else(|e| panic!("{yaml}\n{e}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_brute_force_matcher(model in config(), post in post()) {
        let rules = compile(&model);
        prop_assert_eq!(match_post(&rules, &post), brute_match(&model, &post));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adding_a_pattern_to_a_plain_check_never_unfilters(
        model in config(),
        post in post(),
        rule in any::<prop::sample::Index>(),
        check in any::<prop::sample::Index>(),
        extra in common::word(),
    ) {
        let before = match_post(&compile(&model), &post).filtered;
        let mut widened = model.clone();
        let r = rule.index(widened.len());
        let c = check.index(widened[r].len());
        let target = &mut widened[r][c];
        prop_assume!(!target.negated && !target.patterns.contains(&extra));
        target.patterns.push(extra);
        let after = match_post(&compile(&widened), &post).filtered;
        prop_assert!(!before || after);
    }

    #[test]
    fn adding_a_check_never_makes_that_rule_match(
        model in config(),
        post in post(),
        rule in any::<prop::sample::Index>(),
        added in common::check(),
    ) {
        let r = rule.index(model.len());
        prop_assume!(model[r].len() < 3);
        let rules = compile(&model);
        let mut narrowed = model.clone();
        narrowed[r].push(added);
        let narrowed_rules = compile(&narrowed);
        let before = sandbox_core::rules::evaluate_post(&rules, &post);
        let after = sandbox_core::rules::evaluate_post(&narrowed_rules, &post);
        prop_assert!(!after.rules[r].matched || before.rules[r].matched);
        prop_assert!(!after.filtered() || before.filtered());
    }

    #[test]
    fn case_insensitive_configs_ignore_post_case(mut model in config(), post in post()) {
        for check in model.iter_mut().flatten() {
            check.case_sensitive = false;
        }
        let rules = compile(&model);
        let shouted = Post::new("p", post.title.to_uppercase(), post.body.to_uppercase());
        prop_assert_eq!(match_post(&rules, &post).filtered, match_post(&rules, &shouted).filtered);
    }

    #[test]
    fn spans_lie_inside_their_field_and_match_their_string(model in config(), post in post()) {
        let rules = compile(&model);
        let result = match_post(&rules, &post);
        prop_assert!(result.filtered || result.spans.is_empty());
        for span in &result.spans {
            let text = match span.field { Field::Title => &post.title, Field::Body => &post.body };
            let chars: Vec<char> = text.chars().collect();
            prop_assert!(span.start < span.end && span.end <= chars.len());
            let covered: String = chars[span.start..span.end].iter().collect();
            let pattern = rules.pattern(span.trigger).unwrap();
            let check: &CheckModel = &model[span.trigger.rule_index][span.trigger.check_index];
            if check.case_sensitive {
                prop_assert_eq!(&covered, &pattern.text);
            } else {
                prop_assert_eq!(covered.to_lowercase(), pattern.text.to_lowercase());
            }
            prop_assert!(result.triggers.contains(&span.trigger));
            prop_assert!(!check.negated);
            if check.mode == Mode::Exact {
                prop_assert_eq!(covered.as_str(), text.trim());
            }
        }
    }

    #[test]
    fn yaml_round_trip_preserves_rules(model in config()) {
        let rules = compile(&model);
        let again = parse_config(&rules.to_yaml()).unwrap();
        prop_assert_eq!(&again, &rules);
        prop_assert_eq!(again.complexity(), rules.complexity());
    }

    #[test]
    fn matching_is_independent_of_thread(model in config(), posts in prop::collection::vec(post(), 1..8)) {
        let rules = std::sync::Arc::new(compile(&model));
        let expected: Vec<_> = posts.iter().map(|p| match_post(&rules, p)).collect();
        let handles: Vec<_> = posts
            .into_iter()
            .map(|p| {
                let rules = std::sync::Arc::clone(&rules);
                std::thread::spawn(move || match_post(&rules, &p))
            })
            .collect();
        let got: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn documented_examples() {
    let p = |t: &str, b: &str| Post::new("p", t, b);

    let r = match_post(&parse_config("body: [red, blue]").unwrap(), &p("", "I love blue skies"));
    assert!(r.filtered);
    assert_eq!(r.spans.len(), 1);
    assert_eq!((r.spans[0].start, r.spans[0].end), (7, 11));

    assert!(!match_post(&parse_config("body: [cat]").unwrap(), &p("", "concatenate")).filtered);
    assert!(match_post(&parse_config("body (includes): [cat]").unwrap(), &p("", "concatenate")).filtered);

    let rules = parse_config("body: [work]\n~title: [job]").unwrap();
    assert!(!match_post(&rules, &p("job hunt", "remote work")).filtered);
    assert!(match_post(&rules, &p("hunt", "remote work")).filtered);
}
