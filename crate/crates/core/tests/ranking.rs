mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;

use common::{config, dense_cosine, dense_tfidf, field_text, render};
use sandbox_core::similarity::{reference_vector, Distribution};
use sandbox_core::{Collections, EmbeddingVector, Post, ProviderSpec, Workspace};

#[derive(Debug, Clone)]
struct Scenario {
    posts: Vec<Post>,
    yaml: String,
    should_filter: Vec<String>,
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (prop::collection::vec((field_text(), field_text()), 3..25), config())
        .prop_flat_map(|(texts, model)| {
            let n = texts.len();
            (Just(texts), Just(model), prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(4)))
        })
        .prop_map(|(texts, model, picks)| {
            let posts: Vec<Post> = texts
                .into_iter()
                .enumerate()
                .map(|(i, (t, b))| {
                    // posts with no text at all are rejected on import
                    let b = if t.trim().is_empty() && b.trim().is_empty() { format!("{b}old") } else { b };
                    Post::new(format!("p{i:02}"), t, b)
                })
                .collect();
            let should_filter = picks.iter().map(|&i| posts[i].id.clone()).collect();
            Scenario {
                posts,
                yaml: render(&model),
                should_filter,
            }
        })
}

fn jsonl(posts: &[Post]) -> String {
    posts.iter().map(|p| serde_json::to_string(p).unwrap() + "\n").collect()
}

fn build(s: &Scenario) -> Workspace {
    let mut ws = Workspace::new(ProviderSpec::TfIdf);
    ws.import_jsonl(jsonl(&s.posts).as_bytes()).unwrap();
    ws.apply_config(&s.yaml).unwrap();
    ws.set_collections(Collections {
        should_filter: s.should_filter.clone(),
        avoid_filter: Vec::new(),
    })
    .unwrap();
    ws.embed_now().unwrap();
    ws
}

fn independent_scores(s: &Scenario) -> BTreeMap<String, f64> {
    let dense = dense_tfidf(&s.posts);
    let dim = dense.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for id in &s.should_filter {
        let i = s.posts.iter().position(|p| &p.id == id).unwrap();
        for (m, x) in mean.iter_mut().zip(&dense[i]) {
            *m += x / s.should_filter.len() as f64;
        }
    }
    s.posts.iter().zip(&dense).map(|(p, v)| (p.id.clone(), dense_cosine(v, &mean))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embeddings_match_textbook_tfidf(s in scenario()) {
        let ws = build(&s);
        let expected = dense_tfidf(&s.posts);
        for (got, want) in ws.embeddings().unwrap().iter().zip(&expected) {
            let got = got.to_dense();
            prop_assert_eq!(got.len(), want.len());
            for (a, b) in got.iter().zip(want) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn misses_and_false_alarms_partition_the_corpus(s in scenario()) {
        let ws = build(&s);
        let misses = ws.rank_misses().unwrap();
        let alarms = ws.rank_false_alarms().unwrap();
        let mut all: Vec<&str> = misses.iter().chain(&alarms).map(|x| x.post_id.as_str()).collect();
        all.sort();
        let mut ids: Vec<&str> = s.posts.iter().map(|p| p.id.as_str()).collect();
        ids.sort();
        prop_assert_eq!(all, ids);
        for m in &misses {
            prop_assert!(!ws.result(&m.post_id).unwrap().filtered);
        }
        for a in &alarms {
            prop_assert!(ws.result(&a.post_id).unwrap().filtered);
        }
    }

    #[test]
    fn rankings_follow_independent_cosines(s in scenario()) {
        let ws = build(&s);
        let oracle = independent_scores(&s);
        let filtered = |id: &str| ws.result(id).unwrap().filtered;
        let mut expect_misses: Vec<(&String, f64)> = oracle.iter().filter(|(id, _)| !filtered(id)).map(|(id, &v)| (id, v)).collect();
        let mut expect_alarms: Vec<(&String, f64)> = oracle.iter().filter(|(id, _)| filtered(id)).map(|(id, &v)| (id, v)).collect();
        // ties within rounding noise are ordered by id
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        expect_misses.sort_by(|a, b| if close(a.1, b.1) { a.0.cmp(b.0) } else { b.1.total_cmp(&a.1) });
        expect_alarms.sort_by(|a, b| if close(a.1, b.1) { a.0.cmp(b.0) } else { a.1.total_cmp(&b.1) });

        let misses = ws.rank_misses().unwrap();
        let alarms = ws.rank_false_alarms().unwrap();
        for (got, want) in [(misses, expect_misses), (alarms, expect_alarms)] {
            prop_assert_eq!(got.len(), want.len());
            for (g, (id, score)) in got.iter().zip(&want) {
                prop_assert!(close(g.score, *score), "{} vs {}", g.score, score);
                if &g.post_id != *id {
                    // only acceptable if the two scores are numerically tied
                    prop_assert!(close(g.score, oracle[&g.post_id]));
                }
            }
        }
    }

    #[test]
    fn widening_moves_posts_with_unchanged_scores(s in scenario(), extra in common::word()) {
        let mut ws = build(&s);
        let before: HashMap<String, (bool, f64)> = s.posts.iter().map(|p| (p.id.clone(), (ws.result(&p.id).unwrap().filtered, ws.similarity(&p.id).unwrap()))).collect();
        let widened = format!("{}---\nbody (includes): [{:?}]\n", s.yaml, extra);
        ws.apply_config(&widened).unwrap();
        let misses: HashMap<String, f64> = ws.rank_misses().unwrap().into_iter().map(|x| (x.post_id, x.score)).collect();
        let alarms: HashMap<String, f64> = ws.rank_false_alarms().unwrap().into_iter().map(|x| (x.post_id, x.score)).collect();
        for (id, (was_filtered, score)) in &before {
            if *was_filtered {
                prop_assert_eq!(alarms.get(id), Some(score));
            } else if let Some(now) = alarms.get(id) {
                prop_assert_eq!(now, score);
            } else {
                prop_assert_eq!(misses.get(id), Some(score));
            }
        }
    }

    #[test]
    fn coverage_counts_filtered_members(s in scenario()) {
        let ws = build(&s);
        let c = ws.coverage(sandbox_core::CollectionKind::ShouldFilter).unwrap();
        let rules = sandbox_core::parse_config(&s.yaml).unwrap();
        let expected = s.should_filter.iter()
            .filter(|id| sandbox_core::rules::match_post(&rules, s.posts.iter().find(|p| &p.id == *id).unwrap()).filtered)
            .count();
        prop_assert_eq!(c.matched, expected);
        prop_assert_eq!(c.total, s.should_filter.len());
        prop_assert_eq!(c.ratio, expected as f64 / s.should_filter.len() as f64);
    }

    #[test]
    fn impact_and_highlights_are_consistent(s in scenario()) {
        let ws = build(&s);
        let tree = ws.impact_tree().unwrap();
        let summary = ws.summary().unwrap();
        prop_assert_eq!(tree.counts.sandbox.matched, summary.filtered_posts);
        let map = ws.highlight_map();
        prop_assert!(map.is_exact_inverse());

        let rules = ws.config().unwrap();
        for (r, rule) in rules.rules.iter().enumerate() {
            let rule_node = tree.find(Some(r), None, None).unwrap();
            let matched = ws.results().iter().filter(|res| {
                sandbox_core::rules::evaluate_post(rules, ws.post(&res.post_id).unwrap()).rules[r].matched
            }).count();
            prop_assert_eq!(rule_node.counts.sandbox.matched, matched);
            for (c, check) in rule.checks.iter().enumerate() {
                for s_idx in 0..check.patterns.len() {
                    let trigger = sandbox_core::TriggerRef { rule_index: r, check_index: c, string_index: s_idx };
                    let node = tree.find(Some(r), Some(c), Some(s_idx)).unwrap();
                    let spans = ws.triggers_to_spans(trigger).unwrap();
                    let posts: BTreeSet<&str> = spans.iter().map(|sp| sp.post_id.as_str()).collect();
                    prop_assert!(posts.len() <= node.counts.sandbox.matched);
                    if rule.checks.len() == 1 && !check.negated {
                        prop_assert_eq!(posts.len(), node.counts.sandbox.matched);
                    }
                    for sp in &spans {
                        let hl = ws.highlights_for_post(&sp.post_id).unwrap();
                        prop_assert!(hl.iter().any(|h| h.triggers.contains(&trigger) && h.span.start == sp.start && h.span.end == sp.end && h.span.field == sp.field));
                    }
                }
            }
        }
    }

    #[test]
    fn distribution_matches_direct_computation(samples in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let d = Distribution::from_samples(&samples).unwrap();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (n - 1.0) * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        prop_assert_eq!(d.count, samples.len());
        prop_assert!((d.mean - mean).abs() < 1e-12);
        prop_assert!((d.sd - sd).abs() < 1e-12);
        prop_assert_eq!(d.min, sorted[0]);
        prop_assert_eq!(d.max, *sorted.last().unwrap());
        for (got, p) in [(d.q1, 0.25), (d.median, 0.5), (d.q3, 0.75)] {
            prop_assert!((got - q(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn adding_the_reference_itself_keeps_it(vectors in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 1..6)) {
        let vs: Vec<EmbeddingVector<f64>> = vectors.iter().map(|v| EmbeddingVector::from_dense(v)).collect();
        let reference = reference_vector(&vs).unwrap();
        prop_assume!(reference.norm() > 0.5);
        let mut extended = vs.clone();
        extended.push(reference.clone());
        let again = reference_vector(&extended).unwrap();
        for (a, b) in again.to_dense().iter().zip(reference.to_dense()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let probe = EmbeddingVector::from_dense(&[0.3, -0.2, 0.9, 0.0, 0.1, -0.5]);
        prop_assert!((probe.cosine(&again) - probe.cosine(&reference)).abs() < 1e-9);
    }

    #[test]
    fn sparse_cosine_matches_dense(a in prop::collection::vec(-2.0f64..2.0, 8), b in prop::collection::vec(-2.0f64..2.0, 8)) {
        let va = EmbeddingVector::from_dense(&a);
        let vb = EmbeddingVector::from_dense(&b);
        let c = va.cosine(&vb);
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!((c - dense_cosine(&a, &b)).abs() < 1e-12);
        prop_assert_eq!(c, vb.cosine(&va));
    }
}

#[test]
fn documented_similarity_examples() {
    // collection of one post: the reference is that post's normalized vector
    let v = EmbeddingVector::from_dense(&[3.0, 4.0, 0.0]);
    let r = reference_vector([&v]).unwrap();
    assert_eq!(r.to_dense(), vec![0.6, 0.8, 0.0]);

    let d = Distribution::from_samples(&[0.42]).unwrap();
    assert_eq!((d.mean, d.sd), (0.42, 0.0));

    let ws = Workspace::new(ProviderSpec::TfIdf);
    assert!(matches!(ws.rank_misses(), Err(sandbox_core::Error::EmptyReference)));
}

#[test]
fn float32_vectors_agree_with_float64() {
    let a = [0.1, 0.7, -0.2, 0.4];
    let b = [0.5, -0.1, 0.3, 0.9];
    let c64 = EmbeddingVector::<f64>::from_dense(&a).cosine(&EmbeddingVector::from_dense(&b));
    let a32: Vec<f32> = a.iter().map(|&x| x as f32).collect();
    let b32: Vec<f32> = b.iter().map(|&x| x as f32).collect();
    let c32 = sandbox_core::EmbeddingF32::from_dense(&a32).cosine(&EmbeddingVector::from_dense(&b32));
    assert!((c64 - c32 as f64).abs() < 1e-6);
}
