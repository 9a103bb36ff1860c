//! Seeded synthetic corpora with planted target posts.
//!
//! `TaskA` plants targets that share a topic vocabulary (career switchers
//! without a CS degree). `TaskB` plants targets that share one keyword
//! (`covid`) spread over unrelated topics. Both include a few example posts
//! for the should-filter collection, and `TaskA` also plants off-topic
//! posts that trip the starting configuration so a white-list refinement has
//! something to remove.
//!
//! Targets are spread evenly over the creation-time order: target `i`
//! lands in a random slot of the `i`-th equal stretch of the timeline.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collections::Collections;
use crate::corpus::Post;

const CAREER_SWITCH: &[&str] = &[
    "degree", "degrees", "bootcamp", "self", "taught", "major", "majored", "switch", "switching", "career", "change",
    "background", "non", "cs", "graduate", "without", "transition", "biology", "chemistry", "history", "psychology",
    "learn", "learning", "possible", "hired", "certificate", "courses", "online", "pivot", "diploma",
];

const OTHER_TOPICS: &[&[&str]] = &[
    &[
        "interview", "leetcode", "onsite", "recruiter", "rejected", "phone", "screen", "questions", "algorithms",
        "whiteboard", "prep", "mock", "round", "behavioral", "hackerrank",
    ],
    &[
        "salary", "negotiation", "compensation", "equity", "bonus", "raise", "counter", "offer", "stock", "benefits",
        "tc", "base", "market", "pay", "rsu",
    ],
    &[
        "remote", "office", "commute", "hybrid", "wfh", "manager", "meetings", "schedule", "home", "desk", "return",
        "policy", "coworkers", "slack", "timezone",
    ],
    &[
        "python", "java", "rust", "framework", "backend", "frontend", "database", "react", "kubernetes", "cloud", "api",
        "typescript", "golang", "docker", "microservices",
    ],
    &[
        "layoff", "layoffs", "startup", "faang", "team", "culture", "reorg", "promotion", "burnout", "management",
        "quit", "toxic", "tenure", "severance", "performance",
    ],
];

const WEATHER: &[&str] = &[
    "weather", "temperature", "heat", "hot", "celsius", "air", "conditioning", "summer", "thermostat", "sweating",
];

const FILLER: &[&str] = &[
    "i", "the", "a", "to", "and", "my", "is", "for", "it", "this", "have", "anyone", "any", "advice", "thanks", "just",
    "really", "what", "how", "should", "would", "think", "know", "about", "year", "job", "work", "im", "been", "now",
    "want", "like", "new", "time", "do", "so", "but", "with", "on", "in", "at", "or", "if", "people", "some", "still",
    "feel", "going", "need", "get",
];

/// White-list words every planted false positive carries.
const WEATHER_MARKERS: &[&str] = &["weather", "temperature", "celsius", "heat"];

const BASE_TIME: i64 = 1_619_827_200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    TaskA,
    TaskB,
}

impl std::str::FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "task-a" | "a" => Ok(FixtureKind::TaskA),
            "task-b" | "b" => Ok(FixtureKind::TaskB),
            _ => Err(format!("unknown fixture kind `{s}` (expected task-a or task-b)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureOptions {
    pub kind: FixtureKind,
    pub seed: u64,
    pub posts: usize,
    pub targets: usize,
    pub examples: usize,
    pub planted_false_positives: usize,
}

impl FixtureOptions {
    pub fn new(kind: FixtureKind, seed: u64) -> Self {
        FixtureOptions {
            kind,
            seed,
            posts: 500,
            targets: 50,
            examples: 3,
            planted_false_positives: match kind {
                FixtureKind::TaskA => 20,
                FixtureKind::TaskB => 0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub posts: Vec<Post>,
    /// Planted posts the moderator wants caught (examples excluded).
    pub targets: Vec<String>,
    /// On-target posts meant for the should-filter collection.
    pub examples: Vec<String>,
    pub planted_false_positives: Vec<String>,
    /// Deliberately partial starting configuration.
    pub config: String,
    /// Starting configuration plus a white-list check.
    pub refined_config: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Target,
    Example,
    FalsePositive,
    Other,
}

impl Fixture {
    pub fn generate(opts: FixtureOptions) -> Fixture {
        assert!(
            opts.targets > 0 && opts.targets + opts.examples + opts.planted_false_positives <= opts.posts,
            "fixture roles exceed corpus size"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let n = opts.posts;

        // timeline slots, newest first; targets get one slot per stretch
        let mut slot_role = vec![None; n];
        for i in 0..opts.targets {
            let lo = i * n / opts.targets;
            let hi = ((i + 1) * n / opts.targets).max(lo + 1);
            slot_role[rng.random_range(lo..hi)] = Some(Role::Target);
        }
        let mut free: Vec<usize> = (0..n).filter(|&s| slot_role[s].is_none()).collect();
        free.shuffle(&mut rng);
        let mut free = free.into_iter();
        for _ in 0..opts.examples {
            slot_role[free.next().expect("room checked")] = Some(Role::Example);
        }
        for _ in 0..opts.planted_false_positives {
            slot_role[free.next().expect("room checked")] = Some(Role::FalsePositive);
        }

        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);

        let mut fixture = Fixture {
            posts: Vec::with_capacity(n),
            targets: Vec::new(),
            examples: Vec::new(),
            planted_false_positives: Vec::new(),
            config: String::new(),
            refined_config: String::new(),
        };
        let mut seen_ids = HashSet::new();
        for (slot, role) in slot_role.into_iter().enumerate() {
            let role = role.unwrap_or(Role::Other);
            let id = format!("p{:04}", ids[slot]);
            debug_assert!(seen_ids.insert(id.clone()));
            let (title, body) = match (opts.kind, role) {
                (FixtureKind::TaskA, Role::Target | Role::Example) => text(&mut rng, CAREER_SWITCH, None),
                (FixtureKind::TaskA, Role::FalsePositive) => {
                    let marker = *WEATHER_MARKERS.choose(&mut rng).expect("non-empty");
                    text(&mut rng, WEATHER, Some(&["degree", marker]))
                }
                (FixtureKind::TaskB, Role::Target | Role::Example) => {
                    let topic = *OTHER_TOPICS.choose(&mut rng).expect("non-empty");
                    let (mut title, body) = text(&mut rng, topic, Some(&["covid"]));
                    if rng.random_bool(0.3) {
                        title.push_str(" covid");
                    }
                    (title, body)
                }
                (_, _) => {
                    let topic = *OTHER_TOPICS.choose(&mut rng).expect("non-empty");
                    text(&mut rng, topic, None)
                }
            };
            let post = Post {
                id: id.clone(),
                title,
                body,
                author: format!("user{}", rng.random_range(0..200)),
                created_utc: BASE_TIME + ((n - slot) as i64) * 600 + rng.random_range(0..600),
                score: rng.random_range(0..500),
            };
            match role {
                Role::Target => fixture.targets.push(id),
                Role::Example => fixture.examples.push(id),
                Role::FalsePositive => fixture.planted_false_positives.push(id),
                Role::Other => {}
            }
            fixture.posts.push(post);
        }
        fixture.posts.sort_by(|a, b| a.id.cmp(&b.id));
        fixture.targets.sort();
        fixture.examples.sort();
        fixture.planted_false_positives.sort();

        match opts.kind {
            FixtureKind::TaskA => {
                fixture.config = "---\ntitle+body: [bootcamp, degree]\naction: comment\n".to_string();
                fixture.refined_config = format!(
                    "---\ntitle+body: [bootcamp, degree]\n~title+body: [{}]\naction: comment\n",
                    WEATHER_MARKERS.join(", ")
                );
            }
            FixtureKind::TaskB => {
                fixture.config = "---\ntitle: [covid]\naction: comment\n".to_string();
                fixture.refined_config = "---\ntitle+body: [covid]\naction: comment\n".to_string();
            }
        }
        fixture
    }

    pub fn collections(&self) -> Collections {
        Collections {
            should_filter: self.examples.clone(),
            avoid_filter: Vec::new(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.posts {
            out.push_str(&serde_json::to_string(p).expect("post serializes"));
            out.push('\n');
        }
        out
    }
}

/// Title and body drawn from a topic vocabulary mixed with filler words.
/// `inject` words are placed somewhere in the body.
fn text(rng: &mut ChaCha8Rng, topic: &[&str], inject: Option<&[&str]>) -> (String, String) {
    let title_len = rng.random_range(5..10);
    let body_len = rng.random_range(25..50);
    let mut title: Vec<&str> = (0..title_len).map(|_| word(rng, topic, 0.5)).collect();
    let mut body: Vec<&str> = (0..body_len).map(|_| word(rng, topic, 0.35)).collect();
    for &w in inject.unwrap_or(&[]) {
        let at = rng.random_range(0..=body.len());
        body.insert(at, w);
    }
    if let Some(first) = title.first_mut() {
        if *first == "i" {
            *first = "I";
        }
    }
    let mut title = title.join(" ");
    capitalize(&mut title);
    body.push("thanks");
    let mut body = body.join(" ");
    capitalize(&mut body);
    body.push('.');
    (title, body)
}

fn word<'a>(rng: &mut ChaCha8Rng, topic: &[&'a str], topic_share: f64) -> &'a str {
    if rng.random_bool(topic_share) {
        topic.choose(rng).expect("non-empty")
    } else {
        FILLER.choose(rng).expect("non-empty")
    }
}

fn capitalize(s: &mut String) {
    if let Some(c) = s.chars().next() {
        let upper: String = c.to_uppercase().collect();
        s.replace_range(..c.len_utf8(), &upper);
    }
}
