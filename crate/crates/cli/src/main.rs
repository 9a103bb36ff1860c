use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sandbox_core::experiment::rank_experiment;
use sandbox_core::fixture::{Fixture, FixtureKind, FixtureOptions};
use sandbox_core::report::{build_report, DEFAULT_TOP_K};
use sandbox_core::{CollectionKind, Collections, ParseError, ProviderSpec, SortOrder, Workspace};

/// Offline evaluation of filter configurations against a post corpus.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a configuration and write a JSON report.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// JSONL corpus, one post per line.
        #[arg(long)]
        posts: PathBuf,
        /// JSON array of post ids that should be filtered.
        #[arg(long)]
        should_filter: Option<PathBuf>,
        /// JSON array of post ids that should not be filtered.
        #[arg(long)]
        avoid: Option<PathBuf>,
        /// Output path, `-` for stdout.
        #[arg(long)]
        report: PathBuf,
        /// Length of the misses and false-alarm lists.
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        k: usize,
        #[arg(long, default_value = "tfidf")]
        embedding_provider: String,
    },
    /// Mean normalized rank of target posts under each sort order.
    RankExperiment {
        #[arg(long)]
        posts: PathBuf,
        /// JSON array of target post ids.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated: new, top, fpfn (alias of fpfn_misses), fpfn_false_alarms.
        #[arg(long, value_delimiter = ',', default_value = "new,top,fpfn")]
        sorts: Vec<String>,
        /// Example posts forming the similarity reference; required for fpfn sorts.
        #[arg(long)]
        should_filter: Option<PathBuf>,
        #[arg(long, default_value = "tfidf")]
        embedding_provider: String,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded synthetic corpus with planted targets.
    GenFixture {
        /// task-a (shared topic vocabulary) or task-b (shared keyword).
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        posts: usize,
        #[arg(long, default_value_t = 50)]
        targets: usize,
    },
}

enum Failure {
    Io(String),
    Config(ParseError),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eval {
            config,
            posts,
            should_filter,
            avoid,
            report,
            k,
            embedding_provider,
        } => eval(&config, &posts, should_filter.as_deref(), avoid.as_deref(), &report, k, &embedding_provider),
        Command::RankExperiment {
            posts,
            targets,
            config,
            sorts,
            should_filter,
            embedding_provider,
            json,
        } => rank(&posts, &targets, &config, &sorts, should_filter.as_deref(), &embedding_provider, json),
        Command::GenFixture {
            kind,
            seed,
            out,
            posts,
            targets,
        } => gen_fixture(&kind, seed, &out, posts, targets),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            for d in &e.diagnostics {
                eprintln!("{d}");
            }
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_ids(path: &Path) -> Result<Vec<String>, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Io(format!("{}: expected a JSON array of post ids: {e}", path.display())))
}

/// Loads posts, applies the configuration and installs collections.
fn load_workspace(posts: &Path, config: &Path, provider: &str, collections: Collections) -> Result<Workspace, Failure> {
    let provider =
        ProviderSpec::parse(provider).ok_or_else(|| Failure::Io(format!("unknown embedding provider `{provider}` (expected tfidf or file:<path>)")))?;
    let yaml = read(config)?;
    let file = File::open(posts).map_err(|e| Failure::Io(format!("{}: {e}", posts.display())))?;
    let mut ws = Workspace::new(provider);
    let import = ws.import_jsonl(BufReader::new(file))?;
    for r in &import.rejected {
        log::warn!("{}: line {} skipped: {}", posts.display(), r.line, r.reason);
    }
    for w in &import.warnings {
        log::warn!("{}: line {}: unknown key `{}` ignored", posts.display(), w.line, w.key);
    }
    if ws.posts().is_empty() {
        return Err(Failure::Io("empty corpus".to_string()));
    }
    ws.apply_config(&yaml).map_err(Failure::Config)?;
    ws.set_collections(collections)?;
    ws.embed_now()?;
    Ok(ws)
}

fn eval(
    config: &Path,
    posts: &Path,
    should_filter: Option<&Path>,
    avoid: Option<&Path>,
    report: &Path,
    k: usize,
    provider: &str,
) -> Result<(), Failure> {
    let mut collections = Collections::default();
    if let Some(p) = should_filter {
        for id in read_ids(p)? {
            collections.add(CollectionKind::ShouldFilter, &id);
        }
    }
    if let Some(p) = avoid {
        for id in read_ids(p)? {
            collections.add(CollectionKind::AvoidFilter, &id);
        }
    }
    let ws = load_workspace(posts, config, provider, collections)?;
    let json = build_report(&ws, k)?.to_json_pretty();
    if report == Path::new("-") {
        std::io::stdout().write_all(json.as_bytes())?;
    } else {
        fs::write(report, json).map_err(|e| Failure::Io(format!("{}: {e}", report.display())))?;
    }
    Ok(())
}

fn rank(
    posts: &Path,
    targets: &Path,
    config: &Path,
    sorts: &[String],
    should_filter: Option<&Path>,
    provider: &str,
    json: bool,
) -> Result<(), Failure> {
    let sorts: Vec<SortOrder> = sorts.iter().map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    let collections = Collections {
        should_filter: should_filter.map(read_ids).transpose()?.unwrap_or_default(),
        avoid_filter: Vec::new(),
    };
    let targets = read_ids(targets)?;
    let ws = load_workspace(posts, config, provider, collections)?;
    let rows = rank_experiment(&ws, &targets, &sorts)?;
    let mut out = std::io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
    } else {
        writeln!(out, "{:<18} {:>10} {:>8} {:>6}", "sort", "mean_rank", "targets", "posts")?;
        for r in &rows {
            let name = serde_json::to_value(r.sort)?;
            writeln!(
                out,
                "{:<18} {:>10.4} {:>8} {:>6}",
                name.as_str().unwrap_or_default(),
                r.mean_normalized_rank,
                r.targets,
                r.posts
            )?;
        }
    }
    Ok(())
}

fn gen_fixture(kind: &str, seed: u64, out: &Path, posts: usize, targets: usize) -> Result<(), Failure> {
    let kind: FixtureKind = kind.parse().map_err(Failure::Io)?;
    let defaults = FixtureOptions::new(kind, seed);
    let opts = FixtureOptions {
        posts,
        targets,
        planted_false_positives: defaults.planted_false_positives.min(posts.saturating_sub(targets + defaults.examples)),
        ..defaults
    };
    if targets == 0 || targets + opts.examples > posts {
        return Err(Failure::Io(format!("cannot plant {targets} targets in {posts} posts")));
    }
    let fixture = Fixture::generate(opts);
    fs::create_dir_all(out)?;
    let write = |name: &str, contents: String| -> Result<(), Failure> {
        let path = out.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    };
    write("posts.jsonl", fixture.to_jsonl())?;
    write("targets.json", serde_json::to_string_pretty(&fixture.targets)? + "\n")?;
    write("should_filter.json", serde_json::to_string_pretty(&fixture.examples)? + "\n")?;
    write("planted_false_positives.json", serde_json::to_string_pretty(&fixture.planted_false_positives)? + "\n")?;
    write("config.yaml", fixture.config.clone())?;
    write("refined.yaml", fixture.refined_config.clone())?;
    eprintln!(
        "wrote {} posts ({} targets, {} examples) to {}",
        fixture.posts.len(),
        fixture.targets.len(),
        fixture.examples.len(),
        out.display()
    );
    Ok(())
}
