//! On-disk workspace state.
//!
//! ```text
//! <dir>/posts.jsonl        imported posts, append-only
//! <dir>/config.yaml        last applied configuration
//! <dir>/collections.json   collection membership
//! ```

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use crate::collections::Collections;
use crate::corpus::{read_jsonl, Post};
use crate::error::Result;

const POSTS: &str = "posts.jsonl";
const CONFIG: &str = "config.yaml";
const COLLECTIONS: &str = "collections.json";

#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn load_posts(&self) -> Result<Vec<Post>> {
        let path = self.dir.join(POSTS);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let (posts, report) = read_jsonl(BufReader::new(File::open(&path)?), &HashSet::new())?;
        for r in &report.rejected {
            log::warn!("{}: line {} skipped: {}", path.display(), r.line, r.reason);
        }
        Ok(posts)
    }

    pub fn append_posts(&self, posts: &[Post]) -> Result<()> {
        if posts.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for post in posts {
            serde_json::to_writer(&mut buf, post)?;
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new().create(true).append(true).open(self.dir.join(POSTS))?;
        file.write_all(&buf)?;
        file.sync_data()?;
        Ok(())
    }

    pub fn load_config(&self) -> Result<Option<String>> {
        read_optional(&self.dir.join(CONFIG))
    }

    pub fn save_config(&self, yaml: Option<&str>) -> Result<()> {
        let path = self.dir.join(CONFIG);
        match yaml {
            Some(text) => write_atomic(&path, text.as_bytes()),
            None if path.exists() => Ok(fs::remove_file(path)?),
            None => Ok(()),
        }
    }

    pub fn load_collections(&self) -> Result<Collections> {
        match read_optional(&self.dir.join(COLLECTIONS))? {
            Some(text) => Ok(serde_json::from_str(&text)?),
            None => Ok(Collections::default()),
        }
    }

    pub fn save_collections(&self, collections: &Collections) -> Result<()> {
        write_atomic(&self.dir.join(COLLECTIONS), &serde_json::to_vec_pretty(collections)?)
    }
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_data()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}
