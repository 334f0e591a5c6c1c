//! Run manifests: a flat `key=value` file written next to every output.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce one output file. Inputs are identified by
/// content digest, never by path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub subcommand: String,
    pub resolved_config: BTreeMap<String, String>,
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub seed: u64,
    pub output_digest: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            resolved_config: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            output_digest: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.resolved_config.insert(key.to_string(), value.to_string());
        self
    }

    /// Records the digest of an input file under `role`.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<&mut Self> {
        let digest = file_digest(path)?;
        self.input_digests.insert(role.to_string(), digest);
        Ok(self)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &str| {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        };
        line("subcommand", &self.subcommand);
        line("tool_version", &self.tool_version);
        line("seed", &self.seed.to_string());
        for (k, v) in &self.resolved_config {
            line(&format!("config.{k}"), v);
        }
        for (k, v) in &self.input_digests {
            line(&format!("input.{k}"), v);
        }
        if let Some(d) = &self.output_digest {
            line("output", d);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| CliError::ConfigSyntax(m);
        let mut m = RunManifest::new("", 0);
        let mut seen_subcommand = false;
        for (i, raw) in text.lines().enumerate() {
            if raw.is_empty() {
                continue;
            }
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| bad(format!("manifest line {} has no '='", i + 1)))?;
            match k {
                "subcommand" => {
                    m.subcommand = v.to_string();
                    seen_subcommand = true;
                }
                "tool_version" => m.tool_version = v.to_string(),
                "seed" => m.seed = v.parse().map_err(|_| bad(format!("bad seed {v:?}")))?,
                "output" => m.output_digest = Some(v.to_string()),
                _ => {
                    if let Some(k) = k.strip_prefix("config.") {
                        m.resolved_config.insert(k.to_string(), v.to_string());
                    } else if let Some(k) = k.strip_prefix("input.") {
                        m.input_digests.insert(k.to_string(), v.to_string());
                    } else {
                        return Err(bad(format!("unknown manifest key {k:?}")));
                    }
                }
            }
        }
        if !seen_subcommand {
            return Err(bad("manifest has no subcommand".into()));
        }
        Ok(m)
    }

    /// Writes `<output>.manifest` after hashing the finished output file.
    pub fn write_for(&mut self, output: &Path) -> Result<PathBuf> {
        self.output_digest = Some(file_digest(output)?);
        let path = manifest_path(output);
        fs::write(&path, self.to_text()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(".manifest");
    PathBuf::from(s)
}

pub fn file_digest(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut reader = BufReader::new(file);
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(CliError::io(path, e)),
        };
        hasher.update(&buf[..n]);
    }
    Ok(format!("sha256:{}", hex::encode(hasher.finalize())))
}
