use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use sha2::{Digest, Sha256};

/// Overrides the embedded data library with files from a directory.
pub const DATA_DIR_ENV: &str = "LOTKIT_DATA_DIR";

/// Reads inputs and records a SHA-256 of every file it touched.
///
/// An input is a filesystem path, `-` for stdin, or `builtin:<path>` for the
/// data library. Parametric builtins take the parameter after `@`, as in
/// `builtin:cfk/c_n.cfk@3`.
pub struct Loader {
    data_dir: Option<PathBuf>,
    pub checksums: BTreeMap<String, String>,
}

impl Loader {
    pub fn from_env() -> Self {
        Loader { data_dir: std::env::var_os(DATA_DIR_ENV).map(PathBuf::from), checksums: BTreeMap::new() }
    }

    pub fn read(&mut self, spec: &str) -> Result<String> {
        let (text, key) = match spec.strip_prefix("builtin:") {
            Some(rest) => {
                let (path, param) = match rest.split_once('@') {
                    Some((p, n)) => (p, Some(n.parse::<u32>().with_context(|| format!("bad parameter in `{spec}`"))?)),
                    None => (rest, None),
                };
                let raw = self.builtin(path)?;
                self.record(&format!("builtin:{path}"), &raw);
                let text = match param {
                    Some(n) => lotkit::data::instantiate(&raw, n),
                    None if raw.contains("{n}") || raw.contains("{U^n}") => {
                        return Err(anyhow!("`{path}` is parametric; append @<n>"));
                    }
                    None => raw,
                };
                return Ok(text);
            }
            None if spec == "-" => {
                let mut s = String::new();
                std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).context("reading stdin")?;
                (s, "-".to_string())
            }
            None => (std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?, spec.to_string()),
        };
        self.record(&key, &text);
        Ok(text)
    }

    fn builtin(&self, path: &str) -> Result<String> {
        match &self.data_dir {
            Some(dir) => {
                let full = dir.join(path);
                std::fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))
            }
            None => lotkit::data::builtin(path)
                .map(str::to_string)
                .ok_or_else(|| anyhow!("no builtin file `{path}`")),
        }
    }

    fn record(&mut self, key: &str, text: &str) {
        self.checksums.insert(key.to_string(), hex::encode(Sha256::digest(text.as_bytes())));
    }
}
