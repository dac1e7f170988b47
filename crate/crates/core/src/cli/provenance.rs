use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::TOOL_VERSION;

/// Ordered key/value pairs identifying how an output file was produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command_line: &str) -> Self {
        let mut p = Self::default();
        p.push("tool_version", TOOL_VERSION);
        p.push("command", command_line);
        p
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Records the SHA-256 of an input file.
    pub fn input(&mut self, key: &str, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)?;
        self.push(&format!("{key}_path"), path.display());
        self.push(&format!("{key}_sha256"), hex::encode(Sha256::digest(bytes)));
        Ok(self)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().cloned().collect()
    }
}

/// Arguments after the program name, shell-quoted where needed.
pub(crate) fn command_line(args: &[OsString]) -> String {
    let mut parts = vec!["photonlab".to_string()];
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == '\'' || c == '"') {
            parts.push(format!("'{}'", s.replace('\'', r"'\''")));
        } else {
            parts.push(s.into_owned());
        }
    }
    parts.join(" ")
}
