//! Output files with provenance headers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What every output file records about the run that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn for_text(text: &str, seed: Option<u64>) -> Self {
        Provenance {
            config_sha256: sha256_hex(text.as_bytes()),
            seed,
        }
    }

    fn seed_str(&self) -> String {
        self.seed.map_or_else(|| "none".into(), |s| s.to_string())
    }

    /// `#` comment lines placed at the top of every CSV.
    pub fn header(&self) -> String {
        format!(
            "# qwlb {VERSION}\n# config_sha256 = {}\n# seed = {}\n",
            self.config_sha256,
            self.seed_str()
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory with the provenance stamped into each file written.
pub struct OutputDir {
    root: PathBuf,
    provenance: Provenance,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>, provenance: Provenance) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir { root, provenance })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Write a CSV through `body`, after the provenance header.
    pub fn csv<F>(&self, name: &str, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let path = self.path(name);
        let run = || -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            w.write_all(self.provenance.header().as_bytes())?;
            body(&mut w)?;
            w.flush()
        };
        run().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// `metadata.toml`: version, hash, seed, subcommand and the effective config.
    pub fn metadata(&self, command: &str, config_echo: &str) -> Result<PathBuf> {
        let path = self.path("metadata.toml");
        let mut text = String::new();
        text.push_str(&format!("# qwlb {VERSION}\n"));
        text.push_str(&format!("version = \"{VERSION}\"\n"));
        text.push_str(&format!("command = \"{command}\"\n"));
        text.push_str(&format!("config_sha256 = \"{}\"\n", self.provenance.config_sha256));
        text.push_str(&format!("seed = \"{}\"\n\n", self.provenance.seed_str()));
        text.push_str("# effective configuration\n");
        text.push_str(config_echo);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines() {
        let p = Provenance::for_text("abc", Some(7));
        assert_eq!(
            p.config_sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let h = p.header();
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("seed = 7"));
        assert!(Provenance::for_text("", None).header().contains("seed = none"));
    }
}
