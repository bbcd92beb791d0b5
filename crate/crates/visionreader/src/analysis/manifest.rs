use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub name: String,
    pub sha256: String,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_file(path: &Path) -> Result<String, AnalysisError> {
    Ok(hash_bytes(&fs::read(path)?))
}

/// Run provenance: what was asked, what was read, what was produced.
/// Every artifact in the run directory appears here with a content hash;
/// only the manifest itself is exempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: String,
    pub seed: Option<u64>,
    pub created_unix: u64,
    pub spec: serde_json::Value,
    pub inputs: Vec<FileHash>,
    pub artifacts: Vec<FileHash>,
}

/// A run directory staged under a temp name and promoted atomically on
/// success, so interrupted runs never leave a half-written result dir.
#[derive(Debug)]
pub struct RunDir {
    staging: PathBuf,
    target: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, seed: Option<u64>) -> Result<Self, AnalysisError> {
        fs::create_dir_all(root)?;
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        let seed_part = seed.map(|s| format!("-seed{s}")).unwrap_or_default();
        let mut target = root.join(format!("{stamp}-{command}{seed_part}"));
        let mut suffix = 1;
        while target.exists() {
            suffix += 1;
            target = root.join(format!("{stamp}-{command}{seed_part}-{suffix}"));
        }
        let staging = root.join(format!(
            ".staging-{stamp}-{command}{seed_part}-{}",
            std::process::id()
        ));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(Self { staging, target })
    }

    /// Directory to write artifacts into while the run is in flight.
    pub fn path(&self) -> &Path {
        &self.staging
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), AnalysisError> {
        fs::write(self.staging.join(name), bytes)?;
        Ok(())
    }

    /// Hashes every artifact, writes the manifest, and renames the staging
    /// directory to its final name.
    pub fn promote(
        self,
        command: &str,
        seed: Option<u64>,
        spec: serde_json::Value,
        inputs: Vec<FileHash>,
    ) -> Result<(PathBuf, RunManifest), AnalysisError> {
        let mut artifacts = Vec::new();
        let mut names: Vec<String> = fs::read_dir(&self.staging)?
            .filter_map(|entry| entry.ok())
            .filter(|entry| entry.path().is_file())
            .map(|entry| entry.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in names {
            let sha256 = hash_file(&self.staging.join(&name))?;
            artifacts.push(FileHash { name, sha256 });
        }
        let manifest = RunManifest {
            version: 1,
            command: command.to_owned(),
            seed,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            spec,
            inputs,
            artifacts,
        };
        fs::write(
            self.staging.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        fs::rename(&self.staging, &self.target)?;
        Ok((self.target, manifest))
    }

    /// Drops the staging directory after a failed run.
    pub fn discard(self) {
        let _ = fs::remove_dir_all(&self.staging);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            hash_bytes(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn promote_lists_every_artifact() {
        let root = tempfile::tempdir().unwrap();
        let run = RunDir::create(root.path(), "train", Some(7)).unwrap();
        run.write("a.json", b"{}").unwrap();
        run.write("b.csv", b"x,y\n").unwrap();
        let (final_dir, manifest) = run
            .promote("train", Some(7), serde_json::json!({}), vec![])
            .unwrap();
        assert!(final_dir.exists());
        assert!(final_dir.join("manifest.json").exists());
        let names: Vec<&str> = manifest.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["a.json", "b.csv"]);
        // nothing left staged
        let staged: Vec<_> = fs::read_dir(root.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".staging"))
            .collect();
        assert!(staged.is_empty());
    }

    #[test]
    fn discard_removes_staging() {
        let root = tempfile::tempdir().unwrap();
        let run = RunDir::create(root.path(), "eval", None).unwrap();
        run.write("half.json", b"{").unwrap();
        let staging = run.path().to_path_buf();
        run.discard();
        assert!(!staging.exists());
    }
}
