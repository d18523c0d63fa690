//! Run manifest: every output file with its SHA-256, failures and flags.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Partial,
    Failed,
}

impl Status {
    pub fn from_counts(failed: usize, total: usize) -> Self {
        match failed {
            0 => Status::Success,
            f if f >= total => Status::Failed,
            _ => Status::Partial,
        }
    }

    /// Process exit code: 0 success, 3 partial, 4 nothing succeeded.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Partial => 3,
            Status::Failed => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    /// index into the run's grid points
    pub point: usize,
    pub m: f64,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub kind: String,
    pub status: Status,
    pub core_version: String,
    pub config_sha256: String,
    pub points: usize,
    pub flags: Vec<String>,
    pub files: Vec<FileEntry>,
    pub failures: Vec<Failure>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn render(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn status_codes() {
        assert_eq!(Status::from_counts(0, 5), Status::Success);
        assert_eq!(Status::from_counts(2, 5), Status::Partial);
        assert_eq!(Status::from_counts(5, 5).exit_code(), 4);
    }

    #[test]
    fn renders_toml() {
        let m = Manifest {
            experiment: "x".into(),
            kind: "sweep".into(),
            status: Status::Partial,
            core_version: "0".into(),
            config_sha256: "00".into(),
            points: 2,
            flags: vec!["note".into()],
            files: vec![FileEntry { path: "a.csv".into(), sha256: "ff".into(), bytes: 3 }],
            failures: vec![Failure { point: 1, m: 12.0, stage: "fpe".into(), error: "boom".into() }],
        };
        let s = m.render();
        assert!(s.contains("status = \"partial\""));
        assert!(s.contains("[[files]]") && s.contains("[[failures]]"));
    }
}
