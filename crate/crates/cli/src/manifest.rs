use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A named output artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

/// Record of one run. Replaying `argv` reproduces `output_digest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub output_digest: String,
}

/// SHA-256 over each artifact's name and content, hex encoded.
pub fn digest(artifacts: &[Artifact]) -> String {
    let mut hasher = Sha256::new();
    for a in artifacts {
        hasher.update(a.name.as_bytes());
        hasher.update([0u8]);
        hasher.update((a.content.len() as u64).to_le_bytes());
        hasher.update(a.content.as_bytes());
    }
    format!("{:x}", hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_names_and_contents() {
        let a = |n: &str, c: &str| Artifact { name: n.into(), content: c.into() };
        assert_ne!(digest(&[a("x", "ab")]), digest(&[a("xa", "b")]));
        assert_eq!(digest(&[a("x", "1")]), digest(&[a("x", "1")]));
        assert_eq!(digest(&[]).len(), 64);
    }
}
