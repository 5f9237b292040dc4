use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CredentialsError {
    #[error("cannot read credential file: {0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("credential file lists no operators")]
    Empty,
}

/// Static `operator:sha256-hex` credential table. Blank lines and lines
/// starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credentials {
    entries: BTreeMap<String, [u8; 32]>,
}

pub fn hash_secret(secret: &str) -> String {
    hex::encode(Sha256::digest(secret.as_bytes()))
}

impl Credentials {
    pub fn parse(text: &str) -> Result<Credentials, CredentialsError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: &str| CredentialsError::Malformed { line: i + 1, message: message.into() };
            let (operator, digest) = line.split_once(':').ok_or_else(|| malformed("expected operator:sha256hex"))?;
            if operator.is_empty() {
                return Err(malformed("empty operator name"));
            }
            let mut hash = [0u8; 32];
            hex::decode_to_slice(digest, &mut hash).map_err(|_| malformed("digest must be 64 hex digits"))?;
            if entries.insert(operator.to_string(), hash).is_some() {
                return Err(malformed("duplicate operator"));
            }
        }
        if entries.is_empty() {
            return Err(CredentialsError::Empty);
        }
        Ok(Credentials { entries })
    }

    pub fn load(path: &Path) -> Result<Credentials, CredentialsError> {
        let text = std::fs::read_to_string(path).map_err(|e| CredentialsError::Io(format!("{}: {e}", path.display())))?;
        Credentials::parse(&text)
    }

    pub fn verify(&self, operator: &str, secret: &str) -> bool {
        let Some(expected) = self.entries.get(operator) else {
            return false;
        };
        let actual = Sha256::digest(secret.as_bytes());
        // no early exit on the first differing byte
        expected.iter().zip(actual.iter()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
    }

    pub fn operators(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
