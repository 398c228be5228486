//! JSON persistence for n-gram ban lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sumopt_core::NgramBanList;

use crate::error::CliError;

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    ngram: Vec<String>,
    freq: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BanListFile {
    max_n: usize,
    k: usize,
    source_fingerprint: String,
    entries: Vec<Entry>,
}

/// Serialized form: entries in lexicographic n-gram order, so equal lists
/// always produce identical bytes.
pub fn encode(ban: &NgramBanList) -> String {
    let file = BanListFile {
        max_n: ban.max_n(),
        k: ban.k(),
        source_fingerprint: ban.source_fingerprint().to_string(),
        entries: ban.entries().iter().map(|(g, &f)| Entry { ngram: g.clone(), freq: f }).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("ban list serializes");
    s.push('\n');
    s
}

pub fn decode(text: &str) -> Result<NgramBanList, String> {
    let file: BanListFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut entries = BTreeMap::new();
    for e in file.entries {
        if entries.insert(e.ngram.clone(), e.freq).is_some() {
            return Err(format!("duplicate n-gram {:?}", e.ngram));
        }
    }
    NgramBanList::from_parts(file.max_n, file.k, entries, file.source_fingerprint).map_err(|e| e.to_string())
}

/// SHA-256 of the serialized list, identifying its content.
pub fn content_fingerprint(ban: &NgramBanList) -> String {
    Sha256::digest(encode(ban).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save(ban: &NgramBanList, path: &Path) -> Result<(), CliError> {
    fs::write(path, encode(ban)).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<NgramBanList, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    decode(&text).map_err(|e| CliError::config(format!("ban list {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut entries = BTreeMap::new();
        entries.insert(vec!["public".to_string()], 9);
        entries.insert(vec!["(".to_string(), ")".to_string()], 4);
        let ban = NgramBanList::from_parts(2, 3, entries, "abc".into()).unwrap();
        let back = decode(&encode(&ban)).unwrap();
        assert_eq!(back, ban);
        assert_eq!(content_fingerprint(&back), content_fingerprint(&ban));
        assert_eq!(content_fingerprint(&ban).len(), 64);
    }

    #[test]
    fn rejects_invalid_lists() {
        assert!(decode(r#"{"max_n":2,"k":1,"source_fingerprint":"","entries":[{"ngram":["a","b","c"],"freq":1}]}"#)
            .is_err());
        assert!(decode("not json").is_err());
    }
}
