//! Line-delimited JSON corpora.
//!
//! Each line is one JSON object. Known fields map onto [`CorpusRecord`];
//! anything else is kept verbatim in `extra` and written back after the known
//! fields, so foreign metadata survives a pass through the pipeline.

use std::borrow::Borrow;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::value::RawValue;
use sumopt_core::{CorpusRecord, CorpusStats, Language, Strategy};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: invalid value for `{field}`: {reason}")]
    InvalidFieldValue { line: usize, field: String, reason: String },
    #[error("record {record_id}: cannot serialize: {reason}")]
    SerializationFailure { record_id: String, reason: String },
}

impl StoreError {
    /// Line number for per-line errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            StoreError::MalformedRecord { line, .. } | StoreError::InvalidFieldValue { line, .. } => Some(*line),
            _ => None,
        }
    }

    /// Whether reading can continue past this error.
    pub fn is_per_line(&self) -> bool {
        self.line().is_some()
    }
}

/// A JSON object's members in source order, values left unparsed.
pub(crate) struct Fields(pub Vec<(String, Box<RawValue>)>);

impl<'de> Deserialize<'de> for Fields {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ObjectVisitor;

        impl<'de> Visitor<'de> for ObjectVisitor {
            type Value = Fields;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Fields, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, Box<RawValue>>()? {
                    out.push(entry);
                }
                Ok(Fields(out))
            }
        }

        d.deserialize_map(ObjectVisitor)
    }
}

pub(crate) fn parse_fields(line: &str) -> Result<Fields, String> {
    let fields: Fields = serde_json::from_str(line).map_err(|e| e.to_string())?;
    for (i, (k, _)) in fields.0.iter().enumerate() {
        if fields.0[..i].iter().any(|(prev, _)| prev == k) {
            return Err(format!("duplicate field `{k}`"));
        }
    }
    Ok(fields)
}

/// Reads an id that may be a JSON string or integer.
pub(crate) fn parse_id(raw: &RawValue) -> Result<String, String> {
    match serde_json::from_str::<serde_json::Value>(raw.get()) {
        Ok(serde_json::Value::String(s)) => Ok(s),
        Ok(serde_json::Value::Number(n)) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
        _ => Err(format!("expected a string or integer, found {}", raw.get())),
    }
}

fn decode<'a, T: Deserialize<'a>>(raw: &'a RawValue, line: usize, field: &str) -> Result<T, StoreError> {
    serde_json::from_str(raw.get()).map_err(|e| StoreError::InvalidFieldValue {
        line,
        field: field.to_string(),
        reason: e.to_string(),
    })
}

/// Decodes one corpus line.
pub fn decode_record(text: &str, line: usize, default_language: Option<Language>) -> Result<CorpusRecord, StoreError> {
    let malformed = |reason: String| StoreError::MalformedRecord { line, reason };
    let fields = parse_fields(text).map_err(malformed)?;
    let mut id = None;
    let mut language = None;
    let mut code = None;
    let mut summary = None;
    let mut side_score = None;
    let mut reduced_code = None;
    let mut strategy = None;
    let mut extra = Vec::new();
    for (key, raw) in fields.0 {
        match key.as_str() {
            "id" => {
                id = Some(parse_id(&raw).map_err(|reason| StoreError::InvalidFieldValue {
                    line,
                    field: key.clone(),
                    reason,
                })?)
            }
            "language" => {
                let name: String = decode(&raw, line, "language")?;
                language =
                    Some(name.to_ascii_lowercase().parse::<Language>().map_err(|e| StoreError::InvalidFieldValue {
                        line,
                        field: key.clone(),
                        reason: e.to_string(),
                    })?);
            }
            "code" => code = Some(decode::<String>(&raw, line, "code")?),
            "summary" => summary = Some(decode::<String>(&raw, line, "summary")?),
            "side_score" => side_score = decode::<Option<f64>>(&raw, line, "side_score")?,
            "reduced_code" => reduced_code = decode::<Option<String>>(&raw, line, "reduced_code")?,
            "strategy" => {
                if let Some(name) = decode::<Option<String>>(&raw, line, "strategy")? {
                    strategy = Some(name.parse::<Strategy>().map_err(|e| StoreError::InvalidFieldValue {
                        line,
                        field: key.clone(),
                        reason: e.to_string(),
                    })?);
                }
            }
            _ => extra.push((key, raw.get().to_string())),
        }
    }
    let id = id.ok_or_else(|| malformed("missing field `id`".into()))?;
    let code = code.ok_or_else(|| malformed("missing field `code`".into()))?;
    let summary = summary.ok_or_else(|| malformed("missing field `summary`".into()))?;
    let language = language.or(default_language).ok_or_else(|| StoreError::InvalidFieldValue {
        line,
        field: "language".into(),
        reason: "missing, and no --language default was given".into(),
    })?;
    let record = CorpusRecord { id, language, code, summary, side_score, reduced_code, strategy, extra };
    record.validate().map_err(|e| match e {
        sumopt_core::RecordError::InvalidFieldValue { field, reason } => {
            StoreError::InvalidFieldValue { line, field: field.to_string(), reason }
        }
    })?;
    Ok(record)
}

/// Encodes one record as a single JSON line (without the newline).
pub fn encode_record(record: &CorpusRecord) -> Result<String, StoreError> {
    let fail = |reason: String| StoreError::SerializationFailure { record_id: record.id.clone(), reason };
    let json = |s: &str| serde_json::to_string(s).expect("strings always serialize");
    let mut out = String::with_capacity(record.code.len() + record.summary.len() + 64);
    out.push_str("{\"id\":");
    out.push_str(&json(&record.id));
    out.push_str(",\"language\":");
    out.push_str(&json(record.language.as_str()));
    out.push_str(",\"code\":");
    out.push_str(&json(&record.code));
    out.push_str(",\"summary\":");
    out.push_str(&json(&record.summary));
    if let Some(score) = record.side_score {
        if !score.is_finite() {
            return Err(fail(format!("side_score {score} is not finite")));
        }
        out.push_str(",\"side_score\":");
        out.push_str(&serde_json::to_string(&score).map_err(|e| fail(e.to_string()))?);
    }
    if let Some(reduced) = &record.reduced_code {
        out.push_str(",\"reduced_code\":");
        out.push_str(&json(reduced));
    }
    if let Some(strategy) = record.strategy {
        out.push_str(",\"strategy\":");
        out.push_str(&json(strategy.as_str()));
    }
    for (key, raw) in &record.extra {
        let value: &RawValue = serde_json::from_str(raw).map_err(|e| fail(format!("field `{key}`: {e}")))?;
        out.push(',');
        out.push_str(&json(key));
        out.push(':');
        out.push_str(value.get());
    }
    out.push('}');
    Ok(out)
}

/// Streaming reader over a corpus file.
///
/// Blank lines are skipped. Per-line problems (bad JSON, invalid UTF-8,
/// invalid fields) come out as errors carrying the 1-based line number and
/// reading continues; an IO error ends the stream.
pub struct CorpusReader<R> {
    inner: R,
    path: PathBuf,
    line: usize,
    default_language: Option<Language>,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(inner: R, path: impl Into<PathBuf>, default_language: Option<Language>) -> Self {
        CorpusReader { inner, path: path.into(), line: 0, default_language, buf: Vec::new(), done: false }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CorpusRecord, StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    let text = match std::str::from_utf8(&self.buf) {
                        Ok(t) => t,
                        Err(e) => {
                            return Some(Err(StoreError::MalformedRecord {
                                line: self.line,
                                reason: format!("invalid UTF-8: {e}"),
                            }))
                        }
                    };
                    if text.trim().is_empty() {
                        continue;
                    }
                    return Some(decode_record(text, self.line, self.default_language));
                }
                Err(source) => {
                    self.done = true;
                    return Some(Err(StoreError::Io { path: self.path.clone(), source }));
                }
            }
        }
        None
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, StoreError> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::FileNotFound(path.to_path_buf())),
        Err(source) => Err(StoreError::Io { path: path.to_path_buf(), source }),
    }
}

/// Opens `path` for streaming.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>, StoreError> {
    read_corpus_with(path, None)
}

/// [`read_corpus`] with a language for records that lack one.
pub fn read_corpus_with(
    path: impl AsRef<Path>,
    default_language: Option<Language>,
) -> Result<CorpusReader<BufReader<File>>, StoreError> {
    let path = path.as_ref();
    Ok(CorpusReader::new(open(path)?, path, default_language))
}

/// Buffered corpus writer that tallies what it wrote.
pub struct CorpusWriter {
    out: BufWriter<File>,
    path: PathBuf,
    stats: CorpusStats,
}

impl CorpusWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
        Ok(CorpusWriter { out: BufWriter::new(file), path, stats: CorpusStats::default() })
    }

    pub fn write(&mut self, record: &CorpusRecord) -> Result<(), StoreError> {
        let line = encode_record(record)?;
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|source| StoreError::Io { path: self.path.clone(), source })?;
        self.stats.observe(record);
        Ok(())
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn finish(mut self) -> Result<CorpusStats, StoreError> {
        self.out.flush().map_err(|source| StoreError::Io { path: self.path.clone(), source })?;
        Ok(self.stats)
    }
}

/// Writes every record to `path`, replacing it.
pub fn write_corpus<I>(records: I, path: impl AsRef<Path>) -> Result<CorpusStats, StoreError>
where
    I: IntoIterator,
    I::Item: Borrow<CorpusRecord>,
{
    let mut w = CorpusWriter::create(path)?;
    for r in records {
        w.write(r.borrow())?;
    }
    w.finish()
}
