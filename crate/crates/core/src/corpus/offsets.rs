//! Ingestion of corpora released as byte offsets into raw query strings.
//!
//! An offset file has one tab-separated record per line: query id, token
//! start, token end (byte offsets, end exclusive) and label. Raw queries are
//! supplied either as TSV (`id<TAB>text`) or JSON lines (`{"id":…,"text":…}`).

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{validate_label, Corpus, CorpusError, TaggedQuery, Token};
use crate::ontology::{Label, TagOntology};

/// One line of an offset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetRecord {
    pub query_id: String,
    pub start: usize,
    pub end: usize,
    pub label: String,
}

/// Parses the tab-separated offset file format.
pub fn parse_offset_records(text: &str) -> Result<Vec<OffsetRecord>, CorpusError> {
    let mut records = Vec::new();
    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [query_id, start, end, label] = fields.as_slice() else {
            return Err(CorpusError::MalformedLine(line_no));
        };
        let start: usize = start
            .trim()
            .parse()
            .map_err(|_| CorpusError::MalformedLine(line_no))?;
        let end: usize = end
            .trim()
            .parse()
            .map_err(|_| CorpusError::MalformedLine(line_no))?;
        records.push(OffsetRecord {
            query_id: query_id.trim().to_owned(),
            start,
            end,
            label: label.trim().to_owned(),
        });
    }
    Ok(records)
}

#[derive(Deserialize)]
struct RawQueryLine {
    id: String,
    text: String,
}

/// Parses raw queries from TSV or JSON lines, detected from the first
/// non-blank line.
pub fn parse_raw_queries(text: &str) -> Result<BTreeMap<String, String>, CorpusError> {
    let mut raw = BTreeMap::new();
    let jsonl = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let (id, query_text) = if jsonl {
            let parsed: RawQueryLine = serde_json::from_str(line)
                .map_err(|_| CorpusError::MalformedLine(line_no))?;
            (parsed.id, parsed.text)
        } else {
            let (id, query_text) = line
                .split_once('\t')
                .ok_or(CorpusError::MalformedLine(line_no))?;
            (id.to_owned(), query_text.to_owned())
        };
        if raw.insert(id.clone(), query_text).is_some() {
            return Err(CorpusError::DuplicateQueryId(id));
        }
    }
    Ok(raw)
}

/// Materializes a corpus by slicing raw query strings at byte offsets.
///
/// Queries appear in order of first reference; tokens are sorted by start
/// offset and must not overlap. Every token records its `char_span`.
pub fn ingest_offsets<I>(
    records: I,
    raw_queries: &BTreeMap<String, String>,
    ontology: &TagOntology,
    layer_name: &str,
) -> Result<Corpus, CorpusError>
where
    I: IntoIterator<Item = OffsetRecord>,
{
    // Group records per query, preserving first-reference order.
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<(usize, usize, Label)>> = BTreeMap::new();
    for (idx, record) in records.into_iter().enumerate() {
        let line_no = idx + 1;
        let raw = raw_queries
            .get(&record.query_id)
            .ok_or_else(|| CorpusError::UnknownQueryId(record.query_id.clone()))?;
        let len = raw.len();
        let in_range = record.start < record.end
            && record.end <= len
            && raw.is_char_boundary(record.start)
            && raw.is_char_boundary(record.end);
        if !in_range {
            return Err(CorpusError::OffsetOutOfRange {
                query_id: record.query_id,
                start: record.start,
                end: record.end,
                len,
            });
        }
        let label = validate_label(&record.label, ontology, line_no)?;
        if !grouped.contains_key(&record.query_id) {
            order.push(record.query_id.clone());
        }
        grouped
            .entry(record.query_id)
            .or_default()
            .push((record.start, record.end, label));
    }

    let mut queries = Vec::with_capacity(order.len());
    for id in order {
        let raw = &raw_queries[&id];
        let mut spans = grouped.remove(&id).expect("grouped by construction");
        spans.sort_by_key(|&(start, end, _)| (start, end));
        let mut tokens = Vec::with_capacity(spans.len());
        let mut labels = Vec::with_capacity(spans.len());
        let mut prev_end = 0usize;
        for (start, end, label) in spans {
            if start < prev_end {
                return Err(CorpusError::OverlappingTokens(id));
            }
            prev_end = end;
            tokens.push(Token::with_span(&raw[start..end], start, end)?);
            labels.push(label);
        }
        queries.push(TaggedQuery::new(id, tokens, layer_name, labels)?);
    }
    if queries.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Corpus::new("other", queries)
}
