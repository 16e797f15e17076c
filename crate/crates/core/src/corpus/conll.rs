//! CoNLL-style reading and writing: one `token label` pair per line, a blank
//! line terminates a query, `#` starts a comment line.

use super::{validate_label, Corpus, CorpusError, TaggedQuery, Token};
use crate::ontology::{Label, TagOntology};

/// Parses CoNLL text into a corpus with a single layer per query.
///
/// Token and label are separated by one or more spaces or tabs. A comment
/// line of the form `# id: <x>` immediately before a block names that query;
/// blocks without one get zero-based ordinal ids. A trailing blank line is
/// optional.
pub fn parse_conll(
    text: &str,
    ontology: &TagOntology,
    layer_name: &str,
) -> Result<Corpus, CorpusError> {
    let mut queries = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut pending_id: Option<String> = None;
    let mut ordinal = 0usize;

    let mut flush = |tokens: &mut Vec<Token>,
                     labels: &mut Vec<Label>,
                     pending_id: &mut Option<String>|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let id = pending_id.take().unwrap_or_else(|| ordinal.to_string());
        ordinal += 1;
        queries.push(TaggedQuery::new(
            id,
            std::mem::take(tokens),
            layer_name,
            std::mem::take(labels),
        )?);
        Ok(())
    };

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, &mut pending_id)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("id:") {
                pending_id = Some(id.trim().to_owned());
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let (token, label) = match (fields.next(), fields.next(), fields.next()) {
            (Some(token), Some(label), None) => (token, label),
            _ => return Err(CorpusError::MalformedLine(line_no)),
        };
        tokens.push(Token::new(token)?);
        labels.push(validate_label(label, ontology, line_no)?);
    }
    flush(&mut tokens, &mut labels, &mut pending_id)?;

    if queries.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Corpus::new("other", queries)
}

/// Writes one layer of a corpus back to CoNLL text.
///
/// Every block is preceded by its `# id:` comment and terminated by a blank
/// line, so parsing the output reproduces the tokens, ids and this layer
/// exactly.
pub fn serialize_conll(corpus: &Corpus, layer_name: &str) -> Result<String, CorpusError> {
    let mut out = String::new();
    for query in corpus.queries() {
        let labels = query.require_layer(layer_name)?;
        out.push_str("# id: ");
        out.push_str(query.id());
        out.push('\n');
        for (token, label) in query.tokens().iter().zip(labels) {
            out.push_str(&token.text);
            out.push(' ');
            out.push_str(&label.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}
