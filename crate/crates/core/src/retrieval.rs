//! Desk-scale retrieval simulator: conjunctive inverted-index search over
//! product titles, with recall / relevance-proxy measurement and
//! proportional-delta histograms for comparing queries against their relaxed
//! variants.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("duplicate item id {0:?}")]
    DuplicateId(String),
    #[error("query has no tokens")]
    EmptyQuery,
    #[error("variant references unevaluated original {0:?}")]
    DanglingVariant(String),
}

/// Default result-list depth for the relevance aggregate.
pub const DEFAULT_TOP_N: usize = 60;

/// Lowercase whitespace tokenization, shared by titles and queries.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Inverted index over product titles. Immutable after build; searches are
/// read-only.
#[derive(Debug, Clone, Default)]
pub struct ProductIndex {
    /// item id -> title token multiset
    items: BTreeMap<String, BTreeMap<String, usize>>,
    /// token -> ids of items whose title contains it
    postings: BTreeMap<String, BTreeSet<String>>,
}

/// Search outcome: recall is the number of items matching every query token;
/// relevance is a Jaccard proxy on a 1–5 scale aggregated over the top
/// items.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryOutcome {
    pub recall: usize,
    pub relevance: f64,
    pub top_items: Vec<String>,
}

impl ProductIndex {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn title_tokens(&self, id: &str) -> Option<&BTreeMap<String, usize>> {
        self.items.get(id)
    }

    /// Serializes as JSON lines (`{"id":…,"tokens":[…]}`), tokens with
    /// multiplicity.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            id: &'a str,
            tokens: Vec<&'a str>,
        }
        let mut out = String::new();
        for (id, counts) in &self.items {
            let mut tokens = Vec::new();
            for (token, &count) in counts {
                for _ in 0..count {
                    tokens.push(token.as_str());
                }
            }
            let record = Record { id, tokens };
            out.push_str(&serde_json::to_string(&record).expect("index records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, RetrievalError> {
        #[derive(serde::Deserialize)]
        struct Record {
            id: String,
            tokens: Vec<String>,
        }
        let mut titles = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(line)
                .map_err(|_| RetrievalError::DuplicateId(line.to_owned()))?;
            titles.push((record.id, record.tokens.join(" ")));
        }
        index_products(titles)
    }

    /// Conjunctive search: the result set is the intersection of postings
    /// over the distinct query tokens. Relevance is
    /// `1 + 4 * mean(Jaccard(query tokens, title tokens))` over the `top_n`
    /// best items (Jaccard descending, item id ascending); an empty result
    /// set has relevance 1.
    pub fn search(&self, query_tokens: &[String], top_n: usize) -> Result<QueryOutcome, RetrievalError> {
        if query_tokens.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        let query_set: BTreeSet<&str> = query_tokens.iter().map(String::as_str).collect();

        let mut result: Option<BTreeSet<&String>> = None;
        for token in &query_set {
            let Some(posting) = self.postings.get(*token) else {
                result = Some(BTreeSet::new());
                break;
            };
            result = Some(match result {
                None => posting.iter().collect(),
                Some(acc) => acc
                    .into_iter()
                    .filter(|id| posting.contains(id.as_str()))
                    .collect(),
            });
            if result.as_ref().is_some_and(BTreeSet::is_empty) {
                break;
            }
        }
        let result = result.unwrap_or_default();
        let recall = result.len();

        // Rank by Jaccard over distinct tokens, ties broken by item id.
        let mut ranked: Vec<(f64, &String)> = result
            .into_iter()
            .map(|id| {
                let title: BTreeSet<&str> =
                    self.items[id.as_str()].keys().map(String::as_str).collect();
                let intersection = query_set.intersection(&title).count() as f64;
                let union = query_set.union(&title).count() as f64;
                (intersection / union, id)
            })
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        ranked.truncate(top_n);

        let relevance = if ranked.is_empty() {
            1.0
        } else {
            let mean: f64 = ranked.iter().map(|(j, _)| j).sum::<f64>() / ranked.len() as f64;
            1.0 + 4.0 * mean
        };
        Ok(QueryOutcome {
            recall,
            relevance,
            top_items: ranked.into_iter().map(|(_, id)| id.clone()).collect(),
        })
    }
}

/// Builds an index from `(id, title)` pairs with lowercase whitespace
/// tokenization. Ids must be unique.
pub fn index_products<I>(titles: I) -> Result<ProductIndex, RetrievalError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut index = ProductIndex::default();
    for (id, title) in titles {
        if index.items.contains_key(&id) {
            return Err(RetrievalError::DuplicateId(id));
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for token in tokenize(&title) {
            *counts.entry(token).or_insert(0) += 1;
        }
        for token in counts.keys() {
            index
                .postings
                .entry(token.clone())
                .or_default()
                .insert(id.clone());
        }
        index.items.insert(id, counts);
    }
    Ok(index)
}

/// Which outcome measure a histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Recall,
    Relevance,
}

/// Upper edges of the finite proportional-delta bins; the full binning is
/// (-inf, 0], (0, 0.5], (0.5, 1], (1, 2], (2, 5], (5, 20], (20, inf).
pub const DELTA_BIN_EDGES: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0];

/// Histogram of proportional deltas between originals and their variants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaBins {
    pub metric: Metric,
    pub counts: Vec<u64>,
}

impl DeltaBins {
    fn new(metric: Metric) -> Self {
        DeltaBins {
            metric,
            counts: vec![0; DELTA_BIN_EDGES.len() + 1],
        }
    }

    fn record(&mut self, delta: f64) {
        let bin = DELTA_BIN_EDGES
            .iter()
            .position(|edge| delta <= *edge)
            .unwrap_or(DELTA_BIN_EDGES.len());
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin boundaries as (low, high) with infinite open ends.
    pub fn bounds(bin: usize) -> (f64, f64) {
        let low = if bin == 0 {
            f64::NEG_INFINITY
        } else {
            DELTA_BIN_EDGES[bin - 1]
        };
        let high = DELTA_BIN_EDGES
            .get(bin)
            .copied()
            .unwrap_or(f64::INFINITY);
        (low, high)
    }
}

/// Renders histograms as CSV: `metric,bin_low,bin_high,count`.
pub fn delta_bins_csv(bins: &[DeltaBins]) -> String {
    let fmt_edge = |v: f64| {
        if v == f64::NEG_INFINITY {
            "-inf".to_owned()
        } else if v == f64::INFINITY {
            "inf".to_owned()
        } else {
            format!("{v}")
        }
    };
    let mut out = String::from("metric,bin_low,bin_high,count\n");
    for hist in bins {
        let metric = match hist.metric {
            Metric::Recall => "recall",
            Metric::Relevance => "relevance",
        };
        for (bin, count) in hist.counts.iter().enumerate() {
            let (low, high) = DeltaBins::bounds(bin);
            out.push_str(&format!(
                "{metric},{},{},{count}\n",
                fmt_edge(low),
                fmt_edge(high)
            ));
        }
    }
    out
}

/// Proportional delta with a guarded denominator, so null originals
/// (recall 0) still produce finite gains.
pub fn proportional_delta(original: f64, variant: f64) -> f64 {
    (variant - original) / original.max(1.0)
}

/// Evaluates originals and variants and bins the proportional deltas of
/// recall and relevance per (original, variant) pair.
pub fn compare_variants(
    index: &ProductIndex,
    originals: &[(String, Vec<String>)],
    variants: &[(String, Vec<String>)],
    top_n: usize,
) -> Result<Vec<DeltaBins>, RetrievalError> {
    let mut outcomes: BTreeMap<&str, QueryOutcome> = BTreeMap::new();
    for (id, tokens) in originals {
        outcomes.insert(id, index.search(tokens, top_n)?);
    }
    let mut recall_bins = DeltaBins::new(Metric::Recall);
    let mut relevance_bins = DeltaBins::new(Metric::Relevance);
    for (original_id, tokens) in variants {
        let original = outcomes
            .get(original_id.as_str())
            .ok_or_else(|| RetrievalError::DanglingVariant(original_id.clone()))?;
        let outcome = index.search(tokens, top_n)?;
        recall_bins.record(proportional_delta(
            original.recall as f64,
            outcome.recall as f64,
        ));
        relevance_bins.record(proportional_delta(original.relevance, outcome.relevance));
    }
    Ok(vec![recall_bins, relevance_bins])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_shoes() -> ProductIndex {
        index_products([
            ("1".to_owned(), "red shoe".to_owned()),
            ("2".to_owned(), "blue shoe".to_owned()),
        ])
        .unwrap()
    }

    fn toks(text: &str) -> Vec<String> {
        tokenize(text)
    }

    #[test]
    fn index_builds_consistent_postings() {
        let index = two_shoes();
        assert_eq!(index.len(), 2);
        assert_eq!(
            index.postings["shoe"],
            BTreeSet::from(["1".to_owned(), "2".to_owned()])
        );
        assert_eq!(index.postings["red"], BTreeSet::from(["1".to_owned()]));
    }

    #[test]
    fn empty_title_stream_builds_empty_index() {
        let index = index_products(Vec::new()).unwrap();
        assert!(index.is_empty());
    }

    #[test]
    fn repeated_title_tokens_count_in_the_multiset() {
        let index = index_products([("1".to_owned(), "shoe shoe rack".to_owned())]).unwrap();
        assert_eq!(index.title_tokens("1").unwrap()["shoe"], 2);
        assert_eq!(index.postings["shoe"].len(), 1);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = index_products([
            ("1".to_owned(), "a".to_owned()),
            ("1".to_owned(), "b".to_owned()),
        ])
        .unwrap_err();
        assert_eq!(err, RetrievalError::DuplicateId("1".into()));
    }

    #[test]
    fn exact_title_match_has_relevance_five() {
        let index = two_shoes();
        let outcome = index.search(&toks("red shoe"), DEFAULT_TOP_N).unwrap();
        assert_eq!(outcome.recall, 1);
        assert_eq!(outcome.top_items, ["1"]);
        assert_eq!(outcome.relevance, 5.0);
    }

    #[test]
    fn single_token_matches_both() {
        let index = two_shoes();
        let outcome = index.search(&toks("shoe"), DEFAULT_TOP_N).unwrap();
        assert_eq!(outcome.recall, 2);
        // Jaccard 1/2 for both items: relevance 1 + 4 * 0.5 = 3.
        assert_eq!(outcome.relevance, 3.0);
        assert_eq!(outcome.top_items, ["1", "2"]);
    }

    #[test]
    fn unmatched_query_has_empty_result_and_relevance_one() {
        let index = two_shoes();
        let outcome = index.search(&toks("green shoe"), DEFAULT_TOP_N).unwrap();
        assert_eq!(outcome.recall, 0);
        assert_eq!(outcome.relevance, 1.0);
        assert!(outcome.top_items.is_empty());
    }

    #[test]
    fn empty_query_is_rejected() {
        let index = two_shoes();
        assert_eq!(
            index.search(&[], DEFAULT_TOP_N).unwrap_err(),
            RetrievalError::EmptyQuery
        );
    }

    #[test]
    fn duplicate_query_tokens_do_not_change_the_result() {
        let index = two_shoes();
        let a = index.search(&toks("red shoe"), DEFAULT_TOP_N).unwrap();
        let b = index.search(&toks("red red shoe"), DEFAULT_TOP_N).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn top_n_caps_the_item_list() {
        let titles: Vec<(String, String)> = (0..100)
            .map(|i| (format!("{i:03}"), format!("shoe model{i}")))
            .collect();
        let index = index_products(titles).unwrap();
        let outcome = index.search(&toks("shoe"), 60).unwrap();
        assert_eq!(outcome.recall, 100);
        assert_eq!(outcome.top_items.len(), 60);
        let narrow = index.search(&toks("shoe"), 5).unwrap();
        assert_eq!(narrow.top_items.len(), 5);
    }

    #[test]
    fn dropping_tokens_never_decreases_recall() {
        let index = index_products([
            ("1".to_owned(), "red canvas shoe".to_owned()),
            ("2".to_owned(), "blue shoe".to_owned()),
            ("3".to_owned(), "red hat".to_owned()),
        ])
        .unwrap();
        let full = toks("red canvas shoe");
        let full_recall = index.search(&full, 60).unwrap().recall;
        for drop in 0..full.len() {
            let mut reduced = full.clone();
            reduced.remove(drop);
            let recall = index.search(&reduced, 60).unwrap().recall;
            assert!(recall >= full_recall);
        }
    }

    #[test]
    fn delta_convention_and_binning() {
        assert_eq!(proportional_delta(0.0, 7.0), 7.0);
        assert_eq!(proportional_delta(4.0, 4.0), 0.0);
        assert_eq!(proportional_delta(10.0, 5.0), -0.5);

        let mut bins = DeltaBins::new(Metric::Recall);
        for delta in [-0.5, 0.0, 0.3, 0.8, 1.5, 3.0, 10.0, 100.0] {
            bins.record(delta);
        }
        assert_eq!(bins.counts, vec![2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(bins.total(), 8);
    }

    #[test]
    fn compare_variants_pairs_by_original_id() {
        let index = two_shoes();
        let originals = vec![("q1".to_owned(), toks("red canvas shoe"))];
        let variants = vec![
            ("q1".to_owned(), toks("red shoe")),
            ("q1".to_owned(), toks("shoe")),
        ];
        let bins = compare_variants(&index, &originals, &variants, 60).unwrap();
        assert_eq!(bins[0].total(), 2);
        assert_eq!(bins[1].total(), 2);
        // original recall 0; variants recall 1 and 2 -> deltas 1.0 and 2.0
        assert_eq!(bins[0].counts, vec![0, 0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn dangling_variants_are_rejected() {
        let index = two_shoes();
        let err = compare_variants(
            &index,
            &[],
            &[("missing".to_owned(), toks("shoe"))],
            60,
        )
        .unwrap_err();
        assert_eq!(err, RetrievalError::DanglingVariant("missing".into()));
    }

    #[test]
    fn identical_variant_has_zero_delta_for_both_metrics() {
        let index = two_shoes();
        let originals = vec![("q".to_owned(), toks("red shoe"))];
        let variants = vec![("q".to_owned(), toks("red shoe"))];
        let bins = compare_variants(&index, &originals, &variants, 60).unwrap();
        // delta 0 falls in the (-inf, 0] bin for both metrics
        assert_eq!(bins[0].counts[0], 1);
        assert_eq!(bins[1].counts[0], 1);
    }

    #[test]
    fn csv_export_shape() {
        let index = two_shoes();
        let originals = vec![("q".to_owned(), toks("red shoe"))];
        let variants = vec![("q".to_owned(), toks("shoe"))];
        let bins = compare_variants(&index, &originals, &variants, 60).unwrap();
        let csv = delta_bins_csv(&bins);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,bin_low,bin_high,count");
        assert_eq!(lines.len(), 1 + 2 * 7);
        assert!(lines[1].starts_with("recall,-inf,0,"));
        assert!(lines.last().unwrap().starts_with("relevance,20,inf,"));
    }

    #[test]
    fn index_jsonl_round_trip() {
        let index = index_products([
            ("1".to_owned(), "red shoe shoe".to_owned()),
            ("2".to_owned(), "blue hat".to_owned()),
        ])
        .unwrap();
        let restored = ProductIndex::from_jsonl(&index.to_jsonl()).unwrap();
        assert_eq!(index.items, restored.items);
        assert_eq!(index.postings, restored.postings);
    }

    #[test]
    fn relevance_always_within_scale() {
        let index = index_products([
            ("1".to_owned(), "a b c d e".to_owned()),
            ("2".to_owned(), "a".to_owned()),
            ("3".to_owned(), "a x y z w q r s t u v".to_owned()),
        ])
        .unwrap();
        for query in ["a", "a b", "a b c d e", "zzz"] {
            let outcome = index.search(&toks(query), 60).unwrap();
            assert!((1.0..=5.0).contains(&outcome.relevance));
        }
    }
}
