//! Shared test helpers: seeded corpus generators and independent oracles.
//! The oracles deliberately avoid the library's extraction and enumeration
//! code paths so they can check them.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use queryseg::corpus::{Corpus, TaggedQuery, Token};
use queryseg::ontology::Label;

const VOCAB: [&str; 24] = [
    "red", "blue", "wolf", "gray", "denim", "canvas", "shoes", "mug", "hat", "cover", "battery",
    "charger", "nike", "ford", "disney", "mens", "kids", "12", "2", "xl", "vintage", "used",
    "for", "with",
];

/// A random token that is always CoNLL-safe.
pub fn random_token<R: Rng + ?Sized>(rng: &mut R) -> String {
    VOCAB[rng.random_range(0..VOCAB.len())].to_owned()
}

/// A random valid BIO sequence over the given types.
pub fn random_valid_labels<R: Rng + ?Sized>(rng: &mut R, len: usize, types: &[&str]) -> Vec<Label> {
    let mut labels = Vec::with_capacity(len);
    let mut open: Option<String> = None;
    for _ in 0..len {
        let roll = rng.random_range(0..10u32);
        let label = match roll {
            // continue the open span
            0..=3 if open.is_some() => Label::inside(open.clone().unwrap()),
            // begin a new span
            0..=5 => {
                let ty = types[rng.random_range(0..types.len())].to_owned();
                open = Some(ty.clone());
                Label::begin(ty)
            }
            _ => {
                open = None;
                Label::Outside
            }
        };
        labels.push(label);
    }
    labels
}

/// A random label sequence that may be invalid BIO (stray `I-X` anywhere).
pub fn random_any_labels<R: Rng + ?Sized>(rng: &mut R, len: usize, types: &[&str]) -> Vec<Label> {
    (0..len)
        .map(|_| {
            let ty = types[rng.random_range(0..types.len())].to_owned();
            match rng.random_range(0..3u32) {
                0 => Label::Outside,
                1 => Label::begin(ty),
                _ => Label::inside(ty),
            }
        })
        .collect()
}

/// A random corpus with one "gold" layer of valid BIO labels.
pub fn random_corpus(seed: u64, n_queries: usize, max_len: usize, types: &[&str]) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries = (0..n_queries)
        .map(|i| {
            let len = rng.random_range(1..=max_len);
            let tokens: Vec<Token> = (0..len)
                .map(|_| Token::new(random_token(&mut rng)).unwrap())
                .collect();
            let labels = random_valid_labels(&mut rng, len, types);
            TaggedQuery::new(i.to_string(), tokens, "gold", labels).unwrap()
        })
        .collect();
    Corpus::new("fuzz", queries).unwrap()
}

/// Adds a noisy prediction layer derived from the gold layer.
pub fn with_noisy_pred_layer(corpus: &Corpus, seed: u64, flip_prob: f64, types: &[&str]) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries = corpus
        .queries()
        .iter()
        .map(|q| {
            let gold = q.layer("gold").unwrap();
            let pred: Vec<Label> = gold
                .iter()
                .map(|label| {
                    if rng.random_bool(flip_prob) {
                        let ty = types[rng.random_range(0..types.len())].to_owned();
                        match rng.random_range(0..3u32) {
                            0 => Label::Outside,
                            1 => Label::begin(ty),
                            _ => Label::inside(ty),
                        }
                    } else {
                        label.clone()
                    }
                })
                .collect();
            let mut q = q.clone();
            q.add_layer("pred", pred).unwrap();
            q
        })
        .collect();
    Corpus::new(corpus.split.clone(), queries).unwrap()
}

/// Independent brute-force chunk enumerator implementing the conlleval
/// reading directly: a span (s, e, X) is a chunk iff every position carries
/// type X, position s starts a chunk (`B-X`, or `I-X` with no running X
/// span), interior positions are `I-X`, and the span is maximal.
pub fn brute_force_chunks(labels: &[Label]) -> Vec<(usize, usize, String)> {
    let len = labels.len();
    let ty_at = |i: usize| -> Option<&str> {
        match &labels[i] {
            Label::Outside => None,
            Label::Begin(t) | Label::Inside(t) => Some(t),
        }
    };
    let mut chunks = Vec::new();
    for start in 0..len {
        let Some(ty) = ty_at(start) else { continue };
        let starts = match &labels[start] {
            Label::Begin(_) => true,
            Label::Inside(_) => start == 0 || ty_at(start - 1) != Some(ty),
            Label::Outside => false,
        };
        if !starts {
            continue;
        }
        for end in start + 1..=len {
            let interior_ok = (start + 1..end).all(|i| matches!(&labels[i], Label::Inside(t) if t == ty));
            if !interior_ok {
                continue;
            }
            let maximal = end == len || !matches!(&labels[end], Label::Inside(t) if t == ty);
            if maximal {
                chunks.push((start, end, ty.to_owned()));
            }
        }
    }
    chunks.sort();
    chunks
}

/// Every label sequence of exactly `len` over the given alphabet.
pub fn all_sequences(alphabet: &[Label], len: usize) -> Vec<Vec<Label>> {
    let mut sequences: Vec<Vec<Label>> = vec![Vec::new()];
    for _ in 0..len {
        sequences = sequences
            .into_iter()
            .flat_map(|seq| {
                alphabet.iter().map(move |label| {
                    let mut next = seq.clone();
                    next.push(label.clone());
                    next
                })
            })
            .collect();
    }
    sequences
}

/// Exact two-sided rank-sum p-value by explicit combination enumeration,
/// structurally unlike the library's recursive tail counter.
pub fn exact_rank_sum_oracle(a: &[f64], b: &[f64]) -> f64 {
    use itertools::Itertools;

    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    // midranks
    let mut sorted: Vec<(f64, usize)> = pooled.iter().copied().enumerate().map(|(i, v)| (v, i)).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        let rank = (i + j + 2) as f64 / 2.0;
        for &(_, original) in &sorted[i..=j] {
            ranks[original] = rank;
        }
        i = j + 1;
    }
    let observed: f64 = ranks[..a.len()].iter().sum();

    let mut le = 0u64;
    let mut ge = 0u64;
    let mut total = 0u64;
    for combo in (0..pooled.len()).combinations(a.len()) {
        let w: f64 = combo.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let tail = le.min(ge) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}
