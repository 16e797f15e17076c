//! Two-sided Wilcoxon rank-sum (Mann–Whitney) test.

use statrs::distribution::{ContinuousCDF, Normal};

use super::score::EvalError;

/// Midranks of the pooled sample: tied values share the average of the rank
/// positions they occupy. Ranks are half-integers, exact in f64.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) hold ranks i+1..=j+1
        let rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Counts, over all C(n+m, n) assignments of the pooled ranks to group A,
/// how many rank sums fall at or below / at or above `observed`.
fn enumerate_tail_counts(ranks: &[f64], take: usize, observed: f64) -> (u64, u64, u64) {
    fn recurse(
        ranks: &[f64],
        next: usize,
        remaining: usize,
        sum: f64,
        observed: f64,
        counts: &mut (u64, u64, u64),
    ) {
        if remaining == 0 {
            counts.2 += 1;
            if sum <= observed {
                counts.0 += 1;
            }
            if sum >= observed {
                counts.1 += 1;
            }
            return;
        }
        if ranks.len() - next < remaining {
            return;
        }
        recurse(ranks, next + 1, remaining - 1, sum + ranks[next], observed, counts);
        recurse(ranks, next + 1, remaining, sum, observed, counts);
    }
    let mut counts = (0, 0, 0);
    recurse(ranks, 0, take, 0.0, observed, &mut counts);
    counts
}

/// Two-sided Wilcoxon rank-sum p-value for the difference between two score
/// samples.
///
/// Exact by enumeration of all rank assignments when both sides have at most
/// 10 observations; otherwise a normal approximation with tie-corrected
/// variance. Ties take midranks in both regimes. The result is symmetric in
/// its arguments.
pub fn rank_sum_test(scores_a: &[f64], scores_b: &[f64]) -> Result<f64, EvalError> {
    if scores_a.is_empty() || scores_b.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = scores_a.len();
    let m = scores_b.len();
    let pooled: Vec<f64> = scores_a.iter().chain(scores_b).copied().collect();
    let ranks = midranks(&pooled);
    let w: f64 = ranks[..n].iter().sum();

    if n <= 10 && m <= 10 {
        let (le, ge, total) = enumerate_tail_counts(&ranks, n, w);
        let tail = le.min(ge) as f64 / total as f64;
        return Ok((2.0 * tail).min(1.0));
    }

    let len = (n + m) as f64;
    let expected = n as f64 * (len + 1.0) / 2.0;
    // Tie correction: subtract sum(t^3 - t) over tie groups from the variance.
    let mut tie_term = 0.0;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t.powi(3) - t;
        i = j + 1;
    }
    let variance =
        (n as f64 * m as f64 / 12.0) * ((len + 1.0) - tie_term / (len * (len - 1.0)));
    if variance <= 0.0 {
        // Every pooled value is tied; there is no evidence of separation.
        return Ok(1.0);
    }
    let z = (w - expected) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = 2.0 * (1.0 - normal.cdf(z.abs()));
    Ok(p.clamp(0.0, 1.0))
}
