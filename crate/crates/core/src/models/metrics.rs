//! Prediction quality metrics.

use crate::error::Error;
use crate::Result;

pub fn rmse(y: &[f64], yhat: &[f64]) -> f64 {
    debug_assert_eq!(y.len(), yhat.len());
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    (sse / y.len() as f64).sqrt()
}

pub fn r2(y: &[f64], yhat: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    if sst == 0.0 {
        return if sse == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - sse / sst
}

/// Mean negative log probability of the true class. Probabilities are
/// clamped to `[1e-12, 1]` so hard zeros stay finite.
pub fn logloss(y: &[u32], probs: &[Vec<f64>]) -> f64 {
    debug_assert_eq!(y.len(), probs.len());
    let total: f64 = y
        .iter()
        .zip(probs)
        .map(|(&c, p)| -(p[c as usize].clamp(1e-12, 1.0)).ln())
        .sum();
    total / y.len() as f64
}

/// Fraction of rows whose highest-probability class (ties broken by the
/// smallest class index) matches the truth.
pub fn accuracy(y: &[u32], probs: &[Vec<f64>]) -> f64 {
    let hits = y
        .iter()
        .zip(probs)
        .filter(|(&c, p)| {
            let mut best = 0usize;
            for (k, &v) in p.iter().enumerate() {
                if v > p[best] {
                    best = k;
                }
            }
            best as u32 == c
        })
        .count();
    hits as f64 / y.len() as f64
}

/// Rank-based AUC for a binary problem: the probability that a random
/// positive outranks a random negative, with the usual tie correction.
pub fn auc_binary(y: &[u32], positive: u32, scores: &[f64]) -> Result<f64> {
    let n_pos = y.iter().filter(|&&c| c == positive).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::arg("AUC needs both classes present"));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    // Average ranks across ties.
    let mut ranks = vec![0.0; y.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    let rank_sum: f64 = y
        .iter()
        .zip(&ranks)
        .filter(|(&c, _)| c == positive)
        .map(|(_, r)| r)
        .sum();
    Ok((rank_sum - n_pos as f64 * (n_pos as f64 + 1.0) / 2.0) / (n_pos as f64 * n_neg as f64))
}
