//! Brute-force reference implementations. Nothing here calls into the
//! code paths it is used to check.
#![allow(dead_code)]

use std::collections::HashMap;

/// Outcome of walking a redirect graph, mirroring `Resolution` by value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Walk {
    Canonical(String),
    Cyclic,
    Dangling,
}

/// Walks the full chain from `start` with no depth bound, then applies the
/// bound: a chain that repeats a node is cyclic; one whose terminal node
/// lies more than `max_depth` hops away is rejected as cyclic.
pub fn walk_redirects(
    edges: &HashMap<String, String>,
    articles: &[String],
    start: &str,
    max_depth: usize,
) -> Walk {
    let mut chain = vec![start.to_owned()];
    loop {
        let last = chain.last().unwrap().clone();
        match edges.get(&last) {
            None => break,
            Some(next) => {
                if chain.contains(next) {
                    return Walk::Cyclic;
                }
                chain.push(next.clone());
            }
        }
    }
    let hops = chain.len() - 1;
    if hops > max_depth {
        return Walk::Cyclic;
    }
    let end = chain.pop().unwrap();
    if articles.contains(&end) {
        Walk::Canonical(end)
    } else {
        Walk::Dangling
    }
}

/// Per-topic (tp, fp, tn, fn) by direct counting.
pub fn count_confusion(scores: &[Vec<f64>], gold: &[Vec<bool>], threshold: f64) -> Vec<[u64; 4]> {
    let topics = gold.first().map_or(0, Vec::len);
    (0..topics)
        .map(|k| {
            let mut c = [0u64; 4];
            for (s, g) in scores.iter().zip(gold) {
                let idx = match (s[k] > threshold, g[k]) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, false) => 2,
                    (false, true) => 3,
                };
                c[idx] += 1;
            }
            c
        })
        .collect()
}

pub fn prf(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

/// Average precision by sweeping every distinct score as a threshold and
/// recounting the whole list at each one.
pub fn ap_by_sweep(scores: &[f64], gold: &[bool]) -> Option<f64> {
    let positives = gold.iter().filter(|&&g| g).count();
    if positives == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let tp = scores
            .iter()
            .zip(gold)
            .filter(|(&s, &g)| s >= t && g)
            .count();
        let predicted = scores.iter().filter(|&&s| s >= t).count();
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / predicted as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}

/// Summed binary cross-entropy of an averaged-embedding model, directly
/// from the definition. `output[k][j]` is weight j of label k.
pub fn bag_loss(input_rows: &[Vec<f64>], output: &[Vec<f64>], gold: &[bool]) -> f64 {
    let dim = output[0].len();
    let n = input_rows.len() as f64;
    let hidden: Vec<f64> = (0..dim)
        .map(|j| input_rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    output
        .iter()
        .zip(gold)
        .map(|(w, &y)| {
            let s: f64 = w.iter().zip(&hidden).map(|(a, b)| a * b).sum();
            let p = 1.0 / (1.0 + (-s).exp());
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}
