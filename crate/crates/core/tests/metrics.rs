mod common;

use linktopic::metrics::{
    average_precision, average_precision_summary, precision_recall_f1, ConfusionCounts, EvalReport,
    MacroApPolicy, ScoredArticle,
};
use proptest::prelude::*;

use common::{ap_by_sweep, count_confusion, prf};

/// Scores on a coarse grid so that ties and exact-threshold values occur.
fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<bool>>)> {
    (1usize..=20, 1usize..=5).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(
                prop::collection::vec((0u8..=10).prop_map(|x| f64::from(x) / 10.0), k),
                n,
            ),
            prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.4), k), n),
        )
    })
}

fn scored(scores: &[Vec<f64>], gold: &[Vec<bool>]) -> Vec<ScoredArticle> {
    scores
        .iter()
        .zip(gold)
        .map(|(s, g)| ScoredArticle {
            probs: Some(s.clone()),
            gold: g
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(k, _)| k)
                .collect(),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn threshold_metrics_match_direct_counts((scores, gold) in instance()) {
        let k = gold[0].len();
        let counts = ConfusionCounts::from_scored(k, &scored(&scores, &gold), 0.5).unwrap();
        let expected = count_confusion(&scores, &gold, 0.5);
        let metrics = precision_recall_f1(&counts);
        let mut pooled = [0u64; 4];
        for (t, c) in counts.topics.iter().enumerate() {
            prop_assert_eq!([c.tp, c.fp, c.tn, c.fn_], expected[t]);
            let (p, r, f) = prf(c.tp, c.fp, c.fn_);
            prop_assert!((metrics.per_topic[t].precision - p).abs() < 1e-9);
            prop_assert!((metrics.per_topic[t].recall - r).abs() < 1e-9);
            prop_assert!((metrics.per_topic[t].f1 - f).abs() < 1e-9);
            for (acc, v) in pooled.iter_mut().zip(expected[t]) {
                *acc += v;
            }
        }
        let (p, r, f) = prf(pooled[0], pooled[1], pooled[3]);
        prop_assert!((metrics.micro.precision - p).abs() < 1e-9);
        prop_assert!((metrics.micro.recall - r).abs() < 1e-9);
        prop_assert!((metrics.micro.f1 - f).abs() < 1e-9);
        let mean_f1 = (0..k).map(|t| { let c = expected[t]; prf(c[0], c[1], c[3]).2 }).sum::<f64>() / k as f64;
        prop_assert!((metrics.macro_.f1 - mean_f1).abs() < 1e-9);
    }

    #[test]
    fn average_precision_matches_sweep((scores, gold) in instance()) {
        let k = gold[0].len();
        for t in 0..k {
            let col: Vec<f64> = scores.iter().map(|s| s[t]).collect();
            let g: Vec<bool> = gold.iter().map(|g| g[t]).collect();
            let mut pairs: Vec<(f64, bool)> = col.iter().copied().zip(g.iter().copied()).collect();
            let got = average_precision(&mut pairs);
            let want = ap_by_sweep(&col, &g);
            prop_assert_eq!(got.is_some(), want.is_some());
            if let (Some(a), Some(b)) = (got, want) {
                prop_assert!((a - b).abs() < 1e-9);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
            }
        }
        let flat: Vec<f64> = scores.iter().flatten().copied().collect();
        let flat_gold: Vec<bool> = gold.iter().flatten().copied().collect();
        let summary = average_precision_summary(k, &scored(&scores, &gold), MacroApPolicy::ExcludeEmpty);
        match ap_by_sweep(&flat, &flat_gold) {
            Some(want) => prop_assert!((summary.unwrap().micro - want).abs() < 1e-9),
            None => prop_assert!(summary.is_err()),
        }
    }

    #[test]
    fn average_precision_ignores_monotone_rescaling((scores, gold) in instance()) {
        let col: Vec<(f64, bool)> = scores.iter().zip(&gold).map(|(s, g)| (s[0], g[0])).collect();
        let mut a = col.clone();
        let mut b: Vec<(f64, bool)> = col.iter().map(|&(s, g)| ((3.0 * s - 1.0).exp(), g)).collect();
        prop_assert_eq!(average_precision(&mut a), average_precision(&mut b));
    }

    #[test]
    fn report_rows_are_consistent((scores, gold) in instance()) {
        let k = gold[0].len();
        let labels: Vec<String> = (0..k).map(|t| format!("t{t}")).collect();
        let articles = scored(&scores, &gold);
        let Ok(report) = EvalReport::from_scored(&labels, &articles, 0.5, MacroApPolicy::IncludeAsZero) else {
            prop_assert!(gold.iter().flatten().all(|&g| !g));
            return Ok(());
        };
        for row in &report.topics {
            prop_assert_eq!(row.n, row.tp + row.fn_);
            prop_assert_eq!(row.tp + row.fp + row.tn + row.fn_, scores.len() as u64);
            let pr = row.precision + row.recall;
            let f = if pr == 0.0 { 0.0 } else { 2.0 * row.precision * row.recall / pr };
            prop_assert!((row.f1 - f).abs() < 1e-12);
        }
        let mut out = Vec::new();
        report.write_tsv(&mut out).unwrap();
        prop_assert_eq!(String::from_utf8(out).unwrap().lines().count(), k + 3);
    }
}

#[test]
fn articles_without_links_predict_nothing() {
    let articles = vec![
        ScoredArticle {
            probs: None,
            gold: vec![0],
        },
        ScoredArticle {
            probs: Some(vec![0.9]),
            gold: vec![0],
        },
    ];
    let counts = ConfusionCounts::from_scored(1, &articles, 0.5).unwrap();
    assert_eq!((counts.topics[0].tp, counts.topics[0].fn_), (1, 1));
}
