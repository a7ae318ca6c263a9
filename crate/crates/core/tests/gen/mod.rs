//! Random models and bags for classifier tests.
#![allow(dead_code)]

use linktopic::classifier::{Hyperparams, Model, Vocabulary};
use linktopic::Qid;
use rand::Rng;

use crate::common::{bag_loss, relative_error};

/// Model with `vocab` tokens `Q1..` and every parameter uniform in
/// `[-scale, scale]`.
pub fn random_model<R: Rng>(
    rng: &mut R,
    dim: usize,
    vocab: usize,
    labels: usize,
    scale: f32,
) -> Model {
    let hyper = Hyperparams {
        dim,
        min_count: 1,
        ..Hyperparams::default()
    };
    let entries = (0..vocab)
        .map(|i| (Qid(i as u64 + 1), (vocab - i) as u64))
        .collect();
    let vocab_table = Vocabulary::from_entries(entries).unwrap();
    let names = (0..labels).map(|k| format!("topic-{k}")).collect();
    let input = (0..vocab * dim)
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    let output = (0..labels * dim)
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    Model::from_parts(hyper, vocab_table, names, input, output).unwrap()
}

/// Random bag over `Q1..=Q(span)`, possibly with repeats and
/// out-of-vocabulary ids.
pub fn random_bag<R: Rng>(rng: &mut R, span: u64, max_len: usize) -> Vec<Qid> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| Qid(rng.gen_range(1..=span))).collect()
}

pub fn random_gold<R: Rng>(rng: &mut R, labels: usize) -> Vec<usize> {
    (0..labels).filter(|_| rng.gen_bool(0.3)).collect()
}

/// Largest relative error between analytic gradients and central finite
/// differences of the reference loss, over `models` random small models.
pub fn max_gradient_error<R: Rng>(rng: &mut R, models: usize, step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let dim = rng.gen_range(1..=8);
        let vocab = rng.gen_range(1..=20);
        let labels = rng.gen_range(1..=6);
        let model = random_model(rng, dim, vocab, labels, 0.5);
        let links = random_bag(rng, vocab as u64, 10);
        let gold = random_gold(rng, labels);
        let bag = model.encode(&links);
        let (loss, grad) = model.loss_and_gradients(&bag, &gold).unwrap();

        let mut rows: Vec<Vec<f64>> = bag
            .indices
            .iter()
            .map(|&i| model.input_row(i).iter().map(|&x| f64::from(x)).collect())
            .collect();
        let mut out: Vec<Vec<f64>> = (0..labels)
            .map(|k| {
                model
                    .output_column(k)
                    .iter()
                    .map(|&x| f64::from(x))
                    .collect()
            })
            .collect();
        let mask: Vec<bool> = (0..labels).map(|k| gold.contains(&k)).collect();
        assert!(
            (bag_loss(&rows, &out, &mask) - loss).abs() < 1e-9,
            "loss disagrees with reference"
        );

        for k in 0..labels {
            for j in 0..dim {
                let orig = out[k][j];
                out[k][j] = orig + step;
                let plus = bag_loss(&rows, &out, &mask);
                out[k][j] = orig - step;
                let minus = bag_loss(&rows, &out, &mask);
                out[k][j] = orig;
                worst = worst.max(relative_error(
                    grad.output[k * dim + j],
                    (plus - minus) / (2.0 * step),
                ));
            }
        }
        assert_eq!(grad.input.len(), bag.indices.len());
        for (r, (index, g)) in grad.input.iter().enumerate() {
            assert_eq!(*index, bag.indices[r]);
            for j in 0..dim {
                let orig = rows[r][j];
                rows[r][j] = orig + step;
                let plus = bag_loss(&rows, &out, &mask);
                rows[r][j] = orig - step;
                let minus = bag_loss(&rows, &out, &mask);
                rows[r][j] = orig;
                worst = worst.max(relative_error(g[j], (plus - minus) / (2.0 * step)));
            }
        }
    }
    worst
}
