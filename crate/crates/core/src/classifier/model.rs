use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::train::{atomic_view, sgd_step, Params, Scratch};
use super::{sigmoid, softplus, Hyperparams, Vocabulary};
use crate::labeling::TopicTaxonomy;
use crate::{Error, Qid, Result};

/// Trained or freshly initialized classifier.
///
/// `input` is the `|V| x dim` embedding matrix, row-major. `output` holds one
/// `dim`-length weight column per label, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub hyper: Hyperparams,
    vocab: Vocabulary,
    labels: Vec<String>,
    input: Vec<f32>,
    output: Vec<f32>,
}

/// In-vocabulary indices of a bag, sorted and unique.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodedBag {
    pub indices: Vec<u32>,
    /// Number of distinct links in the raw bag.
    pub unique_links: usize,
}

impl EncodedBag {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Fraction of distinct links that are in the vocabulary.
    pub fn coverage(&self) -> f64 {
        if self.unique_links == 0 {
            0.0
        } else {
            self.indices.len() as f64 / self.unique_links as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Per-label probabilities and the labels above the decision threshold.
///
/// `probs` is `None` when the bag had no in-vocabulary links.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub probs: Option<Vec<f64>>,
    /// `(label index, probability)`, probability descending then index
    /// ascending.
    pub topics: Vec<(usize, f64)>,
    pub coverage: f64,
}

impl Prediction {
    pub fn no_usable_links(&self) -> bool {
        self.probs.is_none()
    }
}

/// Gradient of the summed per-label cross-entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    /// Same layout as the output matrix.
    pub output: Vec<f64>,
    /// One entry per distinct in-vocabulary input row.
    pub input: Vec<(u32, Vec<f64>)>,
}

/// Fresh model: input entries uniform in `[-1/dim, 1/dim]` from a generator
/// seeded with `hyper.seed`, output weights zero.
pub fn init_model(
    vocab: Vocabulary,
    taxonomy: &TopicTaxonomy,
    hyper: Hyperparams,
) -> Result<Model> {
    hyper.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary(hyper.min_count));
    }
    let dim = hyper.dim;
    let bound = 1.0 / dim as f32;
    let dist = Uniform::new_inclusive(-bound, bound);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let input = (0..vocab.len() * dim)
        .map(|_| dist.sample(&mut rng))
        .collect();
    let output = vec![0.0; taxonomy.len() * dim];
    Ok(Model {
        labels: taxonomy.ids().to_vec(),
        hyper,
        vocab,
        input,
        output,
    })
}

impl Model {
    /// Assembles a model from raw parts, checking shapes and finiteness.
    pub fn from_parts(
        hyper: Hyperparams,
        vocab: Vocabulary,
        labels: Vec<String>,
        input: Vec<f32>,
        output: Vec<f32>,
    ) -> Result<Self> {
        hyper.validate()?;
        let dim = hyper.dim;
        if input.len() != vocab.len() * dim {
            return Err(Error::Format(format!(
                "input matrix has {} entries, expected {} x {dim}",
                input.len(),
                vocab.len()
            )));
        }
        if output.len() != labels.len() * dim {
            return Err(Error::Format(format!(
                "output matrix has {} entries, expected {dim} x {}",
                output.len(),
                labels.len()
            )));
        }
        if !input.iter().chain(&output).all(|x| x.is_finite()) {
            return Err(Error::Format("non-finite parameter".into()));
        }
        Ok(Model {
            hyper,
            vocab,
            labels,
            input,
            output,
        })
    }

    pub fn dim(&self) -> usize {
        self.hyper.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn input(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> &[f32] {
        &self.output
    }

    pub fn input_mut(&mut self) -> &mut [f32] {
        &mut self.input
    }

    pub fn output_mut(&mut self) -> &mut [f32] {
        &mut self.output
    }

    pub(crate) fn parameters_mut(&mut self) -> (&mut [f32], &mut [f32]) {
        (&mut self.input, &mut self.output)
    }

    pub fn input_row(&self, index: u32) -> &[f32] {
        let dim = self.dim();
        &self.input[index as usize * dim..(index as usize + 1) * dim]
    }

    pub fn output_column(&self, label: usize) -> &[f32] {
        let dim = self.dim();
        &self.output[label * dim..(label + 1) * dim]
    }

    /// Maps a bag to sorted unique vocabulary indices, skipping unknown links.
    pub fn encode(&self, links: &[Qid]) -> EncodedBag {
        let mut unique = links.to_vec();
        unique.sort_unstable();
        unique.dedup();
        let mut indices: Vec<u32> = unique.iter().filter_map(|&q| self.vocab.get(q)).collect();
        indices.sort_unstable();
        EncodedBag {
            indices,
            unique_links: unique.len(),
        }
    }

    fn hidden(&self, indices: &[u32]) -> Vec<f64> {
        let dim = self.dim();
        let mut hidden = vec![0.0f64; dim];
        for &i in indices {
            for (h, &e) in hidden.iter_mut().zip(self.input_row(i)) {
                *h += f64::from(e);
            }
        }
        let n = indices.len() as f64;
        hidden.iter_mut().for_each(|h| *h /= n);
        hidden
    }

    fn score(&self, label: usize, hidden: &[f64]) -> f64 {
        self.output_column(label)
            .iter()
            .zip(hidden)
            .map(|(&w, &h)| f64::from(w) * h)
            .sum()
    }

    /// Mean embedding of the bag and the per-label probabilities.
    pub fn forward(&self, bag: &EncodedBag) -> Result<Forward> {
        if bag.is_empty() {
            return Err(Error::NoUsableLinks);
        }
        let hidden = self.hidden(&bag.indices);
        let probs = (0..self.label_count())
            .map(|k| sigmoid(self.score(k, &hidden)))
            .collect();
        Ok(Forward { hidden, probs })
    }

    /// Labels with probability strictly above `threshold`.
    pub fn predict(&self, links: &[Qid], threshold: f64) -> Prediction {
        let bag = self.encode(links);
        let coverage = bag.coverage();
        let Ok(forward) = self.forward(&bag) else {
            return Prediction {
                probs: None,
                topics: Vec::new(),
                coverage,
            };
        };
        let mut topics: Vec<(usize, f64)> = forward
            .probs
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > threshold)
            .map(|(k, &p)| (k, p))
            .collect();
        topics.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Prediction {
            probs: Some(forward.probs),
            topics,
            coverage,
        }
    }

    /// Loss `sum_k softplus(s_k) - y_k s_k` and its exact gradient.
    pub fn loss_and_gradients(&self, bag: &EncodedBag, gold: &[usize]) -> Result<(f64, Gradients)> {
        if bag.is_empty() {
            return Err(Error::NoUsableLinks);
        }
        let dim = self.dim();
        let hidden = self.hidden(&bag.indices);
        let mut loss = 0.0;
        let mut output = vec![0.0; self.output.len()];
        let mut grad_hidden = vec![0.0; dim];
        for k in 0..self.label_count() {
            let s = self.score(k, &hidden);
            let y = if gold.contains(&k) { 1.0 } else { 0.0 };
            loss += softplus(s) - y * s;
            let g = sigmoid(s) - y;
            for j in 0..dim {
                output[k * dim + j] = g * hidden[j];
                grad_hidden[j] += g * f64::from(self.output[k * dim + j]);
            }
        }
        let n = bag.indices.len() as f64;
        let row: Vec<f64> = grad_hidden.iter().map(|g| g / n).collect();
        let input = bag.indices.iter().map(|&i| (i, row.clone())).collect();
        Ok((loss, Gradients { output, input }))
    }

    /// One SGD step on a single example. Returns the loss before the update.
    pub fn train_example(&mut self, bag: &EncodedBag, gold: &[usize], lr: f64) -> Result<f64> {
        if bag.is_empty() {
            return Err(Error::NoUsableLinks);
        }
        let (dim, labels) = (self.dim(), self.label_count());
        if let Some(&k) = gold.iter().find(|&&k| k >= labels) {
            return Err(Error::LabelCount {
                expected: labels,
                actual: k + 1,
            });
        }
        let (input, output) = self.parameters_mut();
        let params = Params::new(dim, labels, atomic_view(input), atomic_view(output));
        let mut scratch = Scratch::new(dim, labels);
        Ok(sgd_step(&params, &bag.indices, gold, lr, &mut scratch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// dim 2, tokens Q1 -> (1, 0) and Q2 -> (0, 1), every output column (2, 2).
    fn hand_model() -> Model {
        let vocab = Vocabulary::from_entries(vec![(Qid(1), 5), (Qid(2), 5)]).unwrap();
        let hyper = Hyperparams {
            dim: 2,
            ..Default::default()
        };
        let labels: Vec<String> = (0..64).map(|k| format!("t{k}")).collect();
        Model::from_parts(
            hyper,
            vocab,
            labels,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![2.0; 128],
        )
        .unwrap()
    }

    fn fresh(dim: usize) -> Model {
        let vocab = Vocabulary::from_entries((1..=30).map(|i| (Qid(i), 1)).collect()).unwrap();
        let hyper = Hyperparams {
            dim,
            seed: 11,
            ..Default::default()
        };
        init_model(vocab, &TopicTaxonomy::standard(), hyper).unwrap()
    }

    #[test]
    fn hand_model_forward() {
        let m = hand_model();
        let f = m.forward(&m.encode(&[Qid(2), Qid(1)])).unwrap();
        assert_eq!(f.hidden, vec![0.5, 0.5]);
        // sigma(2), evaluated independently to 16 digits.
        for p in f.probs {
            assert!((p - 0.880_797_077_977_882_3).abs() < 1e-12);
        }
    }

    #[test]
    fn single_token_hidden_is_its_row() {
        let m = fresh(7);
        let f = m.forward(&m.encode(&[Qid(5)])).unwrap();
        let row: Vec<f64> = m
            .input_row(m.vocab().get(Qid(5)).unwrap())
            .iter()
            .map(|&x| f64::from(x))
            .collect();
        assert_eq!(f.hidden, row);
    }

    #[test]
    fn fresh_model_is_uninformative() {
        let m = fresh(50);
        assert!(m.input().iter().all(|x| x.abs() <= 0.02));
        assert!(m.output().iter().all(|&x| x == 0.0));
        let f = m.forward(&m.encode(&[Qid(3), Qid(9)])).unwrap();
        assert!(f.probs.iter().all(|&p| p == 0.5));
        assert_eq!(fresh(50), m);
    }

    #[test]
    fn fresh_loss_is_64_ln2() {
        let mut m = fresh(8);
        let bag = m.encode(&[Qid(1), Qid(2), Qid(3)]);
        let loss = m.train_example(&bag, &[0, 5], 0.1).unwrap();
        assert!((loss - 64.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((loss - 44.361_419_555_836_5).abs() < 1e-9);
    }

    #[test]
    fn zero_lr_leaves_parameters() {
        let mut m = hand_model();
        let before = m.clone();
        let bag = m.encode(&[Qid(1)]);
        let loss = m.train_example(&bag, &[3], 0.0).unwrap();
        assert_eq!(m, before);
        assert!(loss.is_finite());
    }

    #[test]
    fn step_decreases_loss() {
        let mut m = hand_model();
        let bag = m.encode(&[Qid(1), Qid(2)]);
        let gold = [0, 1, 2];
        let before = m.train_example(&bag, &gold, 0.1).unwrap();
        let (after, _) = m.loss_and_gradients(&bag, &gold).unwrap();
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn step_follows_gradient() {
        let mut m = fresh(4);
        m.output_mut()
            .iter_mut()
            .enumerate()
            .for_each(|(i, w)| *w = ((i % 7) as f32 - 3.0) * 0.1);
        let bag = m.encode(&[Qid(4), Qid(8)]);
        let (_, grads) = m.loss_and_gradients(&bag, &[2]).unwrap();
        let before = m.clone();
        let lr = 1e-3;
        m.train_example(&bag, &[2], lr).unwrap();
        for (i, g) in grads.output.iter().enumerate() {
            let delta = f64::from(m.output()[i]) - f64::from(before.output()[i]);
            assert!((delta + lr * g).abs() < 1e-6);
        }
        for (row, g) in &grads.input {
            let rows = m.input_row(*row).iter().zip(before.input_row(*row));
            for ((after, prior), gj) in rows.zip(g) {
                let delta = f64::from(*after) - f64::from(*prior);
                assert!((delta + lr * gj).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn no_usable_links() {
        let mut m = hand_model();
        let bag = m.encode(&[Qid(77)]);
        assert!(matches!(m.forward(&bag), Err(Error::NoUsableLinks)));
        assert!(matches!(
            m.train_example(&bag, &[0], 0.1),
            Err(Error::NoUsableLinks)
        ));
        let p = m.predict(&[Qid(77)], 0.5);
        assert!(p.no_usable_links() && p.topics.is_empty());
        assert_eq!(p.coverage, 0.0);
        assert!(matches!(
            m.train_example(&m.encode(&[Qid(1)]), &[64], 0.1),
            Err(Error::LabelCount { .. })
        ));
    }

    #[test]
    fn threshold_is_strict() {
        let m = fresh(5);
        let p = m.predict(&[Qid(1)], 0.5);
        assert!(p.topics.is_empty());
        assert_eq!(p.coverage, 1.0);
    }

    #[test]
    fn predicted_topics_sorted() {
        let mut m = hand_model();
        // Column k scores 2 * (w_k0 + w_k1) / 2 for the bag {Q1, Q2}.
        for k in 0..64 {
            let w = if k == 1 {
                3.0
            } else if k == 4 || k == 2 {
                1.0
            } else {
                -2.0
            };
            m.output_mut()[2 * k..2 * k + 2].copy_from_slice(&[w, w]);
        }
        let p = m.predict(&[Qid(1), Qid(2), Qid(99)], 0.5);
        let order: Vec<usize> = p.topics.iter().map(|t| t.0).collect();
        assert_eq!(order, vec![1, 2, 4]);
        assert!((p.coverage - 2.0 / 3.0).abs() < 1e-15);
    }
}
