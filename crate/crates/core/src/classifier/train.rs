use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::thread;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, softplus, Model};
use crate::{Error, Qid, Result};

/// Reinterprets parameters as relaxed atomics so that workers can update
/// them concurrently without locks.
pub(crate) fn atomic_view(values: &mut [f32]) -> &[AtomicU32] {
    // SAFETY: `AtomicU32` has the size and alignment of `u32`, which `f32`
    // shares, and the exclusive borrow rules out non-atomic access while the
    // view is alive.
    unsafe { &*(values as *mut [f32] as *const [AtomicU32]) }
}

#[inline]
fn get(cell: &AtomicU32) -> f32 {
    f32::from_bits(cell.load(Ordering::Relaxed))
}

#[inline]
fn set(cell: &AtomicU32, value: f32) {
    cell.store(value.to_bits(), Ordering::Relaxed);
}

/// Shared parameter views. Concurrent updates are last-write-wins per entry.
pub(crate) struct Params<'a> {
    dim: usize,
    labels: usize,
    input: &'a [AtomicU32],
    output: &'a [AtomicU32],
}

impl<'a> Params<'a> {
    pub(crate) fn new(
        dim: usize,
        labels: usize,
        input: &'a [AtomicU32],
        output: &'a [AtomicU32],
    ) -> Self {
        debug_assert_eq!(output.len(), dim * labels);
        Params {
            dim,
            labels,
            input,
            output,
        }
    }
}

pub(crate) struct Scratch {
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    targets: Vec<bool>,
}

impl Scratch {
    pub(crate) fn new(dim: usize, labels: usize) -> Self {
        Scratch {
            hidden: vec![0.0; dim],
            grad_hidden: vec![0.0; dim],
            targets: vec![false; labels],
        }
    }
}

/// Forward pass, cross-entropy over all labels, and in-place update of the
/// output columns and the bag's input rows. Returns the pre-update loss.
pub(crate) fn sgd_step(
    params: &Params<'_>,
    indices: &[u32],
    gold: &[usize],
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let dim = params.dim;
    let n = indices.len() as f64;

    let hidden = &mut scratch.hidden;
    hidden.iter_mut().for_each(|h| *h = 0.0);
    for &i in indices {
        let row = &params.input[i as usize * dim..(i as usize + 1) * dim];
        for (h, e) in hidden.iter_mut().zip(row) {
            *h += f64::from(get(e));
        }
    }
    hidden.iter_mut().for_each(|h| *h /= n);

    scratch.targets.iter_mut().for_each(|t| *t = false);
    for &k in gold {
        scratch.targets[k] = true;
    }

    let grad_hidden = &mut scratch.grad_hidden;
    grad_hidden.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for k in 0..params.labels {
        let column = &params.output[k * dim..(k + 1) * dim];
        let s: f64 = column
            .iter()
            .zip(hidden.iter())
            .map(|(w, &h)| f64::from(get(w)) * h)
            .sum();
        let y = if scratch.targets[k] { 1.0 } else { 0.0 };
        loss += softplus(s) - y * s;
        let g = sigmoid(s) - y;
        for ((w, &h), gh) in column.iter().zip(hidden.iter()).zip(grad_hidden.iter_mut()) {
            let old = f64::from(get(w));
            *gh += g * old;
            set(w, (old - lr * g * h) as f32);
        }
    }

    for &i in indices {
        let row = &params.input[i as usize * dim..(i as usize + 1) * dim];
        for (e, &gh) in row.iter().zip(grad_hidden.iter()) {
            set(e, (f64::from(get(e)) - lr * gh / n) as f32);
        }
    }
    loss
}

/// A labeled bag ready for training.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingExample {
    pub indices: Vec<u32>,
    pub gold: Vec<usize>,
}

impl TrainingExample {
    /// `None` when no link is in the model vocabulary.
    pub fn new(model: &Model, links: &[Qid], gold: &[usize]) -> Option<Self> {
        let bag = model.encode(links);
        (!bag.is_empty()).then(|| TrainingExample {
            indices: bag.indices,
            gold: gold.to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub examples: usize,
    /// Mean pre-update loss over each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains for `model.hyper.epochs` passes with a fresh seeded shuffle per
/// pass and a learning rate decaying linearly from `lr` to zero over all
/// example visits.
///
/// With more than one worker, threads pull examples from the shared order
/// and update parameters without synchronization; results then vary from
/// run to run. A single worker is bitwise reproducible.
pub fn train(model: &mut Model, examples: &[TrainingExample]) -> Result<TrainReport> {
    model.hyper.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let (dim, labels) = (model.dim(), model.label_count());
    let vocab = model.vocab().len();
    for ex in examples {
        if ex.indices.is_empty() {
            return Err(Error::NoUsableLinks);
        }
        if let Some(&k) = ex.gold.iter().find(|&&k| k >= labels) {
            return Err(Error::LabelCount {
                expected: labels,
                actual: k + 1,
            });
        }
        if ex.indices.iter().any(|&i| i as usize >= vocab) {
            return Err(Error::Format("example index outside vocabulary".into()));
        }
    }

    let hyper = model.hyper.clone();
    let lr0 = f64::from(hyper.lr);
    let n = examples.len();
    let total = f64::from(hyper.epochs) * n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs as usize);

    let (input, output) = model.parameters_mut();
    let params = Params::new(dim, labels, atomic_view(input), atomic_view(output));

    for epoch in 0..hyper.epochs as usize {
        order.shuffle(&mut rng);
        let next = AtomicUsize::new(0);
        let run = || {
            let mut scratch = Scratch::new(dim, labels);
            let mut loss = 0.0;
            loop {
                let pos = next.fetch_add(1, Ordering::Relaxed);
                if pos >= n {
                    return loss;
                }
                let t = (epoch * n + pos) as f64;
                let lr = lr0 * (1.0 - t / total);
                let ex = &examples[order[pos]];
                loss += sgd_step(&params, &ex.indices, &ex.gold, lr, &mut scratch);
            }
        };
        let loss = if hyper.workers == 1 {
            run()
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = (0..hyper.workers).map(|_| s.spawn(run)).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .sum()
            })
        };
        epoch_losses.push(loss / n as f64);
    }
    Ok(TrainReport {
        examples: n,
        epoch_losses,
    })
}
