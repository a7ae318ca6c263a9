mod common;
mod gen;

use linktopic::classifier::{
    build_vocabulary, init_model, read_model, train, write_model, Hyperparams, TrainingExample,
};
use linktopic::labeling::TopicTaxonomy;
use linktopic::synth::{planted_corpus, PlantedConfig};
use linktopic::Qid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gen::{max_gradient_error, random_model};

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let worst = max_gradient_error(&mut rng, 25, 1e-4);
    assert!(worst <= 1e-4, "worst relative error {worst}");
}

fn small_corpus() -> (Vec<Vec<Qid>>, Vec<Vec<usize>>, TopicTaxonomy) {
    let cfg = PlantedConfig {
        topics: 6,
        articles_per_topic: 600,
        signature_links: 20,
        noise_pool: 300,
        ..Default::default()
    };
    let articles = planted_corpus(&cfg);
    let tax = TopicTaxonomy::new((0..6).map(|k| format!("t{k}")), false).unwrap();
    let bags = articles.iter().map(|a| a.links.clone()).collect();
    let gold = articles.iter().map(|a| a.topics.clone()).collect();
    (bags, gold, tax)
}

fn trained(workers: usize, seed: u64) -> (linktopic::classifier::Model, Vec<f64>) {
    let (bags, gold, tax) = small_corpus();
    let hyper = Hyperparams {
        dim: 16,
        min_count: 2,
        epochs: 5,
        seed,
        workers,
        ..Hyperparams::default()
    };
    let vocab = build_vocabulary(bags.iter().map(Vec::as_slice), hyper.min_count).unwrap();
    let mut model = init_model(vocab, &tax, hyper).unwrap();
    let examples: Vec<_> = bags
        .iter()
        .zip(&gold)
        .filter_map(|(b, g)| TrainingExample::new(&model, b, g))
        .collect();
    let report = train(&mut model, &examples).unwrap();
    (model, report.epoch_losses)
}

#[test]
fn single_worker_training_is_reproducible() {
    let (a, losses) = trained(1, 9);
    let (b, _) = trained(1, 9);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    write_model(&mut x, &a).unwrap();
    write_model(&mut y, &b).unwrap();
    assert_eq!(x, y);
    assert!(losses.windows(2).all(|w| w[1] <= w[0]), "{losses:?}");

    let (c, _) = trained(1, 10);
    assert_ne!(a.input(), c.input());
}

#[test]
fn parallel_training_learns() {
    let (model, losses) = trained(4, 9);
    assert!(model
        .input()
        .iter()
        .chain(model.output())
        .all(|x| x.is_finite()));
    assert!(losses[losses.len() - 1] < losses[0], "{losses:?}");
    let (bags, gold, _) = small_corpus();
    let hits = bags
        .iter()
        .zip(&gold)
        .filter(|(b, g)| {
            model
                .predict(b, 0.5)
                .topics
                .iter()
                .any(|(k, _)| g.contains(k))
        })
        .count();
    assert!(hits as f64 > 0.8 * bags.len() as f64, "{hits}");
}

#[test]
fn save_load_preserves_forward_bits() {
    let (model, _) = trained(1, 3);
    let mut buf = Vec::new();
    write_model(&mut buf, &model).unwrap();
    let loaded = read_model(buf.as_slice()).unwrap();
    assert_eq!(loaded, model);
    let (bags, _, _) = small_corpus();
    for bag in bags.iter().take(200) {
        let a = model.predict(bag, 0.5).probs.unwrap();
        let b = loaded.predict(bag, 0.5).probs.unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

proptest! {
    #[test]
    fn predictions_ignore_order_and_repeats(
        seed in any::<u64>(),
        bag in prop::collection::vec(1u64..30, 1..25),
        perm_seed in any::<u64>(),
        extra in prop::collection::vec(any::<prop::sample::Index>(), 0..5),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4, 20, 3, 1.0);
        let links: Vec<Qid> = bag.iter().map(|&i| Qid(i)).collect();
        let mut other = links.clone();
        let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..other.len()).rev() {
            other.swap(i, prng.gen_range(0..=i));
        }
        for idx in &extra {
            other.push(links[idx.index(links.len())]);
        }
        let a = model.predict(&links, 0.5);
        let b = model.predict(&other, 0.5);
        prop_assert_eq!(a, b);
    }
}
