//! Generate the two-moons dataset (with its junk class), train a small
//! dense classifier, and print per-class accuracy.

use advpair::data::{generate, split, DataConfig, DataKind};
use advpair::net::{accuracy, train, Network, TrainConfig};

fn main() -> advpair::Result<()> {
    let data = generate(&DataConfig {
        kind: DataKind::TwoMoons,
        n_per_class: 200,
        noise_scale: 0.12,
        meaningless_fraction: 0.1,
        rng_seed: 7,
    })?;
    println!(
        "dataset: {} rows, classes {:?}",
        data.len(),
        data.class_names
    );
    let (train_set, test_set) = split(&data, 0.8, 7)?;

    let init = Network::random(2, &[32, 32], data.class_names.clone(), 0)?;
    let model = train(
        &init,
        &train_set,
        &TrainConfig {
            epochs: 200,
            learning_rate: 0.1,
            ..TrainConfig::default()
        },
    )?;

    println!("train accuracy    {:.4}", accuracy(&model, &train_set)?);
    println!("held-out accuracy {:.4}", accuracy(&model, &test_set)?);

    // Per-class breakdown on the held-out split.
    for (c, name) in test_set.class_names.iter().enumerate() {
        let rows: Vec<usize> = (0..test_set.len())
            .filter(|&i| test_set.labels[i] == c)
            .collect();
        let hits = rows
            .iter()
            .filter(|&&i| model.predict_class(&test_set.inputs[i]).unwrap() == c)
            .count();
        println!("  class {name:<12} {hits:>3}/{:<3} correct", rows.len());
    }
    Ok(())
}
