//! Run the three single-input attacks (FGSM, iterated FGSM, projected
//! gradient) against a trained classifier and report how often each
//! flips a correctly classified point within the ε-box.

use advpair::attack::local::{local_attack, LocalAttackConfig, LocalMethod};
use advpair::data::{generate, DataConfig};
use advpair::net::{train, Network, TrainConfig};

fn main() -> advpair::Result<()> {
    let data = generate(&DataConfig {
        n_per_class: 150,
        rng_seed: 7,
        ..DataConfig::default()
    })?;
    let init = Network::random(2, &[32, 32], data.class_names.clone(), 0)?;
    let model = train(
        &init,
        &data,
        &TrainConfig {
            epochs: 150,
            learning_rate: 0.1,
            ..TrainConfig::default()
        },
    )?;

    let epsilon = 0.1;
    for method in [LocalMethod::Fgsm, LocalMethod::Ifgsm, LocalMethod::Pgd] {
        let cfg = LocalAttackConfig {
            method,
            epsilon,
            steps: 30,
            step_size: 0.01,
            rng_seed: 1,
            noise_scale: 1.0,
        };
        let mut attacked = 0usize;
        let mut flipped = 0usize;
        for (x, &label) in data.inputs.iter().zip(&data.labels) {
            // Only correctly classified points are meaningful targets.
            if model.predict_class(x)? != label {
                continue;
            }
            attacked += 1;
            if local_attack(&model, x, label, &cfg)?.flipped {
                flipped += 1;
            }
        }
        println!(
            "{method:?}: flipped {flipped}/{attacked} correctly classified points (ε = {epsilon})"
        );
    }
    Ok(())
}
