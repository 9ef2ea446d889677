//! Hunt for global adversarial pairs — two inputs within ε of each
//! other that a trained model classifies differently — with the
//! alternating gradient attack, and show how the pair loss climbs
//! round by round.

use advpair::attack::global::{g_attack, GlobalAltConfig, GlobalAltMethod};
use advpair::attack::local::Region;
use advpair::data::{generate, DataConfig};
use advpair::net::{train, Network, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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
    let cfg = GlobalAltConfig {
        method: GlobalAltMethod::GPgd,
        epsilon,
        rounds: 40,
        sub_steps: 30,
        step_size: 0.01,
        rng_seed: 0,
        noise_scale: 1.0,
    };

    // Start from a dataset point and a noisy partner inside its ε-box.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x1 = data.inputs[0].clone();
    let mut x2: Vec<f64> = x1
        .iter()
        .map(|&v| v + rng.random_range(-epsilon..epsilon))
        .collect();
    Region::new(&x1, epsilon)?.clip(&mut x2);

    let trace = g_attack(&model, &x1, &x2, &cfg)?;
    for (round, pair) in trace.pairs.iter().enumerate().step_by(5) {
        println!(
            "round {round:>3}: loss {:.4}  disagree {}",
            pair.loss, pair.disagree
        );
    }
    let best = trace.best().expect("at least one round");
    let names = model.class_names();
    println!(
        "\nbest pair: loss {:.4}, classes {} vs {}",
        best.loss,
        names[model.predict_class(&best.x1)?],
        names[model.predict_class(&best.x2)?],
    );
    println!(
        "x1 = {:?}\nx2 = {:?}\nL∞ distance {:.4} (ε = {epsilon})",
        best.x1,
        best.x2,
        best.x1
            .iter()
            .zip(&best.x2)
            .fold(0.0f64, |a, (&u, &v)| a.max((u - v).abs()))
    );
    Ok(())
}
