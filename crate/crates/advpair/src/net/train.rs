//! Minibatch SGD training, plain or with adversarial example mixing.

use crate::attack::local::{local_attack_with_rng, LocalAttackConfig, LocalMethod};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::net::Network;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Adversarial-training branch: each epoch attacks the previous epoch's
/// frozen snapshot with iterated projected gradient ascent and mixes the
/// perturbed examples into every batch.
#[derive(Debug, Clone)]
pub struct AdversarialCfg {
    pub pgd_steps: usize,
    pub step_size: f64,
    pub epsilon: f64,
    /// Weight of the adversarial term; batch loss is
    /// `(clean + mix_ratio * adv) / (1 + mix_ratio)`.
    pub mix_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
    pub adversarial: Option<AdversarialCfg>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 32,
            learning_rate: 0.05,
            rng_seed: 0,
            adversarial: None,
        }
    }
}

fn validate(net: &Network, data: &Dataset, cfg: &TrainConfig) -> Result<()> {
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "learning_rate must be positive and finite, got {}",
            cfg.learning_rate
        )));
    }
    if data.is_empty() {
        return Err(Error::InvalidConfig("training dataset is empty".into()));
    }
    if data.dim() != net.input_dim() {
        return Err(Error::Shape(format!(
            "dataset dimension {} does not match network input_dim {}",
            data.dim(),
            net.input_dim()
        )));
    }
    if let Some(&bad) = data.labels.iter().find(|&&l| l >= net.num_classes()) {
        return Err(Error::Shape(format!(
            "dataset label {} out of range for {} classes",
            bad,
            net.num_classes()
        )));
    }
    if let Some(adv) = &cfg.adversarial {
        if !(adv.epsilon > 0.0 && adv.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "adversarial epsilon must be positive, got {}",
                adv.epsilon
            )));
        }
        if adv.pgd_steps == 0 {
            return Err(Error::InvalidConfig(
                "adversarial pgd_steps must be at least 1".into(),
            ));
        }
        if !(adv.step_size > 0.0 && adv.step_size.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "adversarial step_size must be positive, got {}",
                adv.step_size
            )));
        }
        if !(adv.mix_ratio >= 0.0 && adv.mix_ratio.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "adversarial mix_ratio must be nonnegative, got {}",
                adv.mix_ratio
            )));
        }
    }
    Ok(())
}

/// Trains a copy of `net` on `data` and returns it. Deterministic in
/// `cfg.rng_seed`; with `epochs == 0` the copy is returned unchanged.
///
/// A non-finite batch loss or parameter aborts with [`Error::Diverged`]
/// instead of handing back a poisoned model.
pub fn train(net: &Network, data: &Dataset, cfg: &TrainConfig) -> Result<Network> {
    validate(net, data, cfg)?;
    let mut net = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let (clean_w, adv_w) = match &cfg.adversarial {
        Some(adv) => (
            1.0 / (1.0 + adv.mix_ratio),
            adv.mix_ratio / (1.0 + adv.mix_ratio),
        ),
        None => (1.0, 0.0),
    };
    let attack_cfg = cfg.adversarial.as_ref().map(|adv| LocalAttackConfig {
        method: LocalMethod::Pgd,
        epsilon: adv.epsilon,
        steps: adv.pgd_steps,
        step_size: adv.step_size,
        rng_seed: 0, // unused: the training stream is threaded through
        noise_scale: 1.0,
    });

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        // Adversarial examples are generated against the model as it
        // stood at the start of the epoch, not the one being updated.
        let snapshot = cfg.adversarial.as_ref().map(|_| net.clone());

        for batch in order.chunks(cfg.batch_size) {
            let mut weight_acc: Vec<Vec<f64>> = net
                .layers()
                .iter()
                .map(|l| vec![0.0; l.weights().len()])
                .collect();
            let mut bias_acc: Vec<Vec<f64>> = net
                .layers()
                .iter()
                .map(|l| vec![0.0; l.out_dim()])
                .collect();
            let mut batch_loss = 0.0;

            for &idx in batch {
                let x = &data.inputs[idx];
                let y = data.labels[idx];
                let clean = net.backprop(x, y, true)?;
                accumulate(&mut weight_acc, &mut bias_acc, &clean, clean_w);
                batch_loss += clean_w * clean.loss;

                if let (Some(snap), Some(acfg)) = (&snapshot, &attack_cfg) {
                    let hit = local_attack_with_rng(snap, x, y, acfg, &mut rng)?;
                    let adv = net.backprop(&hit.x_adv, y, true)?;
                    accumulate(&mut weight_acc, &mut bias_acc, &adv, adv_w);
                    batch_loss += adv_w * adv.loss;
                }
            }

            let scale = cfg.learning_rate / batch.len() as f64;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: batch_loss,
                });
            }
            for (li, layer) in net.layers_mut().iter_mut().enumerate() {
                layer.sgd_step(&weight_acc[li], &bias_acc[li], scale);
            }
            let poisoned = net.layers().iter().any(|l| {
                l.weights()
                    .iter()
                    .chain(l.bias().iter())
                    .any(|v| !v.is_finite())
            });
            if poisoned {
                return Err(Error::Diverged {
                    epoch,
                    loss: batch_loss,
                });
            }
        }
    }
    Ok(net)
}

fn accumulate(
    weight_acc: &mut [Vec<f64>],
    bias_acc: &mut [Vec<f64>],
    back: &crate::net::Backprop,
    w: f64,
) {
    for (acc, g) in weight_acc.iter_mut().zip(&back.weight_grads) {
        for (a, &v) in acc.iter_mut().zip(g) {
            *a += w * v;
        }
    }
    for (acc, g) in bias_acc.iter_mut().zip(&back.bias_grads) {
        for (a, &v) in acc.iter_mut().zip(g) {
            *a += w * v;
        }
    }
}

/// Fraction of dataset rows on which the predicted class equals the label.
pub fn accuracy(net: &Network, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidConfig(
            "accuracy over an empty dataset".into(),
        ));
    }
    let mut correct = 0usize;
    for (x, &y) in data.inputs.iter().zip(&data.labels) {
        if net.predict_class(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
