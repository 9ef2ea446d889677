//! Single-input attack baselines: FGSM, iterated FGSM, and PGD.
//!
//! All three climb the cross-entropy of the model's prediction against the
//! start point's label, constrained to the L∞ ball around the start
//! intersected with the unit box. They differ only in step schedule and
//! whether the iterate is randomized first, and are implemented as one
//! loop so the degenerate parameter choices coincide exactly:
//! PGD with zero noise is IFGSM, and IFGSM with one step of size ε is FGSM.

use crate::error::{Error, Result};
use crate::net::Network;
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The feasible set of an attack: an L∞ ball intersected with the unit
/// box. `clip` projects onto it coordinate-wise (exact, since the set is
/// an axis-aligned rectangle).
#[derive(Debug, Clone)]
pub struct Region {
    center: Vec<f64>,
    radius: f64,
}

impl Region {
    pub fn new(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "region radius must be positive and finite, got {radius}"
            )));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("region center is not finite".into()));
        }
        Ok(Region {
            center: center.to_vec(),
            radius,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Projects `x` onto the region, coordinate by coordinate.
    pub fn clip(&self, x: &mut [f64]) {
        for (xi, &ci) in x.iter_mut().zip(&self.center) {
            let lo = (ci - self.radius).max(0.0);
            let hi = (ci + self.radius).min(1.0);
            *xi = xi.clamp(lo, hi);
        }
    }

    /// True when every coordinate lies inside the region.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.center).all(|(&xi, &ci)| {
            xi >= (ci - self.radius).max(0.0) && xi <= (ci + self.radius).min(1.0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalMethod {
    Fgsm,
    Ifgsm,
    Pgd,
}

#[derive(Debug, Clone)]
pub struct LocalAttackConfig {
    pub method: LocalMethod,
    pub epsilon: f64,
    /// Gradient steps. Ignored for FGSM, which always takes one.
    pub steps: usize,
    /// Step length. Ignored for FGSM, which always uses `epsilon`.
    pub step_size: f64,
    pub rng_seed: u64,
    /// Multiplier on PGD's uniform start noise. 1 is the standard attack;
    /// 0 reduces PGD to IFGSM exactly. No effect on FGSM/IFGSM.
    pub noise_scale: f64,
}

impl Default for LocalAttackConfig {
    fn default() -> Self {
        LocalAttackConfig {
            method: LocalMethod::Pgd,
            epsilon: 0.1,
            steps: 30,
            step_size: 0.01,
            rng_seed: 0,
            noise_scale: 1.0,
        }
    }
}

fn validate(cfg: &LocalAttackConfig) -> Result<(usize, f64, f64)> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive and finite, got {}",
            cfg.epsilon
        )));
    }
    if !(cfg.noise_scale >= 0.0 && cfg.noise_scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_scale must be nonnegative and finite, got {}",
            cfg.noise_scale
        )));
    }
    let (steps, step_size, noise) = match cfg.method {
        LocalMethod::Fgsm => (1, cfg.epsilon, 0.0),
        LocalMethod::Ifgsm => (cfg.steps, cfg.step_size, 0.0),
        LocalMethod::Pgd => (cfg.steps, cfg.step_size, cfg.noise_scale),
    };
    if steps == 0 {
        return Err(Error::InvalidConfig("steps must be at least 1".into()));
    }
    if !(step_size > 0.0 && step_size.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step_size must be positive and finite, got {step_size}"
        )));
    }
    Ok((steps, step_size, noise))
}

#[derive(Debug, Clone)]
pub struct LocalAttackOutcome {
    /// The perturbed input; stays within ε of the start and inside the box.
    pub x_adv: Vec<f64>,
    /// Cross-entropy of the prediction at `x_adv` against `label`.
    pub loss: f64,
    /// True when the predicted class at `x_adv` differs from `label`.
    pub flipped: bool,
}

/// Runs the configured attack from `x` against its class `label`,
/// seeding an internal generator from `cfg.rng_seed`.
pub fn local_attack(
    net: &Network,
    x: &[f64],
    label: usize,
    cfg: &LocalAttackConfig,
) -> Result<LocalAttackOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    local_attack_with_rng(net, x, label, cfg, &mut rng)
}

/// Like [`local_attack`] but drawing noise from a caller-owned stream, so
/// larger experiments can interleave attacks deterministically.
pub fn local_attack_with_rng(
    net: &Network,
    x: &[f64],
    label: usize,
    cfg: &LocalAttackConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LocalAttackOutcome> {
    let (steps, step_size, noise_scale) = validate(cfg)?;
    if !vecmath::in_unit_box(x) {
        return Err(Error::InvalidConfig(
            "attack start point must lie in the unit box".into(),
        ));
    }
    if label >= net.num_classes() {
        return Err(Error::Shape(format!(
            "label {} out of range for {} classes",
            label,
            net.num_classes()
        )));
    }
    let region = Region::new(x, cfg.epsilon)?;
    let mut cur = x.to_vec();

    if cfg.method == LocalMethod::Pgd {
        // Draw first, scale second: a zero scale leaves the stream intact
        // and adds a signed zero, which every f64 in the box absorbs.
        let noise: Vec<f64> = (0..cur.len())
            .map(|_| rng.random_range(-cfg.epsilon..cfg.epsilon))
            .collect();
        for (c, n) in cur.iter_mut().zip(noise) {
            *c += noise_scale * n;
        }
    } else {
        for c in cur.iter_mut() {
            *c += 0.0;
        }
    }
    region.clip(&mut cur);

    for _ in 0..steps {
        let grad = net.ce_input_grad(&cur, label)?;
        for (c, g) in cur.iter_mut().zip(grad) {
            *c += step_size * vecmath::sign(g);
        }
        region.clip(&mut cur);
    }

    let loss = net.ce_loss(&cur, label)?;
    let flipped = net.predict_class(&cur)? != label;
    Ok(LocalAttackOutcome {
        x_adv: cur,
        loss,
        flipped,
    })
}
