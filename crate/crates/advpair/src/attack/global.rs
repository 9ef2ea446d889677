//! Alternating global attacks: driving a *pair* of inputs apart in
//! prediction while keeping them within ε of each other.
//!
//! Each round attacks the first element inside the feasible region
//! centered on the second, then attacks the second inside the region
//! centered on the freshly updated first. Clipping against the partner's
//! region is what maintains the pair constraint `‖x1 − x2‖∞ ≤ ε` at every
//! step; the unit box is folded into the same projection.
//!
//! The three variants share one code path and differ only in effective
//! parameters, so the degenerate choices collapse exactly: G-PGD with
//! zero noise runs the same arithmetic as G-IFGSM, and G-IFGSM with a
//! single sub-step of size ε runs the same arithmetic as G-FGSM.

use crate::attack::local::Region;
use crate::error::{Error, Result};
use crate::net::Network;
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalAltMethod {
    GFgsm,
    GIfgsm,
    GPgd,
}

#[derive(Debug, Clone)]
pub struct GlobalAltConfig {
    pub method: GlobalAltMethod,
    /// Maximum L∞ distance between the two pair elements.
    pub epsilon: f64,
    /// Alternating rounds; one candidate pair is recorded per round.
    pub rounds: usize,
    /// Gradient sub-steps per half-round. Ignored for G-FGSM (always 1).
    pub sub_steps: usize,
    /// Sub-step length. Ignored for G-FGSM (always `epsilon`).
    pub step_size: f64,
    pub rng_seed: u64,
    /// Multiplier on G-PGD's per-round uniform noise. 1 is the standard
    /// attack; 0 reduces G-PGD to G-IFGSM exactly. No effect otherwise.
    pub noise_scale: f64,
}

impl Default for GlobalAltConfig {
    fn default() -> Self {
        GlobalAltConfig {
            method: GlobalAltMethod::GPgd,
            epsilon: 0.1,
            rounds: 100,
            sub_steps: 30,
            step_size: 0.01,
            rng_seed: 0,
            noise_scale: 1.0,
        }
    }
}

/// A candidate pair produced by one attack round.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExamplePair {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// Cross-entropy of the prediction at `x1` against the predicted
    /// class at `x2`.
    pub loss: f64,
    /// True when the two elements are classified differently — the pair
    /// is then a global adversarial example.
    pub disagree: bool,
}

/// Full history of an attack run: one pair per round, in round order.
#[derive(Debug, Clone)]
pub struct AttackTrace {
    pub pairs: Vec<ExamplePair>,
    /// Non-fatal anomalies (degenerate density fits and the like).
    pub warnings: Vec<String>,
    /// Accepted proposals, for the Metropolis-based attack; `None` for
    /// the purely gradient-driven ones.
    pub accepted: Option<usize>,
}

impl AttackTrace {
    /// The highest-loss pair seen, earliest round on ties.
    pub fn best(&self) -> Option<&ExamplePair> {
        self.pairs
            .iter()
            .reduce(|best, p| if p.loss > best.loss { p } else { best })
    }

    /// Maximum recorded loss; negative infinity for an empty trace.
    pub fn max_loss(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.loss)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when any recorded pair is classified inconsistently.
    pub fn succeeded(&self) -> bool {
        self.pairs.iter().any(|p| p.disagree)
    }
}

/// Per-half-round step schedule after method-specific overrides.
pub(crate) struct StepParams {
    pub sub_steps: usize,
    pub step_size: f64,
    pub noise_scale: f64,
}

fn effective_params(cfg: &GlobalAltConfig) -> Result<StepParams> {
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
    let (sub_steps, step_size, noise_scale) = match cfg.method {
        GlobalAltMethod::GFgsm => (1, cfg.epsilon, 0.0),
        GlobalAltMethod::GIfgsm => (cfg.sub_steps, cfg.step_size, 0.0),
        GlobalAltMethod::GPgd => (cfg.sub_steps, cfg.step_size, cfg.noise_scale),
    };
    if sub_steps == 0 {
        return Err(Error::InvalidConfig("sub_steps must be at least 1".into()));
    }
    if !(step_size > 0.0 && step_size.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step_size must be positive and finite, got {step_size}"
        )));
    }
    Ok(StepParams {
        sub_steps,
        step_size,
        noise_scale,
    })
}

pub(crate) fn validate_start_pair(
    net: &Network,
    x1: &[f64],
    x2: &[f64],
    epsilon: f64,
) -> Result<()> {
    if x1.len() != net.input_dim() || x2.len() != net.input_dim() {
        return Err(Error::Shape(format!(
            "start pair dimensions ({}, {}) do not match input_dim {}",
            x1.len(),
            x2.len(),
            net.input_dim()
        )));
    }
    if !vecmath::in_unit_box(x1) || !vecmath::in_unit_box(x2) {
        return Err(Error::InvalidConfig(
            "start pair must lie in the unit box".into(),
        ));
    }
    let dist = vecmath::linf_dist(x1, x2);
    if dist > epsilon {
        return Err(Error::InvalidConfig(format!(
            "start pair is {dist} apart in L∞, beyond epsilon {epsilon}"
        )));
    }
    Ok(())
}

/// One gradient ascent of `moving` against the fixed `partner`: optional
/// uniform noise, then `sub_steps` signed-gradient steps, every iterate
/// projected into the partner's ε-region intersected with the unit box.
///
/// The noise is always drawn (and only then scaled), so configurations
/// that differ only in `noise_scale` see the same random stream.
pub(crate) fn attack_half(
    net: &Network,
    moving: &mut [f64],
    partner: &[f64],
    epsilon: f64,
    steps: &StepParams,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let region = Region::new(partner, epsilon)?;
    let noise: Vec<f64> = (0..moving.len())
        .map(|_| rng.random_range(-epsilon..epsilon))
        .collect();
    for (m, n) in moving.iter_mut().zip(noise) {
        *m += steps.noise_scale * n;
    }
    region.clip(moving);

    let label = net.predict_class(partner)?;
    for _ in 0..steps.sub_steps {
        let grad = net.ce_input_grad(moving, label)?;
        for (m, g) in moving.iter_mut().zip(grad) {
            *m += steps.step_size * vecmath::sign(g);
        }
        region.clip(moving);
    }
    Ok(())
}

/// One full alternating round: x1 against x2, then x2 against the new x1.
pub(crate) fn alternating_round(
    net: &Network,
    x1: &mut [f64],
    x2: &mut [f64],
    epsilon: f64,
    steps: &StepParams,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    attack_half(net, x1, x2, epsilon, steps, rng)?;
    attack_half(net, x2, x1, epsilon, steps, rng)?;
    Ok(())
}

pub(crate) fn evaluate_pair(net: &Network, x1: &[f64], x2: &[f64]) -> Result<ExamplePair> {
    let c1 = net.predict_class(x1)?;
    let c2 = net.predict_class(x2)?;
    let loss = net.ce_loss(x1, c2)?;
    Ok(ExamplePair {
        x1: x1.to_vec(),
        x2: x2.to_vec(),
        loss,
        disagree: c1 != c2,
    })
}

/// Runs the configured alternating attack from a start pair, seeding an
/// internal generator from `cfg.rng_seed`.
pub fn g_attack(
    net: &Network,
    x1_start: &[f64],
    x2_start: &[f64],
    cfg: &GlobalAltConfig,
) -> Result<AttackTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    g_attack_with_rng(net, x1_start, x2_start, cfg, &mut rng)
}

/// Like [`g_attack`] but drawing from a caller-owned stream.
pub fn g_attack_with_rng(
    net: &Network,
    x1_start: &[f64],
    x2_start: &[f64],
    cfg: &GlobalAltConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AttackTrace> {
    let steps = effective_params(cfg)?;
    validate_start_pair(net, x1_start, x2_start, cfg.epsilon)?;

    let mut x1 = x1_start.to_vec();
    let mut x2 = x2_start.to_vec();
    let mut pairs = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        alternating_round(net, &mut x1, &mut x2, cfg.epsilon, &steps, rng)?;
        pairs.push(evaluate_pair(net, &x1, &x2)?);
    }
    Ok(AttackTrace {
        pairs,
        warnings: Vec::new(),
        accepted: None,
    })
}
