//! Extreme-value-guided MCMC attack on example pairs.
//!
//! The chain state is a pair stored as a center and a half-difference
//! `delta`; the concrete inputs are `clamp(center ± delta)`, which keeps
//! both elements in the unit box and within `2‖delta‖∞ ≤ ε` of each
//! other no matter where the center wanders.
//!
//! Each round after a gradient-driven warmup:
//!
//! 1. draw a block of candidate pairs from a gradient-informed proposal —
//!    a Gaussian over the center, elongated along the loss gradient
//!    (`λ_m` along it, `λ_0` across), and coin flips over the sign of
//!    each `delta` coordinate biased toward the gradient sign by `p_b`;
//! 2. keep the highest-loss candidate of the block and append every
//!    block loss to the observed-loss history;
//! 3. refit a GEV density to the `top_k` largest losses seen so far —
//!    block maxima are extreme values, which is what makes the fitted
//!    density a sensible stand-in for the unknown target near its tail;
//! 4. run a Metropolis–Hastings accept/reject between the candidate and
//!    the current state, with the fitted density as the target and the
//!    asymmetric proposal corrected by its forward/reverse densities.
//!
//! Degenerate situations (no fit yet, density zero at both states) fall
//! back to greedy hill-climbing for that round and leave a warning in
//! the trace rather than silently stopping.

use crate::attack::global::{
    alternating_round, evaluate_pair, validate_start_pair, AttackTrace, StepParams,
};
use crate::error::{Error, Result};
use crate::gev::{fit_mle, Gev};
use crate::net::{Network, PairSide};
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Chain state: the pair `clamp(center ± delta)` in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredPair {
    pub center: Vec<f64>,
    /// Half-difference between the two pair elements. Proposal draws set
    /// every coordinate to `±ε/2`; converted warmup pairs may be smaller.
    pub delta: Vec<f64>,
}

impl CenteredPair {
    pub fn from_pair(x1: &[f64], x2: &[f64]) -> Self {
        let center = x1.iter().zip(x2).map(|(&a, &b)| 0.5 * (a + b)).collect();
        let delta = x1.iter().zip(x2).map(|(&a, &b)| 0.5 * (a - b)).collect();
        CenteredPair { center, delta }
    }

    /// The concrete input pair, clamped into the unit box.
    pub fn materialize(&self) -> (Vec<f64>, Vec<f64>) {
        let mut x1: Vec<f64> = self
            .center
            .iter()
            .zip(&self.delta)
            .map(|(&c, &d)| c + d)
            .collect();
        let mut x2: Vec<f64> = self
            .center
            .iter()
            .zip(&self.delta)
            .map(|(&c, &d)| c - d)
            .collect();
        vecmath::clamp_unit(&mut x1);
        vecmath::clamp_unit(&mut x2);
        (x1, x2)
    }
}

#[derive(Debug, Clone)]
pub struct McmcConfig {
    /// Maximum L∞ distance between the two pair elements.
    pub epsilon: f64,
    /// Total rounds, warmup included; one pair is recorded per round.
    pub rounds: usize,
    /// Leading rounds run as the alternating noisy-gradient attack to
    /// seed the loss history. May equal `rounds` (pure warmup) or be 0.
    pub warmup_rounds: usize,
    /// Candidates drawn per round; the block maximum becomes the proposal.
    pub block_size: usize,
    /// Number of largest observed losses the density is fitted to.
    pub top_k: usize,
    /// Proposal standard deviation along the gradient direction.
    pub lambda_m: f64,
    /// Proposal standard deviation across the gradient direction.
    pub lambda_0: f64,
    /// Probability that a `delta` sign follows the gradient sign.
    pub p_b: f64,
    pub rng_seed: u64,
    /// Gradient sub-steps per warmup half-round.
    pub sub_steps: usize,
    /// Warmup sub-step length.
    pub step_size: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        let epsilon = 0.1;
        McmcConfig {
            epsilon,
            rounds: 100,
            warmup_rounds: 10,
            block_size: 59,
            top_k: 50,
            lambda_m: 1.2 * epsilon,
            lambda_0: 0.3 * epsilon,
            p_b: 0.95,
            rng_seed: 0,
            sub_steps: 30,
            step_size: epsilon / 10.0,
        }
    }
}

fn validate(cfg: &McmcConfig) -> Result<()> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive and finite, got {}",
            cfg.epsilon
        )));
    }
    if cfg.warmup_rounds > cfg.rounds {
        return Err(Error::InvalidConfig(format!(
            "warmup_rounds {} exceeds total rounds {}",
            cfg.warmup_rounds, cfg.rounds
        )));
    }
    if cfg.block_size == 0 {
        return Err(Error::InvalidConfig("block_size must be at least 1".into()));
    }
    if cfg.top_k < 2 {
        return Err(Error::InvalidConfig(format!(
            "top_k must be at least 2, got {}",
            cfg.top_k
        )));
    }
    if !(cfg.lambda_0 > 0.0 && cfg.lambda_0.is_finite() && cfg.lambda_m.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "proposal scales must be positive and finite, got lambda_0 = {}, lambda_m = {}",
            cfg.lambda_0, cfg.lambda_m
        )));
    }
    if cfg.lambda_m < cfg.lambda_0 {
        return Err(Error::InvalidConfig(format!(
            "lambda_m {} must be at least lambda_0 {}",
            cfg.lambda_m, cfg.lambda_0
        )));
    }
    if !(0.5..=1.0).contains(&cfg.p_b) {
        return Err(Error::InvalidConfig(format!(
            "p_b must lie in [0.5, 1], got {}",
            cfg.p_b
        )));
    }
    if cfg.sub_steps == 0 {
        return Err(Error::InvalidConfig("sub_steps must be at least 1".into()));
    }
    if !(cfg.step_size > 0.0 && cfg.step_size.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step_size must be positive and finite, got {}",
            cfg.step_size
        )));
    }
    Ok(())
}

/// Unit-L2 gradient of the pair loss with respect to the center.
///
/// Only the first pair element carries gradient — the partner enters the
/// loss through its hard label, which is locally constant — so this is
/// the gradient at `clamp(center + delta)`. A vanishing gradient yields
/// the zero vector, signalling "no preferred direction".
pub fn normalized_gradient(net: &Network, pair: &CenteredPair) -> Result<Vec<f64>> {
    let (x1, x2) = pair.materialize();
    let grad = net.pair_loss_grad(&x1, &x2, PairSide::First)?;
    let norm = vecmath::l2_norm(&grad);
    if norm == 0.0 || !norm.is_finite() {
        return Ok(vec![0.0; grad.len()]);
    }
    Ok(grad.iter().map(|g| g / norm).collect())
}

/// Draws a proposal center: Gaussian around `center` with standard
/// deviation `lambda_m` along the unit gradient and `lambda_0` across it
/// (covariance `λ_0² I + (λ_m² − λ_0²) g gᵀ`).
///
/// Computed as `center + λ_0 z + (λ_m − λ_0)(g·z) g`, so `λ_m == λ_0`
/// contributes an exact zero and reproduces the isotropic draw bit for
/// bit, as does a zero gradient.
pub fn sample_center(
    center: &[f64],
    grad_unit: &[f64],
    lambda_0: f64,
    lambda_m: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let z: Vec<f64> = (0..center.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let gz = vecmath::dot(grad_unit, &z);
    center
        .iter()
        .zip(&z)
        .zip(grad_unit)
        .map(|((&c, &zi), &gi)| c + lambda_0 * zi + (lambda_m - lambda_0) * gz * gi)
        .collect()
}

/// Draws a proposal half-difference: every coordinate is `±ε/2`, with the
/// sign matching the gradient sign with probability `p_b`. Coordinates
/// with zero gradient flip a fair coin.
pub fn sample_difference(
    grad_unit: &[f64],
    epsilon: f64,
    p_b: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    grad_unit
        .iter()
        .map(|&gi| {
            let u: f64 = rng.random::<f64>();
            let sign = if gi != 0.0 {
                let gs = vecmath::sign(gi);
                if u < p_b {
                    gs
                } else {
                    -gs
                }
            } else if u < 0.5 {
                1.0
            } else {
                -1.0
            };
            sign * (epsilon / 2.0)
        })
        .collect()
}

/// Log-density of proposing `(to_center, to_delta)` from a state with
/// center `from_center` and unit gradient `from_grad_unit`.
///
/// The Gaussian part uses the closed form for the rank-one covariance:
/// `logdet = 2 ln λ_m + 2(D−1) ln λ_0` and a quadratic that splits the
/// displacement into its along-gradient and across-gradient energy. The
/// sign part scores only the signs of `to_delta`; a zero sign (possible
/// for converted warmup states, never for proposal draws) counts as a
/// fair coin.
pub fn proposal_logdensity(
    from_center: &[f64],
    from_grad_unit: &[f64],
    to_center: &[f64],
    to_delta: &[f64],
    lambda_0: f64,
    lambda_m: f64,
    p_b: f64,
) -> f64 {
    let dim = from_center.len() as f64;
    let d: Vec<f64> = to_center
        .iter()
        .zip(from_center)
        .map(|(&t, &f)| t - f)
        .collect();
    let norm2 = vecmath::dot(&d, &d);
    let g_zero = from_grad_unit.iter().all(|&v| v == 0.0);

    let (logdet, quad) = if g_zero {
        (2.0 * dim * lambda_0.ln(), norm2 / (lambda_0 * lambda_0))
    } else {
        let gd = vecmath::dot(from_grad_unit, &d);
        let across = (norm2 - gd * gd).max(0.0);
        (
            2.0 * lambda_m.ln() + 2.0 * (dim - 1.0) * lambda_0.ln(),
            across / (lambda_0 * lambda_0) + (gd * gd) / (lambda_m * lambda_m),
        )
    };
    let mut lp = -0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + logdet + quad);

    for (&gi, &di) in from_grad_unit.iter().zip(to_delta) {
        let ds = vecmath::sign(di);
        lp += if ds == 0.0 || gi == 0.0 {
            0.5f64.ln()
        } else if ds == vecmath::sign(gi) {
            p_b.ln()
        } else {
            (1.0 - p_b).ln()
        };
    }
    lp
}

/// Log of the Metropolis–Hastings ratio
/// `[target(cand) q(prev|cand)] / [target(prev) q(cand|prev)]`,
/// assembled in log space. Accept when `ln u <` this value. A NaN (both
/// targets at zero density) signals that the ratio is undefined.
pub fn mh_log_acceptance(
    log_target_cand: f64,
    log_target_prev: f64,
    log_q_prev_given_cand: f64,
    log_q_cand_given_prev: f64,
) -> f64 {
    (log_target_cand + log_q_prev_given_cand) - (log_target_prev + log_q_cand_given_prev)
}

fn top_k_losses(history: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = history.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.truncate(k);
    sorted
}

fn push_warning(warnings: &mut Vec<String>, msg: String) {
    if warnings.last() != Some(&msg) {
        warnings.push(msg);
    }
}

/// Runs the full attack, seeding an internal generator from
/// `cfg.rng_seed`. The trace records one pair per round (warmup rounds
/// included) plus the number of accepted proposals.
pub fn run_gevmcmc(
    net: &Network,
    x1_start: &[f64],
    x2_start: &[f64],
    cfg: &McmcConfig,
) -> Result<AttackTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    run_gevmcmc_with_rng(net, x1_start, x2_start, cfg, &mut rng)
}

/// Like [`run_gevmcmc`] but drawing from a caller-owned stream. The
/// warmup consumes exactly the draws of the equivalent alternating
/// noisy-gradient attack, so a run with `rounds == warmup_rounds`
/// reproduces that attack bit for bit under a shared seed.
pub fn run_gevmcmc_with_rng(
    net: &Network,
    x1_start: &[f64],
    x2_start: &[f64],
    cfg: &McmcConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AttackTrace> {
    validate(cfg)?;
    validate_start_pair(net, x1_start, x2_start, cfg.epsilon)?;

    let mut warnings = Vec::new();
    let mut pairs = Vec::with_capacity(cfg.rounds);
    let mut history: Vec<f64> = Vec::new();

    let mut x1 = x1_start.to_vec();
    let mut x2 = x2_start.to_vec();
    let warmup_steps = StepParams {
        sub_steps: cfg.sub_steps,
        step_size: cfg.step_size,
        noise_scale: 1.0,
    };
    for _ in 0..cfg.warmup_rounds {
        alternating_round(net, &mut x1, &mut x2, cfg.epsilon, &warmup_steps, rng)?;
        let p = evaluate_pair(net, &x1, &x2)?;
        history.push(p.loss);
        pairs.push(p);
    }

    let mut state = CenteredPair::from_pair(&x1, &x2);
    let (sx1, sx2) = state.materialize();
    let mut state_loss = net.pair_loss(&sx1, &sx2)?;
    let mut density: Option<Gev> = None;
    let mut accepted = 0usize;

    for _ in cfg.warmup_rounds..cfg.rounds {
        let g_prev = normalized_gradient(net, &state)?;

        // Block draw; keep the highest-loss candidate (first on ties).
        let mut best: Option<(CenteredPair, f64)> = None;
        for _ in 0..cfg.block_size {
            let center = sample_center(&state.center, &g_prev, cfg.lambda_0, cfg.lambda_m, rng);
            let delta = sample_difference(&g_prev, cfg.epsilon, cfg.p_b, rng);
            let cand = CenteredPair { center, delta };
            let (cx1, cx2) = cand.materialize();
            let loss = net.pair_loss(&cx1, &cx2)?;
            history.push(loss);
            if best.as_ref().is_none_or(|(_, bl)| loss > *bl) {
                best = Some((cand, loss));
            }
        }
        let (cand, cand_loss) = best.expect("block_size >= 1");
        let alpha: f64 = rng.random();

        match fit_mle(&top_k_losses(&history, cfg.top_k)) {
            Ok(fit) => density = Some(fit.params),
            Err(e) => push_warning(&mut warnings, format!("density fit skipped: {e}")),
        }

        let accept = match &density {
            None => {
                push_warning(
                    &mut warnings,
                    "no density fitted yet; using greedy acceptance".into(),
                );
                cand_loss > state_loss
            }
            Some(gev) => {
                let g_cand = normalized_gradient(net, &cand)?;
                let log_ratio = mh_log_acceptance(
                    gev.ln_pdf(cand_loss),
                    gev.ln_pdf(state_loss),
                    proposal_logdensity(
                        &cand.center,
                        &g_cand,
                        &state.center,
                        &state.delta,
                        cfg.lambda_0,
                        cfg.lambda_m,
                        cfg.p_b,
                    ),
                    proposal_logdensity(
                        &state.center,
                        &g_prev,
                        &cand.center,
                        &cand.delta,
                        cfg.lambda_0,
                        cfg.lambda_m,
                        cfg.p_b,
                    ),
                );
                if log_ratio.is_nan() {
                    push_warning(
                        &mut warnings,
                        "density vanished at both states; using greedy acceptance".into(),
                    );
                    cand_loss > state_loss
                } else {
                    alpha.ln() < log_ratio
                }
            }
        };

        if accept {
            state = cand;
            state_loss = cand_loss;
            accepted += 1;
        }
        let (rx1, rx2) = state.materialize();
        pairs.push(evaluate_pair(net, &rx1, &rx2)?);
    }

    Ok(AttackTrace {
        pairs,
        warnings,
        accepted: Some(accepted),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::global::{g_attack, GlobalAltConfig, GlobalAltMethod};
    use crate::net::{Activation, DenseLayer};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn linear_net(weights: Vec<f64>, in_dim: usize, out_dim: usize) -> Network {
        let names = (0..out_dim).map(|i| format!("c{i}")).collect();
        let layer = DenseLayer::new(
            in_dim,
            out_dim,
            weights,
            vec![0.0; out_dim],
            Activation::Identity,
        )
        .unwrap();
        Network::new(in_dim, names, vec![layer]).unwrap()
    }

    #[test]
    fn centered_pair_round_trips_geometry() {
        let p = CenteredPair::from_pair(&[0.5, 0.8], &[0.4, 0.7]);
        assert_close(p.center[0], 0.45, 1e-15);
        assert_close(p.delta[0], 0.05, 1e-15);
        let (x1, x2) = p.materialize();
        assert_close(x1[0], 0.5, 1e-15);
        assert_close(x2[1], 0.7, 1e-15);
    }

    #[test]
    fn materialize_clamps_into_the_box() {
        let p = CenteredPair {
            center: vec![1.3, -0.2],
            delta: vec![0.05, -0.05],
        };
        let (x1, x2) = p.materialize();
        assert!(crate::vecmath::in_unit_box(&x1));
        assert!(crate::vecmath::in_unit_box(&x2));
        assert!(crate::vecmath::linf_dist(&x1, &x2) <= 0.1 + 1e-12);
    }

    #[test]
    fn normalized_gradient_has_unit_norm_or_is_zero() {
        let net = Network::random(3, &[6], vec!["a".into(), "b".into()], 50).unwrap();
        let pair = CenteredPair::from_pair(&[0.4, 0.5, 0.6], &[0.45, 0.45, 0.55]);
        let g = normalized_gradient(&net, &pair).unwrap();
        assert_close(crate::vecmath::l2_norm(&g), 1.0, 1e-12);

        let zero = linear_net(vec![0.0; 6], 3, 2);
        let g0 = normalized_gradient(&zero, &pair).unwrap();
        assert_eq!(g0, vec![0.0; 3]);
    }

    #[test]
    fn center_gradient_matches_finite_differences_of_the_composed_loss() {
        // The loss as a function of the center moves only the first
        // element's term; the partner's hard label stays fixed. Checked
        // against central differences at a comfortably interior pair.
        let net = linear_net(vec![1.5, -0.7, -0.9, 1.1], 2, 2);
        let pair = CenteredPair {
            center: vec![0.55, 0.45],
            delta: vec![0.04, -0.04],
        };
        let (x1, x2) = pair.materialize();
        let analytic = net.pair_loss_grad(&x1, &x2, PairSide::First).unwrap();
        let h = 1e-5;
        for (i, &a) in analytic.iter().enumerate() {
            let mut up = pair.clone();
            up.center[i] += h;
            let mut dn = pair.clone();
            dn.center[i] -= h;
            let (u1, u2) = up.materialize();
            let (d1, d2) = dn.materialize();
            let fd =
                (net.pair_loss(&u1, &u2).unwrap() - net.pair_loss(&d1, &d2).unwrap()) / (2.0 * h);
            assert_close(a, fd, 1e-6);
        }
    }

    #[test]
    fn equal_scales_collapse_to_an_isotropic_draw() {
        let center = [0.3, 0.6, 0.2];
        let g = [0.6, -0.8, 0.0];
        let mut r1 = ChaCha8Rng::seed_from_u64(31);
        let a = sample_center(&center, &g, 0.05, 0.05, &mut r1);
        let mut r2 = ChaCha8Rng::seed_from_u64(31);
        let z: Vec<f64> = (0..3).map(|_| r2.sample(StandardNormal)).collect();
        for i in 0..3 {
            let iso = center[i] + 0.05 * z[i];
            assert_eq!(a[i].to_bits(), iso.to_bits());
        }
    }

    #[test]
    fn zero_gradient_center_draw_is_isotropic() {
        let center = [0.5, 0.5];
        let mut r1 = ChaCha8Rng::seed_from_u64(8);
        let a = sample_center(&center, &[0.0, 0.0], 0.03, 0.12, &mut r1);
        let mut r2 = ChaCha8Rng::seed_from_u64(8);
        let b = sample_center(&center, &[0.0, 0.0], 0.03, 0.03, &mut r2);
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn difference_draws_have_exact_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = [0.8, -0.6, 0.0];
        let d = sample_difference(&g, 0.1, 0.95, &mut rng);
        for v in &d {
            assert_eq!(v.abs().to_bits(), 0.05f64.to_bits());
        }
    }

    #[test]
    fn difference_signs_follow_the_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = [1.0, -1.0];
        let (mut match0, mut pos_when_zero) = (0usize, 0usize);
        let n = 10_000;
        for _ in 0..n {
            let d = sample_difference(&g, 0.1, 0.95, &mut rng);
            if d[0] > 0.0 {
                match0 += 1;
            }
            let dz = sample_difference(&[0.0, 0.0], 0.1, 0.95, &mut rng);
            if dz[0] > 0.0 {
                pos_when_zero += 1;
            }
        }
        let f = match0 as f64 / n as f64;
        assert!((0.93..=0.97).contains(&f), "biased frequency {f}");
        let fz = pos_when_zero as f64 / n as f64;
        assert!((0.47..=0.53).contains(&fz), "fair-coin frequency {fz}");
    }

    #[test]
    fn proposal_density_closed_forms() {
        let ln2pi = (2.0 * std::f64::consts::PI).ln();
        // Zero gradient, zero displacement: isotropic mode value times
        // two fair coins.
        let lp = proposal_logdensity(
            &[0.4, 0.6],
            &[0.0, 0.0],
            &[0.4, 0.6],
            &[0.05, -0.05],
            0.03,
            0.12,
            0.95,
        );
        let expect = -0.5 * (2.0 * ln2pi + 4.0 * 0.03f64.ln()) + 2.0 * 0.5f64.ln();
        assert_close(lp, expect, 1e-12);

        // Displacement along the gradient: variance lambda_m^2 on that
        // axis; delta sign agreeing costs ln p_b, the zero-gradient
        // coordinate stays a fair coin.
        let a = 0.07;
        let lp = proposal_logdensity(
            &[0.4, 0.6],
            &[1.0, 0.0],
            &[0.4 + a, 0.6],
            &[0.05, 0.05],
            0.03,
            0.12,
            0.95,
        );
        let expect = -0.5 * (2.0 * ln2pi + 2.0 * 0.12f64.ln() + 2.0 * 0.03f64.ln())
            - 0.5 * a * a / (0.12 * 0.12)
            + 0.95f64.ln()
            + 0.5f64.ln();
        assert_close(lp, expect, 1e-12);

        // Displacement across the gradient: variance lambda_0^2, and a
        // disagreeing sign costs ln(1 - p_b).
        let b = 0.02;
        let lp = proposal_logdensity(
            &[0.4, 0.6],
            &[1.0, 0.0],
            &[0.4, 0.6 + b],
            &[-0.05, 0.05],
            0.03,
            0.12,
            0.95,
        );
        let expect = -0.5 * (2.0 * ln2pi + 2.0 * 0.12f64.ln() + 2.0 * 0.03f64.ln())
            - 0.5 * b * b / (0.03 * 0.03)
            + 0.05f64.ln()
            + 0.5f64.ln();
        assert_close(lp, expect, 1e-12);
    }

    #[test]
    fn one_dimensional_density_matches_a_plain_normal() {
        // With D = 1 and a unit gradient the covariance is just
        // lambda_m^2, so the density must equal the scalar normal.
        let (l0, lm, pb) = (0.02, 0.09, 0.8);
        let (from, to) = (0.3, 0.41);
        let lp = proposal_logdensity(&[from], &[-1.0], &[to], &[-0.05], l0, lm, pb);
        let d: f64 = to - from;
        let normal = -0.5 * (2.0 * std::f64::consts::PI * lm * lm).ln() - d * d / (2.0 * lm * lm);
        assert_close(lp, normal + pb.ln(), 1e-12);
    }

    #[test]
    fn acceptance_ratio_is_plain_log_arithmetic() {
        assert_close(mh_log_acceptance(1.0, 0.5, 2.0, 1.5), 1.0, 1e-15);
        assert_eq!(
            mh_log_acceptance(f64::NEG_INFINITY, 0.0, 0.0, 0.0),
            f64::NEG_INFINITY
        );
        assert_eq!(
            mh_log_acceptance(0.0, f64::NEG_INFINITY, 0.0, 0.0),
            f64::INFINITY
        );
        assert!(mh_log_acceptance(f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0, 0.0).is_nan());
        // Symmetric proposal and constant target: the ratio is exactly 0.
        assert_eq!(mh_log_acceptance(3.0, 3.0, -1.25, -1.25), 0.0);
    }

    #[test]
    fn top_k_selects_the_largest() {
        assert_eq!(
            top_k_losses(&[3.0, 1.0, 4.0, 1.0, 5.0], 3),
            vec![5.0, 4.0, 3.0]
        );
        assert_eq!(top_k_losses(&[2.0, 7.0], 10), vec![7.0, 2.0]);
    }

    #[test]
    fn pure_warmup_reproduces_the_gradient_attack_bit_for_bit() {
        let net = Network::random(2, &[12], vec!["a".into(), "b".into(), "c".into()], 77).unwrap();
        let (x1, x2) = ([0.42, 0.58], [0.47, 0.53]);
        let mcfg = McmcConfig {
            epsilon: 0.1,
            rounds: 7,
            warmup_rounds: 7,
            sub_steps: 10,
            step_size: 0.01,
            rng_seed: 5,
            ..McmcConfig::default()
        };
        let gcfg = GlobalAltConfig {
            method: GlobalAltMethod::GPgd,
            epsilon: 0.1,
            rounds: 7,
            sub_steps: 10,
            step_size: 0.01,
            rng_seed: 5,
            noise_scale: 1.0,
        };
        let a = run_gevmcmc(&net, &x1, &x2, &mcfg).unwrap();
        let b = g_attack(&net, &x1, &x2, &gcfg).unwrap();
        assert_eq!(a.pairs.len(), b.pairs.len());
        for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
            let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&pa.x1), bits(&pb.x1));
            assert_eq!(bits(&pa.x2), bits(&pb.x2));
            assert_eq!(pa.loss.to_bits(), pb.loss.to_bits());
        }
        assert_eq!(a.accepted, Some(0));
    }

    #[test]
    fn full_run_respects_pair_constraints_and_is_deterministic() {
        let net = Network::random(2, &[10], vec!["a".into(), "b".into()], 13).unwrap();
        let cfg = McmcConfig {
            epsilon: 0.1,
            rounds: 12,
            warmup_rounds: 3,
            block_size: 7,
            top_k: 10,
            rng_seed: 99,
            ..McmcConfig::default()
        };
        let (x1, x2) = ([0.4, 0.6], [0.44, 0.57]);
        let trace = run_gevmcmc(&net, &x1, &x2, &cfg).unwrap();
        assert_eq!(trace.pairs.len(), 12);
        for p in &trace.pairs {
            assert!(crate::vecmath::linf_dist(&p.x1, &p.x2) <= 0.1 + 1e-12);
            assert!(crate::vecmath::in_unit_box(&p.x1));
            assert!(crate::vecmath::in_unit_box(&p.x2));
            assert!(p.loss.is_finite());
        }
        let accepted = trace.accepted.unwrap();
        assert!(accepted <= 9);

        let again = run_gevmcmc(&net, &x1, &x2, &cfg).unwrap();
        for (pa, pb) in trace.pairs.iter().zip(&again.pairs) {
            assert_eq!(pa.loss.to_bits(), pb.loss.to_bits());
        }
        assert_eq!(trace.accepted, again.accepted);
    }

    #[test]
    fn config_validation_catches_bad_parameters() {
        let net = Network::random(2, &[4], vec!["a".into(), "b".into()], 0).unwrap();
        let (x1, x2) = ([0.5, 0.5], [0.52, 0.48]);
        let run = |cfg: McmcConfig| run_gevmcmc(&net, &x1, &x2, &cfg);
        assert!(run(McmcConfig {
            warmup_rounds: 20,
            rounds: 10,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            block_size: 0,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            top_k: 1,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            lambda_0: 0.2,
            lambda_m: 0.1,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            lambda_0: 0.0,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            p_b: 0.4,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            p_b: 1.1,
            ..McmcConfig::default()
        })
        .is_err());
        assert!(run(McmcConfig {
            step_size: 0.0,
            ..McmcConfig::default()
        })
        .is_err());
        // p_b = 0.5 (fair coin) and lambda_m = lambda_0 (isotropic) are
        // legitimate degenerate settings.
        assert!(run(McmcConfig {
            p_b: 0.5,
            lambda_m: 0.03,
            lambda_0: 0.03,
            rounds: 2,
            warmup_rounds: 1,
            block_size: 2,
            ..McmcConfig::default()
        })
        .is_ok());
    }
}
