//! Experiment harness: many attacks from many starts, aggregated.
//!
//! A campaign fixes one method and one way of choosing start points, runs
//! an independent seeded attack from each start in parallel, and collects
//! rates, loss statistics, and a per-round loss series into a report that
//! can be exported and compared across methods.
//!
//! Determinism contract: starts are selected by a master generator seeded
//! with `base_seed`; the attack from start `i` runs on its own generator
//! seeded with `base_seed + 1 + i`. Reports from equal inputs are
//! identical, byte for byte, once exported.

pub mod report;

pub use report::{read_report, write_report, write_round_series};

use crate::attack::global::{g_attack_with_rng, GlobalAltConfig, GlobalAltMethod};
use crate::attack::local::{local_attack_with_rng, LocalAttackConfig, LocalMethod, Region};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mcmc::{run_gevmcmc_with_rng, McmcConfig};
use crate::net::Network;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Every attack the harness can drive: three single-input baselines,
/// three alternating pair attacks, and the Metropolis pair attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    #[serde(rename = "l-fgsm")]
    LFgsm,
    #[serde(rename = "l-ifgsm")]
    LIfgsm,
    #[serde(rename = "l-pgd")]
    LPgd,
    #[serde(rename = "g-fgsm")]
    GFgsm,
    #[serde(rename = "g-ifgsm")]
    GIfgsm,
    #[serde(rename = "g-pgd")]
    GPgd,
    #[serde(rename = "gevmcmc")]
    Gevmcmc,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::LFgsm,
        Method::LIfgsm,
        Method::LPgd,
        Method::GFgsm,
        Method::GIfgsm,
        Method::GPgd,
        Method::Gevmcmc,
    ];

    /// Single-input baselines, as opposed to pair attacks.
    pub fn is_local(self) -> bool {
        matches!(self, Method::LFgsm | Method::LIfgsm | Method::LPgd)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::LFgsm => "l-fgsm",
            Method::LIfgsm => "l-ifgsm",
            Method::LPgd => "l-pgd",
            Method::GFgsm => "g-fgsm",
            Method::GIfgsm => "g-ifgsm",
            Method::GPgd => "g-pgd",
            Method::Gevmcmc => "gevmcmc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown method {s:?}; expected one of {}",
                    Method::ALL.map(Method::name).join(", ")
                ))
            })
    }
}

/// Where the attack start points come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StartMode {
    /// Dataset rows sampled without replacement; their labels are the
    /// dataset labels.
    #[serde(rename = "dataset")]
    Dataset,
    /// Uniform random points in the unit box, labeled with the model's
    /// last class (the junk class, for models trained with one).
    #[serde(rename = "random")]
    Random,
}

impl StartMode {
    pub fn name(self) -> &'static str {
        match self {
            StartMode::Dataset => "dataset",
            StartMode::Random => "random",
        }
    }
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StartMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" => Ok(StartMode::Dataset),
            "random" => Ok(StartMode::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown start mode {other:?}; expected dataset or random"
            ))),
        }
    }
}

/// Everything that defines one multi-start experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Campaign {
    pub method: Method,
    pub start_mode: StartMode,
    pub n_starts: usize,
    /// Attack rounds per start (pair methods only).
    pub rounds: usize,
    /// Gradient steps: per half-round for pair methods, total for local.
    pub sub_steps: usize,
    pub step_size: f64,
    pub epsilon: f64,
    pub base_seed: u64,
    /// Leading gradient-driven rounds of the Metropolis attack.
    pub warmup_rounds: usize,
    /// Candidates per Metropolis round.
    pub block_size: usize,
    /// Losses the extreme-value density is fitted to.
    pub top_k: usize,
    /// Proposal spread along the gradient.
    pub lambda_m: f64,
    /// Proposal spread across the gradient.
    pub lambda_0: f64,
    /// Gradient-sign bias of the proposal differences.
    pub p_b: f64,
}

impl Default for Campaign {
    fn default() -> Self {
        let epsilon = 0.1;
        Campaign {
            method: Method::GPgd,
            start_mode: StartMode::Dataset,
            n_starts: 100,
            rounds: 100,
            sub_steps: 30,
            step_size: epsilon / 10.0,
            epsilon,
            base_seed: 0,
            warmup_rounds: 10,
            block_size: 59,
            top_k: 50,
            lambda_m: 1.2 * epsilon,
            lambda_0: 0.3 * epsilon,
            p_b: 0.95,
        }
    }
}

/// Outcome of the attack from one start point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StartOutcome {
    /// Index into the selected starts (stable across methods under the
    /// same campaign settings, which is what paired comparisons rely on).
    pub start_index: usize,
    /// Pair methods: some recorded pair was classified inconsistently.
    /// Local methods: the prediction flipped away from the start label.
    pub success: bool,
    pub max_loss: f64,
    pub final_loss: f64,
    /// Earliest 1-based round achieving success.
    pub first_success_round: Option<usize>,
    /// Accepted proposals (Metropolis attack only).
    pub accepted: Option<usize>,
}

/// Loss statistics across starts for one round.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RoundStat {
    pub round: usize,
    /// Largest loss any start recorded this round.
    pub max_loss: f64,
    /// Mean loss across starts this round.
    pub avg_loss: f64,
    /// Running maximum of `max_loss` up to this round.
    pub cum_max_loss: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CampaignReport {
    pub campaign: Campaign,
    /// Hash of the model's architecture and parameters; comparisons
    /// refuse to pair reports from different models.
    pub model_fingerprint: String,
    /// Hash of the dataset rows for dataset starts; absent otherwise.
    pub dataset_fingerprint: Option<String>,
    /// Starts selected.
    pub starts_attempted: usize,
    /// Starts actually attacked. Local methods skip starts the model
    /// already misclassifies; pair methods attack every start.
    pub starts_attacked: usize,
    /// Fraction of attacked starts with `success`.
    pub attack_rate: f64,
    /// Largest loss over every generated pair.
    pub max_loss: f64,
    /// Mean loss over every generated pair: all rounds of all starts for
    /// pair methods, one adversarial point per start for local methods.
    pub avg_loss: f64,
    /// Mean over attacked starts of the per-start maximum loss.
    pub avg_max_loss: f64,
    /// Mean over attacked starts of the final-round loss.
    pub avg_final_loss: f64,
    pub per_start: Vec<StartOutcome>,
    /// Per-round aggregates; empty for local methods.
    pub rounds: Vec<RoundStat>,
    pub warnings: Vec<String>,
    /// Wall-clock duration of the run. Not exported: reports from
    /// identical inputs must serialize to identical bytes.
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

fn fnv1a<I: IntoIterator<Item = u64>>(words: I) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Stable hash of architecture and parameters.
pub fn model_fingerprint(net: &Network) -> String {
    let mut words = vec![net.input_dim() as u64, net.num_classes() as u64];
    for layer in net.layers() {
        words.push(layer.in_dim() as u64);
        words.push(layer.out_dim() as u64);
        words.push(match layer.activation() {
            crate::net::Activation::Relu => 1,
            crate::net::Activation::Identity => 2,
        });
        words.extend(layer.weights().iter().map(|v| v.to_bits()));
        words.extend(layer.bias().iter().map(|v| v.to_bits()));
    }
    format!("{:016x}", fnv1a(words))
}

fn dataset_fingerprint(data: &Dataset) -> String {
    let mut words = vec![data.len() as u64, data.dim() as u64];
    for (x, &l) in data.inputs.iter().zip(&data.labels) {
        words.extend(x.iter().map(|v| v.to_bits()));
        words.push(l as u64);
    }
    format!("{:016x}", fnv1a(words))
}

struct StartSpec {
    index: usize,
    x: Vec<f64>,
    label: usize,
}

fn select_starts(net: &Network, data: Option<&Dataset>, c: &Campaign) -> Result<Vec<StartSpec>> {
    let mut master = ChaCha8Rng::seed_from_u64(c.base_seed);
    match c.start_mode {
        StartMode::Dataset => {
            let data = data
                .ok_or_else(|| Error::InvalidConfig("dataset start mode needs a dataset".into()))?;
            if data.dim() != net.input_dim() {
                return Err(Error::Shape(format!(
                    "dataset dimension {} does not match input_dim {}",
                    data.dim(),
                    net.input_dim()
                )));
            }
            if c.n_starts > data.len() {
                return Err(Error::InvalidConfig(format!(
                    "cannot draw {} starts from {} rows without replacement",
                    c.n_starts,
                    data.len()
                )));
            }
            let picks = rand::seq::index::sample(&mut master, data.len(), c.n_starts);
            Ok(picks
                .into_iter()
                .enumerate()
                .map(|(index, row)| StartSpec {
                    index,
                    x: data.inputs[row].clone(),
                    label: data.labels[row],
                })
                .collect())
        }
        StartMode::Random => {
            let junk = net.num_classes() - 1;
            Ok((0..c.n_starts)
                .map(|index| StartSpec {
                    index,
                    x: (0..net.input_dim())
                        .map(|_| master.random::<f64>())
                        .collect(),
                    label: junk,
                })
                .collect())
        }
    }
}

/// The second element of a start pair: the start plus uniform noise,
/// clipped into the start's ε-region.
fn partner(x1: &[f64], epsilon: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut x2: Vec<f64> = x1
        .iter()
        .map(|&v| v + rng.random_range(-epsilon..epsilon))
        .collect();
    Region::new(x1, epsilon)?.clip(&mut x2);
    Ok(x2)
}

struct PerStart {
    outcome: StartOutcome,
    round_losses: Vec<f64>,
    warnings: Vec<String>,
}

fn attack_one(net: &Network, c: &Campaign, s: &StartSpec) -> Result<Option<PerStart>> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.base_seed.wrapping_add(1 + s.index as u64));
    match c.method {
        Method::LFgsm | Method::LIfgsm | Method::LPgd => {
            if net.predict_class(&s.x)? != s.label {
                return Ok(None);
            }
            let cfg = LocalAttackConfig {
                method: match c.method {
                    Method::LFgsm => LocalMethod::Fgsm,
                    Method::LIfgsm => LocalMethod::Ifgsm,
                    _ => LocalMethod::Pgd,
                },
                epsilon: c.epsilon,
                steps: c.sub_steps,
                step_size: c.step_size,
                rng_seed: 0,
                noise_scale: 1.0,
            };
            let out = local_attack_with_rng(net, &s.x, s.label, &cfg, &mut rng)?;
            Ok(Some(PerStart {
                outcome: StartOutcome {
                    start_index: s.index,
                    success: out.flipped,
                    max_loss: out.loss,
                    final_loss: out.loss,
                    first_success_round: out.flipped.then_some(1),
                    accepted: None,
                },
                round_losses: Vec::new(),
                warnings: Vec::new(),
            }))
        }
        Method::GFgsm | Method::GIfgsm | Method::GPgd => {
            let x2 = partner(&s.x, c.epsilon, &mut rng)?;
            let cfg = GlobalAltConfig {
                method: match c.method {
                    Method::GFgsm => GlobalAltMethod::GFgsm,
                    Method::GIfgsm => GlobalAltMethod::GIfgsm,
                    _ => GlobalAltMethod::GPgd,
                },
                epsilon: c.epsilon,
                rounds: c.rounds,
                sub_steps: c.sub_steps,
                step_size: c.step_size,
                rng_seed: 0,
                noise_scale: 1.0,
            };
            let trace = g_attack_with_rng(net, &s.x, &x2, &cfg, &mut rng)?;
            Ok(Some(trace_to_per_start(s.index, &trace)))
        }
        Method::Gevmcmc => {
            let x2 = partner(&s.x, c.epsilon, &mut rng)?;
            let cfg = McmcConfig {
                epsilon: c.epsilon,
                rounds: c.rounds,
                warmup_rounds: c.warmup_rounds,
                block_size: c.block_size,
                top_k: c.top_k,
                lambda_m: c.lambda_m,
                lambda_0: c.lambda_0,
                p_b: c.p_b,
                rng_seed: 0,
                sub_steps: c.sub_steps,
                step_size: c.step_size,
            };
            let trace = run_gevmcmc_with_rng(net, &s.x, &x2, &cfg, &mut rng)?;
            Ok(Some(trace_to_per_start(s.index, &trace)))
        }
    }
}

fn trace_to_per_start(index: usize, trace: &crate::attack::AttackTrace) -> PerStart {
    let round_losses: Vec<f64> = trace.pairs.iter().map(|p| p.loss).collect();
    let max_loss = trace.max_loss();
    let final_loss = round_losses.last().copied().unwrap_or(f64::NEG_INFINITY);
    let first_success_round = trace.pairs.iter().position(|p| p.disagree).map(|i| i + 1);
    PerStart {
        outcome: StartOutcome {
            start_index: index,
            success: first_success_round.is_some(),
            max_loss,
            final_loss,
            first_success_round,
            accepted: trace.accepted,
        },
        round_losses,
        warnings: trace.warnings.clone(),
    }
}

fn validate_campaign(c: &Campaign) -> Result<()> {
    if c.n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    if !c.method.is_local() && c.rounds == 0 {
        return Err(Error::InvalidConfig(
            "pair methods need at least 1 round".into(),
        ));
    }
    Ok(())
}

/// Runs the campaign: selects starts, attacks each on its own seeded
/// generator (in parallel; results are order-stable), and aggregates.
pub fn run_campaign(net: &Network, data: Option<&Dataset>, c: &Campaign) -> Result<CampaignReport> {
    validate_campaign(c)?;
    let t0 = Instant::now();
    let starts = select_starts(net, data, c)?;

    let results: Vec<Option<PerStart>> = starts
        .par_iter()
        .map(|s| attack_one(net, c, s))
        .collect::<Result<_>>()?;
    let attacked: Vec<PerStart> = results.into_iter().flatten().collect();

    let n_attacked = attacked.len();
    let successes = attacked.iter().filter(|p| p.outcome.success).count();
    let mean = |f: &dyn Fn(&PerStart) -> f64| -> f64 {
        if n_attacked == 0 {
            0.0
        } else {
            attacked.iter().map(f).sum::<f64>() / n_attacked as f64
        }
    };

    let mut rounds = Vec::new();
    if !c.method.is_local() && n_attacked > 0 {
        let mut cum = f64::NEG_INFINITY;
        for r in 0..c.rounds {
            let losses = attacked.iter().map(|p| p.round_losses[r]);
            let max_loss = losses.clone().fold(f64::NEG_INFINITY, f64::max);
            let avg_loss = losses.sum::<f64>() / n_attacked as f64;
            cum = cum.max(max_loss);
            rounds.push(RoundStat {
                round: r + 1,
                max_loss,
                avg_loss,
                cum_max_loss: cum,
            });
        }
    }

    let mut warnings: Vec<String> = Vec::new();
    for p in &attacked {
        for w in &p.warnings {
            let tagged = format!("start {}: {w}", p.outcome.start_index);
            if warnings.len() < 200 {
                warnings.push(tagged);
            }
        }
    }
    if n_attacked == 0 {
        warnings.push("no start survived the correctly-classified filter".into());
    }

    let (max_loss, avg_loss) = if n_attacked == 0 {
        (0.0, 0.0)
    } else {
        let max = attacked
            .iter()
            .map(|p| p.outcome.max_loss)
            .fold(f64::NEG_INFINITY, f64::max);
        let (sum, count) = attacked.iter().fold((0.0, 0usize), |(s, n), p| {
            if p.round_losses.is_empty() {
                (s + p.outcome.final_loss, n + 1)
            } else {
                (
                    s + p.round_losses.iter().sum::<f64>(),
                    n + p.round_losses.len(),
                )
            }
        });
        (max, sum / count as f64)
    };

    Ok(CampaignReport {
        campaign: c.clone(),
        model_fingerprint: model_fingerprint(net),
        dataset_fingerprint: match c.start_mode {
            StartMode::Dataset => data.map(dataset_fingerprint),
            StartMode::Random => None,
        },
        starts_attempted: starts.len(),
        starts_attacked: n_attacked,
        attack_rate: if n_attacked == 0 {
            0.0
        } else {
            successes as f64 / n_attacked as f64
        },
        max_loss,
        avg_loss,
        avg_max_loss: mean(&|p| p.outcome.max_loss),
        avg_final_loss: mean(&|p| p.outcome.final_loss),
        per_start: attacked.into_iter().map(|p| p.outcome).collect(),
        rounds,
        warnings,
        wall_time: t0.elapsed(),
    })
}

/// Start-by-start comparison of two campaign reports.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MethodComparison {
    pub method_a: Method,
    pub method_b: Method,
    /// Starts where A's final-round pair loss strictly exceeds B's.
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    /// Indices of the starts both reports attacked, in order.
    pub start_indices: Vec<usize>,
    /// Final-round pair loss per shared start.
    pub finals_a: Vec<f64>,
    pub finals_b: Vec<f64>,
    pub avg_max_loss_a: f64,
    pub avg_max_loss_b: f64,
    pub attack_rate_a: f64,
    pub attack_rate_b: f64,
}

/// Pairs up the per-start outcomes of two reports. Refuses reports that
/// were not produced on the same model, starts, and seed, since a
/// start-by-start comparison is meaningless otherwise.
pub fn compare_methods(a: &CampaignReport, b: &CampaignReport) -> Result<MethodComparison> {
    if a.model_fingerprint != b.model_fingerprint {
        return Err(Error::InvalidConfig(
            "reports come from different models".into(),
        ));
    }
    if a.dataset_fingerprint != b.dataset_fingerprint {
        return Err(Error::InvalidConfig(
            "reports come from different datasets".into(),
        ));
    }
    let ca = &a.campaign;
    let cb = &b.campaign;
    if ca.start_mode != cb.start_mode
        || ca.n_starts != cb.n_starts
        || ca.base_seed != cb.base_seed
        || ca.epsilon != cb.epsilon
    {
        return Err(Error::InvalidConfig(
            "reports use different start selections (mode, count, seed, or epsilon)".into(),
        ));
    }

    let (mut wins_a, mut wins_b, mut ties) = (0, 0, 0);
    let mut start_indices = Vec::new();
    let mut finals_a = Vec::new();
    let mut finals_b = Vec::new();
    let mut bi = b.per_start.iter().peekable();
    for oa in &a.per_start {
        while bi.peek().is_some_and(|ob| ob.start_index < oa.start_index) {
            bi.next();
        }
        let Some(ob) = bi.peek() else { break };
        if ob.start_index != oa.start_index {
            continue;
        }
        start_indices.push(oa.start_index);
        finals_a.push(oa.final_loss);
        finals_b.push(ob.final_loss);
        if oa.final_loss > ob.final_loss {
            wins_a += 1;
        } else if ob.final_loss > oa.final_loss {
            wins_b += 1;
        } else {
            ties += 1;
        }
    }

    Ok(MethodComparison {
        method_a: ca.method,
        method_b: cb.method,
        wins_a,
        wins_b,
        ties,
        start_indices,
        finals_a,
        finals_b,
        avg_max_loss_a: a.avg_max_loss,
        avg_max_loss_b: b.avg_max_loss,
        attack_rate_a: a.attack_rate,
        attack_rate_b: b.attack_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, DataConfig, DataKind};

    fn small_net() -> Network {
        Network::random(
            2,
            &[8],
            vec!["a".into(), "b".into(), "meaningless".into()],
            3,
        )
        .unwrap()
    }

    fn small_data() -> Dataset {
        generate(&DataConfig {
            kind: DataKind::Blobs,
            n_per_class: 20,
            noise_scale: 0.05,
            meaningless_fraction: 0.1,
            rng_seed: 1,
        })
        .unwrap()
    }

    fn quick_campaign(method: Method) -> Campaign {
        Campaign {
            method,
            n_starts: 6,
            rounds: 4,
            sub_steps: 5,
            block_size: 6,
            top_k: 8,
            warmup_rounds: 2,
            ..Campaign::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("g-mystery".parse::<Method>().is_err());
        assert_eq!("dataset".parse::<StartMode>().unwrap(), StartMode::Dataset);
        assert!("elsewhere".parse::<StartMode>().is_err());
    }

    #[test]
    fn dataset_starts_are_sampled_without_replacement() {
        let net = small_net();
        let data = small_data();
        let c = quick_campaign(Method::GPgd);
        let starts = select_starts(&net, Some(&data), &c).unwrap();
        assert_eq!(starts.len(), 6);
        let mut seen: Vec<Vec<u64>> = starts
            .iter()
            .map(|s| s.x.iter().map(|v| v.to_bits()).collect())
            .collect();
        seen.sort();
        seen.dedup();
        // Blob rows can coincide only by extreme luck at this noise level.
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn random_starts_use_the_junk_label() {
        let net = small_net();
        let c = Campaign {
            start_mode: StartMode::Random,
            ..quick_campaign(Method::LPgd)
        };
        let starts = select_starts(&net, None, &c).unwrap();
        assert!(starts.iter().all(|s| s.label == 2));
        assert!(starts.iter().all(|s| crate::vecmath::in_unit_box(&s.x)));
    }

    #[test]
    fn campaign_reports_are_reproducible() {
        let net = small_net();
        let data = small_data();
        for method in [Method::LPgd, Method::GPgd, Method::Gevmcmc] {
            let c = quick_campaign(method);
            let r1 = run_campaign(&net, Some(&data), &c).unwrap();
            let r2 = run_campaign(&net, Some(&data), &c).unwrap();
            assert_eq!(
                serde_json::to_string(&r1).unwrap(),
                serde_json::to_string(&r2).unwrap()
            );
        }
    }

    #[test]
    fn pair_methods_attack_every_start() {
        let net = small_net();
        let data = small_data();
        let r = run_campaign(&net, Some(&data), &quick_campaign(Method::GIfgsm)).unwrap();
        assert_eq!(r.starts_attempted, 6);
        assert_eq!(r.starts_attacked, 6);
        assert_eq!(r.per_start.len(), 6);
        assert_eq!(r.rounds.len(), 4);
        for w in r.rounds.windows(2) {
            assert!(w[1].cum_max_loss >= w[0].cum_max_loss);
            assert!(w[1].round == w[0].round + 1);
        }
        for stat in &r.rounds {
            assert!(stat.max_loss >= stat.avg_loss);
            assert!(stat.cum_max_loss >= stat.max_loss);
        }
    }

    #[test]
    fn local_methods_skip_misclassified_starts() {
        // An untrained random model misclassifies plenty of rows; the
        // report must reflect the filter arithmetic.
        let net = small_net();
        let data = small_data();
        let r = run_campaign(&net, Some(&data), &quick_campaign(Method::LIfgsm)).unwrap();
        assert_eq!(r.starts_attempted, 6);
        assert!(r.starts_attacked <= 6);
        assert_eq!(r.per_start.len(), r.starts_attacked);
        assert!(r.rounds.is_empty());
        let successes = r.per_start.iter().filter(|o| o.success).count();
        if r.starts_attacked > 0 {
            let expect = successes as f64 / r.starts_attacked as f64;
            assert!((r.attack_rate - expect).abs() < 1e-15);
        } else {
            assert_eq!(r.attack_rate, 0.0);
        }
    }

    #[test]
    fn zero_weight_model_never_disagrees_and_loses_ln_c() {
        // Constant logits: every input predicts class 0 with probability
        // 1/C, so no pair can disagree and every pair loss is ln C.
        let layer = crate::net::DenseLayer::new(
            2,
            3,
            vec![0.0; 6],
            vec![0.0; 3],
            crate::net::Activation::Identity,
        )
        .unwrap();
        let net = Network::new(
            2,
            vec!["a".into(), "b".into(), "meaningless".into()],
            vec![layer],
        )
        .unwrap();
        let data = small_data();
        for method in [Method::GFgsm, Method::GPgd, Method::Gevmcmc] {
            let r = run_campaign(&net, Some(&data), &quick_campaign(method)).unwrap();
            assert_eq!(r.attack_rate, 0.0);
            assert!((r.avg_loss - 3.0f64.ln()).abs() < 1e-12);
            assert!((r.max_loss - 3.0f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn self_comparison_is_all_ties() {
        let net = small_net();
        let data = small_data();
        let c = quick_campaign(Method::GPgd);
        let ra = run_campaign(&net, Some(&data), &c).unwrap();
        let rb = run_campaign(&net, Some(&data), &c).unwrap();
        let cmp = compare_methods(&ra, &rb).unwrap();
        assert_eq!((cmp.wins_a, cmp.wins_b, cmp.ties), (0, 0, 6));
        assert_eq!(cmp.finals_a, cmp.finals_b);
        assert_eq!(cmp.start_indices.len(), 6);
    }

    #[test]
    fn report_loss_aggregates_are_consistent() {
        let net = small_net();
        let data = small_data();
        let r = run_campaign(&net, Some(&data), &quick_campaign(Method::GPgd)).unwrap();
        assert!(r.max_loss >= r.avg_loss && r.avg_loss >= 0.0);
        assert!(r.max_loss >= r.avg_max_loss);
        // All-pairs average equals the mean of the per-round averages
        // (every round aggregates the same number of starts).
        let from_rounds = r.rounds.iter().map(|s| s.avg_loss).sum::<f64>() / r.rounds.len() as f64;
        assert!((r.avg_loss - from_rounds).abs() < 1e-12);
    }

    #[test]
    fn comparison_requires_matching_settings() {
        let net = small_net();
        let data = small_data();
        let ra = run_campaign(&net, Some(&data), &quick_campaign(Method::GPgd)).unwrap();
        let rb = run_campaign(&net, Some(&data), &quick_campaign(Method::GIfgsm)).unwrap();
        let cmp = compare_methods(&ra, &rb).unwrap();
        assert_eq!(cmp.wins_a + cmp.wins_b + cmp.ties, 6);

        let other_model = Network::random(2, &[8], vec!["a".into(), "b".into()], 4).unwrap();
        let rc = run_campaign(&other_model, Some(&data), &quick_campaign(Method::GPgd)).unwrap();
        assert!(compare_methods(&ra, &rc).is_err());

        let mut seed_shift = quick_campaign(Method::GPgd);
        seed_shift.base_seed = 9;
        let rd = run_campaign(&net, Some(&data), &seed_shift).unwrap();
        assert!(compare_methods(&ra, &rd).is_err());
    }

    #[test]
    fn fingerprints_distinguish_models_and_data() {
        let a = model_fingerprint(&small_net());
        let b = model_fingerprint(
            &Network::random(
                2,
                &[8],
                vec!["a".into(), "b".into(), "meaningless".into()],
                4,
            )
            .unwrap(),
        );
        assert_ne!(a, b);
        assert_eq!(a, model_fingerprint(&small_net()));

        let d1 = dataset_fingerprint(&small_data());
        let mut altered = small_data();
        altered.inputs[0][0] = (altered.inputs[0][0] + 0.25).min(1.0);
        assert_ne!(d1, dataset_fingerprint(&altered));
    }

    #[test]
    fn campaign_validation() {
        let net = small_net();
        let bad = Campaign {
            n_starts: 0,
            ..Campaign::default()
        };
        assert!(run_campaign(&net, None, &bad).is_err());
        let no_data = Campaign {
            start_mode: StartMode::Dataset,
            ..Campaign::default()
        };
        assert!(run_campaign(&net, None, &no_data).is_err());
        let zero_rounds = Campaign {
            rounds: 0,
            start_mode: StartMode::Random,
            ..Campaign::default()
        };
        assert!(run_campaign(&net, None, &zero_rounds).is_err());
    }
}
