//! Command-line front end. All logic lives in the library; this file only
//! parses flags, wires files to library calls, and prints short summaries.

use advpair::data::{self, DataConfig, DataKind};
use advpair::gev;
use advpair::harness::{
    self, write_report, write_round_series, Campaign, CampaignReport, Method, StartMode,
};
use advpair::net::{self, Network};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "advpair",
    version,
    about = "Train small dense classifiers and hunt for nearby input pairs they disagree on"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a toy 2-D dataset (with a junk class) as CSV.
    GenData(GenDataArgs),
    /// Train a dense ReLU classifier on a dataset CSV.
    Train(TrainArgs),
    /// Run a multi-start attack campaign against a saved model.
    Attack(AttackArgs),
    /// Run two campaign configs on shared starts and score them head to head.
    Compare(CompareArgs),
    /// Fit a generalized extreme-value distribution to a list of numbers.
    FitGev(FitGevArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Dataset family: two-moons, blobs, or rings.
    #[arg(long, default_value = "two-moons")]
    kind: String,
    #[arg(long, default_value_t = 200)]
    n_per_class: usize,
    /// Gaussian noise scale applied to the class geometry.
    #[arg(long, default_value_t = 0.12)]
    noise: f64,
    /// Fraction of uniform junk-class rows appended to the dataset.
    #[arg(long, default_value_t = 0.1)]
    junk_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also split into train/test CSVs with this training fraction.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, requires = "split")]
    train_out: Option<PathBuf>,
    #[arg(long, requires = "split")]
    test_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Hidden layer widths, comma separated, e.g. 32,32.
    #[arg(long, default_value = "32,32")]
    hidden: String,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Optional held-out CSV to report accuracy on.
    #[arg(long)]
    eval: Option<PathBuf>,
    /// Mix projected-gradient adversarial examples into every batch.
    #[arg(long)]
    adversarial: bool,
    #[arg(long, default_value_t = 30, requires = "adversarial")]
    adv_steps: usize,
    #[arg(long, default_value_t = 0.01, requires = "adversarial")]
    adv_step_size: f64,
    #[arg(long, default_value_t = 0.1, requires = "adversarial")]
    adv_epsilon: f64,
    /// Weight of the adversarial loss term relative to the clean term.
    #[arg(long, default_value_t = 1.0, requires = "adversarial")]
    adv_mix: f64,
    /// Continue from this model instead of a fresh random one.
    #[arg(long)]
    init: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Model JSON produced by `train`.
    #[arg(long)]
    model: PathBuf,
    /// l-fgsm, l-ifgsm, l-pgd, g-fgsm, g-ifgsm, g-pgd, or gevmcmc.
    #[arg(long)]
    method: String,
    /// Start points: dataset (rows of --data) or random (uniform).
    #[arg(long, default_value = "dataset")]
    start_mode: String,
    /// Dataset CSV; required for dataset starts.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 30)]
    sub_steps: usize,
    #[arg(long, default_value_t = 0.01)]
    step_size: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-round CSV series output path.
    #[arg(long)]
    series: Option<PathBuf>,
    // Metropolis-attack knobs (ignored by other methods).
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[arg(long, default_value_t = 59)]
    block_size: usize,
    #[arg(long, default_value_t = 50)]
    top_k: usize,
    #[arg(long, default_value_t = 0.12)]
    lambda_m: f64,
    #[arg(long, default_value_t = 0.03)]
    lambda_0: f64,
    #[arg(long, default_value_t = 0.95)]
    p_b: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// Campaign config JSON for side A: {"model": …, "data": …, "method": …}
    /// plus any campaign fields; omitted fields take the `attack` defaults.
    #[arg(long)]
    a_config: PathBuf,
    /// Campaign config JSON for side B.
    #[arg(long)]
    b_config: PathBuf,
    /// Optional comparison JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitGevArgs {
    /// Text file with one number per line (blank lines ignored).
    #[arg(long)]
    samples_file: PathBuf,
    /// Optional JSON output path; parameters print to stdout regardless.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Campaign config file: the model (and dataset, for dataset starts)
/// plus any `Campaign` fields; omitted fields take their defaults.
#[derive(serde::Deserialize)]
struct CampaignFile {
    model: PathBuf,
    #[serde(default)]
    data: Option<PathBuf>,
    #[serde(flatten)]
    campaign: Campaign,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> advpair::Result<()> {
    match cli.cmd {
        Cmd::GenData(a) => gen_data(a),
        Cmd::Train(a) => train(a),
        Cmd::Attack(a) => attack(a),
        Cmd::Compare(a) => compare(a),
        Cmd::FitGev(a) => fit_gev(a),
    }
}

fn parse_kind(s: &str) -> advpair::Result<DataKind> {
    match s {
        "two-moons" => Ok(DataKind::TwoMoons),
        "blobs" => Ok(DataKind::Blobs),
        "rings" => Ok(DataKind::Rings),
        other => Err(advpair::Error::InvalidConfig(format!(
            "unknown dataset kind {other:?}; expected two-moons, blobs, or rings"
        ))),
    }
}

fn gen_data(a: GenDataArgs) -> advpair::Result<()> {
    let cfg = DataConfig {
        kind: parse_kind(&a.kind)?,
        n_per_class: a.n_per_class,
        noise_scale: a.noise,
        meaningless_fraction: a.junk_fraction,
        rng_seed: a.seed,
    };
    let full = data::generate(&cfg)?;
    data::save_dataset(&full, &a.out)?;
    println!(
        "wrote {} rows ({} classes) to {}",
        full.len(),
        full.class_names.len(),
        a.out.display()
    );
    if let Some(fraction) = a.split {
        let train_out = a
            .train_out
            .ok_or_else(|| advpair::Error::InvalidConfig("--split needs --train-out".into()))?;
        let test_out = a
            .test_out
            .ok_or_else(|| advpair::Error::InvalidConfig("--split needs --test-out".into()))?;
        let (tr, te) = data::split(&full, fraction, a.seed)?;
        data::save_dataset(&tr, &train_out)?;
        data::save_dataset(&te, &test_out)?;
        println!(
            "split {} train / {} test into {} and {}",
            tr.len(),
            te.len(),
            train_out.display(),
            test_out.display()
        );
    }
    Ok(())
}

fn parse_hidden(s: &str) -> advpair::Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim().parse::<usize>().map_err(|_| {
                advpair::Error::InvalidConfig(format!("bad hidden width {p:?} in {s:?}"))
            })
        })
        .collect()
}

fn train(a: TrainArgs) -> advpair::Result<()> {
    let dataset = data::load_dataset(&a.data)?;
    let init = match &a.init {
        Some(path) => net::load_model(path)?,
        None => Network::random(
            dataset.dim(),
            &parse_hidden(&a.hidden)?,
            dataset.class_names.clone(),
            a.seed,
        )?,
    };
    let cfg = net::TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.learning_rate,
        rng_seed: a.seed,
        adversarial: a.adversarial.then_some(net::AdversarialCfg {
            pgd_steps: a.adv_steps,
            step_size: a.adv_step_size,
            epsilon: a.adv_epsilon,
            mix_ratio: a.adv_mix,
        }),
    };
    let trained = net::train(&init, &dataset, &cfg)?;
    net::save_model(&trained, &a.out)?;
    println!(
        "trained {} epochs; train accuracy {:.4}; model at {}",
        a.epochs,
        net::accuracy(&trained, &dataset)?,
        a.out.display()
    );
    if let Some(eval) = a.eval {
        let held_out = data::load_dataset(&eval)?;
        println!(
            "held-out accuracy {:.4} on {}",
            net::accuracy(&trained, &held_out)?,
            eval.display()
        );
    }
    Ok(())
}

fn run_campaign_files(
    model_path: &Path,
    data_path: Option<&PathBuf>,
    campaign: &Campaign,
) -> advpair::Result<CampaignReport> {
    let model = net::load_model(model_path)?;
    let dataset = match data_path {
        Some(path) => Some(data::load_dataset(path)?),
        None => None,
    };
    harness::run_campaign(&model, dataset.as_ref(), campaign)
}

fn attack(a: AttackArgs) -> advpair::Result<()> {
    let campaign = Campaign {
        method: a.method.parse::<Method>()?,
        start_mode: a.start_mode.parse::<StartMode>()?,
        n_starts: a.starts,
        rounds: a.rounds,
        sub_steps: a.sub_steps,
        step_size: a.step_size,
        epsilon: a.epsilon,
        base_seed: a.seed,
        warmup_rounds: a.warmup,
        block_size: a.block_size,
        top_k: a.top_k,
        lambda_m: a.lambda_m,
        lambda_0: a.lambda_0,
        p_b: a.p_b,
    };
    let report = run_campaign_files(&a.model, a.data.as_ref(), &campaign)?;
    write_report(&report, &a.out)?;
    if let Some(series) = &a.series {
        write_round_series(&report, series)?;
    }
    println!(
        "{}: {}/{} starts succeeded (rate {:.3}), avg max loss {:.4}, {:.2}s",
        campaign.method,
        (report.attack_rate * report.starts_attacked as f64).round() as usize,
        report.starts_attacked,
        report.attack_rate,
        report.avg_max_loss,
        report.wall_time.as_secs_f64()
    );
    if !report.warnings.is_empty() {
        println!("{} warnings (see report)", report.warnings.len());
    }
    println!("report at {}", a.out.display());
    Ok(())
}

fn load_campaign_file(path: &Path) -> advpair::Result<CampaignFile> {
    let body = fs::read_to_string(path).map_err(|e| advpair::Error::io(path, e))?;
    serde_json::from_str(&body).map_err(|e| {
        advpair::Error::InvalidConfig(format!("{}: not a campaign config: {e}", path.display()))
    })
}

fn compare(a: CompareArgs) -> advpair::Result<()> {
    let ca = load_campaign_file(&a.a_config)?;
    let cb = load_campaign_file(&a.b_config)?;
    let ra = run_campaign_files(&ca.model, ca.data.as_ref(), &ca.campaign)?;
    let rb = run_campaign_files(&cb.model, cb.data.as_ref(), &cb.campaign)?;
    let cmp = harness::compare_methods(&ra, &rb)?;
    println!(
        "{} vs {}: {} / {} wins ({} ties); avg max loss {:.4} vs {:.4}; rate {:.3} vs {:.3}",
        cmp.method_a,
        cmp.method_b,
        cmp.wins_a,
        cmp.wins_b,
        cmp.ties,
        cmp.avg_max_loss_a,
        cmp.avg_max_loss_b,
        cmp.attack_rate_a,
        cmp.attack_rate_b
    );
    if let Some(out) = a.out {
        let mut body = serde_json::to_string_pretty(&cmp)
            .map_err(|e| advpair::Error::InvalidConfig(format!("serialization failed: {e}")))?;
        body.push('\n');
        fs::write(&out, body).map_err(|e| advpair::Error::io(&out, e))?;
        println!("comparison at {}", out.display());
    }
    Ok(())
}

fn fit_gev(a: FitGevArgs) -> advpair::Result<()> {
    let body =
        fs::read_to_string(&a.samples_file).map_err(|e| advpair::Error::io(&a.samples_file, e))?;
    let mut samples = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| advpair::Error::DatasetFormat {
            path: a.samples_file.clone(),
            reason: format!("line {}: not a number: {line:?}", i + 1),
        })?;
        samples.push(v);
    }
    let fit = gev::fit_mle(&samples)?;
    let json = format!(
        "{{\n  \"mu\": {:.16e},\n  \"sigma\": {:.16e},\n  \"xi\": {:.16e},\n  \"log_likelihood\": {:.16e},\n  \"converged\": {}\n}}\n",
        fit.params.mu, fit.params.sigma, fit.params.xi, fit.log_likelihood, fit.converged
    );
    print!("{json}");
    if let Some(out) = a.out {
        fs::write(&out, json).map_err(|e| advpair::Error::io(&out, e))?;
    }
    Ok(())
}
