//! Full campaign comparison: run every attack method from the same 100
//! start points against the same model and tabulate success rates and
//! average best losses, then score the Metropolis chain head-to-head
//! against the strongest alternating attack.

use advpair::data::{generate, DataConfig};
use advpair::harness::{compare_methods, run_campaign, Campaign, Method, StartMode};
use advpair::net::{train, Network, TrainConfig};

fn main() -> advpair::Result<()> {
    let data = generate(&DataConfig {
        n_per_class: 200,
        rng_seed: 7,
        ..DataConfig::default()
    })?;
    let init = Network::random(2, &[32, 32], data.class_names.clone(), 0)?;
    let model = train(
        &init,
        &data,
        &TrainConfig {
            epochs: 200,
            learning_rate: 0.1,
            ..TrainConfig::default()
        },
    )?;

    let campaign = |method| Campaign {
        method,
        start_mode: StartMode::Dataset,
        n_starts: 100,
        base_seed: 11,
        ..Campaign::default()
    };

    println!(
        "{:<10}{:>8}{:>10}{:>14}{:>12}",
        "method", "kind", "rate", "avg max loss", "time"
    );
    let mut reports = Vec::new();
    for method in Method::ALL {
        let r = run_campaign(&model, Some(&data), &campaign(method))?;
        println!(
            "{:<10}{:>8}{:>10.3}{:>14.4}{:>11.2}s",
            method.to_string(),
            if method.is_local() { "local" } else { "global" },
            r.attack_rate,
            r.avg_max_loss,
            r.wall_time.as_secs_f64()
        );
        reports.push((method, r));
    }

    let chain = &reports
        .iter()
        .find(|(m, _)| *m == Method::Gevmcmc)
        .unwrap()
        .1;
    let pgd = &reports.iter().find(|(m, _)| *m == Method::GPgd).unwrap().1;
    let cmp = compare_methods(chain, pgd)?;
    println!(
        "\nhead to head over {} shared starts: {} beats {} on {} (loses {}, ties {})",
        cmp.wins_a + cmp.wins_b + cmp.ties,
        cmp.method_a,
        cmp.method_b,
        cmp.wins_a,
        cmp.wins_b,
        cmp.ties
    );
    Ok(())
}
