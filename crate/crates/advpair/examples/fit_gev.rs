//! Fit the three-parameter generalized extreme-value distribution to
//! block maxima by maximum likelihood and compare against the known
//! generating parameters.

use advpair::gev::{fit_mle, Gev};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> advpair::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    // Draw maxima of blocks of exponentials: these follow a Gumbel law
    // (shape 0) with location ln(block size).
    let block = 100usize;
    let maxima: Vec<f64> = (0..5000)
        .map(|_| {
            (0..block)
                .map(|_| -rng.random::<f64>().ln())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let fit = fit_mle(&maxima)?;
    let p = fit.params;
    println!(
        "true law:   Gumbel, μ = ln {block} ≈ {:.4}, σ = 1, ξ = 0",
        (block as f64).ln()
    );
    println!(
        "fitted law: μ = {:.4}, σ = {:.4}, ξ = {:+.4}  (log-likelihood {:.2}, converged: {})",
        p.mu, p.sigma, p.xi, fit.log_likelihood, fit.converged
    );

    // The fitted quantiles — the chain uses these to judge how extreme a
    // candidate loss is.
    let fitted = Gev::new(p.mu, p.sigma, p.xi)?;
    for q in [0.5, 0.9, 0.99] {
        println!("  quantile {q:4}: {:.4}", fitted.quantile(q)?);
    }
    Ok(())
}
