//! Finding pairs of nearby inputs that a classifier cannot tell apart
//! consistently.
//!
//! Most adversarial tooling perturbs one labeled example and asks whether
//! the prediction moves off that label. This crate instead searches the
//! whole input domain (the unit box) for *pairs* `(x1, x2)` with
//! `‖x1 − x2‖∞ ≤ ε` on which the model disagrees with itself:
//! `f(x1) ≠ f(x2)`. No ground-truth label is needed, so the search can
//! start anywhere — including from random points the model was never
//! trained on.
//!
//! What's in the box:
//!
//! - [`net`] — small dense ReLU classifiers: forward, backprop,
//!   cross-entropy training (optionally adversarial), JSON model files.
//! - [`data`] — toy 2-D datasets (two moons, blobs, rings) plus a junk
//!   class of uniform noise rows, CSV serialization.
//! - [`attack::local`] — classic single-input baselines (FGSM, iterated
//!   FGSM, PGD) used for comparison.
//! - [`attack::global`] — the alternating pair attack: fix one side,
//!   push the other up the pairwise-disagreement loss, swap, repeat.
//! - [`gev`] + [`optim`] — generalized extreme-value distribution with
//!   maximum-likelihood fitting on a Nelder–Mead simplex.
//! - [`mcmc`] — the Metropolis pair attack: proposals stretched along
//!   the loss gradient, scored against an extreme-value density fitted
//!   online to the largest losses seen so far.
//! - [`harness`] — seeded multi-start campaigns, aggregated reports,
//!   start-by-start method comparisons.
//!
//! # Quick start
//!
//! Train nothing, attack a random model, just to see the shape of the API:
//!
//! ```
//! use advpair::attack::global::{g_attack, GlobalAltConfig, GlobalAltMethod};
//! use advpair::net::Network;
//!
//! let net = Network::random(2, &[8], vec!["a".into(), "b".into()], 42)?;
//! let cfg = GlobalAltConfig {
//!     method: GlobalAltMethod::GPgd,
//!     rounds: 5,
//!     sub_steps: 5,
//!     ..GlobalAltConfig::default()
//! };
//! let trace = g_attack(&net, &[0.4, 0.6], &[0.45, 0.58], &cfg)?;
//! if let Some(best) = trace.best() {
//!     println!("best pair loss {:.4}, disagree: {}", best.loss, best.disagree);
//! }
//! # Ok::<(), advpair::Error>(())
//! ```
//!
//! # Runnable examples
//!
//! Each major capability has a self-contained example (all finish in
//! seconds on desk-scale models):
//!
//! ```text
//! cargo run --release --example train_two_moons      # data gen + training
//! cargo run --release --example local_baselines      # FGSM / IFGSM / PGD
//! cargo run --release --example global_alternating   # alternating pair attack
//! cargo run --release --example gevmcmc_chain        # Metropolis pair attack
//! cargo run --release --example fit_gev              # extreme-value MLE
//! cargo run --release --example adversarial_training # hardened model, re-attacked
//! cargo run --release --example compare_methods      # full campaign comparison
//! ```
//!
//! The same flows are scriptable through the `advpair` binary
//! (`gen-data`, `train`, `attack`, `compare`, `fit-gev`); run
//! `advpair --help` for the flag reference.

pub mod attack;
pub mod data;
mod error;
pub mod gev;
pub mod harness;
pub mod mcmc;
pub mod net;
pub mod optim;
pub(crate) mod vecmath;

pub use error::{Error, Result};
