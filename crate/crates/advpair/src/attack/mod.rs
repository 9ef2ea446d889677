//! Adversarial attacks: single-input baselines and global example pairs.

pub mod global;
pub mod local;

pub use global::{
    g_attack, g_attack_with_rng, AttackTrace, ExamplePair, GlobalAltConfig, GlobalAltMethod,
};
pub use local::{
    local_attack, local_attack_with_rng, LocalAttackConfig, LocalAttackOutcome, LocalMethod, Region,
};
