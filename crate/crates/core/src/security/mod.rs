//! Diversification, attacker models and their analysis.

pub mod analytic;
pub mod attacker;
pub mod campaign;
pub mod diversify;

pub use analytic::{campaign_success_prob, wilson_interval};
pub use attacker::{AttackOutcome, Attacker, AttackerModel};
pub use campaign::{run_attack_trial, simulate_attack_campaign, CampaignResult};
pub use diversify::{diversify, DiversificationStrategy};
