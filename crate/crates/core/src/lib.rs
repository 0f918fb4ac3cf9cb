//! Recovery of dictionary-sparse signals by ℓ1-synthesis from heavy-tailed
//! random measurements, with null-space-property certification,
//! small-ball estimators and phase-transition experiments.

pub mod combin;
pub mod dictionary;
pub mod ensembles;
pub mod harness;
pub mod matcore;
pub mod nsp;
pub mod smallball;
pub mod solver;
