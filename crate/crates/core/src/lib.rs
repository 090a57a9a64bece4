//! Deterministic core for the LegalEdge charging simulator.
//!
//! Everything in this crate is pure computation over explicit state: the
//! contract automaton, escrow arithmetic, the charging environment, the
//! DQN substrate, int8 quantization, federated aggregation, the simulated
//! ledger, and metric computation. File IO, wall clocks, and the CLI live
//! in the companion `legaledge` crate.
//!
//! The crate is `no_std` (with `alloc`); float transcendentals go through
//! `libm` so results are bit-identical across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod canon;
pub mod contract;
pub mod dfa;
pub mod dqn;
pub mod env;
pub mod fed;
pub mod latency;
pub mod ledger;
pub mod metrics;
pub mod money;
pub mod nn;
pub mod quant;
pub mod rngutil;
