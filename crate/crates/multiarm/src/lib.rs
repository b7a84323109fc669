//! Zero-shot aggregation of adversarial-example detectors.
//!
//! Given K off-the-shelf soft detectors, each emitting a probability of
//! a sample being adversarial, this crate finds the convex mixture of
//! their decisions that minimizes the worst-case KL regret over the set,
//! per sample and with no training data. That minimax problem is the
//! capacity problem of the channel whose input symbols are the
//! detectors, so the solver is the Blahut-Arimoto iteration and the
//! optimal mixture weights are the capacity-achieving input
//! distribution.
//!
//! The crate also ships the evaluation harness for multi-armed attacks
//! (a group counts as detected only when every attack in it is
//! detected), a seeded synthetic scenario generator, and a finite-domain
//! bound on the detection error under domain shift.
//!
//! ```
//! use multiarm::capacity::{DetectorBank, SoftDecision, SolverConfig, solve_weights};
//!
//! // Two detectors disagree about a sample; the aggregator weighs the
//! // confident one more heavily.
//! let bank = DetectorBank::new(
//!     vec!["ace".into(), "gini".into()],
//!     vec![
//!         SoftDecision::from_adversarial_score(0.95).unwrap(),
//!         SoftDecision::from_adversarial_score(0.40).unwrap(),
//!     ],
//! ).unwrap();
//! let result = solve_weights(&bank, &SolverConfig::default());
//! assert!(result.converged);
//! assert!(result.capacity_nats >= 0.0);
//! ```

pub mod capacity;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod shift;
pub mod synth;

pub use error::{Error, Result};
