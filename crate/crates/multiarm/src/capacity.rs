//! Per-sample minimax aggregation of binary soft detectors.
//!
//! A bank of K detectors, each emitting a probability pair over
//! {natural, adversarial}, is treated as a discrete channel with input
//! alphabet {1..K} and binary output. The weights that maximize the
//! mutual information of that channel are exactly the weights whose
//! mixture minimizes the worst-case KL regret against the bank, and the
//! channel capacity equals that minimax regret value. The solver is the
//! classical Blahut-Arimoto alternating update.
//!
//! ```
//! use multiarm::capacity::{DetectorBank, SoftDecision, SolverConfig, solve_weights};
//!
//! // A noiseless two-detector bank splits its weight evenly and the
//! // capacity is ln 2.
//! let bank = DetectorBank::new(
//!     vec!["a".into(), "b".into()],
//!     vec![SoftDecision::new(1.0, 0.0).unwrap(), SoftDecision::new(0.0, 1.0).unwrap()],
//! ).unwrap();
//! let result = solve_weights(&bank, &SolverConfig::default());
//! assert!((result.capacity_nats - std::f64::consts::LN_2).abs() < 1e-9);
//! assert!((result.weights.as_slice()[0] - 0.5).abs() < 1e-9);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One detector's probability pair for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftDecision {
    p_natural: f64,
    p_adversarial: f64,
}

impl SoftDecision {
    /// Builds a decision from the two components, renormalizing so that
    /// they sum to one. Rejects negative, non-finite, or all-zero input.
    pub fn new(p_natural: f64, p_adversarial: f64) -> Result<Self> {
        if !p_natural.is_finite()
            || !p_adversarial.is_finite()
            || p_natural < 0.0
            || p_adversarial < 0.0
        {
            return Err(Error::Validation(format!(
                "invalid probability pair ({p_natural}, {p_adversarial})"
            )));
        }
        let sum = p_natural + p_adversarial;
        if sum <= 0.0 {
            return Err(Error::Validation("probability pair sums to zero".into()));
        }
        Ok(Self {
            p_natural: p_natural / sum,
            p_adversarial: p_adversarial / sum,
        })
    }

    /// Builds a decision from the adversarial probability alone; the
    /// natural component is the complement.
    pub fn from_adversarial_score(score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation(format!("score {score} out of [0,1]")));
        }
        Ok(Self {
            p_natural: 1.0 - score,
            p_adversarial: score,
        })
    }

    pub fn p_natural(&self) -> f64 {
        self.p_natural
    }

    pub fn p_adversarial(&self) -> f64 {
        self.p_adversarial
    }

    /// The pair with both components clamped into [clamp, 1-clamp] and
    /// renormalized. Makes every divergence formula total on 0/1 outputs.
    pub fn clamped(&self, clamp: f64) -> Self {
        let n = self.p_natural.clamp(clamp, 1.0 - clamp);
        let a = self.p_adversarial.clamp(clamp, 1.0 - clamp);
        let sum = n + a;
        Self {
            p_natural: n / sum,
            p_adversarial: a / sum,
        }
    }

    fn components(&self) -> [f64; 2] {
        [self.p_natural, self.p_adversarial]
    }
}

/// The K soft decisions for one sample, in a fixed detector order.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorBank {
    detector_ids: Vec<String>,
    rows: Vec<SoftDecision>,
}

impl DetectorBank {
    pub fn new(detector_ids: Vec<String>, rows: Vec<SoftDecision>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("bank must have at least one row".into()));
        }
        if detector_ids.len() != rows.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: detector_ids.len(),
            });
        }
        for (i, id) in detector_ids.iter().enumerate() {
            if detector_ids[..i].contains(id) {
                return Err(Error::Validation(format!("duplicate detector id '{id}'")));
            }
        }
        Ok(Self { detector_ids, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rows(&self) -> &[SoftDecision] {
        &self.rows
    }

    pub fn detector_ids(&self) -> &[String] {
        &self.detector_ids
    }

    /// The same bank with every row clamped.
    pub fn clamped(&self, clamp: f64) -> Self {
        Self {
            detector_ids: self.detector_ids.clone(),
            rows: self.rows.iter().map(|r| r.clamped(clamp)).collect(),
        }
    }
}

/// A point on the K-simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights(Vec<f64>);

impl MixtureWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Validation("empty weight vector".into()));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Validation(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        // exact renormalization keeps the simplex invariant tight
        Ok(Self(w.iter().map(|x| x / sum).collect()))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Solver knobs; defaults follow the artifact's convergence policy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when |ΔI| or the L∞ weight change falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Probability floor applied to bank rows before any divergence.
    pub clamp: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            clamp: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::Validation("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Validation("max_iters must be at least 1".into()));
        }
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::Validation("clamp must lie in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Output of one per-sample solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolverResult {
    pub weights: MixtureWeights,
    pub mixture: SoftDecision,
    pub capacity_nats: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// KL divergence D(p ‖ q) in nats over the binary alphabet, with the
/// 0·ln(0/x) = 0 convention. `q` is clamped before use.
///
/// ```
/// use multiarm::capacity::{kl_divergence, SoftDecision};
/// let p = SoftDecision::new(1.0, 0.0).unwrap();
/// let u = SoftDecision::new(0.5, 0.5).unwrap();
/// assert!((kl_divergence(&p, &u, 1e-12) - std::f64::consts::LN_2).abs() < 1e-12);
/// ```
pub fn kl_divergence(p: &SoftDecision, q: &SoftDecision, clamp: f64) -> f64 {
    let q = q.clamped(clamp);
    let mut total = 0.0;
    for (pz, qz) in p.components().iter().zip(q.components()) {
        if *pz > 0.0 {
            total += pz * (pz / qz).ln();
        }
    }
    total.max(0.0)
}

/// Componentwise convex combination of the bank rows.
pub fn mixture(weights: &MixtureWeights, bank: &DetectorBank) -> Result<SoftDecision> {
    check_len(weights, bank)?;
    let mut n = 0.0;
    let mut a = 0.0;
    for (w, row) in weights.as_slice().iter().zip(bank.rows()) {
        n += w * row.p_natural();
        a += w * row.p_adversarial();
    }
    SoftDecision::new(n, a)
}

/// Mutual information I(Ω; Ẑ) in nats for the joint induced by
/// (weights, bank): Σ_k w_k · D(q⁽ᵏ⁾ ‖ m) with m the weighted mixture.
pub fn mutual_information(
    weights: &MixtureWeights,
    bank: &DetectorBank,
    clamp: f64,
) -> Result<f64> {
    check_len(weights, bank)?;
    let m = mixture(weights, bank)?;
    let total = weights
        .as_slice()
        .iter()
        .zip(bank.rows())
        .map(|(w, row)| w * kl_divergence(&row.clamped(clamp), &m, clamp))
        .sum::<f64>();
    Ok(total.max(0.0))
}

/// Worst-case regret of announcing `q` against the bank:
/// max_k D(q⁽ᵏ⁾ ‖ q).
///
/// For the solved mixture this equals the capacity — the minimax value:
///
/// ```
/// use multiarm::capacity::{worst_case_regret, DetectorBank, SoftDecision, SolverConfig, solve_weights};
///
/// let bank = DetectorBank::new(
///     vec!["ace".into(), "gini".into()],
///     vec![
///         SoftDecision::from_adversarial_score(0.95).unwrap(),
///         SoftDecision::from_adversarial_score(0.40).unwrap(),
///     ],
/// ).unwrap();
///
/// let result = solve_weights(&bank, &SolverConfig::default());
///
/// // the solved mixture's worst-case regret is the capacity
/// let regret = worst_case_regret(&result.mixture, &bank, 1e-12);
/// assert!((regret - result.capacity_nats).abs() < 1e-4);
/// ```
pub fn worst_case_regret(q: &SoftDecision, bank: &DetectorBank, clamp: f64) -> f64 {
    bank.rows()
        .iter()
        .map(|row| kl_divergence(&row.clamped(clamp), q, clamp))
        .fold(0.0, f64::max)
}

/// One Blahut-Arimoto update. Mutual information never decreases:
///
/// ```
/// use multiarm::capacity::{ba_step, mutual_information, DetectorBank, MixtureWeights, SoftDecision};
///
/// let bank = DetectorBank::new(
///     vec!["sharp".into(), "blunt".into()],
///     vec![
///         SoftDecision::new(1.0, 0.0).unwrap(),
///         SoftDecision::new(0.5, 0.5).unwrap(),
///     ],
/// ).unwrap().clamped(1e-12);
///
/// let w0 = MixtureWeights::uniform(2);
/// let w1 = ba_step(&w0, &bank).unwrap();
/// let before = mutual_information(&w0, &bank, 1e-12).unwrap();
/// let after = mutual_information(&w1, &bank, 1e-12).unwrap();
/// assert!(after > before);
/// ```
///
/// The backward step forms the posterior
/// ω̃_k(z) = ω_k q⁽ᵏ⁾(z) / Σ_j ω_j q⁽ʲ⁾(z); the forward step sets
/// ω'_k ∝ Π_z ω̃_k(z)^{q⁽ᵏ⁾(z)} and renormalizes. 0⁰ counts as 1.
pub fn ba_step(weights: &MixtureWeights, bank: &DetectorBank) -> Result<MixtureWeights> {
    check_len(weights, bank)?;
    let k = bank.len();
    let w = weights.as_slice();
    let rows = bank.rows();

    // output-symbol marginals Σ_j ω_j q⁽ʲ⁾(z)
    let mut marginal = [0.0f64; 2];
    for (wj, row) in w.iter().zip(rows) {
        marginal[0] += wj * row.p_natural();
        marginal[1] += wj * row.p_adversarial();
    }

    // log-domain forward step avoids underflow for near-degenerate rows
    let mut log_unnorm = vec![0.0f64; k];
    for (i, (wi, row)) in w.iter().zip(rows).enumerate() {
        let mut acc = 0.0;
        for (z, qz) in row.components().iter().enumerate() {
            if *qz > 0.0 && marginal[z] > 0.0 {
                let posterior = wi * qz / marginal[z];
                acc += qz * posterior.ln();
            }
            // qz == 0 or an empty output symbol contributes a factor of 1
        }
        log_unnorm[i] = acc;
    }
    let max_log = log_unnorm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = log_unnorm.iter().map(|l| (l - max_log).exp()).collect();
    let sum: f64 = unnorm.iter().sum();
    MixtureWeights::new(unnorm.iter().map(|u| u / sum).collect())
}

/// Runs Blahut-Arimoto from the uniform initialization until either the
/// capacity estimate or the weights stop moving, or `max_iters` is hit.
/// Never aborts: non-convergence is reported through `converged`.
///
/// ```
/// use multiarm::capacity::{solve_weights, DetectorBank, SoftDecision, SolverConfig};
///
/// // one deterministic detector against one uninformative one
/// let bank = DetectorBank::new(
///     vec!["a".into(), "b".into()],
///     vec![
///         SoftDecision::new(1.0, 0.0).unwrap(),
///         SoftDecision::new(0.5, 0.5).unwrap(),
///     ],
/// ).unwrap();
/// let result = solve_weights(&bank, &SolverConfig::default());
/// assert!((result.weights.as_slice()[0] - 0.6).abs() < 1e-4);
/// assert!((result.capacity_nats - 1.25f64.ln()).abs() < 1e-6);
/// ```
pub fn solve_weights(bank: &DetectorBank, config: &SolverConfig) -> SolverResult {
    let bank = bank.clamped(config.clamp);
    let k = bank.len();
    let mut weights = MixtureWeights::uniform(k);
    let mut info = mutual_information(&weights, &bank, config.clamp).expect("lengths match");
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iters {
        let next = ba_step(&weights, &bank).expect("lengths match");
        iterations += 1;
        let next_info = mutual_information(&next, &bank, config.clamp).expect("lengths match");
        let weight_delta = next
            .as_slice()
            .iter()
            .zip(weights.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let info_delta = (next_info - info).abs();
        weights = next;
        info = next_info;
        if info_delta < config.tol || weight_delta < config.tol {
            converged = true;
            break;
        }
    }

    let mix = mixture(&weights, &bank).expect("lengths match");
    SolverResult {
        weights,
        mixture: mix,
        capacity_nats: info,
        iterations,
        converged,
    }
}

/// The thresholded detector: 1 (adversarial) iff the mixture's
/// adversarial mass strictly exceeds gamma. Ties resolve to natural.
///
/// ```
/// use multiarm::capacity::{decide, SoftDecision};
///
/// let mix = SoftDecision::new(0.5, 0.5).unwrap();
/// assert_eq!(decide(&mix, 0.5).unwrap(), 0); // strict inequality
/// ```
pub fn decide(mixture: &SoftDecision, gamma: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Validation(format!("gamma {gamma} out of [0,1]")));
    }
    Ok(u8::from(mixture.p_adversarial() > gamma))
}

fn check_len(weights: &MixtureWeights, bank: &DetectorBank) -> Result<()> {
    if weights.len() != bank.len() {
        return Err(Error::Dimension {
            expected: bank.len(),
            got: weights.len(),
        });
    }
    Ok(())
}
