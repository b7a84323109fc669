//! Seeded generator of synthetic multi-armed detection scenarios.
//!
//! Each detector has a skill value in [0,1] per attack. Natural scores
//! are Beta(2,8); adversarial scores are Beta with the mean moved from
//! 0.2 (skill 0, indistinguishable from naturals) to 0.9 (skill 1) at
//! fixed concentration 10. A diagonal skill matrix realizes the
//! specialist setting: each detector catches exactly one attack.
//!
//! Generation is a pure function of the spec. The RNG stream for every
//! score is keyed independently by (seed, sample_id, source,
//! detector_id), so records can be produced in any order without
//! changing the output.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ScoreRecord, ScoreTable};

/// Default natural-score shape: Beta(2,8), mean 0.2.
pub const NATURAL_ALPHA: f64 = 2.0;
pub const NATURAL_BETA: f64 = 8.0;
/// Concentration (alpha + beta) of adversarial score distributions.
pub const ADVERSARIAL_CONCENTRATION: f64 = 10.0;
/// Adversarial score mean at skill 0 and skill 1.
pub const MEAN_AT_SKILL_ZERO: f64 = 0.2;
pub const MEAN_AT_SKILL_ONE: f64 = 0.9;

/// Per-(detector, attack) separation parameters plus optional
/// per-detector natural score shapes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SkillMatrix {
    /// detector id → attack id → skill in [0,1]; missing entries are 0.
    pub skills: BTreeMap<String, BTreeMap<String, f64>>,
    /// detector id → (alpha, beta) for natural scores; missing entries
    /// use Beta(2,8).
    #[serde(default)]
    pub natural_shape: BTreeMap<String, (f64, f64)>,
}

impl SkillMatrix {
    /// Specialist matrix: detector i has skill 1 on attack i, 0 elsewhere.
    pub fn diagonal(detector_ids: &[String], attack_ids: &[String]) -> Self {
        let mut skills = BTreeMap::new();
        for (d, a) in detector_ids.iter().zip(attack_ids) {
            skills.insert(d.clone(), BTreeMap::from([(a.clone(), 1.0)]));
        }
        Self {
            skills,
            natural_shape: BTreeMap::new(),
        }
    }

    pub fn skill(&self, detector: &str, attack: &str) -> f64 {
        self.skills
            .get(detector)
            .and_then(|m| m.get(attack))
            .copied()
            .unwrap_or(0.0)
    }

    fn validate(&self) -> Result<()> {
        for (d, row) in &self.skills {
            for (a, &s) in row {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Validation(format!(
                        "skill {s} for ({d}, {a}) out of [0,1]"
                    )));
                }
            }
        }
        for (d, &(alpha, beta)) in &self.natural_shape {
            if !(alpha > 0.0 && beta > 0.0) {
                return Err(Error::Validation(format!(
                    "natural shape for {d} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_samples: usize,
    pub detector_ids: Vec<String>,
    pub attack_ids: Vec<String>,
    pub skill: SkillMatrix,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Validation("n_samples must be at least 1".into()));
        }
        for (i, d) in self.detector_ids.iter().enumerate() {
            if self.detector_ids[..i].contains(d) {
                return Err(Error::Validation(format!("duplicate detector id '{d}'")));
            }
        }
        for (i, a) in self.attack_ids.iter().enumerate() {
            if self.attack_ids[..i].contains(a) {
                return Err(Error::Validation(format!("duplicate attack id '{a}'")));
            }
        }
        if self.detector_ids.is_empty() {
            return Err(Error::Validation("at least one detector required".into()));
        }
        self.skill.validate()
    }
}

// FNV-1a; a fixed string hash keeps stream keys stable across platforms
// and Rust versions, unlike DefaultHasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Stream-splitting rule: one independent ChaCha12 stream per
/// (seed, sample, source, detector) tuple.
fn stream_rng(seed: u64, sample_id: &str, source: &str, detector: &str) -> ChaCha12Rng {
    let mut key = splitmix64(seed);
    for part in [sample_id, source, detector] {
        key = splitmix64(key ^ fnv1a(part.as_bytes()));
    }
    ChaCha12Rng::seed_from_u64(key)
}

fn draw_beta(rng: &mut ChaCha12Rng, alpha: f64, beta: f64) -> f64 {
    let dist = Beta::new(alpha, beta).expect("positive shape parameters");
    dist.sample(rng).clamp(0.0, 1.0)
}

/// Deterministically generates the score table for a scenario.
///
/// ```
/// use multiarm::synth::{generate_scenario, ScenarioSpec, SkillMatrix};
/// use multiarm::ingest::write_scores;
///
/// let detectors: Vec<String> = vec!["det_a".into(), "det_b".into()];
/// let attacks: Vec<String> = vec!["atk_a".into(), "atk_b".into()];
/// let spec = ScenarioSpec {
///     n_samples: 10,
///     skill: SkillMatrix::diagonal(&detectors, &attacks),
///     detector_ids: detectors,
///     attack_ids: attacks,
///     seed: 7,
/// };
/// let (mut a, mut b) = (Vec::new(), Vec::new());
/// write_scores(&generate_scenario(&spec).unwrap(), &mut a).unwrap();
/// write_scores(&generate_scenario(&spec).unwrap(), &mut b).unwrap();
/// assert_eq!(a, b);
/// ```
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<ScoreTable> {
    spec.validate()?;
    let width = (spec.n_samples as f64).log10().ceil().max(1.0) as usize;
    let mut records = Vec::with_capacity(spec.n_samples * (1 + spec.attack_ids.len()));
    for i in 0..spec.n_samples {
        let sample_id = format!("s{i:0width$}");
        let natural_scores = spec
            .detector_ids
            .iter()
            .map(|d| {
                let (alpha, beta) = spec
                    .skill
                    .natural_shape
                    .get(d)
                    .copied()
                    .unwrap_or((NATURAL_ALPHA, NATURAL_BETA));
                let mut rng = stream_rng(spec.seed, &sample_id, "natural", d);
                draw_beta(&mut rng, alpha, beta)
            })
            .collect();
        records.push(ScoreRecord {
            sample_id: sample_id.clone(),
            source: "natural".into(),
            valid: true,
            scores: natural_scores,
        });
        for attack in &spec.attack_ids {
            let scores = spec
                .detector_ids
                .iter()
                .map(|d| {
                    let s = spec.skill.skill(d, attack);
                    let mean = MEAN_AT_SKILL_ZERO + s * (MEAN_AT_SKILL_ONE - MEAN_AT_SKILL_ZERO);
                    let alpha = mean * ADVERSARIAL_CONCENTRATION;
                    let beta = (1.0 - mean) * ADVERSARIAL_CONCENTRATION;
                    let mut rng = stream_rng(spec.seed, &sample_id, attack, d);
                    draw_beta(&mut rng, alpha, beta)
                })
                .collect();
            records.push(ScoreRecord {
                sample_id: sample_id.clone(),
                source: attack.clone(),
                valid: true,
                scores,
            });
        }
    }
    ScoreTable::new(spec.detector_ids.clone(), records)
}
