//! Finite-alphabet domain-shift bound for a frozen detector.
//!
//! The target-domain detection error is bounded by the source error
//! plus an L1 distance between the two noise distributions plus the
//! smaller of the two oracle-disagreement masses. On a finite alphabet
//! every term is an exact sum, so the bound can be verified
//! exhaustively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability distribution on an ordered finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<String>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::Dimension {
                expected: support.len(),
                got: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::Validation("empty support".into()));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::Validation(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("probabilities sum to {sum}")));
        }
        Ok(Self {
            support,
            probs: probs.iter().map(|p| p / sum).collect(),
        })
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Convex mixture of two distributions on the same alphabet.
    pub fn mix(&self, other: &Self, weight_other: f64) -> Result<Self> {
        check_alphabet(self, other)?;
        if !(0.0..=1.0).contains(&weight_other) {
            return Err(Error::Validation(format!(
                "mix rate {weight_other} out of [0,1]"
            )));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (1.0 - weight_other) * a + weight_other * b)
            .collect();
        Self::new(self.support.clone(), probs)
    }
}

/// A source/target pair with label oracles and a fixed detector, all
/// total on a shared alphabet. Binary functions are stored as one value
/// per alphabet symbol.
///
/// The noise conditionals (input distributions given Z=1) feed the
/// distance term; the marginals feed the error and disagreement terms.
/// When the noise fields are absent the marginals stand in for them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftInstance {
    pub source_dist: DiscreteDistribution,
    pub target_dist: DiscreteDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_source: Option<DiscreteDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_target: Option<DiscreteDistribution>,
    pub f_source: Vec<u8>,
    pub f_target: Vec<u8>,
    pub detector: Vec<u8>,
}

/// All quantities entering the bound, plus whether it holds.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    pub source_error: f64,
    pub target_error: f64,
    pub distance: f64,
    pub disagreement: f64,
    pub bound: f64,
    pub holds: bool,
}

impl ShiftInstance {
    pub fn validate(&self) -> Result<()> {
        check_alphabet(&self.source_dist, &self.target_dist)?;
        let n = self.source_dist.support().len();
        for (name, f) in [
            ("f_source", &self.f_source),
            ("f_target", &self.f_target),
            ("detector", &self.detector),
        ] {
            if f.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: f.len(),
                });
            }
            if f.iter().any(|&v| v > 1) {
                return Err(Error::Validation(format!("{name} must be 0/1-valued")));
            }
        }
        for noise in [&self.noise_source, &self.noise_target]
            .into_iter()
            .flatten()
        {
            check_alphabet(&self.source_dist, noise)?;
        }
        Ok(())
    }

    fn noise_pair(&self) -> (&DiscreteDistribution, &DiscreteDistribution) {
        (
            self.noise_source.as_ref().unwrap_or(&self.source_dist),
            self.noise_target.as_ref().unwrap_or(&self.target_dist),
        )
    }
}

fn check_alphabet(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.support() != q.support() {
        return Err(Error::Dimension {
            expected: p.support().len(),
            got: q.support().len(),
        });
    }
    Ok(())
}

/// Σ_x |p(x) − q(x)|; on a finite alphabet this equals twice the
/// largest probability gap over subsets, attained at {x : p(x) > q(x)}.
pub fn l1_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_alphabet(p, q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Probability mass on which the detector disagrees with the oracle.
pub fn error(dist: &DiscreteDistribution, detector: &[u8], oracle: &[u8]) -> f64 {
    dist.probs()
        .iter()
        .zip(detector.iter().zip(oracle))
        .filter(|(_, (d, o))| d != o)
        .map(|(p, _)| p)
        .sum()
}

/// Expected |f_source − f_target| under `dist`.
fn disagreement_mass(dist: &DiscreteDistribution, f_s: &[u8], f_t: &[u8]) -> f64 {
    error(dist, f_s, f_t)
}

/// The full bound with every term materialized:
/// source error + L1 noise distance + min(source, target) oracle
/// disagreement, compared against the target error.
///
/// ```
/// use multiarm::shift::{shift_bound, DiscreteDistribution, ShiftInstance};
///
/// let support: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
/// let inst = ShiftInstance {
///     source_dist: DiscreteDistribution::new(support.clone(), vec![0.5, 0.3, 0.2]).unwrap(),
///     target_dist: DiscreteDistribution::new(support.clone(), vec![0.2, 0.3, 0.5]).unwrap(),
///     noise_source: None,
///     noise_target: None,
///     f_source: vec![0, 1, 1],
///     f_target: vec![0, 0, 1],
///     detector: vec![0, 1, 0],
/// };
/// let report = shift_bound(&inst).unwrap();
/// assert!(report.holds);
/// assert!(report.target_error <= report.bound + 1e-12);
/// ```
pub fn shift_bound(inst: &ShiftInstance) -> Result<ShiftReport> {
    inst.validate()?;
    let source_error = error(&inst.source_dist, &inst.detector, &inst.f_source);
    let target_error = error(&inst.target_dist, &inst.detector, &inst.f_target);
    let (noise_s, noise_t) = inst.noise_pair();
    let distance = l1_distance(noise_s, noise_t)?;
    let disagreement = disagreement_mass(&inst.source_dist, &inst.f_source, &inst.f_target).min(
        disagreement_mass(&inst.target_dist, &inst.f_source, &inst.f_target),
    );
    let bound = source_error + distance + disagreement;
    Ok(ShiftReport {
        source_error,
        target_error,
        distance,
        disagreement,
        bound,
        holds: target_error <= bound + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(probs: &[f64]) -> DiscreteDistribution {
        let support = (0..probs.len()).map(|i| format!("x{i}")).collect();
        DiscreteDistribution::new(support, probs.to_vec()).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(
            l1_distance(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap(),
            0.0
        );
        assert_eq!(
            l1_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(),
            2.0
        );
        let v = l1_distance(&dist(&[0.7, 0.3]), &dist(&[0.4, 0.6])).unwrap();
        assert!((v - 0.6).abs() < 1e-12);
        let mismatched = DiscreteDistribution::new(vec!["a".into()], vec![1.0]).unwrap();
        assert!(l1_distance(&dist(&[0.5, 0.5]), &mismatched).is_err());
    }

    #[test]
    fn l1_equals_twice_best_subset_gap() {
        let p = dist(&[0.5, 0.2, 0.3]);
        let q = dist(&[0.1, 0.6, 0.3]);
        let mut best = 0.0f64;
        for mask in 0..8u32 {
            let (mut ps, mut qs) = (0.0, 0.0);
            for i in 0..3 {
                if mask & (1 << i) != 0 {
                    ps += p.probs()[i];
                    qs += q.probs()[i];
                }
            }
            best = best.max((ps - qs).abs());
        }
        let v = l1_distance(&p, &q).unwrap();
        assert!((v - 2.0 * best).abs() < 1e-12);
    }

    #[test]
    fn error_examples() {
        let d = dist(&[0.5, 0.3, 0.2]);
        assert_eq!(error(&d, &[0, 1, 0], &[0, 1, 0]), 0.0);
        assert_eq!(error(&d, &[1, 0, 1], &[0, 1, 0]), 1.0);
        let v = error(&d, &[0, 0, 0], &[0, 1, 0]);
        assert!((v - 0.3).abs() < 1e-12);
    }

    #[test]
    fn identical_domains_bound_is_tight() {
        let inst = ShiftInstance {
            source_dist: dist(&[0.4, 0.6]),
            target_dist: dist(&[0.4, 0.6]),
            noise_source: None,
            noise_target: None,
            f_source: vec![0, 1],
            f_target: vec![0, 1],
            detector: vec![0, 0],
        };
        let r = shift_bound(&inst).unwrap();
        assert_eq!(r.bound, r.source_error);
        assert_eq!(r.target_error, r.source_error);
        assert!(r.holds);
    }

    #[test]
    fn disjoint_noise_supports_hold_trivially() {
        let inst = ShiftInstance {
            source_dist: dist(&[0.5, 0.5]),
            target_dist: dist(&[0.5, 0.5]),
            noise_source: Some(dist(&[1.0, 0.0])),
            noise_target: Some(dist(&[0.0, 1.0])),
            f_source: vec![0, 1],
            f_target: vec![1, 0],
            detector: vec![0, 1],
        };
        let r = shift_bound(&inst).unwrap();
        assert_eq!(r.distance, 2.0);
        assert!(r.holds);
    }

    #[test]
    fn validates_function_lengths() {
        let inst = ShiftInstance {
            source_dist: dist(&[0.5, 0.5]),
            target_dist: dist(&[0.5, 0.5]),
            noise_source: None,
            noise_target: None,
            f_source: vec![0],
            f_target: vec![0, 1],
            detector: vec![0, 1],
        };
        assert!(shift_bound(&inst).is_err());
    }
}
