//! Normalized metrics and the safety-oscillation classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("PPO reference reward is zero; cannot normalize")]
    ZeroReference,
    #[error("cost limit must be positive")]
    BadCostLimit,
    #[error("classification needs a nonempty series")]
    EmptySeries,
}

/// Normalized reward (relative to the PPO reference) and normalized cost
/// (relative to the cost limit).
pub fn normalize_metrics(
    j_reward: f64,
    j_cost: f64,
    ppo_reference: f64,
    cost_limit: f64,
) -> Result<(f64, f64), AnalysisError> {
    if ppo_reference == 0.0 {
        return Err(AnalysisError::ZeroReference);
    }
    if cost_limit <= 0.0 {
        return Err(AnalysisError::BadCostLimit);
    }
    Ok((j_reward / ppo_reference, j_cost / cost_limit))
}

/// Bucket boundaries as multiples of the cost limit. The paper names the
/// buckets without boundaries; these defaults are recorded in the report
/// header and configurable here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyThresholds {
    /// At or below `strongly_safe * b`: strongly safe.
    pub strongly_safe: f64,
    /// At or below `safe * b` (and above the previous): safe.
    pub safe: f64,
    /// At or below `unsafe_to * b`: unsafe; beyond: strongly unsafe.
    pub unsafe_to: f64,
}

impl Default for SafetyThresholds {
    fn default() -> Self {
        Self { strongly_safe: 0.5, safe: 1.0, unsafe_to: 1.5 }
    }
}

/// Proportions of iterations per safety bucket; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyClassification {
    pub strongly_unsafe: f64,
    pub unsafe_: f64,
    pub safe: f64,
    pub strongly_safe: f64,
}

impl SafetyClassification {
    pub fn sum(&self) -> f64 {
        self.strongly_unsafe + self.unsafe_ + self.safe + self.strongly_safe
    }
}

pub fn classify_safety(
    episodic_costs: &[f64],
    cost_limit: f64,
) -> Result<SafetyClassification, AnalysisError> {
    classify_safety_with(episodic_costs, cost_limit, SafetyThresholds::default())
}

pub fn classify_safety_with(
    episodic_costs: &[f64],
    cost_limit: f64,
    thresholds: SafetyThresholds,
) -> Result<SafetyClassification, AnalysisError> {
    if cost_limit <= 0.0 {
        return Err(AnalysisError::BadCostLimit);
    }
    if episodic_costs.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let mut counts = [0usize; 4];
    for &jc in episodic_costs {
        let bucket = if jc <= thresholds.strongly_safe * cost_limit {
            3
        } else if jc <= thresholds.safe * cost_limit {
            2
        } else if jc <= thresholds.unsafe_to * cost_limit {
            1
        } else {
            0
        };
        counts[bucket] += 1;
    }
    let n = episodic_costs.len() as f64;
    Ok(SafetyClassification {
        strongly_unsafe: counts[0] as f64 / n,
        unsafe_: counts[1] as f64 / n,
        safe: counts[2] as f64 / n,
        strongly_safe: counts[3] as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        // Lagrangian velocity row: raw 3221.90 over the 5899.64 reference
        let (jr, jc) = normalize_metrics(3221.90, 5.43, 5899.64, 25.0).unwrap();
        assert!((jr - 0.546).abs() < 1e-3);
        assert!((jc - 0.2172).abs() < 1e-12);

        let (jr, _) = normalize_metrics(5899.64, 0.0, 5899.64, 25.0).unwrap();
        assert_eq!(jr, 1.0);
        assert_eq!(normalize_metrics(1.0, 1.0, 0.0, 25.0), Err(AnalysisError::ZeroReference));
    }

    #[test]
    fn normalization_is_homogeneous_in_reward() {
        let (a, _) = normalize_metrics(100.0, 0.0, 40.0, 25.0).unwrap();
        let (b, _) = normalize_metrics(300.0, 0.0, 40.0, 25.0).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn classification_buckets() {
        let all_zero = classify_safety(&[0.0; 7], 25.0).unwrap();
        assert_eq!(all_zero.strongly_safe, 1.0);
        assert!((all_zero.sum() - 1.0).abs() < 1e-12);

        let one = classify_safety(&[50.0], 25.0).unwrap();
        assert_eq!(one.strongly_unsafe, 1.0);

        // boundary membership: at exactly b the row is safe, at 1.5 b unsafe
        let edges = classify_safety(&[25.0, 37.5, 12.5, 37.6], 25.0).unwrap();
        assert_eq!(edges.safe, 0.25);
        assert_eq!(edges.unsafe_, 0.25);
        assert_eq!(edges.strongly_safe, 0.25);
        assert_eq!(edges.strongly_unsafe, 0.25);
    }

    #[test]
    fn classification_matches_brute_force_recount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let series: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..80.0)).collect();
        let got = classify_safety(&series, 25.0).unwrap();
        let mut counts = [0usize; 4];
        for &jc in &series {
            if jc > 37.5 {
                counts[0] += 1;
            } else if jc > 25.0 {
                counts[1] += 1;
            } else if jc > 12.5 {
                counts[2] += 1;
            } else {
                counts[3] += 1;
            }
        }
        let n = series.len() as f64;
        assert_eq!(got.strongly_unsafe, counts[0] as f64 / n);
        assert_eq!(got.unsafe_, counts[1] as f64 / n);
        assert_eq!(got.safe, counts[2] as f64 / n);
        assert_eq!(got.strongly_safe, counts[3] as f64 / n);
        assert!((got.sum() - 1.0).abs() < 1e-12);
    }
}
