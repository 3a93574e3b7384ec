#![allow(dead_code)]

use bettest_core::{DiscreteDistribution, Outcome};
use proptest::prelude::*;

/// Normalizes positive weights into a distribution on outcomes 0..k.
pub fn discrete(weights: &[f64]) -> DiscreteDistribution {
    let total: f64 = weights.iter().sum();
    DiscreteDistribution::new(
        (0..weights.len()).map(|i| Outcome::Real(i as f64)).collect(),
        weights.iter().map(|w| w / total).collect(),
    )
    .unwrap()
}

/// Strictly positive weight vectors of the given length.
pub fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k)
}

/// Three weight vectors of a common length in `2..=max`.
pub fn triple(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2..=max).prop_flat_map(|k| (weights(k), weights(k), weights(k)))
}

/// `sum_i q_i ln(s_i)` computed directly.
pub fn mean_log(q: &[f64], s: &[f64]) -> f64 {
    q.iter()
        .zip(s)
        .map(|(qi, si)| if *qi == 0.0 { 0.0 } else { qi * si.ln() })
        .sum()
}

pub fn normalized(w: &[f64]) -> Vec<f64> {
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}
