//! Closed-form certificate from the per-bit likelihood-ratio bound.
//!
//! Each edge bit of the flip channel changes any outcome probability by a
//! factor of at most e^epsilon between neighboring inputs, and one edge
//! flip touches two entries of the symmetric perturbation matrix. Chaining
//! both directions gives the radius R = (ln pA - ln pB) / (2 epsilon) in
//! edge-flip units. It is cheaper but never tighter than the
//! region-calculus certificate in [`crate::npcert`]; the test suite
//! enforces that dominance.

use serde::{Deserialize, Serialize};

use crate::bitgraph::BitVector;
use crate::error::{Error, Result};

/// Result of the closed-form radius computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpCertificate {
    /// R as a real number, in edge-flip units.
    pub radius_real: f64,
    /// floor(R): attacks are integral, so rounding down is the sound
    /// integral certificate (equivalently, at most 2*floor(R) entries of
    /// the symmetric perturbation matrix).
    pub certified_edge_flips: u64,
    /// The privacy parameter the radius was computed with.
    pub epsilon: f64,
}

/// R = (ln pA - ln pB) / (2 epsilon).
pub fn dp_radius(pa_lower: f64, pb_upper: f64, epsilon: f64) -> Result<DpCertificate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if !(pb_upper > 0.0 && pa_lower <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < pB <= pA <= 1, got pA = {pa_lower}, pB = {pb_upper}"
        )));
    }
    if pb_upper > pa_lower {
        return Err(Error::InvalidParameter(format!(
            "pB upper bound {pb_upper} exceeds pA lower bound {pa_lower}"
        )));
    }
    let radius_real = (pa_lower.ln() - pb_upper.ln()) / (2.0 * epsilon);
    Ok(DpCertificate {
        radius_real,
        certified_edge_flips: radius_real.floor() as u64,
        epsilon,
    })
}

/// Soft-score robustness check: with expected class scores under the flip
/// channel, the prediction is robust to `radius` edge flips iff the top
/// score exceeds e^(2 epsilon radius) times the runner-up.
pub fn robustness_condition(expected_scores: &[f64], epsilon: f64, radius: u64) -> Result<bool> {
    if expected_scores.len() < 2 {
        return Err(Error::InvalidInput(
            "robustness condition needs at least two classes".into(),
        ));
    }
    if expected_scores.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::InvalidInput("scores must lie in [0, 1]".into()));
    }
    let total: f64 = expected_scores.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "scores must sum to 1, got {total}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let top = expected_scores.iter().cloned().fold(f64::MIN, f64::max);
    let runner_up = expected_scores
        .iter()
        .cloned()
        .filter(|&s| s < top)
        .fold(f64::MIN, f64::max);
    let runner_up = if runner_up == f64::MIN { top } else { runner_up };
    Ok(top > (2.0 * epsilon * radius as f64).exp() * runner_up)
}

/// Verifies the expectation form of the per-bit bound by enumeration: for
/// every input x on `n_bits` bits and every single-bit flip x', the exact
/// channel expectation of each score satisfies E_k(x) <= e^epsilon E_k(x').
/// Returns the maximum ratio observed (so a tight score function reports
/// exactly e^epsilon).
pub fn expectation_dp_check(
    score_fn: &dyn Fn(&BitVector) -> Vec<f64>,
    n_bits: usize,
    beta: f64,
) -> Result<f64> {
    const MAX_BITS: usize = 10;
    if n_bits > MAX_BITS {
        return Err(Error::OracleTooLarge {
            bits: n_bits,
            max: MAX_BITS,
        });
    }
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0.5, 1), got {beta}"
        )));
    }
    let size = 1usize << n_bits;
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(size);
    let mut num_classes = None;
    for u in 0..size {
        let mut bits = BitVector::zeros(n_bits);
        for i in 0..n_bits {
            if u >> i & 1 == 1 {
                bits.set(i, true);
            }
        }
        let s = score_fn(&bits);
        if s.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidInput("scores must lie in [0, 1]".into()));
        }
        match num_classes {
            None => num_classes = Some(s.len()),
            Some(k) if k != s.len() => {
                return Err(Error::InvalidInput(
                    "score function changed its class count".into(),
                ))
            }
            _ => {}
        }
        scores.push(s);
    }
    let k = num_classes.unwrap_or(0);
    if k == 0 {
        return Err(Error::InvalidInput("score function returned no classes".into()));
    }
    // Channel mass by flip weight, then exact expectations for every x.
    let mut chan = vec![0.0f64; n_bits + 1];
    for (w, c) in chan.iter_mut().enumerate() {
        *c = beta.powi((n_bits - w) as i32) * (1.0 - beta).powi(w as i32);
    }
    // Sum scores per flip weight first, then combine with the channel
    // masses; the combine order is then identical for every x, so
    // structurally equal expectations compare equal.
    let mut expectations = vec![vec![0.0f64; k]; size];
    let mut by_weight = vec![vec![0.0f64; k]; n_bits + 1];
    for x in 0..size {
        for row in by_weight.iter_mut() {
            row.fill(0.0);
        }
        for z in 0..size {
            let w = (x ^ z).count_ones() as usize;
            for c in 0..k {
                by_weight[w][c] += scores[z][c];
            }
        }
        for (w, row) in by_weight.iter().enumerate() {
            for c in 0..k {
                expectations[x][c] += chan[w] * row[c];
            }
        }
    }
    let mut max_ratio = 1.0f64;
    for x in 0..size {
        for bit in 0..n_bits {
            let x2 = x ^ (1 << bit);
            for c in 0..k {
                let (a, b) = (expectations[x][c], expectations[x2][c]);
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                if b == 0.0 {
                    return Ok(f64::INFINITY);
                }
                max_ratio = max_ratio.max(a / b);
            }
        }
    }
    Ok(max_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_probabilities_give_zero_radius() {
        let cert = dp_radius(0.6, 0.6, 9f64.ln()).unwrap();
        assert_eq!(cert.radius_real, 0.0);
        assert_eq!(cert.certified_edge_flips, 0);
    }

    #[test]
    fn worked_radius_values() {
        let eps = 9f64.ln();
        let c1 = dp_radius(0.8, 0.2, eps).unwrap();
        let expect1 = 4f64.ln() / (2.0 * eps);
        assert!((c1.radius_real - expect1).abs() < 1e-12);
        assert!((c1.radius_real - 0.315_464_876_785_728_77).abs() < 1e-9);
        assert_eq!(c1.certified_edge_flips, 0);

        let c2 = dp_radius(0.99, 0.01, eps).unwrap();
        let expect2 = 99f64.ln() / (2.0 * eps);
        assert!((c2.radius_real - expect2).abs() < 1e-12);
        assert_eq!(c2.certified_edge_flips, 1);
    }

    #[test]
    fn invalid_orderings_rejected() {
        assert!(dp_radius(0.4, 0.6, 1.0).is_err());
        assert!(dp_radius(0.8, 0.0, 1.0).is_err());
        assert!(dp_radius(0.8, 0.2, 0.0).is_err());
    }

    #[test]
    fn robustness_condition_examples() {
        let eps = 9f64.ln();
        // 0.6 > 81 * 0.4 is false at R = 1.
        assert!(!robustness_condition(&[0.6, 0.4], eps, 1).unwrap());
        // R = 0 reduces to the plain argmax margin.
        assert!(robustness_condition(&[0.6, 0.4], eps, 0).unwrap());
        // 0.99 > e^2 * 0.01 ~ 0.0739.
        assert!(robustness_condition(&[0.99, 0.01], 0.1, 10).unwrap());
        assert!(robustness_condition(&[0.5], 1.0, 0).is_err());
        assert!(robustness_condition(&[0.9, 0.3], 1.0, 0).is_err());
    }

    #[test]
    fn constant_scores_have_unit_ratio() {
        let ratio = expectation_dp_check(&|_| vec![0.25, 0.75], 6, 0.8).unwrap();
        assert_eq!(ratio, 1.0);
    }

    #[test]
    fn bit_indicator_attains_the_bound() {
        // Score = indicator of bit 0. E(x) is beta or 1-beta depending on
        // x's bit 0, so the worst single-flip ratio is exactly
        // beta/(1-beta) = e^epsilon = 9 at beta = 0.9.
        let ratio = expectation_dp_check(
            &|b| {
                let s = b.get(0) as usize as f64;
                vec![s, 1.0 - s]
            },
            8,
            0.9,
        )
        .unwrap();
        assert!((ratio - 9.0).abs() < 1e-9, "ratio {ratio}");
        let eps = crate::noise::epsilon_from_beta(0.9).unwrap();
        assert!(ratio <= eps.exp() + 1e-12);
    }

    #[test]
    fn random_score_tables_respect_the_bound() {
        use rand::{Rng, SeedableRng};
        let bound = 7.0 / 3.0 + 1e-12;
        for seed in 0..10u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let table: Vec<[f64; 2]> = (0..256)
                .map(|_| {
                    let a = rng.random::<f64>();
                    [a, 1.0 - a]
                })
                .collect();
            let ratio = expectation_dp_check(
                &move |b: &BitVector| {
                    let idx = b.ones().fold(0usize, |m, i| m | 1 << i);
                    table[idx].to_vec()
                },
                8,
                0.7,
            )
            .unwrap();
            assert!(ratio <= bound, "seed {seed}: ratio {ratio} > {bound}");
        }
    }

    proptest! {
        #[test]
        fn radius_monotonicity(
            pa in 0.5f64..0.999,
            gap in 0.001f64..0.4,
            eps in 0.1f64..3.0,
        ) {
            let pb = (pa - gap).max(1e-6);
            let base = dp_radius(pa, pb, eps).unwrap().radius_real;
            prop_assert!(dp_radius((pa + 0.0009).min(1.0), pb, eps).unwrap().radius_real >= base);
            prop_assert!(dp_radius(pa, (pb + 0.0005).min(pa), eps).unwrap().radius_real <= base);
            prop_assert!(dp_radius(pa, pb, eps + 0.1).unwrap().radius_real <= base);
            prop_assert!(base >= 0.0);
        }
    }
}
