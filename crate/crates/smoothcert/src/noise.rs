//! The Bernoulli edge-flip channel used for smoothing.
//!
//! Each edge bit is kept with probability `beta` and flipped with
//! probability `1 - beta`. The same channel is described elsewhere by the
//! privacy parameter `epsilon = ln(beta / (1 - beta))`; both
//! parameterizations are exposed and kept exactly consistent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitgraph::BitVector;
use crate::error::{Error, Result};

/// Noise level of the flip channel, in both parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    /// Keep-probability, in (0.5, 1).
    pub beta: f64,
    /// ln(beta / (1 - beta)), always > 0 on the admissible range.
    pub epsilon: f64,
    /// Per-bit flip probability, 1 - beta = 1 / (1 + e^epsilon).
    pub flip_prob: f64,
}

impl SmoothingParams {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in (0.5, 1), got {beta}"
            )));
        }
        Ok(SmoothingParams {
            beta,
            epsilon: epsilon_from_beta(beta)?,
            flip_prob: 1.0 - beta,
        })
    }

    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        Self::from_beta(beta_from_epsilon(epsilon)?)
    }
}

/// epsilon = ln(beta / (1 - beta)). Requires beta in (0.5, 1) so that the
/// channel prefers keeping a bit over flipping it.
pub fn epsilon_from_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0.5, 1), got {beta}"
        )));
    }
    Ok((beta / (1.0 - beta)).ln())
}

/// Inverse of [`epsilon_from_beta`]: beta = 1 / (1 + e^-epsilon).
pub fn beta_from_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(1.0 / (1.0 + (-epsilon).exp()))
}

/// Counter-based noise source: the bits produced for `(seed, index)` are a
/// pure function of those two values, so Monte Carlo runs are reproducible
/// under any parallel schedule or worker count.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSampler {
    seed: u64,
}

impl NoiseSampler {
    pub fn new(seed: u64) -> Self {
        NoiseSampler { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives a sampler for an independent substream (one per dataset
    /// instance, training epoch, ...). SplitMix64 finalizer keeps distinct
    /// (seed, stream) pairs well separated.
    pub fn substream(&self, stream: u64) -> NoiseSampler {
        NoiseSampler {
            seed: splitmix64(self.seed ^ splitmix64(stream)),
        }
    }

    /// Draws the noise vector for one sample index: each bit is set
    /// (flipped) independently with probability `params.flip_prob`.
    pub fn sample(&self, len: usize, params: &SmoothingParams, index: u64) -> BitVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index.into());
        let mut bits = BitVector::zeros(len);
        for i in 0..len {
            if rng.random::<f64>() < params.flip_prob {
                bits.set(i, true);
            }
        }
        bits
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Convenience wrapper matching the operation name used throughout the
/// pipeline: one noise draw, fully determined by `(sampler.seed, index)`.
pub fn sample_noise(
    len: usize,
    params: &SmoothingParams,
    sampler: &NoiseSampler,
    index: u64,
) -> BitVector {
    sampler.sample(len, params, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn epsilon_beta_worked_values() {
        // ln 9 <-> 0.9
        let beta = beta_from_epsilon(9f64.ln()).unwrap();
        assert!((beta - 0.9).abs() < 1e-12, "beta = {beta}");
        // 0.7 -> ln(7/3)
        let eps = epsilon_from_beta(0.7).unwrap();
        assert!((eps - (7f64 / 3.0).ln()).abs() < 1e-12, "eps = {eps}");
        assert!((eps - 0.847_297_860_387_203_4).abs() < 1e-7);
    }

    #[test]
    fn out_of_range_parameters_rejected() {
        assert!(epsilon_from_beta(0.5).is_err());
        assert!(epsilon_from_beta(0.3).is_err());
        assert!(epsilon_from_beta(1.0).is_err());
        assert!(beta_from_epsilon(0.0).is_err());
        assert!(beta_from_epsilon(-1.0).is_err());
        assert!(SmoothingParams::from_beta(0.5).is_err());
    }

    #[test]
    fn flip_prob_matches_logistic_form() {
        for beta in [0.6, 0.7, 0.8, 0.9, 0.99, 0.999] {
            let p = SmoothingParams::from_beta(beta).unwrap();
            let from_eps = 1.0 / (1.0 + p.epsilon.exp());
            assert!(
                (p.flip_prob - from_eps).abs() <= 1e-12,
                "beta {beta}: {} vs {}",
                p.flip_prob,
                from_eps
            );
        }
    }

    #[test]
    fn channel_satisfies_pointwise_dp_bound() {
        // For each (input c, output o) of the single-bit channel, the
        // likelihood ratio against the neighboring input c^1 is either
        // beta/(1-beta) or its reciprocal; the max is exactly e^epsilon.
        for beta in [0.7, 0.9] {
            let p = SmoothingParams::from_beta(beta).unwrap();
            let cond = |o: u8, c: u8| if o == c { p.beta } else { p.flip_prob };
            let mut max_ratio = 0f64;
            for c in [0u8, 1] {
                for o in [0u8, 1] {
                    let r = cond(o, c) / cond(o, c ^ 1);
                    assert!(r <= p.epsilon.exp() * (1.0 + 1e-15));
                    max_ratio = max_ratio.max(r);
                }
            }
            assert!(
                (max_ratio - p.epsilon.exp()).abs() < 1e-12,
                "bound must be attained"
            );
        }
    }

    #[test]
    fn near_degenerate_beta_yields_almost_no_flips() {
        let params = SmoothingParams::from_beta(0.999_999).unwrap();
        let sampler = NoiseSampler::new(7);
        let total: usize = (0..100)
            .map(|i| sampler.sample(64, &params, i).count_ones())
            .sum();
        assert!(total <= 1, "got {total} set bits over 100 draws");
    }

    #[test]
    fn flip_fraction_matches_binomial_moments() {
        let params = SmoothingParams::from_beta(0.7).unwrap();
        let sampler = NoiseSampler::new(20260810);
        let ones = sampler.sample(10_000, &params, 0).count_ones() as f64;
        let frac = ones / 10_000.0;
        // 0.3 +- 3 * sqrt(0.21 / 10000)
        assert!((frac - 0.3).abs() <= 0.0137, "fraction {frac}");
    }

    #[test]
    fn same_seed_and_index_is_schedule_independent() {
        let params = SmoothingParams::from_beta(0.8).unwrap();
        let sampler = NoiseSampler::new(99);
        let sequential: Vec<BitVector> =
            (0..32).map(|i| sampler.sample(100, &params, i)).collect();
        // Same draws issued from parallel workers in scrambled order.
        let mut scrambled: Vec<(u64, BitVector)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..4)
                .map(|w| {
                    s.spawn(move || {
                        (0..32)
                            .rev()
                            .filter(|i| i % 4 == w)
                            .map(|i| (i, sampler.sample(100, &params, i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().unwrap())
                .collect()
        });
        scrambled.sort_by_key(|(i, _)| *i);
        for (i, bits) in scrambled {
            assert_eq!(bits, sequential[i as usize]);
        }
    }

    #[test]
    fn distinct_indices_and_substreams_decorrelate() {
        let params = SmoothingParams::from_beta(0.7).unwrap();
        let sampler = NoiseSampler::new(1);
        assert_ne!(
            sampler.sample(200, &params, 0),
            sampler.sample(200, &params, 1)
        );
        assert_ne!(
            sampler.sample(200, &params, 0),
            sampler.substream(1).sample(200, &params, 0)
        );
        // Empirical pairwise independence of two fixed positions: the
        // joint (1,1) frequency over many draws must match flip_prob^2.
        let draws = 20_000;
        let mut joint = 0usize;
        let mut first = 0usize;
        let mut second = 0usize;
        for i in 0..draws {
            let v = sampler.sample(2, &params, i);
            let (a, b) = (v.get(0), v.get(1));
            first += a as usize;
            second += b as usize;
            joint += (a && b) as usize;
        }
        let p = params.flip_prob;
        let sd = (p * p * (1.0 - p * p) / draws as f64).sqrt();
        assert!((joint as f64 / draws as f64 - p * p).abs() < 4.0 * sd);
        let sd1 = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((first as f64 / draws as f64 - p).abs() < 4.0 * sd1);
        assert!((second as f64 / draws as f64 - p).abs() < 4.0 * sd1);
    }

    proptest! {
        #[test]
        fn beta_epsilon_roundtrip(beta in 0.5000001f64..0.9999999) {
            let eps = epsilon_from_beta(beta).unwrap();
            let back = beta_from_epsilon(eps).unwrap();
            prop_assert!((back - beta).abs() <= 1e-12);
        }
    }
}
