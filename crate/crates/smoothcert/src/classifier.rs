//! Minimal interface a base classifier must expose to be smoothed.

use crate::bitgraph::BitVector;
use crate::error::Result;

/// A deterministic total classifier over bit vectors.
///
/// `Sync` so Monte Carlo sampling can query one instance from many
/// threads; implementations must not mutate shared state in `classify`.
pub trait BitClassifier: Sync {
    /// Number of classes K; outputs of `classify` lie in [0, K).
    fn num_classes(&self) -> usize;

    /// Class of one input. Errors abort the whole certification run:
    /// a certificate must never silently drop samples.
    fn classify(&self, bits: &BitVector) -> Result<usize>;
}

/// Wraps a plain function as a classifier; used by tests and oracles.
pub struct FnClassifier<F: Fn(&BitVector) -> usize + Sync> {
    num_classes: usize,
    f: F,
}

impl<F: Fn(&BitVector) -> usize + Sync> FnClassifier<F> {
    pub fn new(num_classes: usize, f: F) -> Self {
        FnClassifier { num_classes, f }
    }
}

impl<F: Fn(&BitVector) -> usize + Sync> BitClassifier for FnClassifier<F> {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn classify(&self, bits: &BitVector) -> Result<usize> {
        Ok((self.f)(bits))
    }
}
