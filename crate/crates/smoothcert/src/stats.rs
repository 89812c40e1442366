//! Confidence machinery for certification: exact one-sided
//! Clopper-Pearson lower bounds and the two-sided binomial selection test.
//!
//! No normal or Poisson approximations anywhere: radii derived from these
//! quantities are claimed certificates, so tails are exact sums. Values at
//! p0 = 1/2 go through big-integer arithmetic and are bit-exact.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::{ln_choose, ratio_to_f64, sum_exp};

/// Per-class Monte Carlo counts with their total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    counts: Vec<u64>,
}

impl SampleCounts {
    pub fn new(num_classes: usize) -> Self {
        assert!(num_classes >= 1, "need at least one class");
        SampleCounts {
            counts: vec![0; num_classes],
        }
    }

    pub fn record(&mut self, class: usize) {
        self.counts[class] += 1;
    }

    pub fn merge(&mut self, other: &SampleCounts) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Top class and runner-up by count; ties resolved toward the smaller
    /// class index so results are deterministic. Runner-up is `None` only
    /// for single-class problems.
    pub fn top_two(&self) -> ((usize, u64), Option<(usize, u64)>) {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        order.sort_by_key(|&c| (std::cmp::Reverse(self.counts[c]), c));
        let top = (order[0], self.counts[order[0]]);
        let runner = order.get(1).map(|&c| (c, self.counts[c]));
        (top, runner)
    }
}

/// P(X >= k) for X ~ Binomial(n, p), exact log-space summation.
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let logs: Vec<f64> = (k..=n)
        .map(|j| ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq)
        .collect();
    sum_exp(&logs).min(1.0)
}

/// P(X <= k) for X ~ Binomial(n, p), exact log-space summation.
pub fn binomial_lower_tail(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let logs: Vec<f64> = (0..=k)
        .map(|j| ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq)
        .collect();
    sum_exp(&logs).min(1.0)
}

/// One-sided Clopper-Pearson lower confidence limit: the largest p such
/// that the Binomial(trials, p) upper tail at `successes` is alpha
/// (= 1 - confidence). Returns 0 when successes = 0. Solved by bisection
/// on the exact tail, rounded toward the conservative side.
pub fn clopper_pearson_lower(successes: u64, trials: u64, confidence: f64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidInput(
            "Clopper-Pearson bound needs at least one trial".into(),
        ));
    }
    if successes > trials {
        return Err(Error::InvalidInput(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    let alpha = 1.0 - confidence;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if successes == 0 {
        return Ok(0.0);
    }
    // The tail is p-independent in its binomial coefficients; the closure
    // recomputes only the p-dependent part per bisection step.
    let ln_coeffs: Vec<f64> = (successes..=trials).map(|j| ln_choose(trials, j)).collect();
    let tail = |p: f64| -> f64 {
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let logs: Vec<f64> = ln_coeffs
            .iter()
            .zip(successes..=trials)
            .map(|(lc, j)| lc + j as f64 * lp + (trials - j) as f64 * lq)
            .collect();
        sum_exp(&logs)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Two-sided binomial test p-value: min(1, 2 * min(P(X <= k), P(X >= k)))
/// under Binomial(n, p0). The doubled-smaller-tail convention keeps the
/// statistic symmetric at p0 = 1/2, where it is computed bit-exactly with
/// big integers.
pub fn binomial_two_sided_pvalue(k: u64, n: u64, p0: f64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p0 must lie in (0, 1), got {p0}"
        )));
    }
    let (lower, upper) = if p0 == 0.5 {
        half_tails_exact(k, n)
    } else {
        (binomial_lower_tail(k, n, p0), binomial_upper_tail(k, n, p0))
    };
    Ok((2.0 * lower.min(upper)).min(1.0))
}

/// Exact comparison of the Binomial(n, p) upper tail at k against a
/// threshold, entirely in big-integer arithmetic.
///
/// Every f64 is a dyadic rational, so P(X >= k) = S / 2^(s n) with
/// S = sum_j C(n,j) a^j (2^s - a)^(n-j) an integer, and the comparison
/// against threshold c / 2^t reduces to S 2^t <=> c 2^(s n). This is the
/// validation route for the log-space tails above; it shares no
/// floating-point path with them.
pub fn exact_upper_tail_cmp(k: u64, n: u64, p: f64, threshold: f64) -> std::cmp::Ordering {
    assert!(p > 0.0 && p < 1.0 && k >= 1 && k <= n);
    assert!(threshold > 0.0 && threshold < 1.0);
    let (a, s) = dyadic_parts(p);
    let b = (BigUint::one() << s) - &a;
    // C(n, k) by multiplicative recurrence, then powers stepped per term.
    let mut coeff = BigUint::one();
    for j in 0..k {
        coeff = coeff * (n - j) / (j + 1);
    }
    let mut apow = a.pow(k as u32);
    let mut bpow = b.pow((n - k) as u32);
    let mut sum = BigUint::zero();
    for j in k..=n {
        sum += &coeff * &apow * &bpow;
        if j < n {
            coeff = coeff * (n - j) / (j + 1);
            apow *= &a;
            bpow /= &b; // exact: bpow is a power of b
        }
    }
    let (c, t) = dyadic_parts(threshold);
    (sum << t).cmp(&(c << (s * n)))
}

/// Decomposes x in (0, 1) as a / 2^s exactly.
fn dyadic_parts(x: f64) -> (BigUint, u64) {
    let r = BigRational::from_float(x).expect("finite f64");
    let s = r.denom().bits() - 1;
    let a = r.numer().to_biguint().expect("positive");
    debug_assert_eq!(r.denom().to_biguint().unwrap(), BigUint::one() << s);
    (a, s)
}

/// Both tails of Binomial(n, 1/2) as exactly rounded f64: sums of binomial
/// coefficients over 2^n.
fn half_tails_exact(k: u64, n: u64) -> (f64, f64) {
    let mut below = BigUint::zero();
    let mut at_or_above = BigUint::zero();
    let mut coeff = BigUint::one(); // C(n, 0)
    for j in 0..=n {
        if j > 0 {
            coeff = coeff * (n - j + 1) / j;
        }
        if j <= k {
            below += &coeff;
        }
        if j >= k {
            at_or_above += &coeff;
        }
    }
    let denom = BigUint::one() << n;
    let to_f64 = |num: BigUint| {
        ratio_to_f64(&BigRational::new(num.into(), denom.clone().into()))
    };
    (to_f64(below), to_f64(at_or_above))
}
