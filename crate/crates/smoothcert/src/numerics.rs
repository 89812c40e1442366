//! Shared numeric kernels: log-factorials, stable sums of exponentials,
//! and exact big-rational to f64 conversion.
//!
//! Certificates must never be optimistic, so everything here either
//! computes in log space with compensated summation or defers to exact
//! integer/rational arithmetic.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

const LN_FACT_TABLE_SIZE: usize = 16_385;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACT_TABLE_SIZE);
        table.push(0.0);
        let mut acc = KahanSum::new();
        for k in 1..LN_FACT_TABLE_SIZE {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        table
    })
}

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.506_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    let mut acc = 0.999_999_999_999_809_93;
    for (i, c) in COEF.iter().enumerate() {
        acc += c / (x + i as f64);
    }
    let t = x + 6.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * t.ln() - t + acc.ln()
}

/// ln(n!), table-backed for the sizes this crate actually uses.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < LN_FACT_TABLE_SIZE {
        ln_fact_table()[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k); zero-width cases return 0.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact binomial coefficient.
pub fn big_choose(n: u64, k: u64) -> BigUint {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum of exp(log_term) over all terms, scaled by the max to avoid
/// underflow; empty input sums to 0.
pub fn sum_exp(log_terms: &[f64]) -> f64 {
    let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return 0.0;
    }
    let mut acc = KahanSum::new();
    for &lt in log_terms {
        acc.add((lt - m).exp());
    }
    m.exp() * acc.value()
}

/// Nearest-representable f64 for an arbitrary-precision rational. Exact
/// whenever the value is a dyadic rational with a <= 53-bit mantissa.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let numer = r.numer().abs().to_biguint().expect("abs is non-negative");
    let denom = r.denom().abs().to_biguint().expect("denominator nonzero");
    let shift: i64 = 63 - (numer.bits() as i64 - denom.bits() as i64);
    let q: BigUint = if shift >= 0 {
        (numer << shift as u64) / denom
    } else {
        numer / (denom << (-shift) as u64)
    };
    // q has ~62-64 bits; round the truncated quotient to nearest.
    let q64 = q.to_u64().expect("quotient fits in u64");
    let magnitude = (q64 as f64) * 2f64.powi(-shift as i32);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1u64..30 {
            let exact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
            assert!((ln_gamma(n as f64 + 1.0) - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn ln_choose_small_values() {
        assert!((ln_choose(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert!((ln_choose(52, 5) - 2_598_960f64.ln()).abs() < 1e-11);
        assert_eq!(ln_choose(7, 0), 0.0);
    }

    #[test]
    fn big_choose_agrees_with_pascal() {
        assert_eq!(big_choose(10, 5), BigUint::from(252u32));
        assert_eq!(
            big_choose(64, 32),
            "1832624140942590534".parse::<BigUint>().unwrap()
        );
    }

    #[test]
    fn sum_exp_handles_scaling() {
        let logs = [-700.0, -700.0f64.next_down(), -701.0];
        let direct: f64 = logs.iter().map(|l| l.exp()).sum();
        assert!((sum_exp(&logs) - direct).abs() <= 1e-15 * direct.max(1e-300));
        assert_eq!(sum_exp(&[]), 0.0);
    }

    #[test]
    fn ratio_to_f64_exact_on_dyadics() {
        let r = BigRational::new(BigInt::from(11), BigInt::from(1024));
        assert_eq!(ratio_to_f64(&r), 11.0 / 1024.0);
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((ratio_to_f64(&third) - 1.0 / 3.0).abs() < 1e-16);
        let neg = BigRational::new(BigInt::from(-7), BigInt::from(8));
        assert_eq!(ratio_to_f64(&neg), -0.875);
        // Huge numerator/denominator pair reducing to ~e.
        let big = BigRational::new(
            BigInt::from(271_828_182_845_904_52u64),
            BigInt::from(10_000_000_000_000_000u64),
        );
        assert!((ratio_to_f64(&big) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn ratio_to_f64_exact_from_float_roundtrip() {
        for x in [0.7, 0.9, 0.001953125, 1.0 - 1e-9] {
            let r = BigRational::from_float(x).unwrap();
            assert_eq!(ratio_to_f64(&r), x);
        }
    }
}
