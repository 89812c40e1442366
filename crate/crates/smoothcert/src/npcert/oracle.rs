//! Exhaustive-enumeration oracles that validate the region calculus and
//! the full certificate on small inputs.
//!
//! These deliberately avoid the closed forms used by the implementation:
//! probabilities come from walking every noise pattern, and worst-case
//! bounds from an atom-level greedy over individual outcomes. Costs are
//! exponential by design, so enumeration sizes are hard-capped.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bitgraph::{BitVector, Perturbation};
use crate::classifier::BitClassifier;
use crate::error::{Error, Result};
use crate::npcert::certified_radius_exact;
use crate::numerics::ratio_to_f64;

/// Enumeration cap for region-probability and bound oracles (2^12 atoms).
pub const MAX_REGION_ORACLE_BITS: usize = 12;

/// Enumeration cap for the end-to-end soundness oracle: it enumerates
/// noise patterns *and* perturbations, so it is kept tighter.
pub const MAX_E2E_ORACLE_BITS: usize = 10;

fn mask_of(bits: &BitVector) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.ones().fold(0u64, |m, i| m | 1 << i)
}

fn check_len(len: usize, max: usize) -> Result<()> {
    if len > max {
        return Err(Error::OracleTooLarge { bits: len, max });
    }
    Ok(())
}

/// beta^(n-w) (1-beta)^w for w = 0..=n, with beta taken as the exact
/// rational value of the f64.
fn channel_powers(n: usize, beta: f64) -> Vec<BigRational> {
    let keep = BigRational::from_float(beta).expect("finite beta");
    let flip = BigRational::one() - &keep;
    let mut pw = vec![BigRational::one(); n + 1];
    for w in 0..=n {
        let mut v = BigRational::one();
        for _ in 0..(n - w) {
            v *= &keep;
        }
        for _ in 0..w {
            v *= &flip;
        }
        pw[w] = v;
    }
    pw
}

/// Exact region probabilities by brute force: every noise pattern z is
/// enumerated, the outcome is bucketed by e = d(outcome, attacked) -
/// d(outcome, clean), and bucket masses are summed for noise centered at
/// the clean input (prob_x) and at the attacked input (prob_y).
pub fn oracle_region_probs(
    x: &BitVector,
    d: &Perturbation,
    beta: f64,
) -> Result<BTreeMap<i64, (BigRational, BigRational)>> {
    check_len(x.len(), MAX_REGION_ORACLE_BITS)?;
    if d.delta().len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: d.delta().len(),
        });
    }
    let n = x.len();
    let dm = mask_of(d.delta());
    // counts[side][(w, e)]: number of noise patterns of weight w whose
    // outcome lands in region e, for noise centered at x (side 0) and at
    // x^d (side 1).
    let mut counts_x: BTreeMap<(u32, i64), u64> = BTreeMap::new();
    let mut counts_y: BTreeMap<(u32, i64), u64> = BTreeMap::new();
    for z in 0u64..1 << n {
        let w = z.count_ones();
        // Outcome x^z: distance to x is w, distance to x^d is pop(z^d).
        let e_x = (z ^ dm).count_ones() as i64 - w as i64;
        *counts_x.entry((w, e_x)).or_default() += 1;
        // Outcome (x^d)^z: distance to x^d is w, distance to x is pop(z^d).
        let e_y = w as i64 - (z ^ dm).count_ones() as i64;
        *counts_y.entry((w, e_y)).or_default() += 1;
    }
    let pw = channel_powers(n, beta);
    let mut out: BTreeMap<i64, (BigRational, BigRational)> = BTreeMap::new();
    for (&(w, e), &c) in &counts_x {
        let mass = &pw[w as usize] * BigRational::from(num_bigint::BigInt::from(c));
        out.entry(e).or_insert_with(|| (BigRational::zero(), BigRational::zero())).0 += mass;
    }
    for (&(w, e), &c) in &counts_y {
        let mass = &pw[w as usize] * BigRational::from(num_bigint::BigInt::from(c));
        out.entry(e).or_insert_with(|| (BigRational::zero(), BigRational::zero())).1 += mass;
    }
    Ok(out)
}

/// Atom-level greedy bounds: sorts the 2^n individual outcomes by exact
/// likelihood ratio and fills the X-mass budget one atom at a time,
/// splitting the final atom fractionally. Region structure is never
/// assumed, which is what makes this an oracle for the region-level fill.
fn atom_greedy(
    x: &BitVector,
    d: &Perturbation,
    beta: f64,
    budget: &BigRational,
    descending: bool,
) -> Result<BigRational> {
    check_len(x.len(), MAX_REGION_ORACLE_BITS)?;
    if d.delta().len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: d.delta().len(),
        });
    }
    let n = x.len();
    let xm = mask_of(x);
    let ym = xm ^ mask_of(d.delta());
    let pw = channel_powers(n, beta);
    let mut atoms: Vec<(BigRational, &BigRational, &BigRational)> = (0u64..1 << n)
        .map(|z| {
            let px = &pw[(z ^ xm).count_ones() as usize];
            let py = &pw[(z ^ ym).count_ones() as usize];
            (px / py, px, py)
        })
        .collect();
    atoms.sort_by(|a, b| if descending { b.0.cmp(&a.0) } else { a.0.cmp(&b.0) });
    let mut remaining = budget.clone();
    let mut y = BigRational::zero();
    for (_, px, py) in &atoms {
        if remaining <= BigRational::zero() {
            break;
        }
        if *px <= &remaining {
            y += *py;
            remaining -= *px;
        } else {
            y += &remaining * *py / *px;
            remaining = BigRational::zero();
        }
    }
    Ok(y)
}

/// Atom-level oracle for the lower bound on the top class under attack.
pub fn oracle_lower_bound_ya(
    x: &BitVector,
    d: &Perturbation,
    beta: f64,
    pa_lower: &BigRational,
) -> Result<BigRational> {
    atom_greedy(x, d, beta, pa_lower, true)
}

/// Atom-level oracle for the upper bound on the runner-up under attack.
pub fn oracle_upper_bound_yb(
    x: &BitVector,
    d: &Perturbation,
    beta: f64,
    pb_upper: &BigRational,
) -> Result<BigRational> {
    atom_greedy(x, d, beta, pb_upper, false)
}

/// Exact class distribution of the smoothed classifier at `x`: every
/// noise pattern is enumerated and weighted by its exact channel mass.
pub fn exact_smoothed_distribution(
    f: &dyn BitClassifier,
    x: &BitVector,
    beta: f64,
) -> Result<Vec<BigRational>> {
    check_len(x.len(), MAX_REGION_ORACLE_BITS)?;
    let table = classify_all(f, x.len())?;
    Ok(distribution_at(&table, x.len(), mask_of(x), beta, f.num_classes()))
}

fn classify_all(f: &dyn BitClassifier, n: usize) -> Result<Vec<usize>> {
    let k = f.num_classes();
    (0u64..1 << n)
        .map(|u| {
            let mut bits = BitVector::zeros(n);
            for i in 0..n {
                if u >> i & 1 == 1 {
                    bits.set(i, true);
                }
            }
            let c = f.classify(&bits)?;
            if c >= k {
                return Err(Error::InvalidInput(format!(
                    "classifier returned class {c} outside [0, {k})"
                )));
            }
            Ok(c)
        })
        .collect()
}

fn distribution_at(
    table: &[usize],
    n: usize,
    point: u64,
    beta: f64,
    num_classes: usize,
) -> Vec<BigRational> {
    let mut weight_counts = vec![vec![0u64; n + 1]; num_classes];
    for (z, &c) in table.iter().enumerate() {
        weight_counts[c][(z as u64 ^ point).count_ones() as usize] += 1;
    }
    let pw = channel_powers(n, beta);
    weight_counts
        .into_iter()
        .map(|counts| {
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(w, &c)| &pw[w] * BigRational::from(num_bigint::BigInt::from(c)))
                .sum()
        })
        .collect()
}

/// One certified prediction the exhaustive check found to be wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// The offending perturbation, as a bit mask over the input.
    pub delta_mask: u64,
    /// Its L0 weight (always <= the claimed radius).
    pub weight: u64,
    /// Smoothed argmax at the attacked input, None on an exact tie.
    pub winner: Option<usize>,
}

/// Result of the end-to-end soundness oracle.
#[derive(Debug, Clone)]
pub struct EndToEndReport {
    /// Smoothed prediction at the clean input.
    pub certified_class: usize,
    /// Its exact probability (f64 rendering of the exact rational).
    pub pa_exact: f64,
    /// Radius from the exact-probability certificate; 0 when abstained.
    pub radius: u64,
    /// True when the exact top probability does not clear 1/2, in which
    /// case no certificate is claimed and nothing is checked.
    pub abstained: bool,
    /// Every perturbation within the radius that broke the prediction.
    /// Soundness means this is empty.
    pub violations: Vec<Violation>,
}

/// Certifies `x` with the *exact* smoothed probabilities (no Monte
/// Carlo), then exhaustively verifies the claim: for every perturbation
/// of weight up to the certified radius, the exact smoothed argmax at the
/// attacked input must still be the certified class.
pub fn oracle_end_to_end(
    f: &dyn BitClassifier,
    x: &BitVector,
    beta: f64,
    l_max: u64,
) -> Result<EndToEndReport> {
    check_len(x.len(), MAX_E2E_ORACLE_BITS)?;
    let n = x.len();
    let k = f.num_classes();
    let table = classify_all(f, n)?;
    let xm = mask_of(x);
    let dist = distribution_at(&table, n, xm, beta, k);
    let c_a = (0..k).max_by(|&a, &b| dist[a].cmp(&dist[b]).then(b.cmp(&a))).expect("k >= 1");
    let pa = dist[c_a].clone();
    let half = BigRational::new(1.into(), 2.into());
    if pa <= half {
        return Ok(EndToEndReport {
            certified_class: c_a,
            pa_exact: ratio_to_f64(&pa),
            radius: 0,
            abstained: true,
            violations: Vec::new(),
        });
    }
    let pb = BigRational::one() - &pa;
    let radius = certified_radius_exact(&pa, &pb, beta, l_max.min(n as u64))?;
    let mut violations = Vec::new();
    if radius > 0 {
        for dm in 1u64..1 << n {
            let w = u64::from(dm.count_ones());
            if w > radius {
                continue;
            }
            let attacked = distribution_at(&table, n, xm ^ dm, beta, k);
            let strictly_top = (0..k).all(|c| c == c_a || attacked[c_a] > attacked[c]);
            if !strictly_top {
                let winner = (0..k)
                    .max_by(|&a, &b| attacked[a].cmp(&attacked[b]).then(b.cmp(&a)))
                    .filter(|&w0| (0..k).all(|c| c == w0 || attacked[w0] > attacked[c]));
                violations.push(Violation {
                    delta_mask: dm,
                    weight: w,
                    winner,
                });
            }
        }
    }
    Ok(EndToEndReport {
        certified_class: c_a,
        pa_exact: ratio_to_f64(&pa),
        radius,
        abstained: false,
        violations,
    })
}
