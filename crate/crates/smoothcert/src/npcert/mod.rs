//! The tight discrete likelihood-ratio certificate.
//!
//! For a perturbation of weight `l` under the flip channel, the sample
//! space splits into regions H(e) of constant likelihood ratio
//! (beta/(1-beta))^e between the clean-centered and attack-centered noise
//! distributions, with e ranging over {-l, -l+2, ..., l}. Out-of-support
//! bits cancel in the ratio, so the table depends only on (l, beta).
//!
//! Worst-case bounds over all classifiers consistent with the observed
//! class probabilities come from a greedy fill over those regions (the
//! discrete Neyman-Pearson construction): the lower bound on the top
//! class fills X-mass in descending ratio order, the upper bound on the
//! runner-up fills in ascending ratio order, each splitting its boundary
//! region fractionally. See `docs/certificate-math.md` for the derivation
//! and the direction conventions.
//!
//! Numeric policy: exact rational arithmetic up to l = 64; log-space
//! probabilities with compensated summation beyond, where the certifying
//! inequality must additionally clear a 1e-12 margin so that rounding can
//! only ever shrink a radius, never grow it.

pub mod oracle;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{big_choose, ln_choose, ratio_to_f64, KahanSum};

/// Largest perturbation weight handled in exact rational arithmetic.
pub const EXACT_L_MAX: u64 = 64;

/// Safety margin for the strict certifying inequality in log-space mode.
pub const LOG_MODE_MARGIN: f64 = 1e-12;

/// Which arithmetic backed a table or certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericMode {
    ExactRational,
    LogSpace,
}

/// One likelihood-ratio region, f64 view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    /// Hamming-distance difference d(z, attacked) - d(z, clean).
    pub e: i64,
    /// Support bits agreeing with the clean input: a = (l + e) / 2.
    pub agree: u64,
    /// Mass of the region under noise centered at the clean input.
    pub prob_x: f64,
    /// Mass under noise centered at the attacked input.
    pub prob_y: f64,
    /// Density ratio prob_x / prob_y = (beta/(1-beta))^e.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ExactRegionTable {
    l: u64,
    beta: BigRational,
    /// Regions in descending e (= descending ratio for beta > 1/2).
    regions: Vec<(i64, BigRational, BigRational)>,
}

impl ExactRegionTable {
    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    /// (e, prob_x, prob_y) in descending e.
    pub fn regions(&self) -> &[(i64, BigRational, BigRational)] {
        &self.regions
    }
}

#[derive(Debug, Clone)]
pub struct LogRegionTable {
    l: u64,
    beta: f64,
    /// Regions in descending e; probabilities already exponentiated.
    regions: Vec<(i64, f64, f64)>,
}

impl LogRegionTable {
    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Per-perturbation-size region table in one of the two numeric modes.
#[derive(Debug, Clone)]
pub enum RegionTable {
    Exact(ExactRegionTable),
    Log(LogRegionTable),
}

impl RegionTable {
    pub fn l(&self) -> u64 {
        match self {
            RegionTable::Exact(t) => t.l,
            RegionTable::Log(t) => t.l,
        }
    }

    pub fn mode(&self) -> NumericMode {
        match self {
            RegionTable::Exact(_) => NumericMode::ExactRational,
            RegionTable::Log(_) => NumericMode::LogSpace,
        }
    }

    /// f64 view of the regions, descending e.
    pub fn entries(&self) -> Vec<Region> {
        let l = self.l();
        let view = |(e, px, py): (i64, f64, f64)| Region {
            e,
            agree: ((l as i64 + e) / 2) as u64,
            prob_x: px,
            prob_y: py,
            ratio: if py > 0.0 { px / py } else { f64::INFINITY },
        };
        match self {
            RegionTable::Exact(t) => t
                .regions
                .iter()
                .map(|(e, px, py)| view((*e, ratio_to_f64(px), ratio_to_f64(py))))
                .collect(),
            RegionTable::Log(t) => t.regions.iter().map(|&r| view(r)).collect(),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0.5, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Builds the region table for perturbation weight l, choosing exact
/// rational arithmetic for l <= EXACT_L_MAX and log-space beyond.
pub fn region_table(l: u64, beta: f64) -> Result<RegionTable> {
    if l <= EXACT_L_MAX {
        Ok(RegionTable::Exact(region_table_exact(l, beta)?))
    } else {
        Ok(RegionTable::Log(region_table_log(l, beta)?))
    }
}

/// Exact table: prob_x(e) = C(l, a) beta^a (1-beta)^(l-a) with
/// a = (l+e)/2, prob_y(e) = prob_x(-e). beta is taken as the exact
/// rational value of the given f64.
pub fn region_table_exact(l: u64, beta: f64) -> Result<ExactRegionTable> {
    check_beta(beta)?;
    if l == 0 {
        return Err(Error::InvalidParameter(
            "region table needs l >= 1; weight-0 perturbations certify trivially".into(),
        ));
    }
    let beta_r = BigRational::from_float(beta).expect("beta is finite");
    let keep = beta_r.clone();
    let flip = BigRational::one() - &keep;
    // keep^a and flip^a for a = 0..=l, stepped incrementally.
    let mut keep_pows = vec![BigRational::one()];
    let mut flip_pows = vec![BigRational::one()];
    for a in 1..=l as usize {
        let k = keep_pows[a - 1].clone() * &keep;
        keep_pows.push(k);
        let f = flip_pows[a - 1].clone() * &flip;
        flip_pows.push(f);
    }
    let mut regions = Vec::new();
    for a in (0..=l).rev() {
        let e = 2 * a as i64 - l as i64;
        let coeff = BigRational::from(num_bigint::BigInt::from(big_choose(l, a)));
        let px = &coeff * &keep_pows[a as usize] * &flip_pows[(l - a) as usize];
        let py = &coeff * &keep_pows[(l - a) as usize] * &flip_pows[a as usize];
        regions.push((e, px, py));
    }
    Ok(ExactRegionTable {
        l,
        beta: beta_r,
        regions,
    })
}

/// Log-space table; region probabilities exponentiated to f64. Underflow
/// rounds a probability to zero, which can only make the resulting bounds
/// more conservative.
pub fn region_table_log(l: u64, beta: f64) -> Result<LogRegionTable> {
    check_beta(beta)?;
    if l == 0 {
        return Err(Error::InvalidParameter(
            "region table needs l >= 1; weight-0 perturbations certify trivially".into(),
        ));
    }
    let (lk, lf) = (beta.ln(), (1.0 - beta).ln());
    let regions = (0..=l)
        .rev()
        .map(|a| {
            let e = 2 * a as i64 - l as i64;
            let lc = ln_choose(l, a);
            let px = (lc + a as f64 * lk + (l - a) as f64 * lf).exp();
            let py = (lc + (l - a) as f64 * lk + a as f64 * lf).exp();
            (e, px, py)
        })
        .collect();
    Ok(LogRegionTable { l, beta, regions })
}

fn check_budget(name: &str, p: f64, allow_zero: bool, allow_one: bool) -> Result<()> {
    let lo_ok = if allow_zero { p >= 0.0 } else { p > 0.0 };
    let hi_ok = if allow_one { p <= 1.0 } else { p < 1.0 };
    if !(lo_ok && hi_ok && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} out of range: {p}"
        )));
    }
    Ok(())
}

/// Exact greedy fill. `order` yields regions in the order mass is taken;
/// returns the Y-mass of the filled set.
fn fill_exact<'a>(
    order: impl Iterator<Item = &'a (i64, BigRational, BigRational)>,
    budget: &BigRational,
) -> BigRational {
    let mut remaining = budget.clone();
    let mut y = BigRational::zero();
    for (_, px, py) in order {
        if remaining <= BigRational::zero() {
            break;
        }
        if *px <= remaining {
            y += py;
            remaining -= px;
        } else {
            // Fractional boundary region: take remaining/px of it.
            y += &remaining * py / px;
            remaining = BigRational::zero();
        }
    }
    y
}

/// f64 greedy fill with compensated accumulation.
fn fill_f64<'a>(order: impl Iterator<Item = &'a (i64, f64, f64)>, budget: f64) -> f64 {
    let mut remaining = budget;
    let mut y = KahanSum::new();
    for &(_, px, py) in order {
        if remaining <= 0.0 {
            break;
        }
        if px <= remaining {
            y.add(py);
            remaining -= px;
        } else {
            y.add(remaining * (py / px));
            remaining = 0.0;
        }
    }
    y.value().min(1.0)
}

/// Tight lower bound on the attacked-input probability of the top class:
/// greedy fill of X-mass `pa_lower` over regions in descending ratio
/// order (worst-case classifiers spend their mass where it is cheapest
/// under Y).
pub fn lower_bound_ya(pa_lower: f64, table: &RegionTable) -> Result<f64> {
    check_budget("pA lower bound", pa_lower, false, true)?;
    Ok(match table {
        RegionTable::Exact(t) => ratio_to_f64(&lower_bound_ya_exact(
            &BigRational::from_float(pa_lower).expect("finite"),
            t,
        )),
        RegionTable::Log(t) => fill_f64(t.regions.iter(), pa_lower),
    })
}

/// Exact-rational form of [`lower_bound_ya`].
pub fn lower_bound_ya_exact(pa_lower: &BigRational, table: &ExactRegionTable) -> BigRational {
    fill_exact(table.regions.iter(), pa_lower)
}

/// Tight upper bound on the attacked-input probability of the runner-up
/// class: greedy fill of X-mass `pb_upper` in ascending ratio order.
pub fn upper_bound_yb(pb_upper: f64, table: &RegionTable) -> Result<f64> {
    check_budget("pB upper bound", pb_upper, true, false)?;
    Ok(match table {
        RegionTable::Exact(t) => ratio_to_f64(&upper_bound_yb_exact(
            &BigRational::from_float(pb_upper).expect("finite"),
            t,
        )),
        RegionTable::Log(t) => fill_f64(t.regions.iter().rev(), pb_upper),
    })
}

/// Exact-rational form of [`upper_bound_yb`].
pub fn upper_bound_yb_exact(pb_upper: &BigRational, table: &ExactRegionTable) -> BigRational {
    fill_exact(table.regions.iter().rev(), pb_upper)
}

/// Outcome of the max-radius search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpCertificate {
    /// Largest weight L such that the certifying inequality holds for
    /// every l in 1..=L (0 when it already fails at l = 1).
    pub radius: u64,
    /// (lower_yA, upper_yB) at l = radius; None when radius = 0.
    pub bounds_at_radius: Option<(f64, f64)>,
    /// Bounds at the first failing l = radius + 1; None if the scan hit
    /// l_max while the condition still held.
    pub bounds_at_next: Option<(f64, f64)>,
    /// Arithmetic used at the deepest l evaluated.
    pub numeric_mode: NumericMode,
    /// False if a paranoid scan saw the condition succeed again after its
    /// first failure (the radius is still the sound prefix length).
    pub monotone_prefix: bool,
}

/// Largest certified perturbation weight for observed class bounds.
///
/// Scans l = 1, 2, ... ascending and stops at the first failing weight;
/// the returned radius is the length of the all-holding prefix, which is
/// the attack set the certificate actually covers.
pub fn certified_radius(
    pa_lower: f64,
    pb_upper: f64,
    beta: f64,
    l_max: u64,
) -> Result<NpCertificate> {
    certified_radius_with(pa_lower, pb_upper, beta, l_max, false)
}

/// [`certified_radius`] with an optional paranoid scan: instead of
/// stopping at the first failure, evaluate every l up to l_max and report
/// whether the condition was monotone (the radius itself is unchanged).
pub fn certified_radius_with(
    pa_lower: f64,
    pb_upper: f64,
    beta: f64,
    l_max: u64,
    paranoid: bool,
) -> Result<NpCertificate> {
    check_beta(beta)?;
    if !(pa_lower > 0.5) {
        return Err(Error::AbstainRequired { pa_lower });
    }
    check_budget("pA lower bound", pa_lower, false, true)?;
    if pb_upper > 1.0 - pa_lower + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "pB upper bound {pb_upper} exceeds 1 - pA = {}",
            1.0 - pa_lower
        )));
    }
    check_budget("pB upper bound", pb_upper.max(0.0), true, false)?;
    let pb_upper = pb_upper.max(0.0);

    let mut radius = 0u64;
    let mut prefix_open = true;
    let mut monotone = true;
    let mut bounds_at_radius = None;
    let mut bounds_at_next = None;
    let mut mode = NumericMode::ExactRational;
    for l in 1..=l_max {
        let (holds, bounds, m) = condition_at(pa_lower, pb_upper, beta, l)?;
        mode = m;
        if prefix_open {
            if holds {
                radius = l;
                bounds_at_radius = Some(bounds);
            } else {
                bounds_at_next = Some(bounds);
                prefix_open = false;
                if !paranoid {
                    break;
                }
            }
        } else if holds {
            monotone = false;
        }
    }
    Ok(NpCertificate {
        radius,
        bounds_at_radius,
        bounds_at_next,
        numeric_mode: mode,
        monotone_prefix: monotone,
    })
}

/// Fully exact radius scan over rational class bounds; used by the
/// end-to-end oracle, where pA comes from exact enumeration rather than a
/// confidence bound. Restricted to the exact-arithmetic weight range.
pub fn certified_radius_exact(
    pa_lower: &BigRational,
    pb_upper: &BigRational,
    beta: f64,
    l_max: u64,
) -> Result<u64> {
    check_beta(beta)?;
    if l_max > EXACT_L_MAX {
        return Err(Error::InvalidParameter(format!(
            "exact radius scan capped at l = {EXACT_L_MAX}, asked for {l_max}"
        )));
    }
    let half = BigRational::new(1.into(), 2.into());
    if *pa_lower <= half {
        return Err(Error::AbstainRequired {
            pa_lower: ratio_to_f64(pa_lower),
        });
    }
    if *pb_upper > BigRational::one() - pa_lower {
        return Err(Error::InvalidParameter(
            "pB upper bound exceeds 1 - pA".into(),
        ));
    }
    let mut radius = 0;
    for l in 1..=l_max {
        let table = region_table_exact(l, beta)?;
        let lower = lower_bound_ya_exact(pa_lower, &table);
        let upper = upper_bound_yb_exact(pb_upper, &table);
        if lower > upper {
            radius = l;
        } else {
            break;
        }
    }
    Ok(radius)
}

/// Evaluates the certifying inequality at one weight l. Exact mode uses a
/// strict rational comparison; log mode demands a 1e-12 margin so that
/// float rounding cannot manufacture a certificate.
fn condition_at(
    pa_lower: f64,
    pb_upper: f64,
    beta: f64,
    l: u64,
) -> Result<(bool, (f64, f64), NumericMode)> {
    if l <= EXACT_L_MAX {
        let table = region_table_exact(l, beta)?;
        let pa = BigRational::from_float(pa_lower).expect("finite");
        let pb = BigRational::from_float(pb_upper).expect("finite");
        let lower = lower_bound_ya_exact(&pa, &table);
        let upper = upper_bound_yb_exact(&pb, &table);
        let holds = lower > upper;
        Ok((
            holds,
            (ratio_to_f64(&lower), ratio_to_f64(&upper)),
            NumericMode::ExactRational,
        ))
    } else {
        let table = region_table_log(l, beta)?;
        let lower = fill_f64(table.regions.iter(), pa_lower);
        let upper = fill_f64(table.regions.iter().rev(), pb_upper);
        Ok((
            lower > upper + LOG_MODE_MARGIN,
            (lower, upper),
            NumericMode::LogSpace,
        ))
    }
}

/// Printable table of the regions at (l, beta); used in failure reports.
pub fn region_dump(l: u64, beta: f64) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    match region_table(l, beta) {
        Ok(table) => {
            let _ = writeln!(out, "regions at l = {l}, beta = {beta}:");
            for r in table.entries() {
                let _ = writeln!(
                    out,
                    "  e = {:>4}  agree = {:>3}  prob_x = {:.6e}  prob_y = {:.6e}  ratio = {:.6e}",
                    r.e, r.agree, r.prob_x, r.prob_y, r.ratio
                );
            }
        }
        Err(e) => {
            let _ = writeln!(out, "region table unavailable at l = {l}, beta = {beta}: {e}");
        }
    }
    out
}
