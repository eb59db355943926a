//! Supersaturation: a set noticeably larger than the largest antichain has
//! many comparable pairs, and many of them are far apart in rank.
//!
//! For `X ⊆ [n]^D` and `a ≥ 1` write
//! `b = |X| − a·(1 + 3n/D)·N_{n,D}`. Whenever `b > 0`, the number of pairs
//! `x ≺ y` in `X` with `rank(y) − rank(x) ≥ a` is at least
//! `b·D^a / (a!·n^a)`. The reports below compare the exact pair count with
//! that bound, exactly.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chains::trial_seed;
use crate::grid::{leq, GridBox, Point};
use crate::num::{factorial, fmt_ratio, from_biguint, int, ratio, ser_biguint, ser_ratio};
use crate::order::{bits, Mask, SmallOrder};
use crate::{Error, Limits, Result};

/// Header matching [`SupersaturationReport::csv_row`].
pub const CSV_HEADER: &str = "n,D,a,size,b,bound,observed,pass";

/// One exact comparison of observed pairs against the bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupersaturationReport {
    pub n: u32,
    pub dim: usize,
    pub a: u32,
    pub set_size: u64,
    /// `|X| − a(1 + 3n/D)N`, clamped at zero.
    #[serde(serialize_with = "ser_ratio")]
    pub b: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub bound: BigRational,
    #[serde(serialize_with = "ser_biguint")]
    pub observed_pairs: BigUint,
}

impl SupersaturationReport {
    /// The bound only says something when `b > 0`.
    pub fn is_active(&self) -> bool {
        self.b.is_positive()
    }

    pub fn satisfied(&self) -> bool {
        from_biguint(&self.observed_pairs) >= self.bound
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.dim,
            self.a,
            self.set_size,
            fmt_ratio(&self.b),
            fmt_ratio(&self.bound),
            self.observed_pairs,
            self.satisfied()
        )
    }
}

/// `a(1 + 3n/D)·N_{n,D}`: sets of at most this size get `b = 0`.
pub fn threshold(bx: &GridBox, a: u32) -> BigRational {
    let n = i64::from(bx.n());
    let d = bx.dim() as i64;
    int(a) * ratio(d + 3 * n, d) * from_biguint(&bx.middle_layer_size())
}

/// The slack `b` for a set of `size` points, clamped at zero.
pub fn slack(bx: &GridBox, size: u64, a: u32) -> BigRational {
    let b = int(size) - threshold(bx, a);
    if b.is_negative() {
        BigRational::zero()
    } else {
        b
    }
}

/// `b·D^a / (a!·n^a)`.
pub fn pair_bound(bx: &GridBox, b: &BigRational, a: u32) -> BigRational {
    let num = BigInt::from(bx.dim()).pow(a);
    let den = BigInt::from(factorial(a)) * BigInt::from(bx.n()).pow(a);
    b * BigRational::new(num, den)
}

fn check_gap(a: u32) -> Result<()> {
    if a == 0 {
        return Err(Error::OutOfRange("rank gap a must be at least 1".into()));
    }
    Ok(())
}

fn distinct_points(bx: &GridBox, xs: &[Point]) -> Result<BTreeSet<Point>> {
    xs.iter()
        .map(|p| {
            bx.check_coords(p.coords())?;
            Ok(p.clone())
        })
        .collect()
}

/// Ordered pairs `x ≺ y` of distinct points of `X` with
/// `rank(y) − rank(x) ≥ a`. Repeated points count once.
///
/// Points are bucketed by rank and only buckets at least `a` apart are
/// compared.
pub fn count_comparable_pairs_with_gap(bx: &GridBox, xs: &[Point], a: u32) -> Result<BigUint> {
    check_gap(a)?;
    let set = distinct_points(bx, xs)?;
    let mut buckets: Vec<Vec<&Point>> = vec![Vec::new(); bx.max_rank() + 1];
    for p in &set {
        buckets[p.rank()].push(p);
    }
    let a = a as usize;
    let mut count = 0u64;
    for (r, low) in buckets.iter().enumerate() {
        for high in buckets.iter().skip(r + a) {
            for x in low {
                for y in high {
                    if leq(x, y)? {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count.into())
}

/// Counts the pairs and compares them with the bound.
pub fn check_supersaturation(bx: &GridBox, xs: &[Point], a: u32) -> Result<SupersaturationReport> {
    let observed_pairs = count_comparable_pairs_with_gap(bx, xs, a)?;
    let set_size = distinct_points(bx, xs)?.len() as u64;
    Ok(report(bx, set_size, a, observed_pairs))
}

fn report(bx: &GridBox, set_size: u64, a: u32, observed_pairs: BigUint) -> SupersaturationReport {
    let b = slack(bx, set_size, a);
    let bound = pair_bound(bx, &b, a);
    SupersaturationReport {
        n: bx.n(),
        dim: bx.dim(),
        a,
        set_size,
        b,
        bound,
        observed_pairs,
    }
}

/// Outcome of checking many sets for one `(n, D, a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub n: u32,
    pub dim: usize,
    pub a: u32,
    /// `"exhaustive"` or `"random"`.
    pub mode: &'static str,
    pub sets_checked: u64,
    /// Sets with `b > 0`.
    pub active: u64,
    pub violations: u64,
    /// Smallest `observed − bound` over active sets.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub min_margin: Option<BigRational>,
    /// The first violating set, if any.
    pub witness: Option<SupersaturationReport>,
    /// The report of every active set, for random audits only.
    #[serde(skip)]
    pub reports: Vec<SupersaturationReport>,
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&fmt_ratio(r)),
        None => s.serialize_none(),
    }
}

impl AuditSummary {
    fn new(bx: &GridBox, a: u32, mode: &'static str) -> Self {
        AuditSummary {
            n: bx.n(),
            dim: bx.dim(),
            a,
            mode,
            sets_checked: 0,
            active: 0,
            violations: 0,
            min_margin: None,
            witness: None,
            reports: Vec::new(),
        }
    }

    fn record(&mut self, r: SupersaturationReport) {
        self.sets_checked += 1;
        if !r.is_active() {
            return;
        }
        self.active += 1;
        let margin = from_biguint(&r.observed_pairs) - &r.bound;
        if self.min_margin.as_ref().map_or(true, |m| margin < *m) {
            self.min_margin = Some(margin);
        }
        if !r.satisfied() {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(r.clone());
            }
        }
        self.reports.push(r);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `gap_above[x]`: points `y ≻ x` with `rank(y) ≥ rank(x) + a`.
fn gap_masks(order: &SmallOrder, a: u32) -> Vec<Mask> {
    (0..order.len())
        .map(|x| {
            bits(order.above[x])
                .filter(|&y| order.ranks[y] >= order.ranks[x] + a as usize)
                .fold(0, |m, y| m | 1 << y)
        })
        .collect()
}

fn pairs_in_mask(gap: &[Mask], mask: Mask) -> u64 {
    bits(mask).map(|x| (gap[x] & mask).count_ones() as u64).sum()
}

/// Checks every subset of the box. The box must have at most 24 points and
/// `2^|P|` must fit in `limits.enumeration`.
pub fn exhaustive_audit(bx: &GridBox, a: u32, limits: &Limits) -> Result<AuditSummary> {
    check_gap(a)?;
    let total = bx.total_points_usize().unwrap_or(usize::MAX);
    if total > 24 || (1u64 << total) > limits.enumeration {
        return Err(Error::CapExceeded {
            what: "subsets for exhaustive audit",
            size: format!("2^{}", bx.total_points()),
            cap: limits.enumeration.min(usize::MAX as u64) as usize,
        });
    }
    let order = SmallOrder::new(*bx)?;
    let gap = gap_masks(&order, a);
    // The bound only depends on |X|.
    let bounds: Vec<(BigRational, BigRational)> = (0..=total as u64)
        .map(|s| {
            let b = slack(bx, s, a);
            let bound = pair_bound(bx, &b, a);
            (b, bound)
        })
        .collect();
    let mut summary = AuditSummary::new(bx, a, "exhaustive");
    for mask in 0..(1 as Mask) << total {
        let size = mask.count_ones() as usize;
        let (b, bound) = &bounds[size];
        summary.sets_checked += 1;
        if !b.is_positive() {
            continue;
        }
        summary.active += 1;
        let observed = pairs_in_mask(&gap, mask);
        let margin = int(observed) - bound;
        if summary.min_margin.as_ref().map_or(true, |m| margin < *m) {
            summary.min_margin = Some(margin.clone());
        }
        if margin.is_negative() {
            summary.violations += 1;
            if summary.witness.is_none() {
                summary.witness = Some(report(bx, size as u64, a, observed.into()));
            }
        }
    }
    Ok(summary)
}

/// Draws a set whose size is uniform on `(threshold, |P|]` (or on
/// `[0, |P|]` when the threshold is not below `|P|`), then a uniform subset
/// of that size.
pub fn random_large_set(bx: &GridBox, a: u32, rng: &mut impl Rng, limits: &Limits) -> Result<Vec<Point>> {
    let total = bx
        .total_points_usize()
        .filter(|&t| t <= limits.box_points)
        .ok_or_else(|| Error::CapExceeded {
            what: "box points",
            size: bx.total_points().to_string(),
            cap: limits.box_points,
        })?;
    let t = crate::num::floor_u(&threshold(bx, a));
    let low = match usize::try_from(&t) {
        Ok(t) if t < total => t + 1,
        _ => 0,
    };
    let size = rng.gen_range(low..=total);
    let mut picked = index::sample(rng, total, size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| bx.point_at(i)).collect())
}

/// Checks `trials` random large sets; trial `t` uses seed
/// `trial_seed(seed, t)`.
pub fn random_audit(bx: &GridBox, a: u32, trials: u64, seed: u64, limits: &Limits) -> Result<AuditSummary> {
    check_gap(a)?;
    let mut summary = AuditSummary::new(bx, a, "random");
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let xs = random_large_set(bx, a, &mut rng, limits)?;
        let r = check_supersaturation(bx, &xs, a)?;
        summary.record(r);
    }
    Ok(summary)
}
