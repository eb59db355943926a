//! Graph containers for antichains.
//!
//! Antichains of the box are the independent sets of its comparability
//! graph. The Kleitman–Winston procedure compresses each of them into a
//! short fingerprint and a container.
//!
//! The procedure keeps a candidate set `S` (initially the whole box) and a
//! fingerprint `T` (initially empty). In round `r = 1, …, k`, while
//! `|S| > m_r`, it takes the vertex `v` of largest degree in the
//! comparability graph on `S`, with ties going to the lexicographically
//! smallest point. If `v` belongs to the antichain, `v` joins `T` and `v`
//! and its neighbours leave `S`; otherwise only `v` leaves `S`. The
//! container is `S ∪ T`.
//!
//! The premise is that every set with more than `m_r` points has at least
//! `d_r·|S|` comparable pairs. Then each fingerprint step removes at least
//! `2d_r + 1` points. Round `r` starts with at most `m_{r−1}` points, so it
//! adds at most `m_{r−1}/(2d_r + 1)` fingerprint points. The container is
//! determined by the fingerprint. Hence
//!
//! - there are at most `Π_r C(m_{r−1}, ≤ m_{r−1}/(2d_r + 1))` containers;
//! - each has at most `m_k + Σ_r m_{r−1}/(2d_r + 1)` points;
//! - every antichain lies inside the container of its own fingerprint.
//!
//! Summing `2^|A|` over the family bounds the number of antichains.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chains::trial_seed;
use crate::exact::{count_antichains, Antichain};
use crate::grid::{GridBox, Point};
use crate::num::{
    floor_u, fmt_ratio, from_biguint, int, log2_big, log2_ratio, rational_above, ratio, ser_biguint, ser_opt_biguint, ser_ratio,
};
use crate::order::{bits, Mask, SmallOrder};
use crate::{Error, Limits, Result};

/// Scale used to store square roots as rationals.
pub const SQRT_SCALE: u64 = 1_000_000;

/// Largest `m` for which binomial sums are evaluated exactly inside
/// [`certified_upper_bound`]; above it the `(em/t)^t` estimate is used.
pub const EXACT_BINOMIAL_LIMIT: u64 = 4096;

/// One round of the procedure: density `d_r` and size threshold `m_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    #[serde(serialize_with = "ser_ratio")]
    pub d: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub m: BigRational,
}

/// `m_0` and the rounds `(d_r, m_r)`, `r = 1, …, k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainerParams {
    #[serde(serialize_with = "ser_ratio")]
    pub m0: BigRational,
    pub rounds: Vec<Round>,
}

/// `floor(√x · SQRT_SCALE) / SQRT_SCALE`, never above `√x`.
pub fn sqrt_below(x: u64) -> BigRational {
    let s = BigUint::from(x) * BigUint::from(SQRT_SCALE).pow(2);
    BigRational::new(BigInt::from(s.sqrt()), BigInt::from(SQRT_SCALE))
}

/// `ceil(SQRT_SCALE / √x) / SQRT_SCALE`, never below `1/√x`.
pub fn inv_sqrt_above(x: u64) -> BigRational {
    // smallest q with q² · x ≥ SQRT_SCALE²
    let target = BigUint::from(SQRT_SCALE).pow(2);
    let x = BigUint::from(x);
    let mut q = (&target / &x).sqrt();
    while &q * &q * &x < target {
        q += 1u32;
    }
    BigRational::new(BigInt::from(q), BigInt::from(SQRT_SCALE))
}

impl ContainerParams {
    /// Validates `d_r > 0` and `m_r ≥ 0`.
    pub fn new(m0: BigRational, rounds: Vec<Round>) -> Result<Self> {
        if m0 < BigRational::zero() {
            return Err(Error::OutOfRange(format!("m_0 = {} is negative", fmt_ratio(&m0))));
        }
        for (r, round) in rounds.iter().enumerate() {
            if round.d <= BigRational::zero() || round.m < BigRational::zero() {
                return Err(Error::OutOfRange(format!(
                    "round {}: need d > 0 and m ≥ 0, got d = {}, m = {}",
                    r + 1,
                    fmt_ratio(&round.d),
                    fmt_ratio(&round.m)
                )));
            }
        }
        Ok(ContainerParams { m0, rounds })
    }

    /// No rounds: the only container is the whole box.
    pub fn trivial(bx: &GridBox) -> Self {
        ContainerParams {
            m0: from_biguint(&bx.total_points()),
            rounds: Vec::new(),
        }
    }

    /// Two rounds with `d_1 = D/(2n)`, `m_1 = N(2 + 6n/D)`,
    /// `d_2 = √D/(2n)` and `m_2 = N(1 + 3n/D + 1/√D)`.
    ///
    /// `√D` is rounded down in `d_2` and `1/√D` rounded up in `m_2`; both
    /// roundings make the premise weaker, so every conclusion survives.
    pub fn standard(bx: &GridBox) -> Self {
        let n = i64::from(bx.n());
        let dim = bx.dim() as i64;
        let mid = from_biguint(&bx.middle_layer_size());
        let d1 = ratio(dim, 2 * n);
        let m1 = &mid * (int(2) + ratio(6 * n, dim));
        let d2 = sqrt_below(dim as u64) / int(2 * n);
        let m2 = &mid * (int(1) + ratio(3 * n, dim) + inv_sqrt_above(dim as u64));
        ContainerParams {
            m0: from_biguint(&bx.total_points()),
            rounds: vec![Round { d: d1, m: m1 }, Round { d: d2, m: m2 }],
        }
    }

    pub fn k(&self) -> usize {
        self.rounds.len()
    }

    /// `m_{r}` for `r = 0, …, k`.
    pub fn m(&self, r: usize) -> &BigRational {
        if r == 0 {
            &self.m0
        } else {
            &self.rounds[r - 1].m
        }
    }

    /// `floor(m_{r−1} / (2d_r + 1))`, the fingerprint budget of round `r`
    /// (1-based).
    pub fn fingerprint_budget(&self, r: usize) -> BigUint {
        let round = &self.rounds[r - 1];
        floor_u(&(self.m(r - 1) / (int(2) * &round.d + int(1))))
    }

    /// Container count bound `Π_r Σ_{s ≤ t_r} C(floor(m_{r−1}), s)` with
    /// `t_r` the fingerprint budget, evaluated exactly.
    pub fn count_bound(&self) -> BigUint {
        (1..=self.k())
            .map(|r| binomial_sum(&floor_u(self.m(r - 1)), &self.fingerprint_budget(r)))
            .product()
    }

    /// Container size bound `floor(m_k) + Σ_r t_r`.
    pub fn size_bound(&self) -> BigUint {
        let tail: BigUint = (1..=self.k()).map(|r| self.fingerprint_budget(r)).sum();
        floor_u(self.m(self.k())) + tail
    }
}

/// `Σ_{s ≤ t} C(m, s)`.
pub fn binomial_sum(m: &BigUint, t: &BigUint) -> BigUint {
    let t = t.min(m).to_u64().expect("binomial sum index fits in u64");
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for s in 0..t {
        term = term * (m - BigUint::from(s)) / BigUint::from(s + 1);
        sum += &term;
    }
    sum
}

/// The exact sum `Σ_{s ≤ t} C(m, s)` beside the estimate `(em/t)^t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinomialSumBound {
    pub m: u64,
    pub t: u64,
    #[serde(serialize_with = "ser_biguint")]
    pub exact: BigUint,
    pub estimate: f64,
    pub log2_estimate: f64,
}

impl BinomialSumBound {
    /// `exact ≤ estimate`, compared in log space.
    pub fn holds(&self) -> bool {
        log2_big(&self.exact) <= self.log2_estimate + 1e-12 * self.log2_estimate.abs()
    }
}

/// Requires `1 ≤ t ≤ m`.
pub fn binomial_sum_bound(m: u64, t: u64) -> Result<BinomialSumBound> {
    if t == 0 || t > m {
        return Err(Error::OutOfRange(format!("need 1 ≤ t ≤ m, got m = {m}, t = {t}")));
    }
    let log2_estimate = t as f64 * (std::f64::consts::E * m as f64 / t as f64).log2();
    Ok(BinomialSumBound {
        m,
        t,
        exact: binomial_sum(&m.into(), &t.into()),
        estimate: log2_estimate.exp2(),
        log2_estimate,
    })
}

/// A rational upper bound on `log2 Σ_{s ≤ t} C(m, s)`.
fn log2_binomial_sum_above(m: &BigUint, t: &BigUint) -> BigRational {
    if t.is_zero() || m.is_zero() {
        return BigRational::zero();
    }
    if t >= m {
        return from_biguint(m);
    }
    if *m <= BigUint::from(EXACT_BINOMIAL_LIMIT) {
        return rational_above(log2_big(&binomial_sum(m, t)));
    }
    let (m, t) = (m.to_f64().unwrap_or(f64::MAX), t.to_f64().unwrap_or(f64::MAX));
    rational_above(t * (std::f64::consts::E * m / t).log2())
}

/// The procedure applied to one box, on bitsets.
struct Runner<'a> {
    order: &'a SmallOrder,
    params: &'a ContainerParams,
    /// `floor(m_r)` for `r = 1, …, k`.
    stops: Vec<u64>,
}

enum Step {
    /// Round `r` (1-based) must pick among `S`; `v` is its choice.
    Choose { round: usize, v: usize },
    Done,
}

impl<'a> Runner<'a> {
    fn new(order: &'a SmallOrder, params: &'a ContainerParams) -> Self {
        let stops = params
            .rounds
            .iter()
            .map(|r| floor_u(&r.m).to_u64().unwrap_or(u64::MAX))
            .collect();
        Runner { order, params, stops }
    }

    fn degree(&self, v: usize, s: Mask) -> u32 {
        (self.order.comparable(v) & s).count_ones()
    }

    fn next(&self, round: &mut usize, s: Mask) -> Result<Step> {
        while *round <= self.params.k() && u64::from(s.count_ones()) <= self.stops[*round - 1] {
            *round += 1;
        }
        if *round > self.params.k() {
            return Ok(Step::Done);
        }
        let size = s.count_ones();
        let pairs: u64 = bits(s).map(|v| u64::from(self.degree(v, s))).sum::<u64>() / 2;
        let required = &self.params.rounds[*round - 1].d * int(size);
        if int(pairs) < required {
            return Err(Error::PremiseViolated {
                round: *round,
                set_size: size as usize,
                pairs,
                required: fmt_ratio(&required),
                witness: self.order.points_of(s),
            });
        }
        let mut best = (0, usize::MAX);
        for v in bits(s) {
            let deg = self.degree(v, s);
            if best.1 == usize::MAX || deg > best.0 {
                best = (deg, v);
            }
        }
        Ok(Step::Choose { round: *round, v: best.1 })
    }

    /// Container and fingerprint of the antichain `i`.
    fn run(&self, i: Mask) -> Result<(Mask, Mask)> {
        let (mut s, mut t, mut round) = (self.order.full(), 0, 1);
        while let Step::Choose { v, .. } = self.next(&mut round, s)? {
            if i >> v & 1 == 1 {
                t |= 1 << v;
                s &= !(self.order.comparable(v) | 1 << v);
            } else {
                s &= !(1 << v);
            }
        }
        Ok((s | t, t))
    }

    /// Every reachable `(container, fingerprint)`, by following both choices
    /// at every step.
    fn explore(&self, cap: usize) -> Result<Vec<(Mask, Mask)>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.order.full(), 0 as Mask, 1usize)];
        while let Some((s, t, mut round)) = stack.pop() {
            match self.next(&mut round, s)? {
                Step::Done => {
                    if out.len() == cap {
                        return Err(Error::CapExceeded {
                            what: "fingerprints",
                            size: format!("> {cap}"),
                            cap,
                        });
                    }
                    out.push((s | t, t));
                }
                Step::Choose { round, v } => {
                    stack.push((s & !(self.order.comparable(v) | 1 << v), t | 1 << v, round));
                    stack.push((s & !(1 << v), t, round));
                }
            }
        }
        Ok(out)
    }
}

/// All containers of one box for one parameter choice.
#[derive(Debug, Clone)]
pub struct ContainerFamily {
    order: SmallOrder,
    params: ContainerParams,
    containers: Vec<Mask>,
    fingerprints: usize,
}

/// Builds the family by running the procedure along every fingerprint.
///
/// Needs a box of at most 128 points. Fails with
/// [`Error::PremiseViolated`] if some candidate set met on the way has
/// fewer than `d_r·|S|` comparable pairs.
pub fn build_containers(bx: &GridBox, params: &ContainerParams, limits: &Limits) -> Result<ContainerFamily> {
    let order = SmallOrder::new(*bx)?;
    let runs = Runner::new(&order, params).explore(limits.family)?;
    let fingerprints = runs.len();
    let containers: BTreeSet<Mask> = runs.into_iter().map(|(c, _)| c).collect();
    Ok(ContainerFamily {
        containers: containers.into_iter().collect(),
        order,
        params: params.clone(),
        fingerprints,
    })
}

/// The container and fingerprint that the procedure assigns to `antichain`.
pub fn container_for(params: &ContainerParams, antichain: &Antichain) -> Result<(Vec<Point>, Vec<Point>)> {
    let order = SmallOrder::new(antichain.grid())?;
    let i = order.mask_of(antichain.elements())?;
    let (c, t) = Runner::new(&order, params).run(i)?;
    Ok((order.points_of(c), order.points_of(t)))
}

/// Comparison of a family with the two numeric guarantees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemCheck {
    pub containers: usize,
    pub fingerprints: usize,
    #[serde(serialize_with = "ser_biguint")]
    pub count_bound: BigUint,
    pub max_container_size: u32,
    #[serde(serialize_with = "ser_biguint")]
    pub size_bound: BigUint,
    pub count_ok: bool,
    pub size_ok: bool,
}

impl ContainerFamily {
    pub fn grid(&self) -> &GridBox {
        &self.order.bx
    }

    pub fn params(&self) -> &ContainerParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    /// Number of fingerprints explored; distinct fingerprints may share a
    /// container.
    pub fn fingerprint_count(&self) -> usize {
        self.fingerprints
    }

    /// Containers as sorted point lists, in a fixed order.
    pub fn containers(&self) -> Vec<Vec<Point>> {
        self.containers.iter().map(|&c| self.order.points_of(c)).collect()
    }

    pub fn max_container_size(&self) -> u32 {
        self.containers.iter().map(|c| c.count_ones()).max().unwrap_or(0)
    }

    /// Whether some container includes every point of `points`.
    pub fn covers<'a>(&self, points: impl IntoIterator<Item = &'a Point>) -> Result<bool> {
        let m = self.order.mask_of(points)?;
        Ok(self.containers.iter().any(|&c| m & !c == 0))
    }

    /// Checks the count and size guarantees against the family.
    pub fn check_items(&self) -> ItemCheck {
        let count_bound = self.params.count_bound();
        let size_bound = self.params.size_bound();
        let max_container_size = self.max_container_size();
        ItemCheck {
            containers: self.len(),
            fingerprints: self.fingerprints,
            count_ok: BigUint::from(self.fingerprints) <= count_bound,
            size_ok: BigUint::from(max_container_size) <= size_bound,
            count_bound,
            max_container_size,
            size_bound,
        }
    }

    /// `Σ_A 2^|A|`, an upper bound on the number of antichains.
    pub fn antichain_bound(&self) -> BigUint {
        self.containers.iter().map(|c| BigUint::one() << c.count_ones()).sum()
    }

    /// The first antichain (by bitset value) not covered by any container.
    pub fn uncovered_antichain(&self, limits: &Limits) -> Result<Option<Vec<Point>>> {
        let masks = crate::exact::antichain_masks(&self.order, limits)?;
        Ok(masks
            .into_iter()
            .find(|&a| !self.containers.iter().any(|&c| a & !c == 0))
            .map(|a| self.order.points_of(a)))
    }
}

/// How a round's premise was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseMode {
    /// No set is larger than `m_r`.
    Vacuous,
    /// Every set larger than `m_r` was checked.
    Exhaustive,
    /// Random sets larger than `m_r` were checked.
    Audited,
}

/// The premise of one round: every `S` with `|S| > m_r` has at least
/// `d_r·|S|` comparable pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PremiseAudit {
    pub round: usize,
    pub mode: PremiseMode,
    pub sets_checked: u64,
    pub violations: u64,
    pub witness: Option<Vec<Point>>,
}

/// Largest box checked over all subsets.
pub const EXHAUSTIVE_PREMISE_POINTS: usize = 20;

/// Checks the premise of every round, over all subsets for boxes of at most
/// [`EXHAUSTIVE_PREMISE_POINTS`] points and on `trials` random sets
/// otherwise.
pub fn audit_premises(
    bx: &GridBox,
    params: &ContainerParams,
    trials: u64,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<PremiseAudit>> {
    let order = SmallOrder::new(*bx)?;
    let total = order.len();
    let mut audits = Vec::new();
    for (r, round) in params.rounds.iter().enumerate() {
        let stop = floor_u(&round.m).to_usize().unwrap_or(usize::MAX);
        let mut audit = PremiseAudit {
            round: r + 1,
            mode: PremiseMode::Vacuous,
            sets_checked: 0,
            violations: 0,
            witness: None,
        };
        let mut check = |s: Mask| {
            audit.sets_checked += 1;
            if int(order.comparable_pairs(s)) < &round.d * int(s.count_ones()) {
                audit.violations += 1;
                audit.witness.get_or_insert_with(|| order.points_of(s));
            }
        };
        if stop >= total {
        } else if total <= EXHAUSTIVE_PREMISE_POINTS && (1u64 << total) <= limits.enumeration {
            for s in 0..(1 as Mask) << total {
                if s.count_ones() as usize > stop {
                    check(s);
                }
            }
            audit.mode = PremiseMode::Exhaustive;
        } else {
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t ^ (r as u64) << 48));
                let size = rng.gen_range(stop + 1..=total);
                let s = index::sample(&mut rng, total, size).iter().fold(0 as Mask, |m, i| m | 1 << i);
                check(s);
            }
            audit.mode = PremiseMode::Audited;
        }
        audits.push(audit);
    }
    Ok(audits)
}

/// The union bound `log2 #antichains ≤ log2 |F| + max |A|`, with every
/// piece as an exact rational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub dim: usize,
    #[serde(serialize_with = "ser_biguint")]
    pub middle_layer: BigUint,
    pub params: ContainerParams,
    /// Rounds with `floor(m_r)` at least the size of the set they start
    /// from; they never run and contribute nothing.
    pub vacuous_rounds: Vec<usize>,
    /// Upper bound on `log2 |F|`.
    #[serde(serialize_with = "ser_ratio")]
    pub log2_container_count_bound: BigRational,
    /// Upper bound on the size of every container.
    #[serde(serialize_with = "ser_ratio")]
    pub max_container_size_bound: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub certified_log2_upper: BigRational,
    /// The count and size bounds exactly as the lemma states them, with
    /// floors applied.
    #[serde(serialize_with = "ser_opt_biguint")]
    pub lemma_count_bound: Option<BigUint>,
    #[serde(serialize_with = "ser_biguint")]
    pub lemma_size_bound: BigUint,
    /// Exact number of antichains, when it could be computed.
    #[serde(serialize_with = "ser_opt_biguint")]
    pub exact_count: Option<BigUint>,
    pub exact_log2: Option<f64>,
    /// `certified_log2_upper ≥ N_{n,D}`, exactly.
    pub above_middle_layer: bool,
    /// `certified_log2_upper ≥ log2 exact_count`, decided exactly.
    pub above_exact: Option<bool>,
}

/// Whether `count ≤ 2^c` for a nonnegative rational `c`, decided exactly.
pub fn count_within_log2(count: &BigUint, c: &BigRational) -> bool {
    let floor = floor_u(c).to_u64().unwrap_or(u64::MAX);
    if floor >= count.bits() {
        return true;
    }
    // count ≤ 2^(p/q) ⟺ count^q ≤ 2^p
    let (p, q) = (c.numer(), c.denom());
    match (p.to_u64(), q.to_u32()) {
        (Some(p), Some(q)) if q <= 4096 => count.pow(q) <= BigUint::one() << p,
        // fall back to a float comparison only when the gap is wide
        _ => log2_big(count) + 1e-6 < log2_ratio(c),
    }
}

/// The container bound for `bx` with `params`, without building the family.
///
/// Round `r` starts from at most `s_{r−1} = min_{j<r} floor(m_j)` points.
/// It never runs when `floor(m_r) ≥ s_{r−1}`. Otherwise it contributes
/// `log2 C(s_{r−1}, ≤ t_r)` with `t_r = floor(s_{r−1}/(2d_r + 1))` to the
/// count and `t_r` to the size. The count term is exact for
/// `s ≤ EXACT_BINOMIAL_LIMIT` and uses `(em/t)^t` beyond; both are rounded
/// up to a rational.
///
/// With `exact`, the number of antichains is computed by enumeration (when
/// within `limits`) and compared with the bound.
pub fn certified_upper_bound(
    bx: &GridBox,
    params: &ContainerParams,
    exact: bool,
    limits: &Limits,
) -> Result<BoundReport> {
    let middle_layer = bx.middle_layer_size();
    let mut start = floor_u(&params.m0).min(bx.total_points());
    let mut log2_count = BigRational::zero();
    let mut fingerprint_total = BigUint::zero();
    let mut vacuous_rounds = Vec::new();
    for (r, round) in params.rounds.iter().enumerate() {
        let stop = floor_u(&round.m);
        if stop >= start {
            vacuous_rounds.push(r + 1);
            continue;
        }
        let t = floor_u(&(from_biguint(&start) / (int(2) * &round.d + int(1))));
        log2_count += log2_binomial_sum_above(&start, &t);
        fingerprint_total += &t;
        start = stop;
    }
    let max_size = from_biguint(&(start + fingerprint_total).min(bx.total_points()));
    let certified = &log2_count + &max_size;

    let small = params.rounds.iter().all(|r| floor_u(&r.m) <= BigUint::from(EXACT_BINOMIAL_LIMIT))
        && floor_u(&params.m0) <= BigUint::from(EXACT_BINOMIAL_LIMIT);
    let exact_count = if exact {
        match count_antichains(bx, limits) {
            Ok(c) => Some(c),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(BoundReport {
        n: bx.n(),
        dim: bx.dim(),
        above_middle_layer: certified >= from_biguint(&middle_layer),
        above_exact: exact_count.as_ref().map(|c| count_within_log2(c, &certified)),
        exact_log2: exact_count.as_ref().map(log2_big),
        exact_count,
        middle_layer,
        params: params.clone(),
        vacuous_rounds,
        log2_container_count_bound: log2_count,
        max_container_size_bound: max_size,
        certified_log2_upper: certified,
        lemma_count_bound: small.then(|| params.count_bound()),
        lemma_size_bound: params.size_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::list_antichains;

    fn bx(n: u32, d: usize) -> GridBox {
        GridBox::new(n, d).unwrap()
    }

    fn custom(bx: &GridBox, rounds: &[((i64, i64), i64)]) -> ContainerParams {
        ContainerParams::new(
            from_biguint(&bx.total_points()),
            rounds
                .iter()
                .map(|&((p, q), m)| Round { d: ratio(p, q), m: int(m) })
                .collect(),
        )
        .unwrap()
    }

    /// Two active rounds on `{0,1}^4`. The densities sit at the exhaustive
    /// minima: sets of 9 or more points have at least `|S|` comparable
    /// pairs, sets of 7 or more at least `3|S|/7`.
    fn cube4_active() -> (GridBox, ContainerParams) {
        let b = bx(2, 4);
        let p = custom(&b, &[((1, 1), 8), ((3, 7), 6)]);
        (b, p)
    }

    #[test]
    fn binomial_sum_examples() {
        let r = binomial_sum_bound(4, 1).unwrap();
        assert_eq!(r.exact, 5u32.into());
        assert!((r.estimate - 4.0 * std::f64::consts::E).abs() < 1e-9);
        assert!(r.holds());
        let r = binomial_sum_bound(10, 2).unwrap();
        assert_eq!(r.exact, 56u32.into());
        assert!((r.estimate - 184.7).abs() < 0.1);
        for m in 1..12 {
            let r = binomial_sum_bound(m, m).unwrap();
            assert_eq!(r.exact, BigUint::one() << m);
            assert!(r.holds());
        }
        assert!(binomial_sum_bound(3, 0).is_err());
        assert!(binomial_sum_bound(3, 4).is_err());
    }

    #[test]
    fn estimate_dominates_exact_sum() {
        for m in 1..60 {
            for t in 1..=m {
                assert!(binomial_sum_bound(m, t).unwrap().holds(), "m = {m}, t = {t}");
            }
        }
    }

    #[test]
    fn sqrt_roundings() {
        assert_eq!(sqrt_below(4), int(2));
        assert_eq!(inv_sqrt_above(4), ratio(1, 2));
        let s = sqrt_below(2);
        assert!(&s * &s <= int(2));
        let up = &s + ratio(1, SQRT_SCALE as i64);
        assert!(&up * &up > int(2));
        let i = inv_sqrt_above(3);
        assert!(&i * &i * int(3) >= int(1));
        let down = &i - ratio(1, SQRT_SCALE as i64);
        assert!(&down * &down * int(3) < int(1));
    }

    #[test]
    fn standard_params_shape() {
        let p = ContainerParams::standard(&bx(2, 4));
        assert_eq!(p.m0, int(16));
        assert_eq!(p.rounds[0].d, int(1));
        assert_eq!(p.rounds[0].m, int(30));
        assert_eq!(p.rounds[1].d, ratio(1, 2));
        assert_eq!(p.rounds[1].m, int(18));
        // d_2 rounds √5 down
        let p = ContainerParams::standard(&bx(2, 5));
        assert_eq!(p.rounds[1].d, ratio(2_236_067, 4_000_000));
    }

    #[test]
    fn trivial_family_is_whole_box() {
        let b = bx(3, 2);
        let fam = build_containers(&b, &ContainerParams::trivial(&b), &Limits::default()).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.containers()[0].len(), 9);
        let r = certified_upper_bound(&b, &ContainerParams::trivial(&b), true, &Limits::default()).unwrap();
        assert_eq!(r.certified_log2_upper, int(9));
        assert_eq!(r.above_exact, Some(true));
    }

    #[test]
    fn cube3_standard_params_cover_all_antichains() {
        let b = bx(2, 3);
        let limits = Limits::default();
        let p = ContainerParams::standard(&b);
        let fam = build_containers(&b, &p, &limits).unwrap();
        let all = list_antichains(&b, &limits).unwrap();
        assert_eq!(all.len(), 20);
        for a in &all {
            assert!(fam.covers(a.elements()).unwrap());
        }
        assert_eq!(fam.uncovered_antichain(&limits).unwrap(), None);
    }

    #[test]
    fn active_rounds_cover_and_obey_items() {
        let (b, p) = cube4_active();
        let limits = Limits::default();
        let fam = build_containers(&b, &p, &limits).unwrap();
        assert!(fam.len() > 1);
        assert!(fam.max_container_size() < 16);
        let items = fam.check_items();
        assert!(items.count_ok && items.size_ok, "{items:?}");
        assert_eq!(fam.uncovered_antichain(&limits).unwrap(), None);
        assert!(fam.antichain_bound() >= 168u32.into());
        for a in list_antichains(&b, &limits).unwrap() {
            let (c, t) = container_for(&p, &a).unwrap();
            let c: BTreeSet<Point> = c.into_iter().collect();
            assert!(a.elements().is_subset(&c));
            assert!(t.iter().all(|x| a.elements().contains(x)));
            assert!(fam.containers().contains(&c.into_iter().collect()));
        }
    }

    #[test]
    fn families_are_deterministic() {
        let (b, p) = cube4_active();
        let limits = Limits::default();
        let f1 = build_containers(&b, &p, &limits).unwrap();
        let f2 = build_containers(&b, &p, &limits).unwrap();
        assert_eq!(f1.containers(), f2.containers());
    }

    #[test]
    fn premise_violation_is_reported() {
        // sets of 7 points in {0,1}^4 can have only 3 comparable pairs
        let b = bx(2, 4);
        let p = custom(&b, &[((1, 1), 6)]);
        match build_containers(&b, &p, &Limits::default()) {
            Err(Error::PremiseViolated { round, set_size, pairs, witness, .. }) => {
                assert_eq!(round, 1);
                assert_eq!(witness.len(), set_size);
                assert!((pairs as usize) < set_size);
            }
            other => panic!("expected a premise violation, got {other:?}"),
        }
        let audit = audit_premises(&b, &p, 0, 0, &Limits::default()).unwrap();
        assert_eq!(audit[0].mode, PremiseMode::Exhaustive);
        assert!(audit[0].violations > 0);
    }

    #[test]
    fn premise_audits() {
        let (b, p) = cube4_active();
        let audit = audit_premises(&b, &p, 0, 0, &Limits::default()).unwrap();
        assert!(audit.iter().all(|a| a.mode == PremiseMode::Exhaustive && a.violations == 0));
        let s = bx(2, 4);
        let audit = audit_premises(&s, &ContainerParams::standard(&s), 0, 0, &Limits::default()).unwrap();
        assert!(audit.iter().all(|a| a.mode == PremiseMode::Vacuous));
        // {0,1}^5 is past the exhaustive range; sets above 24 points are dense
        let b5 = bx(2, 5);
        let p5 = custom(&b5, &[((1, 1), 24)]);
        let audit = audit_premises(&b5, &p5, 200, 3, &Limits::default()).unwrap();
        assert_eq!(audit[0].mode, PremiseMode::Audited);
        assert_eq!(audit[0].sets_checked, 200);
        assert_eq!(audit[0].violations, 0);
    }

    #[test]
    fn certified_bounds_small_boxes() {
        let limits = Limits::default();
        for (n, d, count) in [(2u32, 4usize, 168u32), (2, 5, 7581)] {
            let b = bx(n, d);
            let r = certified_upper_bound(&b, &ContainerParams::standard(&b), true, &limits).unwrap();
            assert_eq!(r.exact_count, Some(count.into()));
            assert_eq!(r.above_exact, Some(true));
            assert!(r.above_middle_layer);
        }
    }

    #[test]
    fn certified_bound_with_active_rounds() {
        let (b, p) = cube4_active();
        let limits = Limits::default();
        let r = certified_upper_bound(&b, &p, true, &limits).unwrap();
        assert!(r.vacuous_rounds.is_empty());
        // round 1: C(16, ≤ 5), 5 fingerprint points; round 2: C(8, ≤ 4), 4 more
        assert_eq!(r.max_container_size_bound, int(6 + 5 + 4));
        let fam = build_containers(&b, &p, &limits).unwrap();
        assert!(BigUint::from(fam.fingerprint_count()) <= binomial_sum(&16u32.into(), &5u32.into()) * binomial_sum(&8u32.into(), &4u32.into()));
        assert_eq!(r.above_exact, Some(true));
        assert!(r.above_middle_layer);
    }

    #[test]
    fn bound_for_large_box_uses_estimate() {
        let b = bx(2, 20);
        let r = certified_upper_bound(&b, &ContainerParams::standard(&b), false, &Limits::default()).unwrap();
        assert!(r.vacuous_rounds.is_empty());
        assert!(r.above_middle_layer);
        assert_eq!(r.lemma_count_bound, None);
    }

    #[test]
    fn exact_log2_comparison() {
        assert!(count_within_log2(&168u32.into(), &int(8)));
        assert!(!count_within_log2(&168u32.into(), &int(7)));
        // 2^(15/2) ≈ 181.02
        assert!(count_within_log2(&181u32.into(), &ratio(15, 2)));
        assert!(!count_within_log2(&182u32.into(), &ratio(15, 2)));
    }
}
