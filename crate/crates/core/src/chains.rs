//! Random chain decompositions of the box from one random matching per
//! pair of consecutive levels.
//!
//! For the graph `G_i` between `V_i` and `V_{i+1}` with `2i ≤ (n-1)D` the
//! fractional matching is `f(v,u) = w_vu / deg(v)`:
//!
//! - full regime, `i ≤ (n-1)D/2 - (n-1)/2`: every lower vertex has mass one,
//!   so `m = |V_i|` and every sampled matching saturates `V_i`;
//! - scaled regime, the remaining levels up to the middle: `f` is multiplied
//!   by `θ`, the largest number `≤ (D-3)/(D-1)` with `θ|V_i|` integral, and
//!   `m = θ|V_i|`.
//!
//! Levels above the middle are handled through the reflection
//! `x ↦ (n-1) - x`, which maps `G_i` onto `G_{(n-1)D-1-i}` with the two sides
//! swapped and weights preserved.
//!
//! Each level decomposes its fractional matching exactly (see
//! [`crate::matching`]); a sample draws one matching per level, independently,
//! and the union of the matchings is a disjoint union of chains.
//!
//! Randomness: level `i` of the sample with seed `s` reads from
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i`. Trial `t` of a batch with
//! master seed `s` uses seed [`trial_seed`]`(s, t)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::flow::maximum_matching;
use crate::grid::{leq, GridBox, Point};
use crate::level_graph::LevelGraph;
use crate::matching::{decompose, BipartiteGraph, FractionalMatching, MatchingDistribution};
use crate::num::{fmt_ratio, int, ratio, ser_ratio};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `f = w/deg(v)`; saturates the lower level.
    FullLower,
    /// `θ·w/deg(v)`; matchings of size `θ|V_i|`.
    Scaled,
    /// Reflection of a full level; saturates the upper level.
    MirroredFull,
    /// Reflection of a scaled level.
    MirroredScaled,
    /// Scaled level with `D ≤ 3`, where `θ` is not positive: a fixed
    /// maximum-cardinality matching is used instead.
    Fallback,
}

impl Regime {
    pub fn is_mirrored(self) -> bool {
        matches!(self, Regime::MirroredFull | Regime::MirroredScaled)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelPlan {
    pub level: usize,
    pub regime: Regime,
    /// `θ`, or 1 for the full regimes.
    #[serde(serialize_with = "ser_ratio")]
    pub theta: BigRational,
    /// Size of every matching drawn for this level.
    pub size: u64,
}

/// Regime of `G_i` from the box parameters alone.
pub fn regime_of(bx: &GridBox, i: usize) -> Regime {
    let top = bx.max_rank();
    let n1 = bx.n() as usize - 1;
    let lower = |j: usize| {
        if 2 * j + n1 <= top {
            Regime::FullLower
        } else if bx.dim() <= 3 {
            Regime::Fallback
        } else {
            Regime::Scaled
        }
    };
    if 2 * i <= top {
        lower(i)
    } else {
        match lower(top - 1 - i) {
            Regime::FullLower => Regime::MirroredFull,
            Regime::Scaled => Regime::MirroredScaled,
            other => other,
        }
    }
}

/// `θ`: the largest number `≤ (D-3)/(D-1)` with `θ·size` integral.
pub fn theta(dim: usize, size: u64) -> Result<BigRational> {
    if dim <= 3 {
        return Err(Error::Degenerate(format!(
            "θ ≤ (D-3)/(D-1) is not positive for D = {dim}"
        )));
    }
    let d = dim as u64;
    let numer = (size as u128 * (d - 3) as u128) / (d - 1) as u128;
    Ok(ratio(numer as i64, size as i64))
}

/// `f(v,u) = w_vu / deg(v)` on every edge of `g`.
pub fn lower_fraction(g: &LevelGraph) -> Vec<BigRational> {
    g.edges()
        .iter()
        .map(|e| ratio(e.weight as i64, g.edge_degree_lower(e.lower) as i64))
        .collect()
}

/// The fractional matching for `G_i` and its plan.
pub fn build_level_fraction(g: &LevelGraph, limits: &Limits) -> Result<(FractionalMatching, LevelPlan)> {
    let bx = *g.grid();
    let i = g.level();
    let regime = regime_of(&bx, i);
    match regime {
        Regime::FullLower | Regime::Scaled => {
            let (values, theta, size) = oriented_fraction(g, regime)?;
            Ok((
                FractionalMatching::new(values, size),
                LevelPlan {
                    level: i,
                    regime,
                    theta,
                    size,
                },
            ))
        }
        Regime::MirroredFull | Regime::MirroredScaled => {
            let j = bx.max_rank() - 1 - i;
            let mirror = LevelGraph::build(&bx, j, limits)?;
            let inner = if regime == Regime::MirroredFull {
                Regime::FullLower
            } else {
                Regime::Scaled
            };
            let (mirror_values, theta, size) = oriented_fraction(&mirror, inner)?;
            let lookup: HashMap<(usize, usize), usize> = mirror
                .edges()
                .iter()
                .enumerate()
                .map(|(k, e)| ((e.lower, e.upper), k))
                .collect();
            let mut values = Vec::with_capacity(g.edges().len());
            for e in g.edges() {
                let low = mirror
                    .lower_position(&bx.reflect(&g.upper()[e.upper]))
                    .ok_or_else(|| Error::Internal("reflection left the level".into()))?;
                let up = mirror
                    .upper_position(&bx.reflect(&g.lower()[e.lower]))
                    .ok_or_else(|| Error::Internal("reflection left the level".into()))?;
                values.push(mirror_values[lookup[&(low, up)]].clone());
            }
            Ok((
                FractionalMatching::new(values, size),
                LevelPlan {
                    level: i,
                    regime,
                    theta,
                    size,
                },
            ))
        }
        Regime::Fallback => {
            let size = maximum_matching(g.lower().len(), g.upper().len(), &bip_edges(g)).len() as u64;
            Ok((
                FractionalMatching::new(vec![BigRational::zero(); g.edges().len()], size),
                LevelPlan {
                    level: i,
                    regime,
                    theta: BigRational::zero(),
                    size,
                },
            ))
        }
    }
}

fn oriented_fraction(g: &LevelGraph, regime: Regime) -> Result<(Vec<BigRational>, BigRational, u64)> {
    let base = lower_fraction(g);
    let lower = g.lower().len() as u64;
    match regime {
        Regime::FullLower => Ok((base, BigRational::one(), lower)),
        Regime::Scaled => {
            let theta = theta(g.grid().dim(), lower)?;
            let size = (&theta * int(lower)).to_integer().to_u64().unwrap();
            Ok((base.into_iter().map(|x| x * &theta).collect(), theta, size))
        }
        _ => unreachable!("only lower-oriented regimes are built directly"),
    }
}

fn bip_edges(g: &LevelGraph) -> Vec<(usize, usize)> {
    g.edges().iter().map(|e| (e.lower, e.upper)).collect()
}

/// The bipartite graph of `G_i` with the lower level on the left.
pub fn bipartite_of(g: &LevelGraph) -> BipartiteGraph {
    BipartiteGraph::new(g.lower().len(), g.upper().len(), bip_edges(g))
        .expect("level graph edges are in range")
}

/// Upper-vertex sums of `f` against the bound for their level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarginalSumReport {
    pub level: usize,
    pub delta: i64,
    /// `1` when `δ ≥ n-1`, `(D-1)/(D-3)` otherwise; `None` when that ratio
    /// is undefined or not positive (`D ≤ 3`), and for levels above the
    /// middle, which are never fractioned from below (see `in_scope`).
    #[serde(serialize_with = "ser_opt_ratio")]
    pub bound: Option<BigRational>,
    #[serde(serialize_with = "ser_ratio")]
    pub max_sum: BigRational,
    /// `|V_i| ≤ |V_(i+1)|`, i.e. `δ ≥ -1`. Above the middle the sampler
    /// works on the reflected level instead, so the bound is not claimed.
    pub in_scope: bool,
    pub ok: bool,
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_ratio(r)),
        None => s.serialize_none(),
    }
}

/// For every `u ∈ V_{i+1}`, compares `Σ_v f(v,u)` with the bound implied by
/// `δ = D(n-1) - 2(i+1)`.
pub fn marginal_sum_report(g: &LevelGraph, f: &[BigRational]) -> MarginalSumReport {
    let bx = g.grid();
    let delta = g.delta();
    let n1 = bx.n() as i64 - 1;
    let dim = bx.dim() as i64;
    let in_scope = delta >= -1;
    let bound = if !in_scope {
        None
    } else if delta >= n1 {
        Some(BigRational::one())
    } else if dim > 3 {
        Some(ratio(dim - 1, dim - 3))
    } else {
        None
    };
    let mut sums = vec![BigRational::zero(); g.upper().len()];
    for (e, x) in g.edges().iter().zip(f) {
        sums[e.upper] += x;
    }
    let max_sum = sums.into_iter().max().unwrap_or_else(BigRational::zero);
    let ok = bound.as_ref().map_or(true, |b| max_sum <= *b);
    MarginalSumReport {
        level: g.level(),
        delta,
        bound,
        max_sum,
        in_scope,
        ok,
    }
}

pub fn check_marginal_sum_bound(g: &LevelGraph, f: &[BigRational]) -> bool {
    marginal_sum_report(g, f).ok
}

/// A level graph together with its exact matching distribution.
#[derive(Debug, Clone)]
pub struct LevelDistribution {
    pub graph: LevelGraph,
    pub plan: LevelPlan,
    pub fraction: FractionalMatching,
    pub distribution: MatchingDistribution,
    /// Global box indices of each edge's endpoints.
    endpoints: Vec<(usize, usize)>,
}

impl LevelDistribution {
    pub fn build(bx: &GridBox, i: usize, limits: &Limits) -> Result<Self> {
        let graph = LevelGraph::build(bx, i, limits)?;
        let (fraction, plan) = build_level_fraction(&graph, limits)?;
        let bip = bipartite_of(&graph);
        let distribution = if plan.regime == Regime::Fallback {
            MatchingDistribution::point_mass(
                graph.edges().len(),
                maximum_matching(bip.left(), bip.right(), bip.edges()),
            )
        } else {
            decompose(&bip, &fraction)?
        };
        let endpoints = graph
            .edges()
            .iter()
            .map(|e| {
                (
                    bx.index_of(&graph.lower()[e.lower]),
                    bx.index_of(&graph.upper()[e.upper]),
                )
            })
            .collect();
        Ok(LevelDistribution {
            graph,
            plan,
            fraction,
            distribution,
            endpoints,
        })
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `t` in a batch with master seed `master`.
pub fn trial_seed(master: u64, t: u64) -> u64 {
    mix(master ^ mix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn level_rng(seed: u64, level: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

/// All level distributions of one box, built once and sampled many times.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    bx: GridBox,
    levels: Vec<LevelDistribution>,
    total: usize,
}

impl ChainSampler {
    pub fn new(bx: &GridBox, limits: &Limits) -> Result<Self> {
        let total = bx
            .total_points_usize()
            .filter(|&t| t <= limits.box_points)
            .ok_or_else(|| Error::CapExceeded {
                what: "box points",
                size: bx.total_points().to_string(),
                cap: limits.box_points,
            })?;
        let levels = (0..bx.max_rank())
            .map(|i| LevelDistribution::build(bx, i, limits))
            .collect::<Result<_>>()?;
        Ok(ChainSampler {
            bx: *bx,
            levels,
            total,
        })
    }

    pub fn grid(&self) -> &GridBox {
        &self.bx
    }

    pub fn levels(&self) -> &[LevelDistribution] {
        &self.levels
    }

    /// True when some level had to fall back to a fixed maximum matching.
    pub fn out_of_scope(&self) -> bool {
        self.levels.iter().any(|l| l.plan.regime == Regime::Fallback)
    }

    fn draw_level(&self, seed: u64, i: usize) -> &[usize] {
        let lvl = &self.levels[i];
        &lvl.distribution.sample(&mut level_rng(seed, i)).edges
    }

    pub fn sample(&self, seed: u64) -> ChainDecomposition {
        let mut up = vec![usize::MAX; self.total];
        let mut has_down = vec![false; self.total];
        let mut matching_sizes = Vec::with_capacity(self.levels.len());
        for (i, lvl) in self.levels.iter().enumerate() {
            let edges = self.draw_level(seed, i);
            matching_sizes.push(edges.len() as u64);
            for &e in edges {
                let (a, b) = lvl.endpoints[e];
                up[a] = b;
                has_down[b] = true;
            }
        }
        let mut chains = Vec::new();
        for start in 0..self.total {
            if has_down[start] {
                continue;
            }
            let mut chain = vec![self.bx.point_at(start)];
            let mut cur = start;
            while up[cur] != usize::MAX {
                cur = up[cur];
                chain.push(self.bx.point_at(cur));
            }
            chains.push(chain);
        }
        ChainDecomposition {
            bx: self.bx,
            seed,
            chains,
            matching_sizes,
            plans: self.levels.iter().map(|l| l.plan.clone()).collect(),
        }
    }

    /// Whether `x` and `y` (with `x ≼ y`) end up in the same chain of the
    /// sample with this seed. Only the levels between them are drawn; the
    /// draws coincide with those of [`ChainSampler::sample`].
    pub fn same_chain(&self, x: &Point, y: &Point, seed: u64) -> bool {
        let (rx, ry) = (x.rank(), y.rank());
        if rx > ry || !leq(x, y).unwrap_or(false) {
            return false;
        }
        let target = self.bx.index_of(y);
        let mut cur = self.bx.index_of(x);
        for i in rx..ry {
            let lvl = &self.levels[i];
            let next = self
                .draw_level(seed, i)
                .iter()
                .map(|&e| lvl.endpoints[e])
                .find(|&(a, _)| a == cur);
            match next {
                Some((_, b)) => cur = b,
                None => return false,
            }
        }
        cur == target
    }

    /// Fraction of `trials` samples in which `x` and `y` share a chain.
    pub fn estimate_pair_probability(&self, x: &Point, y: &Point, trials: u64, seed: u64) -> BigRational {
        let hits = (0..trials)
            .filter(|&t| self.same_chain(x, y, trial_seed(seed, t)))
            .count();
        ratio(hits as i64, trials.max(1) as i64)
    }
}

impl ChainSampler {
    /// The exact probability that `x` and `y` share a chain.
    ///
    /// Levels are drawn independently and edge `e` of level `i` is in the
    /// drawn matching with probability equal to its marginal, so the answer
    /// is the sum, over cover paths from `x` to `y`, of the product of the
    /// marginals along the path.
    pub fn exact_pair_probability(&self, x: &Point, y: &Point) -> Result<BigRational> {
        self.bx.check_coords(x.coords())?;
        self.bx.check_coords(y.coords())?;
        if !leq(x, y)? {
            return Ok(BigRational::zero());
        }
        let mut reach: HashMap<Point, BigRational> = HashMap::from([(x.clone(), BigRational::one())]);
        for i in x.rank()..y.rank() {
            let lvl = &self.levels[i];
            let marginals = lvl.distribution.marginals();
            let mut next: HashMap<Point, BigRational> = HashMap::new();
            for (p, pr) in &reach {
                let v = lvl.graph.lower_position(p).expect("reachable points lie in the level");
                for &e in lvl.graph.lower_edges(v) {
                    let u = &lvl.graph.upper()[lvl.graph.edges()[e].upper];
                    if leq(u, y)? && !marginals[e].is_zero() {
                        *next.entry(u.clone()).or_insert_with(BigRational::zero) += pr * &marginals[e];
                    }
                }
            }
            reach = next;
        }
        Ok(reach.remove(y).unwrap_or_else(BigRational::zero))
    }
}

/// Samples one decomposition of `bx`.
pub fn sample_chain_decomposition(bx: &GridBox, seed: u64, limits: &Limits) -> Result<ChainDecomposition> {
    Ok(ChainSampler::new(bx, limits)?.sample(seed))
}

/// `a!·(n/D)^a`, the bound on the probability that a fixed pair with rank
/// gap `a` shares a chain.
pub fn pair_probability_bound(bx: &GridBox, a: u32) -> BigRational {
    let n = BigInt::from(bx.n());
    let d = BigInt::from(bx.dim());
    BigRational::new(
        BigInt::from(crate::num::factorial(a)) * n.pow(a),
        d.pow(a),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    bx: GridBox,
    seed: u64,
    chains: Vec<Vec<Point>>,
    matching_sizes: Vec<u64>,
    plans: Vec<LevelPlan>,
}

impl ChainDecomposition {
    pub fn grid(&self) -> &GridBox {
        &self.bx
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Chains bottom-up, ordered by their minimal element.
    pub fn chains(&self) -> &[Vec<Point>] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// `|M_i|` for every level.
    pub fn matching_sizes(&self) -> &[u64] {
        &self.matching_sizes
    }

    pub fn plans(&self) -> &[LevelPlan] {
        &self.plans
    }

    pub fn out_of_scope(&self) -> bool {
        self.plans.iter().any(|p| p.regime == Regime::Fallback)
    }

    /// Checks that the chains partition the box and that consecutive
    /// elements are cover pairs.
    pub fn verify_partition(&self) -> std::result::Result<(), String> {
        let total = self
            .bx
            .total_points_usize()
            .ok_or("box too large to verify")?;
        let mut seen = vec![false; total];
        for chain in &self.chains {
            for w in chain.windows(2) {
                let (x, y) = (&w[0], &w[1]);
                if y.rank() != x.rank() + 1 || !leq(x, y).unwrap_or(false) {
                    return Err(format!("{x} -> {y} is not a cover pair"));
                }
            }
            for p in chain {
                let k = self.bx.index_of(p);
                if std::mem::replace(&mut seen[k], true) {
                    return Err(format!("{p} appears twice"));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(k) => Err(format!("{} is not covered", self.bx.point_at(k))),
            None => Ok(()),
        }
    }

    /// `(1 + 3n/D)·N_{n,D}`.
    pub fn chain_count_bound(&self) -> BigRational {
        chain_count_bound(&self.bx)
    }

    pub fn check_chain_count_bound(&self) -> bool {
        int(self.len() as u64) <= self.chain_count_bound()
    }

    /// Checks the per-level size guarantees: full levels saturate the
    /// smaller side they are built from and scaled levels have
    /// `|M_i| ≥ (1 - 3/D)·|V_j|` for the level `j` they are built from.
    pub fn verify_matching_sizes(&self, level_sizes: &[BigUint]) -> std::result::Result<(), String> {
        let d = self.bx.dim() as u64;
        for (plan, &got) in self.plans.iter().zip(&self.matching_sizes) {
            let i = plan.level;
            let side = if plan.regime.is_mirrored() {
                level_sizes[i + 1].to_u64().unwrap()
            } else {
                level_sizes[i].to_u64().unwrap()
            };
            let ok = match plan.regime {
                Regime::FullLower | Regime::MirroredFull => got == side,
                Regime::Scaled | Regime::MirroredScaled => got * d >= (d - 3) * side && got == plan.size,
                Regime::Fallback => got == plan.size,
            };
            if !ok {
                return Err(format!(
                    "level {i} ({:?}): matching of size {got} against side {side}",
                    plan.regime
                ));
            }
        }
        Ok(())
    }

    /// Every chain's element closest to the middle rank `k` has rank in
    /// `[k - (n-1)/2, k + (n+1)/2]`.
    pub fn verify_closest_ranks(&self) -> std::result::Result<(), String> {
        let k = self.bx.middle_rank() as i64;
        let n = self.bx.n() as i64;
        for chain in &self.chains {
            let closest = chain
                .iter()
                .map(|p| p.rank() as i64)
                .min_by_key(|&r| (r - k).abs())
                .unwrap();
            if 2 * closest < 2 * k - (n - 1) || 2 * closest > 2 * k + n + 1 {
                return Err(format!(
                    "chain starting at {} stays at rank {closest}",
                    chain[0]
                ));
            }
        }
        Ok(())
    }

    /// Text export: a header with the box, seed, chain count and bound, then
    /// one chain per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# chains n={} D={} seed={} N={} bound={}\n",
            self.bx.n(),
            self.bx.dim(),
            self.seed,
            self.len(),
            fmt_ratio(&self.chain_count_bound())
        );
        for chain in &self.chains {
            let line: Vec<String> = chain.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// `(1 + 3n/D)·N_{n,D}` as an exact rational.
pub fn chain_count_bound(bx: &GridBox) -> BigRational {
    let d = bx.dim() as i64;
    ratio(d + 3 * bx.n() as i64, d) * crate::num::from_biguint(&bx.middle_layer_size())
}
