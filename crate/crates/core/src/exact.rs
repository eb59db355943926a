//! Exact desk-scale ground truth: antichains, down-sets, high-dimensional
//! partitions and the identities connecting them.
//!
//! Antichains are counted by backtracking over the comparability graph.
//! Down-sets are counted on a separate route: a down-set of `[n]^D` is a
//! decreasing chain `B_0 ⊇ … ⊇ B_{n-1}` of down-sets of `[n]^{D-1}` (its
//! slices along the last axis), so it is enough to list the down-sets one
//! dimension lower and count chains of length `n` among them. Tiny boxes
//! are handled by plain subset filtering instead.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::grid::{GridBox, Point};
use crate::num::binomial;
use crate::order::{bits, Mask, SmallOrder, MAX_POINTS};
use crate::{Error, Limits, Result};

/// Boxes with at most this many points count down-sets by filtering all subsets.
pub const SUBSET_FILTER_POINTS: usize = 20;

/// A set of pairwise incomparable points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Antichain {
    #[serde(skip)]
    bx: GridBox,
    elements: BTreeSet<Point>,
}

impl Antichain {
    pub fn new(bx: GridBox, elements: impl IntoIterator<Item = Point>) -> Result<Self> {
        let elements: BTreeSet<Point> = elements.into_iter().collect();
        for p in &elements {
            bx.check_coords(p.coords())?;
        }
        for x in &elements {
            for y in &elements {
                if x != y && crate::grid::leq(x, y)? {
                    return Err(Error::OutOfRange(format!("{x} ≼ {y}: not an antichain")));
                }
            }
        }
        Ok(Antichain { bx, elements })
    }

    pub fn elements(&self) -> &BTreeSet<Point> {
        &self.elements
    }

    pub fn grid(&self) -> GridBox {
        self.bx
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A downward-closed set of points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DownSet {
    #[serde(skip)]
    bx: GridBox,
    elements: BTreeSet<Point>,
}

impl DownSet {
    pub fn new(bx: GridBox, elements: impl IntoIterator<Item = Point>) -> Result<Self> {
        let elements: BTreeSet<Point> = elements.into_iter().collect();
        for p in &elements {
            bx.check_coords(p.coords())?;
            for q in lower_covers(p) {
                if !elements.contains(&q) {
                    return Err(Error::MalformedDownSet(format!(
                        "{p} is present but {q} is missing"
                    )));
                }
            }
        }
        Ok(DownSet { bx, elements })
    }

    pub fn elements(&self) -> &BTreeSet<Point> {
        &self.elements
    }

    pub fn grid(&self) -> GridBox {
        self.bx
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn lower_covers(p: &Point) -> impl Iterator<Item = Point> + '_ {
    (0..p.dim()).filter(|&t| p.0[t] > 0).map(move |t| {
        let mut q = p.clone();
        q.0[t] -= 1;
        q
    })
}

fn upper_covers(p: &Point, n: u32) -> impl Iterator<Item = Point> + '_ {
    (0..p.dim()).filter(move |&t| p.0[t] + 1 < n).map(move |t| {
        let mut q = p.clone();
        q.0[t] += 1;
        q
    })
}

/// Down-closure of an antichain.
pub fn antichain_to_downset(a: &Antichain) -> DownSet {
    let mut seen: BTreeSet<Point> = BTreeSet::new();
    let mut queue: VecDeque<Point> = a.elements.iter().cloned().collect();
    while let Some(p) = queue.pop_front() {
        if seen.insert(p.clone()) {
            queue.extend(lower_covers(&p));
        }
    }
    DownSet {
        bx: a.bx,
        elements: seen,
    }
}

/// The `≼`-maximal elements of a down-set.
pub fn downset_to_antichain(b: &DownSet) -> Antichain {
    let n = b.bx.n();
    let elements = b
        .elements
        .iter()
        .filter(|p| upper_covers(p, n).all(|q| !b.elements.contains(&q)))
        .cloned()
        .collect();
    Antichain { bx: b.bx, elements }
}

/// A `d`-dimensional array of side `n` with entries in `{0, …, n}`, weakly
/// decreasing along every axis. Entries are stored in lexicographic order of
/// their (0-based) index tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HDPartition {
    n: u32,
    d: usize,
    entries: Vec<u32>,
}

impl HDPartition {
    pub fn new(n: u32, d: usize, entries: Vec<u32>) -> Result<Self> {
        let len = (n as usize).pow(d as u32);
        if entries.len() != len {
            return Err(Error::MalformedPartition(format!(
                "expected {len} entries, found {}",
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|&&e| e > n) {
            return Err(Error::MalformedPartition(format!("entry {e} exceeds {n}")));
        }
        let part = HDPartition { n, d, entries };
        for idx in 0..len {
            let mut stride = 1;
            let mut rest = idx;
            for _ in 0..d {
                let c = rest % n as usize;
                rest /= n as usize;
                if c + 1 < n as usize && part.entries[idx] < part.entries[idx + stride] {
                    return Err(Error::MalformedPartition(format!(
                        "entry {idx} increases along an axis"
                    )));
                }
                stride *= n as usize;
            }
        }
        Ok(part)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }
}

/// Read off the partition of a down-set of `[n]^{d+1}`: the entry at `p` is
/// one more than the largest last-axis coordinate above `p`, or 0 when the
/// fiber is empty.
pub fn downset_to_partition(b: &DownSet) -> Result<HDPartition> {
    let bx = b.bx;
    let d = bx.dim() - 1;
    let n = bx.n();
    let mut entries = vec![0u32; (n as usize).pow(d as u32)];
    for p in &b.elements {
        let (head, last) = p.0.split_at(d);
        let idx = head
            .iter()
            .fold(0usize, |acc, &c| acc * n as usize + c as usize);
        entries[idx] = entries[idx].max(last[0] + 1);
    }
    let part = HDPartition::new(n, d, entries)?;
    if partition_to_downset(&part)?.elements != b.elements {
        return Err(Error::MalformedDownSet("fibers are not intervals from 0".into()));
    }
    Ok(part)
}

/// Inverse of [`downset_to_partition`]: `{(p, s) : s < A[p]}` in `[n]^{d+1}`.
pub fn partition_to_downset(a: &HDPartition) -> Result<DownSet> {
    let bx = GridBox::new(a.n, a.d + 1)?;
    let head_box_len = a.entries.len();
    let n = a.n as usize;
    let mut elements = BTreeSet::new();
    for (idx, &h) in a.entries.iter().enumerate().take(head_box_len) {
        let mut head = vec![0u32; a.d];
        let mut rest = idx;
        for c in head.iter_mut().rev() {
            *c = (rest % n) as u32;
            rest /= n;
        }
        for s in 0..h {
            let mut coords = head.clone();
            coords.push(s);
            elements.insert(Point(coords));
        }
    }
    Ok(DownSet { bx, elements })
}

fn check_result_cap(count: u64, limits: &Limits) -> Result<()> {
    if count > limits.enumeration {
        Err(Error::CapExceeded {
            what: "enumerated objects",
            size: format!(">{count}"),
            cap: limits.enumeration as usize,
        })
    } else {
        Ok(())
    }
}

fn small_order(bx: GridBox) -> Result<SmallOrder> {
    match bx.total_points_usize() {
        Some(t) if t <= MAX_POINTS => SmallOrder::new(bx),
        _ => Err(Error::CapExceeded {
            what: "box points for exact enumeration",
            size: bx.total_points().to_string(),
            cap: MAX_POINTS,
        }),
    }
}

/// Number of antichains of the box, the empty antichain included.
pub fn count_antichains(bx: &GridBox, limits: &Limits) -> Result<BigUint> {
    let order = small_order(*bx)?;
    let mut count = 0u64;
    antichain_walk(&order, order.full(), 0, &mut |_| {
        count += 1;
        check_result_cap(count, limits)
    })?;
    Ok(BigUint::from(count))
}

/// Every antichain of the box, in a fixed order.
pub fn list_antichains(bx: &GridBox, limits: &Limits) -> Result<Vec<Antichain>> {
    let order = small_order(*bx)?;
    let mut out = Vec::new();
    antichain_walk(&order, order.full(), 0, &mut |m| {
        out.push(m);
        check_result_cap(out.len() as u64, limits)
    })?;
    Ok(out
        .into_iter()
        .map(|m| Antichain {
            bx: *bx,
            elements: order.points_of(m).into_iter().collect(),
        })
        .collect())
}

pub(crate) fn antichain_masks(order: &SmallOrder, limits: &Limits) -> Result<Vec<Mask>> {
    let mut out = Vec::new();
    antichain_walk(order, order.full(), 0, &mut |m| {
        out.push(m);
        check_result_cap(out.len() as u64, limits)
    })?;
    Ok(out)
}

fn antichain_walk(
    order: &SmallOrder,
    allowed: Mask,
    chosen: Mask,
    visit: &mut dyn FnMut(Mask) -> Result<()>,
) -> Result<()> {
    if allowed == 0 {
        return visit(chosen);
    }
    let x = allowed.trailing_zeros() as usize;
    let rest = allowed & !(1 << x);
    antichain_walk(order, rest, chosen, visit)?;
    antichain_walk(order, rest & !order.comparable(x), chosen | 1 << x, visit)
}

/// Number of down-sets of the box, the empty down-set included.
pub fn count_downsets(bx: &GridBox, limits: &Limits) -> Result<BigUint> {
    let total = bx.total_points_usize();
    if bx.n() == 1 {
        return Ok(BigUint::from(2u32));
    }
    if let Some(t) = total.filter(|&t| t <= SUBSET_FILTER_POINTS) {
        check_result_cap(1 << t, limits)?;
        let order = SmallOrder::new(*bx)?;
        let count = (0..(1u128 << t)).filter(|&m| order.is_downset(m)).count();
        return Ok(BigUint::from(count));
    }
    let lower = list_downset_masks(bx.n(), bx.dim() - 1, limits)?;
    count_decreasing_chains(&lower, bx.n() as usize, limits)
}

/// Down-sets of `[n]^dim` as masks over its lexicographic point indices;
/// `dim = 0` is the one-point box.
fn list_downset_masks(n: u32, dim: usize, limits: &Limits) -> Result<Vec<Mask>> {
    let points = (n as usize)
        .checked_pow(dim as u32)
        .filter(|&p| p <= MAX_POINTS)
        .ok_or_else(|| Error::CapExceeded {
            what: "slice box points",
            size: BigUint::from(n).pow(dim as u32).to_string(),
            cap: MAX_POINTS,
        })?;
    if dim == 0 {
        return Ok(vec![0, 1]);
    }
    let lower = list_downset_masks(n, dim - 1, limits)?;
    let supersets = superset_lists(&lower);
    let lower_points = points / n as usize;
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(
        lower: &[Mask],
        supersets: &[Vec<usize>],
        n: usize,
        lower_points: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Mask>,
        limits: &Limits,
    ) -> Result<()> {
        if stack.len() == n {
            let mut mask: Mask = 0;
            for (s, &j) in stack.iter().enumerate() {
                for q in bits(lower[j]) {
                    debug_assert!(q < lower_points);
                    mask |= 1 << (q * n + s);
                }
            }
            out.push(mask);
            return check_result_cap(out.len() as u64, limits);
        }
        // slices shrink as the last coordinate grows
        let candidates: Vec<usize> = match stack.last() {
            None => (0..lower.len()).collect(),
            Some(&prev) => (0..lower.len())
                .filter(|&j| supersets[j].contains(&prev))
                .collect(),
        };
        for j in candidates {
            stack.push(j);
            extend(lower, supersets, n, lower_points, stack, out, limits)?;
            stack.pop();
        }
        Ok(())
    }
    extend(
        &lower,
        &supersets,
        n as usize,
        lower_points,
        &mut stack,
        &mut out,
        limits,
    )?;
    Ok(out)
}

/// `supersets[j]`: indices `j'` with `sets[j'] ⊇ sets[j]`.
fn superset_lists(sets: &[Mask]) -> Vec<Vec<usize>> {
    sets.iter()
        .map(|&a| {
            sets.iter()
                .enumerate()
                .filter(|(_, &b)| b & a == a)
                .map(|(k, _)| k)
                .collect()
        })
        .collect()
}

fn count_decreasing_chains(sets: &[Mask], len: usize, limits: &Limits) -> Result<BigUint> {
    check_result_cap(sets.len() as u64, limits)?;
    let supersets = superset_lists(sets);
    let mut ways = vec![BigUint::one(); sets.len()];
    for _ in 1..len {
        ways = supersets
            .iter()
            .map(|sup| sup.iter().map(|&k| &ways[k]).sum())
            .collect();
    }
    Ok(ways.into_iter().sum())
}

/// Size of the largest antichain by exhaustive branch and bound.
pub fn max_antichain_size(bx: &GridBox, limits: &Limits) -> Result<BigUint> {
    let order = small_order(*bx)?;
    let mut best = 0u32;
    let mut visited = 0u64;
    fn search(
        order: &SmallOrder,
        allowed: Mask,
        size: u32,
        best: &mut u32,
        visited: &mut u64,
        limits: &Limits,
    ) -> Result<()> {
        *visited += 1;
        check_result_cap(*visited, limits)?;
        if allowed == 0 {
            *best = (*best).max(size);
            return Ok(());
        }
        if size + allowed.count_ones() <= *best {
            return Ok(());
        }
        let x = allowed.trailing_zeros() as usize;
        let rest = allowed & !(1 << x);
        search(order, rest & !order.comparable(x), size + 1, best, visited, limits)?;
        search(order, rest, size, best, visited, limits)
    }
    search(&order, order.full(), 0, &mut best, &mut visited, limits)?;
    Ok(BigUint::from(best))
}

/// MacMahon's box formula `∏_{1≤i,j,k≤n} (i+j+k-1)/(i+j+k-2)`, evaluated in
/// exact rationals.
pub fn macmahon_p2(n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::OutOfRange("MacMahon's product needs n ≥ 1".into()));
    }
    let mut prod = BigRational::one();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                let s = (i + j + k) as i64;
                prod *= BigRational::new((s - 1).into(), (s - 2).into());
            }
        }
    }
    if !prod.is_integer() {
        return Err(Error::NonIntegral(crate::num::fmt_ratio(&prod)));
    }
    Ok(prod.to_integer().to_biguint().expect("positive product"))
}

/// `P_1(n) = C(2n, n)`.
pub fn binomial_p1(n: u32) -> BigUint {
    binomial(&BigUint::from(2 * n), n as u64)
}

/// `P_d(n)`: closed forms for `d ≤ 2`, down-set counting of `[n]^{d+1}` otherwise.
pub fn partition_count(d: usize, n: u32, limits: &Limits) -> Result<BigUint> {
    match d {
        0 => Ok(BigUint::from(n + 1)),
        1 => Ok(binomial_p1(n)),
        2 => macmahon_p2(n),
        _ => count_downsets(&GridBox::new(n, d + 1)?, limits),
    }
}

/// The Erdős–Szekeres-type parameter `N_3(d+1, n) = P_d(n) + 1`.
pub fn erdos_szekeres_n3(d: usize, n: u32, limits: &Limits) -> Result<BigUint> {
    Ok(partition_count(d, n, limits)? + 1u32)
}
