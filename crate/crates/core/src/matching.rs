//! Exact decomposition of a fractional matching of integral total mass `m`
//! into a probability distribution over matchings of size exactly `m`.
//!
//! The input `f` lies in the polytope of edge weights in `[0, 1]` with
//! vertex sums at most one and total mass `m`. For a bipartite graph this
//! polytope is integral, its vertices being the size-`m` matchings, so `f`
//! is a convex combination of them.
//!
//! The decomposition works on an equality form of the polytope. A slack
//! vertex `α` joins the right side and is adjacent to every left vertex with
//! weight equal to that vertex's slack, and symmetrically `β` joins the left
//! side. Every original vertex then has weighted degree exactly one, `α` has
//! `|A| - m` and `β` has `|B| - m`. Each step finds, by max-flow on the
//! current support, a degree-exact integral point `M` (a size-`m` matching
//! of the original graph), takes the largest coefficient `c` that keeps the
//! residual nonnegative (the smallest residual weight on `M`) and subtracts
//! `c·χ_M`. Each step moves the residual to a strictly smaller face of the
//! polytope, so there are at most `|E|` atoms.
//!
//! All arithmetic is exact. Weights are scaled by the common denominator `L`
//! of `f`, so the residual stays integral and atom probabilities are
//! `weight / L`.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::flow::FlowNetwork;
use crate::num::{fmt_ratio, int};
use crate::{Error, Result};

/// A bipartite multigraph; edge `k` joins left vertex `edges[k].0` to right
/// vertex `edges[k].1`. Parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(v, u)) = edges.iter().find(|&&(v, u)| v >= left || u >= right) {
            return Err(Error::OutOfRange(format!(
                "edge ({v}, {u}) outside {left} x {right}"
            )));
        }
        Ok(BipartiteGraph { left, right, edges })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_matching(&self, edges: &[usize]) -> bool {
        let mut l = vec![false; self.left];
        let mut r = vec![false; self.right];
        edges.iter().all(|&e| {
            let (v, u) = self.edges[e];
            !std::mem::replace(&mut l[v], true) && !std::mem::replace(&mut r[u], true)
        })
    }
}

/// Edge weights `f` together with the target size `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalMatching {
    pub values: Vec<BigRational>,
    pub size: u64,
}

impl FractionalMatching {
    pub fn new(values: Vec<BigRational>, size: u64) -> Self {
        FractionalMatching { values, size }
    }

    pub fn total(&self) -> BigRational {
        self.values.iter().sum()
    }
}

/// A violated polytope constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    WrongLength { expected: usize, found: usize },
    EdgeOutOfRange { edge: usize, value: String },
    LeftOverfull { vertex: usize, sum: String },
    RightOverfull { vertex: usize, sum: String },
    MassMismatch { total: String, size: u64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::WrongLength { expected, found } => {
                write!(f, "{found} edge values for {expected} edges")
            }
            Violation::EdgeOutOfRange { edge, value } => {
                write!(f, "edge {edge} has value {value} outside [0, 1]")
            }
            Violation::LeftOverfull { vertex, sum } => {
                write!(f, "left vertex {vertex} has sum {sum} > 1")
            }
            Violation::RightOverfull { vertex, sum } => {
                write!(f, "right vertex {vertex} has sum {sum} > 1")
            }
            Violation::MassMismatch { total, size } => {
                write!(f, "total mass {total} differs from m = {size}")
            }
        }
    }
}

/// Checks `0 ≤ f ≤ 1`, both vertex-sum constraints and `Σ f = m`, exactly.
pub fn validate_fractional_matching(
    g: &BipartiteGraph,
    f: &FractionalMatching,
) -> std::result::Result<(), Violation> {
    if f.values.len() != g.edges.len() {
        return Err(Violation::WrongLength {
            expected: g.edges.len(),
            found: f.values.len(),
        });
    }
    let one = BigRational::one();
    if let Some((edge, value)) = f
        .values
        .iter()
        .enumerate()
        .find(|(_, x)| x.is_negative() || **x > one)
    {
        return Err(Violation::EdgeOutOfRange {
            edge,
            value: fmt_ratio(value),
        });
    }
    let mut left = vec![BigRational::zero(); g.left];
    let mut right = vec![BigRational::zero(); g.right];
    for (&(v, u), x) in g.edges.iter().zip(&f.values) {
        left[v] += x;
        right[u] += x;
    }
    if let Some((vertex, sum)) = left.iter().enumerate().find(|(_, s)| **s > one) {
        return Err(Violation::LeftOverfull {
            vertex,
            sum: fmt_ratio(sum),
        });
    }
    if let Some((vertex, sum)) = right.iter().enumerate().find(|(_, s)| **s > one) {
        return Err(Violation::RightOverfull {
            vertex,
            sum: fmt_ratio(sum),
        });
    }
    let total = f.total();
    if total != int(f.size) {
        return Err(Violation::MassMismatch {
            total: fmt_ratio(&total),
            size: f.size,
        });
    }
    Ok(())
}

/// One matching with its unnormalized weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atom {
    /// Edge indices in increasing order.
    pub edges: Vec<usize>,
    #[serde(skip)]
    pub weight: BigUint,
}

/// A finite distribution over matchings of one fixed size. Atom `k` has
/// probability `atoms[k].weight / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingDistribution {
    size: u64,
    edge_count: usize,
    atoms: Vec<Atom>,
    denominator: BigUint,
    cumulative: Vec<BigUint>,
}

impl MatchingDistribution {
    fn from_atoms(size: u64, edge_count: usize, mut atoms: Vec<Atom>, denominator: BigUint) -> Self {
        atoms.sort_by(|a, b| a.edges.cmp(&b.edges));
        let mut acc = BigUint::zero();
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += &a.weight;
                acc.clone()
            })
            .collect();
        MatchingDistribution {
            size,
            edge_count,
            atoms,
            denominator,
            cumulative,
        }
    }

    /// The distribution concentrated on a single matching.
    pub fn point_mass(edge_count: usize, edges: Vec<usize>) -> Self {
        let size = edges.len() as u64;
        Self::from_atoms(
            size,
            edge_count,
            vec![Atom {
                edges,
                weight: BigUint::one(),
            }],
            BigUint::one(),
        )
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn probability(&self, k: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.atoms[k].weight.clone()),
            BigInt::from(self.denominator.clone()),
        )
    }

    pub fn probabilities(&self) -> Vec<BigRational> {
        (0..self.atoms.len()).map(|k| self.probability(k)).collect()
    }

    /// `Σ_atoms p·χ_M`, one entry per edge.
    pub fn marginals(&self) -> Vec<BigRational> {
        let mut acc = vec![BigUint::zero(); self.edge_count];
        for a in &self.atoms {
            for &e in &a.edges {
                acc[e] += &a.weight;
            }
        }
        acc.into_iter()
            .map(|w| BigRational::new(BigInt::from(w), BigInt::from(self.denominator.clone())))
            .collect()
    }

    /// Draws one atom with its exact probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Atom {
        let x = rng.gen_biguint_below(&self.denominator);
        let k = self.cumulative.partition_point(|c| c <= &x);
        &self.atoms[k]
    }

    pub fn sample_seeded(&self, seed: u64) -> &Atom {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Audit record: every atom with its probability as `"p/q"`.
    pub fn to_record(&self) -> DistributionRecord {
        DistributionRecord {
            size: self.size,
            edges: self.edge_count,
            atoms: self
                .atoms
                .iter()
                .enumerate()
                .map(|(k, a)| AtomRecord {
                    probability: fmt_ratio(&self.probability(k)),
                    edges: a.edges.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionRecord {
    pub size: u64,
    pub edges: usize,
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomRecord {
    pub probability: String,
    pub edges: Vec<usize>,
}

/// Decomposes `f` into size-`m` matchings whose marginals are exactly `f`.
pub fn decompose(g: &BipartiteGraph, f: &FractionalMatching) -> Result<MatchingDistribution> {
    validate_fractional_matching(g, f).map_err(|v| Error::Infeasible(v.to_string()))?;
    let m = f.size;
    let denominator = f
        .values
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
        .to_biguint()
        .expect("positive denominators");
    let scale = |x: &BigRational| -> BigUint {
        (x * BigRational::from_integer(BigInt::from(denominator.clone())))
            .to_integer()
            .to_biguint()
            .expect("nonnegative")
    };
    let mut residual: Vec<BigUint> = f.values.iter().map(scale).collect();
    let mut left_slack = vec![denominator.clone(); g.left];
    let mut right_slack = vec![denominator.clone(); g.right];
    for (&(v, u), r) in g.edges.iter().zip(&residual) {
        left_slack[v] -= r;
        right_slack[u] -= r;
    }
    let mut mass = denominator.clone();
    let mut atoms = Vec::new();
    let bound = g.edges.len().max(1);

    while !mass.is_zero() {
        if atoms.len() >= bound {
            return Err(Error::Internal(format!(
                "decomposition did not terminate within {bound} atoms"
            )));
        }
        let vertex = extract_vertex(g, m, &residual, &left_slack, &right_slack)?;
        let mut coeff = mass.clone();
        for &e in &vertex.edges {
            coeff = coeff.min(residual[e].clone());
        }
        for &v in &vertex.left_unmatched {
            coeff = coeff.min(left_slack[v].clone());
        }
        for &u in &vertex.right_unmatched {
            coeff = coeff.min(right_slack[u].clone());
        }
        debug_assert!(!coeff.is_zero());
        for &e in &vertex.edges {
            residual[e] -= &coeff;
        }
        for &v in &vertex.left_unmatched {
            left_slack[v] -= &coeff;
        }
        for &u in &vertex.right_unmatched {
            right_slack[u] -= &coeff;
        }
        mass -= &coeff;
        atoms.push(Atom {
            edges: vertex.edges,
            weight: coeff,
        });
    }
    Ok(MatchingDistribution::from_atoms(
        m,
        g.edges.len(),
        atoms,
        denominator,
    ))
}

struct Vertex {
    edges: Vec<usize>,
    left_unmatched: Vec<usize>,
    right_unmatched: Vec<usize>,
}

/// A size-`m` matching inside the support of the residual that leaves only
/// vertices with positive slack uncovered.
fn extract_vertex(
    g: &BipartiteGraph,
    m: u64,
    residual: &[BigUint],
    left_slack: &[BigUint],
    right_slack: &[BigUint],
) -> Result<Vertex> {
    let (a, b) = (g.left, g.right);
    // nodes: A, then B, then β (left slack sink), α (right), source, sink
    let beta = a + b;
    let alpha = beta + 1;
    let source = alpha + 1;
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    let alpha_cap = a as u64 - m;
    let beta_cap = b as u64 - m;
    for v in 0..a {
        net.add_arc(source, v, 1);
    }
    net.add_arc(source, beta, beta_cap);
    let edge_arcs: Vec<Option<usize>> = g
        .edges
        .iter()
        .zip(residual)
        .map(|(&(v, u), r)| (!r.is_zero()).then(|| net.add_arc(v, a + u, 1)))
        .collect();
    let to_alpha: Vec<Option<usize>> = (0..a)
        .map(|v| (!left_slack[v].is_zero()).then(|| net.add_arc(v, alpha, 1)))
        .collect();
    let from_beta: Vec<Option<usize>> = (0..b)
        .map(|u| (!right_slack[u].is_zero()).then(|| net.add_arc(beta, a + u, 1)))
        .collect();
    for u in 0..b {
        net.add_arc(a + u, sink, 1);
    }
    net.add_arc(alpha, sink, alpha_cap);
    let need = a as u64 + beta_cap;
    let got = net.max_flow(source, sink);
    if got != need {
        return Err(Error::Internal(format!(
            "no integral point in the residual face (flow {got} of {need})"
        )));
    }
    let used = |arc: &Option<usize>| arc.map_or(false, |id| net.flow(id) > 0);
    Ok(Vertex {
        edges: (0..g.edges.len()).filter(|&e| used(&edge_arcs[e])).collect(),
        left_unmatched: (0..a).filter(|&v| used(&to_alpha[v])).collect(),
        right_unmatched: (0..b).filter(|&u| used(&from_beta[u])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;
    use proptest::prelude::*;

    fn star3() -> BipartiteGraph {
        BipartiteGraph::new(1, 3, vec![(0, 0), (0, 1), (0, 2)]).unwrap()
    }

    fn four_cycle() -> BipartiteGraph {
        BipartiteGraph::new(2, 2, vec![(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap()
    }

    fn uniform(k: usize, x: BigRational, m: u64) -> FractionalMatching {
        FractionalMatching::new(vec![x; k], m)
    }

    fn check_exact(g: &BipartiteGraph, f: &FractionalMatching, d: &MatchingDistribution) {
        assert_eq!(d.probabilities().iter().sum::<BigRational>(), BigRational::one());
        assert_eq!(d.marginals(), f.values);
        assert!(d.atoms().len() <= g.edge_count() + 1);
        for a in d.atoms() {
            assert_eq!(a.edges.len() as u64, f.size);
            assert!(g.is_matching(&a.edges));
            assert!(!a.weight.is_zero());
        }
        let rebuilt = FractionalMatching::new(d.marginals(), f.size);
        assert_eq!(validate_fractional_matching(g, &rebuilt), Ok(()));
    }

    #[test]
    fn validate_examples() {
        assert_eq!(
            validate_fractional_matching(&star3(), &uniform(3, ratio(1, 3), 1)),
            Ok(())
        );
        let single = BipartiteGraph::new(1, 1, vec![(0, 0)]).unwrap();
        assert_eq!(
            validate_fractional_matching(&single, &uniform(1, int(1), 1)),
            Ok(())
        );
        let path = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        assert_eq!(
            validate_fractional_matching(&path, &uniform(2, ratio(3, 4), 1)),
            Err(Violation::RightOverfull {
                vertex: 0,
                sum: "3/2".into()
            })
        );
        assert_eq!(
            validate_fractional_matching(&star3(), &uniform(3, ratio(1, 3), 2)),
            Err(Violation::MassMismatch {
                total: "1".into(),
                size: 2
            })
        );
        assert!(matches!(
            validate_fractional_matching(&single, &uniform(1, ratio(-1, 2), 0)),
            Err(Violation::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn star_decomposes_uniformly() {
        let f = uniform(3, ratio(1, 3), 1);
        let d = decompose(&star3(), &f).unwrap();
        assert_eq!(d.atoms().len(), 3);
        assert!(d.probabilities().iter().all(|p| *p == ratio(1, 3)));
        check_exact(&star3(), &f, &d);
    }

    #[test]
    fn integral_input_is_a_single_atom() {
        let g = four_cycle();
        let f = FractionalMatching::new(vec![int(1), int(0), int(0), int(1)], 2);
        let d = decompose(&g, &f).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert_eq!(d.atoms()[0].edges, vec![0, 3]);
        assert_eq!(d.probability(0), int(1));
    }

    #[test]
    fn four_cycle_half_half() {
        let g = four_cycle();
        let f = uniform(4, ratio(1, 2), 2);
        let d = decompose(&g, &f).unwrap();
        let mut atoms: Vec<_> = d.atoms().iter().map(|a| a.edges.clone()).collect();
        atoms.sort();
        assert_eq!(atoms, vec![vec![0, 3], vec![1, 2]]);
        assert!(d.probabilities().iter().all(|p| *p == ratio(1, 2)));
    }

    #[test]
    fn partial_mass_with_parallel_edges() {
        // two parallel edges between the same pair plus a pendant edge
        let g = BipartiteGraph::new(2, 2, vec![(0, 0), (0, 0), (1, 1)]).unwrap();
        let f = FractionalMatching::new(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)], 1);
        let d = decompose(&g, &f).unwrap();
        check_exact(&g, &f, &d);
    }

    #[test]
    fn empty_graph_and_zero_mass() {
        let g = BipartiteGraph::new(2, 3, vec![]).unwrap();
        let d = decompose(&g, &FractionalMatching::new(vec![], 0)).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!(d.atoms()[0].edges.is_empty());
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let path = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        assert!(matches!(
            decompose(&path, &uniform(2, ratio(3, 4), 2)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn sampling_is_seeded_and_exact() {
        let d = MatchingDistribution::point_mass(3, vec![1]);
        for s in 0..10 {
            assert_eq!(d.sample_seeded(s).edges, vec![1]);
        }
        let star = decompose(&star3(), &uniform(3, ratio(1, 3), 1)).unwrap();
        assert_eq!(star.sample_seeded(7), star.sample_seeded(7));
    }

    #[test]
    fn sampling_frequencies_match_marginals() {
        let trials = 30_000u32;
        let sd = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
        let star = decompose(&star3(), &uniform(3, ratio(1, 3), 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = [0u32; 3];
        for _ in 0..trials {
            hits[star.sample(&mut rng).edges[0]] += 1;
        }
        for h in hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - 1.0 / 3.0).abs() <= 4.0 * sd(1.0 / 3.0), "{freq}");
        }
        let cyc = decompose(&four_cycle(), &uniform(4, ratio(1, 2), 2)).unwrap();
        let first = (0..trials)
            .filter(|_| cyc.sample(&mut rng).edges == vec![0, 3])
            .count();
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 4.0 * sd(0.5), "{freq}");
    }

    #[test]
    fn record_uses_ratio_strings() {
        let d = decompose(&star3(), &uniform(3, ratio(1, 3), 1)).unwrap();
        let rec = d.to_record();
        assert_eq!(rec.atoms.len(), 3);
        assert!(rec.atoms.iter().all(|a| a.probability == "1/3"));
    }

    /// Random feasible inputs: a convex combination of random matchings of
    /// one size, so the marginal vector is in the polytope by construction.
    fn feasible_instance() -> impl Strategy<Value = (BipartiteGraph, FractionalMatching)> {
        (1usize..6, 1usize..6, 0u64..4, proptest::collection::vec(any::<u64>(), 1..5)).prop_map(
            |(a, b, m, seeds)| {
                let m = m.min(a.min(b) as u64);
                let mut edges = Vec::new();
                let mut picks = Vec::new();
                for (k, s) in seeds.iter().enumerate() {
                    let mut rng = ChaCha8Rng::seed_from_u64(*s);
                    let mut ls: Vec<usize> = (0..a).collect();
                    let mut rs: Vec<usize> = (0..b).collect();
                    rand::seq::SliceRandom::shuffle(&mut ls[..], &mut rng);
                    rand::seq::SliceRandom::shuffle(&mut rs[..], &mut rng);
                    let mut pick = Vec::new();
                    for j in 0..m as usize {
                        // sometimes reuse an existing parallel edge
                        let e = (ls[j], rs[j]);
                        let id = match edges.iter().position(|&x| x == e) {
                            Some(id) if k % 2 == 0 => id,
                            _ => {
                                edges.push(e);
                                edges.len() - 1
                            }
                        };
                        pick.push(id);
                    }
                    picks.push(pick);
                }
                let weights: Vec<u64> = seeds.iter().map(|s| s % 7 + 1).collect();
                let total: u64 = weights.iter().sum();
                let mut values = vec![BigRational::zero(); edges.len()];
                for (pick, w) in picks.iter().zip(&weights) {
                    for &e in pick {
                        values[e] += ratio(*w as i64, total as i64);
                    }
                }
                (
                    BipartiteGraph::new(a, b, edges).unwrap(),
                    FractionalMatching::new(values, m),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn decomposition_reproduces_marginals((g, f) in feasible_instance()) {
            prop_assert_eq!(validate_fractional_matching(&g, &f), Ok(()));
            let d = decompose(&g, &f).unwrap();
            check_exact(&g, &f, &d);
        }
    }
}
