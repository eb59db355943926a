//! The weighted cover graph `G_i` between two consecutive levels.
//!
//! An edge `v → u` raises one coordinate `t` by one. Its color is the new
//! value `l = u_t` and its weight is `a_l = l·(n-l)`. With
//! `b_j(x)` the number of coordinates of `x` equal to `j`, the weighted
//! degrees are
//!
//! ```text
//! deg(v) = Σ_{j=0}^{n-2} b_j(v)·a_{j+1}      (v ∈ V_i)
//! deg(u) = Σ_{j=1}^{n-1} b_j(u)·a_j          (u ∈ V_{i+1})
//! ```
//!
//! and every edge of color `l` satisfies
//! `deg(v) = deg(u) + D(n-1) - 2(i+1) + 2l - n + 1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::grid::{GridBox, Point};
use crate::{Error, Limits, Result};

/// `a_j = j·(n-j)`.
pub fn color_weight(n: u32, j: u32) -> u64 {
    debug_assert!(j <= n);
    j as u64 * (n - j) as u64
}

/// `b_j(x)`: how many coordinates of `x` equal `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateProfile {
    counts: Vec<u32>,
}

impl CoordinateProfile {
    pub fn of(bx: &GridBox, x: &Point) -> Self {
        let mut counts = vec![0; bx.n() as usize];
        for &c in x.coords() {
            counts[c as usize] += 1;
        }
        CoordinateProfile { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.iter().map(|&b| b as usize).sum()
    }

    pub fn rank(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &b)| j * b as usize)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelEdge {
    /// Index into [`LevelGraph::lower`].
    pub lower: usize,
    /// Index into [`LevelGraph::upper`].
    pub upper: usize,
    /// The coordinate that is raised.
    pub coord: usize,
    pub color: u32,
    pub weight: u64,
}

#[derive(Debug, Clone)]
pub struct LevelGraph {
    bx: GridBox,
    level: usize,
    lower: Vec<Point>,
    upper: Vec<Point>,
    edges: Vec<LevelEdge>,
    lower_edges: Vec<Vec<usize>>,
    upper_edges: Vec<Vec<usize>>,
    lower_pos: HashMap<Point, usize>,
    upper_pos: HashMap<Point, usize>,
}

impl LevelGraph {
    /// `G_i` between `V_i` and `V_{i+1}`; edges are ordered by lower
    /// endpoint, then by the raised coordinate.
    pub fn build(bx: &GridBox, i: usize, limits: &Limits) -> Result<Self> {
        if i >= bx.max_rank() {
            return Err(Error::LevelOutOfRange {
                level: i,
                max: bx.max_rank().saturating_sub(1),
            });
        }
        let lower = bx.enumerate_level(i, limits)?;
        let upper = bx.enumerate_level(i + 1, limits)?;
        let upper_pos: HashMap<Point, usize> = upper
            .iter()
            .enumerate()
            .map(|(k, p)| (p.clone(), k))
            .collect();
        let lower_pos: HashMap<Point, usize> = lower
            .iter()
            .enumerate()
            .map(|(k, p)| (p.clone(), k))
            .collect();
        let n = bx.n();
        let mut edges = Vec::new();
        let mut lower_edges = vec![Vec::new(); lower.len()];
        let mut upper_edges = vec![Vec::new(); upper.len()];
        for (vi, v) in lower.iter().enumerate() {
            for t in 0..bx.dim() {
                if v.0[t] + 1 >= n {
                    continue;
                }
                let mut u = v.clone();
                u.0[t] += 1;
                let ui = upper_pos[&u];
                let color = u.0[t];
                lower_edges[vi].push(edges.len());
                upper_edges[ui].push(edges.len());
                edges.push(LevelEdge {
                    lower: vi,
                    upper: ui,
                    coord: t,
                    color,
                    weight: color_weight(n, color),
                });
            }
        }
        Ok(LevelGraph {
            bx: *bx,
            level: i,
            lower,
            upper,
            edges,
            lower_edges,
            upper_edges,
            lower_pos,
            upper_pos,
        })
    }

    pub fn grid(&self) -> &GridBox {
        &self.bx
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn lower(&self) -> &[Point] {
        &self.lower
    }

    pub fn upper(&self) -> &[Point] {
        &self.upper
    }

    pub fn edges(&self) -> &[LevelEdge] {
        &self.edges
    }

    pub fn lower_edges(&self, v: usize) -> &[usize] {
        &self.lower_edges[v]
    }

    pub fn upper_edges(&self, u: usize) -> &[usize] {
        &self.upper_edges[u]
    }

    pub fn lower_position(&self, v: &Point) -> Option<usize> {
        self.lower_pos.get(v).copied()
    }

    pub fn upper_position(&self, u: &Point) -> Option<usize> {
        self.upper_pos.get(u).copied()
    }

    /// `δ = D(n-1) - 2(i+1)`.
    pub fn delta(&self) -> i64 {
        self.bx.max_rank() as i64 - 2 * (self.level as i64 + 1)
    }

    /// Weighted degree of `v ∈ V_i` from its coordinate profile.
    pub fn weighted_degree_lower(&self, v: &Point) -> Result<u64> {
        if self.lower_position(v).is_none() {
            return Err(Error::NotInLevel {
                point: v.to_string(),
                level: self.level,
            });
        }
        let n = self.bx.n();
        let b = CoordinateProfile::of(&self.bx, v);
        Ok((0..n.saturating_sub(1))
            .map(|j| b.counts[j as usize] as u64 * color_weight(n, j + 1))
            .sum())
    }

    /// Weighted degree of `u ∈ V_{i+1}` from its coordinate profile.
    pub fn weighted_degree_upper(&self, u: &Point) -> Result<u64> {
        if self.upper_position(u).is_none() {
            return Err(Error::NotInLevel {
                point: u.to_string(),
                level: self.level + 1,
            });
        }
        let n = self.bx.n();
        let b = CoordinateProfile::of(&self.bx, u);
        Ok((1..n)
            .map(|j| b.counts[j as usize] as u64 * color_weight(n, j))
            .sum())
    }

    /// Sum of edge weights at lower vertex `v`, read off the edges.
    pub fn edge_degree_lower(&self, v: usize) -> u64 {
        self.lower_edges[v]
            .iter()
            .map(|&e| self.edges[e].weight)
            .sum()
    }

    /// Sum of edge weights at upper vertex `u`, read off the edges.
    pub fn edge_degree_upper(&self, u: usize) -> u64 {
        self.upper_edges[u]
            .iter()
            .map(|&e| self.edges[e].weight)
            .sum()
    }

    /// The first edge violating the degree identity, if any.
    pub fn degree_identity_counterexample(&self) -> Option<&LevelEdge> {
        let n = self.bx.n() as i64;
        let delta = self.delta();
        self.edges.iter().find(|e| {
            let dv = self.edge_degree_lower(e.lower) as i64;
            let du = self.edge_degree_upper(e.upper) as i64;
            dv != du + delta + 2 * e.color as i64 - n + 1
        })
    }

    pub fn check_degree_identity(&self) -> bool {
        self.degree_identity_counterexample().is_none()
    }

    /// One edge per line: lower point, upper point, color, weight.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "# level graph n={} D={} i={} edges={}\n# lower upper color weight\n",
            self.bx.n(),
            self.bx.dim(),
            self.level,
            self.edges.len()
        );
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                join(&self.lower[e.lower]),
                join(&self.upper[e.upper]),
                e.color,
                e.weight
            );
        }
        out
    }
}

fn join(p: &Point) -> String {
    p.coords()
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u32, d: usize, i: usize) -> LevelGraph {
        LevelGraph::build(&GridBox::new(n, d).unwrap(), i, &Limits::default()).unwrap()
    }

    fn p(c: &[u32]) -> Point {
        Point(c.to_vec())
    }

    fn edge_summary(g: &LevelGraph) -> Vec<(Point, Point, u32, u64)> {
        g.edges()
            .iter()
            .map(|e| (g.lower()[e.lower].clone(), g.upper()[e.upper].clone(), e.color, e.weight))
            .collect()
    }

    #[test]
    fn build_examples() {
        assert_eq!(
            edge_summary(&graph(2, 2, 0)),
            vec![
                (p(&[0, 0]), p(&[1, 0]), 1, 1),
                (p(&[0, 0]), p(&[0, 1]), 1, 1)
            ]
        );
        assert_eq!(
            edge_summary(&graph(3, 2, 0)),
            vec![
                (p(&[0, 0]), p(&[1, 0]), 1, 2),
                (p(&[0, 0]), p(&[0, 1]), 1, 2)
            ]
        );
        assert_eq!(
            edge_summary(&graph(3, 2, 3)),
            vec![
                (p(&[1, 2]), p(&[2, 2]), 2, 2),
                (p(&[2, 1]), p(&[2, 2]), 2, 2)
            ]
        );
    }

    #[test]
    fn degree_examples() {
        let g = graph(3, 2, 0);
        assert_eq!(g.weighted_degree_lower(&p(&[0, 0])).unwrap(), 4);
        assert_eq!(g.weighted_degree_upper(&p(&[0, 1])).unwrap(), 2);
        let g = graph(2, 3, 0);
        assert_eq!(g.weighted_degree_lower(&p(&[0, 0, 0])).unwrap(), 3);
        let g = graph(2, 3, 1);
        assert_eq!(g.weighted_degree_upper(&p(&[1, 1, 0])).unwrap(), 2);
        let g = graph(3, 2, 3);
        assert_eq!(g.weighted_degree_upper(&p(&[2, 2])).unwrap(), 4);
        assert!(matches!(
            g.weighted_degree_lower(&p(&[0, 0])),
            Err(Error::NotInLevel { .. })
        ));
    }

    #[test]
    fn top_element_has_no_out_edges() {
        // (2,2) is in V_4 of [3]^2; as a lower vertex it would have degree 0
        let bx = GridBox::new(3, 2).unwrap();
        let top = p(&[2, 2]);
        let b = CoordinateProfile::of(&bx, &top);
        let deg: u64 = (0..2)
            .map(|j| b.counts()[j as usize] as u64 * color_weight(3, j + 1))
            .sum();
        assert_eq!(deg, 0);
        assert!(LevelGraph::build(&bx, 4, &Limits::default()).is_err());
    }

    #[test]
    fn identity_first_example() {
        let g = graph(3, 2, 0);
        let e = g.edges()[1];
        assert_eq!(g.upper()[e.upper], p(&[0, 1]));
        let lhs = g.edge_degree_lower(e.lower) as i64;
        let rhs = g.edge_degree_upper(e.upper) as i64 + 2 * 2 - 2 + 2 * 1 - 3 + 1;
        assert_eq!((lhs, rhs), (4, 4));
        assert!(g.check_degree_identity());
    }

    #[test]
    fn weight_recurrence() {
        for n in 1..=8u32 {
            assert_eq!(color_weight(n, 0), 0);
            assert_eq!(color_weight(n, n), 0);
            for j in 0..n {
                assert_eq!(
                    color_weight(n, j + 1) as i64,
                    color_weight(n, j) as i64 + n as i64 - 2 * j as i64 - 1
                );
            }
        }
    }

    #[test]
    fn degrees_and_identity_exhaustive_small() {
        for n in 2..=4u32 {
            for d in 1..=5usize {
                let bx = GridBox::new(n, d).unwrap();
                for i in 0..bx.max_rank() {
                    let g = graph(n, d, i);
                    for (k, v) in g.lower().iter().enumerate() {
                        assert_eq!(g.weighted_degree_lower(v).unwrap(), g.edge_degree_lower(k));
                        let b = CoordinateProfile::of(&bx, v);
                        assert_eq!(b.dim(), d);
                        assert_eq!(b.rank(), i);
                    }
                    for (k, u) in g.upper().iter().enumerate() {
                        assert_eq!(g.weighted_degree_upper(u).unwrap(), g.edge_degree_upper(k));
                    }
                    assert!(g.check_degree_identity(), "n={n} D={d} i={i}");
                    for e in g.edges() {
                        assert!(e.weight >= (n - 1) as u64);
                        assert!(4 * e.weight <= (n * n) as u64);
                        assert_eq!(g.upper()[e.upper].coords()[e.coord], e.color);
                    }
                }
            }
        }
    }

    #[test]
    fn edge_list_format() {
        let text = graph(2, 2, 0).to_edge_list();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines, vec!["0,0 1,0 1 1", "0,0 0,1 1 1"]);
    }
}
