//! The box `{0, …, n-1}^D` with the coordinatewise order, its rank function
//! and its level sets.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::{Error, Limits, Result};

/// The grid poset `{0, …, n-1}^D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GridBox {
    n: u32,
    dim: usize,
}

impl GridBox {
    pub fn new(n: u32, dim: usize) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidBox { n, dim });
        }
        Ok(GridBox { n, dim })
    }

    /// Side length; coordinates range over `0..n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest rank, `(n-1)·D`.
    pub fn max_rank(&self) -> usize {
        (self.n as usize - 1) * self.dim
    }

    /// Rank of the middle layer, `floor((n-1)·D / 2)`.
    pub fn middle_rank(&self) -> usize {
        self.max_rank() / 2
    }

    /// `n^D` as an exact integer.
    pub fn total_points(&self) -> BigUint {
        BigUint::from(self.n).pow(self.dim as u32)
    }

    /// `n^D` when it fits in a `usize`.
    pub fn total_points_usize(&self) -> Option<usize> {
        (self.n as usize).checked_pow(self.dim as u32)
    }

    pub fn point(&self, coords: &[u32]) -> Result<Point> {
        self.check_coords(coords)?;
        Ok(Point(coords.to_vec()))
    }

    pub(crate) fn check_coords(&self, coords: &[u32]) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.n) {
            return Err(Error::PointOutOfBox {
                coord: c,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.check_coords(&p.0).is_ok()
    }

    /// Position of `p` in the lexicographic order of the whole box.
    pub fn index_of(&self, p: &Point) -> usize {
        p.0.iter()
            .fold(0usize, |acc, &c| acc * self.n as usize + c as usize)
    }

    /// Inverse of [`GridBox::index_of`].
    pub fn point_at(&self, mut index: usize) -> Point {
        let n = self.n as usize;
        let mut coords = vec![0u32; self.dim];
        for c in coords.iter_mut().rev() {
            *c = (index % n) as u32;
            index /= n;
        }
        Point(coords)
    }

    /// All points in lexicographic order.
    pub fn points(&self, limits: &Limits) -> Result<Vec<Point>> {
        let total = self
            .total_points_usize()
            .filter(|&t| t <= limits.box_points)
            .ok_or_else(|| Error::CapExceeded {
                what: "box points",
                size: self.total_points().to_string(),
                cap: limits.box_points,
            })?;
        Ok((0..total).map(|i| self.point_at(i)).collect())
    }

    /// The order-reversing involution `x ↦ (n-1) - x`, coordinatewise.
    pub fn reflect(&self, p: &Point) -> Point {
        Point(p.0.iter().map(|&c| self.n - 1 - c).collect())
    }

    pub fn level_index(&self, i: usize) -> Result<usize> {
        if i > self.max_rank() {
            Err(Error::LevelOutOfRange {
                level: i,
                max: self.max_rank(),
            })
        } else {
            Ok(i)
        }
    }

    /// `|V_i|`, the number of points of rank `i`.
    pub fn level_size(&self, i: usize) -> Result<BigUint> {
        self.level_index(i)?;
        Ok(self.level_sizes().swap_remove(i))
    }

    /// `|V_0|, …, |V_{(n-1)D}|` by the bounded-composition recurrence over
    /// dimensions.
    pub fn level_sizes(&self) -> Vec<BigUint> {
        let n = self.n as usize;
        let mut counts = vec![BigUint::one()];
        for d in 1..=self.dim {
            let width = (n - 1) * d + 1;
            let mut next = vec![BigUint::zero(); width];
            for (s, c) in counts.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for v in 0..n {
                    next[s + v] += c;
                }
            }
            counts = next;
        }
        counts
    }

    /// `N_{n,D}`, the size of the middle layer `V_k` with `k = floor((n-1)D/2)`.
    pub fn middle_layer_size(&self) -> BigUint {
        self.level_sizes().swap_remove(self.middle_rank())
    }

    /// The points of `V_i` in lexicographic order.
    pub fn enumerate_level(&self, i: usize, limits: &Limits) -> Result<Vec<Point>> {
        let size = self.level_size(i)?;
        if size > BigUint::from(limits.level_points) {
            return Err(Error::CapExceeded {
                what: "level points",
                size: size.to_string(),
                cap: limits.level_points,
            });
        }
        let mut out = Vec::new();
        let mut coords = vec![0u32; self.dim];
        self.fill_level(0, i, &mut coords, &mut out);
        Ok(out)
    }

    fn fill_level(&self, pos: usize, remaining: usize, coords: &mut Vec<u32>, out: &mut Vec<Point>) {
        let rest = self.dim - pos - 1;
        let cap_rest = rest * (self.n as usize - 1);
        if pos + 1 == self.dim {
            if remaining < self.n as usize {
                coords[pos] = remaining as u32;
                out.push(Point(coords.clone()));
            }
            return;
        }
        let lo = remaining.saturating_sub(cap_rest);
        let hi = remaining.min(self.n as usize - 1);
        for c in lo..=hi {
            coords[pos] = c as u32;
            self.fill_level(pos + 1, remaining - c, coords, out);
        }
    }
}

impl fmt::Display for GridBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]^{}", self.n, self.dim)
    }
}

/// A point of a [`GridBox`]. Ordering is lexicographic, which is not the
/// poset order; use [`leq`] for that.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Point(pub(crate) Vec<u32>);

impl Point {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn rank(x: &Point) -> usize {
    x.0.iter().map(|&c| c as usize).sum()
}

/// `x ≼ y` in the coordinatewise order.
pub fn leq(x: &Point, y: &Point) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(x.0.iter().zip(&y.0).all(|(a, b)| a <= b))
}

/// Compare two points in the poset: `None` when incomparable.
pub fn poset_cmp(x: &Point, y: &Point) -> Option<Ordering> {
    let mut le = true;
    let mut ge = true;
    for (a, b) in x.0.iter().zip(&y.0) {
        le &= a <= b;
        ge &= a >= b;
    }
    match (le, ge) {
        (true, true) => Some(Ordering::Equal),
        (true, false) => Some(Ordering::Less),
        (false, true) => Some(Ordering::Greater),
        (false, false) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(n: u32, d: usize) -> GridBox {
        GridBox::new(n, d).unwrap()
    }

    fn p(c: &[u32]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&bx(3, 2).point(&[0, 0]).unwrap()), 0);
        assert_eq!(rank(&bx(3, 2).point(&[2, 2]).unwrap()), 4);
        assert_eq!(rank(&bx(3, 3).point(&[1, 2, 0]).unwrap()), 3);
    }

    #[test]
    fn leq_examples() {
        assert!(leq(&p(&[0, 1]), &p(&[1, 1])).unwrap());
        assert!(!leq(&p(&[0, 1]), &p(&[1, 0])).unwrap());
        assert!(leq(&p(&[1, 0]), &p(&[1, 0])).unwrap());
        assert!(matches!(
            leq(&p(&[0, 1]), &p(&[0, 1, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(GridBox::new(0, 3).is_err());
        assert!(GridBox::new(2, 0).is_err());
        assert!(bx(2, 2).point(&[2, 0]).is_err());
        assert!(bx(2, 2).point(&[1]).is_err());
        assert!(matches!(
            bx(2, 3).level_size(4),
            Err(Error::LevelOutOfRange { level: 4, max: 3 })
        ));
    }

    #[test]
    fn level_size_examples() {
        assert_eq!(bx(2, 3).level_size(1).unwrap(), BigUint::from(3u32));
        assert_eq!(bx(3, 2).level_size(2).unwrap(), BigUint::from(3u32));
        assert_eq!(bx(2, 4).level_size(2).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn middle_layer_examples() {
        assert_eq!(bx(2, 3).middle_layer_size(), BigUint::from(3u32));
        assert_eq!(bx(2, 4).middle_layer_size(), BigUint::from(6u32));
        assert_eq!(bx(3, 2).middle_layer_size(), BigUint::from(3u32));
        assert_eq!(bx(3, 6).middle_layer_size(), BigUint::from(141u32));
        assert_eq!(bx(1, 7).middle_layer_size(), BigUint::from(1u32));
    }

    #[test]
    fn enumerate_level_examples() {
        let l = Limits::default();
        assert_eq!(
            bx(2, 2).enumerate_level(1, &l).unwrap(),
            vec![p(&[0, 1]), p(&[1, 0])]
        );
        assert_eq!(bx(2, 2).enumerate_level(0, &l).unwrap(), vec![p(&[0, 0])]);
        assert_eq!(
            bx(3, 2).enumerate_level(2, &l).unwrap(),
            vec![p(&[0, 2]), p(&[1, 1]), p(&[2, 0])]
        );
        let tiny = Limits {
            level_points: 2,
            ..Limits::default()
        };
        assert!(matches!(
            bx(3, 2).enumerate_level(2, &tiny),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn enumerate_level_matches_filtered_scan() {
        let l = Limits::default();
        for n in 1..=4u32 {
            for d in 1..=4usize {
                let b = bx(n, d);
                let all = b.points(&l).unwrap();
                for i in 0..=b.max_rank() {
                    let want: Vec<Point> = all.iter().filter(|x| rank(x) == i).cloned().collect();
                    let got = b.enumerate_level(i, &l).unwrap();
                    assert_eq!(got, want, "n={n} D={d} i={i}");
                    assert_eq!(BigUint::from(got.len()), b.level_size(i).unwrap());
                }
            }
        }
    }

    #[test]
    fn level_sizes_sum_symmetry_unimodality() {
        for n in 1..=6u32 {
            for d in 1..=8usize {
                let b = bx(n, d);
                let sizes = b.level_sizes();
                let total: BigUint = sizes.iter().sum();
                assert_eq!(total, b.total_points());
                let k = b.max_rank();
                for i in 0..=k {
                    assert_eq!(sizes[i], sizes[k - i]);
                    assert!(!sizes[i].is_zero());
                }
                let peak = b.middle_rank();
                for i in 0..peak {
                    assert!(sizes[i] <= sizes[i + 1]);
                }
                for i in peak..k {
                    assert!(sizes[i] >= sizes[i + 1]);
                }
                assert_eq!(sizes.iter().max().unwrap(), &sizes[peak]);
            }
        }
    }

    #[test]
    fn leq_is_a_partial_order_and_rank_is_strict() {
        let l = Limits::default();
        for n in 1..=3u32 {
            for d in 1..=3usize {
                let pts = bx(n, d).points(&l).unwrap();
                for x in &pts {
                    assert!(leq(x, x).unwrap());
                    for y in &pts {
                        let xy = leq(x, y).unwrap();
                        let yx = leq(y, x).unwrap();
                        if xy && yx {
                            assert_eq!(x, y);
                        }
                        if xy && x != y {
                            assert!(rank(x) < rank(y));
                        }
                        for z in &pts {
                            if xy && leq(y, z).unwrap() {
                                assert!(leq(x, z).unwrap());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn index_round_trip_and_reflection() {
        let b = bx(3, 3);
        for i in 0..27 {
            let x = b.point_at(i);
            assert_eq!(b.index_of(&x), i);
            let r = b.reflect(&x);
            assert_eq!(rank(&r), b.max_rank() - rank(&x));
            assert_eq!(b.reflect(&r), x);
        }
    }
}
