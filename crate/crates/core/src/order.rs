//! Bitset view of a small box: every point gets one bit of a `u128`.

use crate::grid::{leq, GridBox, Point};
use crate::{Error, Limits, Result};

pub(crate) type Mask = u128;

pub(crate) const MAX_POINTS: usize = 128;

#[derive(Debug, Clone)]
pub(crate) struct SmallOrder {
    pub bx: GridBox,
    pub points: Vec<Point>,
    pub ranks: Vec<usize>,
    /// `below[x]`: points strictly below `x`.
    pub below: Vec<Mask>,
    /// `above[x]`: points strictly above `x`.
    pub above: Vec<Mask>,
}

impl SmallOrder {
    pub fn new(bx: GridBox) -> Result<Self> {
        let small = Limits {
            box_points: MAX_POINTS,
            ..Limits::default()
        };
        let points = bx.points(&small)?;
        let len = points.len();
        let mut below = vec![0; len];
        let mut above = vec![0; len];
        for (a, x) in points.iter().enumerate() {
            for (b, y) in points.iter().enumerate() {
                if a != b && leq(x, y)? {
                    below[b] |= 1 << a;
                    above[a] |= 1 << b;
                }
            }
        }
        let ranks = points.iter().map(Point::rank).collect();
        Ok(SmallOrder {
            bx,
            points,
            ranks,
            below,
            above,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn full(&self) -> Mask {
        if self.len() == MAX_POINTS {
            Mask::MAX
        } else {
            (1 << self.len()) - 1
        }
    }

    pub fn comparable(&self, x: usize) -> Mask {
        self.below[x] | self.above[x]
    }

    pub fn mask_of<'a>(&self, pts: impl IntoIterator<Item = &'a Point>) -> Result<Mask> {
        let mut m = 0;
        for p in pts {
            if !self.bx.contains(p) {
                return Err(Error::PointOutOfBox {
                    coord: p.coords().iter().copied().max().unwrap_or(0),
                    n: self.bx.n(),
                });
            }
            m |= 1 << self.bx.index_of(p);
        }
        Ok(m)
    }

    pub fn points_of(&self, mask: Mask) -> Vec<Point> {
        bits(mask).map(|i| self.points[i].clone()).collect()
    }

    pub fn is_downset(&self, mask: Mask) -> bool {
        bits(mask).all(|x| self.below[x] & !mask == 0)
    }

    /// Number of unordered comparable pairs inside `mask`.
    pub fn comparable_pairs(&self, mask: Mask) -> u64 {
        bits(mask)
            .map(|x| (self.above[x] & mask).count_ones() as u64)
            .sum()
    }
}

pub(crate) fn bits(mut mask: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}
