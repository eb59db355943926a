//! Exact counting, random chain decompositions and container bounds for
//! antichains in the grid poset `[n]^D = {0, …, n-1}^D`.
//!
//! The number of antichains of `[n]^D` equals the number of down-sets, and
//! equals the number `P_d(n)` of `d`-dimensional partitions with entries in
//! `{0, …, n}` when `D = d + 1`. It is sandwiched between `2^{N_{n,D}}` and
//! `2^{(1 + o(1)) N_{n,D}}`, where `N_{n,D}` is the size of the middle layer.
//! This crate builds every object that goes into the upper bound and checks
//! each one exactly at desk scale:
//!
//! - [`grid`]: the box, its order, levels and level sizes;
//! - [`exact`]: antichain, down-set and partition counts and bijections;
//! - [`level_graph`]: weighted cover graphs between consecutive levels;
//! - [`matching`]: decomposing a fractional matching into matchings;
//! - [`chains`]: random chain decompositions built from those matchings;
//! - [`supersat`]: comparable-pair counting for large sets;
//! - [`containers`]: graph containers and the resulting upper bound;
//! - [`asymptotics`]: the Gaussian estimate of the middle layer.
//!
//! ```
//! use grid_antichains::{exact, GridBox, Limits};
//!
//! let bx = GridBox::new(2, 4).unwrap();
//! let limits = Limits::default();
//! assert_eq!(exact::count_antichains(&bx, &limits).unwrap(), 168u32.into());
//! assert_eq!(bx.middle_layer_size(), 6u32.into());
//! ```

pub mod asymptotics;
pub mod chains;
pub mod containers;
mod error;
pub mod exact;
pub mod grid;
mod flow;
pub mod level_graph;
pub mod matching;
pub mod num;
mod order;
pub mod supersat;

pub use error::{Error, Result};
pub use grid::{leq, rank, GridBox, Point};

/// Size limits for anything that is materialized or enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Limits {
    /// Points materialized for a whole box.
    pub box_points: usize,
    /// Points materialized for a single level.
    pub level_points: usize,
    /// Objects produced by an exhaustive enumeration.
    pub enumeration: u64,
    /// Containers in a family.
    pub family: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            box_points: 1 << 20,
            level_points: 1 << 18,
            enumeration: 50_000_000,
            family: 1 << 20,
        }
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/level-graphs.md")]
    mod level_graphs {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/supersaturation.md")]
    mod supersaturation {}
    #[doc = include_str!("../../../book/src/containers.md")]
    mod containers {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
