//! Discrete algorithms on finite windows of Cayley graphs of amenable
//! groups: Følner invariance and Banach densities, proper colorings and
//! palette reduction, window-determined local maps, Ornstein-Weiss
//! quasi-tilings with exactification, and subequivalence witnesses.
//!
//! Everything operates on an explicit finite window, is deterministic, and
//! carries enough collar bookkeeping to state where each guarantee holds.

pub mod coloring;
pub mod comparison;
pub mod group;
pub mod invariance;
pub mod local;
pub mod registry;
pub mod serial;
pub mod tiling;

pub use group::{FiniteSubset, GroupElement, GroupSpec};

/// Exact rational used throughout for thresholds, densities, and fractions.
pub type Rat = num_rational::Ratio<i64>;

/// Convenience constructor for [`Rat`].
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}
