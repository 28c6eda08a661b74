//! Proper F-colorings of windows: greedy construction, extension of
//! partial colorings, and palette reduction.
//!
//! Properness follows the left Cayley convention: the neighbors of `h` are
//! `{gh : g ∈ F \ {e}}` for a symmetric base set `F` containing the
//! identity. The greedy scan order is lexicographic on canonical
//! coordinates, which makes every construction deterministic.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::group::{product_set, FiniteSubset, GroupElement, GroupError};
use crate::local::{LocalError, PartialConfiguration, WindowedMap};
use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("base set not symmetrized")]
    NotSymmetrized,
    #[error("improper input")]
    ImproperInput,
    #[error("domain not contained in window")]
    DomainNotInWindow,
    #[error("base set must contain the reduction target")]
    BaseSetTooSmall,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A proper coloring of a window with respect to a base set `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperColoring {
    base_set: FiniteSubset,
    colors: BTreeMap<GroupElement, u32>,
    palette_size: u32,
}

impl ProperColoring {
    /// Wraps an explicit assignment, verifying properness.
    pub fn new(
        base_set: FiniteSubset,
        colors: BTreeMap<GroupElement, u32>,
        palette_size: u32,
    ) -> Result<Self, ColoringError> {
        check_symmetric_with_identity(&base_set)?;
        let c = ProperColoring {
            base_set,
            colors,
            palette_size,
        };
        if !c.is_proper()? {
            return Err(ColoringError::ImproperInput);
        }
        Ok(c)
    }

    pub fn base_set(&self) -> &FiniteSubset {
        &self.base_set
    }

    pub fn domain(&self) -> FiniteSubset {
        FiniteSubset::from_elements(self.base_set.group(), self.colors.keys().cloned())
            .expect("domain elements share the base set group")
    }

    pub fn colors(&self) -> &BTreeMap<GroupElement, u32> {
        &self.colors
    }

    pub fn color(&self, g: &GroupElement) -> Option<u32> {
        self.colors.get(g).copied()
    }

    pub fn palette_size(&self) -> u32 {
        self.palette_size
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Exhaustive properness check: every F-edge inside the domain is
    /// bichromatic.
    pub fn is_proper(&self) -> Result<bool, ColoringError> {
        let entries: Vec<(&GroupElement, &u32)> = self.colors.iter().collect();
        let violated = entries
            .par_iter()
            .map(|(h, c)| -> Result<bool, ColoringError> {
                for g in self.base_set.iter() {
                    if g.is_identity() {
                        continue;
                    }
                    let gh = g.mul(h)?;
                    if self.colors.get(&gh) == Some(c) {
                        return Ok(true);
                    }
                }
                Ok(false)
            })
            .try_reduce(|| false, |a, b| Ok(a || b))?;
        Ok(!violated)
    }

    /// Right-translates the coloring: the value at `a·h` is the value at `a`.
    pub fn right_translate(&self, h: &GroupElement) -> Result<ProperColoring, ColoringError> {
        let mut colors = BTreeMap::new();
        for (g, c) in &self.colors {
            colors.insert(g.mul(h)?, *c);
        }
        Ok(ProperColoring {
            base_set: self.base_set.clone(),
            colors,
            palette_size: self.palette_size,
        })
    }

    /// View as a configuration over the color alphabet.
    pub fn to_configuration(&self) -> PartialConfiguration<u32> {
        PartialConfiguration::from_values(self.base_set.group(), self.colors.clone())
            .expect("coloring keys share one group")
    }

    pub(crate) fn from_parts_unchecked(
        base_set: FiniteSubset,
        colors: BTreeMap<GroupElement, u32>,
        palette_size: u32,
    ) -> Self {
        ProperColoring {
            base_set,
            colors,
            palette_size,
        }
    }
}

/// Reads a coloring back out of a configuration, verifying properness.
pub fn coloring_from_configuration(
    cfg: &PartialConfiguration<u32>,
    f: &FiniteSubset,
) -> Result<ProperColoring, ColoringError> {
    let palette = cfg.values().values().copied().max().unwrap_or(1);
    ProperColoring::new(f.clone(), cfg.values().clone(), palette)
}

pub(crate) fn check_symmetric_with_identity(f: &FiniteSubset) -> Result<(), ColoringError> {
    let e = f.group().identity();
    if !f.contains(&e) {
        return Err(ColoringError::NotSymmetrized);
    }
    for g in f.iter() {
        if !f.contains(&g.inv()) {
            return Err(ColoringError::NotSymmetrized);
        }
    }
    Ok(())
}

fn smallest_free_color(used: &[u32]) -> u32 {
    let mut c = 1u32;
    loop {
        if !used.contains(&c) {
            return c;
        }
        c += 1;
    }
}

/// Greedy pass over `order`, skipping already-colored positions.
fn greedy_over_order(
    f: &FiniteSubset,
    order: impl Iterator<Item = GroupElement>,
    mut colors: BTreeMap<GroupElement, u32>,
) -> Result<ProperColoring, ColoringError> {
    let mut palette = colors.values().copied().max().unwrap_or(0);
    let mut used = Vec::with_capacity(f.len());
    for h in order {
        if colors.contains_key(&h) {
            continue;
        }
        used.clear();
        for g in f.iter() {
            if g.is_identity() {
                continue;
            }
            let gh = g.mul(&h)?;
            if let Some(c) = colors.get(&gh) {
                used.push(*c);
            }
        }
        let c = smallest_free_color(&used);
        palette = palette.max(c);
        colors.insert(h.clone(), c);
    }
    Ok(ProperColoring {
        base_set: f.clone(),
        colors,
        palette_size: palette.max(1),
    })
}

/// Proper coloring of the whole window by greedy scan in lexicographic
/// order. Palette size is at most `|F|`.
pub fn greedy_coloring(
    window: &FiniteSubset,
    f: &FiniteSubset,
) -> Result<ProperColoring, ColoringError> {
    check_symmetric_with_identity(f)?;
    greedy_over_order(f, window.iter().cloned(), BTreeMap::new())
}

/// Greedy coloring over a caller-supplied scan order (still proper; the
/// palette bound `|F|` is unchanged). Used by the seeded strategies.
pub fn greedy_coloring_ordered(
    window: &FiniteSubset,
    f: &FiniteSubset,
    order: &[GroupElement],
) -> Result<ProperColoring, ColoringError> {
    check_symmetric_with_identity(f)?;
    let c = greedy_over_order(f, order.iter().cloned(), BTreeMap::new())?;
    // any window element missing from the order is colored afterwards, in
    // lexicographic order
    greedy_over_order(f, window.iter().cloned(), c.colors)
}

/// Extends a partial proper coloring to the whole window, agreeing with it
/// on its domain.
pub fn extend_coloring(
    partial: &ProperColoring,
    window: &FiniteSubset,
) -> Result<ProperColoring, ColoringError> {
    if !partial.is_proper()? {
        return Err(ColoringError::ImproperInput);
    }
    if !partial.domain().is_subset(window) {
        return Err(ColoringError::DomainNotInWindow);
    }
    greedy_over_order(&partial.base_set, window.iter().cloned(), partial.colors.clone())
}

/// Reduces a proper coloring over `F'` to a proper coloring over `F ⊆ F'`
/// with values in `{1, ..., |F|+1}`.
///
/// Color classes of the input are processed in ascending class index; within
/// one class every assignment reads only input colors and previously
/// committed output values, so the pass at position `g` depends only on the
/// input restricted to `F^{p'}·g` where `p'` is the input palette size.
pub fn reduce_palette(
    x: &ProperColoring,
    f: &FiniteSubset,
) -> Result<ProperColoring, ColoringError> {
    check_symmetric_with_identity(f)?;
    check_symmetric_with_identity(x.base_set())?;
    if !f.is_subset(x.base_set()) {
        return Err(ColoringError::BaseSetTooSmall);
    }
    if !x.is_proper()? {
        return Err(ColoringError::ImproperInput);
    }
    let y = reduce_palette_unchecked(x, f)?;
    debug_assert!(y.palette_size <= f.len() as u32 + 1);
    Ok(y)
}

/// The class-by-class reduction pass without the properness pre-checks.
/// Callers must guarantee `x` is proper over a base set containing `f`.
pub(crate) fn reduce_palette_unchecked(
    x: &ProperColoring,
    f: &FiniteSubset,
) -> Result<ProperColoring, ColoringError> {
    // bucket the domain by input color class
    let mut classes: BTreeMap<u32, Vec<&GroupElement>> = BTreeMap::new();
    for (g, c) in &x.colors {
        classes.entry(*c).or_default().push(g);
    }
    let mut out: BTreeMap<GroupElement, u32> = BTreeMap::new();
    let mut palette = 0u32;
    let mut used = Vec::with_capacity(f.len());
    for (_, members) in classes {
        // members of one class are pairwise F-independent (x is proper over
        // F' ⊇ F), so their new values never constrain each other
        let mut batch = Vec::with_capacity(members.len());
        for g in members {
            used.clear();
            for h in f.iter() {
                if h.is_identity() {
                    continue;
                }
                let hg = h.mul(g)?;
                if let Some(c) = out.get(&hg) {
                    used.push(*c);
                }
            }
            batch.push((g.clone(), smallest_free_color(&used)));
        }
        for (g, c) in batch {
            palette = palette.max(c);
            out.insert(g, c);
        }
    }
    Ok(ProperColoring {
        base_set: f.clone(),
        colors: out,
        palette_size: palette.max(1),
    })
}

/// Palette reduction as a window-determined local map. The output at `g`
/// depends only on the input restricted to `F^{p'}·g`, where `p'` bounds
/// the input palette; the rule reruns the class-by-class pass on that
/// neighborhood and reads off the center value.
pub fn reduce_palette_local_map(
    f_prime: &FiniteSubset,
    f: &FiniteSubset,
    input_palette: u32,
) -> Result<WindowedMap<u32, u32>, ColoringError> {
    check_symmetric_with_identity(f_prime)?;
    check_symmetric_with_identity(f)?;
    if !f.is_subset(f_prime) {
        return Err(ColoringError::BaseSetTooSmall);
    }
    let mut window = FiniteSubset::singleton(f.group().identity());
    for _ in 0..input_palette.max(1) {
        window = product_set(&window, f)?;
    }
    let f_prime = f_prime.clone();
    let f = f.clone();
    let sample_points: Vec<GroupElement> = window.iter().cloned().collect();
    let e = f.group().identity();
    let rule = move |pat: &dyn crate::local::PatternView<u32>| -> Result<u32, LocalError> {
        let mut colors = BTreeMap::new();
        for h in &sample_points {
            if let Some(c) = pat.at(h)? {
                if c == 0 || c > input_palette {
                    return Err(LocalError::AlphabetViolation);
                }
                colors.insert(h.clone(), c);
            }
        }
        let local_input =
            ProperColoring::from_parts_unchecked(f_prime.clone(), colors, input_palette);
        let reduced = reduce_palette_unchecked(&local_input, &f)
            .map_err(|err| LocalError::Rule(err.to_string()))?;
        reduced.color(&e).ok_or(LocalError::MissingValue)
    };
    Ok(WindowedMap::new(window, Box::new(rule)))
}

/// Fraction of domain positions per color, useful when sizing tiling steps.
pub fn class_sizes(x: &ProperColoring) -> BTreeMap<u32, usize> {
    let mut sizes = BTreeMap::new();
    for c in x.colors.values() {
        *sizes.entry(*c).or_insert(0usize) += 1;
    }
    sizes
}

/// The paper-facing palette cap `3^|F|`, saturating at `u32::MAX`.
pub fn palette_bound(f: &FiniteSubset) -> u32 {
    3u32.saturating_pow(f.len().min(20) as u32)
}

/// Largest admissible value as a rational, for reports.
pub fn palette_fill(x: &ProperColoring) -> Rat {
    if x.is_empty() {
        return Rat::from_integer(0);
    }
    Rat::new(x.palette_size as i64, x.len() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{standard_ball, GroupSpec};

    fn z(d: usize) -> GroupSpec {
        GroupSpec::lattice(d).unwrap()
    }

    fn interval(lo: i64, hi: i64) -> FiniteSubset {
        FiniteSubset::lattice_box(z(1), &[lo], &[hi]).unwrap()
    }

    #[test]
    fn identity_base_set_gives_constant_coloring() {
        let s = z(2);
        let window = FiniteSubset::lattice_box(s, &[0, 0], &[4, 4]).unwrap();
        let f = FiniteSubset::singleton(s.identity());
        let c = greedy_coloring(&window, &f).unwrap();
        assert_eq!(c.palette_size(), 1);
        assert!(c.colors().values().all(|&v| v == 1));
    }

    #[test]
    fn line_gets_alternating_two_coloring() {
        let window = interval(0, 19);
        let f = standard_ball(z(1), 1).unwrap();
        let c = greedy_coloring(&window, &f).unwrap();
        assert!(c.is_proper().unwrap());
        assert_eq!(c.palette_size(), 2);
        for (g, color) in c.colors() {
            assert_eq!(*color, (g.coords()[0] % 2) as u32 + 1);
        }
    }

    #[test]
    fn plane_ball_one_palette_at_most_five() {
        let s = z(2);
        let window = FiniteSubset::lattice_box(s, &[0, 0], &[63, 63]).unwrap();
        let f = standard_ball(s, 1).unwrap();
        let c = greedy_coloring(&window, &f).unwrap();
        assert!(c.is_proper().unwrap());
        assert!(c.palette_size() <= f.len() as u32);
    }

    #[test]
    fn unsymmetrized_base_set_is_rejected() {
        let s = z(1);
        let window = interval(0, 5);
        let missing_e =
            FiniteSubset::from_elements(s, [s.element(&[1]).unwrap(), s.element(&[-1]).unwrap()])
                .unwrap();
        assert_eq!(
            greedy_coloring(&window, &missing_e),
            Err(ColoringError::NotSymmetrized)
        );
        let asymmetric =
            FiniteSubset::from_elements(s, [s.identity(), s.element(&[1]).unwrap()]).unwrap();
        assert_eq!(
            greedy_coloring(&window, &asymmetric),
            Err(ColoringError::NotSymmetrized)
        );
    }

    #[test]
    fn extend_from_empty_matches_greedy() {
        let window = interval(0, 9);
        let f = standard_ball(z(1), 1).unwrap();
        let empty = ProperColoring::new(f.clone(), BTreeMap::new(), 1).unwrap();
        assert_eq!(
            extend_coloring(&empty, &window).unwrap(),
            greedy_coloring(&window, &f).unwrap()
        );
    }

    #[test]
    fn extend_full_domain_is_identity() {
        let window = interval(0, 9);
        let f = standard_ball(z(1), 1).unwrap();
        let full = greedy_coloring(&window, &f).unwrap();
        assert_eq!(extend_coloring(&full, &window).unwrap(), full);
    }

    #[test]
    fn extend_preserves_diagonal_pins() {
        let s = z(2);
        let window = FiniteSubset::lattice_box(s, &[0, 0], &[15, 15]).unwrap();
        let f = standard_ball(s, 1).unwrap();
        let mut pinned = BTreeMap::new();
        for i in 0..16 {
            pinned.insert(s.element(&[i, i]).unwrap(), 3u32);
        }
        let partial = ProperColoring::new(f.clone(), pinned.clone(), 3).unwrap();
        let c = extend_coloring(&partial, &window).unwrap();
        assert!(c.is_proper().unwrap());
        for (g, v) in &pinned {
            assert_eq!(c.color(g), Some(*v));
        }
        assert_eq!(c.len(), window.len());
    }

    #[test]
    fn extend_rejects_improper_partial() {
        let s = z(1);
        let window = interval(0, 9);
        let f = standard_ball(s, 1).unwrap();
        let mut bad = BTreeMap::new();
        bad.insert(s.element(&[0]).unwrap(), 1u32);
        bad.insert(s.element(&[1]).unwrap(), 1u32);
        assert_eq!(
            ProperColoring::new(f, bad, 1).unwrap_err(),
            ColoringError::ImproperInput
        );
    }

    #[test]
    fn reduce_same_base_set_bounds_palette() {
        let window = interval(0, 40);
        let f = standard_ball(z(1), 1).unwrap();
        let x = greedy_coloring(&window, &f).unwrap();
        let y = reduce_palette(&x, &f).unwrap();
        assert!(y.is_proper().unwrap());
        assert!(y.palette_size() <= f.len() as u32 + 1);
    }

    #[test]
    fn reduce_wide_interval_coloring_to_nearest_neighbors() {
        let window = interval(0, 99);
        let f_prime = standard_ball(z(1), 3).unwrap(); // 7 elements
        let f = standard_ball(z(1), 1).unwrap();
        let x = greedy_coloring(&window, &f_prime).unwrap();
        assert!(x.palette_size() <= 7);
        let y = reduce_palette(&x, &f).unwrap();
        assert!(y.is_proper().unwrap());
        assert!(y.palette_size() <= 3, "palette {}", y.palette_size());
        assert_eq!(y.len(), window.len());
    }

    #[test]
    fn reduce_requires_containment() {
        let window = interval(0, 20);
        let f_small = standard_ball(z(1), 1).unwrap();
        let f_big = standard_ball(z(1), 2).unwrap();
        let x = greedy_coloring(&window, &f_small).unwrap();
        assert_eq!(
            reduce_palette(&x, &f_big),
            Err(ColoringError::BaseSetTooSmall)
        );
    }

    #[test]
    fn local_reduction_matches_global_on_interior() {
        use crate::local::LocalMap;
        let window = interval(0, 79);
        let f_prime = standard_ball(z(1), 3).unwrap();
        let f = standard_ball(z(1), 1).unwrap();
        let x = greedy_coloring(&window, &f_prime).unwrap();
        let global = reduce_palette(&x, &f).unwrap();

        let map = reduce_palette_local_map(&f_prime, &f, x.palette_size()).unwrap();
        let pointwise = map.apply(&x.to_configuration()).unwrap();
        assert!(!pointwise.is_empty());
        for (g, v) in pointwise.values() {
            assert_eq!(Some(*v), global.color(g), "mismatch at {g}");
        }
    }

    #[test]
    fn ordered_greedy_still_proper() {
        let s = z(2);
        let window = FiniteSubset::lattice_box(s, &[0, 0], &[9, 9]).unwrap();
        let f = standard_ball(s, 1).unwrap();
        let mut order: Vec<GroupElement> = window.iter().cloned().collect();
        order.reverse();
        let c = greedy_coloring_ordered(&window, &f, &order).unwrap();
        assert!(c.is_proper().unwrap());
        assert_eq!(c.len(), window.len());
        assert!(c.palette_size() <= f.len() as u32);
    }
}
