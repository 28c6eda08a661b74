//! Subequivalence witnesses between sets and multisets: density-class
//! checks, per-tile greedy matching, tiling-driven comparison, and witness
//! inversion.
//!
//! A witness assigns to each source `g` a sequence of displacements
//! `R(g)_1, ..., R(g)_{a_g}`; the routed unit lands on `R(g)_i·g`. The
//! witness implements the subequivalence between `a` and `b` when every
//! target `g` receives at most `b_g` units.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{FiniteSubset, GroupElement, GroupError};
use crate::invariance::admissible_translates;
use crate::tiling::ApproximateTiling;
use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComparisonError {
    #[error("capacity exceeded")]
    CapacityExceeded,
    #[error("counting inequality fails at tile centered on {0}")]
    TileInfeasible(GroupElement),
    #[error("support point {0} not covered by the tiling")]
    UncoveredSupport(GroupElement),
    #[error("no admissible translate")]
    NoAdmissibleTranslate,
    #[error("not invertible")]
    NotInvertible,
    #[error("count above the declared cap")]
    CountAboveCap,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// An element of `{0, 1, ..., m}^domain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultisetElement {
    domain: FiniteSubset,
    counts: BTreeMap<GroupElement, u32>,
    cap: u32,
}

impl MultisetElement {
    /// Builds from sparse counts; zero entries may be omitted.
    pub fn new(
        domain: FiniteSubset,
        counts: BTreeMap<GroupElement, u32>,
        cap: u32,
    ) -> Result<Self, ComparisonError> {
        for (g, c) in &counts {
            if !domain.contains(g) {
                return Err(GroupError::Mismatch.into());
            }
            if *c > cap {
                return Err(ComparisonError::CountAboveCap);
            }
        }
        let counts = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        Ok(MultisetElement { domain, counts, cap })
    }

    /// Indicator of `support` inside `domain` (cap 1).
    pub fn indicator(
        domain: FiniteSubset,
        support: &FiniteSubset,
    ) -> Result<Self, ComparisonError> {
        let counts = support
            .iter()
            .map(|g| (g.clone(), 1u32))
            .collect::<BTreeMap<_, _>>();
        MultisetElement::new(domain, counts, 1)
    }

    pub fn zero(domain: FiniteSubset, cap: u32) -> Self {
        MultisetElement {
            domain,
            counts: BTreeMap::new(),
            cap,
        }
    }

    pub fn domain(&self) -> &FiniteSubset {
        &self.domain
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn count(&self, g: &GroupElement) -> u32 {
        self.counts.get(g).copied().unwrap_or(0)
    }

    /// Nonzero entries in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&GroupElement, u32)> {
        self.counts.iter().map(|(g, c)| (g, *c))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }
}

/// A displacement assignment implementing a (sub)equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubequivalenceWitness {
    displacement_set: FiniteSubset,
    assignment: BTreeMap<GroupElement, Vec<GroupElement>>,
}

impl SubequivalenceWitness {
    pub fn empty(group: crate::group::GroupSpec) -> Self {
        SubequivalenceWitness {
            displacement_set: FiniteSubset::empty(group),
            assignment: BTreeMap::new(),
        }
    }

    pub fn new(
        displacement_set: FiniteSubset,
        assignment: BTreeMap<GroupElement, Vec<GroupElement>>,
    ) -> Self {
        SubequivalenceWitness {
            displacement_set,
            assignment,
        }
    }

    pub fn displacement_set(&self) -> &FiniteSubset {
        &self.displacement_set
    }

    pub fn assignment(&self) -> &BTreeMap<GroupElement, Vec<GroupElement>> {
        &self.assignment
    }

    pub fn routes(&self, g: &GroupElement) -> &[GroupElement] {
        self.assignment.get(g).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn routed_units(&self) -> u64 {
        self.assignment.values().map(|v| v.len() as u64).sum()
    }

    /// Target loads `g ↦ #{(h,i) : R(h)_i·h = g}`.
    pub fn loads(&self) -> Result<BTreeMap<GroupElement, u32>, ComparisonError> {
        let mut loads = BTreeMap::new();
        for (h, routes) in &self.assignment {
            for d in routes {
                let target = d.mul(h)?;
                *loads.entry(target).or_insert(0u32) += 1;
            }
        }
        Ok(loads)
    }

    /// Merge, concatenating routes per source in the caller's order.
    fn absorb(&mut self, other: SubequivalenceWitness) -> Result<(), ComparisonError> {
        self.displacement_set = self.displacement_set.union(&other.displacement_set)?;
        for (g, mut routes) in other.assignment {
            self.assignment.entry(g).or_default().append(&mut routes);
        }
        Ok(())
    }
}

/// Exhaustive strict density check over all translates `Lh ⊆ domain`:
/// `upper` demands `Σ_{g∈L} a(gh) < bound·|L|` everywhere, `lower` demands
/// the reversed strict inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSide {
    Upper,
    Lower,
}

pub fn check_profile(
    a: &MultisetElement,
    l: &FiniteSubset,
    bound: Rat,
    side: ProfileSide,
) -> Result<bool, ComparisonError> {
    let translates =
        admissible_translates(l, a.domain()).map_err(|_| ComparisonError::NoAdmissibleTranslate)?;
    if translates.is_empty() {
        return Err(ComparisonError::NoAdmissibleTranslate);
    }
    let threshold = bound * Rat::from_integer(l.len() as i64);
    for h in translates {
        let mut sum = 0i64;
        for g in l.iter() {
            sum += a.count(&g.mul(&h)?) as i64;
        }
        let sum = Rat::from_integer(sum);
        let ok = match side {
            ProfileSide::Upper => sum < threshold,
            ProfileSide::Lower => sum > threshold,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedy per-tile matching on a shape `Q`: scan sources in lexicographic
/// order, route each unit to the first target with residual capacity.
/// Requires the strict counting inequality `Σ_Q a < Σ_Q b`.
pub fn tile_match(
    q: &FiniteSubset,
    a: &MultisetElement,
    b: &MultisetElement,
) -> Result<SubequivalenceWitness, ComparisonError> {
    let sum_a: u64 = q.iter().map(|g| a.count(g) as u64).sum();
    let sum_b: u64 = q.iter().map(|g| b.count(g) as u64).sum();
    if sum_a >= sum_b {
        return Err(ComparisonError::CapacityExceeded);
    }
    let targets: Vec<(&GroupElement, u32)> =
        q.iter().map(|g| (g, b.count(g))).filter(|(_, c)| *c > 0).collect();
    let mut cursor = 0usize;
    let mut residual: Vec<u32> = targets.iter().map(|(_, c)| *c).collect();
    let mut assignment = BTreeMap::new();
    let mut displacements = FiniteSubset::empty(q.group());
    for g in q.iter() {
        let units = a.count(g);
        if units == 0 {
            continue;
        }
        let mut routes = Vec::with_capacity(units as usize);
        for _ in 0..units {
            while cursor < targets.len() && residual[cursor] == 0 {
                cursor += 1;
            }
            debug_assert!(cursor < targets.len(), "capacity argument");
            residual[cursor] -= 1;
            let target = targets[cursor].0;
            let d = target.mul(&g.inv())?;
            displacements.insert(d.clone())?;
            routes.push(d);
        }
        assignment.insert(g.clone(), routes);
    }
    Ok(SubequivalenceWitness::new(displacements, assignment))
}

/// Tile-by-tile comparison through an exact tiling: the per-tile witness is
/// translated through the tile's center, which leaves displacements
/// unchanged. Verifies global injectivity before returning.
pub fn comparison_from_tiling(
    t: &ApproximateTiling,
    a: &MultisetElement,
    b: &MultisetElement,
) -> Result<SubequivalenceWitness, ComparisonError> {
    comparison_from_tiling_filtered(t, a, b, None)
}

/// Like [`comparison_from_tiling`], but a tile that fails the counting
/// inequality is only an error when it carries `a`-mass intersecting
/// `required`; otherwise its mass is left unrouted.
pub fn comparison_from_tiling_filtered(
    t: &ApproximateTiling,
    a: &MultisetElement,
    b: &MultisetElement,
    required: Option<&FiniteSubset>,
) -> Result<SubequivalenceWitness, ComparisonError> {
    let position = crate::tiling::relative_position(t)
        .map_err(|_| ComparisonError::CapacityExceeded)?;
    // a-mass must sit inside tiles
    for (g, _) in a.support() {
        if position.position(g).is_none() {
            let needed = required.map(|r| r.contains(g)).unwrap_or(true);
            if needed {
                return Err(ComparisonError::UncoveredSupport(g.clone()));
            }
        }
    }
    let mut witness = SubequivalenceWitness::empty(t.window().group());
    for (center, shape) in t.tiles() {
        let cells = shape
            .iter()
            .map(|s| s.mul(center))
            .collect::<Result<Vec<_>, _>>()?;
        let mut a_tile = BTreeMap::new();
        let mut b_tile = BTreeMap::new();
        let mut a_required = false;
        for (s, cell) in shape.iter().zip(cells.iter()) {
            let ca = a.count(cell);
            if ca > 0 {
                a_tile.insert(s.clone(), ca);
                if required.map(|r| r.contains(cell)).unwrap_or(true) {
                    a_required = true;
                }
            }
            let cb = b.count(cell);
            if cb > 0 {
                b_tile.insert(s.clone(), cb);
            }
        }
        if a_tile.is_empty() {
            continue;
        }
        let a_rel = MultisetElement::new(shape.clone(), a_tile, a.cap())?;
        let b_rel = MultisetElement::new(shape.clone(), b_tile, b.cap())?;
        match tile_match(shape, &a_rel, &b_rel) {
            Ok(tile_witness) => {
                // lift: the route s → s' at relative positions becomes
                // s·c → s'·c with the same displacement s'·s⁻¹
                let mut lifted = BTreeMap::new();
                for (s, routes) in tile_witness.assignment() {
                    lifted.insert(s.mul(center)?, routes.clone());
                }
                witness.absorb(SubequivalenceWitness::new(
                    tile_witness.displacement_set().clone(),
                    lifted,
                ))?;
            }
            Err(ComparisonError::CapacityExceeded) => {
                if a_required {
                    return Err(ComparisonError::TileInfeasible(center.clone()));
                }
            }
            Err(e) => return Err(e),
        }
    }
    debug_assert!(verify_witness_structural(&witness, b)?);
    Ok(witness)
}

fn verify_witness_structural(
    r: &SubequivalenceWitness,
    b: &MultisetElement,
) -> Result<bool, ComparisonError> {
    for (g, load) in r.loads()? {
        if load > b.count(&g) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive witness verification. Checks that every source `h` carries
/// exactly `a_h` routes and every target load stays within `b`; with
/// `strict` the loads must equal `b` everywhere.
pub fn verify_witness(
    r: &SubequivalenceWitness,
    a: &MultisetElement,
    b: &MultisetElement,
    strict: bool,
) -> Result<bool, ComparisonError> {
    for (h, routes) in r.assignment() {
        if routes.len() as u32 != a.count(h) {
            return Ok(false);
        }
        for d in routes {
            if !r.displacement_set().contains(d) {
                return Ok(false);
            }
        }
    }
    // sources with mass but no routes
    for (h, c) in a.support() {
        if c > 0 && r.routes(h).len() as u32 != c {
            return Ok(false);
        }
    }
    let loads = r.loads()?;
    for (g, load) in &loads {
        if *load > b.count(g) {
            return Ok(false);
        }
    }
    if strict {
        for (g, cb) in b.support() {
            if loads.get(g).copied().unwrap_or(0) != cb {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Inverts an equivalence witness: the inverse routes each unit of `b` back
/// to its source with the inverse displacement. Routes at each target are
/// ordered by source, which makes double inversion the identity for
/// witnesses whose routes are ordered by target (as `tile_match` emits).
pub fn invert_equivalence(
    r: &SubequivalenceWitness,
    a: &MultisetElement,
    b: &MultisetElement,
) -> Result<SubequivalenceWitness, ComparisonError> {
    if !verify_witness(r, a, b, true)? {
        return Err(ComparisonError::NotInvertible);
    }
    let mut incoming: BTreeMap<GroupElement, Vec<(GroupElement, usize)>> = BTreeMap::new();
    for (h, routes) in r.assignment() {
        for (i, d) in routes.iter().enumerate() {
            incoming.entry(d.mul(h)?).or_default().push((h.clone(), i));
        }
    }
    let mut assignment = BTreeMap::new();
    let mut displacements = FiniteSubset::empty(r.displacement_set().group());
    for (target, mut sources) in incoming {
        sources.sort();
        let mut routes = Vec::with_capacity(sources.len());
        for (source, _) in sources {
            let d = source.mul(&target.inv())?;
            displacements.insert(d.clone())?;
            routes.push(d);
        }
        assignment.insert(target, routes);
    }
    Ok(SubequivalenceWitness::new(displacements, assignment))
}
