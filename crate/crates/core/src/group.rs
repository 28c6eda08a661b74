//! Group models, element arithmetic, and finite-subset algebra.
//!
//! Two concrete groups are supported: the integer lattice `Z^d` and the
//! discrete Heisenberg group with product
//! `(a,b,c)·(a',b',c') = (a+a', b+b', c+c'+a·b')`. Elements are kept in a
//! canonical coordinate form, so equality is coordinate equality and the
//! word problem is O(1) arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Hard cap on the number of elements a single [`FiniteSubset`] may hold.
/// Guards ball/product explosions at desk scale.
pub const ELEMENT_CAP: usize = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("group mismatch")]
    Mismatch,
    #[error("element cap exceeded (cap {cap})")]
    CapExceeded { cap: usize },
    #[error("ball too large (cap {cap})")]
    BallTooLarge { cap: usize },
    #[error("operation requires the {expected} group")]
    WrongGroup { expected: &'static str },
    #[error("lattice dimension must be at least 1")]
    BadDimension,
}

/// Which group a window or element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    IntegerLattice { d: usize },
    Heisenberg,
}

impl GroupSpec {
    pub fn lattice(d: usize) -> Result<Self, GroupError> {
        if d == 0 {
            return Err(GroupError::BadDimension);
        }
        Ok(GroupSpec::IntegerLattice { d })
    }

    /// Number of coordinates in the canonical form.
    pub fn arity(&self) -> usize {
        match self {
            GroupSpec::IntegerLattice { d } => *d,
            GroupSpec::Heisenberg => 3,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            group: *self,
            coords: smallvec::smallvec![0; self.arity()],
        }
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.arity() {
            return Err(GroupError::Mismatch);
        }
        Ok(GroupElement {
            group: *self,
            coords: SmallVec::from_slice(coords),
        })
    }

    /// The standard generating set: `{±e_i}` for `Z^d`, `{(±1,0,0),(0,±1,0)}`
    /// for Heisenberg. Does not include the identity.
    pub fn standard_generators(&self) -> FiniteSubset {
        let mut gens = FiniteSubset::empty(*self);
        match self {
            GroupSpec::IntegerLattice { d } => {
                for i in 0..*d {
                    let mut v = vec![0i64; *d];
                    v[i] = 1;
                    gens.insert(self.element(&v).unwrap()).unwrap();
                    v[i] = -1;
                    gens.insert(self.element(&v).unwrap()).unwrap();
                }
            }
            GroupSpec::Heisenberg => {
                for v in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]] {
                    gens.insert(self.element(&v).unwrap()).unwrap();
                }
            }
        }
        gens
    }
}

/// A group element in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    group: GroupSpec,
    coords: SmallVec<[i64; 4]>,
}

impl GroupElement {
    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Group product in canonical form.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        if self.group != other.group {
            return Err(GroupError::Mismatch);
        }
        let coords = match self.group {
            GroupSpec::IntegerLattice { .. } => self
                .coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
            GroupSpec::Heisenberg => {
                let (a, b, c) = (self.coords[0], self.coords[1], self.coords[2]);
                let (x, y, z) = (other.coords[0], other.coords[1], other.coords[2]);
                smallvec::smallvec![a + x, b + y, c + z + a * y]
            }
        };
        Ok(GroupElement {
            group: self.group,
            coords,
        })
    }

    /// Group inverse: `mul(g, inv(g))` is the identity.
    pub fn inv(&self) -> GroupElement {
        let coords = match self.group {
            GroupSpec::IntegerLattice { .. } => self.coords.iter().map(|a| -a).collect(),
            GroupSpec::Heisenberg => {
                let (a, b, c) = (self.coords[0], self.coords[1], self.coords[2]);
                smallvec::smallvec![-a, -b, a * b - c]
            }
        };
        GroupElement {
            group: self.group,
            coords,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A finite set of group elements with exact membership and deterministic
/// (lexicographic) iteration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubset {
    group: GroupSpec,
    elems: BTreeSet<GroupElement>,
}

impl FiniteSubset {
    pub fn empty(group: GroupSpec) -> Self {
        FiniteSubset {
            group,
            elems: BTreeSet::new(),
        }
    }

    pub fn singleton(g: GroupElement) -> Self {
        let group = g.group;
        let mut elems = BTreeSet::new();
        elems.insert(g);
        FiniteSubset { group, elems }
    }

    pub fn from_elements<I>(group: GroupSpec, iter: I) -> Result<Self, GroupError>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut set = FiniteSubset::empty(group);
        for g in iter {
            set.insert(g)?;
        }
        Ok(set)
    }

    /// Axis-aligned box of lattice points, bounds inclusive.
    pub fn lattice_box(group: GroupSpec, min: &[i64], max: &[i64]) -> Result<Self, GroupError> {
        let d = group.arity();
        if min.len() != d || max.len() != d {
            return Err(GroupError::Mismatch);
        }
        let mut size: u128 = 1;
        for i in 0..d {
            if max[i] < min[i] {
                return Ok(FiniteSubset::empty(group));
            }
            size = size.saturating_mul((max[i] - min[i] + 1) as u128);
            if size > ELEMENT_CAP as u128 {
                return Err(GroupError::CapExceeded { cap: ELEMENT_CAP });
            }
        }
        let mut set = FiniteSubset::empty(group);
        let mut cur = min.to_vec();
        loop {
            set.insert(group.element(&cur)?)?;
            // odometer-style increment, last coordinate fastest
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(set);
                }
                i -= 1;
                if cur[i] < max[i] {
                    cur[i] += 1;
                    for (j, c) in cur.iter_mut().enumerate().skip(i + 1) {
                        *c = min[j];
                    }
                    break;
                }
            }
        }
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elems.contains(g)
    }

    pub fn insert(&mut self, g: GroupElement) -> Result<bool, GroupError> {
        if g.group != self.group {
            return Err(GroupError::Mismatch);
        }
        if !self.elems.contains(&g) && self.elems.len() >= ELEMENT_CAP {
            return Err(GroupError::CapExceeded { cap: ELEMENT_CAP });
        }
        Ok(self.elems.insert(g))
    }

    pub fn remove(&mut self, g: &GroupElement) -> bool {
        self.elems.remove(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> + Clone {
        self.elems.iter()
    }

    pub fn first(&self) -> Option<&GroupElement> {
        self.elems.iter().next()
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.elems.is_subset(&other.elems)
    }

    pub fn union(&self, other: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
        if self.group != other.group {
            return Err(GroupError::Mismatch);
        }
        let elems: BTreeSet<_> = self.elems.union(&other.elems).cloned().collect();
        if elems.len() > ELEMENT_CAP {
            return Err(GroupError::CapExceeded { cap: ELEMENT_CAP });
        }
        Ok(FiniteSubset {
            group: self.group,
            elems,
        })
    }

    pub fn intersection(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            group: self.group,
            elems: self.elems.intersection(&other.elems).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            group: self.group,
            elems: self.elems.difference(&other.elems).cloned().collect(),
        }
    }

    /// Left translate `g·S`.
    pub fn left_translate(&self, g: &GroupElement) -> Result<FiniteSubset, GroupError> {
        let mut out = FiniteSubset::empty(self.group);
        for s in self.iter() {
            out.insert(g.mul(s)?)?;
        }
        Ok(out)
    }

    /// Right translate `S·g`.
    pub fn right_translate(&self, g: &GroupElement) -> Result<FiniteSubset, GroupError> {
        let mut out = FiniteSubset::empty(self.group);
        for s in self.iter() {
            out.insert(s.mul(g)?)?;
        }
        Ok(out)
    }

    /// Elementwise inverse `S⁻¹`.
    pub fn inverse(&self) -> FiniteSubset {
        FiniteSubset {
            group: self.group,
            elems: self.elems.iter().map(|g| g.inv()).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a FiniteSubset {
    type Item = &'a GroupElement;
    type IntoIter = std::collections::btree_set::Iter<'a, GroupElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

/// `{a·b : a ∈ A, b ∈ B}`.
pub fn product_set(a: &FiniteSubset, b: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
    product_set_capped(a, b, ELEMENT_CAP)
}

pub(crate) fn product_set_capped(
    a: &FiniteSubset,
    b: &FiniteSubset,
    cap: usize,
) -> Result<FiniteSubset, GroupError> {
    if a.group != b.group {
        return Err(GroupError::Mismatch);
    }
    let mut out = BTreeSet::new();
    for x in a.iter() {
        for y in b.iter() {
            out.insert(x.mul(y)?);
            if out.len() > cap {
                return Err(GroupError::CapExceeded { cap });
            }
        }
    }
    Ok(FiniteSubset {
        group: a.group,
        elems: out,
    })
}

/// `F ∪ F⁻¹ ∪ {e}`.
pub fn symmetrize(f: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
    let mut out = f.union(&f.inverse())?;
    out.insert(f.group.identity())?;
    Ok(out)
}

/// All products of at most `r` generators (word-metric ball after
/// symmetrizing `gens`). Contains the identity and is symmetric.
pub fn ball(spec: GroupSpec, gens: &FiniteSubset, r: u32) -> Result<FiniteSubset, GroupError> {
    ball_capped(spec, gens, r, ELEMENT_CAP)
}

pub(crate) fn ball_capped(
    spec: GroupSpec,
    gens: &FiniteSubset,
    r: u32,
    cap: usize,
) -> Result<FiniteSubset, GroupError> {
    if gens.group() != spec {
        return Err(GroupError::Mismatch);
    }
    let gens = symmetrize(gens)?;
    let mut seen = FiniteSubset::singleton(spec.identity());
    let mut frontier: Vec<GroupElement> = vec![spec.identity()];
    for _ in 0..r {
        let mut next = Vec::new();
        for g in &frontier {
            for s in gens.iter() {
                let h = g.mul(s)?;
                if !seen.contains(&h) {
                    if seen.len() >= cap {
                        return Err(GroupError::BallTooLarge { cap });
                    }
                    seen.insert(h.clone())?;
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(seen)
}

/// Radius-`r` ball for the group's standard generators.
pub fn standard_ball(spec: GroupSpec, r: u32) -> Result<FiniteSubset, GroupError> {
    ball(spec, &spec.standard_generators(), r)
}

/// Central subgroups along which a window can be sliced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralSubgroup {
    /// The center `{(0,0,c)}` of the Heisenberg group.
    HeisenbergCenter,
}

/// One left coset `Hg` of the center intersected with the window, together
/// with the `(a,b)` coset id. The `c` coordinate is the integer chart that
/// identifies the slice with a subset of `Z`.
#[derive(Debug, Clone)]
pub struct CosetSlice {
    pub id: (i64, i64),
    pub elements: FiniteSubset,
}

impl CosetSlice {
    /// Chart coordinate of a slice element (its position on the `c`-axis).
    pub fn chart(g: &GroupElement) -> i64 {
        g.coords()[2]
    }

    /// Element of this coset at chart coordinate `c`.
    pub fn from_chart(&self, c: i64) -> GroupElement {
        GroupSpec::Heisenberg
            .element(&[self.id.0, self.id.1, c])
            .unwrap()
    }
}

/// Partition a Heisenberg window into its intersections with left cosets of
/// the given central subgroup. Slices are ordered by coset id.
pub fn coset_slices(
    window: &FiniteSubset,
    subgroup: CentralSubgroup,
) -> Result<Vec<CosetSlice>, GroupError> {
    let CentralSubgroup::HeisenbergCenter = subgroup;
    if window.group() != GroupSpec::Heisenberg {
        return Err(GroupError::WrongGroup {
            expected: "Heisenberg",
        });
    }
    let mut slices: std::collections::BTreeMap<(i64, i64), FiniteSubset> =
        std::collections::BTreeMap::new();
    for g in window.iter() {
        let id = (g.coords()[0], g.coords()[1]);
        slices
            .entry(id)
            .or_insert_with(|| FiniteSubset::empty(GroupSpec::Heisenberg))
            .insert(g.clone())?;
    }
    Ok(slices
        .into_iter()
        .map(|(id, elements)| CosetSlice { id, elements })
        .collect())
}
