//! Window-determined local maps: application to partial configurations,
//! join and composition, and the translation-equivariance test harness.
//!
//! A windowed rule reads the input at `{hg : h ∈ W}` to produce the output
//! at `g`, so applying it to a configuration on `A` yields values exactly on
//! `interior(A, W) = {g ∈ A : Wg ⊆ A}`. Rules are closures over finite
//! alphabets rather than materialized tables; pattern spaces are far too
//! large to enumerate.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{product_set, FiniteSubset, GroupElement, GroupError, GroupSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalError {
    #[error("alphabet violation")]
    AlphabetViolation,
    #[error("pattern value missing inside the window")]
    MissingValue,
    #[error("rule failed: {0}")]
    Rule(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A configuration defined on a finite subset of the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialConfiguration<T> {
    group: GroupSpec,
    values: BTreeMap<GroupElement, T>,
}

impl<T: Clone> PartialConfiguration<T> {
    pub fn new(group: GroupSpec) -> Self {
        PartialConfiguration {
            group,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(
        group: GroupSpec,
        values: BTreeMap<GroupElement, T>,
    ) -> Result<Self, LocalError> {
        for g in values.keys() {
            if g.group() != group {
                return Err(GroupError::Mismatch.into());
            }
        }
        Ok(PartialConfiguration { group, values })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn domain(&self) -> FiniteSubset {
        FiniteSubset::from_elements(self.group, self.values.keys().cloned())
            .expect("configuration keys share one group")
    }

    pub fn values(&self) -> &BTreeMap<GroupElement, T> {
        &self.values
    }

    pub fn get(&self, g: &GroupElement) -> Option<&T> {
        self.values.get(g)
    }

    pub fn insert(&mut self, g: GroupElement, v: T) -> Result<(), LocalError> {
        if g.group() != self.group {
            return Err(GroupError::Mismatch.into());
        }
        self.values.insert(g, v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Right action: the translated configuration takes at `g·h` the value
    /// the original took at `g`.
    pub fn right_translate(&self, h: &GroupElement) -> Result<Self, LocalError> {
        let mut values = BTreeMap::new();
        for (g, v) in &self.values {
            values.insert(g.mul(h)?, v.clone());
        }
        Ok(PartialConfiguration {
            group: self.group,
            values,
        })
    }
}

/// `{g ∈ A : Wg ⊆ A}`.
pub fn interior(a: &FiniteSubset, w: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
    let mut out = FiniteSubset::empty(a.group());
    'outer: for g in a.iter() {
        for h in w.iter() {
            if !a.contains(&h.mul(g)?) {
                continue 'outer;
            }
        }
        out.insert(g.clone())?;
    }
    Ok(out)
}

/// Read access to an input pattern, addressed by window-relative position.
pub trait PatternView<I> {
    /// The sampled value at relative position `h`, i.e. at `h·g` when the
    /// pattern is anchored at `g`. `None` means the position is blank.
    fn at(&self, h: &GroupElement) -> Result<Option<I>, LocalError>;
}

struct ConfigPattern<'a, I> {
    cfg: &'a PartialConfiguration<I>,
    base: &'a GroupElement,
}

impl<I: Clone> PatternView<I> for ConfigPattern<'_, I> {
    fn at(&self, h: &GroupElement) -> Result<Option<I>, LocalError> {
        Ok(self.cfg.get(&h.mul(self.base)?).cloned())
    }
}

struct ShiftedPattern<'a, I> {
    inner: &'a dyn PatternView<I>,
    shift: &'a GroupElement,
}

impl<I> PatternView<I> for ShiftedPattern<'_, I> {
    fn at(&self, h: &GroupElement) -> Result<Option<I>, LocalError> {
        self.inner.at(&h.mul(self.shift)?)
    }
}

pub type Rule<I, O> = Box<dyn Fn(&dyn PatternView<I>) -> Result<O, LocalError> + Send + Sync>;

/// Anything that maps configurations to configurations. Window-determined
/// rules implement this pointwise; whole-window algorithms implement it
/// directly with their natural output domain.
pub trait LocalMap<I, O> {
    /// Declared dependence window.
    fn window(&self) -> &FiniteSubset;

    fn apply(
        &self,
        cfg: &PartialConfiguration<I>,
    ) -> Result<PartialConfiguration<O>, LocalError>;
}

/// A local map given by a window and a pointwise rule.
pub struct WindowedMap<I, O> {
    window: FiniteSubset,
    rule: Rule<I, O>,
}

impl<I, O> WindowedMap<I, O> {
    pub fn new(window: FiniteSubset, rule: Rule<I, O>) -> Self {
        WindowedMap { window, rule }
    }

    pub fn eval(&self, pattern: &dyn PatternView<I>) -> Result<O, LocalError> {
        (self.rule)(pattern)
    }
}

impl<I: Clone, O: Clone> LocalMap<I, O> for WindowedMap<I, O> {
    fn window(&self) -> &FiniteSubset {
        &self.window
    }

    fn apply(
        &self,
        cfg: &PartialConfiguration<I>,
    ) -> Result<PartialConfiguration<O>, LocalError> {
        let domain = cfg.domain();
        let inner = interior(&domain, &self.window)?;
        let mut out = PartialConfiguration::new(cfg.group());
        for g in inner.iter() {
            let pattern = ConfigPattern { cfg, base: g };
            let v = (self.rule)(&pattern)?;
            out.insert(g.clone(), v)?;
        }
        Ok(out)
    }
}

/// Spec-facing alias for trait application.
pub fn apply_local<I, O>(
    map: &dyn LocalMap<I, O>,
    cfg: &PartialConfiguration<I>,
) -> Result<PartialConfiguration<O>, LocalError> {
    map.apply(cfg)
}

/// The identity rule with window `{e}`.
pub fn identity_map<I: Clone + Send + Sync + 'static>(group: GroupSpec) -> WindowedMap<I, I> {
    let e = group.identity();
    WindowedMap::new(
        FiniteSubset::singleton(e.clone()),
        Box::new(move |pat| pat.at(&e)?.ok_or(LocalError::MissingValue)),
    )
}

/// Pairs two rules over the same input; the window is the union.
pub fn join<I, O1, O2>(
    f: WindowedMap<I, O1>,
    g: WindowedMap<I, O2>,
) -> Result<WindowedMap<I, (O1, O2)>, LocalError>
where
    I: 'static,
    O1: 'static,
    O2: 'static,
{
    let window = f.window.union(&g.window)?;
    Ok(WindowedMap::new(
        window,
        Box::new(move |pat| Ok(((f.rule)(pat)?, (g.rule)(pat)?))),
    ))
}

/// `outer ∘ inner`. The composed rule reads the original input on
/// `W_inner · W_outer`: the outer rule needs intermediate values at `h·g`
/// for `h ∈ W_outer`, each of which reads the input at `h'·h·g`.
pub fn compose<I, M, O>(
    outer: WindowedMap<M, O>,
    inner: WindowedMap<I, M>,
) -> Result<WindowedMap<I, O>, LocalError>
where
    I: 'static,
    M: 'static,
    O: 'static,
{
    let window = product_set(&inner.window, &outer.window)?;
    let rule: Rule<I, O> = Box::new(move |pat| {
        struct InnerEval<'a, I, M> {
            inner: &'a WindowedMap<I, M>,
            pat: &'a dyn PatternView<I>,
        }
        impl<I, M> PatternView<M> for InnerEval<'_, I, M> {
            fn at(&self, h: &GroupElement) -> Result<Option<M>, LocalError> {
                let shifted = ShiftedPattern {
                    inner: self.pat,
                    shift: h,
                };
                (self.inner.rule)(&shifted).map(Some)
            }
        }
        (outer.rule)(&InnerEval { inner: &inner, pat })
    });
    Ok(WindowedMap::new(window, rule))
}

/// Exact equivariance test: applying the map to the right-translated
/// configuration must equal the right-translate of the map's output.
pub fn equivariance_check<I, O>(
    map: &dyn LocalMap<I, O>,
    cfg: &PartialConfiguration<I>,
    h: &GroupElement,
) -> Result<bool, LocalError>
where
    I: Clone + Eq,
    O: Clone + Eq,
{
    let lhs = map.apply(&cfg.right_translate(h)?)?;
    let rhs = map.apply(cfg)?.right_translate(h)?;
    Ok(lhs == rhs)
}
