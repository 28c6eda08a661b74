//! Følner invariance checks, Banach densities on windows, Følner set
//! search, and the subset-invariance bound.
//!
//! A finite set `S` is `(K,ε)-invariant` when `|⋂_{g∈K} gS| > (1-ε)|S|`.
//! Densities are taken over translates `Fy` that lie fully inside the
//! window, which keeps every value exact and window-monotone.

use rayon::prelude::*;
use std::cmp::Reverse;
use thiserror::Error;

use crate::group::{FiniteSubset, GroupElement, GroupError, GroupSpec};
use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvarianceError {
    #[error("empty set")]
    EmptySet,
    #[error("epsilon out of range")]
    BadEpsilon,
    #[error("window smaller than F")]
    WindowSmallerThanF,
    #[error("no Følner set within cap")]
    NoFolnerWithinCap,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Outcome of an `(K,ε)`-invariance check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub test_set: FiniteSubset,
    pub epsilon: Rat,
    pub intersection_size: usize,
    pub set_size: usize,
    pub passes: bool,
}

/// An extremal window density together with a translate achieving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityValue {
    pub value: Rat,
    pub witness_translate: GroupElement,
}

/// Exact size of `⋂_{g∈K} gS`. An empty `K` is treated as `{e}`.
pub fn intersection_size(s: &FiniteSubset, k: &FiniteSubset) -> Result<usize, InvarianceError> {
    if k.is_empty() {
        return Ok(s.len());
    }
    let k_inv: Vec<GroupElement> = k.iter().map(|g| g.inv()).collect();
    // every point of the intersection lies in g₀S for the first g₀ ∈ K
    let g0 = k.first().unwrap().clone();
    let candidates: Vec<GroupElement> = s
        .iter()
        .map(|x| g0.mul(x))
        .collect::<Result<_, _>>()?;
    let count = candidates
        .par_iter()
        .filter(|x| {
            k_inv
                .iter()
                .all(|gi| gi.mul(x).map(|y| s.contains(&y)).unwrap_or(false))
        })
        .count();
    Ok(count)
}

/// Checks `|⋂_{g∈K} gS| > (1-ε)|S|` exactly.
pub fn is_invariant(
    s: &FiniteSubset,
    k: &FiniteSubset,
    eps: Rat,
) -> Result<InvarianceReport, InvarianceError> {
    if s.is_empty() {
        return Err(InvarianceError::EmptySet);
    }
    if eps <= Rat::from_integer(0) || eps > Rat::from_integer(1) {
        return Err(InvarianceError::BadEpsilon);
    }
    let inter = intersection_size(s, k)?;
    let size = s.len();
    // inter > (1-eps)·size, exact rational comparison
    let passes = Rat::from_integer(inter as i64) > (Rat::from_integer(1) - eps) * Rat::from_integer(size as i64);
    Ok(InvarianceReport {
        test_set: k.clone(),
        epsilon: eps,
        intersection_size: inter,
        set_size: size,
        passes,
    })
}

/// `1 - |⋂_{g∈K} gS| / |S|`; the smallest ε for which `S` is strictly not
/// `(K,ε)`-invariant is exactly this defect.
pub fn invariance_defect(s: &FiniteSubset, k: &FiniteSubset) -> Result<Rat, InvarianceError> {
    if s.is_empty() {
        return Err(InvarianceError::EmptySet);
    }
    let inter = intersection_size(s, k)?;
    Ok(Rat::from_integer(1) - Rat::new(inter as i64, s.len() as i64))
}

/// All `y` with `Fy ⊆ window`.
pub fn admissible_translates(
    f: &FiniteSubset,
    window: &FiniteSubset,
) -> Result<Vec<GroupElement>, InvarianceError> {
    if f.is_empty() {
        return Err(InvarianceError::EmptySet);
    }
    let f0_inv = f.first().unwrap().inv();
    let f_elems: Vec<&GroupElement> = f.iter().collect();
    let mut candidates: Vec<GroupElement> = window
        .iter()
        .map(|w| f0_inv.mul(w))
        .collect::<Result<_, _>>()?;
    candidates.sort();
    candidates.dedup();
    let mut out: Vec<GroupElement> = candidates
        .into_par_iter()
        .filter(|y| {
            f_elems
                .iter()
                .all(|f| f.mul(y).map(|p| window.contains(&p)).unwrap_or(false))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn density_scan(
    a: &FiniteSubset,
    f: &FiniteSubset,
    window: &FiniteSubset,
    upper: bool,
) -> Result<DensityValue, InvarianceError> {
    let translates = admissible_translates(f, window)?;
    if translates.is_empty() {
        return Err(InvarianceError::WindowSmallerThanF);
    }
    let f_elems: Vec<&GroupElement> = f.iter().collect();
    let counts: Vec<(usize, GroupElement)> = translates
        .into_par_iter()
        .map(|y| {
            let c = f_elems
                .iter()
                .filter(|f| f.mul(&y).map(|p| a.contains(&p)).unwrap_or(false))
                .count();
            (c, y)
        })
        .collect();
    // extremum with lexicographically-first witness on ties
    let (count, witness) = if upper {
        counts
            .into_iter()
            .max_by_key(|(c, y)| (*c, Reverse(y.clone())))
            .unwrap()
    } else {
        counts
            .into_iter()
            .min_by_key(|(c, y)| (*c, y.clone()))
            .unwrap()
    };
    Ok(DensityValue {
        value: Rat::new(count as i64, f.len() as i64),
        witness_translate: witness,
    })
}

/// `sup_y |A ∩ Fy| / |F|` over translates fully inside the window.
pub fn upper_density(
    a: &FiniteSubset,
    f: &FiniteSubset,
    window: &FiniteSubset,
) -> Result<DensityValue, InvarianceError> {
    density_scan(a, f, window, true)
}

/// `inf_y |A ∩ Fy| / |F|` over translates fully inside the window.
pub fn lower_density(
    a: &FiniteSubset,
    f: &FiniteSubset,
    window: &FiniteSubset,
) -> Result<DensityValue, InvarianceError> {
    density_scan(a, f, window, false)
}

pub(crate) const FOLNER_PARAM_CAP: i64 = 1 << 16;

/// The scanned one-parameter Følner family: cubes `[0,N)^d` for lattices,
/// boxes `{|a|,|b| ≤ N, |c| ≤ N²}` for Heisenberg.
pub fn folner_candidate(spec: GroupSpec, n: i64) -> Result<FiniteSubset, GroupError> {
    match spec {
        GroupSpec::IntegerLattice { d } => {
            FiniteSubset::lattice_box(spec, &vec![0; d], &vec![n - 1; d])
        }
        GroupSpec::Heisenberg => {
            FiniteSubset::lattice_box(spec, &[-n, -n, -n * n], &[n, n, n * n])
        }
    }
}

/// Smallest member of the group's box family that is `(K,ε)`-invariant.
pub fn find_folner(
    spec: GroupSpec,
    k: &FiniteSubset,
    eps: Rat,
) -> Result<FiniteSubset, InvarianceError> {
    find_folner_with_cap(spec, k, eps, FOLNER_PARAM_CAP)
}

pub fn find_folner_with_cap(
    spec: GroupSpec,
    k: &FiniteSubset,
    eps: Rat,
    param_cap: i64,
) -> Result<FiniteSubset, InvarianceError> {
    if eps <= Rat::from_integer(0) || eps > Rat::from_integer(1) {
        return Err(InvarianceError::BadEpsilon);
    }
    let mut n = 1;
    while n <= param_cap {
        let s = match folner_candidate(spec, n) {
            Ok(s) => s,
            Err(GroupError::CapExceeded { .. }) => return Err(InvarianceError::NoFolnerWithinCap),
            Err(e) => return Err(e.into()),
        };
        if is_invariant(&s, k, eps)?.passes {
            return Ok(s);
        }
        n += 1;
    }
    Err(InvarianceError::NoFolnerWithinCap)
}

/// The subset-invariance bound `ε = δ / (2(|K|+1))`: if `F` is
/// `(K,ε)`-invariant then every `F' ⊆ F` with `|F'| ≥ (1-ε)|F|` is
/// `(K,δ)`-invariant.
pub fn ks_epsilon(k: &FiniteSubset, delta: Rat) -> Rat {
    delta / Rat::from_integer(2 * (k.len() as i64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::standard_ball;
    use crate::rat;

    fn z(d: usize) -> GroupSpec {
        GroupSpec::lattice(d).unwrap()
    }

    fn el(spec: GroupSpec, coords: &[i64]) -> GroupElement {
        spec.element(coords).unwrap()
    }

    #[test]
    fn square_invariance_counts() {
        let s2 = z(2);
        let square = FiniteSubset::lattice_box(s2, &[0, 0], &[9, 9]).unwrap();
        let k = FiniteSubset::from_elements(s2, [el(s2, &[0, 0]), el(s2, &[1, 0])]).unwrap();
        let rep = is_invariant(&square, &k, rat(1, 5)).unwrap();
        assert_eq!(rep.intersection_size, 90);
        assert!(rep.passes);
        let rep = is_invariant(&square, &k, rat(1, 20)).unwrap();
        assert_eq!(rep.intersection_size, 90);
        assert!(!rep.passes, "90 ≤ 95");
    }

    #[test]
    fn identity_test_set_always_passes() {
        let s1 = z(1);
        let set = FiniteSubset::lattice_box(s1, &[0], &[6]).unwrap();
        let k = FiniteSubset::singleton(s1.identity());
        for eps in [rat(1, 100), rat(1, 2), rat(1, 1)] {
            assert!(is_invariant(&set, &k, eps).unwrap().passes);
        }
    }

    #[test]
    fn empty_set_errors() {
        let s1 = z(1);
        let k = FiniteSubset::singleton(s1.identity());
        assert_eq!(
            is_invariant(&FiniteSubset::empty(s1), &k, rat(1, 2)),
            Err(InvarianceError::EmptySet)
        );
    }

    #[test]
    fn invariance_monotone_in_eps() {
        let s2 = z(2);
        let set = FiniteSubset::lattice_box(s2, &[0, 0], &[11, 11]).unwrap();
        let k = standard_ball(s2, 1).unwrap();
        let mut passed = false;
        for num in 1..=10 {
            let rep = is_invariant(&set, &k, rat(num, 10)).unwrap();
            if passed {
                assert!(rep.passes, "passing must be monotone in eps");
            }
            passed = rep.passes;
        }
    }

    #[test]
    fn half_density_of_even_columns() {
        let s2 = z(2);
        let window = FiniteSubset::lattice_box(s2, &[0, 0], &[9, 9]).unwrap();
        let a = FiniteSubset::from_elements(
            s2,
            window.iter().filter(|g| g.coords()[0] % 2 == 0).cloned(),
        )
        .unwrap();
        let f = FiniteSubset::from_elements(s2, [el(s2, &[0, 0]), el(s2, &[1, 0])]).unwrap();
        let up = upper_density(&a, &f, &window).unwrap();
        let lo = lower_density(&a, &f, &window).unwrap();
        assert_eq!(up.value, rat(1, 2));
        assert_eq!(lo.value, rat(1, 2));
    }

    #[test]
    fn density_extremes() {
        let s2 = z(2);
        let window = FiniteSubset::lattice_box(s2, &[0, 0], &[7, 7]).unwrap();
        let f = standard_ball(s2, 1).unwrap();
        let empty = FiniteSubset::empty(s2);
        assert_eq!(upper_density(&empty, &f, &window).unwrap().value, rat(0, 1));
        assert_eq!(lower_density(&window, &f, &window).unwrap().value, rat(1, 1));
    }

    #[test]
    fn density_complement_identity() {
        let s1 = z(1);
        let window = FiniteSubset::lattice_box(s1, &[0], &[29]).unwrap();
        let a = FiniteSubset::from_elements(
            s1,
            window.iter().filter(|g| g.coords()[0] % 3 == 0).cloned(),
        )
        .unwrap();
        let complement = window.difference(&a);
        let f = FiniteSubset::lattice_box(s1, &[0], &[4]).unwrap();
        let up = upper_density(&a, &f, &window).unwrap();
        let lo = lower_density(&complement, &f, &window).unwrap();
        assert_eq!(up.value + lo.value, rat(1, 1));
    }

    #[test]
    fn density_window_too_small() {
        let s1 = z(1);
        let window = FiniteSubset::lattice_box(s1, &[0], &[2]).unwrap();
        let f = FiniteSubset::lattice_box(s1, &[0], &[9]).unwrap();
        assert_eq!(
            upper_density(&window, &f, &window),
            Err(InvarianceError::WindowSmallerThanF)
        );
    }

    #[test]
    fn folner_output_passes_requested_invariance() {
        let s2 = z(2);
        let k = standard_ball(s2, 1).unwrap();
        let eps = rat(1, 4);
        let f = find_folner(s2, &k, eps).unwrap();
        assert!(is_invariant(&f, &k, eps).unwrap().passes);

        let h = GroupSpec::Heisenberg;
        let k = standard_ball(h, 1).unwrap();
        let f = find_folner(h, &k, rat(1, 2)).unwrap();
        assert!(is_invariant(&f, &k, rat(1, 2)).unwrap().passes);
    }

    #[test]
    fn folner_identity_test_set_gives_unit_box() {
        let s3 = z(3);
        let k = FiniteSubset::singleton(s3.identity());
        let f = find_folner(s3, &k, rat(1, 4)).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.contains(&s3.identity()));
    }

    #[test]
    fn folner_cap_errors() {
        let s1 = z(1);
        let k = standard_ball(s1, 1).unwrap();
        assert_eq!(
            find_folner_with_cap(s1, &k, rat(1, 1000), 10),
            Err(InvarianceError::NoFolnerWithinCap)
        );
    }

    #[test]
    fn ks_epsilon_formula() {
        let s1 = z(1);
        let k = FiniteSubset::lattice_box(s1, &[0], &[3]).unwrap(); // |K| = 4
        assert_eq!(ks_epsilon(&k, rat(1, 5)), rat(1, 50));
        let k1 = FiniteSubset::singleton(s1.identity());
        // delta just below 1 with |K| = 1: eps just below 1/4
        assert_eq!(ks_epsilon(&k1, rat(999, 1000)), rat(999, 4000));
    }

    // Exhaustive oracle for the subset-invariance contract on small
    // instances: every F = [0,N) and every qualifying F' ⊆ F.
    #[test]
    fn ks_contract_small_instances() {
        let s1 = z(1);
        let k = FiniteSubset::from_elements(s1, [el(s1, &[-1]), el(s1, &[0]), el(s1, &[1])])
            .unwrap();
        let delta = rat(2, 5);
        let eps = ks_epsilon(&k, delta);
        for n in 1..=8i64 {
            let f = FiniteSubset::lattice_box(s1, &[0], &[n - 1]).unwrap();
            if !is_invariant(&f, &k, eps).unwrap().passes {
                continue;
            }
            let elems: Vec<GroupElement> = f.iter().cloned().collect();
            for mask in 0u32..(1 << n) {
                let sub: Vec<GroupElement> = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| elems[i as usize].clone())
                    .collect();
                if sub.is_empty() {
                    continue;
                }
                let f_prime = FiniteSubset::from_elements(s1, sub).unwrap();
                let big_enough = Rat::from_integer(f_prime.len() as i64)
                    >= (Rat::from_integer(1) - eps) * Rat::from_integer(f.len() as i64);
                if big_enough {
                    assert!(
                        is_invariant(&f_prime, &k, delta).unwrap().passes,
                        "contract violated for N={n} mask={mask:b}"
                    );
                }
            }
        }
    }
}
