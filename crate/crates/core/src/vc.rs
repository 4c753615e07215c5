//! Shattering, VC dimension, cofinality and restriction of finite set families.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::closure::{closure, initial_segment, ClosureOutcome, MaskConstraints, SegmentOutcome, DEFAULT_BUDGET};
use crate::order::enumerate_finite;
use crate::ordinal::Ordinal;
use crate::sets::{format_set, subsets_of_size, Combinations, OrdSet};
use crate::system::{OrderingSystem, SystemError};
use crate::Check;

pub const MAX_GROUND: usize = 128;
pub const MAX_POWERSET_SCAN: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcError {
    #[error("member {} is not a subset of the ground set", format_set(.0))]
    NotInGround(OrdSet),
    #[error("ground set has {size} elements, at most {max} supported")]
    TooLarge { size: usize, max: usize },
    #[error("closure of {} did not finish", format_set(.0))]
    Budget(OrdSet),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Finite family of subsets of a finite ground set, kept canonical:
/// ground ascending, members sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    ground: Vec<Ordinal>,
    members: Vec<OrdSet>,
}

impl SetFamily {
    pub fn new(
        ground: impl IntoIterator<Item = Ordinal>,
        members: impl IntoIterator<Item = OrdSet>,
    ) -> Result<Self, VcError> {
        let ground: OrdSet = ground.into_iter().collect();
        if ground.len() > MAX_GROUND {
            return Err(VcError::TooLarge {
                size: ground.len(),
                max: MAX_GROUND,
            });
        }
        let mut members: Vec<OrdSet> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|m| !m.is_subset(&ground)) {
            return Err(VcError::NotInGround(bad.clone()));
        }
        members.sort();
        members.dedup();
        Ok(SetFamily {
            ground: ground.into_iter().collect(),
            members,
        })
    }

    /// All `k`-subsets of `ground`.
    pub fn k_subsets(ground: impl IntoIterator<Item = Ordinal>, k: usize) -> Result<Self, VcError> {
        let g: Vec<Ordinal> = ground.into_iter().collect();
        let members: Vec<OrdSet> = subsets_of_size(&g, k).collect();
        SetFamily::new(g, members)
    }

    /// `∅, {0}, {0,1}, …, {0..m}` on ground `{0..m}`.
    pub fn initial_segments(m: u64) -> Self {
        let members = (0..=m + 1).map(|k| (0..k).map(Ordinal::nat).collect());
        SetFamily::new((0..=m).map(Ordinal::nat), members).expect("segments lie in the ground")
    }

    pub fn powerset(ground: impl IntoIterator<Item = Ordinal>) -> Result<Self, VcError> {
        let g: Vec<Ordinal> = ground.into_iter().collect();
        if g.len() > MAX_POWERSET_SCAN {
            return Err(VcError::TooLarge {
                size: g.len(),
                max: MAX_POWERSET_SCAN,
            });
        }
        let members: Vec<OrdSet> = (0..=g.len())
            .flat_map(|k| subsets_of_size(&g, k).collect::<Vec<_>>())
            .collect();
        SetFamily::new(g, members)
    }

    pub fn ground(&self) -> &[Ordinal] {
        &self.ground
    }

    pub fn members(&self) -> &[OrdSet] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn index(&self) -> HashMap<&Ordinal, usize> {
        self.ground.iter().enumerate().map(|(i, x)| (x, i)).collect()
    }

    fn masks(&self) -> Vec<u128> {
        let idx = self.index();
        self.members
            .iter()
            .map(|m| m.iter().map(|x| 1u128 << idx[x]).sum())
            .collect()
    }

    fn set_of(&self, mask: u128) -> OrdSet {
        self.ground
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, x)| x.clone())
            .collect()
    }

    fn mask_of(&self, set: &OrdSet) -> Option<u128> {
        let idx = self.index();
        set.iter().map(|x| idx.get(x).map(|&i| 1u128 << i)).sum()
    }
}

/// Subsets of `a` in binary-counter order over its ascending elements.
fn sub_masks(a: u128) -> Vec<u128> {
    let bits: Vec<u32> = (0..128).filter(|i| a >> i & 1 == 1).collect();
    (0..1u64 << bits.len())
        .map(|k| {
            bits.iter()
                .enumerate()
                .filter(|(j, _)| k >> j & 1 == 1)
                .map(|(_, &b)| 1u128 << b)
                .sum()
        })
        .collect()
}

fn missing_trace(masks: &[u128], a: u128) -> Option<u128> {
    let traces: HashSet<u128> = masks.iter().map(|m| m & a).collect();
    if traces.len() == 1usize << a.count_ones() {
        return None;
    }
    sub_masks(a).into_iter().find(|t| !traces.contains(t))
}

/// Whether every subset of `a` is a trace `a ∩ S`; on failure, the first
/// missing trace.
pub fn shatters(f: &SetFamily, a: &OrdSet) -> Result<Check<OrdSet>, VcError> {
    let mask = f.mask_of(a).ok_or_else(|| VcError::NotInGround(a.clone()))?;
    Ok(match missing_trace(&f.masks(), mask) {
        None => Check::Pass,
        Some(t) => Check::Fail(f.set_of(t)),
    })
}

/// Evidence for a computed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    /// `(trace, member)` with `witness ∩ member = trace`, one per subset of the witness.
    pub realizers: Vec<(OrdSet, OrdSet)>,
    /// `(candidate, missing trace)` for every next-size candidate whose
    /// proper subsets are all shattered.
    pub refutations: Vec<(OrdSet, OrdSet)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcResult {
    pub dimension: usize,
    /// A shattered set of size `dimension`; `None` only for the empty family,
    /// which shatters nothing.
    pub witness: Option<OrdSet>,
    /// The search stopped at the cap; the true dimension may be larger.
    pub capped: bool,
    pub certificate: Certificate,
}

impl VcResult {
    /// Re-checks the witness, every realizer and every refutation.
    pub fn verify(&self, f: &SetFamily) -> bool {
        let Some(w) = &self.witness else {
            return f.is_empty() && self.dimension == 0;
        };
        if w.len() != self.dimension || !matches!(shatters(f, w), Ok(Check::Pass)) {
            return false;
        }
        let traces: HashSet<&OrdSet> = self.certificate.realizers.iter().map(|(t, _)| t).collect();
        if traces.len() != 1usize << w.len() {
            return false;
        }
        let realized =
            self.certificate.realizers.iter().all(|(t, m)| {
                f.members.binary_search(m).is_ok() && &w.intersection(m).cloned().collect::<OrdSet>() == t
            });
        let refuted = self.certificate.refutations.iter().all(|(c, t)| {
            c.len() == self.dimension + 1
                && t.is_subset(c)
                && f.members
                    .iter()
                    .all(|m| &c.intersection(m).cloned().collect::<OrdSet>() != t)
        });
        realized && refuted
    }
}

/// Exact VC dimension by ascending search: a `(d+1)`-set is tested only
/// when all its `d`-subsets are shattered. The search stops at `cap`
/// (default: ground size) and flags the result.
pub fn vc_dimension(f: &SetFamily, cap: Option<usize>) -> VcResult {
    let masks = f.masks();
    let cap = cap.unwrap_or(f.ground.len()).min(f.ground.len());
    if masks.is_empty() {
        return VcResult {
            dimension: 0,
            witness: None,
            capped: false,
            certificate: Certificate {
                realizers: Vec::new(),
                refutations: Vec::new(),
            },
        };
    }
    let mut level: Vec<u128> = vec![0];
    let mut refutations = Vec::new();
    let mut capped = false;
    let mut d = 0;
    loop {
        if d == cap {
            capped = cap < f.ground.len() && has_shattered_extension(&masks, &level, f.ground.len());
            break;
        }
        let known: HashSet<u128> = level.iter().copied().collect();
        let mut next = Vec::new();
        let mut next_refutations = Vec::new();
        for &s in &level {
            let top = if s == 0 { 0 } else { 128 - s.leading_zeros() as usize };
            for j in top..f.ground.len() {
                let c = s | 1u128 << j;
                let pruned = sub_masks(c)
                    .into_iter()
                    .filter(|t| t.count_ones() as usize == d)
                    .any(|t| !known.contains(&t));
                if pruned {
                    continue;
                }
                match missing_trace(&masks, c) {
                    None => next.push(c),
                    Some(t) => next_refutations.push((f.set_of(c), f.set_of(t))),
                }
            }
        }
        if next.is_empty() {
            refutations = next_refutations;
            break;
        }
        level = next;
        d += 1;
    }
    let witness = level[0];
    let realizers = sub_masks(witness)
        .into_iter()
        .map(|t| {
            let m = masks.iter().find(|&&m| m & witness == t).expect("shattered");
            (f.set_of(t), f.set_of(*m))
        })
        .collect();
    VcResult {
        dimension: d,
        witness: Some(f.set_of(witness)),
        capped,
        certificate: Certificate { realizers, refutations },
    }
}

fn has_shattered_extension(masks: &[u128], level: &[u128], n: usize) -> bool {
    level.iter().any(|&s| {
        (0..n)
            .filter(|j| s >> j & 1 == 0)
            .any(|j| missing_trace(masks, s | 1u128 << j).is_none())
    })
}

/// `F↾X₀ = {X₀ ∩ S : S ∈ F}` on ground `X₀ ∩ ground`.
pub fn restrict_family(f: &SetFamily, x0: &OrdSet) -> SetFamily {
    let ground: Vec<Ordinal> = f.ground.iter().filter(|x| x0.contains(x)).cloned().collect();
    let members = f
        .members
        .iter()
        .map(|m| m.intersection(x0).cloned().collect::<OrdSet>());
    SetFamily::new(ground, members).expect("traces lie in the restricted ground")
}

/// Whether every `A ⊆ ground` with `|A| < lambda_bound` lies inside a
/// member; on failure, an uncovered set.
pub fn is_cofinal(f: &SetFamily, lambda_bound: usize) -> Check<OrdSet> {
    if lambda_bound == 0 {
        return Check::Pass;
    }
    if f.members.is_empty() {
        return Check::Fail(OrdSet::new());
    }
    // covering the largest sets covers their subsets too
    let k = (lambda_bound - 1).min(f.ground.len());
    let masks = f.masks();
    for c in Combinations::new(f.ground.len(), k) {
        let a: u128 = c.iter().map(|&i| 1u128 << i).sum();
        if !masks.iter().any(|m| m & a == a) {
            return Check::Fail(f.set_of(a));
        }
    }
    Check::Pass
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// Every closed subset (powerset scan).
    All,
    /// All closed n-initial segments.
    SegmentsOnly,
    /// Closures of all sets of size at most `k`.
    ClosuresOfSmall(usize),
}

/// The family of closed sets of a finite system, in one of three flavors.
pub fn closed_family(sys: &dyn OrderingSystem, mode: FamilyMode) -> Result<SetFamily, VcError> {
    let elems = sys.universe().finite().ok_or(SystemError::InfiniteUniverse)?.to_vec();
    let members: Vec<OrdSet> = match mode {
        FamilyMode::All => {
            if elems.len() > MAX_POWERSET_SCAN {
                return Err(VcError::TooLarge {
                    size: elems.len(),
                    max: MAX_POWERSET_SCAN,
                });
            }
            let mc = MaskConstraints::new(sys)?;
            mc.closed_masks().into_iter().map(|m| mc.set_of(m)).collect()
        }
        FamilyMode::SegmentsOnly => {
            let mut out = Vec::new();
            for s in subsets_of_size(&elems, sys.depth() - 1) {
                let ord = sys.order(&s)?;
                for b in enumerate_finite(ord.as_ref()).unwrap_or_default() {
                    if let SegmentOutcome::Finite(seg) = initial_segment(sys, &s, &b)? {
                        out.push(seg);
                    }
                }
            }
            out
        }
        FamilyMode::ClosuresOfSmall(k) => {
            let mut out = Vec::new();
            for size in 0..=k.min(elems.len()) {
                for a in subsets_of_size(&elems, size) {
                    match closure(sys, &a, DEFAULT_BUDGET)? {
                        ClosureOutcome::Closed(c) => out.push(c),
                        ClosureOutcome::ProvablyInfinite { .. } => {}
                        ClosureOutcome::BudgetExceeded(_) => return Err(VcError::Budget(a)),
                    }
                }
            }
            out
        }
    };
    SetFamily::new(elems, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::is_closed;
    use crate::sets::{nats, parse_set};
    use crate::system::TableSystem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(s: &str) -> OrdSet {
        parse_set(s).unwrap()
    }

    fn family(ground: std::ops::Range<u64>, members: &[&str]) -> SetFamily {
        SetFamily::new(nats(ground), members.iter().map(|m| set(m))).unwrap()
    }

    /// Maximum shattered size by scanning every subset of the ground.
    fn brute_vc(f: &SetFamily) -> Option<usize> {
        if f.is_empty() {
            return None;
        }
        let n = f.ground().len();
        (0..=n)
            .rev()
            .find(|&k| subsets_of_size(f.ground(), k).any(|a| shatters(f, &a).unwrap().passed()))
    }

    fn random_family(rng: &mut impl Rng, n: u64, count: usize) -> SetFamily {
        let members: Vec<OrdSet> = (0..count)
            .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).map(Ordinal::nat).collect())
            .collect();
        SetFamily::new(nats(0..n), members).unwrap()
    }

    #[test]
    fn shatter_examples() {
        let segs = SetFamily::initial_segments(5);
        assert!(shatters(&segs, &OrdSet::new()).unwrap().passed());
        assert_eq!(shatters(&segs, &set("{1,3}")).unwrap(), Check::Fail(set("{3}")));
        let p = SetFamily::powerset(nats(0..3)).unwrap();
        assert!(shatters(&p, &set("{0,1,2}")).unwrap().passed());
        assert!(shatters(&p, &set("{7}")).is_err());
    }

    #[test]
    fn vc_examples() {
        let segs = SetFamily::initial_segments(5);
        let r = vc_dimension(&segs, None);
        assert_eq!(r.dimension, 1);
        assert!(r.verify(&segs));
        let p = SetFamily::powerset(nats(0..4)).unwrap();
        assert_eq!(vc_dimension(&p, None).dimension, 4);
        let pairs = SetFamily::k_subsets(nats(0..8), 2).unwrap();
        let r = vc_dimension(&pairs, None);
        assert_eq!(r.dimension, 2);
        assert!(r.verify(&pairs));
        assert!(subsets_of_size(pairs.ground(), 3).all(|a| !shatters(&pairs, &a).unwrap().passed()));
    }

    #[test]
    fn capped_search_is_flagged() {
        let p = SetFamily::powerset(nats(0..5)).unwrap();
        let r = vc_dimension(&p, Some(2));
        assert_eq!(r.dimension, 2);
        assert!(r.capped);
        assert!(!vc_dimension(&SetFamily::initial_segments(4), Some(1)).capped);
    }

    #[test]
    fn degenerate_families() {
        let empty = family(0..3, &[]);
        let r = vc_dimension(&empty, None);
        assert_eq!((r.dimension, r.witness.clone()), (0, None));
        assert!(r.verify(&empty));
        let only_empty = family(0..3, &["{}"]);
        let r = vc_dimension(&only_empty, None);
        assert_eq!(r.witness, Some(OrdSet::new()));
        assert_eq!(r.dimension, 0);
        assert!(r.verify(&only_empty));
    }

    #[test]
    fn vc_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..150 {
            let n = rng.gen_range(0..8);
            let count = rng.gen_range(0..24);
            let f = random_family(&mut rng, n, count);
            let r = vc_dimension(&f, None);
            assert!(r.verify(&f));
            assert_eq!(brute_vc(&f).unwrap_or(0), r.dimension);
        }
    }

    #[test]
    fn restriction_examples() {
        let f = family(0..4, &["{0,1}", "{2}", "{1,3}"]);
        let all: OrdSet = nats(0..4);
        assert_eq!(restrict_family(&f, &all), f);
        let none = restrict_family(&f, &OrdSet::new());
        assert_eq!(none.members(), &[OrdSet::new()]);
        assert!(none.ground().is_empty());
    }

    #[test]
    fn cofinality_examples() {
        assert!(is_cofinal(&SetFamily::initial_segments(5), 7).passed());
        let f = family(0..2, &["{0}", "{1}"]);
        assert!(is_cofinal(&f, 2).passed());
        assert_eq!(is_cofinal(&f, 3), Check::Fail(set("{0,1}")));
        assert!(is_cofinal(&SetFamily::k_subsets(nats(0..8), 2).unwrap(), 3).passed());
    }

    #[test]
    fn closed_family_examples() {
        let sys = TableSystem::trivial(2, nats(0..5));
        let all = closed_family(&sys, FamilyMode::All).unwrap();
        assert!(all.members().contains(&OrdSet::new()));
        for x in sys.elements() {
            assert!(all.members().contains(&OrdSet::from([x.clone()])));
        }
        for m in all.members() {
            assert!(is_closed(&sys, m).unwrap().passed());
        }
        let one = TableSystem::trivial(1, nats(0..6));
        let segs = closed_family(&one, FamilyMode::All).unwrap();
        assert_eq!(segs, SetFamily::initial_segments(5));
    }

    #[test]
    fn family_modes_nest() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let sys = TableSystem::random(n, nats(0..7), &mut rng);
            let all: HashSet<OrdSet> = closed_family(&sys, FamilyMode::All)
                .unwrap()
                .members()
                .iter()
                .cloned()
                .collect();
            for m in closed_family(&sys, FamilyMode::ClosuresOfSmall(2)).unwrap().members() {
                assert!(all.contains(m));
            }
            // segments are not closed in general, but each has size >= n - 1
            for m in closed_family(&sys, FamilyMode::SegmentsOnly).unwrap().members() {
                assert!(m.len() + 1 >= n);
            }
        }
    }

    #[test]
    fn closed_families_have_bounded_vc() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let size = rng.gen_range(0..=9);
            let sys = TableSystem::random(n, nats(0..size), &mut rng);
            let f = closed_family(&sys, FamilyMode::All).unwrap();
            assert!(vc_dimension(&f, None).dimension <= n);
        }
    }

    #[test]
    fn sauer_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let f = random_family(&mut rng, 7, 30);
            let k = rng.gen_range(0..=6);
            let a: OrdSet = nats(0..7)
                .into_iter()
                .filter(|_| rng.gen_bool(k as f64 / 7.0))
                .collect();
            let r = restrict_family(&f, &a);
            assert_eq!(r.members().len() == 1 << a.len(), shatters(&f, &a).unwrap().passed());
        }
    }
}
