//! Closed sets, closed n-initial segments and the closure engine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::order::{elements_below, Position};
use crate::ordinal::Ordinal;
use crate::sets::{format_set, subsets_of_size, with, OrdSet};
use crate::system::{OrderingSystem, SystemError};
use crate::Check;

pub const DEFAULT_BUDGET: u64 = 100_000;

/// `a ≺_s b` with `s ∪ {b} ⊆ S` but `a ∉ S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedWitness {
    pub s: OrdSet,
    pub a: Ordinal,
    pub b: Ordinal,
}

impl fmt::Display for ClosedWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={} a={} b={}", format_set(&self.s), self.a, self.b)
    }
}

fn scan_level(sys: &dyn OrderingSystem, set: &OrdSet, level: usize) -> Result<Option<ClosedWitness>, SystemError> {
    let elems: Vec<Ordinal> = set.iter().cloned().collect();
    for s in subsets_of_size(&elems, level) {
        let ord = sys.order(&s)?;
        for b in elems.iter().filter(|b| ord.contains(b)) {
            let below = elements_below(ord.as_ref(), b).ok_or_else(|| SystemError::NotEnumerable {
                s: s.clone(),
                b: b.clone(),
            })?;
            if let Some(a) = below.into_iter().find(|a| !set.contains(a)) {
                return Ok(Some(ClosedWitness { s, a, b: b.clone() }));
            }
        }
    }
    Ok(None)
}

/// Closedness: for every `s ∈ [S]^{n−1}` and `b ∈ S ∩ dom(≺_s)`, every
/// `a ≺_s b` lies in `S`. The witness is the first failure with `s` in
/// lexicographic order, `b` ascending and `a` in `≺_s` order.
pub fn is_closed(sys: &dyn OrderingSystem, set: &OrdSet) -> Result<Check<ClosedWitness>, SystemError> {
    if let Some(x) = set.iter().find(|x| !sys.universe().contains(x)) {
        return Err(SystemError::Inadmissible {
            s: set.clone(),
            reason: format!("{x} is not in the universe"),
        });
    }
    Ok(match scan_level(sys, set, sys.depth() - 1)? {
        None => Check::Pass,
        Some(w) => Check::Fail(w),
    })
}

/// Diagnostic only: the same condition at the levels `|s| < n − 1`, which
/// closedness does not require.
pub fn lower_level_violations(sys: &dyn OrderingSystem, set: &OrdSet) -> Result<Vec<ClosedWitness>, SystemError> {
    let mut out = Vec::new();
    for level in 0..sys.depth() - 1 {
        if let Some(w) = scan_level(sys, set, level)? {
            out.push(w);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentOutcome {
    Finite(OrdSet),
    ProvablyInfinite,
}

/// The closed n-initial segment `s ∪ {b} ∪ {a : a ≺_s b}`.
pub fn initial_segment(sys: &dyn OrderingSystem, s: &OrdSet, b: &Ordinal) -> Result<SegmentOutcome, SystemError> {
    if s.len() + 1 != sys.depth() {
        return Err(SystemError::Precondition(format!(
            "segment index must have size n-1 = {}",
            sys.depth() - 1
        )));
    }
    let ord = sys.order(s)?;
    if !ord.contains(b) {
        return Err(SystemError::Precondition(format!(
            "{b} is not in the domain of the order indexed by {}",
            format_set(s)
        )));
    }
    match ord.position_of(b) {
        Position::Finite(_) => {
            let mut out = with(s, b);
            out.extend(
                elements_below(ord.as_ref(), b).ok_or_else(|| SystemError::NotEnumerable {
                    s: s.clone(),
                    b: b.clone(),
                })?,
            );
            Ok(SegmentOutcome::Finite(out))
        }
        Position::Infinite => Ok(SegmentOutcome::ProvablyInfinite),
        Position::Unknown => Err(SystemError::NotEnumerable {
            s: s.clone(),
            b: b.clone(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureOutcome {
    Closed(OrdSet),
    BudgetExceeded(OrdSet),
    ProvablyInfinite { s: OrdSet, b: Ordinal, partial: OrdSet },
}

impl ClosureOutcome {
    pub fn closed(self) -> Option<OrdSet> {
        match self {
            ClosureOutcome::Closed(set) => Some(set),
            _ => None,
        }
    }
}

struct Worklist<'a> {
    sys: &'a dyn OrderingSystem,
    current: OrdSet,
    queue: VecDeque<Ordinal>,
    added: u64,
    budget: u64,
}

enum Step {
    Continue,
    Stop(ClosureOutcome),
}

impl Worklist<'_> {
    fn add(&mut self, a: Ordinal) -> bool {
        if self.current.insert(a.clone()) {
            self.queue.push_back(a);
            self.added += 1;
        }
        self.added <= self.budget
    }

    fn over_budget(&self) -> Step {
        Step::Stop(ClosureOutcome::BudgetExceeded(self.current.clone()))
    }

    /// Adds every `a ≺_s b` for each `b` in `bs`.
    fn saturate(&mut self, s: &OrdSet, bs: &[Ordinal]) -> Result<Step, SystemError> {
        let ord = self.sys.order(s)?;
        for b in bs.iter().filter(|b| ord.contains(b)) {
            match ord.position_of(b) {
                Position::Finite(p) => {
                    for i in 0..p {
                        let a = ord.element_at(i).ok_or_else(|| SystemError::NotEnumerable {
                            s: s.clone(),
                            b: b.clone(),
                        })?;
                        if !self.add(a) {
                            return Ok(self.over_budget());
                        }
                    }
                }
                Position::Infinite => {
                    return Ok(Step::Stop(ClosureOutcome::ProvablyInfinite {
                        s: s.clone(),
                        b: b.clone(),
                        partial: self.current.clone(),
                    }))
                }
                // walk the enumeration until b shows up or the budget runs out
                Position::Unknown => {
                    for i in 0.. {
                        let a = ord.element_at(i).ok_or_else(|| SystemError::NotEnumerable {
                            s: s.clone(),
                            b: b.clone(),
                        })?;
                        if &a == b {
                            break;
                        }
                        if !self.add(a) {
                            return Ok(self.over_budget());
                        }
                    }
                }
            }
        }
        Ok(Step::Continue)
    }
}

/// Least closed superset of `a`, by a semi-naive worklist: each pair
/// `(s, b)` is saturated once, when the last of its elements is processed.
/// `budget` bounds the number of added elements.
pub fn closure(sys: &dyn OrderingSystem, a: &OrdSet, budget: u64) -> Result<ClosureOutcome, SystemError> {
    if let Some(x) = a.iter().find(|x| !sys.universe().contains(x)) {
        return Err(SystemError::Inadmissible {
            s: a.clone(),
            reason: format!("{x} is not in the universe"),
        });
    }
    let level = sys.depth() - 1;
    let mut w = Worklist {
        sys,
        current: a.clone(),
        queue: a.iter().cloned().collect(),
        added: 0,
        budget,
    };
    let mut done: Vec<Ordinal> = Vec::new();
    while let Some(e) = w.queue.pop_front() {
        // pairs whose index set avoids e, with b = e
        let old = done.clone();
        for s in subsets_of_size(&old, level) {
            if let Step::Stop(out) = w.saturate(&s, std::slice::from_ref(&e))? {
                return Ok(out);
            }
        }
        done.push(e.clone());
        // pairs whose index set contains e, with b anywhere
        if level >= 1 {
            for t in subsets_of_size(&old, level - 1) {
                let s = with(&t, &e);
                if let Step::Stop(out) = w.saturate(&s, &done)? {
                    return Ok(out);
                }
            }
        }
    }
    Ok(ClosureOutcome::Closed(w.current))
}

/// `A ⊢ x`: every closed superset of `A` contains `x`.
pub fn entails(sys: &dyn OrderingSystem, a: &OrdSet, x: &Ordinal, budget: u64) -> Result<Option<bool>, SystemError> {
    Ok(match closure(sys, a, budget)? {
        ClosureOutcome::Closed(c) => Some(c.contains(x)),
        _ => None,
    })
}

/// Closedness of a finite system as Horn constraints over bitmasks:
/// a set containing all of `premise` must contain all of `conclusion`.
#[derive(Debug, Clone)]
pub struct MaskConstraints {
    elems: Vec<Ordinal>,
    rules: Vec<(u64, u64)>,
}

impl MaskConstraints {
    pub fn new(sys: &dyn OrderingSystem) -> Result<Self, SystemError> {
        let elems = sys.universe().finite().ok_or(SystemError::InfiniteUniverse)?.to_vec();
        if elems.len() > 64 {
            return Err(SystemError::Precondition("at most 64 elements fit a mask".into()));
        }
        let bit: BTreeMap<&Ordinal, u64> = elems.iter().enumerate().map(|(i, x)| (x, 1u64 << i)).collect();
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for s in subsets_of_size(&elems, sys.depth() - 1) {
            let ord = sys.order(&s)?;
            let smask: u64 = s.iter().map(|x| bit[x]).sum();
            let mut below = 0u64;
            let len = ord.length().finite().ok_or_else(|| SystemError::NotEnumerable {
                s: s.clone(),
                b: Ordinal::zero(),
            })?;
            for i in 0..len {
                let b = ord.element_at(i).expect("finite enumeration");
                if below != 0 {
                    *merged.entry(smask | bit[&b]).or_default() |= below;
                }
                below |= bit[&b];
            }
        }
        Ok(MaskConstraints {
            elems,
            rules: merged.into_iter().collect(),
        })
    }

    pub fn elements(&self) -> &[Ordinal] {
        &self.elems
    }

    pub fn mask_of(&self, set: &OrdSet) -> u64 {
        self.elems
            .iter()
            .enumerate()
            .filter(|(_, x)| set.contains(x))
            .map(|(i, _)| 1u64 << i)
            .sum()
    }

    pub fn set_of(&self, mask: u64) -> OrdSet {
        self.elems
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, x)| x.clone())
            .collect()
    }

    pub fn is_closed(&self, mask: u64) -> bool {
        self.rules.iter().all(|&(p, c)| mask & p != p || mask & c == c)
    }

    pub fn closure(&self, mut mask: u64) -> u64 {
        loop {
            let next = self
                .rules
                .iter()
                .filter(|&&(p, _)| mask & p == p)
                .fold(mask, |m, &(_, c)| m | c);
            if next == mask {
                return mask;
            }
            mask = next;
        }
    }

    /// Every closed subset, ascending by mask.
    pub fn closed_masks(&self) -> Vec<u64> {
        let n = self.elems.len();
        assert!(n < 64, "powerset scan needs fewer than 64 elements");
        (0..1u64 << n).filter(|&m| self.is_closed(m)).collect()
    }
}

/// All closed subsets of a finite system, as sets.
pub fn closed_sets(sys: &dyn OrderingSystem) -> Result<BTreeSet<OrdSet>, SystemError> {
    let mc = MaskConstraints::new(sys)?;
    Ok(mc.closed_masks().into_iter().map(|m| mc.set_of(m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::{parse_cnf, OrdinalBound};
    use crate::sets::{nats, parse_set};
    use crate::system::{pivot_set, Rule, RuleSystem, TableSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn o(s: &str) -> Ordinal {
        parse_cnf(s).unwrap()
    }

    fn set(s: &str) -> OrdSet {
        parse_set(s).unwrap()
    }

    fn natural(n: usize) -> RuleSystem {
        RuleSystem::new(OrdinalBound::default(), n, Rule::Natural)
    }

    #[test]
    fn small_sets_are_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=3 {
            let sys = TableSystem::random(n, nats(0..6), &mut rng);
            assert!(is_closed(&sys, &OrdSet::new()).unwrap().passed());
            for x in sys.elements() {
                assert!(is_closed(&sys, &OrdSet::from([x.clone()])).unwrap().passed());
            }
        }
    }

    #[test]
    fn closedness_examples() {
        let sys = TableSystem::trivial(2, nats(0..6));
        assert_eq!(
            is_closed(&sys, &set("{0,2,5}")).unwrap(),
            Check::Fail(ClosedWitness {
                s: set("{5}"),
                a: o("1"),
                b: o("2")
            })
        );
        assert!(is_closed(&sys, &set("{0,1,2,3,5}")).unwrap().passed());
    }

    #[test]
    fn lower_levels_are_only_diagnosed() {
        let sys = TableSystem::trivial(2, nats(0..6));
        let found = lower_level_violations(&sys, &set("{0,5}")).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].s, OrdSet::new());
        assert!(is_closed(&sys, &set("{0,5}")).unwrap().passed());
    }

    #[test]
    fn initial_segment_examples() {
        let sys = TableSystem::trivial(2, nats(0..6));
        assert_eq!(
            initial_segment(&sys, &set("{5}"), &o("2")).unwrap(),
            SegmentOutcome::Finite(set("{0,1,2,5}"))
        );
        assert_eq!(
            initial_segment(&natural(2), &set("{w+1}"), &o("w")).unwrap(),
            SegmentOutcome::ProvablyInfinite
        );
        assert!(initial_segment(&sys, &set("{2}"), &o("3")).is_err());
    }

    #[test]
    fn closure_examples() {
        let sys = TableSystem::trivial(2, nats(0..6));
        assert_eq!(
            closure(&sys, &OrdSet::new(), 10).unwrap(),
            ClosureOutcome::Closed(OrdSet::new())
        );
        assert_eq!(
            closure(&sys, &set("{3,5}"), 100).unwrap(),
            ClosureOutcome::Closed(set("{0,1,2,3,5}"))
        );
        match closure(&natural(2), &set("{w,w+1}"), 1000).unwrap() {
            ClosureOutcome::ProvablyInfinite { s, b, .. } => {
                assert_eq!(s, set("{w+1}"));
                assert_eq!(b, o("w"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            closure(&sys, &set("{3,5}"), 2).unwrap(),
            ClosureOutcome::BudgetExceeded(_)
        ));
    }

    fn brute_closure(sys: &TableSystem, a: &OrdSet) -> OrdSet {
        let all = closed_sets(sys).unwrap();
        let mut out: OrdSet = sys.elements().iter().cloned().collect();
        for c in all.iter().filter(|c| a.is_subset(c)) {
            out = out.intersection(c).cloned().collect();
        }
        out
    }

    #[test]
    fn closure_is_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            let size = rng.gen_range(0..=8);
            let sys = TableSystem::random(n, nats(0..size), &mut rng);
            let a: OrdSet = sys.elements().iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
            let c = closure(&sys, &a, DEFAULT_BUDGET).unwrap().closed().unwrap();
            assert_eq!(c, brute_closure(&sys, &a));
            let mc = MaskConstraints::new(&sys).unwrap();
            assert_eq!(mc.set_of(mc.closure(mc.mask_of(&a))), c);
        }
    }

    #[test]
    fn mask_and_direct_closedness_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let sys = TableSystem::random(n, nats(0..6), &mut rng);
            let mc = MaskConstraints::new(&sys).unwrap();
            for m in 0..64u64 {
                assert_eq!(mc.is_closed(m), is_closed(&sys, &mc.set_of(m)).unwrap().passed());
            }
        }
    }

    #[test]
    fn closed_sets_are_pivot_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let sys = TableSystem::random(n, nats(0..7), &mut rng);
            for c in closed_sets(&sys).unwrap().into_iter().filter(|c| c.len() >= n) {
                let piv = pivot_set(&sys, &c, n - 1).unwrap();
                let ord = sys.order(&piv.set).unwrap();
                let b = c.difference(&piv.set).max_by(|x, y| ord.compare(x, y)).unwrap().clone();
                assert_eq!(initial_segment(&sys, &piv.set, &b).unwrap(), SegmentOutcome::Finite(c));
            }
        }
    }

    #[test]
    fn one_systems_close_to_initial_segments() {
        let sys = TableSystem::trivial(1, nats(0..6));
        let all = closed_sets(&sys).unwrap();
        let expected: BTreeSet<OrdSet> = (0..=6).map(|k| nats(0..k)).collect();
        assert_eq!(all, expected);
    }
}
