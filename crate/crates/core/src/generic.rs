//! Finite conditions for adding a top level to a nice n-system, and a
//! session that extends them on demand.
//!
//! A condition assigns, for each index set `s` of size `n` disjoint from
//! `ω`, distinct natural values to finitely many points of `predom(≺_s)`.
//! The values order those points at the new level. Every other size-`n`
//! index set gets the natural order on its finite predomain.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::order::{enumerate_finite, OrderRef};
use crate::ordinal::Ordinal;
use crate::sets::{format_set, subsets_of_size, OrdSet};
use crate::system::{fragment, inf_test, predom_of, OrderingSystem, RuleSystem, SystemError, TableSystem};
use crate::Check;

/// Largest gap a single index set may need filled before the extension is
/// refused as a policy conflict.
pub const GAP_LIMIT: u64 = 4096;

const FRESH_LARGE_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenericError {
    #[error("invalid condition: {0}")]
    InvalidCondition(Box<ConditionWitness>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("policy conflict at s={}: {reason}", format_set(.s))]
    PolicyConflict { s: OrdSet, reason: String },
    #[error("undefined values for {} pairs, first s={} x={}", .0.len(), format_set(&.0[0].0), .0[0].1)]
    UndefinedG(Vec<(OrdSet, Ordinal)>),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// `s ↦ (x ↦ value)`: a finite partial function, injective per `s`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    entries: BTreeMap<OrdSet, BTreeMap<Ordinal, u64>>,
}

impl Condition {
    pub fn new() -> Self {
        Condition::default()
    }

    pub fn get(&self, s: &OrdSet, x: &Ordinal) -> Option<u64> {
        self.entries.get(s).and_then(|m| m.get(x)).copied()
    }

    /// Sets a value, replacing any previous one.
    pub fn insert(&mut self, s: OrdSet, x: Ordinal, v: u64) {
        self.entries.entry(s).or_default().insert(x, v);
    }

    pub fn section(&self, s: &OrdSet) -> Option<&BTreeMap<Ordinal, u64>> {
        self.entries.get(s)
    }

    pub fn sections(&self) -> impl Iterator<Item = (&OrdSet, &BTreeMap<Ordinal, u64>)> {
        self.entries.iter().filter(|(_, m)| !m.is_empty())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn image(&self, s: &OrdSet) -> BTreeSet<u64> {
        self.entries
            .get(s)
            .map(|m| m.values().copied().collect())
            .unwrap_or_default()
    }

    fn domain(&self, s: &OrdSet) -> OrdSet {
        self.entries
            .get(s)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// `self ≤ other`: `other` agrees with every entry of `self`.
    pub fn extended_by(&self, other: &Condition) -> bool {
        self.sections()
            .all(|(s, m)| m.iter().all(|(x, v)| other.get(s, x) == Some(*v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionWitness {
    /// Index set of the wrong size, outside the universe, or meeting `ω`.
    BadIndex { s: OrdSet },
    /// `x ∉ predom(≺_s)`.
    OutsidePredom { s: OrdSet, x: Ordinal },
    /// Two points share a value.
    NotInjective { s: OrdSet, x: Ordinal, y: Ordinal, v: u64 },
}

impl fmt::Display for ConditionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionWitness::BadIndex { s } => write!(f, "bad index set s={}", format_set(s)),
            ConditionWitness::OutsidePredom { s, x } => {
                write!(f, "x={x} is outside predom of s={}", format_set(s))
            }
            ConditionWitness::NotInjective { s, x, y, v } => {
                write!(f, "s={} maps {x} and {y} to {v}", format_set(s))
            }
        }
    }
}

fn is_inf(s: &OrdSet) -> bool {
    s.iter().all(|x| !x.is_finite())
}

fn predom(base: &dyn OrderingSystem, s: &OrdSet) -> Result<OrderRef, GenericError> {
    Ok(predom_of(base, s)?)
}

/// Membership of every key in its predomain, and injectivity per index set.
pub fn validate_condition(base: &dyn OrderingSystem, p: &Condition) -> Result<Check<ConditionWitness>, GenericError> {
    for (s, m) in p.sections() {
        if s.len() != base.depth() || !is_inf(s) || s.iter().any(|x| !base.universe().contains(x)) {
            return Ok(Check::Fail(ConditionWitness::BadIndex { s: s.clone() }));
        }
        let pre = predom(base, s)?;
        if let Some(x) = m.keys().find(|x| !pre.contains(x)) {
            return Ok(Check::Fail(ConditionWitness::OutsidePredom {
                s: s.clone(),
                x: x.clone(),
            }));
        }
        let mut seen: BTreeMap<u64, &Ordinal> = BTreeMap::new();
        for (x, &v) in m {
            if let Some(y) = seen.insert(v, x) {
                return Ok(Check::Fail(ConditionWitness::NotInjective {
                    s: s.clone(),
                    x: y.clone(),
                    y: x.clone(),
                    v,
                }));
            }
        }
    }
    Ok(Check::Pass)
}

fn close_naturals(b: &mut OrdSet) {
    if let Some(top) = b.iter().filter_map(Ordinal::as_nat).max() {
        b.extend((0..=top).map(Ordinal::nat));
    }
}

/// `Inf(B)`: the size-`n` subsets of `B` disjoint from `ω`.
fn inf_subsets(b: &OrdSet, n: usize) -> Vec<OrdSet> {
    let infinite: Vec<Ordinal> = b.iter().filter(|x| !x.is_finite()).cloned().collect();
    subsets_of_size(&infinite, n).collect()
}

/// Least `count` naturals outside `taken`.
fn least_outside(taken: &BTreeSet<u64>, count: usize) -> Vec<u64> {
    (0..).filter(|v| !taken.contains(v)).take(count).collect()
}

fn least_points_outside(taken: &OrdSet, count: usize) -> Vec<Ordinal> {
    (0..)
        .map(Ordinal::nat)
        .filter(|x| !taken.contains(x))
        .take(count)
        .collect()
}

/// One pass of the extension: the set and condition after it, with notes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassRecord {
    pub b: OrdSet,
    pub q: Condition,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstWitness {
    pub b: OrdSet,
    pub q: Condition,
    /// Passes 1 to 5, in order.
    pub pass_trace: Vec<PassRecord>,
}

/// Which clause of the extension guarantees fails, and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseFailure {
    pub clause: &'static str,
    pub s: Option<OrdSet>,
    pub element: Option<String>,
}

impl fmt::Display for ClauseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clause)?;
        if let Some(s) = &self.s {
            write!(f, " s={}", format_set(s))?;
        }
        if let Some(e) = &self.element {
            write!(f, " at {e}")?;
        }
        Ok(())
    }
}

fn fail(clause: &'static str, s: Option<&OrdSet>, element: Option<String>) -> Check<ClauseFailure> {
    Check::Fail(ClauseFailure {
        clause,
        s: s.cloned(),
        element,
    })
}

fn first_gap_in_naturals(b: &OrdSet) -> Option<u64> {
    let nats: Vec<u64> = b.iter().filter_map(Ordinal::as_nat).collect();
    nats.iter()
        .enumerate()
        .find(|(i, &v)| *i as u64 != v)
        .map(|(i, _)| i as u64)
}

fn first_gap_in_image(img: &BTreeSet<u64>) -> Option<u64> {
    img.iter()
        .enumerate()
        .find(|(i, &v)| *i as u64 != v)
        .map(|(i, _)| i as u64)
}

/// The five guarantees of the extension for `(A, p) ↦ (B, q)`.
pub fn check_const(
    base: &dyn OrderingSystem,
    a: &OrdSet,
    p: &Condition,
    b: &OrdSet,
    q: &Condition,
) -> Result<Check<ClauseFailure>, GenericError> {
    if !p.extended_by(q) {
        return Ok(fail("extends", None, Some("q does not extend p".into())));
    }
    if let Some(x) = a.difference(b).next() {
        return Ok(fail("extends", None, Some(x.to_string())));
    }
    if let Some(g) = first_gap_in_naturals(b) {
        return Ok(fail("naturals-closed-downward", None, Some(g.to_string())));
    }
    for (s, _) in q.sections() {
        if let Some(g) = first_gap_in_image(&q.image(s)) {
            return Ok(fail("images-initial", Some(s), Some(g.to_string())));
        }
    }
    for (s, m) in q.sections() {
        let pre = predom(base, s)?;
        if let Some(x) = m.keys().find(|x| !b.contains(x) || !pre.contains(x)) {
            return Ok(fail("domains-inside", Some(s), Some(x.to_string())));
        }
    }
    for s in inf_subsets(b, base.depth()) {
        let pre = predom(base, &s)?;
        let dom = q.domain(&s);
        if let Some(x) = b.iter().find(|x| pre.contains(x) && !dom.contains(x)) {
            return Ok(fail("domains-cover", Some(&s), Some(x.to_string())));
        }
    }
    Ok(Check::Pass)
}

/// Extends `(A, p)` to `(B, q)` with `A ⊆ B`, `p ≤ q`, `B ∩ ω` an initial
/// segment, every image of `q` an initial segment of `ω`, and `q` defined
/// on exactly the predomain points of `B` for every index set inside `B`.
pub fn const_extend(base: &dyn OrderingSystem, a: &OrdSet, p: &Condition) -> Result<ConstWitness, GenericError> {
    if let Check::Fail(w) = validate_condition(base, p)? {
        return Err(GenericError::InvalidCondition(Box::new(w)));
    }
    if let Some(x) = a.iter().find(|x| !base.universe().contains(x)) {
        return Err(GenericError::Precondition(format!("{x} is not in the universe")));
    }
    let n = base.depth();
    let mut trace = Vec::with_capacity(5);

    let b1 = a.clone();
    let q1 = p.clone();
    trace.push(PassRecord {
        b: b1.clone(),
        q: q1.clone(),
        notes: vec![],
    });

    let mut b2 = b1;
    close_naturals(&mut b2);
    let q2 = q1;
    trace.push(PassRecord {
        b: b2.clone(),
        q: q2.clone(),
        notes: vec![],
    });

    // fill the gaps below the largest value, using fresh natural points
    let mut q3 = q2.clone();
    let mut notes3 = Vec::new();
    for (s, _) in q2.sections() {
        let img = q2.image(s);
        let top = *img.iter().next_back().expect("nonempty section");
        let missing = top + 1 - img.len() as u64;
        if missing == 0 {
            continue;
        }
        if missing > GAP_LIMIT {
            return Err(GenericError::PolicyConflict {
                s: s.clone(),
                reason: format!("{missing} values below {top} are unused"),
            });
        }
        let gaps: Vec<u64> = (0..top).filter(|v| !img.contains(v)).collect();
        let points = least_points_outside(&q2.domain(s), gaps.len());
        for (x, v) in points.into_iter().zip(&gaps) {
            q3.insert(s.clone(), x, *v);
        }
        notes3.push(format!(
            "s={} gap set [0,{top}) minus image: filled {} values",
            format_set(s),
            gaps.len()
        ));
    }
    let b3 = b2;
    trace.push(PassRecord {
        b: b3.clone(),
        q: q3.clone(),
        notes: notes3,
    });

    // every assigned point joins B, then B ∩ ω is closed downwards again
    let mut b4 = b3.clone();
    for (_, m) in q3.sections() {
        b4.extend(m.keys().cloned());
    }
    close_naturals(&mut b4);
    let q4 = q3;
    trace.push(PassRecord {
        b: b4.clone(),
        q: q4.clone(),
        notes: vec!["domain points added to the pass 3 set".into()],
    });

    // assign least unused values to the remaining predomain points of B
    let mut q5 = q4.clone();
    let mut notes5 = Vec::new();
    for s in inf_subsets(&b4, n) {
        let pre = predom(base, &s)?;
        let dom = q4.domain(&s);
        let missing: Vec<Ordinal> = b4
            .iter()
            .filter(|x| pre.contains(x) && !dom.contains(x))
            .cloned()
            .collect();
        if missing.is_empty() {
            continue;
        }
        let values = least_outside(&q4.image(&s), missing.len());
        notes5.push(format!(
            "s={} assigned {} fresh values, one per missing point",
            format_set(&s),
            missing.len()
        ));
        for (x, v) in missing.into_iter().zip(values) {
            q5.insert(s.clone(), x, v);
        }
    }
    let b5 = b4;
    trace.push(PassRecord {
        b: b5.clone(),
        q: q5.clone(),
        notes: notes5,
    });

    if let Check::Fail(w) = check_const(base, a, p, &b5, &q5)? {
        return Err(GenericError::Internal(format!("extension output fails {w}")));
    }
    if let Check::Fail(w) = validate_condition(base, &q5)? {
        return Err(GenericError::Internal(format!(
            "extension output is not a condition: {w}"
        )));
    }
    Ok(ConstWitness {
        b: b5,
        q: q5,
        pass_trace: trace,
    })
}

/// The three hypotheses under which `p` forces `B` to be closed.
pub fn red_check(base: &dyn OrderingSystem, b: &OrdSet, p: &Condition) -> Result<Check<ClauseFailure>, GenericError> {
    if let Some(g) = first_gap_in_naturals(b) {
        return Ok(fail("naturals-closed-downward", None, Some(g.to_string())));
    }
    let infs = inf_subsets(b, base.depth());
    for s in &infs {
        let pre = predom(base, s)?;
        let want: OrdSet = b.iter().filter(|x| pre.contains(x)).cloned().collect();
        let dom = p.domain(s);
        if let Some(x) = want.symmetric_difference(&dom).next() {
            return Ok(fail("domains-exact", Some(s), Some(x.to_string())));
        }
    }
    for s in &infs {
        if let Some(g) = first_gap_in_image(&p.image(s)) {
            return Ok(fail("images-initial", Some(s), Some(g.to_string())));
        }
    }
    Ok(Check::Pass)
}

/// Precomputed parts of the `(n+1)`-level fragment on a fixed carrier: the
/// base levels, the natural top orders, and the predomains to be ordered
/// by condition values.
pub struct FragmentBuilder {
    n: usize,
    carrier: Vec<Ordinal>,
    fixed: BTreeMap<OrdSet, Vec<Ordinal>>,
    /// Index sets disjoint from `ω`, with their predomain points in the carrier.
    valued: Vec<(OrdSet, Vec<Ordinal>)>,
}

impl FragmentBuilder {
    pub fn new(base: &dyn OrderingSystem, carrier: &OrdSet) -> Result<Self, GenericError> {
        let n = base.depth();
        let lower = fragment(base, carrier)?;
        let mut fixed: BTreeMap<OrdSet, Vec<Ordinal>> = lower
            .orders()
            .iter()
            .map(|(s, o)| (s.clone(), o.seq().to_vec()))
            .collect();
        let elems: Vec<Ordinal> = carrier.iter().cloned().collect();
        let mut valued = Vec::new();
        for s in subsets_of_size(&elems, n) {
            let pre = predom(base, &s)?;
            let points: Vec<Ordinal> = elems.iter().filter(|x| pre.contains(x)).cloned().collect();
            if inf_test(base, &s)?.infinite {
                valued.push((s, points));
            } else {
                fixed.insert(s, points);
            }
        }
        Ok(FragmentBuilder {
            n,
            carrier: elems,
            fixed,
            valued,
        })
    }

    /// Points of the carrier that `g` must value.
    pub fn required(&self) -> impl Iterator<Item = (&OrdSet, &Ordinal)> {
        self.valued.iter().flat_map(|(s, pts)| pts.iter().map(move |x| (s, x)))
    }

    pub fn build(&self, g: &Condition) -> Result<TableSystem, GenericError> {
        let mut orders = self.fixed.clone();
        let mut missing = Vec::new();
        for (s, pts) in &self.valued {
            let mut keyed = Vec::with_capacity(pts.len());
            for x in pts {
                match g.get(s, x) {
                    Some(v) => keyed.push((v, x.clone())),
                    None => missing.push((s.clone(), x.clone())),
                }
            }
            keyed.sort();
            orders.insert(s.clone(), keyed.into_iter().map(|(_, x)| x).collect());
        }
        if !missing.is_empty() {
            return Err(GenericError::UndefinedG(missing));
        }
        Ok(TableSystem::new(self.n + 1, self.carrier.clone(), orders)?)
    }
}

/// The `(n+1)`-system on `carrier` induced by `g` over `base`.
pub fn induced_fragment_of(
    base: &dyn OrderingSystem,
    g: &Condition,
    carrier: &OrdSet,
) -> Result<TableSystem, GenericError> {
    FragmentBuilder::new(base, carrier)?.build(g)
}

/// Extends `q` at every required point of `builder` with fresh values
/// (outside the current image, injective, otherwise arbitrary).
pub fn random_legal_extension(q: &Condition, builder: &FragmentBuilder, rng: &mut impl Rng) -> Condition {
    let mut out = q.clone();
    for (s, x) in builder.required() {
        if out.get(s, x).is_some() {
            continue;
        }
        let img = out.image(s);
        let top = img.iter().next_back().map_or(0, |v| v + 1);
        let v = loop {
            let v = rng.gen_range(0..top + 64);
            if !img.contains(&v) {
                break v;
            }
        };
        out.insert(s.clone(), x.clone(), v);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Least unused values, keeping every image an initial segment of `ω`.
    FrontFill,
    /// Large pseudorandom values; meant for adversarial tests.
    FreshLarge(u64),
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::FrontFill => f.write_str("FrontFill"),
            Policy::FreshLarge(seed) => write!(f, "FreshLarge:{seed}"),
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "FrontFill" => Ok(Policy::FrontFill),
            _ => s
                .strip_prefix("FreshLarge:")
                .and_then(|seed| seed.parse().ok())
                .map(Policy::FreshLarge)
                .ok_or_else(|| format!("unknown policy `{s}`")),
        }
    }
}

/// A request made to a session; replaying the log rebuilds the session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Compare { s: OrdSet, x: Ordinal, y: Ordinal },
    Closure { a: OrdSet },
}

/// Accumulating condition over a nice base.
pub struct GenericSession {
    base: RuleSystem,
    current: Condition,
    policy: Policy,
    rng: ChaCha8Rng,
    log: Vec<Query>,
}

impl GenericSession {
    pub fn new(base: RuleSystem, policy: Policy) -> Self {
        let seed = match policy {
            Policy::FrontFill => 0,
            Policy::FreshLarge(seed) => seed,
        };
        GenericSession {
            base,
            current: Condition::new(),
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: Vec::new(),
        }
    }

    /// Re-runs `log` on a fresh session.
    pub fn replay(base: RuleSystem, policy: Policy, log: &[Query]) -> Result<Self, GenericError> {
        let mut session = GenericSession::new(base, policy);
        for q in log {
            match q {
                Query::Compare { s, x, y } => {
                    session.compare(s, x, y)?;
                }
                Query::Closure { a } => {
                    session.closure(a)?;
                }
            }
        }
        Ok(session)
    }

    pub fn base(&self) -> &RuleSystem {
        &self.base
    }

    pub fn condition(&self) -> &Condition {
        &self.current
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn log(&self) -> &[Query] {
        &self.log
    }

    fn fresh_value(&mut self, s: &OrdSet) -> u64 {
        let img = self.current.image(s);
        match self.policy {
            Policy::FrontFill => least_outside(&img, 1)[0],
            Policy::FreshLarge(_) => loop {
                let v = FRESH_LARGE_BASE + self.rng.gen_range(0..FRESH_LARGE_BASE);
                if !img.contains(&v) {
                    break v;
                }
            },
        }
    }

    /// `x <_s y` at the new level, assigning values first if needed.
    pub fn compare(&mut self, s: &OrdSet, x: &Ordinal, y: &Ordinal) -> Result<Ordering, GenericError> {
        let n = self.base.depth();
        if s.len() != n {
            return Err(GenericError::Precondition(format!("index set must have size {n}")));
        }
        let pre = predom(&self.base, s)?;
        if let Some(z) = [x, y].into_iter().find(|z| !pre.contains(z)) {
            return Err(GenericError::Precondition(format!(
                "{z} is not in predom of {}",
                format_set(s)
            )));
        }
        if x == y {
            return Ok(Ordering::Equal);
        }
        self.log.push(Query::Compare {
            s: s.clone(),
            x: x.clone(),
            y: y.clone(),
        });
        if !inf_test(&self.base, s)?.infinite {
            return Ok(x.cmp(y));
        }
        let mut pending: Vec<&Ordinal> = [x, y]
            .into_iter()
            .filter(|z| self.current.get(s, z).is_none())
            .collect();
        pending.sort();
        for z in pending {
            let v = self.fresh_value(s);
            self.current.insert(s.clone(), z.clone(), v);
        }
        Ok(self.current.get(s, x).cmp(&self.current.get(s, y)))
    }

    /// Meets the dense set for `A`: extends the condition so that a finite
    /// `B ⊇ A` is forced closed, and returns `B` with whether the forcing
    /// hypotheses hold for it.
    pub fn closure(&mut self, a: &OrdSet) -> Result<(OrdSet, bool), GenericError> {
        let w = const_extend(&self.base, a, &self.current)?;
        if matches!(self.policy, Policy::FreshLarge(_)) {
            for s in inf_subsets(&w.b, self.base.depth()) {
                if first_gap_in_image(&self.current.image(&s)).is_some() {
                    return Err(GenericError::PolicyConflict {
                        s,
                        reason: "earlier large values leave gaps in the image".into(),
                    });
                }
            }
        }
        self.log.push(Query::Closure { a: a.clone() });
        let certified = red_check(&self.base, &w.b, &w.q)?.passed();
        self.current = w.q;
        Ok((w.b, certified))
    }

    /// The `(n+1)`-system on `carrier` induced by the current condition.
    pub fn induced_fragment(&self, carrier: &OrdSet) -> Result<TableSystem, GenericError> {
        induced_fragment_of(&self.base, &self.current, carrier)
    }
}

/// Members of `predom(≺_s)` sit at enumerable positions: walks the
/// predomain of each sampled `s` up to `depth` positions.
pub fn predom_enumerable(base: &dyn OrderingSystem, s: &OrdSet, depth: u64) -> Result<bool, GenericError> {
    let pre = predom(base, s)?;
    if let Some(all) = enumerate_finite(pre.as_ref()) {
        return Ok(all.iter().all(|x| pre.contains(x)));
    }
    Ok((0..depth).all(|k| pre.element_at(k).is_some_and(|x| pre.contains(&x))))
}
