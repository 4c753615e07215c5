//! n-ordering systems and the structure-level queries on them.
//!
//! A system of depth `n` assigns to every index set `s` with `|s| < n` a
//! well-order `≺_s`. The empty index orders the whole universe; the domain of
//! `≺_{s ∪ {a}}` is the set of `≺_s`-predecessors of `a`. Systems are exposed
//! through [`OrderingSystem`], with two concrete flavors: [`TableSystem`]
//! stores every order explicitly, [`RuleSystem`] computes them from a rule.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::order::{enumerate_finite, OrderRef, Position, Segment, TableOrder, WellOrder};
use crate::ordinal::{Ordinal, OrdinalBound, OrdinalError};
use crate::sets::{format_set, subsets_of_size, with, OrdSet};
use crate::Check;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("index set {} is inadmissible: {reason}", format_set(.s))]
    Inadmissible { s: OrdSet, reason: String },
    #[error("level {k} is out of range 1..={n}")]
    LevelRange { k: usize, n: usize },
    #[error("the segment below {b} in the order indexed by {} cannot be enumerated", format_set(.s))]
    NotEnumerable { s: OrdSet, b: Ordinal },
    #[error("domain mismatch for index set {} at element {element}", format_set(.s))]
    DomainMismatch { s: OrdSet, element: Ordinal },
    #[error("order indexed by {} lists {element} twice", format_set(.s))]
    NotWellOrder { s: OrdSet, element: Ordinal },
    #[error("this operation needs a finite universe or a probe fragment")]
    InfiniteUniverse,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
}

/// The carrier of a system.
#[derive(Clone)]
pub enum Universe {
    /// Finitely many ordinals, ascending.
    Finite(Vec<Ordinal>),
    /// All ordinals below Λ.
    Range(OrdinalBound),
    /// The domain of an order, referenced in that order's enumeration
    /// (the carrier of a derived system over an infinite universe).
    Domain(OrderRef),
}

impl Universe {
    pub fn contains(&self, x: &Ordinal) -> bool {
        match self {
            Universe::Finite(v) => v.binary_search(x).is_ok(),
            Universe::Range(b) => b.contains(x),
            Universe::Domain(o) => o.contains(x),
        }
    }

    pub fn finite(&self) -> Option<&[Ordinal]> {
        match self {
            Universe::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `k`-th element of the reference order `<^X`.
    pub fn reference_at(&self, k: u64) -> Option<Ordinal> {
        match self {
            Universe::Finite(v) => v.get(k as usize).cloned(),
            Universe::Range(_) => Some(Ordinal::nat(k)),
            Universe::Domain(o) => o.element_at(k),
        }
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Finite(v) => write!(f, "finite:{}", format_set(v)),
            Universe::Range(b) => write!(f, "range:{b}"),
            Universe::Domain(_) => f.write_str("domain"),
        }
    }
}

pub trait OrderingSystem {
    fn depth(&self) -> usize;
    fn universe(&self) -> &Universe;
    /// `≺_s` for `s ⊆ universe` with `|s| < depth`.
    fn order(&self, s: &OrdSet) -> Result<OrderRef, SystemError>;
}

/// Rejects index sets that are too large or leave the universe.
pub fn check_index(sys: &dyn OrderingSystem, s: &OrdSet) -> Result<(), SystemError> {
    if s.len() >= sys.depth() {
        return Err(SystemError::Inadmissible {
            s: s.clone(),
            reason: format!("size {} but depth is {}", s.len(), sys.depth()),
        });
    }
    if let Some(x) = s.iter().find(|x| !sys.universe().contains(x)) {
        return Err(SystemError::Inadmissible {
            s: s.clone(),
            reason: format!("{x} is not in the universe"),
        });
    }
    Ok(())
}

/// Explicit finite system: every order stored as its enumeration.
///
/// Index sets without an entry have the empty order.
#[derive(Debug, Clone)]
pub struct TableSystem {
    n: usize,
    universe: Universe,
    orders: BTreeMap<OrdSet, Rc<TableOrder>>,
    empty: Rc<TableOrder>,
}

impl TableSystem {
    /// Builds a table without checking the ordering-system axioms; use
    /// [`validate_system`] for that.
    pub fn new(
        n: usize,
        universe: impl IntoIterator<Item = Ordinal>,
        orders: BTreeMap<OrdSet, Vec<Ordinal>>,
    ) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::Precondition("depth must be positive".into()));
        }
        let mut elems: Vec<Ordinal> = universe.into_iter().collect();
        elems.sort();
        elems.dedup();
        let mut sys = TableSystem {
            n,
            universe: Universe::Finite(elems),
            orders: BTreeMap::new(),
            empty: Rc::new(TableOrder::default()),
        };
        for (s, seq) in orders {
            check_index(&sys, &s)?;
            if let Some(x) = seq.iter().find(|x| !sys.universe.contains(x)) {
                return Err(SystemError::DomainMismatch { s, element: x.clone() });
            }
            if !seq.is_empty() || s.is_empty() {
                sys.orders.insert(s, Rc::new(TableOrder::new(seq)));
            }
        }
        Ok(sys)
    }

    /// Builds a system top-down: `rule(s, dom)` receives the (ascending)
    /// domain forced for `≺_s` and returns it in the desired order.
    pub fn from_rule(
        n: usize,
        universe: impl IntoIterator<Item = Ordinal>,
        mut rule: impl FnMut(&OrdSet, Vec<Ordinal>) -> Vec<Ordinal>,
    ) -> Result<Self, SystemError> {
        let mut elems: Vec<Ordinal> = universe.into_iter().collect();
        elems.sort();
        elems.dedup();
        let mut orders = BTreeMap::new();
        let mut queue = VecDeque::from([(OrdSet::new(), elems.clone())]);
        while let Some((s, dom)) = queue.pop_front() {
            let seq = rule(&s, dom);
            if s.len() + 1 < n {
                for (i, a) in seq.iter().enumerate() {
                    let mut below = seq[..i].to_vec();
                    below.sort();
                    queue.push_back((with(&s, a), below));
                }
            }
            orders.insert(s, seq);
        }
        TableSystem::new(n, elems, orders)
    }

    /// All orders equal to the natural order.
    pub fn trivial(n: usize, universe: impl IntoIterator<Item = Ordinal>) -> Self {
        TableSystem::from_rule(n, universe, |_, dom| dom).expect("trivial system")
    }

    /// Every order an independent uniformly random permutation of its domain.
    pub fn random(n: usize, universe: impl IntoIterator<Item = Ordinal>, rng: &mut impl Rng) -> Self {
        TableSystem::from_rule(n, universe, |_, mut dom| {
            dom.shuffle(rng);
            dom
        })
        .expect("random system")
    }

    pub fn elements(&self) -> &[Ordinal] {
        self.universe.finite().unwrap()
    }

    /// Stored (nonempty, plus the base) orders.
    pub fn orders(&self) -> &BTreeMap<OrdSet, Rc<TableOrder>> {
        &self.orders
    }

    pub fn restrict_levels(&self, k: usize) -> Result<TableSystem, SystemError> {
        if k < 1 || k > self.n {
            return Err(SystemError::LevelRange { k, n: self.n });
        }
        let orders = self
            .orders
            .iter()
            .filter(|(s, _)| s.len() < k)
            .map(|(s, o)| (s.clone(), o.seq().to_vec()))
            .collect();
        TableSystem::new(k, self.elements().to_vec(), orders)
    }
}

impl OrderingSystem for TableSystem {
    fn depth(&self) -> usize {
        self.n
    }

    fn universe(&self) -> &Universe {
        &self.universe
    }

    fn order(&self, s: &OrdSet) -> Result<OrderRef, SystemError> {
        check_index(self, s)?;
        let o = self.orders.get(s).unwrap_or(&self.empty);
        Ok(o.clone() as OrderRef)
    }
}

/// Named rules for lazily evaluated nice systems on `[0, Λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Every order is the usual ordinal order.
    Natural,
    /// The usual order on ω, then pairs of ω-blocks swapped pseudorandomly
    /// per index set.
    BlockShuffle(u64),
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Natural => f.write_str("Natural"),
            Rule::BlockShuffle(seed) => write!(f, "BlockShuffle:{seed}"),
        }
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Natural" => Ok(Rule::Natural),
            _ => s
                .strip_prefix("BlockShuffle:")
                .and_then(|seed| seed.parse().ok())
                .map(Rule::BlockShuffle)
                .ok_or_else(|| format!("unknown rule `{s}`")),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix_ordinal(h: u64, x: &Ordinal) -> u64 {
    x.terms().iter().fold(splitmix(h ^ 0x5157), |h, t| {
        splitmix(splitmix(h ^ t.exp as u64) ^ t.coeff)
    })
}

/// Sort key realizing a rule order `≺_s`: (part above ω², permuted ω-block, finite part).
type RuleKey = (Ordinal, u64, u64);

fn rule_key(rule: Rule, s: &OrdSet, x: &Ordinal) -> RuleKey {
    let (limit, c) = x.split_finite();
    let b = limit.coeff(1);
    let high = Ordinal::from_terms(&limit.terms().iter().copied().filter(|t| t.exp >= 2).collect::<Vec<_>>())
        .expect("sub-CNF");
    let Rule::BlockShuffle(seed) = rule else {
        return (high, b, c);
    };
    if s.is_empty() {
        return (high, b, c);
    }
    // ω itself (the first block below ω²) never moves
    let (pair, partner) = if high.is_zero() {
        if b == 0 {
            return (high, b, c);
        }
        (b.div_ceil(2), if b % 2 == 1 { b + 1 } else { b - 1 })
    } else {
        (b / 2, b ^ 1)
    };
    let mut h = splitmix(seed);
    for e in s {
        h = mix_ordinal(h, e);
    }
    h = mix_ordinal(splitmix(h ^ 0xb10c), &high);
    h = splitmix(h ^ pair);
    let b2 = if h & 1 == 1 { partner } else { b };
    (high, b2, c)
}

/// Lazily evaluated nice system on `[0, Λ)`.
#[derive(Debug, Clone)]
pub struct RuleSystem {
    bound: OrdinalBound,
    n: usize,
    rule: Rule,
    universe: Universe,
}

impl RuleSystem {
    pub fn new(bound: OrdinalBound, n: usize, rule: Rule) -> Self {
        assert!(n >= 1, "depth must be positive");
        RuleSystem {
            universe: Universe::Range(bound.clone()),
            bound,
            n,
            rule,
        }
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn bound(&self) -> &OrdinalBound {
        &self.bound
    }

    pub fn restrict_levels(&self, k: usize) -> Result<RuleSystem, SystemError> {
        if k < 1 || k > self.n {
            return Err(SystemError::LevelRange { k, n: self.n });
        }
        Ok(RuleSystem::new(self.bound.clone(), k, self.rule))
    }
}

/// A rule order: its domain is cut out by one key comparison per pivot.
struct RuleOrder {
    rule: Rule,
    bound: OrdinalBound,
    index: OrdSet,
    /// `(prefix, pivot)`: members must sit below `pivot` in `≺_prefix`.
    constraints: Vec<(OrdSet, RuleKey)>,
    finite_len: Option<u64>,
}

impl WellOrder for RuleOrder {
    fn contains(&self, x: &Ordinal) -> bool {
        self.bound.contains(x)
            && self
                .constraints
                .iter()
                .all(|(prefix, key)| rule_key(self.rule, prefix, x) < *key)
    }

    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering {
        rule_key(self.rule, &self.index, a).cmp(&rule_key(self.rule, &self.index, b))
    }

    fn element_at(&self, pos: u64) -> Option<Ordinal> {
        match self.finite_len {
            Some(len) if pos >= len => None,
            _ => Some(Ordinal::nat(pos)),
        }
    }

    fn position_of(&self, x: &Ordinal) -> Position {
        if !self.contains(x) {
            return Position::Unknown;
        }
        x.as_nat().map_or(Position::Infinite, Position::Finite)
    }

    fn length(&self) -> Position {
        self.finite_len.map_or(Position::Infinite, Position::Finite)
    }

    fn order_type(&self) -> Option<Ordinal> {
        match (self.finite_len, self.rule) {
            (Some(len), _) => Some(Ordinal::nat(len)),
            (None, Rule::Natural) => Some(
                self.index
                    .first()
                    .cloned()
                    .unwrap_or_else(|| self.bound.lambda().clone()),
            ),
            (None, Rule::BlockShuffle(_)) => None,
        }
    }
}

impl OrderingSystem for RuleSystem {
    fn depth(&self) -> usize {
        self.n
    }

    fn universe(&self) -> &Universe {
        &self.universe
    }

    fn order(&self, s: &OrdSet) -> Result<OrderRef, SystemError> {
        check_index(self, s)?;
        let mut prefix = OrdSet::new();
        let mut rest = s.clone();
        let mut constraints = Vec::with_capacity(s.len());
        while let Some(m) = rest.iter().max_by_key(|x| rule_key(self.rule, &prefix, x)).cloned() {
            constraints.push((prefix.clone(), rule_key(self.rule, &prefix, &m)));
            prefix.insert(m.clone());
            rest.remove(&m);
        }
        // the first ω elements of every rule order are the naturals, so the
        // domain is finite exactly when some index is a natural number
        let finite_len = s.iter().filter_map(Ordinal::as_nat).min();
        Ok(Rc::new(RuleOrder {
            rule: self.rule,
            bound: self.bound.clone(),
            index: s.clone(),
            constraints,
            finite_len,
        }))
    }
}

/// A nice n-ordering system on `[0, Λ)` generated by a named rule.
pub fn nice_nested_system(bound: OrdinalBound, n: usize, rule: Rule) -> RuleSystem {
    RuleSystem::new(bound, n, rule)
}

/// `≺^{x0}`: the (n−1)-system `t ↦ ≺_{t ∪ {x0}}` on the `≺_∅`-predecessors of `x0`.
pub struct DerivedSystem<'a> {
    parent: &'a dyn OrderingSystem,
    x0: Ordinal,
    universe: Universe,
}

impl<'a> DerivedSystem<'a> {
    pub fn new(parent: &'a dyn OrderingSystem, x0: &Ordinal) -> Result<Self, SystemError> {
        if parent.depth() < 2 {
            return Err(SystemError::Precondition(
                "derived systems need depth at least 2".into(),
            ));
        }
        let single = OrdSet::from([x0.clone()]);
        let universe = match parent.universe() {
            Universe::Finite(_) => {
                let base = parent.order(&OrdSet::new())?;
                let mut below =
                    crate::order::elements_below(base.as_ref(), x0).ok_or_else(|| SystemError::NotEnumerable {
                        s: OrdSet::new(),
                        b: x0.clone(),
                    })?;
                below.sort();
                Universe::Finite(below)
            }
            _ => Universe::Domain(parent.order(&single)?),
        };
        Ok(DerivedSystem {
            parent,
            x0: x0.clone(),
            universe,
        })
    }

    fn with_universe(parent: &'a dyn OrderingSystem, x0: &Ordinal, universe: Vec<Ordinal>) -> Self {
        DerivedSystem {
            parent,
            x0: x0.clone(),
            universe: Universe::Finite(universe),
        }
    }
}

impl OrderingSystem for DerivedSystem<'_> {
    fn depth(&self) -> usize {
        self.parent.depth() - 1
    }

    fn universe(&self) -> &Universe {
        &self.universe
    }

    fn order(&self, t: &OrdSet) -> Result<OrderRef, SystemError> {
        check_index(self, t)?;
        self.parent.order(&with(t, &self.x0))
    }
}

/// A system seen only through its levels `|s| < k`.
pub struct LevelRestriction<'a> {
    inner: &'a dyn OrderingSystem,
    k: usize,
}

impl OrderingSystem for LevelRestriction<'_> {
    fn depth(&self) -> usize {
        self.k
    }

    fn universe(&self) -> &Universe {
        self.inner.universe()
    }

    fn order(&self, s: &OrdSet) -> Result<OrderRef, SystemError> {
        check_index(self, s)?;
        self.inner.order(s)
    }
}

pub fn restrict_levels(sys: &dyn OrderingSystem, k: usize) -> Result<LevelRestriction<'_>, SystemError> {
    if k < 1 || k > sys.depth() {
        return Err(SystemError::LevelRange { k, n: sys.depth() });
    }
    Ok(LevelRestriction { inner: sys, k })
}

/// The restriction of `sys` to a finite carrier, as an explicit table.
///
/// Restricting every order to a subset of the universe yields an ordering
/// system on that subset, so fragments are the finite probes used by all
/// exhaustive checks.
pub fn fragment(sys: &dyn OrderingSystem, carrier: &OrdSet) -> Result<TableSystem, SystemError> {
    if let Some(x) = carrier.iter().find(|x| !sys.universe().contains(x)) {
        return Err(SystemError::Inadmissible {
            s: carrier.clone(),
            reason: format!("{x} is not in the universe"),
        });
    }
    let elems: Vec<Ordinal> = carrier.iter().cloned().collect();
    let mut orders = BTreeMap::new();
    for k in 0..sys.depth().min(elems.len() + 1) {
        for s in subsets_of_size(&elems, k) {
            let ord = sys.order(&s)?;
            let mut seq: Vec<Ordinal> = elems.iter().filter(|x| ord.contains(x)).cloned().collect();
            seq.sort_by(|a, b| ord.compare(a, b));
            orders.insert(s, seq);
        }
    }
    TableSystem::new(sys.depth(), elems, orders)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An order's enumeration repeats `element`.
    NotWellOrder { s: OrdSet, element: Ordinal },
    /// `element` is in `dom(≺_s)` but should not be (`extra`), or vice versa.
    DomainMismatch { s: OrdSet, element: Ordinal, extra: bool },
    /// The order indexed by `s` has no finite enumeration.
    Undecidable { s: OrdSet },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotWellOrder { s, element } => {
                write!(f, "not a well-order: s={} repeats {element}", format_set(s))
            }
            Violation::DomainMismatch { s, element, extra } => write!(
                f,
                "domain mismatch: s={} element={element} ({})",
                format_set(s),
                if *extra { "unexpected" } else { "missing" }
            ),
            Violation::Undecidable { s } => write!(f, "undecidable: s={}", format_set(s)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// The probe fragment, when the system itself is not finite.
    pub fragment: Option<OrdSet>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn validate_rec(sys: &dyn OrderingSystem, carrier: &[Ordinal], path: &OrdSet, out: &mut Vec<Violation>) {
    let base = match sys.order(&OrdSet::new()) {
        Ok(o) => o,
        Err(_) => {
            out.push(Violation::Undecidable { s: path.clone() });
            return;
        }
    };
    let Some(seq) = enumerate_finite(base.as_ref()) else {
        out.push(Violation::Undecidable { s: path.clone() });
        return;
    };
    let mut seen = OrdSet::new();
    for x in &seq {
        if !seen.insert(x.clone()) {
            out.push(Violation::NotWellOrder {
                s: path.clone(),
                element: x.clone(),
            });
        }
    }
    let expected: OrdSet = carrier.iter().cloned().collect();
    for x in seen.difference(&expected) {
        out.push(Violation::DomainMismatch {
            s: path.clone(),
            element: x.clone(),
            extra: true,
        });
    }
    for x in expected.difference(&seen) {
        out.push(Violation::DomainMismatch {
            s: path.clone(),
            element: x.clone(),
            extra: false,
        });
    }
    if sys.depth() < 2 {
        return;
    }
    let mut first = OrdSet::new();
    for (i, x0) in seq.iter().enumerate() {
        if !expected.contains(x0) || !first.insert(x0.clone()) {
            continue;
        }
        let mut below: Vec<Ordinal> = seq[..i].iter().filter(|x| expected.contains(*x)).cloned().collect();
        below.sort();
        below.dedup();
        let derived = DerivedSystem::with_universe(sys, x0, below.clone());
        validate_rec(&derived, &below, &with(path, x0), out);
    }
}

/// Exhaustive check of the ordering-system axioms on a finite universe;
/// infinite universes are checked on the restriction to `probe`.
pub fn validate_system(sys: &dyn OrderingSystem, probe: Option<&OrdSet>) -> Result<ValidationReport, SystemError> {
    match (sys.universe().finite(), probe) {
        (Some(elems), _) => {
            let mut violations = Vec::new();
            validate_rec(sys, elems, &OrdSet::new(), &mut violations);
            Ok(ValidationReport {
                fragment: None,
                violations,
            })
        }
        (None, Some(probe)) => {
            let table = fragment(sys, probe)?;
            let mut report = validate_system(&table, None)?;
            report.fragment = Some(probe.clone());
            Ok(report)
        }
        (None, None) => Err(SystemError::InfiniteUniverse),
    }
}

/// Result of [`pivot_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pivots {
    /// The unique `s_k ∈ [s]^k` with `s \ s_k ⊆ dom(≺_{s_k})`.
    pub set: OrdSet,
    /// Pivots in extraction order (successive maxima).
    pub chain: Vec<Ordinal>,
    /// `Min s`, when `k = |s| − 1`.
    pub min: Option<Ordinal>,
}

/// Extracts `s_k` by repeated maxima: the `≺_∅`-maximum of `s`, then the
/// `≺_{that}`-maximum of the rest, and so on.
pub fn pivot_set(sys: &dyn OrderingSystem, s: &OrdSet, k: usize) -> Result<Pivots, SystemError> {
    if k > s.len() || k + 1 > sys.depth() {
        return Err(SystemError::Precondition(format!(
            "k={k} exceeds min(n-1, |s|) for |s|={} and n={}",
            s.len(),
            sys.depth()
        )));
    }
    let mut set = OrdSet::new();
    let mut rest = s.clone();
    let mut chain = Vec::with_capacity(k);
    for _ in 0..k {
        let ord = sys.order(&set)?;
        if let Some(x) = rest.iter().find(|x| !ord.contains(x)) {
            return Err(SystemError::Inadmissible {
                s: s.clone(),
                reason: format!("{x} is outside the domain of the order indexed by {}", format_set(&set)),
            });
        }
        let m = rest.iter().max_by(|a, b| ord.compare(a, b)).cloned().expect("k <= |s|");
        rest.remove(&m);
        set.insert(m.clone());
        chain.push(m);
    }
    let min = if rest.len() == 1 {
        let y = rest.into_iter().next().unwrap();
        if !sys.order(&set)?.contains(&y) {
            return Err(SystemError::Inadmissible {
                s: s.clone(),
                reason: format!("{y} is outside the domain of the order indexed by {}", format_set(&set)),
            });
        }
        Some(y)
    } else {
        None
    };
    Ok(Pivots { set, chain, min })
}

/// `Min s`: the unique `y ∈ s` with `y ∈ dom(≺_{s \ {y}})`.
pub fn min_of(sys: &dyn OrderingSystem, s: &OrdSet) -> Result<Ordinal, SystemError> {
    if s.is_empty() {
        return Err(SystemError::Precondition("Min of the empty set".into()));
    }
    Ok(pivot_set(sys, s, s.len() - 1)?.min.expect("k = |s| - 1"))
}

/// `dom(≺_s)`, as the order itself.
pub fn domain_of(sys: &dyn OrderingSystem, s: &OrdSet) -> Result<OrderRef, SystemError> {
    sys.order(s)
}

/// `predom(≺_s) = {x ∈ dom(≺_{s'}) : x ≺_{s'} Min s}` with `s' = s \ {Min s}`,
/// returned as the segment of `≺_{s'}` it is. Defined for `|s| ≤ n`.
pub fn predom_of(sys: &dyn OrderingSystem, s: &OrdSet) -> Result<OrderRef, SystemError> {
    if s.len() > sys.depth() {
        return Err(SystemError::Inadmissible {
            s: s.clone(),
            reason: format!("size {} exceeds depth {}", s.len(), sys.depth()),
        });
    }
    if s.is_empty() {
        return sys.order(s);
    }
    let piv = pivot_set(sys, s, s.len() - 1)?;
    let order = sys.order(&piv.set)?;
    Ok(Rc::new(Segment {
        order,
        bound: piv.min.expect("k = |s| - 1"),
    }))
}

/// Adds a top level: `top[s]` must enumerate exactly `predom(≺_s)` for every
/// `s ∈ [universe]^n` (missing entries stand for empty orders).
pub fn extend_bottom_up(
    sys: &dyn OrderingSystem,
    top: &BTreeMap<OrdSet, Vec<Ordinal>>,
) -> Result<TableSystem, SystemError> {
    let elems = sys.universe().finite().ok_or(SystemError::InfiniteUniverse)?.to_vec();
    let n = sys.depth();
    if let Some(s) = top
        .keys()
        .find(|s| s.len() != n || !s.iter().all(|x| sys.universe().contains(x)))
    {
        return Err(SystemError::Inadmissible {
            s: s.clone(),
            reason: format!("top-level index sets must be {n}-subsets of the universe"),
        });
    }
    let mut orders = BTreeMap::new();
    for k in 0..n {
        for s in subsets_of_size(&elems, k) {
            let ord = sys.order(&s)?;
            let seq = enumerate_finite(ord.as_ref()).ok_or_else(|| SystemError::NotEnumerable {
                s: s.clone(),
                b: Ordinal::zero(),
            })?;
            orders.insert(s, seq);
        }
    }
    for s in subsets_of_size(&elems, n) {
        let pre = predom_of(sys, &s)?;
        let expected: OrdSet = enumerate_finite(pre.as_ref())
            .ok_or_else(|| SystemError::NotEnumerable {
                s: s.clone(),
                b: Ordinal::zero(),
            })?
            .into_iter()
            .collect();
        let given = top.get(&s).cloned().unwrap_or_default();
        let mut seen = OrdSet::new();
        for x in &given {
            if !seen.insert(x.clone()) {
                return Err(SystemError::NotWellOrder { s, element: x.clone() });
            }
        }
        if let Some(x) = seen.symmetric_difference(&expected).next() {
            return Err(SystemError::DomainMismatch { s, element: x.clone() });
        }
        orders.insert(s, given);
    }
    TableSystem::new(n + 1, elems, orders)
}

/// Where niceness fails: the order indexed by `s` differs from the
/// reference order at `position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceWitness {
    pub s: OrdSet,
    pub position: u64,
    pub expected: Option<Ordinal>,
    pub found: Option<Ordinal>,
}

/// How an infinite system is probed: index sets drawn from `fragment`, and
/// at most `prefix_depth` leading positions compared per order.
#[derive(Debug, Clone)]
pub struct Probe {
    pub fragment: OrdSet,
    pub prefix_depth: u64,
}

fn first_difference(sys: &dyn OrderingSystem, s: &OrdSet, ord: &dyn WellOrder, depth: u64) -> Option<NiceWitness> {
    let len = match ord.length() {
        Position::Finite(l) => l,
        _ => depth,
    };
    (0..len).find_map(|k| {
        let expected = sys.universe().reference_at(k);
        let found = ord.element_at(k);
        (expected != found).then(|| NiceWitness {
            s: s.clone(),
            position: k,
            expected,
            found,
        })
    })
}

/// Niceness relative to the universe's reference order: the base order is
/// the reference order, and every order begins with the first
/// `min(|dom|, ω)` reference elements, in reference order.
///
/// Exhaustive on finite universes; otherwise every `s ⊆ probe.fragment`
/// is checked on `probe.prefix_depth` leading positions.
pub fn check_nice(sys: &dyn OrderingSystem, probe: Option<&Probe>) -> Result<Check<NiceWitness>, SystemError> {
    let (elems, depth): (Vec<Ordinal>, u64) = match (sys.universe().finite(), probe) {
        (Some(e), _) => (e.to_vec(), u64::MAX),
        (None, Some(p)) => (p.fragment.iter().cloned().collect(), p.prefix_depth),
        (None, None) => return Err(SystemError::InfiniteUniverse),
    };
    let empty = OrdSet::new();
    let base = sys.order(&empty)?;
    if let Some(w) = first_difference(sys, &empty, base.as_ref(), depth) {
        return Ok(Check::Fail(w));
    }
    // the base must agree with the reference order on the probed elements too
    for (i, a) in elems.iter().enumerate() {
        for b in &elems[i + 1..] {
            if matches!(sys.universe(), Universe::Range(_)) && base.compare(a, b) != a.cmp(b) {
                return Ok(Check::Fail(NiceWitness {
                    s: empty,
                    position: 0,
                    expected: Some(a.clone()),
                    found: Some(b.clone()),
                }));
            }
        }
    }
    for k in 1..sys.depth().min(elems.len() + 1) {
        for s in subsets_of_size(&elems, k) {
            let ord = sys.order(&s)?;
            if let Some(w) = first_difference(sys, &s, ord.as_ref(), depth) {
                return Ok(Check::Fail(w));
            }
        }
    }
    Ok(Check::Pass)
}

/// `v̄ = (v_0, …, v_{n−1})`: `otp(≺_s) ≤ v_{|s|}` is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderTypeBound(pub Vec<Ordinal>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundCheck {
    Holds,
    Violated {
        s: OrdSet,
        reason: String,
    },
    /// No violation found, but these index sets could not be decided.
    Undecidable(Vec<OrdSet>),
}

pub fn check_order_bound(
    sys: &dyn OrderingSystem,
    v: &OrderTypeBound,
    fragment: &OrdSet,
) -> Result<BoundCheck, SystemError> {
    if v.0.len() != sys.depth() {
        return Err(SystemError::Precondition(format!(
            "bound has length {} but depth is {}",
            v.0.len(),
            sys.depth()
        )));
    }
    let elems: Vec<Ordinal> = fragment.iter().cloned().collect();
    let omega = Ordinal::omega();
    let mut undecided = Vec::new();
    for k in 0..sys.depth().min(elems.len() + 1) {
        let bound = &v.0[k];
        for s in subsets_of_size(&elems, k) {
            let ord = sys.order(&s)?;
            if let Some(t) = ord.order_type() {
                if &t > bound {
                    return Ok(BoundCheck::Violated {
                        reason: format!("order type {t} exceeds {bound}"),
                        s,
                    });
                }
                continue;
            }
            if ord.length() != Position::Infinite {
                undecided.push(s);
                continue;
            }
            if bound < &omega {
                return Ok(BoundCheck::Violated {
                    reason: format!("infinite order exceeds {bound}"),
                    s,
                });
            }
            if bound == &omega {
                let mut unknown = false;
                for x in elems.iter().filter(|x| ord.contains(x)) {
                    match ord.position_of(x) {
                        Position::Finite(_) => {}
                        Position::Infinite => {
                            return Ok(BoundCheck::Violated {
                                reason: format!("{x} sits at an infinite position"),
                                s,
                            })
                        }
                        Position::Unknown => unknown = true,
                    }
                }
                if unknown {
                    undecided.push(s);
                }
            } else {
                undecided.push(s);
            }
        }
    }
    Ok(if undecided.is_empty() {
        BoundCheck::Holds
    } else {
        BoundCheck::Undecidable(undecided)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfTest {
    /// `s ∩ ω = ∅`, equivalently `predom(≺_s)` is infinite.
    pub infinite: bool,
    /// `{x : x < min(s ∩ ω)}` when finite.
    pub predom: Option<Vec<Ordinal>>,
}

/// Finiteness test for `predom(≺_s)`, `|s| = n`, over a nice system.
/// Niceness is the caller's contract and is not re-checked.
pub fn inf_test(sys: &dyn OrderingSystem, s: &OrdSet) -> Result<InfTest, SystemError> {
    if s.len() != sys.depth() {
        return Err(SystemError::Precondition(format!(
            "inf_test needs |s| = n = {}",
            sys.depth()
        )));
    }
    Ok(match s.iter().filter_map(Ordinal::as_nat).min() {
        None => InfTest {
            infinite: true,
            predom: None,
        },
        Some(m) => InfTest {
            infinite: false,
            predom: Some((0..m).map(Ordinal::nat).collect()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::parse_cnf;
    use crate::sets::{nats, parse_set};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn o(s: &str) -> Ordinal {
        parse_cnf(s).unwrap()
    }

    fn set(s: &str) -> OrdSet {
        parse_set(s).unwrap()
    }

    fn seq(order: &OrderRef) -> Vec<Ordinal> {
        enumerate_finite(order.as_ref()).unwrap()
    }

    fn natural(n: usize) -> RuleSystem {
        RuleSystem::new(OrdinalBound::default(), n, Rule::Natural)
    }

    #[test]
    fn trivial_system_is_valid() {
        let sys = TableSystem::trivial(2, nats(0..4));
        assert!(validate_system(&sys, None).unwrap().is_valid());
        let sys = TableSystem::trivial(4, nats(0..7));
        assert!(validate_system(&sys, None).unwrap().is_valid());
    }

    #[test]
    fn bad_domain_is_reported() {
        let mut orders = BTreeMap::new();
        orders.insert(OrdSet::new(), nats(0..4).into_iter().collect());
        orders.insert(set("{1}"), vec![o("0")]);
        orders.insert(set("{2}"), vec![o("0"), o("1"), o("3")]);
        orders.insert(set("{3}"), vec![o("0"), o("1"), o("2")]);
        let sys = TableSystem::new(2, nats(0..4), orders).unwrap();
        let report = validate_system(&sys, None).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation::DomainMismatch {
                s: set("{2}"),
                element: o("3"),
                extra: true
            }]
        );
    }

    #[test]
    fn one_systems_need_only_a_base() {
        let sys = TableSystem::new(
            1,
            nats(0..3),
            BTreeMap::from([(OrdSet::new(), vec![o("2"), o("0"), o("1")])]),
        )
        .unwrap();
        assert!(validate_system(&sys, None).unwrap().is_valid());
        let dup = TableSystem::new(
            1,
            nats(0..3),
            BTreeMap::from([(OrdSet::new(), vec![o("2"), o("2"), o("1")])]),
        )
        .unwrap();
        let report = validate_system(&dup, None).unwrap();
        assert!(report.violations.contains(&Violation::NotWellOrder {
            s: OrdSet::new(),
            element: o("2")
        }));
    }

    #[test]
    fn random_systems_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            for size in [0, 1, 5, 9] {
                let sys = TableSystem::random(n, nats(0..size), &mut rng);
                assert!(validate_system(&sys, None).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn restriction_keeps_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = TableSystem::random(3, nats(0..6), &mut rng);
        let same = sys.restrict_levels(3).unwrap();
        assert_eq!(same.orders().len(), sys.orders().len());
        let base = TableSystem::trivial(3, nats(0..6)).restrict_levels(1).unwrap();
        assert_eq!(base.orders().len(), 1);
        for k in 1..=3 {
            assert!(validate_system(&sys.restrict_levels(k).unwrap(), None)
                .unwrap()
                .is_valid());
        }
        assert!(matches!(sys.restrict_levels(4), Err(SystemError::LevelRange { .. })));
        assert!(matches!(sys.restrict_levels(0), Err(SystemError::LevelRange { .. })));
    }

    #[test]
    fn domain_examples() {
        let sys = natural(2);
        let d = domain_of(&sys, &set("{w}")).unwrap();
        assert!(d.contains(&o("5")) && !d.contains(&o("w")));
        assert_eq!(d.order_type(), Some(o("w")));
        let whole = domain_of(&sys, &OrdSet::new()).unwrap();
        assert!(whole.contains(&o("w^2*4+w")));
        let sys3 = natural(3);
        assert_eq!(seq(&domain_of(&sys3, &set("{5,2}")).unwrap()), vec![o("0"), o("1")]);
        assert!(matches!(
            domain_of(&sys3, &set("{1,2,3}")),
            Err(SystemError::Inadmissible { .. })
        ));
        assert!(matches!(
            domain_of(&sys3, &set("{w^3}")),
            Err(SystemError::Inadmissible { .. })
        ));
    }

    #[test]
    fn pivot_examples() {
        let sys = natural(2);
        let p = pivot_set(&sys, &set("{w,w*2}"), 0).unwrap();
        assert!(p.set.is_empty());
        let p = pivot_set(&sys, &set("{w,w*2}"), 1).unwrap();
        assert_eq!(p.set, set("{w*2}"));
        assert_eq!(p.min, Some(o("w")));
        assert!(pivot_set(&sys, &set("{1,2,3}"), 2).is_err());
    }

    fn brute_force_pivots(sys: &dyn OrderingSystem, s: &OrdSet, k: usize) -> Vec<OrdSet> {
        let elems: Vec<Ordinal> = s.iter().cloned().collect();
        subsets_of_size(&elems, k)
            .filter(|t| {
                let ord = sys.order(t).unwrap();
                s.difference(t).all(|x| ord.contains(x))
            })
            .collect()
    }

    #[test]
    fn pivot_uniqueness_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=4);
            let sys = TableSystem::random(n, nats(0..8), &mut rng);
            let elems = sys.elements().to_vec();
            let size = rng.gen_range(0..=5);
            let s: OrdSet = elems.choose_multiple(&mut rng, size).cloned().collect();
            for k in 0..=(n - 1).min(s.len()) {
                let found = brute_force_pivots(&sys, &s, k);
                assert_eq!(found.len(), 1);
                assert_eq!(found[0], pivot_set(&sys, &s, k).unwrap().set);
            }
        }
    }

    #[test]
    fn domain_recursion_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=4 {
            let sys = TableSystem::random(n, nats(0..7), &mut rng);
            for (s, ord) in sys.orders().clone() {
                if s.len() + 1 >= n {
                    continue;
                }
                for (i, a) in ord.seq().iter().enumerate() {
                    let child: OrdSet = seq(&domain_of(&sys, &with(&s, a)).unwrap()).into_iter().collect();
                    let expected: OrdSet = ord.seq()[..i].iter().cloned().collect();
                    assert_eq!(child, expected);
                }
            }
        }
    }

    #[test]
    fn predom_examples() {
        let sys = natural(2);
        let pre = predom_of(&sys, &set("{3,w}")).unwrap();
        assert_eq!(seq(&pre), vec![o("0"), o("1"), o("2")]);
        let pre = predom_of(&sys, &set("{w,w*2}")).unwrap();
        assert_eq!(pre.length(), Position::Infinite);
        assert!(pre.contains(&o("7")) && !pre.contains(&o("w")));
        // below depth, predom is the domain
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = TableSystem::random(3, nats(0..7), &mut rng);
        for s in subsets_of_size(t.elements(), 2) {
            let pre: OrdSet = seq(&predom_of(&t, &s).unwrap()).into_iter().collect();
            let dom: OrdSet = seq(&domain_of(&t, &s).unwrap()).into_iter().collect();
            assert_eq!(pre, dom);
        }
    }

    #[test]
    fn two_predomains_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.gen_range(2..=4);
            let sys = TableSystem::random(n, nats(0..8), &mut rng);
            let x0 = sys.elements().choose(&mut rng).unwrap().clone();
            let derived = DerivedSystem::new(&sys, &x0).unwrap();
            let dom = derived.universe().finite().unwrap().to_vec();
            let size = rng.gen_range(1..=(n - 1).min(dom.len()).max(1));
            if dom.len() < size {
                continue;
            }
            let t: OrdSet = dom.choose_multiple(&mut rng, size).cloned().collect();
            let inner = seq(&predom_of(&derived, &t).unwrap());
            let outer = seq(&predom_of(&sys, &with(&t, &x0)).unwrap());
            assert_eq!(inner, outer);
            checked += 1;
        }
    }

    #[test]
    fn bottom_up_extension() {
        let base = TableSystem::trivial(1, nats(0..5));
        let mut top = BTreeMap::new();
        for b in 0..5u64 {
            top.insert(
                OrdSet::from([o(&b.to_string())]),
                (0..b).rev().map(Ordinal::nat).collect(),
            );
        }
        let ext = extend_bottom_up(&base, &top).unwrap();
        assert_eq!(ext.depth(), 2);
        assert!(validate_system(&ext, None).unwrap().is_valid());

        // natural top orders give back the trivial system
        let tri = TableSystem::trivial(2, nats(0..5));
        let mut top = BTreeMap::new();
        for s in subsets_of_size(tri.elements(), 2) {
            top.insert(s.clone(), seq(&predom_of(&tri, &s).unwrap()));
        }
        let ext = extend_bottom_up(&tri, &top).unwrap();
        let expected = TableSystem::trivial(3, nats(0..5));
        assert_eq!(
            ext.orders()
                .iter()
                .map(|(s, o)| (s.clone(), o.seq().to_vec()))
                .collect::<Vec<_>>(),
            expected
                .orders()
                .iter()
                .map(|(s, o)| (s.clone(), o.seq().to_vec()))
                .collect::<Vec<_>>()
        );

        // wrong domain
        let mut bad = top.clone();
        bad.insert(set("{2,4}"), vec![o("0"), o("1"), o("3")]);
        assert!(matches!(
            extend_bottom_up(&tri, &bad),
            Err(SystemError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn bottom_up_bound_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let base = TableSystem::random(2, nats(0..6), &mut rng);
            let mut top = BTreeMap::new();
            let mut longest = 0;
            for s in subsets_of_size(base.elements(), 2) {
                let mut v = seq(&predom_of(&base, &s).unwrap());
                v.shuffle(&mut rng);
                longest = longest.max(v.len() as u64);
                top.insert(s, v);
            }
            let ext = extend_bottom_up(&base, &top).unwrap();
            let frag: OrdSet = base.elements().iter().cloned().collect();
            let v = OrderTypeBound(vec![o("6"), o("5"), Ordinal::nat(longest)]);
            assert_eq!(check_order_bound(&ext, &v, &frag).unwrap(), BoundCheck::Holds);
        }
    }

    #[test]
    fn nice_examples() {
        assert!(check_nice(&TableSystem::trivial(3, nats(0..6)), None).unwrap().passed());
        let mut orders = BTreeMap::new();
        let u = vec![o("0"), o("1"), o("2"), o("w")];
        orders.insert(OrdSet::new(), u.clone());
        orders.insert(set("{w}"), vec![o("1"), o("0"), o("2")]);
        orders.insert(set("{2}"), vec![o("0"), o("1")]);
        orders.insert(set("{1}"), vec![o("0")]);
        let sys = TableSystem::new(2, u, orders).unwrap();
        assert!(validate_system(&sys, None).unwrap().is_valid());
        match check_nice(&sys, None).unwrap() {
            Check::Fail(w) => assert_eq!(w.s, set("{w}")),
            Check::Pass => panic!("expected a witness"),
        }
    }

    #[test]
    fn rule_systems_are_nice_and_valid() {
        let frag = set("{0,1,3,w,w+2,w*2,w*3+1,w^2,w^2+w*5+2,w^2*2+w}");
        for rule in [Rule::Natural, Rule::BlockShuffle(7), Rule::BlockShuffle(8)] {
            let sys = RuleSystem::new(OrdinalBound::default(), 3, rule);
            assert!(validate_system(&sys, Some(&frag)).unwrap().is_valid());
            let probe = Probe {
                fragment: frag.clone(),
                prefix_depth: 16,
            };
            assert_eq!(check_nice(&sys, Some(&probe)).unwrap(), Check::Pass, "{rule}");
            for k in 1..=3 {
                let r = sys.restrict_levels(k).unwrap();
                assert!(validate_system(&r, Some(&frag)).unwrap().is_valid());
                assert!(check_nice(&r, Some(&probe)).unwrap().passed());
            }
        }
    }

    #[test]
    fn block_shuffle_actually_shuffles() {
        let sys = RuleSystem::new(OrdinalBound::default(), 2, Rule::BlockShuffle(7));
        let elems: Vec<Ordinal> = (1..12).map(|b| Ordinal::monomial(1, b)).collect();
        let top = o("w^2");
        let ord = sys.order(&OrdSet::from([top])).unwrap();
        let mut sorted = elems.clone();
        sorted.sort_by(|a, b| ord.compare(a, b));
        assert_ne!(sorted, elems);
        // first block stays first
        assert_eq!(ord.compare(&o("5"), &sorted[0]), Ordering::Less);
    }

    #[test]
    fn nice_reduction_sampled() {
        let frag = set("{0,2,w,w+1,w*2,w*3,w^2,w^2+3}");
        let sys = RuleSystem::new(OrdinalBound::default(), 3, Rule::BlockShuffle(11));
        for x0 in &frag {
            let derived = DerivedSystem::new(&sys, x0).unwrap();
            let inner: OrdSet = frag
                .iter()
                .filter(|x| derived.universe().contains(x))
                .cloned()
                .collect();
            let probe = Probe {
                fragment: inner,
                prefix_depth: 12,
            };
            assert!(check_nice(&derived, Some(&probe)).unwrap().passed(), "x0={x0}");
        }
    }

    #[test]
    fn order_bound_examples() {
        let sys = TableSystem::trivial(2, nats(0..10));
        let frag: OrdSet = nats(0..10);
        let v = OrderTypeBound(vec![o("10"), o("10")]);
        assert_eq!(check_order_bound(&sys, &v, &frag).unwrap(), BoundCheck::Holds);

        let nat = RuleSystem::new(OrdinalBound::default(), 2, Rule::Natural);
        let frag = set("{0,5,w,w+1}");
        let v = OrderTypeBound(vec![o("w^3"), o("w")]);
        match check_order_bound(&nat, &v, &frag).unwrap() {
            BoundCheck::Violated { s, .. } => assert_eq!(s, set("{w+1}")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inf_test_examples() {
        let sys = natural(2);
        assert!(inf_test(&sys, &set("{w,w*2}")).unwrap().infinite);
        let t = inf_test(&sys, &set("{3,w}")).unwrap();
        assert!(!t.infinite);
        assert_eq!(t.predom, Some(vec![o("0"), o("1"), o("2")]));
        assert_eq!(inf_test(&sys, &set("{0,1}")).unwrap().predom, Some(vec![]));
        assert!(inf_test(&sys, &set("{1}")).is_err());
    }

    #[test]
    fn contains_omega_for_infinite_predom() {
        let sys = RuleSystem::new(OrdinalBound::default(), 3, Rule::BlockShuffle(5));
        for s in ["{w,w*2,w^2}", "{w+1,w^2+w,w^2*2}", "{w*4,w*5,w*6+2}"] {
            let s = set(s);
            assert!(inf_test(&sys, &s).unwrap().infinite);
            let pre = predom_of(&sys, &s).unwrap();
            for k in 0..20 {
                assert!(pre.contains(&Ordinal::nat(k)));
            }
        }
    }
}
