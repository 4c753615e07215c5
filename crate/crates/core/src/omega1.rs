//! A 2-ordering system on `[0, Λ)` in which every closed 2-initial segment
//! is closed, built by transfinite recursion on the stage `α`.
//!
//! `≺_∅` is the usual order. `≺_{0}` is empty, `≺_{α+1}` puts `α` first and
//! then follows `≺_α`. For a limit `δ` a chain `S_0 ⊆ S_1 ⊆ …` of finite
//! closed sets exhausts `δ` along the canonical enumeration, and `≺_δ` lists
//! each layer `S_{n+1} \ S_n` so that every prefix stays closed.
//!
//! Stage orders are computed lazily. A limit chain grows only as far as a
//! query needs it.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closure::{closure, initial_segment, is_closed, ClosureOutcome, SegmentOutcome, DEFAULT_BUDGET};
use crate::order::{elements_below, NaturalSegment, OrderRef, Position, WellOrder};
use crate::ordinal::{canonical_enum, Ordinal, OrdinalBound};
use crate::sets::{format_set, with, OrdSet};
use crate::system::{check_index, OrderingSystem, SystemError, Universe};
use crate::Check;

/// Largest supported bound.
pub fn max_lambda() -> Ordinal {
    Ordinal::monomial(3, 1)
}

#[derive(Debug, Default)]
struct Chain {
    /// `S_0, …, S_m`.
    sets: Vec<OrdSet>,
    /// `f^0, …, f^{m−1}`; `f^n` lists `S_{n+1} \ S_n`.
    layers: Vec<Vec<Ordinal>>,
    /// Concatenation of the layers: the order `≺_δ` so far.
    flat: Vec<Ordinal>,
    pos: HashMap<Ordinal, u64>,
    violations: Vec<String>,
}

struct Inner {
    bound: OrdinalBound,
    universe: Universe,
    overrides: BTreeMap<u64, Vec<Ordinal>>,
    chains: RefCell<HashMap<Ordinal, Rc<RefCell<Chain>>>>,
}

/// The constructed system. Cloning shares the caches.
#[derive(Clone)]
pub struct OmegaOne {
    inner: Rc<Inner>,
}

impl fmt::Debug for OmegaOne {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OmegaOne(lambda={})", self.inner.bound)
    }
}

pub fn build(bound: OrdinalBound) -> Result<OmegaOne, SystemError> {
    OmegaOne::with_overrides(bound, BTreeMap::new())
}

impl OmegaOne {
    /// Replaces the stage orders `≺_{α}` for the given finite `α` by explicit
    /// enumerations. Only for negative controls: the result is generally not
    /// the construction.
    pub fn with_overrides(bound: OrdinalBound, overrides: BTreeMap<u64, Vec<Ordinal>>) -> Result<Self, SystemError> {
        if bound.lambda() > &max_lambda() {
            return Err(SystemError::Precondition(format!(
                "bound {} exceeds the supported maximum {}",
                bound,
                max_lambda()
            )));
        }
        Ok(OmegaOne {
            inner: Rc::new(Inner {
                universe: Universe::Range(bound.clone()),
                bound,
                overrides,
                chains: RefCell::new(HashMap::new()),
            }),
        })
    }

    pub fn bound(&self) -> &OrdinalBound {
        &self.inner.bound
    }

    /// `≺_{α}`.
    pub fn order_at(&self, alpha: &Ordinal) -> Result<OrderRef, SystemError> {
        self.inner.bound.check(alpha.clone())?;
        Ok(stage_order(&self.inner, alpha))
    }

    /// `(S_0, …, S_upto)` and `(f^0, …, f^{upto−1})` for a limit `δ`.
    pub fn limit_chain(&self, delta: &Ordinal, upto: usize) -> Result<(Vec<OrdSet>, Vec<Vec<Ordinal>>), SystemError> {
        self.inner.bound.check(delta.clone())?;
        if !delta.is_limit() {
            return Err(SystemError::Precondition(format!("{delta} is not a limit")));
        }
        let chain = chain_for(&self.inner, delta);
        while chain.borrow().layers.len() < upto {
            extend_chain(&self.inner, delta, &chain);
        }
        let c = chain.borrow();
        Ok((c.sets[..=upto].to_vec(), c.layers[..upto].to_vec()))
    }

    /// Anomalies met while building limit chains so far (none for the
    /// genuine construction).
    pub fn chain_violations(&self) -> Vec<(Ordinal, String)> {
        let chains = self.inner.chains.borrow();
        let mut out: Vec<(Ordinal, String)> = chains
            .iter()
            .flat_map(|(d, c)| {
                c.borrow()
                    .violations
                    .iter()
                    .map(|v| (d.clone(), v.clone()))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort();
        out
    }

    /// `chain delta=<δ> n=<n> S={…} f=(…)` lines, `S = S_n` and `f = f^n`.
    pub fn chain_dump(&self, delta: &Ordinal, upto: usize) -> Result<Vec<String>, SystemError> {
        let (sets, layers) = self.limit_chain(delta, upto)?;
        Ok(layers
            .iter()
            .enumerate()
            .map(|(n, f)| {
                let f: Vec<String> = f.iter().map(|x| x.to_string()).collect();
                format!(
                    "chain delta={delta} n={n} S={} f=({})",
                    format_set(&sets[n]),
                    f.join(",")
                )
            })
            .collect())
    }
}

impl OrderingSystem for OmegaOne {
    fn depth(&self) -> usize {
        2
    }

    fn universe(&self) -> &Universe {
        &self.inner.universe
    }

    fn order(&self, s: &OrdSet) -> Result<OrderRef, SystemError> {
        check_index(self, s)?;
        Ok(match s.first() {
            None => Rc::new(NaturalSegment {
                below: self.inner.bound.lambda().clone(),
            }),
            Some(alpha) => stage_order(&self.inner, alpha),
        })
    }
}

fn stage_order(inner: &Rc<Inner>, alpha: &Ordinal) -> OrderRef {
    let (limit, k) = alpha.split_finite();
    let chain = (!limit.is_zero()).then(|| chain_for(inner, &limit));
    let table = alpha.as_nat().and_then(|a| inner.overrides.get(&a).cloned());
    Rc::new(StageOrder {
        inner: inner.clone(),
        alpha: alpha.clone(),
        limit,
        k,
        chain,
        table,
        below_override: alpha
            .as_nat()
            .and_then(|a| inner.overrides.range(..a).next_back().map(|(&b, _)| b)),
    })
}

/// `≺_{α}` for `α = λ + k`: `α−1, …, λ`, then `≺_λ`.
struct StageOrder {
    inner: Rc<Inner>,
    alpha: Ordinal,
    limit: Ordinal,
    k: u64,
    chain: Option<Rc<RefCell<Chain>>>,
    /// Explicit enumeration when this finite stage is overridden.
    table: Option<Vec<Ordinal>>,
    /// Largest overridden stage below a finite `α`.
    below_override: Option<u64>,
}

impl StageOrder {
    fn finite_seq(&self) -> Option<Vec<Ordinal>> {
        let a = self.alpha.as_nat()?;
        if let Some(seq) = &self.table {
            return Some(seq.clone());
        }
        let b = self.below_override?;
        let base = &self.inner.overrides[&b];
        let mut out: Vec<Ordinal> = (b..a).rev().map(Ordinal::nat).collect();
        out.extend(base.iter().cloned());
        Some(out)
    }
}

impl WellOrder for StageOrder {
    fn contains(&self, x: &Ordinal) -> bool {
        if let Some(seq) = self.finite_seq() {
            return seq.contains(x);
        }
        x < &self.alpha
    }

    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering {
        match (self.position_of(a), self.position_of(b)) {
            (Position::Finite(p), Position::Finite(q)) => p.cmp(&q),
            _ => a.cmp(b),
        }
    }

    fn element_at(&self, pos: u64) -> Option<Ordinal> {
        if let Some(seq) = self.finite_seq() {
            return seq.get(pos as usize).cloned();
        }
        if pos < self.k {
            return Some(self.limit.plus_nat(self.k - 1 - pos));
        }
        let chain = self.chain.as_ref()?;
        let idx = pos - self.k;
        loop {
            if let Some(x) = chain.borrow().flat.get(idx as usize) {
                return Some(x.clone());
            }
            extend_chain(&self.inner, &self.limit, chain);
        }
    }

    fn position_of(&self, x: &Ordinal) -> Position {
        if let Some(seq) = self.finite_seq() {
            return seq
                .iter()
                .position(|y| y == x)
                .map_or(Position::Unknown, |p| Position::Finite(p as u64));
        }
        if x >= &self.alpha {
            return Position::Unknown;
        }
        if x >= &self.limit {
            let (_, j) = x.split_finite();
            return Position::Finite(self.k - 1 - j);
        }
        let chain = self.chain.as_ref().expect("x below a nonzero limit");
        loop {
            if let Some(&p) = chain.borrow().pos.get(x) {
                return Position::Finite(self.k + p);
            }
            extend_chain(&self.inner, &self.limit, chain);
        }
    }

    fn length(&self) -> Position {
        match self.finite_seq() {
            Some(seq) => Position::Finite(seq.len() as u64),
            None => self.alpha.as_nat().map_or(Position::Infinite, Position::Finite),
        }
    }

    fn order_type(&self) -> Option<Ordinal> {
        Some(match self.length() {
            Position::Finite(l) => Ordinal::nat(l),
            _ => Ordinal::omega(),
        })
    }
}

fn chain_for(inner: &Inner, delta: &Ordinal) -> Rc<RefCell<Chain>> {
    inner
        .chains
        .borrow_mut()
        .entry(delta.clone())
        .or_insert_with(|| {
            Rc::new(RefCell::new(Chain {
                sets: vec![OrdSet::new()],
                ..Chain::default()
            }))
        })
        .clone()
}

/// Whether `cur ∪ {x}` is closed, given that `cur` is.
fn closed_with(inner: &Rc<Inner>, cur: &OrdSet, x: &Ordinal) -> bool {
    let next = with(cur, x);
    let own = stage_order(inner, x);
    for b in next.iter().filter(|b| own.contains(b)) {
        match elements_below(own.as_ref(), b) {
            Some(below) if below.iter().all(|a| next.contains(a)) => {}
            _ => return false,
        }
    }
    for alpha in cur {
        let ord = stage_order(inner, alpha);
        if ord.contains(x) {
            match elements_below(ord.as_ref(), x) {
                Some(below) if below.iter().all(|a| next.contains(a)) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Adds `S_{n+1}` and `f^n` to the chain of `δ`.
fn extend_chain(inner: &Rc<Inner>, delta: &Ordinal, chain: &Rc<RefCell<Chain>>) {
    let (n, prev) = {
        let c = chain.borrow();
        (c.layers.len(), c.sets.last().cloned().unwrap_or_default())
    };
    let target = canonical_enum(delta, n as u64).expect("limit below the bound");
    let sys = OmegaOne { inner: inner.clone() };
    let mut violations = Vec::new();
    let next = match closure(&sys, &with(&prev, &target), DEFAULT_BUDGET) {
        Ok(ClosureOutcome::Closed(c)) => c,
        Ok(other) => {
            violations.push(format!("closure at step {n} did not finish: {other:?}"));
            match other {
                ClosureOutcome::BudgetExceeded(p) | ClosureOutcome::ProvablyInfinite { partial: p, .. } => p,
                ClosureOutcome::Closed(c) => c,
            }
        }
        Err(e) => {
            violations.push(format!("closure at step {n} failed: {e}"));
            with(&prev, &target)
        }
    };
    let mut rest: OrdSet = next.difference(&prev).cloned().collect();
    let mut cur = prev;
    let mut layer = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let pick = rest.iter().find(|x| closed_with(inner, &cur, x)).cloned();
        let x = pick.unwrap_or_else(|| {
            violations.push(format!("no minimal element at step {n} over {}", format_set(&cur)));
            rest.first().cloned().unwrap()
        });
        rest.remove(&x);
        cur.insert(x.clone());
        layer.push(x);
    }
    let mut c = chain.borrow_mut();
    for x in &layer {
        let p = c.flat.len() as u64;
        c.pos.insert(x.clone(), p);
        c.flat.push(x.clone());
    }
    c.sets.push(next);
    c.layers.push(layer);
    c.violations.extend(violations);
}

/// `A ⊢ x` inside stage `stage`: `x` lies in the closure of `A`.
pub fn entails(sys: &OmegaOne, a: &OrdSet, x: &Ordinal, stage: &Ordinal) -> Result<bool, SystemError> {
    if let Some(y) = a.iter().chain([x]).find(|y| *y >= stage) {
        return Err(SystemError::Precondition(format!("{y} is not below the stage {stage}")));
    }
    match closure(sys, a, DEFAULT_BUDGET)? {
        ClosureOutcome::Closed(c) => Ok(c.contains(x)),
        other => Err(SystemError::Precondition(format!(
            "closure of {} did not finish: {other:?}",
            format_set(a)
        ))),
    }
}

/// Uniform-ish random ordinal below `bound`, with coefficients up to `max_coeff`.
pub fn random_below(rng: &mut impl Rng, bound: &Ordinal, max_coeff: u64) -> Ordinal {
    let top = bound.leading_exp().unwrap_or(0);
    for _ in 0..64 {
        let lead = rng.gen_range(0..=top);
        let terms: Vec<crate::ordinal::Term> = (0..=lead)
            .rev()
            .filter_map(|e| {
                let c = if e == lead {
                    rng.gen_range(1..=max_coeff)
                } else {
                    rng.gen_range(0..=max_coeff)
                };
                (c > 0).then_some(crate::ordinal::Term { exp: e, coeff: c })
            })
            .collect();
        let x = Ordinal::from_terms(&terms).expect("descending exponents");
        if &x < bound {
            return x;
        }
    }
    Ordinal::nat(rng.gen_range(0..=max_coeff))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub cases: usize,
    pub failure: Option<String>,
}

impl CheckLine {
    pub fn new(name: &str) -> Self {
        CheckLine {
            name: name.into(),
            cases: 0,
            failure: None,
        }
    }

    pub fn fail(&mut self, why: String) {
        if self.failure.is_none() {
            self.failure = Some(why);
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionReport {
    pub lines: Vec<CheckLine>,
}

impl ConstructionReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(CheckLine::passed)
    }

    pub fn line(&self, name: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.name == name)
    }
}

fn sample_pair(rng: &mut impl Rng, alpha_max: &Ordinal) -> (Ordinal, Ordinal) {
    loop {
        let a = random_below(rng, alpha_max, 6);
        let b = random_below(rng, alpha_max, 6);
        match a.cmp(&b) {
            Ordering::Less => return (b, a),
            Ordering::Greater => return (a, b),
            Ordering::Equal => {}
        }
    }
}

/// Certification run: the base order, stage coherence, order types, closed
/// 2-initial segments, the entailment dichotomy, finite closures, closed
/// prefixes of limit orders and the layer relation, on seeded samples below
/// `alpha_max`.
pub fn verify_construction(
    sys: &OmegaOne,
    alpha_max: &Ordinal,
    samples: usize,
    seed: u64,
) -> Result<ConstructionReport, SystemError> {
    sys.bound().check(alpha_max.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let empty = OrdSet::new();
    let base = sys.order(&empty)?;

    let mut l1 = CheckLine::new("(1) base order is natural");
    for _ in 0..samples {
        let (a, b) = sample_pair(&mut rng, alpha_max);
        l1.cases += 1;
        if base.compare(&b, &a) != Ordering::Less {
            l1.fail(format!("{b} !< {a}"));
        }
    }
    for k in 0..20 {
        if base.element_at(k) != Some(Ordinal::nat(k)) {
            l1.fail(format!("position {k}"));
        }
    }

    let mut l2 = CheckLine::new("(2) stages are coherent");
    let fresh = OmegaOne::with_overrides(sys.bound().clone(), sys.inner.overrides.clone())?;
    for _ in 0..samples {
        let beta = random_below(&mut rng, alpha_max, 6);
        l2.cases += 1;
        let here = sys.order_at(&beta)?;
        let next = sys.order_at(&beta.succ())?;
        if next.element_at(0).as_ref() != Some(&beta) {
            l2.fail(format!("{} does not start with {beta}", beta.succ()));
        }
        let again = fresh.order_at(&beta)?;
        for p in 0..8 {
            let x = here.element_at(p);
            if x != again.element_at(p) {
                l2.fail(format!("order of {beta} differs between builds at position {p}"));
            }
            if x != next.element_at(p + 1) {
                l2.fail(format!(
                    "order of {} is not {beta} followed by its order, position {p}",
                    beta.succ()
                ));
            }
        }
    }

    let mut l3 = CheckLine::new("(3) order types");
    for _ in 0..samples {
        let beta = random_below(&mut rng, alpha_max, 6);
        l3.cases += 1;
        let ord = sys.order_at(&beta)?;
        match beta.as_nat() {
            Some(b) => {
                let seq: Option<Vec<Ordinal>> = (0..b).map(|p| ord.element_at(p)).collect();
                let mut seq = seq.unwrap_or_default();
                seq.sort();
                if ord.length() != Position::Finite(b) || seq != (0..b).map(Ordinal::nat).collect::<Vec<_>>() {
                    l3.fail(format!("order of {beta} does not enumerate [0,{beta})"));
                }
            }
            None => {
                let x = random_below(&mut rng, &beta, 6);
                match ord.position_of(&x) {
                    Position::Finite(p) if ord.element_at(p).as_ref() == Some(&x) => {}
                    other => l3.fail(format!("{x} sits at {other:?} in the order of {beta}")),
                }
            }
        }
    }

    let mut l4 = CheckLine::new("(4) closed 2-initial segments are closed");
    for _ in 0..samples {
        let (beta, gamma) = sample_pair(&mut rng, alpha_max);
        l4.cases += 1;
        let s = OrdSet::from([beta.clone()]);
        match initial_segment(sys, &s, &gamma)? {
            SegmentOutcome::Finite(d) => {
                if let Check::Fail(w) = is_closed(sys, &d)? {
                    l4.fail(format!("beta={beta} gamma={gamma} segment={} {w}", format_set(&d)));
                }
            }
            SegmentOutcome::ProvablyInfinite => l4.fail(format!("beta={beta} gamma={gamma} infinite segment")),
        }
    }

    let mut lf = CheckLine::new("finite closures");
    let mut closed_samples = Vec::new();
    for _ in 0..samples.min(100) {
        let size = rng.gen_range(1..=5);
        let a: OrdSet = (0..size).map(|_| random_below(&mut rng, alpha_max, 6)).collect();
        lf.cases += 1;
        match closure(sys, &a, DEFAULT_BUDGET)? {
            ClosureOutcome::Closed(c) => closed_samples.push(c),
            other => lf.fail(format!("closure of {} gave {other:?}", format_set(&a))),
        }
    }

    let mut l5 = CheckLine::new("(5) entailment dichotomy");
    let mut attempts = 0;
    while l5.cases < samples && attempts < samples * 20 {
        attempts += 1;
        let s = closed_samples
            .get(attempts % closed_samples.len().max(1))
            .cloned()
            .unwrap_or_default();
        let (beta, gamma) = sample_pair(&mut rng, alpha_max);
        if s.contains(&beta) || s.contains(&gamma) {
            continue;
        }
        l5.cases += 1;
        let stage = alpha_max.clone();
        let one = entails(sys, &with(&s, &gamma), &beta, &stage)?;
        let two = entails(sys, &with(&s, &beta), &gamma, &stage)?;
        if one && two {
            l5.fail(format!("S={} beta={beta} gamma={gamma}", format_set(&s)));
        }
    }

    let mut lp = CheckLine::new("limit orders have closed prefixes");
    let limits: Vec<Ordinal> = (0..samples.min(20))
        .map(|_| random_below(&mut rng, alpha_max, 6).split_finite().0)
        .filter(|d| !d.is_zero())
        .collect();
    for delta in &limits {
        let ord = sys.order_at(delta)?;
        let mut prefix = OrdSet::new();
        for p in 0..24 {
            let x = ord.element_at(p).expect("limit orders are infinite");
            prefix.insert(x);
            lp.cases += 1;
            if let Check::Fail(w) = is_closed(sys, &prefix)? {
                lp.fail(format!("delta={delta} prefix length {} {w}", p + 1));
            }
        }
    }

    let mut lq = CheckLine::new("layer relation is a partial order");
    for delta in &limits {
        let (sets, layers) = sys.limit_chain(delta, 6)?;
        for (n, layer) in layers.iter().enumerate() {
            let le = |x: &Ordinal, y: &Ordinal| -> Result<bool, SystemError> {
                entails(sys, &with(&sets[n], y), x, alpha_max)
            };
            for x in layer {
                for y in layer {
                    lq.cases += 1;
                    if x != y && le(x, y)? && le(y, x)? {
                        lq.fail(format!("delta={delta} n={n} {x} and {y} entail each other"));
                    }
                    for z in layer {
                        if le(x, y)? && le(y, z)? && !le(x, z)? {
                            lq.fail(format!("delta={delta} n={n} {x},{y},{z} not transitive"));
                        }
                    }
                }
            }
        }
    }

    let mut lv = CheckLine::new("limit chains are well formed");
    for (delta, v) in sys.chain_violations() {
        lv.fail(format!("delta={delta}: {v}"));
    }
    lv.cases = sys.inner.chains.borrow().len();

    Ok(ConstructionReport {
        lines: vec![l1, l2, l3, l4, l5, lf, lp, lq, lv],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::enumerate_finite;
    use crate::ordinal::{canonical_index, parse_cnf};

    fn o(s: &str) -> Ordinal {
        parse_cnf(s).unwrap()
    }

    fn sys() -> OmegaOne {
        build(OrdinalBound::new(o("w^2")).unwrap()).unwrap()
    }

    fn prefix(ord: &OrderRef, k: u64) -> Vec<Ordinal> {
        (0..k).map(|p| ord.element_at(p).unwrap()).collect()
    }

    #[test]
    fn first_stages() {
        let s = sys();
        assert_eq!(s.order_at(&o("0")).unwrap().length(), Position::Finite(0));
        assert_eq!(
            enumerate_finite(s.order_at(&o("3")).unwrap().as_ref()).unwrap(),
            vec![o("2"), o("1"), o("0")]
        );
        assert_eq!(s.order_at(&o("w+1")).unwrap().element_at(0), Some(o("w")));
        assert!(s.order_at(&o("w^2")).is_err());
    }

    #[test]
    fn omega_is_natural() {
        let s = sys();
        let (sets, layers) = s.limit_chain(&o("w"), 3).unwrap();
        assert_eq!(sets[1], OrdSet::from([o("0")]));
        assert_eq!(layers[0], vec![o("0")]);
        let ord = s.order_at(&o("w")).unwrap();
        assert_eq!(prefix(&ord, 4), vec![o("0"), o("1"), o("2"), o("3")]);
    }

    #[test]
    fn successor_shifts_by_one() {
        let s = sys();
        for beta in ["5", "w", "w+3", "w*2", "w*3+1"] {
            let b = o(beta);
            let here = s.order_at(&b).unwrap();
            let next = s.order_at(&b.succ()).unwrap();
            assert_eq!(next.element_at(0), Some(b.clone()));
            for p in 0..10u64 {
                if let Some(x) = here.element_at(p) {
                    assert_eq!(next.position_of(&x), Position::Finite(p + 1));
                }
            }
        }
    }

    #[test]
    fn positions_are_finite() {
        let s = sys();
        let ord = s.order_at(&o("w*2")).unwrap();
        for x in ["0", "5", "w", "w+9"] {
            let x = o(x);
            let p = ord.position_of(&x).finite().unwrap();
            assert_eq!(ord.element_at(p), Some(x));
        }
    }

    #[test]
    fn chains_cover_the_enumeration() {
        let s = sys();
        for delta in ["w", "w*2", "w*3"] {
            let d = o(delta);
            let (sets, layers) = s.limit_chain(&d, 12).unwrap();
            for n in 0..12 {
                assert!(sets[n + 1].contains(&canonical_enum(&d, n as u64).unwrap()));
                assert!(is_closed(&s, &sets[n + 1]).unwrap().passed());
                let layer: OrdSet = layers[n].iter().cloned().collect();
                assert_eq!(layer, sets[n + 1].difference(&sets[n]).cloned().collect());
            }
            let x = canonical_enum(&d, 5).unwrap();
            assert!(canonical_index(&d, &x).unwrap() == 5);
        }
        assert!(s.chain_violations().is_empty());
    }

    #[test]
    fn entailment_examples() {
        let s = sys();
        let stage = o("w*3");
        for x in ["0", "4", "w+2"] {
            assert!(!entails(&s, &OrdSet::new(), &o(x), &stage).unwrap());
        }
        // γ ≺_{α+1} β forces γ
        let a1 = o("w+4");
        let ord = s.order_at(&a1).unwrap();
        let beta = o("2");
        let below = elements_below(ord.as_ref(), &beta).unwrap();
        let ctx = OrdSet::from([a1.clone(), beta.clone()]);
        for g in below {
            assert!(entails(&s, &ctx, &g, &stage).unwrap());
        }
        assert!(!entails(&s, &ctx, &o("w*2"), &stage).unwrap());
    }

    #[test]
    fn minimal_segment_is_a_pair() {
        let s = sys();
        let alpha = o("w+6");
        let seg = initial_segment(&s, &OrdSet::from([alpha.succ()]), &alpha).unwrap();
        assert_eq!(seg, SegmentOutcome::Finite(OrdSet::from([alpha.clone(), alpha.succ()])));
    }

    #[test]
    fn certification_small() {
        let s = sys();
        let report = verify_construction(&s, &o("w*3"), 40, 7).unwrap();
        for line in &report.lines {
            assert!(line.passed(), "{line:?}");
        }
    }

    #[test]
    fn corrupted_stage_is_caught() {
        let mut overrides = BTreeMap::new();
        overrides.insert(3, vec![o("0"), o("2"), o("1")]);
        let bad = OmegaOne::with_overrides(OrdinalBound::new(o("w^2")).unwrap(), overrides).unwrap();
        let d = initial_segment(&bad, &OrdSet::from([o("3")]), &o("2")).unwrap();
        let SegmentOutcome::Finite(d) = d else { panic!() };
        assert_eq!(d, OrdSet::from([o("0"), o("2"), o("3")]));
        assert!(!is_closed(&bad, &d).unwrap().passed());
        let report = verify_construction(&bad, &o("8"), 200, 1).unwrap();
        assert!(!report
            .line("(4) closed 2-initial segments are closed")
            .unwrap()
            .passed());
    }

    #[test]
    fn deterministic_dump() {
        let a = sys().chain_dump(&o("w*2"), 5).unwrap();
        let b = sys().chain_dump(&o("w*2"), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], "chain delta=w*2 n=0 S={} f=(0)");
    }
}
