//! Well-orders exposed as query oracles.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use crate::ordinal::Ordinal;

/// Where an element sits in a well-order, or how long the order is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Finite(u64),
    /// Definitively at an infinite position (or, for lengths, infinite).
    Infinite,
    /// Not decidable by this oracle.
    Unknown,
}

impl Position {
    pub fn finite(self) -> Option<u64> {
        match self {
            Position::Finite(p) => Some(p),
            _ => None,
        }
    }
}

/// A strict well-order `≺` on its domain.
///
/// `compare` is only meaningful for two members of the domain. The
/// enumeration `element_at` covers the first `min(length, ω)` elements.
pub trait WellOrder {
    fn contains(&self, x: &Ordinal) -> bool;
    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering;
    fn element_at(&self, pos: u64) -> Option<Ordinal>;
    fn position_of(&self, x: &Ordinal) -> Position;
    fn length(&self) -> Position;

    /// Exact order type, when the oracle knows it.
    fn order_type(&self) -> Option<Ordinal> {
        self.length().finite().map(Ordinal::nat)
    }

    /// `a ⪯ b`, the non-strict variant.
    fn le(&self, a: &Ordinal, b: &Ordinal) -> bool {
        self.compare(a, b) != Ordering::Greater
    }
}

pub type OrderRef = Rc<dyn WellOrder>;

/// The full enumeration of a finite order; `None` if it is infinite or
/// its length is unknown.
pub fn enumerate_finite(order: &dyn WellOrder) -> Option<Vec<Ordinal>> {
    let len = order.length().finite()?;
    (0..len).map(|i| order.element_at(i)).collect()
}

/// Elements strictly below `b`, when that segment is finite.
pub fn elements_below(order: &dyn WellOrder, b: &Ordinal) -> Option<Vec<Ordinal>> {
    let p = order.position_of(b).finite()?;
    (0..p).map(|i| order.element_at(i)).collect()
}

/// A finite order stored as its enumeration.
#[derive(Debug, Clone, Default)]
pub struct TableOrder {
    seq: Vec<Ordinal>,
    index: HashMap<Ordinal, u64>,
    duplicate: Option<Ordinal>,
}

impl TableOrder {
    pub fn new(seq: Vec<Ordinal>) -> Self {
        let mut index = HashMap::with_capacity(seq.len());
        let mut duplicate = None;
        for (i, x) in seq.iter().enumerate() {
            if index.insert(x.clone(), i as u64).is_some() && duplicate.is_none() {
                duplicate = Some(x.clone());
            }
        }
        TableOrder { seq, index, duplicate }
    }

    pub fn seq(&self) -> &[Ordinal] {
        &self.seq
    }

    /// First element listed twice; such a table is not a well-order.
    pub fn duplicate(&self) -> Option<&Ordinal> {
        self.duplicate.as_ref()
    }
}

impl WellOrder for TableOrder {
    fn contains(&self, x: &Ordinal) -> bool {
        self.index.contains_key(x)
    }

    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering {
        self.index[a].cmp(&self.index[b])
    }

    fn element_at(&self, pos: u64) -> Option<Ordinal> {
        self.seq.get(pos as usize).cloned()
    }

    fn position_of(&self, x: &Ordinal) -> Position {
        self.index.get(x).map_or(Position::Unknown, |&p| Position::Finite(p))
    }

    fn length(&self) -> Position {
        Position::Finite(self.seq.len() as u64)
    }
}

/// The usual ordinal order on `[0, below)`.
#[derive(Debug, Clone)]
pub struct NaturalSegment {
    pub below: Ordinal,
}

impl WellOrder for NaturalSegment {
    fn contains(&self, x: &Ordinal) -> bool {
        x < &self.below
    }

    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering {
        a.cmp(b)
    }

    fn element_at(&self, pos: u64) -> Option<Ordinal> {
        let x = Ordinal::nat(pos);
        self.contains(&x).then_some(x)
    }

    fn position_of(&self, x: &Ordinal) -> Position {
        match x.as_nat() {
            Some(k) => Position::Finite(k),
            None => Position::Infinite,
        }
    }

    fn length(&self) -> Position {
        match self.below.as_nat() {
            Some(k) => Position::Finite(k),
            None => Position::Infinite,
        }
    }

    fn order_type(&self) -> Option<Ordinal> {
        Some(self.below.clone())
    }
}

/// The initial segment of `order` strictly below `bound`.
pub struct Segment {
    pub order: OrderRef,
    pub bound: Ordinal,
}

impl WellOrder for Segment {
    fn contains(&self, x: &Ordinal) -> bool {
        self.order.contains(x) && self.order.compare(x, &self.bound) == Ordering::Less
    }

    fn compare(&self, a: &Ordinal, b: &Ordinal) -> Ordering {
        self.order.compare(a, b)
    }

    fn element_at(&self, pos: u64) -> Option<Ordinal> {
        match self.order.position_of(&self.bound) {
            Position::Finite(p) if pos >= p => None,
            Position::Unknown => None,
            _ => self.order.element_at(pos),
        }
    }

    fn position_of(&self, x: &Ordinal) -> Position {
        self.order.position_of(x)
    }

    fn length(&self) -> Position {
        self.order.position_of(&self.bound)
    }
}
