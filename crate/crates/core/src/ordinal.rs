//! Ordinals below ω^ω in Cantor normal form.
//!
//! An [`Ordinal`] is a finite list of `(exponent, coefficient)` terms with
//! strictly decreasing natural exponents and positive coefficients. Because
//! the terms are stored most-significant first, the derived lexicographic
//! order on the term list is exactly the ordinal order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("{value} is not below the bound {bound}")]
    OutOfBound { value: Box<Ordinal>, bound: Box<Ordinal> },
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("invalid bound {0}: must be a limit ordinal at least w^2")]
    InvalidBound(Ordinal),
    #[error("arithmetic overflow")]
    Overflow,
}

/// One CNF term `ω^exp · coeff`.
///
/// Field order matters: the derived `Ord` compares exponents first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub exp: u32,
    pub coeff: u64,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    terms: SmallVec<[Term; 3]>,
}

/// Zero / successor / limit trichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal::default()
    }

    pub fn nat(n: u64) -> Self {
        Self::monomial(0, n)
    }

    pub fn omega() -> Self {
        Self::monomial(1, 1)
    }

    /// `ω^exp · coeff`; zero when `coeff == 0`.
    pub fn monomial(exp: u32, coeff: u64) -> Self {
        let mut terms = SmallVec::new();
        if coeff > 0 {
            terms.push(Term { exp, coeff });
        }
        Ordinal { terms }
    }

    /// Builds an ordinal from terms, validating the CNF invariants.
    pub fn from_terms(terms: &[Term]) -> Option<Self> {
        let ok = terms.iter().all(|t| t.coeff > 0) && terms.windows(2).all(|w| w[0].exp > w[1].exp);
        ok.then(|| Ordinal {
            terms: terms.iter().copied().collect(),
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exp == 0)
    }

    /// The natural number this ordinal denotes, if it is finite.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [Term { exp: 0, coeff }] => Some(*coeff),
            _ => None,
        }
    }

    /// Coefficient of `ω^exp` (zero if the term is absent).
    pub fn coeff(&self, exp: u32) -> u64 {
        self.terms.iter().find(|t| t.exp == exp).map_or(0, |t| t.coeff)
    }

    pub fn leading_exp(&self) -> Option<u32> {
        self.terms.first().map(|t| t.exp)
    }

    pub fn classify(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some(t) if t.exp == 0 => {
                let mut pred = self.clone();
                let last = pred.terms.last_mut().unwrap();
                last.coeff -= 1;
                if last.coeff == 0 {
                    pred.terms.pop();
                }
                Kind::Successor(pred)
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.classify(), Kind::Limit)
    }

    /// Ordinal sum `self + rhs`; `None` on coefficient overflow.
    pub fn checked_add(&self, rhs: &Ordinal) -> Option<Ordinal> {
        let Some(head) = rhs.terms.first() else {
            return Some(self.clone());
        };
        let mut terms: SmallVec<[Term; 3]> = self.terms.iter().take_while(|t| t.exp >= head.exp).copied().collect();
        let mut rest = rhs.terms.iter();
        if let Some(last) = terms.last_mut() {
            if last.exp == head.exp {
                last.coeff = last.coeff.checked_add(head.coeff)?;
                rest.next();
            }
        }
        terms.extend(rest.copied());
        Some(Ordinal { terms })
    }

    pub fn succ(&self) -> Ordinal {
        self.checked_add(&Ordinal::nat(1)).expect("successor overflow")
    }

    /// `self + k` for a natural `k`.
    pub fn plus_nat(&self, k: u64) -> Ordinal {
        self.checked_add(&Ordinal::nat(k)).expect("ordinal overflow")
    }

    /// Splits `self` as `limit_part + k` with `k` finite.
    pub fn split_finite(&self) -> (Ordinal, u64) {
        match self.terms.last() {
            Some(t) if t.exp == 0 => {
                let mut base = self.clone();
                base.terms.pop();
                (base, t.coeff)
            }
            _ => (self.clone(), 0),
        }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match (t.exp, t.coeff) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::nat(n)
    }
}

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> OrdinalError {
        OrdinalError::Parse {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a natural number"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| OrdinalError::Parse {
                column: start + 1,
                message: "number too large".into(),
            })
    }

    fn term(&mut self) -> Result<Ordinal, OrdinalError> {
        if self.eat(b'w') {
            let exp = if self.eat(b'^') {
                u32::try_from(self.nat()?).map_err(|_| self.err("exponent too large"))?
            } else {
                1
            };
            let coeff = if self.eat(b'*') { self.nat()? } else { 1 };
            Ok(Ordinal::monomial(exp, coeff))
        } else {
            Ok(Ordinal::nat(self.nat()?))
        }
    }
}

/// Parses CNF text such as `w^2*3+w+4`.
///
/// Terms are summed with ordinal addition, so non-normal input like `3+w`
/// denotes `w`.
pub fn parse_cnf(text: &str) -> Result<Ordinal, OrdinalError> {
    let mut cur = Cursor {
        text: text.as_bytes(),
        pos: 0,
    };
    let mut value = cur.term()?;
    while cur.eat(b'+') {
        let t = cur.term()?;
        value = value.checked_add(&t).ok_or(OrdinalError::Overflow)?;
    }
    cur.skip_ws();
    if cur.pos != cur.text.len() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(value)
}

pub fn format_cnf(a: &Ordinal) -> String {
    a.to_string()
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cnf(s)
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

/// Exclusive upper bound Λ for every ordinal a universe may contain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinalBound {
    lambda: Ordinal,
}

impl OrdinalBound {
    pub fn new(lambda: Ordinal) -> Result<Self, OrdinalError> {
        if !lambda.is_limit() || lambda < Ordinal::monomial(2, 1) {
            return Err(OrdinalError::InvalidBound(lambda));
        }
        Ok(OrdinalBound { lambda })
    }

    pub fn lambda(&self) -> &Ordinal {
        &self.lambda
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        x < &self.lambda
    }

    pub fn check(&self, x: Ordinal) -> Result<Ordinal, OrdinalError> {
        if self.contains(&x) {
            Ok(x)
        } else {
            Err(OrdinalError::OutOfBound {
                value: Box::new(x),
                bound: Box::new(self.lambda.clone()),
            })
        }
    }

    /// Parses CNF text and rejects values `≥ Λ`.
    pub fn parse(&self, text: &str) -> Result<Ordinal, OrdinalError> {
        self.check(parse_cnf(text)?)
    }
}

impl Default for OrdinalBound {
    fn default() -> Self {
        OrdinalBound {
            lambda: Ordinal::monomial(3, 1),
        }
    }
}

impl fmt::Display for OrdinalBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.lambda.fmt(f)
    }
}

fn cantor_pair(a: u64, b: u64) -> Option<u64> {
    let s = a.checked_add(b)?;
    let tri = (s as u128) * (s as u128 + 1) / 2;
    u64::try_from(tri + b as u128).ok()
}

fn cantor_unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let mut w = (((8 * z + 1) as f64).sqrt() as u128).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let b = z - w * (w + 1) / 2;
    ((w - b) as u64, b as u64)
}

/// Digits `(a_{e-1}, …, a_0)` of the `t`-th element of a block of type ω^e.
fn unpair_digits(mut t: u64, e: u32) -> Vec<u64> {
    let mut digits = Vec::with_capacity(e as usize);
    for _ in 1..e {
        let (head, rest) = cantor_unpair(t);
        digits.push(head);
        t = rest;
    }
    digits.push(t);
    digits
}

fn pair_digits(digits: &[u64]) -> Option<u64> {
    let (&last, init) = digits.split_last()?;
    init.iter().rev().try_fold(last, |acc, &head| cantor_pair(head, acc))
}

struct Block {
    start: Ordinal,
    exp: u32,
}

/// Number of blocks `[0,δ)` splits into, and a lookup for block `k`.
fn block_count(delta: &Ordinal) -> Result<u64, OrdinalError> {
    delta
        .terms()
        .iter()
        .try_fold(0u64, |acc, t| acc.checked_add(t.coeff))
        .ok_or(OrdinalError::Overflow)
}

fn block(delta: &Ordinal, mut k: u64) -> Block {
    let mut prefix: SmallVec<[Term; 3]> = SmallVec::new();
    for t in delta.terms() {
        if k < t.coeff {
            if k > 0 {
                prefix.push(Term { exp: t.exp, coeff: k });
            }
            return Block {
                start: Ordinal { terms: prefix },
                exp: t.exp,
            };
        }
        k -= t.coeff;
        prefix.push(*t);
    }
    unreachable!("block index out of range")
}

fn require_limit(delta: &Ordinal) -> Result<(), OrdinalError> {
    if delta.is_limit() {
        Ok(())
    } else {
        Err(OrdinalError::NotLimit(delta.clone()))
    }
}

/// A fixed bijection `ω → [0, δ)` for a limit `δ`.
///
/// `[0,δ)` is cut into the blocks `P + ω^e·m + [0, ω^e)` read off the CNF of
/// `δ`; block `k` of `K` receives the indices `i ≡ k (mod K)`, and inside a
/// block of type ω^e the index `i / K` is decoded into `e` digits by iterated
/// Cantor unpairing.
pub fn canonical_enum(delta: &Ordinal, i: u64) -> Result<Ordinal, OrdinalError> {
    require_limit(delta)?;
    let k = block_count(delta)?;
    let blk = block(delta, i % k);
    let digits = unpair_digits(i / k, blk.exp);
    let mut terms: SmallVec<[Term; 3]> = blk.start.terms.clone();
    for (j, &d) in digits.iter().enumerate() {
        if d > 0 {
            terms.push(Term {
                exp: blk.exp - 1 - j as u32,
                coeff: d,
            });
        }
    }
    Ok(Ordinal { terms })
}

/// Inverse of [`canonical_enum`].
pub fn canonical_index(delta: &Ordinal, x: &Ordinal) -> Result<u64, OrdinalError> {
    require_limit(delta)?;
    if x >= delta {
        return Err(OrdinalError::OutOfBound {
            value: Box::new(x.clone()),
            bound: Box::new(delta.clone()),
        });
    }
    let count = block_count(delta)?;
    let mut k = 0u64;
    for t in delta.terms() {
        let m = x.coeff(t.exp);
        if m < t.coeff {
            let digits: Vec<u64> = (0..t.exp).rev().map(|e| x.coeff(e)).collect();
            let inner = pair_digits(&digits).ok_or(OrdinalError::Overflow)?;
            return inner
                .checked_mul(count)
                .and_then(|v| v.checked_add(k + m))
                .ok_or(OrdinalError::Overflow);
        }
        k += t.coeff;
    }
    unreachable!("x < delta always lands in a block")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        parse_cnf(s).unwrap()
    }

    /// Independent comparison oracle for ordinals below ω^3: evaluate to a
    /// coefficient triple and compare those.
    fn triple(a: &Ordinal) -> (u64, u64, u64) {
        (a.coeff(2), a.coeff(1), a.coeff(0))
    }

    #[test]
    fn parse_examples() {
        assert_eq!(o("0"), Ordinal::zero());
        assert_eq!(o("w*2+3"), Ordinal::monomial(1, 2).plus_nat(3));
        let a = o("w^2*1+w*1+4");
        assert_eq!(a.to_string(), "w^2+w+4");
        assert_eq!(o(&a.to_string()), a);
        assert_eq!(o("3+w"), Ordinal::omega());
        assert_eq!(o(" w ^ 2 * 2 + 7 "), o("w^2*2+7"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_cnf(""), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_cnf("w+"), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_cnf("w^x"), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_cnf("1 2"), Err(OrdinalError::Parse { column: 3, .. })));
        let bound = OrdinalBound::default();
        assert!(matches!(bound.parse("w^3"), Err(OrdinalError::OutOfBound { .. })));
        assert!(bound.parse("w^2*9+1").is_ok());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("w*2+3"), &o("w*2+3")), Ordering::Equal);
        assert_eq!(compare(&o("5"), &o("w")), Ordering::Less);
        let (a, b) = (o("w^2"), o("w*7+100"));
        assert_eq!(compare(&a, &b), Ordering::Greater);
        assert_eq!(triple(&a).cmp(&triple(&b)), Ordering::Greater);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(o("0").classify(), Kind::Zero);
        assert_eq!(o("w+4").classify(), Kind::Successor(o("w+3")));
        assert_eq!(o("w+1").classify(), Kind::Successor(o("w")));
        assert_eq!(o("w*3").classify(), Kind::Limit);
    }

    #[test]
    fn bound_must_be_limit_above_omega_squared() {
        assert!(OrdinalBound::new(o("w")).is_err());
        assert!(OrdinalBound::new(o("w^2+1")).is_err());
        assert!(OrdinalBound::new(o("w^2")).is_ok());
        assert!(OrdinalBound::new(o("w^2*2+w")).is_ok());
    }

    #[test]
    fn pairing_round_trips() {
        for z in 0..2000 {
            let (a, b) = cantor_unpair(z);
            assert_eq!(cantor_pair(a, b), Some(z));
        }
    }

    #[test]
    fn enum_on_omega_is_identity() {
        for i in 0..100 {
            assert_eq!(canonical_enum(&o("w"), i).unwrap(), Ordinal::nat(i));
        }
    }

    #[test]
    fn enum_on_omega_two_prefix() {
        let d = o("w*2");
        let prefix: Vec<Ordinal> = (0..40).map(|i| canonical_enum(&d, i).unwrap()).collect();
        let mut sorted = prefix.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 40);
        assert!(prefix.iter().any(|x| x.is_finite()));
        assert!(prefix.iter().any(|x| !x.is_finite() && x < &d));
        for x in ["0", "7", "w", "w+5"] {
            let x = o(x);
            assert_eq!(canonical_enum(&d, canonical_index(&d, &x).unwrap()).unwrap(), x);
        }
        // round robin over two blocks: block 1 starts at index 1
        assert_eq!(canonical_index(&d, &o("w")).unwrap(), 1);
        assert!(canonical_index(&d, &d).is_err());
    }

    #[test]
    fn enum_requires_limit() {
        assert!(matches!(canonical_enum(&o("w+1"), 0), Err(OrdinalError::NotLimit(_))));
        assert!(canonical_enum(&o("0"), 0).is_err());
    }

    #[test]
    fn enum_brute_force_on_small_deltas() {
        // every element of a finite window of [0,δ) is hit by a bounded prefix
        for d in ["w", "w*3", "w^2", "w^2+w*2", "w^2*2"] {
            let d = o(d);
            let mut seen = std::collections::BTreeSet::new();
            for i in 0..3000 {
                let x = canonical_enum(&d, i).unwrap();
                assert!(x < d);
                assert_eq!(canonical_index(&d, &x).unwrap(), i);
                assert!(seen.insert(x));
            }
        }
    }
}
