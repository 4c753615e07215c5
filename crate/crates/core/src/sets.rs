use std::collections::BTreeSet;

use crate::ordinal::{parse_cnf, Ordinal, OrdinalError};

/// Finite set of ordinals in ascending order.
pub type OrdSet = BTreeSet<Ordinal>;

pub fn format_set<'a>(items: impl IntoIterator<Item = &'a Ordinal>) -> String {
    let parts: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Parses `{a,b,...}`; `{}` is the empty set.
pub fn parse_set(text: &str) -> Result<OrdSet, OrdinalError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| OrdinalError::Parse {
            column: 1,
            message: "expected a set in braces".into(),
        })?;
    if inner.trim().is_empty() {
        return Ok(OrdSet::new());
    }
    inner.split(',').map(parse_cnf).collect()
}

pub fn with(s: &OrdSet, x: &Ordinal) -> OrdSet {
    let mut out = s.clone();
    out.insert(x.clone());
    out
}

pub fn without(s: &OrdSet, x: &Ordinal) -> OrdSet {
    let mut out = s.clone();
    out.remove(x);
    out
}

pub fn nats(range: std::ops::Range<u64>) -> OrdSet {
    range.map(Ordinal::nat).collect()
}

/// All `k`-element index combinations of `0..n` in lexicographic order.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All `k`-subsets of `items` (taken in the given order).
pub fn subsets_of_size<'a>(items: &'a [Ordinal], k: usize) -> impl Iterator<Item = OrdSet> + 'a {
    Combinations::new(items.len(), k).map(move |c| c.into_iter().map(|i| items[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(5, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
        assert_eq!(Combinations::new(0, 0).count(), 1);
        let all: Vec<_> = Combinations::new(4, 3).collect();
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[3], vec![1, 2, 3]);
    }

    #[test]
    fn set_text_round_trip() {
        let s = parse_set("{w, 3,0}").unwrap();
        assert_eq!(format_set(&s), "{0,3,w}");
        assert_eq!(parse_set(&format_set(&s)).unwrap(), s);
        assert!(parse_set("{}").unwrap().is_empty());
        assert!(parse_set("1,2").is_err());
    }
}
