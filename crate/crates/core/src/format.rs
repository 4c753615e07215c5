//! Line-oriented text formats for systems, set families and conditions.
//!
//! Writers emit canonical text: sorted, deduplicated, one record per line,
//! so parsing and writing again reproduces the same bytes.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::generic::{validate_condition, Condition};
use crate::ordinal::{parse_cnf, Ordinal, OrdinalBound, OrdinalError};
use crate::sets::{format_set, parse_set, OrdSet};
use crate::system::{validate_system, OrderingSystem, Rule, RuleSystem, TableSystem, Violation};
use crate::vc::SetFamily;
use crate::Check;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// A whitespace-separated token with its 1-based column.
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push(Token {
                    text: &line[st..i],
                    column: line[..st].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push(Token {
            text: &line[st..],
            column: line[..st].chars().count() + 1,
        });
    }
    out
}

/// Non-blank lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn lift(line: usize, column: usize, e: OrdinalError) -> ParseError {
    match e {
        OrdinalError::Parse { column: c, message } => perr(line, column + c.saturating_sub(1), message),
        other => perr(line, column, other.to_string()),
    }
}

/// `key=value` fields of a header line, after a fixed magic prefix.
struct Header<'a> {
    line: usize,
    fields: Vec<(&'a str, &'a str, usize)>,
}

impl<'a> Header<'a> {
    fn parse(line: usize, text: &'a str, magic: &[&str]) -> Result<Self, ParseError> {
        let toks = tokens(text);
        for (i, m) in magic.iter().enumerate() {
            match toks.get(i) {
                Some(t) if t.text == *m => {}
                Some(t) => return Err(perr(line, t.column, format!("expected `{m}`"))),
                None => return Err(perr(line, text.len() + 1, format!("expected `{m}`"))),
            }
        }
        let mut fields = Vec::new();
        for t in &toks[magic.len()..] {
            let (k, v) = t
                .text
                .split_once('=')
                .ok_or_else(|| perr(line, t.column, "expected key=value"))?;
            if fields.iter().any(|(k2, _, _)| *k2 == k) {
                return Err(perr(line, t.column, format!("duplicate field `{k}`")));
            }
            fields.push((k, v, t.column + k.len() + 1));
        }
        Ok(Header { line, fields })
    }

    fn get(&self, key: &str) -> Option<(&'a str, usize)> {
        self.fields.iter().find(|(k, _, _)| *k == key).map(|(_, v, c)| (*v, *c))
    }

    fn require(&self, key: &str) -> Result<(&'a str, usize), ParseError> {
        self.get(key)
            .ok_or_else(|| perr(self.line, 1, format!("missing field `{key}`")))
    }

    fn only(&self, allowed: &[&str]) -> Result<(), ParseError> {
        match self.fields.iter().find(|(k, _, _)| !allowed.contains(k)) {
            Some((k, _, c)) => Err(perr(self.line, c - k.len() - 1, format!("unknown field `{k}`"))),
            None => Ok(()),
        }
    }

    fn depth(&self) -> Result<usize, ParseError> {
        let (v, c) = self.require("n")?;
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(perr(self.line, c, "n must be a positive integer")),
        }
    }
}

fn header_line<'a>(text: &'a str, kind: &str) -> Result<(usize, &'a str), ParseError> {
    content_lines(text)
        .next()
        .ok_or_else(|| perr(1, 1, format!("empty input, expected a {kind} header")))
}

/// A parsed system file.
#[derive(Debug, Clone)]
pub enum SystemFile {
    Explicit {
        table: TableSystem,
        /// Line of each `order` record.
        lines: BTreeMap<OrdSet, usize>,
    },
    Rule(RuleSystem),
}

impl SystemFile {
    pub fn system(&self) -> &dyn OrderingSystem {
        match self {
            SystemFile::Explicit { table, .. } => table,
            SystemFile::Rule(r) => r,
        }
    }

    /// Line of the record a violation refers to, or the header line.
    pub fn line_of(&self, v: &Violation) -> usize {
        let s = match v {
            Violation::NotWellOrder { s, .. } | Violation::DomainMismatch { s, .. } | Violation::Undecidable { s } => s,
        };
        match self {
            SystemFile::Explicit { lines, .. } => lines.get(s).copied().unwrap_or(1),
            SystemFile::Rule(_) => 1,
        }
    }

    /// Rejects explicit systems that violate the ordering-system axioms,
    /// pointing at the offending record.
    pub fn check_valid(&self) -> Result<(), ParseError> {
        if let SystemFile::Explicit { table, .. } = self {
            let report = validate_system(table, None).map_err(|e| perr(1, 1, e.to_string()))?;
            let listed = report.violations.iter().find(|v| self.line_of(v) != 1);
            if let Some(v) = listed.or(report.violations.first()) {
                return Err(perr(self.line_of(v), 1, v.to_string()));
            }
        }
        Ok(())
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let (hl, htext) = header_line(text, "system")?;
    let header = Header::parse(hl, htext, &["ordsys", "v1"])?;
    let n = header.depth()?;
    let (flavor, fc) = header.require("flavor")?;
    let (universe, uc) = header.require("universe")?;
    match flavor {
        "rule" => {
            header.only(&["n", "universe", "flavor", "rule"])?;
            let (rule, rc) = header.require("rule")?;
            let rule: Rule = rule.parse().map_err(|e: String| perr(hl, rc, e))?;
            let lambda = universe
                .strip_prefix("range:")
                .ok_or_else(|| perr(hl, uc, "rule systems need a range universe"))?;
            let bound = parse_cnf(lambda)
                .and_then(OrdinalBound::new)
                .map_err(|e| lift(hl, uc + 6, e))?;
            if let Some((ln, _)) = content_lines(text).nth(1) {
                return Err(perr(ln, 1, "rule systems have no order records"));
            }
            Ok(SystemFile::Rule(RuleSystem::new(bound, n, rule)))
        }
        "explicit" => {
            header.only(&["n", "universe", "flavor"])?;
            let elems = universe
                .strip_prefix("finite:")
                .ok_or_else(|| perr(hl, uc, "explicit systems need a finite universe"))?;
            let elems = parse_set(elems).map_err(|e| lift(hl, uc + 7, e))?;
            let mut orders = BTreeMap::new();
            let mut lines = BTreeMap::new();
            for (ln, l) in content_lines(text).skip(1) {
                let (s, seq) = parse_order_line(ln, l)?;
                if s.len() >= n {
                    return Err(perr(ln, 1, format!("index set has size {} but n={n}", s.len())));
                }
                if let Some(x) = s.iter().chain(&seq).find(|x| !elems.contains(x)) {
                    return Err(perr(ln, 1, format!("{x} is not in the universe")));
                }
                if lines.insert(s.clone(), ln).is_some() {
                    return Err(perr(ln, 1, format!("second record for s={}", format_set(&s))));
                }
                orders.insert(s, seq);
            }
            let table = TableSystem::new(n, elems, orders).map_err(|e| perr(hl, 1, e.to_string()))?;
            Ok(SystemFile::Explicit { table, lines })
        }
        _ => Err(perr(hl, fc, format!("unknown flavor `{flavor}`"))),
    }
}

fn parse_order_line(ln: usize, l: &str) -> Result<(OrdSet, Vec<Ordinal>), ParseError> {
    let body = l.trim_start();
    let indent = l.len() - body.len();
    let rest = body
        .strip_prefix("order s=")
        .ok_or_else(|| perr(ln, indent + 1, "expected `order s={...} : ...`"))?;
    let (set_text, seq_text) = rest
        .split_once(':')
        .ok_or_else(|| perr(ln, indent + 1, "missing `:`"))?;
    let set_col = indent + 9;
    let s = parse_set(set_text).map_err(|e| lift(ln, set_col, e))?;
    let mut col = set_col + set_text.len() + 1;
    let mut seq = Vec::new();
    if !seq_text.trim().is_empty() {
        for part in seq_text.split(',') {
            let lead = part.len() - part.trim_start().len();
            seq.push(parse_cnf(part).map_err(|e| lift(ln, col + lead, e))?);
            col += part.len() + 1;
        }
    }
    Ok((s, seq))
}

/// Explicit serialization; lists the base order and every nonempty order.
pub fn write_table(table: &TableSystem) -> String {
    let mut out = format!(
        "ordsys v1 n={} universe=finite:{} flavor=explicit\n",
        table.depth(),
        format_set(table.elements())
    );
    let orders = table.orders();
    if !orders.contains_key(&OrdSet::new()) {
        out.push_str("order s={} :\n");
    }
    for (s, o) in orders {
        let seq: Vec<String> = o.seq().iter().map(Ordinal::to_string).collect();
        if seq.is_empty() {
            out.push_str(&format!("order s={} :\n", format_set(s)));
        } else {
            out.push_str(&format!("order s={} : {}\n", format_set(s), seq.join(",")));
        }
    }
    out
}

pub fn write_rule_system(sys: &RuleSystem) -> String {
    format!(
        "ordsys v1 n={} universe=range:{} flavor=rule rule={}\n",
        sys.depth(),
        sys.bound().lambda(),
        sys.rule()
    )
}

pub fn write_system(file: &SystemFile) -> String {
    match file {
        SystemFile::Explicit { table, .. } => write_table(table),
        SystemFile::Rule(r) => write_rule_system(r),
    }
}

pub fn parse_family(text: &str) -> Result<SetFamily, ParseError> {
    let (hl, htext) = header_line(text, "family")?;
    let header = Header::parse(hl, htext, &["family", "v1"])?;
    header.only(&["ground"])?;
    let (g, gc) = header.require("ground")?;
    let ground = parse_set(g).map_err(|e| lift(hl, gc, e))?;
    let mut members = Vec::new();
    for (ln, l) in content_lines(text).skip(1) {
        let body = l.trim_start();
        let col = l.len() - body.len() + 1;
        let m = parse_set(body).map_err(|e| lift(ln, col, e))?;
        if let Some(x) = m.iter().find(|x| !ground.contains(x)) {
            return Err(perr(ln, col, format!("{x} is not in the ground set")));
        }
        members.push(m);
    }
    SetFamily::new(ground, members).map_err(|e| perr(hl, 1, e.to_string()))
}

pub fn write_family(f: &SetFamily) -> String {
    let mut out = format!("family v1 ground={}\n", format_set(f.ground()));
    for m in f.members() {
        out.push_str(&format_set(m));
        out.push('\n');
    }
    out
}

/// A condition over a named rule base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondFile {
    pub n: usize,
    pub base: Rule,
    /// The base bound, when it is not the default.
    pub lambda: Option<Ordinal>,
    pub condition: Condition,
}

impl CondFile {
    pub fn base_system(&self) -> Result<RuleSystem, OrdinalError> {
        let bound = match &self.lambda {
            Some(l) => OrdinalBound::new(l.clone())?,
            None => OrdinalBound::default(),
        };
        Ok(RuleSystem::new(bound, self.n, self.base))
    }
}

pub fn parse_cond(text: &str) -> Result<CondFile, ParseError> {
    let (hl, htext) = header_line(text, "condition")?;
    let header = Header::parse(hl, htext, &["cond", "v1"])?;
    header.only(&["n", "base", "lambda"])?;
    let n = header.depth()?;
    let (b, bc) = header.require("base")?;
    let base: Rule = b.parse().map_err(|e: String| perr(hl, bc, e))?;
    let lambda = match header.get("lambda") {
        Some((l, lc)) => Some(parse_cnf(l).map_err(|e| lift(hl, lc, e))?),
        None => None,
    };
    let mut file = CondFile {
        n,
        base,
        lambda,
        condition: Condition::new(),
    };
    let sys = file.base_system().map_err(|e| perr(hl, 1, e.to_string()))?;
    let mut lines = BTreeMap::new();
    for (ln, l) in content_lines(text).skip(1) {
        let rec = Header::parse(ln, l, &["g"])?;
        rec.only(&["s", "x", "v"])?;
        let (s, sc) = rec.require("s")?;
        let (x, xc) = rec.require("x")?;
        let (v, vc) = rec.require("v")?;
        let s = parse_set(s).map_err(|e| lift(ln, sc, e))?;
        let x = parse_cnf(x).map_err(|e| lift(ln, xc, e))?;
        let v: u64 = v.parse().map_err(|_| perr(ln, vc, "expected a natural number"))?;
        if file.condition.get(&s, &x).is_some() {
            return Err(perr(ln, 1, format!("second value for s={} x={x}", format_set(&s))));
        }
        lines.insert(s.clone(), ln);
        file.condition.insert(s, x, v);
    }
    match validate_condition(&sys, &file.condition) {
        Ok(Check::Pass) => Ok(file),
        Ok(Check::Fail(w)) => {
            let s = match &w {
                crate::generic::ConditionWitness::BadIndex { s }
                | crate::generic::ConditionWitness::OutsidePredom { s, .. }
                | crate::generic::ConditionWitness::NotInjective { s, .. } => s,
            };
            Err(perr(lines.get(s).copied().unwrap_or(hl), 1, w.to_string()))
        }
        Err(e) => Err(perr(hl, 1, e.to_string())),
    }
}

pub fn write_cond(file: &CondFile) -> String {
    let mut out = format!("cond v1 n={} base={}", file.n, file.base);
    if let Some(l) = &file.lambda {
        if l != OrdinalBound::default().lambda() {
            out.push_str(&format!(" lambda={l}"));
        }
    }
    out.push('\n');
    for (s, m) in file.condition.sections() {
        for (x, v) in m {
            out.push_str(&format!("g s={} x={x} v={v}\n", format_set(s)));
        }
    }
    out
}

/// The three file kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    System,
    Family,
    Cond,
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileKind::System => "system",
            FileKind::Family => "family",
            FileKind::Cond => "cond",
        })
    }
}

impl FileKind {
    /// Guesses the kind from the first header word.
    pub fn sniff(text: &str) -> Option<FileKind> {
        let (_, l) = content_lines(text).next()?;
        match l.split_whitespace().next()? {
            "ordsys" => Some(FileKind::System),
            "family" => Some(FileKind::Family),
            "cond" => Some(FileKind::Cond),
            _ => None,
        }
    }
}

/// Parses, canonicalizes and re-serializes.
pub fn canonicalize(text: &str, kind: FileKind) -> Result<String, ParseError> {
    match kind {
        FileKind::System => {
            let file = parse_system(text)?;
            file.check_valid()?;
            Ok(write_system(&file))
        }
        FileKind::Family => Ok(write_family(&parse_family(text)?)),
        FileKind::Cond => Ok(write_cond(&parse_cond(text)?)),
    }
}
