//! Seeded verification batteries with deterministic, line-oriented reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closure::{closure, is_closed, ClosureOutcome, MaskConstraints, DEFAULT_BUDGET};
use crate::generic::{
    check_const, const_extend, random_legal_extension, red_check, Condition, FragmentBuilder, GenericSession, Policy,
};
use crate::omega1::{build, random_below, verify_construction, CheckLine, OmegaOne};
use crate::order::{enumerate_finite, Position};
use crate::ordinal::{Ordinal, OrdinalBound};
use crate::sets::{format_set, nats, subsets_of_size, OrdSet};
use crate::system::{
    fragment, inf_test, pivot_set, predom_of, validate_system, OrderingSystem, Rule, RuleSystem, TableSystem,
};
use crate::vc::{closed_family, shatters, vc_dimension, FamilyMode, SetFamily};
use crate::Check;

pub const SUITES: [&str; 4] = ["core", "vc", "omega1", "generic"];

/// Cases for the const/red battery, independent of the sample count.
pub const CONST_CASES: usize = 500;

/// Random explicit system of depth `n` on `{0..u-1}`.
pub fn random_table(rng: &mut impl Rng, n: usize, u: u64) -> TableSystem {
    TableSystem::random(n, nats(0..u), rng)
}

/// `ω·k + j` for small `k, j`, occasionally `ω² + j`.
pub fn random_infinite_point(rng: &mut impl Rng) -> Ordinal {
    let j = rng.gen_range(0..3);
    if rng.gen_bool(0.2) {
        Ordinal::monomial(2, 1).plus_nat(j)
    } else {
        Ordinal::monomial(1, rng.gen_range(1..=4)).plus_nat(j)
    }
}

/// A random valid condition over `base`.
pub fn random_condition(base: &RuleSystem, rng: &mut impl Rng) -> Condition {
    let n = base.depth();
    let mut p = Condition::new();
    let pool: Vec<Ordinal> = (0..6)
        .map(|_| random_infinite_point(rng))
        .collect::<OrdSet>()
        .into_iter()
        .collect();
    if pool.len() < n {
        return p;
    }
    for _ in 0..rng.gen_range(0..=3) {
        let s: OrdSet = pool.choose_multiple(rng, n).cloned().collect();
        let Ok(pre) = predom_of(base, &s) else { continue };
        let mut used: BTreeSet<u64> = p.section(&s).map(|m| m.values().copied().collect()).unwrap_or_default();
        for _ in 0..rng.gen_range(0..=4) {
            let x = if rng.gen_bool(0.7) {
                Ordinal::nat(rng.gen_range(0..8))
            } else {
                random_infinite_point(rng)
            };
            let v = rng.gen_range(0..10);
            if pre.contains(&x) && p.get(&s, &x).is_none() && used.insert(v) {
                p.insert(s.clone(), x, v);
            }
        }
    }
    p
}

/// A request set of at most `max` points, mostly infinite.
pub fn random_request(rng: &mut impl Rng, max: usize) -> OrdSet {
    (0..rng.gen_range(0..=max))
        .map(|_| {
            if rng.gen_bool(0.3) {
                Ordinal::nat(rng.gen_range(0..6))
            } else {
                random_infinite_point(rng)
            }
        })
        .collect()
}

/// Every `k`-subset `t` of `s` with `s \ t ⊆ dom(≺_t)`, by exhaustion.
pub fn brute_force_pivots(sys: &dyn OrderingSystem, s: &OrdSet, k: usize) -> Vec<OrdSet> {
    let elems: Vec<Ordinal> = s.iter().cloned().collect();
    subsets_of_size(&elems, k)
        .filter(|t| match sys.order(t) {
            Ok(ord) => s.difference(t).all(|x| ord.contains(x)),
            Err(_) => false,
        })
        .collect()
}

/// A random fragment of the ω₁ system with at most `size` points below `top`.
pub fn omega1_fragment(sys: &OmegaOne, rng: &mut impl Rng, top: &Ordinal, size: usize) -> TableSystem {
    let carrier: OrdSet = (0..size).map(|_| random_below(rng, top, 5)).collect();
    fragment(sys, &carrier).expect("fragments of the construction exist")
}

/// Rule bases used by the niceness-dependent checks.
pub fn random_rule_base(rng: &mut impl Rng, n: usize) -> RuleSystem {
    let rule = if rng.gen_bool(0.5) {
        Rule::Natural
    } else {
        Rule::BlockShuffle(rng.gen())
    };
    RuleSystem::new(OrdinalBound::default(), n, rule)
}

/// `inf_test` against direct probing of `predom(≺_s)`; `None` on agreement.
pub fn inf_disagreement(base: &RuleSystem, s: &OrdSet) -> Option<String> {
    let test = match inf_test(base, s) {
        Ok(t) => t,
        Err(e) => return Some(e.to_string()),
    };
    let pre = match predom_of(base, s) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    match (test.infinite, pre.length(), enumerate_finite(pre.as_ref())) {
        (true, Position::Infinite, _) => None,
        (false, Position::Finite(_), Some(seq)) => {
            let mut sorted = seq.clone();
            sorted.sort();
            if Some(sorted) == test.predom {
                None
            } else {
                Some(format!("s={} predom differs from the formula", format_set(s)))
            }
        }
        (inf, len, _) => Some(format!("s={} inf_test={inf} predom length {len:?}", format_set(s))),
    }
}

/// One report line per check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteLine {
    pub suite: &'static str,
    pub check: CheckLine,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub lines: Vec<SuiteLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.check.passed())
    }

    pub fn suite_passed(&self, suite: &str) -> bool {
        self.lines.iter().filter(|l| l.suite == suite).all(|l| l.check.passed())
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let status = if l.check.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {}: {} (cases={})", l.suite, l.check.name, l.check.cases);
            if let Some(w) = &l.check.failure {
                let _ = writeln!(out, "  witness: {w}");
            }
        }
        let mut suites: Vec<&str> = self.lines.iter().map(|l| l.suite).collect();
        suites.dedup();
        for s in suites {
            let status = if self.suite_passed(s) { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "SUITE {s}: {status}");
        }
        let _ = writeln!(out, "RESULT: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    pub fn render_tsv(&self) -> String {
        let mut out = String::from("status\tsuite\tcheck\tcases\twitness\n");
        for l in &self.lines {
            let status = if l.check.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status}\t{}\t{}\t{}\t{}",
                l.suite,
                l.check.name,
                l.check.cases,
                l.check.failure.as_deref().unwrap_or("")
            );
        }
        out
    }
}

/// Runs `suite` (one of [`SUITES`] or `all`).
pub fn run_suite(suite: &str, seed: u64, samples: usize) -> Result<VerifyReport, String> {
    let names: Vec<&'static str> = match suite {
        "all" => SUITES.to_vec(),
        other => vec![*SUITES
            .iter()
            .find(|s| **s == other)
            .ok_or_else(|| format!("unknown suite `{other}`"))?],
    };
    let mut report = VerifyReport::default();
    for name in names {
        let checks = match name {
            "core" => core_suite(seed, samples),
            "vc" => vc_suite(seed, samples),
            "omega1" => omega1_suite(seed, samples),
            _ => generic_suite(seed, samples),
        };
        report
            .lines
            .extend(checks.into_iter().map(|check| SuiteLine { suite: name, check }));
    }
    Ok(report)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn core_suite(seed: u64, samples: usize) -> Vec<CheckLine> {
    let mut rng = rng_for(seed, 1);

    let mut axioms = CheckLine::new("random systems satisfy the axioms");
    let mut pivots = CheckLine::new("pivot sets are unique");
    for _ in 0..samples {
        let n = rng.gen_range(1..=4);
        let u = rng.gen_range(1..=10);
        let sys = random_table(&mut rng, n, u);
        axioms.cases += 1;
        match validate_system(&sys, None) {
            Ok(r) if r.is_valid() => {}
            Ok(r) => axioms.fail(r.violations[0].to_string()),
            Err(e) => axioms.fail(e.to_string()),
        }
        let size = rng.gen_range(0..=5.min(u as usize));
        let s: OrdSet = sys.elements().choose_multiple(&mut rng, size).cloned().collect();
        let k = rng.gen_range(0..=(n - 1).min(s.len()));
        pivots.cases += 1;
        let found = brute_force_pivots(&sys, &s, k);
        match pivot_set(&sys, &s, k) {
            Ok(p) if found == vec![p.set.clone()] => {}
            Ok(p) => pivots.fail(format!(
                "s={} k={k}: computed {} but exhaustive search found {}",
                format_set(&s),
                format_set(&p.set),
                found.len()
            )),
            Err(e) => pivots.fail(e.to_string()),
        }
    }

    let mut least = CheckLine::new("closures are least closed supersets");
    for _ in 0..samples.div_ceil(4) {
        let n = rng.gen_range(1..=3);
        let u = rng.gen_range(1..=9);
        let sys = random_table(&mut rng, n, u);
        let mc = MaskConstraints::new(&sys).expect("small system");
        let size = rng.gen_range(0..=3.min(sys.elements().len()));
        let a: OrdSet = sys.elements().choose_multiple(&mut rng, size).cloned().collect();
        let am = mc.mask_of(&a);
        let oracle = mc
            .closed_masks()
            .into_iter()
            .filter(|m| m & am == am)
            .fold(u64::MAX >> (64 - sys.elements().len().max(1)), |acc, m| acc & m);
        least.cases += 1;
        match closure(&sys, &a, DEFAULT_BUDGET) {
            Ok(ClosureOutcome::Closed(c)) if mc.mask_of(&c) == oracle => {}
            Ok(other) => least.fail(format!("A={}: {other:?}", format_set(&a))),
            Err(e) => least.fail(e.to_string()),
        }
    }

    let mut inf = CheckLine::new("inf_test matches the predomain");
    for _ in 0..samples {
        let n = rng.gen_range(1..=3);
        let base = random_rule_base(&mut rng, n);
        let s: OrdSet = std::iter::repeat_with(|| {
            if rng.gen_bool(0.4) {
                Ordinal::nat(rng.gen_range(0..8))
            } else {
                random_infinite_point(&mut rng)
            }
        })
        .take(20)
        .collect::<OrdSet>()
        .into_iter()
        .take(n)
        .collect();
        if s.len() != n {
            continue;
        }
        inf.cases += 1;
        if let Some(w) = inf_disagreement(&base, &s) {
            inf.fail(w);
        }
    }
    vec![axioms, pivots, least, inf]
}

fn vc_suite(seed: u64, samples: usize) -> Vec<CheckLine> {
    let mut rng = rng_for(seed, 2);

    let mut bound = CheckLine::new("closed families have VC at most n");
    let mut certified = CheckLine::new("VC certificates verify");
    for _ in 0..samples {
        let n = rng.gen_range(1..=4);
        let u = rng.gen_range(1..=12);
        let sys = random_table(&mut rng, n, u);
        let fam = closed_family(&sys, FamilyMode::All).expect("small system");
        let r = vc_dimension(&fam, None);
        bound.cases += 1;
        certified.cases += 1;
        if r.dimension > n {
            bound.fail(format!(
                "n={n} dimension {} witness {}",
                r.dimension,
                format_set(r.witness.iter().flatten())
            ));
        }
        if !r.verify(&fam) {
            certified.fail(format!("certificate for n={n} does not verify"));
        }
    }

    let mut segs = CheckLine::new("initial segments have VC 1");
    for m in 0..=10 {
        segs.cases += 1;
        let d = vc_dimension(&SetFamily::initial_segments(m), None).dimension;
        if d != 1 {
            segs.fail(format!("m={m} dimension {d}"));
        }
    }

    let mut ksub = CheckLine::new("k-subsets of 2n+4 points have VC n+1");
    for n in 0..=3u64 {
        ksub.cases += 1;
        let fam = SetFamily::k_subsets((0..2 * n + 4).map(Ordinal::nat), n as usize + 1).expect("small ground");
        let d = vc_dimension(&fam, None).dimension;
        if d != n as usize + 1 {
            ksub.fail(format!("n={n} dimension {d}"));
        }
    }

    let mut relabel = CheckLine::new("VC is invariant under order isomorphisms");
    for _ in 0..samples.div_ceil(4) {
        let u = rng.gen_range(1..=8u64);
        let members: Vec<OrdSet> = (0..rng.gen_range(0..12))
            .map(|_| (0..u).filter(|_| rng.gen_bool(0.5)).map(Ordinal::nat).collect())
            .collect();
        let shift = |x: &Ordinal| Ordinal::monomial(1, 1 + x.as_nat().unwrap_or(0));
        let f = SetFamily::new(nats(0..u), members.clone()).expect("ground");
        let g = SetFamily::new(
            (0..u).map(|x| shift(&Ordinal::nat(x))),
            members.iter().map(|m| m.iter().map(shift).collect()),
        )
        .expect("ground");
        relabel.cases += 1;
        let (a, b) = (vc_dimension(&f, None).dimension, vc_dimension(&g, None).dimension);
        if a != b {
            relabel.fail(format!("{a} before relabeling, {b} after"));
        }
    }
    vec![bound, certified, segs, ksub, relabel]
}

fn omega1_suite(seed: u64, samples: usize) -> Vec<CheckLine> {
    let mut lines = Vec::new();
    let sys = match build(OrdinalBound::new(Ordinal::monomial(2, 1)).expect("valid bound")) {
        Ok(s) => s,
        Err(e) => {
            let mut l = CheckLine::new("construction builds");
            l.fail(e.to_string());
            return vec![l];
        }
    };
    match verify_construction(&sys, &Ordinal::monomial(1, 5), samples, seed) {
        Ok(r) => lines.extend(r.lines),
        Err(e) => {
            let mut l = CheckLine::new("construction certifies");
            l.fail(e.to_string());
            lines.push(l);
        }
    }
    let mut rng = rng_for(seed, 3);
    let mut vc = CheckLine::new("fragment closed families have VC at most 2");
    let mut reached = false;
    let top = Ordinal::monomial(1, 5);
    for _ in 0..20 {
        let size = rng.gen_range(2..=12);
        let frag = omega1_fragment(&sys, &mut rng, &top, size);
        let fam = closed_family(&frag, FamilyMode::All).expect("small fragment");
        let r = vc_dimension(&fam, None);
        vc.cases += 1;
        reached |= r.dimension == 2;
        if r.dimension > 2 {
            vc.fail(format!(
                "carrier {} shatters {}",
                format_set(frag.elements()),
                format_set(r.witness.iter().flatten())
            ));
        }
    }
    let mut two = CheckLine::new("some fragment has VC exactly 2");
    two.cases = 20;
    if !reached {
        two.fail("no sampled fragment shatters a pair".into());
    }
    lines.push(vc);
    lines.push(two);
    lines
}

fn generic_suite(seed: u64, samples: usize) -> Vec<CheckLine> {
    let mut rng = rng_for(seed, 4);
    let mut guarantees = CheckLine::new("extensions meet their five guarantees");
    let mut red = CheckLine::new("extended conditions force closedness");
    let mut robust = CheckLine::new("forced sets stay closed under legal extensions");
    let mut above = CheckLine::new("new values exceed the forced image");
    let robust_every = (CONST_CASES / samples.clamp(1, CONST_CASES)).max(1);
    for case in 0..CONST_CASES {
        let n = if case % 2 == 0 { 2 } else { 3 };
        let base = RuleSystem::new(OrdinalBound::default(), n, Rule::Natural);
        let p = random_condition(&base, &mut rng);
        let a = random_request(&mut rng, 8);
        guarantees.cases += 1;
        red.cases += 1;
        let w = match const_extend(&base, &a, &p) {
            Ok(w) => w,
            Err(e) => {
                guarantees.fail(format!("A={}: {e}", format_set(&a)));
                continue;
            }
        };
        match check_const(&base, &a, &p, &w.b, &w.q) {
            Ok(Check::Pass) => {}
            Ok(Check::Fail(f)) => guarantees.fail(format!("A={}: {f}", format_set(&a))),
            Err(e) => guarantees.fail(e.to_string()),
        }
        match red_check(&base, &w.b, &w.q) {
            Ok(Check::Pass) => {}
            Ok(Check::Fail(f)) => red.fail(format!("B={}: {f}", format_set(&w.b))),
            Err(e) => red.fail(e.to_string()),
        }
        if case % robust_every != 0 {
            continue;
        }
        let mut carrier = w.b.clone();
        carrier.insert(random_infinite_point(&mut rng));
        carrier.insert(Ordinal::nat(rng.gen_range(0..12)));
        let builder = match FragmentBuilder::new(&base, &carrier) {
            Ok(b) => b,
            Err(e) => {
                robust.fail(e.to_string());
                continue;
            }
        };
        for _ in 0..20 {
            let g = random_legal_extension(&w.q, &builder, &mut rng);
            robust.cases += 1;
            above.cases += 1;
            for (s, x) in builder.required() {
                if let (None, Some(v)) = (w.q.get(s, x), g.get(s, x)) {
                    let top = w.q.section(s).map_or(0, |m| m.len() as u64);
                    if v < top {
                        above.fail(format!("s={} x={x} got {v} below {top}", format_set(s)));
                    }
                }
            }
            match builder.build(&g).map(|f| is_closed(&f, &w.b)) {
                Ok(Ok(Check::Pass)) => {}
                Ok(Ok(Check::Fail(c))) => robust.fail(format!("B={}: {c}", format_set(&w.b))),
                Ok(Err(e)) => robust.fail(e.to_string()),
                Err(e) => robust.fail(e.to_string()),
            }
        }
    }

    let mut vc = CheckLine::new("induced fragments have VC at most n+1");
    let mut replay = CheckLine::new("sessions replay exactly");
    let base = RuleSystem::new(OrdinalBound::default(), 2, Rule::Natural);
    let mut session = GenericSession::new(base.clone(), Policy::FrontFill);
    let mut carriers = 0;
    let mut attempts = 0;
    while carriers < 10 && attempts < 200 {
        attempts += 1;
        let a = random_request(&mut rng, 5);
        let (b, certified) = match session.closure(&a) {
            Ok(r) => r,
            Err(e) => {
                vc.fail(e.to_string());
                break;
            }
        };
        if !certified {
            vc.fail(format!("closure of {} is not certified", format_set(&a)));
        }
        if b.len() > 12 || b.len() < 2 {
            continue;
        }
        carriers += 1;
        vc.cases += 1;
        match session.induced_fragment(&b) {
            Ok(frag) => {
                let fam = closed_family(&frag, FamilyMode::All).expect("small carrier");
                let r = vc_dimension(&fam, None);
                if r.dimension > 3 {
                    vc.fail(format!("carrier {} has VC {}", format_set(&b), r.dimension));
                }
            }
            Err(e) => vc.fail(e.to_string()),
        }
    }
    replay.cases += 1;
    match GenericSession::replay(base, Policy::FrontFill, session.log()) {
        Ok(again) if again.condition() == session.condition() => {}
        Ok(_) => replay.fail("replayed condition differs".into()),
        Err(e) => replay.fail(e.to_string()),
    }
    vec![guarantees, red, robust, above, vc, replay]
}

/// Exhaustive check that no `k`-subset of `fam`'s ground is shattered.
pub fn no_shattered_of_size(fam: &SetFamily, k: usize) -> Option<OrdSet> {
    subsets_of_size(fam.ground(), k).find(|a| matches!(shatters(fam, a), Ok(Check::Pass)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite("core", 5, 20).unwrap();
        let b = run_suite("core", 5, 20).unwrap();
        assert_eq!(a.render_text(), b.render_text());
        assert!(a.passed(), "{}", a.render_text());
        assert!(a.render_text().ends_with("RESULT: PASS\n"));
    }

    #[test]
    fn vc_suite_passes() {
        let r = run_suite("vc", 1, 30).unwrap();
        assert!(r.passed(), "{}", r.render_text());
        assert!(r.render_tsv().starts_with("status\t"));
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", 1, 1).is_err());
    }

    #[test]
    fn shattering_scan() {
        let fam = SetFamily::k_subsets(nats(0..5), 2).unwrap();
        assert!(no_shattered_of_size(&fam, 2).is_some());
        assert!(no_shattered_of_size(&fam, 3).is_none());
    }
}
