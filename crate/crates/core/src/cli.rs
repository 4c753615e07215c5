//! Batch front-end. [`run`] returns the exit code and the report text, so
//! the binary and the tests share one code path.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::closure::{closure, initial_segment, is_closed, ClosureOutcome, SegmentOutcome, DEFAULT_BUDGET};
use crate::format::{
    canonicalize, parse_cond, parse_family, parse_system, write_cond, write_table, CondFile, FileKind, SystemFile,
};
use crate::generic::{const_extend, red_check, Condition};
use crate::omega1::{build, verify_construction};
use crate::order::enumerate_finite;
use crate::ordinal::{parse_cnf, Ordinal, OrdinalBound};
use crate::sets::{format_set, parse_set, subsets_of_size, OrdSet};
use crate::system::{check_nice, fragment, validate_system, OrderingSystem, Rule, RuleSystem};
use crate::vc::{closed_family, vc_dimension, FamilyMode, SetFamily};
use crate::verify::run_suite;
use crate::Check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Validate,
    Closure,
    Vc,
    Segments,
    Omega1,
    Generic,
    Verify,
    Convert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Tsv,
}

#[derive(Debug, Parser)]
#[command(name = "ordsys", version, about = "Ordering systems, closures and VC dimension")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// System file, `trivial`, or a rule such as `BlockShuffle:7`.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    family: Option<PathBuf>,
    #[arg(long)]
    cond: Option<PathBuf>,
    /// Depth for named systems.
    #[arg(long)]
    n: Option<usize>,
    /// Bound of named systems, in CNF.
    #[arg(long)]
    lambda: Option<String>,
    /// A finite set such as `{0,w,w*2+1}`.
    #[arg(long)]
    set: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A usage or input problem; always exit 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Usage> {
    Err(Usage(msg.into()))
}

/// `KEY: value` pairs followed by witness lines.
struct Report {
    format: OutputFormat,
    pairs: Vec<(String, String)>,
    witness: Vec<String>,
    /// Replaces the pairs and witness lines when set.
    raw: Option<String>,
    code: i32,
}

impl Report {
    fn new(format: OutputFormat) -> Self {
        Report {
            format,
            pairs: Vec::new(),
            witness: Vec::new(),
            raw: None,
            code: EXIT_OK,
        }
    }

    fn kv(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.into(), value.to_string()));
    }

    fn fail(&mut self) {
        self.code = EXIT_PROPERTY;
    }

    fn render(&self) -> String {
        if let Some(raw) = &self.raw {
            return raw.clone();
        }
        let mut out = String::new();
        for (k, v) in &self.pairs {
            match self.format {
                OutputFormat::Text => writeln!(out, "{k}: {v}"),
                OutputFormat::Tsv => writeln!(out, "{k}\t{v}"),
            }
            .expect("writing to a string");
        }
        if !self.witness.is_empty() {
            if self.format == OutputFormat::Text {
                out.push_str("WITNESS:\n");
            }
            for w in &self.witness {
                match self.format {
                    OutputFormat::Text => writeln!(out, "  {w}"),
                    OutputFormat::Tsv => writeln!(out, "WITNESS\t{w}"),
                }
                .expect("writing to a string");
            }
        }
        out
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (EXIT_OK, e.to_string()),
                _ => {
                    let line = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
                    (EXIT_USAGE, format!("{line}\n"))
                }
            };
        }
    };
    match dispatch(&args) {
        Ok(report) => (report.code, report.render()),
        Err(Usage(msg)) => (EXIT_USAGE, format!("error: {}\n", msg.lines().next().unwrap_or(""))),
    }
}

fn dispatch(args: &Args) -> Result<Report, Usage> {
    let allows_out = matches!(args.command, Command::Convert | Command::Generic | Command::Omega1);
    if args.out.is_some() && !allows_out {
        return usage("--out is only used by convert, generic and omega1");
    }
    let mut report = Report::new(args.format);
    match args.command {
        Command::Validate => validate(args, &mut report)?,
        Command::Closure => closure_cmd(args, &mut report)?,
        Command::Vc => vc(args, &mut report)?,
        Command::Segments => segments(args, &mut report)?,
        Command::Omega1 => omega1(args, &mut report)?,
        Command::Generic => generic(args, &mut report)?,
        Command::Verify => {
            let r = run_suite(&args.suite, args.seed, args.samples).map_err(Usage)?;
            report.raw = Some(match args.format {
                OutputFormat::Text => r.render_text(),
                OutputFormat::Tsv => r.render_tsv(),
            });
            if !r.passed() {
                report.fail();
            }
        }
        Command::Convert => convert(args, &mut report)?,
    }
    Ok(report)
}

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), Usage> {
    fs::write(path, text).map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))
}

fn bound_arg(args: &Args) -> Result<OrdinalBound, Usage> {
    match &args.lambda {
        Some(l) => Ok(OrdinalBound::new(parse_cnf(l)?)?),
        None => Ok(OrdinalBound::default()),
    }
}

fn set_arg(args: &Args) -> Result<Option<OrdSet>, Usage> {
    args.set
        .as_deref()
        .map(|s| parse_set(s).map_err(Usage::from))
        .transpose()
}

fn require_set(args: &Args) -> Result<OrdSet, Usage> {
    set_arg(args)?.ok_or_else(|| Usage("--set is required".into()))
}

/// `--system`: a file, `trivial`, or a rule name, the last two with `--n`
/// and `--lambda`.
fn load_system(args: &Args) -> Result<SystemFile, Usage> {
    let arg = args
        .system
        .as_deref()
        .ok_or_else(|| Usage("--system is required".into()))?;
    let rule = match arg {
        "trivial" => Some(Rule::Natural),
        other => other.parse::<Rule>().ok(),
    };
    if let Some(rule) = rule {
        let n = args
            .n
            .ok_or_else(|| Usage("--n is required for named systems".into()))?;
        if n == 0 {
            return usage("--n must be positive");
        }
        return Ok(SystemFile::Rule(RuleSystem::new(bound_arg(args)?, n, rule)));
    }
    let text = read(Path::new(arg))?;
    parse_system(&text).map_err(|e| Usage(format!("{arg}: {e}")))
}

/// Probe for named systems: `--set`, or the first few points of each level.
fn default_probe(sys: &dyn OrderingSystem) -> OrdSet {
    let mut probe: OrdSet = (0..4).map(Ordinal::nat).collect();
    for k in 1..=2 {
        probe.insert(Ordinal::monomial(1, k));
        probe.insert(Ordinal::monomial(1, k).plus_nat(1));
    }
    probe.insert(Ordinal::monomial(2, 1));
    probe.retain(|x| sys.universe().contains(x));
    probe
}

fn validate(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let file = load_system(args)?;
    let sys = file.system();
    let probe = match (sys.universe().finite(), set_arg(args)?) {
        (Some(_), _) => None,
        (None, Some(p)) => Some(p),
        (None, None) => Some(default_probe(sys)),
    };
    let report = validate_system(sys, probe.as_ref())?;
    rep.kv("N", sys.depth());
    if let Some(p) = &probe {
        rep.kv("FRAGMENT", format_set(p));
    }
    rep.kv("VALID", if report.is_valid() { "yes" } else { "no" });
    rep.kv("VIOLATIONS", report.violations.len());
    for v in &report.violations {
        match &file {
            SystemFile::Explicit { .. } => rep.witness.push(format!("line {}: {v}", file.line_of(v))),
            SystemFile::Rule(_) => rep.witness.push(v.to_string()),
        }
    }
    if report.is_valid() {
        let nice = match &probe {
            None => check_nice(sys, None)?,
            Some(p) => {
                let probe = crate::system::Probe {
                    fragment: p.clone(),
                    prefix_depth: 32,
                };
                check_nice(sys, Some(&probe))?
            }
        };
        rep.kv("NICE", if nice.passed() { "yes" } else { "no" });
    } else {
        rep.fail();
    }
    Ok(())
}

fn closure_cmd(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let file = load_system(args)?;
    let a = require_set(args)?;
    if let Some(x) = a.iter().find(|x| !file.system().universe().contains(x)) {
        return usage(format!("{x} is not in the universe"));
    }
    match closure(file.system(), &a, args.budget)? {
        ClosureOutcome::Closed(c) => {
            rep.kv("CLOSED", format_set(&c));
            rep.kv("SIZE", c.len());
        }
        ClosureOutcome::BudgetExceeded(partial) => {
            rep.kv("BUDGET_EXCEEDED", args.budget);
            rep.kv("PARTIAL_SIZE", partial.len());
        }
        ClosureOutcome::ProvablyInfinite { s, b, partial } => {
            rep.kv("INFINITE", format!("s={} b={b}", format_set(&s)));
            rep.kv("PARTIAL", format_set(&partial));
        }
    }
    Ok(())
}

fn family_arg(args: &Args) -> Result<SetFamily, Usage> {
    if let Some(path) = &args.family {
        let text = read(path)?;
        return parse_family(&text).map_err(|e| Usage(format!("{}: {e}", path.display())));
    }
    if args.system.is_some() {
        let file = load_system(args)?;
        if file.system().universe().finite().is_none() {
            let probe = set_arg(args)?.unwrap_or_else(|| default_probe(file.system()));
            let table = fragment(file.system(), &probe)?;
            return Ok(closed_family(&table, FamilyMode::All)?);
        }
        return Ok(closed_family(file.system(), FamilyMode::All)?);
    }
    usage("vc needs --family or --system")
}

fn vc(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let fam = family_arg(args)?;
    let r = vc_dimension(&fam, None);
    rep.kv("GROUND", fam.ground().len());
    rep.kv("MEMBERS", fam.members().len());
    rep.kv("VC", r.dimension);
    rep.kv("CAPPED", if r.capped { "yes" } else { "no" });
    if let Some(w) = &r.witness {
        rep.kv("SHATTERED", format_set(w));
        for (trace, member) in &r.certificate.realizers {
            rep.witness
                .push(format!("trace {} from {}", format_set(trace), format_set(member)));
        }
    }
    if !r.verify(&fam) {
        rep.kv("CERTIFICATE", "invalid");
        rep.fail();
    }
    Ok(())
}

fn segments(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let file = load_system(args)?;
    let sys = file.system();
    let table;
    let sys: &dyn OrderingSystem = if sys.universe().finite().is_some() {
        sys
    } else {
        let probe = set_arg(args)?.unwrap_or_else(|| default_probe(sys));
        table = fragment(sys, &probe)?;
        &table
    };
    let elems = sys.universe().finite().expect("finite by construction").to_vec();
    let (mut count, mut open) = (0, 0);
    for s in subsets_of_size(&elems, sys.depth() - 1) {
        let ord = sys.order(&s)?;
        for b in enumerate_finite(ord.as_ref()).unwrap_or_default() {
            let SegmentOutcome::Finite(seg) = initial_segment(sys, &s, &b)? else {
                continue;
            };
            count += 1;
            let closed = is_closed(sys, &seg)?;
            if !closed.passed() {
                open += 1;
            }
            rep.witness.push(format!(
                "s={} b={b} segment={} closed={}",
                format_set(&s),
                format_set(&seg),
                if closed.passed() { "yes" } else { "no" }
            ));
        }
    }
    rep.kv("SEGMENTS", count);
    rep.kv("NOT_CLOSED", open);
    Ok(())
}

fn omega1(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let bound = match &args.lambda {
        Some(l) => OrdinalBound::new(parse_cnf(l)?)?,
        None => OrdinalBound::new(Ordinal::monomial(2, 1))?,
    };
    let sys = build(bound.clone())?;
    rep.kv("LAMBDA", bound.lambda());
    if let Some(carrier) = set_arg(args)? {
        let table = fragment(&sys, &carrier)?;
        let text = write_table(&table);
        match &args.out {
            Some(path) => {
                write_out(path, &text)?;
                rep.kv("FRAGMENT", path.display());
            }
            None => rep.witness.extend(text.lines().map(str::to_string)),
        }
        for delta in carrier.iter().filter(|x| x.is_limit()) {
            rep.witness.extend(sys.chain_dump(delta, 4)?);
        }
        return Ok(());
    }
    if args.out.is_some() {
        return usage("omega1 --out needs --set");
    }
    let alpha_max = [Ordinal::monomial(1, 5), Ordinal::monomial(1, 2)]
        .into_iter()
        .find(|a| bound.contains(a))
        .expect("the bound is at least w^2");
    let r = verify_construction(&sys, &alpha_max, args.samples, args.seed)?;
    rep.kv("ALPHA_MAX", &alpha_max);
    for l in &r.lines {
        let status = if l.passed() { "PASS" } else { "FAIL" };
        rep.kv(status, format!("{} (cases={})", l.name, l.cases));
        if let Some(f) = &l.failure {
            rep.witness.push(format!("{}: {f}", l.name));
        }
    }
    if !r.passed() {
        rep.fail();
    }
    Ok(())
}

fn generic(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let cond = match &args.cond {
        Some(path) => {
            let text = read(path)?;
            parse_cond(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => CondFile {
            n: args.n.ok_or_else(|| Usage("generic needs --cond or --n".into()))?,
            base: Rule::Natural,
            lambda: args.lambda.as_deref().map(parse_cnf).transpose()?,
            condition: Condition::new(),
        },
    };
    let base = cond.base_system()?;
    let a = set_arg(args)?.unwrap_or_default();
    let w = const_extend(&base, &a, &cond.condition)?;
    rep.kv("N", cond.n);
    rep.kv("BASE", cond.base);
    rep.kv("REQUEST", format_set(&a));
    rep.kv("CLOSED", format_set(&w.b));
    rep.kv("ENTRIES", w.q.len());
    let red = red_check(&base, &w.b, &w.q)?;
    rep.kv("FORCED", if red.passed() { "yes" } else { "no" });
    if let Check::Fail(f) = red {
        rep.witness.push(f.to_string());
        rep.fail();
    }
    for (i, pass) in w.pass_trace.iter().enumerate() {
        rep.witness.push(format!(
            "pass {}: B={} entries={}",
            i + 1,
            format_set(&pass.b),
            pass.q.len()
        ));
        for note in &pass.notes {
            rep.witness.push(format!("pass {}: {note}", i + 1));
        }
    }
    if let Some(path) = &args.out {
        let out = CondFile { condition: w.q, ..cond };
        write_out(path, &write_cond(&out))?;
        rep.kv("OUT", path.display());
    }
    Ok(())
}

fn convert(args: &Args, rep: &mut Report) -> Result<(), Usage> {
    let inputs: Vec<(FileKind, PathBuf)> = [
        (FileKind::System, args.system.as_ref().map(PathBuf::from)),
        (FileKind::Family, args.family.clone()),
        (FileKind::Cond, args.cond.clone()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.map(|p| (k, p)))
    .collect();
    let [(kind, path)] = inputs.as_slice() else {
        return usage("convert needs exactly one of --system, --family, --cond");
    };
    let text = read(path)?;
    let canon = canonicalize(&text, *kind).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    match &args.out {
        Some(out) => {
            write_out(out, &canon)?;
            rep.kv("KIND", kind);
            rep.kv("OUT", out.display());
            rep.kv("BYTES", canon.len());
        }
        None => rep.raw = Some(canon),
    }
    Ok(())
}
