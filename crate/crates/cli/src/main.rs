mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prefdist::casebase::{self, closest_set, nearest, run_elicitation, CaseBase, ElicitationState};
use prefdist::complete::{self, MetricKind};
use prefdist::estimate::{DistanceEstimate, EstimationConfig, Mode, SampleCount, CSV_HEADER};
use prefdist::linext::{self, ExtensionLimits, HeightMode, SamplerConfig};
use prefdist::orders::{parse_partial_order, parse_weak_order};
use prefdist::partial_metrics;
use prefdist::rng::derive_seed;
use prefdist::utility::{self, UtilityVector};
use prefdist::verify;
use prefdist::{Error, OutcomeSpace, PartialPreferenceOrder, WeakOrder};

use output::{num, Manifest, Output};

#[derive(Parser, Debug)]
#[command(name = "prefdist", version, about = "Distances between preference structures")]
struct Cli {
    /// Worker threads for the parallel estimators (results do not depend on it)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two orders or two utility functions
    Dist(DistArgs),
    /// Linear extensions of a partial order
    Linext(LinextArgs),
    /// Rank a case base against an elicited partial order
    Nearest(NearestArgs),
    /// Simulate incremental elicitation against a case base
    Elicit(ElicitArgs),
    /// Run the built-in checks
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, env = "PREFDIST_SEED", default_value_t = 0)]
    seed: u64,
    /// Relative accuracy of estimates and target TV distance of the sampler
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Chebyshev confidence constant c (coverage at least 1 - 1/c)
    #[arg(long, default_value_t = 20.0)]
    confidence: f64,
    /// Fixed sample count instead of automatic sizing
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Multiplier on the sampler's m^3 ln(m/epsilon) step count
    #[arg(long, default_value_t = 4.0)]
    chain_constant: f64,
    /// Write the result to this file (with a manifest header) instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> EstimationConfig {
        EstimationConfig {
            seed: self.seed,
            samples: self.samples.map_or(SampleCount::Auto, SampleCount::Fixed),
            confidence_c: self.confidence,
            epsilon: self.epsilon,
            mode: match self.mode {
                ModeArg::Auto => Mode::Auto,
                ModeArg::Exact => Mode::Exact,
                ModeArg::Sampled => Mode::Sampled,
            },
            sampler: SamplerConfig {
                epsilon: self.epsilon,
                step_constant: self.chain_constant,
                seed: self.seed,
            },
            ..EstimationConfig::default()
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Auto,
    Exact,
    Sampled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MetricArg {
    Footrule,
    Euclidean,
    Probabilistic,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Footrule => MetricKind::Footrule,
            MetricArg::Euclidean => MetricKind::Euclidean,
            MetricArg::Probabilistic => MetricKind::Probabilistic,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Measure {
    /// Mean over pairs of linear extensions
    Average,
    /// Distance between average height profiles
    Generalized,
    /// Minimum and maximum over pairs of linear extensions
    Extreme,
}

#[derive(Args, Debug)]
struct DistArgs {
    /// First order or utility vector (`@path` reads a file)
    first: String,
    /// Second order or utility vector (`@path` reads a file)
    second: String,
    #[arg(long, value_enum, default_value_t = MetricArg::Probabilistic)]
    metric: MetricArg,
    /// Divide by the metric's upper bound
    #[arg(long)]
    normalized: bool,
    /// Read the inputs as utility vectors
    #[arg(long)]
    utility: bool,
    /// Comma-separated outcome labels (default: the labels used, sorted)
    #[arg(long)]
    outcomes: Option<String>,
    #[arg(long, value_enum, default_value_t = Measure::Average)]
    measure: Measure,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct LinextArgs {
    #[command(subcommand)]
    action: LinextAction,
}

#[derive(Subcommand, Debug)]
enum LinextAction {
    /// Number of linear extensions
    Count(PosetArgs),
    /// Every linear extension, one per line
    Enumerate(PosetArgs),
    /// Random linear extensions from the Bubley-Dyer chain
    Sample(PosetArgs),
    /// Average height of each outcome
    Heights(PosetArgs),
}

#[derive(Args, Debug)]
struct PosetArgs {
    /// Partial order such as `a < c; b < c` (`@path` reads a file)
    poset: String,
    #[arg(long)]
    outcomes: Option<String>,
    /// Number of draws for `sample`, and for `heights` when sampling
    #[arg(long, default_value_t = 10)]
    draws: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NearestArgs {
    #[arg(long)]
    casebase: PathBuf,
    /// Elicited partial order (default: nothing known)
    #[arg(long, default_value = "")]
    elicited: String,
    #[arg(long, value_enum, default_value_t = MetricArg::Probabilistic)]
    metric: MetricArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ElicitArgs {
    #[arg(long)]
    casebase: PathBuf,
    /// Case name, or an order over the case base's outcomes
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 50)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Probabilistic)]
    metric: MetricArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these suites
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::SUITES))]
    suite: Vec<String>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SpaceMismatch | Error::SupportMismatch(..) => 3,
            Error::CapExceeded { .. } => 4,
            Error::UnknownCase(_) => 5,
            Error::EmptyCaseBase | Error::InconsistentAnswer(_) => 1,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_arg(text: &str) -> Result<String, Failure> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| Failure::new(2, format!("cannot read {path}: {e}"))),
        None => Ok(text.to_string()),
    }
}

fn read_casebase(path: &Path) -> Result<CaseBase, Failure> {
    let file = std::fs::File::open(path)
        .map_err(|e| Failure::new(2, format!("cannot read case base {}: {e}", path.display())))?;
    Ok(casebase::load_casebase(file)?)
}

fn order_labels(texts: &[&str]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for t in texts {
        for l in t.split(['<', '=', ';']).map(str::trim).filter(|l| !l.is_empty()) {
            if !labels.iter().any(|x| x == l) {
                labels.push(l.to_string());
            }
        }
    }
    labels.sort();
    labels
}

/// Labels of `u(label)=` terms, in order of appearance.
fn utility_labels(texts: &[&str]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for t in texts {
        for part in t.split("u(").skip(1) {
            if let Some((l, _)) = part.split_once(')') {
                let l = l.trim();
                if !labels.iter().any(|x| x == l) {
                    labels.push(l.to_string());
                }
            }
        }
    }
    labels
}

fn space_from(outcomes: &Option<String>, texts: &[&str]) -> Result<Arc<OutcomeSpace>, Failure> {
    let labels = match outcomes {
        Some(list) => list.split(',').map(|l| l.trim().to_string()).collect(),
        None => order_labels(texts),
    };
    Ok(OutcomeSpace::new(labels)?)
}

fn estimate_text(e: &DistanceEstimate, normalizer: f64) -> String {
    let v = e.value / normalizer;
    if e.method == prefdist::estimate::Method::Exact {
        num(v)
    } else {
        format!(
            "{} [{}, {}] (monte_carlo, k={}, seed={})",
            num(v),
            num(e.interval_low / normalizer),
            num(e.interval_high / normalizer),
            e.sample_count,
            e.seed
        )
    }
}

fn estimate_csv(e: &DistanceEstimate, normalizer: f64) -> String {
    let mut e = e.clone();
    e.value /= normalizer;
    e.interval_low /= normalizer;
    e.interval_high /= normalizer;
    format!("{CSV_HEADER}\n{}\n", e.csv_row())
}

fn cmd_dist(args: &DistArgs, out: &mut Output) -> CmdResult {
    let config = args.common.config();
    config.validate()?;
    let kind = MetricKind::from(args.metric);
    let first = read_arg(&args.first)?;
    let second = read_arg(&args.second)?;
    if args.utility {
        let parse = |text: &str, space: &Arc<OutcomeSpace>| UtilityVector::parse(space, text).map(|(_, u)| u);
        let named = utility_labels(&[&first, &second]);
        let (u1, u2) = match &args.outcomes {
            Some(_) => {
                let space = space_from(&args.outcomes, &[])?;
                (parse(&first, &space)?, parse(&second, &space)?)
            }
            None if !named.is_empty() => {
                let space = OutcomeSpace::new(named)?;
                (parse(&first, &space)?, parse(&second, &space)?)
            }
            None => {
                let count = |t: &str| t.split(',').filter(|s| !s.trim().is_empty()).count();
                let (n1, n2) = (count(&first), count(&second));
                if n1 != n2 {
                    return Err(Failure::new(3, format!("utility vectors have {n1} and {n2} entries")));
                }
                let space = OutcomeSpace::numbered(n1)?;
                (parse(&first, &space)?, parse(&second, &space)?)
            }
        };
        let e = match kind {
            MetricKind::Footrule => DistanceEstimate::exact("footrule", utility::utility_footrule(&u1, &u2)?, 0),
            MetricKind::Euclidean => DistanceEstimate::exact("euclidean", utility::utility_euclidean(&u1, &u2)?, 0),
            MetricKind::Probabilistic => utility::probabilistic_distance_utilities(&u1, &u2, &config)?,
        };
        return write_estimate(&e, 1.0, args.common.format, out);
    }
    let space = space_from(&args.outcomes, &[&first, &second])?;
    let normalizer = if args.normalized { kind.upper_bound(space.len()) } else { 1.0 };
    if let (Ok(o1), Ok(o2)) = (parse_weak_order(&space, &first), parse_weak_order(&space, &second)) {
        if args.measure != Measure::Extreme {
            let mut e = DistanceEstimate::exact(kind.name(), complete::distance(kind, &o1, &o2)?, 1);
            e.seed = config.seed;
            return write_estimate(&e, normalizer, args.common.format, out);
        }
    }
    let p1 = parse_partial_order(&space, &first)?;
    let p2 = parse_partial_order(&space, &second)?;
    match args.measure {
        Measure::Average => {
            let e = partial_metrics::avg_distance(&p1, &p2, kind, &config)?;
            write_estimate(&e, normalizer, args.common.format, out)
        }
        Measure::Generalized => {
            let e = match kind {
                MetricKind::Footrule => partial_metrics::generalized_footrule(&p1, &p2, &config)?,
                MetricKind::Euclidean => partial_metrics::generalized_euclidean(&p1, &p2, &config)?,
                MetricKind::Probabilistic => {
                    return Err(Failure::new(3, "generalized distances use footrule or euclidean"));
                }
            };
            write_estimate(&e, normalizer, args.common.format, out)
        }
        Measure::Extreme => {
            let i = partial_metrics::extreme_interval(&p1, &p2, kind, &config)?;
            let (lo, hi) = (i.low / normalizer, i.high / normalizer);
            match args.common.format {
                Format::Text => {
                    out.line(format!("[{}, {}]{}", num(lo), num(hi), if i.exact { "" } else { " (sampled)" }));
                    let witness = |w: &Option<(prefdist::LinearExtension, prefdist::LinearExtension)>| {
                        w.as_ref()
                            .map(|(a, b)| format!("{} vs {}", a.display(&p1), b.display(&p2)))
                            .unwrap_or_default()
                    };
                    out.line(format!("low: {}", witness(&i.low_witness)));
                    out.line(format!("high: {}", witness(&i.high_witness)));
                }
                Format::Csv => {
                    out.line("metric,low,high,exact");
                    out.line(format!("{},{},{},{}", kind.name(), lo, hi, i.exact));
                }
            }
            Ok(())
        }
    }
}

fn write_estimate(e: &DistanceEstimate, normalizer: f64, format: Format, out: &mut Output) -> CmdResult {
    match format {
        Format::Text => out.line(estimate_text(e, normalizer)),
        Format::Csv => out.push(estimate_csv(e, normalizer)),
    }
    Ok(())
}

fn poset_from(args: &PosetArgs) -> Result<PartialPreferenceOrder, Failure> {
    let text = read_arg(&args.poset)?;
    let space = space_from(&args.outcomes, &[&text])?;
    Ok(parse_partial_order(&space, &text)?)
}

fn cmd_linext(args: &LinextArgs, out: &mut Output) -> CmdResult {
    let limits = ExtensionLimits::default();
    match &args.action {
        LinextAction::Count(a) => {
            let poset = poset_from(a)?;
            out.line(linext::count_extensions(&poset, &limits)?.to_string());
        }
        LinextAction::Enumerate(a) => {
            let poset = poset_from(a)?;
            for e in linext::enumerate_extensions(&poset, &limits)? {
                out.line(e.display(&poset));
            }
        }
        LinextAction::Sample(a) => {
            let poset = poset_from(a)?;
            let cfg = a.common.config();
            cfg.sampler.validate()?;
            for e in linext::sample_many(&poset, a.draws, &cfg.sampler)? {
                out.line(e.display(&poset));
            }
        }
        LinextAction::Heights(a) => {
            let poset = poset_from(a)?;
            let cfg = a.common.config();
            let mode = match cfg.mode {
                Mode::Exact => HeightMode::Exact,
                Mode::Sampled => HeightMode::Sampled(a.draws),
                Mode::Auto if poset.class_count() <= limits.count_max_classes => HeightMode::Exact,
                Mode::Auto => HeightMode::Sampled(a.draws),
            };
            let h = linext::average_heights(&poset, mode, &cfg.sampler, &limits)?;
            let space = poset.space();
            match a.common.format {
                Format::Text => out.line(
                    h.values()
                        .iter()
                        .enumerate()
                        .map(|(i, v)| format!("{}={}", space.label(i), num(*v)))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                Format::Csv => {
                    out.line("outcome,height");
                    for (i, v) in h.values().iter().enumerate() {
                        out.line(format!("{},{}", space.label(i), v));
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_nearest(args: &NearestArgs, out: &mut Output) -> CmdResult {
    let cb = read_casebase(&args.casebase)?;
    let config = args.common.config();
    config.validate()?;
    let elicited = parse_partial_order(cb.space(), &read_arg(&args.elicited)?)?;
    let state = ElicitationState::with_order(&cb, &elicited)?;
    let ranked = nearest(&state, &cb, args.metric.into(), &config)?;
    let closest = closest_set(&ranked, state.closest());
    match args.common.format {
        Format::Text => {
            for (rank, r) in ranked.iter().enumerate() {
                out.line(format!("{} {} {}", rank + 1, r.name, estimate_text(&r.estimate, 1.0)));
            }
            out.line(format!("closest: {}", names(&cb, &closest)));
        }
        Format::Csv => {
            out.line(format!("rank,case,{CSV_HEADER},closest"));
            for (rank, r) in ranked.iter().enumerate() {
                out.line(format!(
                    "{},{},{},{}",
                    rank + 1,
                    r.name,
                    r.estimate.csv_row(),
                    u8::from(closest.contains(&r.index))
                ));
            }
        }
    }
    Ok(())
}

fn names(cb: &CaseBase, indices: &[usize]) -> String {
    indices.iter().map(|&i| cb.names()[i].as_str()).collect::<Vec<_>>().join(", ")
}

fn cmd_elicit(args: &ElicitArgs, out: &mut Output) -> CmdResult {
    let cb = read_casebase(&args.casebase)?;
    let config = args.common.config();
    config.validate()?;
    let target: WeakOrder = if args.target.contains(['<', '=']) {
        parse_weak_order(cb.space(), &read_arg(&args.target)?)?
    } else {
        cb.get(&args.target)?.order()
    };
    let log = run_elicitation(&target, &cb, args.budget, args.metric.into(), &config)?;
    match args.common.format {
        Format::Csv => {
            out.push(log.to_csv());
            out.line(format!("# final closest: {}", log.final_closest.join(", ")));
        }
        Format::Text => {
            for (i, s) in log.steps.iter().enumerate() {
                out.line(format!(
                    "{} {} {} {}: closest {}",
                    i + 1,
                    cb.space().label(s.query.0),
                    s.answer.symbol(),
                    cb.space().label(s.query.1),
                    names(&cb, &s.closest)
                ));
            }
            out.line(format!("final closest: {}", log.final_closest.join(", ")));
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut Output) -> CmdResult {
    let suites: Vec<&str> = if args.suite.is_empty() {
        verify::SUITES.to_vec()
    } else {
        args.suite.iter().map(String::as_str).collect()
    };
    let (mut total, mut failed) = (0, 0);
    for suite in suites {
        for check in verify::run_suite(suite)? {
            total += 1;
            failed += usize::from(!check.passed);
            out.line(check.to_string());
        }
    }
    out.line(format!("{total} checks, {failed} failed"));
    if failed > 0 {
        return Err(Failure::new(1, format!("{failed} of {total} checks failed")));
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut Output) -> CmdResult {
    match &cli.command {
        Command::Dist(a) => cmd_dist(a, out),
        Command::Linext(a) => cmd_linext(a, out),
        Command::Nearest(a) => cmd_nearest(a, out),
        Command::Elicit(a) => cmd_elicit(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

fn common(cli: &Cli) -> Option<&Common> {
    match &cli.command {
        Command::Dist(a) => Some(&a.common),
        Command::Linext(a) => match &a.action {
            LinextAction::Count(p) | LinextAction::Enumerate(p) | LinextAction::Sample(p) | LinextAction::Heights(p) => {
                Some(&p.common)
            }
        },
        Command::Nearest(a) => Some(&a.common),
        Command::Elicit(a) => Some(&a.common),
        Command::Verify(_) => None,
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Output::default();
    let result = run(&cli, &mut out);
    let (seed, path) = match common(&cli) {
        Some(c) => (c.seed, c.output.clone()),
        None => (0, None),
    };
    // output is written only after the command succeeded
    if let Err(f) = &result {
        print!("{}", out.text());
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let written = match path {
        Some(p) => {
            let manifest = Manifest {
                command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
                seed,
                version: format!("prefdist {}", env!("CARGO_PKG_VERSION")),
                started: start,
                stream_seed: derive_seed(seed, 0),
            };
            output::write_atomic(&p, &manifest, out.text())
        }
        None => {
            print!("{}", out.text());
            Ok(())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(2)
        }
    }
}
