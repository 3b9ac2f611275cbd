use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fluxfill::bench::{self, BenchInstance, DegradationConfig, StatsTable, Summary};
use fluxfill::completion::{self, SearchOptions, Semantics, SolveReport, Status};
use fluxfill::factio::{self, ParseOptions};
use fluxfill::linear::{FluxAssignment, DEFAULT_EPSILON};
use fluxfill::topology;
use fluxfill::verify::{self, VerificationReport};
use fluxfill::{Completion, Instance, ReactionId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Metabolic network completion under topological, strict, relaxed and
/// hybrid activation.
///
/// Instances are fact files; `-` reads standard input. Exit status is 0 on
/// success, 1 when no completion exists or a check fails, 2 on usage or
/// input errors.
#[derive(Parser)]
#[command(name = "fluxfill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find minimum-size completions.
    Complete(CompleteArgs),
    /// Check whether the draft network alone activates the targets.
    Check(CheckArgs),
    /// Print the compounds reachable from the seeds in the draft network.
    Scope(ScopeArgs),
    /// Evaluate a given completion under all four semantics.
    Verify(VerifyArgs),
    /// Remove reactions from a network until its targets are inactive.
    Degrade(DegradeArgs),
    /// Solve a corpus of instances and print the quality table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance file, or `-` for standard input.
    instance: PathBuf,
    /// Bounds `LB:UB` for reactions without a bounds fact.
    #[arg(long, value_name = "LB:UB", value_parser = parse_bounds)]
    default_bounds: Option<(f64, f64)>,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    input: InputArgs,
    /// topo, strict, relaxed or hybrid.
    #[arg(long, default_value = "hybrid")]
    semantics: Semantics,
    /// List every minimum-size completion, at most N of them
    /// (`--enumerate=N`).
    #[arg(long, value_name = "N", num_args = 0..=1, require_equals = true)]
    enumerate: Option<Option<usize>>,
    /// Enumerate and verify the union of the minimum-size completions.
    #[arg(long)]
    union: bool,
    /// Check flux feasibility once P percent of the candidates is decided.
    #[arg(long, value_name = "P", default_value_t = 0)]
    prop: u8,
    /// Learn from infeasible subsystems once C percent is decided.
    #[arg(long, value_name = "C", default_value_t = 100)]
    core: u8,
    /// Minimum flux of an active target.
    #[arg(long, value_name = "E", default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Give up after S seconds.
    #[arg(long, value_name = "S")]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// strict or relaxed.
    #[arg(long, default_value = "strict")]
    semantics: Semantics,
    #[arg(long, value_name = "E", default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct ScopeArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Semantics that decides the exit status.
    #[arg(long, default_value = "hybrid")]
    semantics: Semantics,
    /// Comma-separated reference reactions; empty for the draft alone.
    #[arg(long, value_name = "R1,R2,...", value_parser = parse_completion)]
    completion: Completion,
    #[arg(long, value_name = "E", default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct DegradeArgs {
    /// Complete network: draft and reference of this instance together.
    /// Without it a synthetic network is generated.
    network: Option<PathBuf>,
    #[arg(long, value_name = "LB:UB", value_parser = parse_bounds)]
    default_bounds: Option<(f64, f64)>,
    /// Targets to deactivate; defaults to the instance targets.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<ReactionId>,
    /// Share of the reactions to remove at least.
    #[arg(long, default_value_t = 0.2)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reactions in the synthetic network.
    #[arg(long, default_value_t = 100)]
    size: usize,
    /// Targets picked in the synthetic network.
    #[arg(long = "target-count", default_value_t = 2)]
    target_count: usize,
    /// Write the instance here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; without them a synthetic corpus is generated.
    instances: Vec<PathBuf>,
    #[arg(long, value_name = "LB:UB", value_parser = parse_bounds)]
    default_bounds: Option<(f64, f64)>,
    /// Comma-separated semantics to run.
    #[arg(long, value_delimiter = ',', default_value = "hybrid,topological")]
    semantics: Vec<Semantics>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Degradation fractions of the synthetic corpus.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    fractions: Vec<f64>,
    /// Synthetic instances per fraction.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 100)]
    size: usize,
    #[arg(long = "target-count", default_value_t = 2)]
    target_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Completions enumerated per instance at most.
    #[arg(long, default_value_t = 200)]
    enumerate_limit: usize,
    /// Seconds per instance and semantics.
    #[arg(long, value_name = "S")]
    time_limit: Option<f64>,
    /// Write one CSV row per instance and semantics to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

/// Error carrying the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

impl From<fluxfill::Error> for Failure {
    fn from(e: fluxfill::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::Complete(a) => complete(&a, &mut out),
        Command::Check(a) => check(&a, &mut out),
        Command::Scope(a) => scope(&a, &mut out),
        Command::Verify(a) => verify(&a, &mut out),
        Command::Degrade(a) => degrade(&a, &mut out),
        Command::Bench(a) => run_bench(&a, &mut out),
    };
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::SUCCESS,
        (Ok(false), Ok(())) => ExitCode::from(1),
        (Ok(_), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        (Err(f), _) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lb, ub) = s.split_once(':').ok_or("expected LB:UB")?;
    let lb: f64 = lb.trim().parse().map_err(|e| format!("lower bound: {e}"))?;
    let ub: f64 = ub.trim().parse().map_err(|e| format!("upper bound: {e}"))?;
    if lb > ub {
        return Err("lower bound exceeds upper bound".into());
    }
    Ok((lb, ub))
}

fn parse_completion(s: &str) -> Result<Completion, String> {
    let ids = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<ReactionId>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Completion::new(ids))
}

fn read_source(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")?;
        Ok(text)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load(path: &Path, default_bounds: Option<(f64, f64)>) -> anyhow::Result<Instance> {
    let text = read_source(path)?;
    let opts = ParseOptions { default_bounds };
    factio::parse_facts_with(&text, &opts).with_context(|| format!("parsing {}", path.display()))
}

fn json_line(out: &mut impl Write, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// Six significant digits, shortest form.
fn format_flux(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn write_flux(out: &mut impl Write, flux: &FluxAssignment) -> io::Result<()> {
    for (id, v) in flux.iter() {
        let shown = format_flux(v);
        if shown.parse::<f64>().is_ok_and(|x| x != 0.0) {
            writeln!(out, "{id}\t{shown}")?;
        }
    }
    Ok(())
}

fn write_completion(out: &mut impl Write, c: &Completion) -> io::Result<()> {
    for id in c.iter() {
        writeln!(out, "completion({id})")?;
    }
    Ok(())
}

fn complete(a: &CompleteArgs, out: &mut impl Write) -> Outcome {
    let instance = load(&a.input.instance, a.input.default_bounds)?;
    let limit = match a.enumerate {
        Some(n) => n,
        None if a.union => None,
        None => Some(1),
    };
    let opts = SearchOptions {
        prop_percent: a.prop,
        core_percent: a.core,
        enumerate_limit: limit,
        time_limit: a.time_limit.map(duration).transpose()?,
        epsilon_act: a.epsilon,
        ..SearchOptions::default()
    };
    let enumerate = a.enumerate.is_some() || a.union;
    if a.union {
        let u = completion::union_of_minimal(&instance, a.semantics, &opts)?;
        if a.input.json {
            json_line(out, &u)?;
        } else {
            write_report(out, &u.report)?;
            writeln!(out, "% union of {} completions", u.report.completions.len())?;
            write_completion(out, &u.union)?;
            writeln!(
                out,
                "% union {}: {}",
                u.report.semantics,
                verdict(u.verified)
            )?;
            writeln!(out, "% union hybrid: {}", verdict(u.hybrid_verified))?;
        }
        return Ok(has_solutions(&u.report) && u.verified);
    }
    let report = if enumerate {
        completion::enumerate_minimal(&instance, a.semantics, &opts)?
    } else {
        completion::solve_completion(&instance, a.semantics, &opts)?
    };
    if a.input.json {
        json_line(out, &report)?;
    } else {
        write_report(out, &report)?;
    }
    Ok(has_solutions(&report))
}

fn duration(seconds: f64) -> anyhow::Result<Duration> {
    Duration::try_from_secs_f64(seconds).context("time limit must be a non-negative number")
}

fn has_solutions(report: &SolveReport) -> bool {
    matches!(report.status, Status::Optimal | Status::Suboptimal) && !report.completions.is_empty()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn write_report(out: &mut impl Write, report: &SolveReport) -> io::Result<()> {
    writeln!(out, "% {} semantics: {}", report.semantics, report.status)?;
    if let Some(k) = report.optimum_size {
        writeln!(out, "% optimum size {k}")?;
    }
    let many = report.completions.len() > 1;
    for (i, s) in report.completions.iter().enumerate() {
        if many {
            writeln!(out, "% solution {}", i + 1)?;
        }
        write_completion(out, &s.completion)?;
        if let Some(flux) = &s.flux {
            write_flux(out, flux)?;
        }
    }
    if let Some(v) = report.objective_flux {
        writeln!(out, "% objective {}", format_flux(v))?;
    }
    if report.truncated {
        writeln!(out, "% enumeration truncated")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    semantics: Semantics,
    active: bool,
    witness: Option<FluxAssignment>,
}

fn check(a: &CheckArgs, out: &mut impl Write) -> Outcome {
    if a.semantics.balance().is_none() || a.semantics.is_topological() {
        return usage("check takes --semantics strict or relaxed");
    }
    let instance = load(&a.input.instance, a.input.default_bounds)?;
    let v = verify::verify_completion_with(&instance, &Completion::empty(), a.epsilon)?;
    let active = v.satisfies(a.semantics);
    let report = CheckReport {
        semantics: a.semantics,
        active,
        witness: if active { v.witness } else { None },
    };
    if a.input.json {
        json_line(out, &report)?;
    } else {
        writeln!(out, "{}", if active { "active" } else { "inactive" })?;
        if let Some(w) = &report.witness {
            write_flux(out, w)?;
        }
    }
    Ok(active)
}

fn scope(a: &ScopeArgs, out: &mut impl Write) -> Outcome {
    let instance = load(&a.input.instance, a.input.default_bounds)?;
    let net = instance.draft().expand_reversible()?;
    let sc = topology::scope(&net, instance.seeds())?;
    if a.input.json {
        json_line(out, &sc.reachable)?;
    } else {
        for m in &sc.reachable {
            writeln!(out, "{m}")?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    semantics: Semantics,
    completion: &'a Completion,
    satisfied: bool,
    report: &'a VerificationReport,
}

fn verify(a: &VerifyArgs, out: &mut impl Write) -> Outcome {
    let instance = load(&a.input.instance, a.input.default_bounds)?;
    let completion = &a.completion;
    let report = verify::verify_completion_with(&instance, completion, a.epsilon)?;
    let satisfied = report.satisfies(a.semantics);
    if a.input.json {
        json_line(
            out,
            &VerifyOutput {
                semantics: a.semantics,
                completion,
                satisfied,
                report: &report,
            },
        )?;
    } else {
        for sem in Semantics::ALL {
            writeln!(out, "{sem}\t{}", verdict(report.satisfies(sem)))?;
        }
        if let Some(w) = &report.witness {
            write_flux(out, w)?;
        }
    }
    Ok(satisfied)
}

fn degrade(a: &DegradeArgs, out: &mut impl Write) -> Outcome {
    let cfg = DegradationConfig {
        fraction: a.fraction,
        rng_seed: a.seed,
        targets_per_instance: a.target_count,
        instances: 1,
    };
    cfg.validate()?;
    let (net, mut targets) = match &a.network {
        Some(path) => {
            let instance = load(path, a.default_bounds)?;
            let net = instance.draft().union(instance.reference())?;
            (net, instance.targets().clone())
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let (net, seeds) = bench::synthetic_network(a.size, &mut rng);
            let targets = bench::pick_targets(&net, &seeds, a.target_count, &mut rng)?;
            (net, targets)
        }
    };
    if !a.targets.is_empty() {
        targets = a.targets.iter().cloned().collect();
    }
    if targets.is_empty() {
        return usage("no targets to deactivate");
    }
    let instance = bench::degrade(&net, &targets, &cfg)?;
    let mut sink: Box<dyn Write> = match &a.output {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(&mut *out),
    };
    if a.json {
        json_line(&mut sink, &instance)?;
    } else {
        sink.write_all(factio::emit_facts(&instance).as_bytes())?;
    }
    sink.flush()?;
    Ok(true)
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    rows: &'a StatsTable,
    summary: Vec<Summary>,
}

fn run_bench(a: &BenchArgs, out: &mut impl Write) -> Outcome {
    let instances = if a.instances.is_empty() {
        let mut all = Vec::new();
        for (i, &fraction) in a.fractions.iter().enumerate() {
            let cfg = DegradationConfig {
                fraction,
                rng_seed: a.seed.wrapping_add(i as u64),
                targets_per_instance: a.target_count,
                instances: a.count,
            };
            all.extend(bench::synthetic_corpus(a.size, &cfg)?);
        }
        all
    } else {
        let mut all = Vec::new();
        let mut seen = BTreeSet::new();
        for p in &a.instances {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "stdin".into());
            if !seen.insert(stem.clone()) {
                return usage(format!("duplicate instance name `{stem}`"));
            }
            all.push(BenchInstance {
                id: stem,
                instance: load(p, a.default_bounds)?,
            });
        }
        all
    };
    let workers = match a.workers {
        Some(0) => return usage("workers must be positive"),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let opts = SearchOptions {
        enumerate_limit: Some(a.enumerate_limit),
        time_limit: a.time_limit.map(duration).transpose()?,
        ..SearchOptions::default()
    };
    opts.validate()?;
    let table = bench::run_experiment(&instances, &a.semantics, &opts, workers)?;
    if let Some(p) = &a.csv {
        let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        table
            .write_csv(file)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if a.json {
        json_line(
            out,
            &BenchOutput {
                rows: &table,
                summary: table.summary(),
            },
        )?;
    } else {
        out.write_all(table.render().as_bytes())?;
    }
    Ok(table.rows.iter().all(|r| !r.status.starts_with("error")))
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(anyhow!(msg.into()).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_flux(49999.5), "49999.5");
        assert_eq!(format_flux(99999.0), "99999");
        assert_eq!(format_flux(1.0 / 3.0), "0.333333");
        assert_eq!(format_flux(123456789.0), "123457000");
        assert_eq!(format_flux(-2.5e-7), "-0.00000025");
        assert_eq!(format_flux(1e-300 * 1e-300), "0");
    }

    #[test]
    fn bounds_flag() {
        assert_eq!(parse_bounds("0:99999"), Ok((0.0, 99999.0)));
        assert_eq!(parse_bounds("-5: 5"), Ok((-5.0, 5.0)));
        assert!(parse_bounds("5:0").is_err());
        assert!(parse_bounds("5").is_err());
    }

    #[test]
    fn completion_flag() {
        assert!(parse_completion("").unwrap().is_empty());
        assert_eq!(parse_completion("r9, r6").unwrap().len(), 2);
        assert!(parse_completion("9r").is_err());
    }
}
