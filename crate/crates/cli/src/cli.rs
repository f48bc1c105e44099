//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use ame_core::butson::{enumerate_bh, is_butson};
use ame_core::designs::{check_molh, molh_to_state, oa_to_state, state_to_molh, state_to_oa};
use ame_core::equivalence::{automorphisms, decide_slocc, lm_match, Branch, EquivalenceCertificate, Verdict};
use ame_core::reductions::{reduced_lm_filter, FilterVerdict};
use ame_core::states::{
    construct_ame43, construct_ame44, construct_ame5_phased, construct_ame5_prime, construct_ame64, construct_ghz,
    tensor_compose, uniformity,
};
use ame_core::{MinimalSupportState, SparseState};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::config::{thread_cap, Mode, OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::json::{self, CertificateJson, MatrixJson, MolhJson, OaJson, StateJson};
use crate::oa_text::{parse_oa_file, parse_oa_text, render_oa_text};
use crate::reproduce::{self, Params, ScenarioReport};

#[derive(Debug, Parser)]
#[command(name = "ame", version, about = "Minimal-support AME states and their local equivalence")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    #[arg(long, value_enum, default_value_t = Mode::Exact, global = true)]
    mode: Mode,
    /// Tolerance for floating-point comparisons.
    #[arg(long, default_value_t = ame_core::DEFAULT_TOLERANCE, global = true)]
    tolerance: f64,
    /// Search budget in permutation-assignment nodes.
    #[arg(long, default_value_t = 5_000_000, global = true)]
    max_nodes: u64,
    /// Seed for randomized scenarios.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    output: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit a named state as JSON.
    Construct {
        #[arg(value_enum)]
        name: StateName,
        /// Local dimension (ghz, ame5, ame5p).
        #[arg(long)]
        d: Option<usize>,
        /// Number of parties (ghz).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a file.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[arg(long)]
        file: PathBuf,
        /// Source state, for certificates.
        #[arg(long)]
        src: Option<PathBuf>,
        /// Target state, for certificates.
        #[arg(long)]
        dst: Option<PathBuf>,
    },
    /// Convert between states, orthogonal arrays and Latin hypercubes.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        to: ConvertTarget,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide local equivalence of two states.
    Equiv {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long, value_enum, default_value_t = EquivBranch::Full)]
        branch: EquivBranch,
        /// Also write the certificate here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the automorphisms of a minimal-support state.
    Autos {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = EquivBranch::Lm)]
        branch: EquivBranch,
    },
    /// Compare all (k+1)-party reductions of two minimal-support states.
    Filter {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
    },
    /// Monomial classes of Butson Hadamard matrices BH(d, d).
    EnumerateBh { d: usize },
    /// Run a regression scenario, or `all`.
    Reproduce {
        id: String,
        /// Local dimension for scenarios that take one.
        #[arg(long)]
        d: Option<usize>,
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StateName {
    Ghz,
    Ame43,
    Ame44,
    Ame64,
    Ame49,
    /// Phased five-party state of dimension --d.
    Ame5,
    /// Linear five-party state of prime dimension --d.
    Ame5p,
    Ame55,
    Ame55p,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Oa,
    State,
    Molh,
    Butson,
    Certificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConvertTarget {
    State,
    Oa,
    OaText,
    Molh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EquivBranch {
    /// Local monomial search only.
    Lm,
    /// The full decision procedure.
    Full,
}

/// Parse `argv` (program name first), run, and return the process exit code:
/// 0 for a produced verdict, 1 when `equiv` decides inequivalence, 2 on error.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let g = cli.global;
    let cfg = RunConfig::new(g.mode, g.tolerance, g.max_nodes, g.seed, g.output)?;
    match cli.command {
        Command::Construct { name, d, n, out: path } => {
            let s = construct(name, d, n)?;
            emit_document(out, path.as_deref(), &json::state_to_json(&s))?;
            Ok(0)
        }
        Command::Check { kind, file, src, dst } => check(&cfg, kind, &file, src.as_deref(), dst.as_deref(), out),
        Command::Convert { input, to, out: path } => convert(&cfg, &input, to, path.as_deref(), out),
        Command::Equiv { src, dst, branch, json: path } => equiv(&cfg, &src, &dst, branch, path.as_deref(), out),
        Command::Autos { state, branch } => autos(&cfg, &state, branch, out),
        Command::Filter { src, dst } => filter(&cfg, &src, &dst, out),
        Command::EnumerateBh { d } => {
            let reps = enumerate_bh(d)?;
            let doc: Vec<MatrixJson> = reps.iter().map(json::butson_to_json).collect();
            match cfg.output {
                OutputFormat::Json => write_line(out, &json::to_string(&doc))?,
                OutputFormat::Text => {
                    write_line(out, &format!("BH({d},{d}): {} monomial classes", reps.len()))?;
                    for (i, m) in reps.iter().enumerate() {
                        write_line(out, &format!("class {i}: complexity {}", m.complexity()))?;
                        for r in 0..d {
                            let row: Vec<String> = (0..d).map(|c| m.phase(r, c).to_string()).collect();
                            write_line(out, &format!("  {}", row.join(" ")))?;
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Reproduce { id, d, json: path } => reproduce_cmd(&cfg, &id, d, path.as_deref(), out),
    }
}

fn construct(name: StateName, d: Option<usize>, n: Option<usize>) -> CliResult<SparseState> {
    let need_d = || d.ok_or_else(|| CliError::Usage(format!("{name:?} needs --d")));
    Ok(match name {
        StateName::Ghz => construct_ghz(n.unwrap_or(3), need_d()?)?.to_sparse(),
        StateName::Ame43 => construct_ame43().to_sparse(),
        StateName::Ame44 => construct_ame44().to_sparse(),
        StateName::Ame64 => construct_ame64().to_sparse(),
        StateName::Ame49 => tensor_compose(&construct_ame43(), &construct_ame43())?.to_sparse(),
        StateName::Ame5 => construct_ame5_phased(need_d()?)?,
        StateName::Ame5p => construct_ame5_prime(need_d()?)?.to_sparse(),
        StateName::Ame55 => construct_ame5_phased(5)?,
        StateName::Ame55p => construct_ame5_prime(5)?.to_sparse(),
    })
}

fn write_line(out: &mut dyn Write, text: &str) -> CliResult<()> {
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, format!("{text}\n")).map_err(|e| CliError::io(path, e))
}

/// Documents (states, arrays, ...) are always JSON; to a file when one is given.
fn emit_document<T: Serialize>(out: &mut dyn Write, path: Option<&Path>, doc: &T) -> CliResult<()> {
    let text = json::to_string(doc);
    match path {
        Some(p) => write_file(p, &text),
        None => write_line(out, &text),
    }
}

pub fn read_state(cfg: &RunConfig, path: &Path) -> CliResult<SparseState> {
    let s = json::state_from_json(&json::read::<StateJson>(path)?)?;
    cfg.admit_state(&path.display().to_string(), &s)?;
    Ok(s)
}

fn read_minimal(cfg: &RunConfig, path: &Path) -> CliResult<MinimalSupportState> {
    Ok(MinimalSupportState::try_from_sparse(&read_state(cfg, path)?, cfg.tolerance)?)
}

fn check(
    cfg: &RunConfig,
    kind: CheckKind,
    file: &Path,
    src: Option<&Path>,
    dst: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let (ok, summary) = match kind {
        CheckKind::Oa => {
            let oa = parse_oa_file(file)?;
            let summary = format!(
                "OA({}, {}, {}, {}) with index {}",
                oa.runs(),
                oa.factors(),
                oa.levels(),
                oa.strength(),
                oa.index()
            );
            (true, summary)
        }
        CheckKind::State => {
            let s = read_state(cfg, file)?;
            let k = uniformity(&s, cfg.tolerance)?;
            let minimal = k > 0 && s.is_minimal_support(k);
            (true, format!("{}-party state, d = {}, {}-uniform, minimal support: {minimal}", s.n(), s.d(), k))
        }
        CheckKind::Molh => {
            let l = json::molh_from_json(&json::read::<MolhJson>(file)?)?;
            let c = check_molh(&l);
            (c.is_molh, c.diagnostic.unwrap_or_else(|| format!("{}-MOLH of size {}", l.k(), l.d())))
        }
        CheckKind::Butson => {
            let m: MatrixJson = json::read(file)?;
            let b = json::butson_from_json(&m)?;
            cfg.admit_phases("matrix", &b.phases())?;
            let q = b.complexity();
            (is_butson(b.order(), &b.phases(), q), format!("order {}, complexity {q}", b.order()))
        }
        CheckKind::Certificate => {
            let (Some(src), Some(dst)) = (src, dst) else {
                return Err(CliError::Usage("check certificate needs --src and --dst".into()));
            };
            let cert = json::certificate_from_json(&json::read::<CertificateJson>(file)?)?;
            let (a, b) = (read_state(cfg, src)?, read_state(cfg, dst)?);
            match cert.replay(&a, &b, cfg.tolerance)? {
                Some(ok) => (ok, format!("witness replay: {}", if ok { "maps src onto dst" } else { "FAILS" })),
                None => (true, "certificate has no witness to replay".into()),
            }
        }
    };
    match cfg.output {
        OutputFormat::Json => write_line(out, &json::to_string(&json!({ "valid": ok, "summary": summary })))?,
        OutputFormat::Text => write_line(out, &format!("{}: {summary}", if ok { "valid" } else { "INVALID" }))?,
    }
    Ok(if ok { 0 } else { 2 })
}

enum Document {
    State(SparseState),
    Oa(ame_core::designs::OrthogonalArray),
    Molh(ame_core::designs::LatinHypercube),
}

fn load_document(cfg: &RunConfig, path: &Path) -> CliResult<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let origin = path.display().to_string();
    let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else {
        return Ok(Document::Oa(parse_oa_text(&text)?));
    };
    if value.get("terms").is_some() {
        let s = json::state_from_json(&json::parse::<StateJson>(&text, &origin)?)?;
        cfg.admit_state(&origin, &s)?;
        Ok(Document::State(s))
    } else if value.get("rows").is_some() {
        Ok(Document::Oa(json::oa_from_json(&json::parse::<OaJson>(&text, &origin)?)?))
    } else if value.get("table").is_some() {
        Ok(Document::Molh(json::molh_from_json(&json::parse::<MolhJson>(&text, &origin)?)?))
    } else {
        Err(CliError::Usage(format!("{origin}: not a state, orthogonal array or hypercube document")))
    }
}

fn convert(
    cfg: &RunConfig,
    input: &Path,
    to: ConvertTarget,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let state = match load_document(cfg, input)? {
        Document::State(s) => MinimalSupportState::try_from_sparse(&s, cfg.tolerance)?,
        Document::Oa(oa) => oa_to_state(&oa, None)?,
        Document::Molh(l) => molh_to_state(&l)?,
    };
    match to {
        ConvertTarget::State => emit_document(out, path, &json::state_to_json(&state.to_sparse()))?,
        ConvertTarget::Oa => emit_document(out, path, &json::oa_to_json(&state_to_oa(&state)))?,
        ConvertTarget::Molh => emit_document(out, path, &json::molh_to_json(&state_to_molh(&state)?))?,
        ConvertTarget::OaText => {
            let text = render_oa_text(&state_to_oa(&state));
            match path {
                Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e))?,
                None => out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?,
            }
        }
    }
    Ok(0)
}

fn render_certificate(cert: &EquivalenceCertificate) -> String {
    let mut lines = Vec::new();
    match &cert.verdict {
        Verdict::Equivalent(w) => {
            lines.push("verdict: equivalent".to_string());
            lines.push(format!("witness: {}", w.describe()));
        }
        Verdict::Inequivalent(reason) => {
            lines.push("verdict: inequivalent".to_string());
            lines.push(format!("reason: {reason:?}"));
        }
        Verdict::Inconclusive(why) => {
            lines.push("verdict: inconclusive".to_string());
            lines.push(format!("reason: {why}"));
        }
    }
    let s = cert.stats;
    lines.push(format!("exact: {}", cert.exact));
    lines.push(format!(
        "search: {} nodes, {} support conflicts, {} condition prunes, {} solver calls, {} Butson candidates",
        s.nodes, s.support_conflicts, s.condition_prunes, s.solver_calls, s.butson_candidates
    ));
    lines.join("\n")
}

fn equiv(
    cfg: &RunConfig,
    src: &Path,
    dst: &Path,
    branch: EquivBranch,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let opts = cfg.search_options();
    let cert = match branch {
        EquivBranch::Lm => lm_match(&read_minimal(cfg, src)?, &read_minimal(cfg, dst)?, &opts)?,
        EquivBranch::Full => decide_slocc(&read_state(cfg, src)?, &read_state(cfg, dst)?, &opts)?,
    };
    let doc = json::certificate_to_json(&cert);
    if let Some(p) = path {
        write_file(p, &json::to_string(&doc))?;
    }
    match cfg.output {
        OutputFormat::Json => write_line(out, &json::to_string(&doc))?,
        OutputFormat::Text => write_line(out, &render_certificate(&cert))?,
    }
    Ok(if cert.is_inequivalent() { 1 } else { 0 })
}

fn autos(cfg: &RunConfig, state: &Path, branch: EquivBranch, out: &mut dyn Write) -> CliResult<i32> {
    let s = read_minimal(cfg, state)?;
    let branch = match branch {
        EquivBranch::Lm => Branch::Lm,
        EquivBranch::Full => Branch::LmButson,
    };
    let report = automorphisms(&s, branch, &cfg.search_options())?;
    match cfg.output {
        OutputFormat::Json => {
            let witnesses: Vec<_> = report.witnesses.iter().map(json::operator_to_json).collect();
            let doc = json!({ "complete": report.complete, "count": witnesses.len(), "witnesses": witnesses });
            write_line(out, &json::to_string(&doc))?;
        }
        OutputFormat::Text => {
            let status = if report.complete { "complete" } else { "incomplete (budget)" };
            write_line(out, &format!("{} automorphisms, search {status}", report.witnesses.len()))?;
            for w in &report.witnesses {
                write_line(out, &format!("  {}", w.describe()))?;
            }
        }
    }
    Ok(0)
}

fn filter(cfg: &RunConfig, src: &Path, dst: &Path, out: &mut dyn Write) -> CliResult<i32> {
    let report = reduced_lm_filter(&read_minimal(cfg, src)?, &read_minimal(cfg, dst)?, &cfg.search_options())?;
    let (verdict, subset) = match &report.verdict {
        FilterVerdict::Passed => ("passed", None),
        FilterVerdict::Failed { subset } => ("failed", Some(subset.clone())),
        FilterVerdict::Incomplete { subset } => ("incomplete", Some(subset.clone())),
    };
    match cfg.output {
        OutputFormat::Json => {
            let doc = json!({
                "verdict": verdict,
                "subset": subset,
                "examined": report.examined,
                "exact": report.exact,
                "stats": json::StatsJson::from(report.stats),
            });
            write_line(out, &json::to_string(&doc))?;
        }
        OutputFormat::Text => {
            let at = subset.map(|s| format!(" on parties {s:?}")).unwrap_or_default();
            write_line(out, &format!("filter {verdict}{at}; {} subsets examined", report.examined.len()))?;
        }
    }
    Ok(if matches!(report.verdict, FilterVerdict::Failed { .. }) { 1 } else { 0 })
}

fn render_report(r: &ScenarioReport) -> String {
    let mut lines = vec![format!("{} {} ({} ms)", if r.passed { "PASS" } else { "FAIL" }, r.id, r.elapsed_ms)];
    for c in &r.checks {
        lines.push(format!("  [{}] {}", if c.passed { "ok" } else { "FAILED" }, c.claim));
    }
    lines.join("\n")
}

fn reproduce_cmd(
    cfg: &RunConfig,
    id: &str,
    d: Option<usize>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let params = Params { d, seed: cfg.seed, options: cfg.search_options() };
    let reports = if id == "all" {
        let ids = reproduce::available();
        reproduce::reproduce_many(&ids, &params, thread_cap()?).into_iter().collect::<CliResult<Vec<_>>>()?
    } else {
        vec![reproduce::reproduce(id, &params)?]
    };
    let doc = if reports.len() == 1 { json::to_string(&reports[0]) } else { json::to_string(&reports) };
    if let Some(p) = path {
        write_file(p, &doc)?;
    }
    match cfg.output {
        OutputFormat::Json => write_line(out, &doc)?,
        OutputFormat::Text => {
            for r in &reports {
                write_line(out, &render_report(r))?;
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}
