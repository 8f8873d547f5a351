//! Command-line front end for `wdetect-core`.
//!
//! Exit status: 0 on success, 1 when a computation fails, 2 on usage
//! errors (bad flags, out-of-range values, unreadable or malformed input
//! files). `detect --exit-verdict` exits 0 when entanglement is detected
//! and 3 when it is not.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use wdetect_core::experiment::{
    phase_scan, prepare_mixed_w, sweep_critical_efficiency, BetaRule, DetectorModel, Estimation, ExperimentConfig,
    ExperimentReport, PhaseScanOptions, Scheme, SchemeOptions, Verdict,
};
use wdetect_core::fock::MixedState;
use wdetect_core::optics::{synthesize_w_network, Element, WStateSpec};
use wdetect_core::witness::{
    alpha_modified, alpha_w, critical_efficiency_from_alpha, max_schmidt_alpha, optimize_reference, AnsatzSearch,
    IdentityTerm, ReferenceSearch, DEFAULT_SEED,
};

mod format;

pub use format::{emit_report, round_sig, Output, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_DETECTED: i32 = 3;

/// Deviation from unit norm above which parsed coefficients trigger a
/// normalization warning.
pub const NORMALIZATION_WARN: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(anyhow::Error),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        Self::Compute(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "wdetect", version, about = "Entanglement witnesses for single-photon W states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Witness constant α of a W state, or of the modified witness with --beta
    Alpha(AlphaArgs),
    /// Beam-splitter/phase-shifter network preparing a W state
    Synth(SynthArgs),
    /// Simulate a scheme and report click statistics
    Simulate(RunArgs),
    /// Simulate a scheme and report the verdict
    Detect(DetectArgs),
    /// Critical efficiency of the modified scheme over a range of N
    Sweep(SweepArgs),
    /// Reference W state minimizing the overall efficiency needed for detection
    OptimizeRef(OptimizeArgs),
    /// Scan local phase compensation in front of the disentangler
    PhaseScan(PhaseScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format [default: text, csv for sweep]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// W-state coefficients: comma-separated reals (normalized on load),
    /// inline JSON {"coeffs":[{"re":..,"im":..},..]}, or @file.json
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    /// Number of modes
    #[arg(long)]
    n: Option<usize>,
    /// Use the symmetric W state on --n modes
    #[arg(long, conflicts_with = "coeffs")]
    symmetric: bool,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Modified-witness weight β; switches to the modified witness on N modes
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Cross-check against the Schmidt decomposition route
    #[arg(long)]
    schmidt: bool,
    /// Seed for the modified-witness ansatz search
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Grid points per angle for the modified-witness ansatz search
    #[arg(long, default_value_t = 181)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Emit the inverse (disentangling) network
    #[arg(long)]
    inverse: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Single,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IdentityArg {
    UpToTwo,
    Full,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Experiment config JSON; replaces the spec and parameter flags
    #[arg(long, conflicts_with_all = ["coeffs", "n", "symmetric", "eta", "ps", "beta", "scheme", "reference"])]
    input: Option<PathBuf>,
    /// Detector efficiency η
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Source success probability p_S
    #[arg(long, allow_negative_numbers = true)]
    ps: Option<f64>,
    /// Modified-witness weight β [default: (1 − 10⁻³)/(N − 1)]
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "single")]
    scheme: SchemeArg,
    /// Reference W state for the single-setting scheme (same syntax as
    /// --coeffs, or "symmetric") [default: the prepared state]
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<String>,
    /// Sample this many shots per setting instead of exact probabilities
    #[arg(long)]
    shots: Option<usize>,
    /// Seed for shot sampling and the modified-witness ansatz search
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Click/no-click detectors instead of number-resolving ones
    #[arg(long)]
    click_detectors: bool,
    /// Identity term of the modified witness
    #[arg(long, value_enum, default_value = "up-to-two")]
    identity: IdentityArg,
    /// Estimate the ≤2-photon weight from lossy counts
    #[arg(long)]
    lossy_identity: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Exit 0 when detected, 3 when not
    #[arg(long)]
    exit_verdict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetaRuleArg {
    NearOne,
    Fixed,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Inclusive range of N, e.g. 3..10 (or a single N)
    #[arg(long)]
    n: String,
    #[arg(long, value_enum, default_value = "near-one")]
    beta_rule: BetaRuleArg,
    /// β for --beta-rule fixed
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// 1 − (N − 1)β for --beta-rule near-one
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    gap: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Grid points per angle for the ansatz search
    #[arg(long, default_value_t = 181)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random starts in addition to the symmetric and target starts
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PhaseScanArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Extra local phases applied to the prepared state, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    phases: Option<String>,
    /// Reference W state [default: symmetric]
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<String>,
    /// Grid points per mode on [0, 2π)
    #[arg(long, default_value_t = 24)]
    grid: usize,
    /// Polish the best grid point with a simplex search
    #[arg(long)]
    refine: bool,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    eta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ps: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses `args` (without the program name) and runs the command, writing
/// the report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("wdetect")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Compute(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_COMPUTE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let (output, args) = match command {
        Command::Alpha(a) => {
            let format = check_format(&a.output, Format::Text, false)?;
            (alpha_cmd(&a, err)?, (format, a.output.out))
        }
        Command::Synth(a) => {
            let format = check_format(&a.output, Format::Text, false)?;
            (synth_cmd(&a, err)?, (format, a.output.out))
        }
        Command::Simulate(a) => {
            let format = check_format(&a.output, Format::Text, false)?;
            let report = run_scheme(&a, err)?;
            (simulate_output(&report), (format, a.output.out))
        }
        Command::Detect(a) => {
            let format = check_format(&a.run.output, Format::Text, false)?;
            let report = run_scheme(&a.run, err)?;
            let code = match (a.exit_verdict, report.verdict) {
                (true, Verdict::NotDetected) => EXIT_NOT_DETECTED,
                _ => EXIT_OK,
            };
            write_output(&detect_output(&report), format, a.run.output.out.as_deref(), out)?;
            return Ok(code);
        }
        Command::Sweep(a) => {
            let format = check_format(&a.output, Format::Csv, true)?;
            (sweep_cmd(&a)?, (format, a.output.out))
        }
        Command::OptimizeRef(a) => {
            let format = check_format(&a.output, Format::Text, false)?;
            (optimize_cmd(&a, err)?, (format, a.output.out))
        }
        Command::PhaseScan(a) => {
            let format = check_format(&a.output, Format::Text, false)?;
            (phase_scan_cmd(&a, err)?, (format, a.output.out))
        }
    };
    write_output(&output, args.0, args.1.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn check_format(output: &OutputArgs, default: Format, tabular: bool) -> CliResult<Format> {
    let format = output.format.unwrap_or(default);
    if format == Format::Csv && !tabular {
        return Err(CliError::usage("csv output is only available for tabular reports (sweep)"));
    }
    Ok(format)
}

fn write_output(output: &Output, format: Format, path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let text = emit_report(output, format).map_err(CliError::Usage)?;
    match path {
        Some(p) => fs::write(p, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn probability_flag(name: &str, value: Option<f64>) -> CliResult<f64> {
    let v = value.ok_or_else(|| CliError::usage(format!("--{name} is required")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::usage(format!("--{name} must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

fn resolve_spec(args: &SpecArgs, err: &mut dyn Write) -> CliResult<WStateSpec> {
    let spec = match (&args.coeffs, args.symmetric, args.n) {
        (Some(c), _, _) => parse_spec_arg(c, err)?,
        (None, true, Some(n)) if n >= 1 => WStateSpec::symmetric(n),
        (None, true, _) => return Err(CliError::usage("--symmetric needs --n >= 1")),
        (None, false, _) => return Err(CliError::usage("give --coeffs or --n with --symmetric")),
    };
    if let Some(n) = args.n {
        if n != spec.modes() {
            return Err(CliError::usage(format!("--n {n} does not match {} coefficients", spec.modes())));
        }
    }
    Ok(spec)
}

/// Parses a W-state argument: comma-separated reals, inline JSON or
/// `@path` to a JSON file. JSON may be a spec object, an object with a
/// `candidate` spec (the `optimize-ref` report), or a bare coefficient
/// array; coefficients are numbers, `{"re","im"}` objects or `[re, im]`.
pub fn parse_spec_arg(arg: &str, err: &mut dyn Write) -> CliResult<WStateSpec> {
    let arg = arg.trim();
    let coeffs = if let Some(path) = arg.strip_prefix('@') {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
        coeffs_from_json(&parse_json(&text, path)?)?
    } else if arg.starts_with('{') || arg.starts_with('[') {
        coeffs_from_json(&parse_json(arg, "--coeffs")?)?
    } else {
        arg.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map(|re| Complex64::new(re, 0.0))
                    .map_err(|_| CliError::usage(format!("bad coefficient {s:?}")))
            })
            .collect::<CliResult<Vec<_>>>()?
    };
    normalize_with_warning(coeffs, err)
}

fn normalize_with_warning(coeffs: Vec<Complex64>, err: &mut dyn Write) -> CliResult<WStateSpec> {
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(CliError::usage("coefficients must be finite"));
    }
    let (spec, deviation) = WStateSpec::normalized(coeffs)?;
    if deviation > NORMALIZATION_WARN {
        let _ = writeln!(err, "warning: coefficients normalized (|sum |c|^2 - 1| = {deviation:.3e})");
    }
    Ok(spec)
}

fn parse_json(text: &str, origin: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::usage(format!("{origin}: malformed JSON: {e}")))
}

fn coeffs_from_json(v: &Value) -> CliResult<Vec<Complex64>> {
    let list = match v {
        Value::Array(list) => list,
        Value::Object(map) => {
            if let Some(c) = map.get("coeffs") {
                return coeffs_from_json(c);
            }
            if let Some(c) = map.get("candidate") {
                return coeffs_from_json(c);
            }
            return Err(CliError::usage("spec JSON needs a \"coeffs\" array"));
        }
        _ => return Err(CliError::usage("spec JSON needs a \"coeffs\" array")),
    };
    list.iter()
        .map(|c| {
            let num = |x: Option<&Value>| x.and_then(Value::as_f64);
            let parsed = match c {
                Value::Number(_) => num(Some(c)).map(|re| Complex64::new(re, 0.0)),
                Value::Array(p) if p.len() == 2 => num(p.first()).zip(num(p.get(1))).map(|(re, im)| Complex64::new(re, im)),
                Value::Object(m) => num(m.get("re"))
                    .map(|re| Complex64::new(re, num(m.get("im")).unwrap_or(0.0))),
                _ => None,
            };
            parsed.ok_or_else(|| CliError::usage(format!("bad coefficient {c}")))
        })
        .collect()
}

fn alpha_cmd(a: &AlphaArgs, err: &mut dyn Write) -> CliResult<Output> {
    if let Some(beta) = a.beta {
        let n = match (&a.spec.coeffs, a.spec.n) {
            (Some(_), _) => resolve_spec(&a.spec, err)?.modes(),
            (None, Some(n)) => n,
            (None, None) => return Err(CliError::usage("--beta needs --n or --coeffs")),
        };
        if a.grid < 2 {
            return Err(CliError::usage("--grid must be at least 2"));
        }
        let search = AnsatzSearch {
            grid: a.grid,
            seed: a.seed,
            ..AnsatzSearch::default()
        };
        let m = alpha_modified(n, beta, &search)?;
        let e_c = critical_efficiency_from_alpha(n, beta, m.alpha);
        let json = json!({
            "type": "modified",
            "N": n,
            "beta": beta,
            "alpha": m.alpha,
            "e_c": e_c,
            "ansatz": m.ansatz,
            "optimizer": m.optimizer,
        });
        let text = format!(
            "alpha: {}\ne_c: {}\nansatz: k = {}, theta1 = {}, theta2 = {}\n",
            format::text_num(m.alpha),
            format::text_num(e_c),
            m.ansatz.k,
            format::text_num(m.ansatz.theta1),
            format::text_num(m.ansatz.theta2)
        );
        return Ok(Output::new(json, text));
    }

    let spec = resolve_spec(&a.spec, err)?;
    let alpha = alpha_w(&spec);
    let mut json = json!({ "type": "basic", "alpha": alpha, "spec": spec });
    let mut text = format!("{}\n", format::text_num(alpha));
    if a.schmidt {
        let (schmidt, split) = max_schmidt_alpha(&spec.to_state(2)?)?;
        let side: Vec<usize> = (0..spec.modes()).filter(|&m| split.partition[m]).collect();
        json["schmidt"] = json!({ "alpha": schmidt, "side": side });
        text.push_str(&format!(
            "schmidt: {} (modes {side:?} against the rest)\n",
            format::text_num(schmidt)
        ));
    }
    Ok(Output::new(json, text))
}

fn synth_cmd(a: &SynthArgs, err: &mut dyn Write) -> CliResult<Output> {
    let spec = resolve_spec(&a.spec, err)?;
    let mut net = synthesize_w_network(&spec)?;
    if a.inverse {
        net = net.inverse();
    }
    let mut text = format!("{} modes, {} elements\n", net.modes(), net.elements().len());
    for e in net.elements() {
        text.push_str(&match e {
            Element::BeamSplitter { mode, theta } => {
                format!("bs  modes {},{}  theta = {}\n", mode, mode + 1, format::text_num(*theta))
            }
            Element::PhaseShifter { mode, phi } => format!("ps  mode {mode}  phi = {}\n", format::text_num(*phi)),
        });
    }
    Ok(Output::new(serde_json::to_value(&net)?, text))
}

fn run_scheme(a: &RunArgs, err: &mut dyn Write) -> CliResult<ExperimentReport> {
    let config = match &a.input {
        Some(path) => load_config(path, err)?,
        None => {
            let spec = resolve_spec(&a.spec, err)?;
            let reference = match a.reference.as_deref() {
                None => None,
                Some("symmetric") => Some(WStateSpec::symmetric(spec.modes())),
                Some(r) => Some(parse_spec_arg(r, err)?),
            };
            ExperimentConfig {
                p_success: probability_flag("ps", a.ps)?,
                efficiency: probability_flag("eta", a.eta)?,
                beta: a.beta,
                scheme: match a.scheme {
                    SchemeArg::Single => Scheme::Single,
                    SchemeArg::Modified => Scheme::Modified,
                },
                reference,
                spec,
            }
        }
    };
    let mut config = config;
    let n = config.spec.modes();
    if config.scheme == Scheme::Modified {
        if n < 3 {
            return Err(CliError::usage("the modified scheme needs at least 3 modes"));
        }
        let beta = *config.beta.get_or_insert_with(|| BetaRule::default().beta(n));
        if !(beta >= 0.0 && (n - 1) as f64 * beta < 1.0) {
            return Err(CliError::usage(format!("--beta must satisfy 0 <= (N-1)*beta < 1, got {beta}")));
        }
        if !config.spec.is_symmetric_up_to_phases(1e-9) {
            let _ = writeln!(err, "warning: the modified scheme measures against the symmetric W_{n}");
        }
        if config.reference.is_some() {
            let _ = writeln!(err, "warning: --reference is ignored by the modified scheme");
        }
    }
    if let Some(r) = &config.reference {
        if r.modes() != n {
            return Err(CliError::usage(format!("reference has {} modes, spec has {n}", r.modes())));
        }
    }
    let estimation = match a.shots {
        None => Estimation::Exact,
        Some(0) => return Err(CliError::usage("--shots must be positive")),
        Some(shots) => Estimation::Shots { shots, seed: a.seed },
    };
    let options = SchemeOptions {
        estimation,
        search: AnsatzSearch {
            seed: a.seed,
            ..AnsatzSearch::default()
        },
        identity: match a.identity {
            IdentityArg::UpToTwo => IdentityTerm::UpToTwoQuanta,
            IdentityArg::Full => IdentityTerm::Full,
        },
        lossy_identity_estimate: a.lossy_identity,
    };
    let det = DetectorModel::new(config.efficiency)?.with_number_resolving(!a.click_detectors);
    Ok(config.run(det, &options)?)
}

fn load_config(path: &Path, err: &mut dyn Write) -> CliResult<ExperimentConfig> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {origin}: {e}")))?;
    let v = parse_json(&text, &origin)?;
    let field = |name: &str| v.get(name).filter(|x| !x.is_null());
    let num = |name: &str| -> CliResult<Option<f64>> {
        field(name)
            .map(|x| x.as_f64().ok_or_else(|| CliError::usage(format!("{origin}: \"{name}\" must be a number"))))
            .transpose()
    };
    let spec = field("spec").ok_or_else(|| CliError::usage(format!("{origin}: missing \"spec\"")))?;
    let spec = normalize_with_warning(coeffs_from_json(spec)?, err)?;
    let reference = field("reference")
        .map(|r| coeffs_from_json(r).and_then(|c| normalize_with_warning(c, err)))
        .transpose()?;
    let scheme = match field("scheme").and_then(Value::as_str) {
        Some("single") => Scheme::Single,
        Some("modified") => Scheme::Modified,
        _ => return Err(CliError::usage(format!("{origin}: \"scheme\" must be \"single\" or \"modified\""))),
    };
    Ok(ExperimentConfig {
        spec,
        p_success: probability_flag("ps", num("p_success")?)
            .map_err(|_| CliError::usage(format!("{origin}: \"p_success\" must be a probability")))?,
        efficiency: probability_flag("eta", num("efficiency")?)
            .map_err(|_| CliError::usage(format!("{origin}: \"efficiency\" must be a probability")))?,
        beta: num("beta")?,
        scheme,
        reference,
    })
}

fn report_json(report: &ExperimentReport) -> CliResult<Value> {
    Ok(serde_json::to_value(report)?)
}

fn summary_text(r: &ExperimentReport) -> String {
    let p = &r.parameters;
    let mut s = format!(
        "scheme: {}\nmodes: {}\neta: {}\n",
        match r.scheme {
            Scheme::Single => "single",
            Scheme::Modified => "modified",
        },
        p.modes,
        format::text_num(p.efficiency)
    );
    if let Some(ps) = p.p_success {
        s.push_str(&format!("p_S: {}\n", format::text_num(ps)));
    }
    if let Some(beta) = p.beta {
        s.push_str(&format!("beta: {}\n", format::text_num(beta)));
    }
    s.push_str(&format!("alpha: {}\n", format::text_num(r.witness.alpha)));
    if let Some(e) = r.overall_efficiency {
        s.push_str(&format!("overall efficiency (eta*p_S): {}\n", format::text_num(e)));
    }
    if let Some(t) = r.threshold {
        s.push_str(&format!("threshold: {}\n", format::text_num(t)));
    }
    s.push_str(&format!("witness value: {}\n", format::text_num(r.witness_value)));
    s.push_str(&format!("verdict: {}\n", r.verdict));
    s
}

fn simulate_output(r: &ExperimentReport) -> Output {
    let mut text = summary_text(r);
    for o in &r.settings {
        text.push_str(&format!(
            "\nsetting {} (accept {}): {}\n",
            o.label,
            o.accept_pattern,
            format::text_num(o.accept_probability)
        ));
        for c in &o.clicks {
            text.push_str(&format!("  {}  {}\n", c.pattern, format::text_num(c.probability)));
        }
    }
    Output::new(report_json(r).unwrap_or(Value::Null), text)
}

fn detect_output(r: &ExperimentReport) -> Output {
    Output::new(report_json(r).unwrap_or(Value::Null), summary_text(r))
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single `a`.
fn parse_range(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("bad range {s:?}; expected e.g. 3..10"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b.strip_prefix('=').unwrap_or(b))?)),
        None => num(s).map(|n| (n, n)),
    }
}

fn sweep_cmd(a: &SweepArgs) -> CliResult<Output> {
    let (n_min, n_max) = parse_range(&a.n)?;
    if !(3 <= n_min && n_min <= n_max && n_max <= 15) {
        return Err(CliError::usage(format!("--n range must satisfy 3 <= min <= max <= 15, got {}", a.n)));
    }
    let rule = match a.beta_rule {
        BetaRuleArg::NearOne => {
            if !(a.gap > 0.0 && a.gap <= 1.0) {
                return Err(CliError::usage("--gap must lie in (0, 1]"));
            }
            BetaRule::NearOne { gap: a.gap }
        }
        BetaRuleArg::Fixed => {
            let beta = a.beta.ok_or_else(|| CliError::usage("--beta-rule fixed needs --beta"))?;
            if !(beta >= 0.0 && (n_max - 1) as f64 * beta < 1.0) {
                return Err(CliError::usage(format!("--beta must satisfy 0 <= (N-1)*beta < 1 for N = {n_max}")));
            }
            BetaRule::Fixed(beta)
        }
    };
    if a.grid < 2 {
        return Err(CliError::usage("--grid must be at least 2"));
    }
    let search = AnsatzSearch {
        grid: a.grid,
        seed: a.seed,
        ..AnsatzSearch::default()
    };
    let rows = sweep_critical_efficiency(n_min, n_max, rule, &search)?;
    let table = Table {
        header: vec!["N", "beta", "alpha", "e_c", "baseline"],
        rows: rows
            .iter()
            .map(|r| vec![r.n as f64, r.beta, r.alpha, r.e_c, r.baseline])
            .collect(),
    };
    let mut text = format!("{:>3}  {:>14}  {:>14}  {:>10}  {:>10}\n", "N", "beta", "alpha", "e_c", "1-1/N");
    for r in &rows {
        text.push_str(&format!(
            "{:>3}  {:>14}  {:>14}  {:>10}  {:>10}\n",
            r.n,
            format::text_num(r.beta),
            format::text_num(r.alpha),
            format::text_num(r.e_c),
            format::text_num(r.baseline)
        ));
    }
    Ok(Output::new(serde_json::to_value(&rows)?, text).with_table(table))
}

fn optimize_cmd(a: &OptimizeArgs, err: &mut dyn Write) -> CliResult<Output> {
    let spec = resolve_spec(&a.spec, err)?;
    let search = ReferenceSearch {
        random_starts: a.starts,
        seed: a.seed,
    };
    let opt = optimize_reference(&spec, &search);
    let own = wdetect_core::witness::reference_ratio(&spec, &spec)?;
    let json = json!({
        "target": spec,
        "candidate": opt.candidate,
        "ratio": opt.ratio,
        "target_ratio": own,
        "optimizer": opt.optimizer,
    });
    let coeffs: Vec<String> = opt.candidate.coeffs().iter().map(|c| text_complex(*c)).collect();
    let text = format!(
        "ratio: {}\nratio with the target as reference: {}\ncandidate: {}\n",
        format::text_num(opt.ratio),
        format::text_num(own),
        coeffs.join(", ")
    );
    Ok(Output::new(json, text))
}

fn text_complex(c: Complex64) -> String {
    if c.im.abs() < 1e-12 {
        format::text_num(c.re)
    } else {
        format!("{}{:+}i", format::text_num(c.re), round_sig(c.im, 6))
    }
}

fn phase_scan_cmd(a: &PhaseScanArgs, err: &mut dyn Write) -> CliResult<Output> {
    let mut spec = resolve_spec(&a.spec, err)?;
    let n = spec.modes();
    if let Some(p) = &a.phases {
        let phases = p
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("bad phase {s:?}"))))
            .collect::<CliResult<Vec<_>>>()?;
        if phases.len() != n {
            return Err(CliError::usage(format!("--phases needs {n} values")));
        }
        spec = spec.with_local_phases(&phases)?;
    }
    let reference = match a.reference.as_deref() {
        None | Some("symmetric") => WStateSpec::symmetric(n),
        Some(r) => parse_spec_arg(r, err)?,
    };
    if a.grid < 2 {
        return Err(CliError::usage("--grid must be at least 2"));
    }
    let eta = probability_flag("eta", Some(a.eta))?;
    let ps = probability_flag("ps", Some(a.ps))?;
    let rho: MixedState = prepare_mixed_w(&spec, &wdetect_core::experiment::SourceModel::new(ps)?)?;
    let scan = phase_scan(
        &rho,
        &reference,
        &DetectorModel::new(eta)?,
        &PhaseScanOptions {
            grid: a.grid,
            refine: a.refine,
        },
    )?;
    let phases: Vec<String> = scan.phases.iter().map(|p| format::text_num(*p)).collect();
    let text = format!(
        "fidelity: {}\nuncompensated: {}\nphases: {}\nevaluations: {}\n",
        format::text_num(scan.fidelity),
        format::text_num(scan.uncompensated),
        phases.join(", "),
        scan.evaluations
    );
    Ok(Output::new(serde_json::to_value(&scan)?, text))
}

