//! Command-line front end. [`run`] parses arguments, dispatches to a
//! subcommand and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | negative verdict (unsafe, inconsistent observation, no supervisor) |
//! | 2 | usage, input or IO error |
//! | 3 | state budget exceeded |

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::automaton::{Alphabet, Automaton, ControlAction, EventId, ModelError, NetworkedSupervisor, StateId};
use crate::baseline::{baseline_estimate, BaselineError};
use crate::channels::DelayBounds;
use crate::comm::{build_gs, CommError, CommEvent, DEFAULT_BUDGET};
use crate::estimator::{EstimatorError, EstimatorSession};
use crate::format::{
    ainc_from_json, ainc_to_json, automaton_from_json, automaton_to_json, document_kind, gs_to_json,
    supervisor_from_json, supervisor_to_json, FormatError,
};
use crate::fuzz::{fuzz_corpus, FuzzCaps};
use crate::synthesis::{
    build_nbts, extract_supervisor, prune_ainc_with_stats, verify_networked_safety, Policy, SafetySpec, SynthesisError,
};

/// Version of the structured report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Load {
        path: String,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 3,
            _ => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CommError> for CliError {
    fn from(e: CommError) -> Self {
        match e {
            CommError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            CommError::Model(m) => m.into(),
        }
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            BaselineError::Model(m) => m.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "netdes",
    version,
    about = "Networked supervisory control under bounded delays and losses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Debug, Clone, Args)]
pub struct ReportOpts {
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Append wall-clock timing to the report.
    #[arg(long)]
    pub timing: bool,
    /// Include state counts and other details.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LoopArgs {
    /// Plant automaton file.
    #[arg(long)]
    pub plant: PathBuf,
    /// Networked supervisor file.
    #[arg(long)]
    pub supervisor: PathBuf,
    /// Bounds as No,Nc,Nlo,Nlc.
    #[arg(long)]
    pub bounds: DelayBounds,
    /// State budget for reachability searches.
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = parse_budget)]
    pub budget: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SafetyArgs {
    /// Comma-separated safe plant states.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub safe_states: Option<String>,
    /// Specification automaton H (a subautomaton of the plant).
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the communication automaton of a plant under a supervisor.
    BuildGs {
        #[command(flatten)]
        looped: LoopArgs,
        /// Write the automaton document here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Run the online estimator over an observation stream.
    Estimate {
        #[command(flatten)]
        looped: LoopArgs,
        /// Observation stream file, or `-` for stdin.
        #[arg(long)]
        obs: PathBuf,
        /// Also print the augmented-state estimates.
        #[arg(long)]
        augmented: bool,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Compute the estimate by an observer of the communication automaton.
    OracleNse {
        #[command(flatten)]
        looped: LoopArgs,
        #[arg(long)]
        obs: PathBuf,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// The window-based estimate for control delays only.
    BaselineEstimate {
        #[command(flatten)]
        looped: LoopArgs,
        #[arg(long)]
        obs: PathBuf,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Compute the AINC of a plant for a safety specification.
    Synthesize {
        #[arg(long)]
        plant: PathBuf,
        #[command(flatten)]
        safety: SafetyArgs,
        #[arg(long)]
        bounds: DelayBounds,
        /// File with one action per line (enabled events, comma-separated).
        #[arg(long)]
        actions: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = parse_budget)]
        budget: usize,
        /// Write the AINC document here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Extract a supervisor from an AINC.
    ExtractSupervisor {
        #[arg(long)]
        ainc: PathBuf,
        /// greedy-max, min, or fixed:<events>.
        #[arg(long, default_value = "greedy-max")]
        policy: String,
        /// Write the supervisor document here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Check networked safety exhaustively.
    Verify {
        #[command(flatten)]
        looped: LoopArgs,
        #[command(flatten)]
        safety: SafetyArgs,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Random walk through the communication automaton.
    Simulate {
        #[command(flatten)]
        looped: LoopArgs,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated safe plant states; leaving them fails the run.
        #[arg(long)]
        safe_states: Option<String>,
        #[command(flatten)]
        report: ReportOpts,
    },
    /// Generate random instances.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
        #[arg(long, default_value_t = 4)]
        max_events: usize,
        #[arg(long, default_value_t = 2)]
        max_bound: u32,
        /// Write plant and supervisor documents into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOpts,
    },
}

fn parse_budget(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("budget must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// A report with a text rendering and a structured rendering.
struct Report {
    args: Vec<String>,
    bounds: Option<DelayBounds>,
    lines: Vec<String>,
    data: Map<String, Value>,
    started: Instant,
    opts: ReportOpts,
}

impl Report {
    fn new(args: &[String], bounds: Option<DelayBounds>, opts: &ReportOpts) -> Self {
        Report {
            args: args.to_vec(),
            bounds,
            lines: Vec::new(),
            data: Map::new(),
            started: Instant::now(),
            opts: opts.clone(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn set(&mut self, key: &str, v: Value) {
        self.data.insert(key.to_string(), v);
    }

    fn emit(self, out: &mut dyn Write) -> std::io::Result<()> {
        let elapsed_ms = self.started.elapsed().as_secs_f64() * 1e3;
        match self.opts.format {
            OutputFormat::Text => {
                writeln!(out, "# netdes {}", self.args.join(" "))?;
                if let Some(b) = self.bounds {
                    writeln!(out, "# bounds No,Nc,Nlo,Nlc = {}", b.render())?;
                }
                for l in &self.lines {
                    writeln!(out, "{l}")?;
                }
                if self.opts.timing {
                    writeln!(out, "# elapsed {elapsed_ms:.3} ms")?;
                }
            }
            OutputFormat::Structured => {
                let mut doc = Map::new();
                doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
                doc.insert("command".into(), json!(self.args));
                if let Some(b) = self.bounds {
                    doc.insert("bounds".into(), json!(b.render()));
                }
                doc.extend(self.data);
                if self.opts.timing {
                    doc.insert("elapsed_ms".into(), json!(elapsed_ms));
                }
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&Value::Object(doc)).expect("json")
                )?;
            }
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io {
            path: "-".into(),
            message: e.to_string(),
        })?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Load {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_plant(path: &Path) -> Result<Automaton, CliError> {
    let text = read_file(path)?;
    let kind = document_kind(&text).map_err(load_err(path))?;
    if kind != "plant" {
        return Err(load_err(path)(FormatError::Kind {
            found: kind,
            expected: "plant".into(),
        }));
    }
    automaton_from_json(&text).map_err(load_err(path))
}

pub fn load_supervisor(path: &Path, plant: &Automaton) -> Result<NetworkedSupervisor, CliError> {
    supervisor_from_json(&read_file(path)?, plant).map_err(load_err(path))
}

/// Safe states from a comma-separated list or a specification automaton.
pub fn load_safety_spec(plant: &Automaton, names: Option<&str>, spec: Option<&Path>) -> Result<SafetySpec, CliError> {
    match (names, spec) {
        (Some(list), None) => {
            let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            Ok(SafetySpec::from_names(plant, &names)?)
        }
        (None, Some(path)) => {
            let h = automaton_from_json(&read_file(path)?).map_err(load_err(path))?;
            Ok(SafetySpec::from_subautomaton(&h, plant)?)
        }
        _ => Err(CliError::Usage("give exactly one of --safe-states or --spec".into())),
    }
}

/// Parses an action spec: a comma-separated list of enabled events,
/// optionally written `{..}` or `π{..}`. Uncontrollable events are added.
pub fn parse_action_spec(s: &str, alphabet: &Alphabet) -> Result<ControlAction, ModelError> {
    let mut body = s.trim();
    body = body.strip_prefix('π').unwrap_or(body).trim();
    if let Some(inner) = body.strip_prefix('{').and_then(|b| b.strip_suffix('}')) {
        body = inner;
    }
    let names: Vec<&str> = body.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
    alphabet.action(&names, true)
}

/// One record of an observation stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObsRecord {
    pub line: usize,
    pub event: EventId,
    pub issue: Option<ControlAction>,
}

/// Parses `observe <event> [issue <action-spec>]` records. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_stream(text: &str, alphabet: &Alphabet) -> Result<Vec<ObsRecord>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("observation stream line {}: {msg}", i + 1));
        let rest = line
            .strip_prefix("observe")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| bad(format!("expected `observe <event> [issue <action>]`, got {line:?}")))?
            .trim_start();
        let (name, tail) = match rest.find(char::is_whitespace) {
            Some(k) => (&rest[..k], rest[k..].trim_start()),
            None => (rest, ""),
        };
        let event = alphabet
            .event(name)
            .ok_or_else(|| bad(format!("unknown event {name:?}")))?;
        if !alphabet.is_observable(event) {
            return Err(bad(format!("event {name:?} is not observable")));
        }
        let issue = if tail.is_empty() {
            None
        } else {
            let spec = tail
                .strip_prefix("issue")
                .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
                .ok_or_else(|| bad(format!("expected `issue <action>`, got {tail:?}")))?;
            Some(parse_action_spec(spec, alphabet).map_err(|e| bad(e.to_string()))?)
        };
        out.push(ObsRecord {
            line: i + 1,
            event,
            issue,
        });
    }
    Ok(out)
}

fn state_list(g: &Automaton, set: &BTreeSet<StateId>) -> Value {
    json!(set.iter().map(|q| g.state_name(*q)).collect::<Vec<_>>())
}

/// The supervisor decision after each prefix of the stream; an `issue`
/// clause must agree with it.
fn supervisor_actions(sup: &NetworkedSupervisor, records: &[ObsRecord]) -> Result<Vec<ControlAction>, CliError> {
    let mut x = sup.initial();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        x = sup.next(x, r.event);
        let p = sup.gamma(x);
        if let Some(issued) = r.issue {
            if issued != p {
                return Err(CliError::Usage(format!(
                    "observation stream line {}: issued {} but the supervisor decides {}",
                    r.line,
                    sup.alphabet().render_action(issued),
                    sup.alphabet().render_action(p)
                )));
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Parses and runs one invocation. `args` excludes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("netdes")).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match dispatch(cli.command, &echo, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

fn dispatch(cmd: Command, echo: &[String], out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::BuildGs {
            looped,
            out: dest,
            report,
        } => cmd_build_gs(&looped, dest.as_deref(), &report, echo, out),
        Command::Estimate {
            looped,
            obs,
            augmented,
            report,
        } => cmd_estimate(&looped, &obs, augmented, &report, echo, out),
        Command::OracleNse { looped, obs, report } => cmd_oracle(&looped, &obs, &report, echo, out),
        Command::BaselineEstimate { looped, obs, report } => cmd_baseline(&looped, &obs, &report, echo, out),
        Command::Synthesize {
            plant,
            safety,
            bounds,
            actions,
            budget,
            out: dest,
            report,
        } => cmd_synthesize(
            &plant,
            &safety,
            bounds,
            actions.as_deref(),
            budget,
            dest.as_deref(),
            &report,
            echo,
            out,
        ),
        Command::ExtractSupervisor {
            ainc,
            policy,
            out: dest,
            report,
        } => cmd_extract(&ainc, &policy, dest.as_deref(), &report, echo, out),
        Command::Verify { looped, safety, report } => cmd_verify(&looped, &safety, &report, echo, out),
        Command::Simulate {
            looped,
            steps,
            seed,
            safe_states,
            report,
        } => cmd_simulate(&looped, steps, seed, safe_states.as_deref(), &report, echo, out),
        Command::Fuzz {
            seed,
            count,
            max_states,
            max_events,
            max_bound,
            out_dir,
            report,
        } => {
            let caps = FuzzCaps {
                max_states,
                max_events,
                max_bound,
                ..FuzzCaps::default()
            };
            cmd_fuzz(seed, count, &caps, out_dir.as_deref(), &report, echo, out)
        }
    }
}

fn load_loop(l: &LoopArgs) -> Result<(Automaton, NetworkedSupervisor), CliError> {
    let plant = load_plant(&l.plant)?;
    let sup = load_supervisor(&l.supervisor, &plant)?;
    Ok((plant, sup))
}

fn cmd_build_gs(
    l: &LoopArgs,
    dest: Option<&Path>,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (plant, sup) = load_loop(l)?;
    let mut r = Report::new(echo, Some(l.bounds), opts);
    let gs = build_gs(&plant, &sup, l.bounds, l.budget)?;
    let mut kinds = [0usize; 5];
    for i in 0..gs.num_states() {
        for (e, _) in gs.edges(i) {
            let k = match e {
                CommEvent::Plant(_) => 0,
                CommEvent::ObsLoss(_) => 1,
                CommEvent::Deliver(_) => 2,
                CommEvent::CtrlLoss(_) => 3,
                CommEvent::Execute(_) => 4,
            };
            kinds[k] += 1;
        }
    }
    r.line(format!("states: {}", gs.num_states()));
    r.line(format!("transitions: {}", gs.num_transitions()));
    r.line(format!(
        "by kind: plant={} obs-loss={} deliver={} ctrl-loss={} execute={}",
        kinds[0], kinds[1], kinds[2], kinds[3], kinds[4]
    ));
    r.line(format!("initial: {}", gs.render_state(0)));
    r.set("states", json!(gs.num_states()));
    r.set("transitions", json!(gs.num_transitions()));
    r.set(
        "transitions_by_kind",
        json!({"plant": kinds[0], "obs_loss": kinds[1], "deliver": kinds[2], "ctrl_loss": kinds[3], "execute": kinds[4]}),
    );
    r.set("initial", json!(gs.render_state(0)));
    if let Some(path) = dest {
        write_file(path, &gs_to_json(&gs))?;
        r.line(format!("written: {}", path.display()));
        r.set("written", json!(path.display().to_string()));
    }
    r.emit(out).map_err(io)?;
    Ok(0)
}

fn cmd_estimate(
    l: &LoopArgs,
    obs: &Path,
    augmented: bool,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (plant, sup) = load_loop(l)?;
    let a = plant.alphabet();
    let records = parse_stream(&read_file(obs)?, a)?;
    let mut r = Report::new(echo, Some(l.bounds), opts);
    let mut x = sup.initial();
    let initial = sup.initial_action();
    let mut session = EstimatorSession::init(&plant, l.bounds, initial).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut steps = Vec::new();
    let mut t: Vec<EventId> = Vec::new();
    let mut record_step = |r: &mut Report, t: &[EventId], p: ControlAction, s: &EstimatorSession| {
        r.line(format!("t={} action={}", a.render_word(t), a.render_action(p)));
        r.line(format!("NSE: {}", plant.render_states(&s.nse())));
        let mut step = json!({
            "t": t.iter().map(|e| a.name(*e)).collect::<Vec<_>>(),
            "action": a.render_action(p),
            "nse": state_list(&plant, &s.nse()),
        });
        if augmented {
            r.line(format!("augmented: {}", s.current().render(&plant)));
            step["augmented"] = json!(s.current().iter().map(|z| z.render(&plant)).collect::<Vec<_>>());
        }
        if opts.verbose {
            r.line(format!("augmented states: {}", s.current().len()));
            step["augmented_states"] = json!(s.current().len());
        }
        steps.push(step);
    };
    record_step(&mut r, &t, initial, &session);
    let mut code = 0;
    for rec in &records {
        x = sup.next(x, rec.event);
        let p = rec.issue.unwrap_or_else(|| sup.gamma(x));
        match session.observe(rec.event, p) {
            Ok(_) => {
                t.push(rec.event);
                record_step(&mut r, &t, p, &session);
            }
            Err(EstimatorError::InconsistentObservation(name)) => {
                r.line(format!("inconsistent observation: {name} (stream line {})", rec.line));
                r.set("inconsistent", json!({"event": name, "line": rec.line}));
                code = 1;
                break;
            }
            Err(e) => return Err(CliError::Usage(format!("observation stream line {}: {e}", rec.line))),
        }
    }
    r.set("steps", Value::Array(steps));
    r.emit(out).map_err(io)?;
    Ok(code)
}

fn cmd_oracle(
    l: &LoopArgs,
    obs: &Path,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (plant, sup) = load_loop(l)?;
    let a = plant.alphabet();
    let records = parse_stream(&read_file(obs)?, a)?;
    let actions = supervisor_actions(&sup, &records)?;
    let gs = build_gs(&plant, &sup, l.bounds, l.budget)?;
    let mut r = Report::new(echo, Some(l.bounds), opts);
    let mut steps = Vec::new();
    let mut reach = gs.initial_reach();
    let mut t: Vec<EventId> = Vec::new();
    let mut code = 0;
    for k in 0..=records.len() {
        if k > 0 {
            let rec = &records[k - 1];
            match gs.deliver_step(&reach, rec.event) {
                Some(next) => {
                    reach = next;
                    t.push(rec.event);
                }
                None => {
                    r.line(format!(
                        "inconsistent observation: {} (stream line {})",
                        a.name(rec.event),
                        rec.line
                    ));
                    r.set("inconsistent", json!({"event": a.name(rec.event), "line": rec.line}));
                    code = 1;
                    break;
                }
            }
        }
        let p = if k == 0 { sup.initial_action() } else { actions[k - 1] };
        let nse: BTreeSet<StateId> = reach.iter().map(|i| gs.state(*i).plant).collect();
        r.line(format!("t={} action={}", a.render_word(&t), a.render_action(p)));
        r.line(format!("NSE: {}", plant.render_states(&nse)));
        steps.push(json!({
            "t": t.iter().map(|e| a.name(*e)).collect::<Vec<_>>(),
            "action": a.render_action(p),
            "nse": state_list(&plant, &nse),
        }));
    }
    if opts.verbose {
        r.line(format!("communication automaton states: {}", gs.num_states()));
    }
    r.set("gs_states", json!(gs.num_states()));
    r.set("steps", Value::Array(steps));
    r.emit(out).map_err(io)?;
    Ok(code)
}

fn cmd_baseline(
    l: &LoopArgs,
    obs: &Path,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if !l.bounds.control_delay_only() {
        return Err(CliError::Usage(format!(
            "baseline-estimate supports control delays only: bounds must be 0,Nc,0,0 (got {})",
            l.bounds.render()
        )));
    }
    let (plant, sup) = load_loop(l)?;
    let a = plant.alphabet();
    let records = parse_stream(&read_file(obs)?, a)?;
    supervisor_actions(&sup, &records)?;
    let mut r = Report::new(echo, Some(l.bounds), opts);
    let mut steps = Vec::new();
    for k in 0..=records.len() {
        let t: Vec<EventId> = records[..k].iter().map(|rec| rec.event).collect();
        let est = baseline_estimate(&plant, &sup, l.bounds.ctrl_delay, &t, l.budget)?;
        r.line(format!("t={}", a.render_word(&t)));
        r.line(format!("baseline: {}", plant.render_states(&est)));
        steps.push(json!({
            "t": t.iter().map(|e| a.name(*e)).collect::<Vec<_>>(),
            "baseline": state_list(&plant, &est),
        }));
    }
    r.set("steps", Value::Array(steps));
    r.emit(out).map_err(io)?;
    Ok(0)
}

fn load_actions(path: &Path, alphabet: &Alphabet) -> Result<Vec<ControlAction>, CliError> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let p = parse_action_spec(line, alphabet)
            .map_err(|e| CliError::Usage(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(p);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synthesize(
    plant_path: &Path,
    safety: &SafetyArgs,
    bounds: DelayBounds,
    actions: Option<&Path>,
    budget: usize,
    dest: Option<&Path>,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let plant = load_plant(plant_path)?;
    let spec = load_safety_spec(&plant, safety.safe_states.as_deref(), safety.spec.as_deref())?;
    let actions = match actions {
        Some(p) => Some(load_actions(p, plant.alphabet())?),
        None => None,
    };
    let mut r = Report::new(echo, Some(bounds), opts);
    let nbts = build_nbts(&plant, actions.as_deref(), bounds, budget)?;
    r.line(format!("nbts: {} Y-states, {} Z-states", nbts.num_y(), nbts.num_z()));
    r.set("nbts", json!({"y_states": nbts.num_y(), "z_states": nbts.num_z()}));
    let code = match prune_ainc_with_stats(&nbts, &spec) {
        None => {
            r.line("no safe networked supervisor exists");
            r.set("ainc", Value::Null);
            1
        }
        Some((ainc, stats)) => {
            r.line(format!("ainc: {} Y-states, {} Z-states", ainc.num_y(), ainc.num_z()));
            r.line(format!("pruning iterations: {}", stats.iterations));
            r.set(
                "ainc",
                json!({"y_states": ainc.num_y(), "z_states": ainc.num_z(), "iterations": stats.iterations}),
            );
            if let Some(path) = dest {
                write_file(path, &ainc_to_json(&ainc, &plant, bounds))?;
                r.line(format!("written: {}", path.display()));
                r.set("written", json!(path.display().to_string()));
            }
            0
        }
    };
    r.emit(out).map_err(io)?;
    Ok(code)
}

fn parse_policy(s: &str, alphabet: &Alphabet) -> Result<Policy, CliError> {
    match s {
        "greedy-max" => Ok(Policy::GreedyMax),
        "min" => Ok(Policy::Min),
        _ => match s.strip_prefix("fixed:") {
            Some(spec) => Ok(Policy::Fixed(parse_action_spec(spec, alphabet)?)),
            None => Err(CliError::Usage(format!(
                "unknown policy {s:?} (expected greedy-max, min or fixed:<events>)"
            ))),
        },
    }
}

fn cmd_extract(
    ainc_path: &Path,
    policy: &str,
    dest: Option<&Path>,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let loaded = ainc_from_json(&read_file(ainc_path)?).map_err(load_err(ainc_path))?;
    let plant = &loaded.plant;
    let policy = parse_policy(policy, plant.alphabet())?;
    let ex = extract_supervisor(&loaded.ainc, plant, policy)?;
    let sup = &ex.supervisor;
    let a = plant.alphabet();
    let mut r = Report::new(echo, Some(loaded.bounds), opts);
    r.line(format!("supervisor states: {}", sup.realization().num_states()));
    let mut gamma = Map::new();
    for x in sup.realization().states() {
        let name = sup.realization().state_name(x);
        let origin = match ex.z_state[x.index()] {
            Some(z) => format!("z{z}"),
            None => "special".into(),
        };
        r.line(format!("gamma({name}) = {}  [{origin}]", a.render_action(sup.gamma(x))));
        gamma.insert(name.to_string(), json!(a.render_action(sup.gamma(x))));
    }
    r.set("supervisor_states", json!(sup.realization().num_states()));
    r.set("gamma", Value::Object(gamma));
    if let Some(path) = dest {
        write_file(path, &supervisor_to_json(sup))?;
        r.line(format!("written: {}", path.display()));
        r.set("written", json!(path.display().to_string()));
    }
    r.emit(out).map_err(io)?;
    Ok(0)
}

fn cmd_verify(
    l: &LoopArgs,
    safety: &SafetyArgs,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (plant, sup) = load_loop(l)?;
    let spec = load_safety_spec(&plant, safety.safe_states.as_deref(), safety.spec.as_deref())?;
    let v = verify_networked_safety(&plant, &sup, &spec, l.bounds, l.budget)?;
    let a = plant.alphabet();
    let mut r = Report::new(echo, Some(l.bounds), opts);
    r.line(if v.safe { "verdict: safe" } else { "verdict: unsafe" });
    r.set("safe", json!(v.safe));
    if opts.verbose {
        r.line(format!("communication automaton states: {}", v.gs_states));
    }
    r.set("gs_states", json!(v.gs_states));
    if let Some(w) = &v.witness {
        let mu: Vec<String> = w.mu.iter().map(|e| e.render(a)).collect();
        r.line(format!("witness: [{}]", mu.join(",")));
        r.line(format!("plant string: {}", a.render_word(&w.plant_string)));
        r.line(format!("reached: {}", w.state.render(&plant, &sup)));
        r.set(
            "witness",
            json!({
                "mu": mu,
                "plant_string": w.plant_string.iter().map(|e| a.name(*e)).collect::<Vec<_>>(),
                "state": w.state.render(&plant, &sup),
            }),
        );
    }
    r.emit(out).map_err(io)?;
    Ok(if v.safe { 0 } else { 1 })
}

fn cmd_simulate(
    l: &LoopArgs,
    steps: usize,
    seed: u64,
    safe_states: Option<&str>,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (plant, sup) = load_loop(l)?;
    let spec = match safe_states {
        Some(list) => Some(load_safety_spec(&plant, Some(list), None)?),
        None => None,
    };
    let gs = build_gs(&plant, &sup, l.bounds, l.budget)?;
    let run = gs.random_run(steps, seed);
    let a = plant.alphabet();
    let mut r = Report::new(echo, Some(l.bounds), opts);
    r.line(format!("0: {}", gs.render_state(0)));
    let mut trace = Vec::new();
    let mut violation = None;
    for (k, (e, s)) in run.iter().enumerate() {
        let rendered = s.render(&plant, &sup);
        r.line(format!("{}: {} -> {}", k + 1, e.render(a), rendered));
        trace.push(json!({"event": e.render(a), "state": rendered}));
        if violation.is_none() && spec.as_ref().is_some_and(|sp| !sp.is_safe(s.plant)) {
            violation = Some(k + 1);
        }
    }
    if run.len() < steps {
        r.line(format!("deadlock after {} steps", run.len()));
    }
    r.set("seed", json!(seed));
    r.set("trace", Value::Array(trace));
    if let Some(k) = violation {
        r.line(format!("unsafe plant state reached at step {k}"));
        r.set("unsafe_step", json!(k));
    }
    r.emit(out).map_err(io)?;
    Ok(if violation.is_some() { 1 } else { 0 })
}

fn cmd_fuzz(
    seed: u64,
    count: usize,
    caps: &FuzzCaps,
    out_dir: Option<&Path>,
    opts: &ReportOpts,
    echo: &[String],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if caps.max_states < 2 || caps.max_events < 1 || caps.max_events > 64 {
        return Err(CliError::Usage(
            "need --max-states >= 2 and 1 <= --max-events <= 64".into(),
        ));
    }
    let corpus = fuzz_corpus(seed, count, caps);
    let mut r = Report::new(echo, None, opts);
    let mut items = Vec::new();
    for inst in &corpus {
        let g = &inst.plant;
        let safe: Vec<&str> = inst.spec.safe_states().iter().map(|q| g.state_name(*q)).collect();
        r.line(format!(
            "instance {}: states={} events={} observable={} controllable={} supervisor_states={} bounds={} gs_states={} safe={{{}}}",
            inst.index,
            g.num_states(),
            g.alphabet().len(),
            g.alphabet().observable().len(),
            g.alphabet().controllable().len(),
            inst.supervisor.realization().num_states(),
            inst.bounds.render(),
            inst.gs_states,
            safe.join(",")
        ));
        items.push(json!({
            "index": inst.index,
            "states": g.num_states(),
            "events": g.alphabet().len(),
            "supervisor_states": inst.supervisor.realization().num_states(),
            "bounds": inst.bounds.render(),
            "gs_states": inst.gs_states,
            "safe_states": safe,
        }));
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).map_err(|e| CliError::Io {
                path: dir.display().to_string(),
                message: e.to_string(),
            })?;
            write_file(
                &dir.join(format!("instance{}.plant.json", inst.index)),
                &automaton_to_json(g, "plant"),
            )?;
            write_file(
                &dir.join(format!("instance{}.supervisor.json", inst.index)),
                &supervisor_to_json(&inst.supervisor),
            )?;
        }
    }
    r.set("seed", json!(seed));
    r.set("instances", Value::Array(items));
    r.emit(out).map_err(io)?;
    Ok(0)
}
