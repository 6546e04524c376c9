//! Subprocess bridge to an external clingo-compatible solver.
//!
//! Every call spawns one solver process, writes the program to its
//! standard input and reads the `--outf=2` JSON report. The solver command
//! line interface has no assumption mechanism, so assumptions are appended
//! as integrity constraints and an unsatisfiable result reports the whole
//! assumption set as its (sound, non-minimal) core.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::OnceLock;
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::program::ProgramBundle;
use crate::term::{parse_term, Term};

/// Environment variable holding the solver command line, e.g. `clingo` or
/// `python3 -m clingo`.
pub const SOLVER_ENV: &str = "ASPUI_SOLVER";

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

pub type AtomSet = BTreeSet<Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Executable followed by fixed leading arguments.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    /// Splits a command line on whitespace.
    pub fn from_command_line(line: &str) -> Self {
        SolverConfig {
            command: line.split_whitespace().map(str::to_string).collect(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// `$ASPUI_SOLVER` if set, else `clingo` when it runs, else the clingo
    /// Python package's command line entry point when that runs. Falls back
    /// to plain `clingo` so the failure surfaces as `SolverUnavailable`.
    pub fn discover() -> Self {
        if let Ok(line) = std::env::var(SOLVER_ENV) {
            if !line.trim().is_empty() {
                return Self::from_command_line(&line);
            }
        }
        static FOUND: OnceLock<String> = OnceLock::new();
        let line = FOUND.get_or_init(|| {
            for candidate in ["clingo", "python3 -m clingo"] {
                let cfg = Self::from_command_line(candidate);
                if Solver::new(cfg).solver_info().is_ok() {
                    return candidate.to_string();
                }
            }
            "clingo".to_string()
        });
        Self::from_command_line(line)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::from_command_line("clingo")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Enumerate up to `n` models; 0 means all.
    Models(usize),
    Cautious,
    Brave,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveRequest {
    pub program: ProgramBundle,
    pub assumptions: Vec<(Term, bool)>,
    pub mode: SolveMode,
}

impl SolveRequest {
    pub fn new(program: ProgramBundle, mode: SolveMode) -> Self {
        SolveRequest {
            program,
            assumptions: Vec::new(),
            mode,
        }
    }

    pub fn assuming(mut self, assumptions: impl IntoIterator<Item = (Term, bool)>) -> Self {
        self.assumptions.extend(assumptions);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    /// The solver stopped without a verdict (timeout or interruption).
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Models in enumeration order; for cautious/brave the single final
    /// consequence set.
    pub models: Vec<AtomSet>,
    /// Assumption atoms responsible for unsatisfiability (Unsat only).
    pub core: AtomSet,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub origin: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(origin) = &self.origin {
            write!(f, "{origin}:")?;
            if let Some(line) = self.line {
                write!(f, "{line}:")?;
            }
            if let Some(col) = self.column {
                write!(f, "{col}:")?;
            }
            f.write_str(" ")?;
        }
        let sev = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver unavailable: {0}")]
    Unavailable(String),
    #[error("grounding failed:\n{}", render_diagnostics(.0))]
    Grounding(Vec<Diagnostic>),
    #[error("unreadable solver output: {0}")]
    Protocol(String),
    #[error("invalid solve request: {0}")]
    InvalidRequest(String),
}

pub fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Raw result of one solver process.
struct RawRun {
    stdout: String,
    stderr: String,
    exit_code: Option<i32>,
    timed_out: bool,
}

#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Solver { config }
    }

    pub fn discover() -> Self {
        Self::new(SolverConfig::discover())
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn solve(&self, req: &SolveRequest) -> Result<SolveOutcome, SolverError> {
        let mut seen: BTreeMap<&Term, bool> = BTreeMap::new();
        for (atom, truth) in &req.assumptions {
            if let Some(prev) = seen.insert(atom, *truth) {
                if prev != *truth {
                    return Err(SolverError::InvalidRequest(format!(
                        "atom {atom} assumed both true and false"
                    )));
                }
            }
        }

        let mut program = req.program.clone();
        if !req.assumptions.is_empty() {
            program
                .push("<assumptions>", assumption_constraints(&req.assumptions))
                .map_err(|e| SolverError::InvalidRequest(e.to_string()))?;
        }
        let mut args: Vec<String> = vec!["--outf=2".into(), "--parallel-mode=1".into()];
        match req.mode {
            SolveMode::Models(n) => args.push(format!("--models={n}")),
            SolveMode::Cautious => {
                args.push("--enum-mode=cautious".into());
                args.push("--models=0".into());
            }
            SolveMode::Brave => {
                args.push("--enum-mode=brave".into());
                args.push("--models=0".into());
            }
        }
        let (text, _) = program.concatenate();
        let run = self.run(&args, &text)?;
        let diagnostics = parse_diagnostics(&run.stderr, &program);
        if has_errors(&diagnostics, &run) {
            return Err(SolverError::Grounding(diagnostics));
        }
        if run.timed_out {
            let mut diagnostics = diagnostics;
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                origin: None,
                line: None,
                column: None,
                message: format!("solver timed out after {:?}", self.config.timeout),
            });
            return Ok(SolveOutcome {
                status: SolveStatus::Error,
                models: Vec::new(),
                core: AtomSet::new(),
                diagnostics,
            });
        }
        let mut outcome = parse_output(&run.stdout, req.mode)?;
        outcome.diagnostics = diagnostics;
        if outcome.status == SolveStatus::Unsat {
            outcome.core = req.assumptions.iter().map(|(a, _)| a.clone()).collect();
        }
        Ok(outcome)
    }

    /// Grounds without solving and reports the solver's messages.
    pub fn check_syntax(&self, program: &ProgramBundle) -> Result<Vec<Diagnostic>, SolverError> {
        let (text, _) = program.concatenate();
        let run = self.run(&["--text".to_string()], &text)?;
        let mut diags = parse_diagnostics(&run.stderr, program);
        if has_errors(&diags, &run) && !diags.iter().any(|d| d.severity == Severity::Error) {
            diags.push(Diagnostic {
                severity: Severity::Error,
                origin: None,
                line: None,
                column: None,
                message: "solver reported an error".into(),
            });
        }
        Ok(diags)
    }

    /// The ground program in the solver's textual format.
    pub fn ground_text(&self, program: &ProgramBundle) -> Result<String, SolverError> {
        let (text, _) = program.concatenate();
        let run = self.run(&["--text".to_string()], &text)?;
        let diags = parse_diagnostics(&run.stderr, program);
        if has_errors(&diags, &run) {
            return Err(SolverError::Grounding(diags));
        }
        Ok(run.stdout)
    }

    /// Ground `#external` atoms of a program with their default value.
    pub fn declared_externals(
        &self,
        program: &ProgramBundle,
    ) -> Result<BTreeMap<Term, ExternalDefault>, SolverError> {
        let text = self.ground_text(program)?;
        parse_external_declarations(&text)
    }

    pub fn solver_info(&self) -> Result<String, SolverError> {
        let run = self.run(&["--version".to_string()], "")?;
        let first = run
            .stdout
            .lines()
            .find(|l| !l.trim().is_empty())
            .unwrap_or("")
            .trim()
            .to_string();
        if first.is_empty() {
            return Err(SolverError::Unavailable(
                "solver printed no version information".into(),
            ));
        }
        Ok(first)
    }

    fn run(&self, args: &[String], input: &str) -> Result<RawRun, SolverError> {
        let (exe, lead) = self
            .config
            .command
            .split_first()
            .ok_or_else(|| SolverError::Unavailable("empty solver command".into()))?;
        let mut child = Command::new(exe)
            .args(lead)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolverError::Unavailable(format!("cannot start `{exe}`: {e}")))?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let input = input.to_string();
        let writer = thread::spawn(move || {
            // a solver that exits early closes the pipe; that is not our error
            let _ = stdin.write_all(input.as_bytes());
        });
        let stdout = child.stdout.take().expect("piped stdout");
        let stderr = child.stderr.take().expect("piped stderr");
        let out_reader = thread::spawn(move || read_all(stdout));
        let err_reader = thread::spawn(move || read_all(stderr));

        let deadline = Instant::now() + self.config.timeout;
        let mut timed_out = false;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    timed_out = true;
                    break child.wait().ok();
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => return Err(SolverError::Unavailable(e.to_string())),
            }
        };
        let _ = writer.join();
        let stdout = out_reader.join().unwrap_or_default();
        let stderr = err_reader.join().unwrap_or_default();
        Ok(RawRun {
            stdout,
            stderr,
            exit_code: status.and_then(|s| s.code()),
            timed_out,
        })
    }
}

fn read_all(mut r: impl Read) -> String {
    let mut buf = Vec::new();
    let _ = r.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

fn has_errors(diags: &[Diagnostic], run: &RawRun) -> bool {
    // clingo exits with 65 on input errors; the Python distribution exits 0
    // and only reports on stderr
    diags.iter().any(|d| d.severity == Severity::Error)
        || run.exit_code == Some(65)
        || run.stderr.contains("*** ERROR")
}

fn assumption_constraints(assumptions: &[(Term, bool)]) -> String {
    let mut text = String::new();
    let sigs: BTreeSet<_> = assumptions.iter().filter_map(|(a, _)| a.signature()).collect();
    for sig in sigs {
        text.push_str(&format!("#defined {sig}.\n"));
    }
    for (atom, truth) in assumptions {
        if *truth {
            text.push_str(&format!(":- not {atom}.\n"));
        } else {
            text.push_str(&format!(":- {atom}.\n"));
        }
    }
    text
}

fn diagnostic_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?:<stdin>|-|[^:\s]+):(\d+):(\d+)(?:-\d+(?::\d+)?)?: (error|warning|info|note): (.*)$")
            .unwrap()
    })
}

/// Parses solver stderr into diagnostics with lines mapped to the part
/// they came from.
pub fn parse_diagnostics(stderr: &str, program: &ProgramBundle) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = Vec::new();
    let mut continuing = false;
    for line in stderr.lines() {
        if let Some(caps) = diagnostic_line_re().captures(line) {
            let global_line: usize = caps[1].parse().unwrap_or(0);
            let column: usize = caps[2].parse().unwrap_or(0);
            let severity = match &caps[3] {
                "error" => Severity::Error,
                "warning" => Severity::Warning,
                _ => Severity::Info,
            };
            let message = caps[4].to_string();
            if &caps[3] == "note" {
                if let Some(last) = out.last_mut() {
                    last.message.push_str("\n  note: ");
                    last.message.push_str(&message);
                    continuing = true;
                    continue;
                }
            }
            let (origin, line) = match program.locate(global_line) {
                Some((o, l)) => (Some(o), Some(l)),
                None => (None, Some(global_line)),
            };
            out.push(Diagnostic {
                severity,
                origin,
                line,
                column: Some(column),
                message,
            });
            continuing = true;
        } else if let Some(rest) = line.strip_prefix("*** ERROR: ") {
            out.push(Diagnostic {
                severity: Severity::Error,
                origin: None,
                line: None,
                column: None,
                message: rest.trim().to_string(),
            });
            continuing = false;
        } else if continuing && line.starts_with(char::is_whitespace) && !line.trim().is_empty() {
            let last = out.last_mut().expect("continuation follows a diagnostic");
            last.message.push('\n');
            last.message.push_str(line.trim_end());
        } else if !line.starts_with(char::is_whitespace) {
            continuing = false;
        }
    }
    out
}

#[derive(Deserialize)]
struct JsonReport {
    #[serde(rename = "Result")]
    result: String,
    #[serde(rename = "Call", default)]
    call: Vec<JsonCall>,
}

#[derive(Deserialize)]
struct JsonCall {
    #[serde(rename = "Witnesses", default)]
    witnesses: Vec<JsonWitness>,
}

#[derive(Deserialize)]
struct JsonWitness {
    #[serde(rename = "Value", default)]
    value: Vec<String>,
}

/// Parses the solver's JSON report. Pure: the same text always gives the
/// same outcome.
pub fn parse_output(stdout: &str, mode: SolveMode) -> Result<SolveOutcome, SolverError> {
    let report: JsonReport = serde_json::from_str(stdout)
        .map_err(|e| SolverError::Protocol(format!("invalid JSON report: {e}")))?;
    let mut models = Vec::new();
    for call in &report.call {
        for w in &call.witnesses {
            let atoms = w
                .value
                .iter()
                .map(|s| {
                    parse_term(s)
                        .map_err(|e| SolverError::Protocol(format!("cannot parse atom `{s}`: {e}")))
                })
                .collect::<Result<AtomSet, _>>()?;
            models.push(atoms);
        }
    }
    let status = match report.result.as_str() {
        "SATISFIABLE" | "OPTIMUM FOUND" => SolveStatus::Sat,
        "UNSATISFIABLE" => SolveStatus::Unsat,
        "UNKNOWN" => SolveStatus::Error,
        other => return Err(SolverError::Protocol(format!("unknown result `{other}`"))),
    };
    match status {
        SolveStatus::Sat if models.is_empty() => {
            return Err(SolverError::Protocol("satisfiable result without witness".into()))
        }
        SolveStatus::Unsat => models.clear(),
        _ => {}
    }
    if matches!(mode, SolveMode::Cautious | SolveMode::Brave) && models.len() > 1 {
        models = vec![models.pop().unwrap()];
    }
    Ok(SolveOutcome {
        status,
        models,
        core: AtomSet::new(),
        diagnostics: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalDefault {
    False,
    True,
    Free,
}

/// Reads `#external a.[v]` lines of a ground program in textual format.
pub fn parse_external_declarations(
    ground: &str,
) -> Result<BTreeMap<Term, ExternalDefault>, SolverError> {
    let mut out = BTreeMap::new();
    for line in ground.lines() {
        let Some(rest) = line.trim().strip_prefix("#external ") else {
            continue;
        };
        let (atom, value) = match rest.rfind(".[") {
            Some(i) => (&rest[..i], rest[i + 2..].trim_end_matches(']')),
            None => (rest.trim_end_matches('.'), "false"),
        };
        let atom = atom.split(':').next().unwrap_or(atom).trim();
        let term = parse_term(atom)
            .map_err(|e| SolverError::Protocol(format!("cannot parse external `{atom}`: {e}")))?;
        let default = match value {
            "true" => ExternalDefault::True,
            "free" => ExternalDefault::Free,
            _ => ExternalDefault::False,
        };
        out.insert(term, default);
    }
    Ok(out)
}
