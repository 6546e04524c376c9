//! One interactive session: domain control plus UI engine, and the
//! operations the UI can call.

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::backend::{create_backend, BackendError};
use crate::context::{resolve, Context, ContextError};
use crate::domain::{DomainControl, DomainError, ExternalValue};
use crate::solver::{Solver, SolverConfig, SolverError};
use crate::term::{parse_term, Term};
use crate::ui::{UiEngine, UiError};

pub const OPERATIONS: [&str; 9] = [
    "add_assumption",
    "remove_assumption",
    "clear_assumptions",
    "set_external",
    "add_atom",
    "remove_atom",
    "next_solution",
    "restart",
    "export_instance",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operation {
    AddAssumption(Term, bool),
    RemoveAssumption(Term),
    ClearAssumptions,
    SetExternal(Term, ExternalValue),
    AddAtom(Term),
    RemoveAtom(Term),
    NextSolution,
    Restart,
    ExportInstance(Option<PathBuf>),
}

#[derive(Debug, Error)]
pub enum OperationError {
    #[error("operation does not parse: {0}")]
    Syntax(String),
    #[error("unknown operation {0}")]
    UnknownOperation(String),
    #[error("invalid arguments for {operation}: {reason}")]
    InvalidArguments { operation: String, reason: String },
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Ui(#[from] UiError),
}

impl OperationError {
    /// Stable error code for the wire.
    pub fn code(&self) -> &'static str {
        match self {
            OperationError::Syntax(_) => "SyntaxError",
            OperationError::UnknownOperation(_) => "UnknownOperation",
            OperationError::InvalidArguments { .. } => "InvalidArguments",
            OperationError::Context(ContextError::MissingContextKey(_)) => "MissingContextKey",
            OperationError::Context(_) => "InvalidContextValue",
            OperationError::Domain(e) => match e {
                DomainError::ConflictingTruth { .. } => "ConflictingTruth",
                DomainError::NoSolution => "NoSolution",
                DomainError::UnknownExternal(_) => "UnknownExternal",
                DomainError::Grounding(_) => "GroundingError",
                DomainError::Solver(SolverError::Unavailable { .. }) => "SolverUnavailable",
                DomainError::Io { .. } => "IoError",
                _ => "SolverError",
            },
            OperationError::Ui(UiError::Grounding(_)) => "GroundingError",
            OperationError::Ui(UiError::NoUiModel) => "NoUIModel",
            OperationError::Ui(_) => "UiError",
        }
    }

    /// HTTP status: caller mistakes are 4xx, everything the solver or the
    /// encodings got wrong is 500.
    pub fn status(&self) -> u16 {
        match self.code() {
            "SyntaxError" | "UnknownOperation" | "InvalidArguments" | "MissingContextKey"
            | "InvalidContextValue" | "UnknownExternal" => 400,
            "ConflictingTruth" | "NoSolution" => 409,
            _ => 500,
        }
    }
}

fn invalid(op: &str, reason: impl Into<String>) -> OperationError {
    OperationError::InvalidArguments {
        operation: op.to_string(),
        reason: reason.into(),
    }
}

fn atom_arg(op: &str, t: &Term) -> Result<Term, OperationError> {
    match t {
        Term::Constant(_) | Term::Function(..) => Ok(t.clone()),
        other => Err(invalid(op, format!("{other} is not an atom"))),
    }
}

fn truth_arg(op: &str, t: &Term) -> Result<bool, OperationError> {
    t.as_bool()
        .ok_or_else(|| invalid(op, format!("expected true or false, got {t}")))
}

impl Operation {
    /// Reads one operation term; tuples become a sequence.
    pub fn from_term(t: &Term) -> Result<Vec<Operation>, OperationError> {
        if let Term::Tuple(items) = t {
            let mut out = Vec::new();
            for item in items {
                out.extend(Self::from_term(item)?);
            }
            return Ok(out);
        }
        let name = t
            .name()
            .ok_or_else(|| OperationError::UnknownOperation(t.to_string()))?;
        let args = t.args();
        let arity = |range: std::ops::RangeInclusive<usize>| {
            if range.contains(&args.len()) {
                Ok(())
            } else {
                Err(invalid(
                    name,
                    format!("expected {range:?} arguments, got {}", args.len()),
                ))
            }
        };
        let op = match name {
            "add_assumption" => {
                arity(1..=2)?;
                let truth = match args.get(1) {
                    Some(v) => truth_arg(name, v)?,
                    None => true,
                };
                Operation::AddAssumption(atom_arg(name, &args[0])?, truth)
            }
            "remove_assumption" => {
                arity(1..=2)?;
                Operation::RemoveAssumption(atom_arg(name, &args[0])?)
            }
            "clear_assumptions" => {
                arity(0..=0)?;
                Operation::ClearAssumptions
            }
            "set_external" => {
                arity(2..=2)?;
                let value = match args[1].name() {
                    Some("true") => ExternalValue::True,
                    Some("false") => ExternalValue::False,
                    Some("release") => ExternalValue::Release,
                    _ => return Err(invalid(name, "value must be true, false or release")),
                };
                Operation::SetExternal(atom_arg(name, &args[0])?, value)
            }
            "add_atom" => {
                arity(1..=1)?;
                Operation::AddAtom(atom_arg(name, &args[0])?)
            }
            "remove_atom" => {
                arity(1..=1)?;
                Operation::RemoveAtom(atom_arg(name, &args[0])?)
            }
            // an optional enumeration hint is accepted and ignored
            "next_solution" => {
                arity(0..=1)?;
                Operation::NextSolution
            }
            "restart" => {
                arity(0..=0)?;
                Operation::Restart
            }
            "export_instance" => {
                arity(0..=1)?;
                Operation::ExportInstance(args.first().map(|p| PathBuf::from(p.unquoted())))
            }
            _ => return Err(OperationError::UnknownOperation(t.to_string())),
        };
        Ok(vec![op])
    }
}

/// Parses posted operation text after placeholder substitution.
pub fn parse_operations(text: &str, ctx: &Context) -> Result<Vec<Operation>, OperationError> {
    let term = parse_term(text.trim()).map_err(|e| OperationError::Syntax(format!("`{text}`: {e}")))?;
    Operation::from_term(&resolve(&term, ctx)?)
}

/// Everything needed to start a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub domain_files: Vec<PathBuf>,
    pub ui_files: Vec<PathBuf>,
    pub backend: String,
    pub backend_options: Vec<(String, String)>,
    /// Solver command line; discovered when absent.
    pub solver: Option<String>,
}

impl SessionConfig {
    pub fn solver(&self) -> Solver {
        match &self.solver {
            Some(line) => Solver::new(SolverConfig::from_command_line(line)),
            None => Solver::discover(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Ui(#[from] UiError),
}

pub struct Session {
    domain: DomainControl,
    ui: UiEngine,
    ui_cache: Option<(u64, Arc<str>)>,
}

impl Session {
    pub fn new(domain: DomainControl, ui: UiEngine) -> Self {
        Session {
            domain,
            ui,
            ui_cache: None,
        }
    }

    pub fn open(config: &SessionConfig) -> Result<Self, StartupError> {
        if config.domain_files.is_empty() {
            return Err(StartupError::InvalidConfig("no domain files given".into()));
        }
        if config.ui_files.is_empty() {
            return Err(StartupError::InvalidConfig("no UI files given".into()));
        }
        let solver = config.solver();
        let backend = create_backend(&config.backend, &config.backend_options)?;
        let domain = DomainControl::initialize(&config.domain_files, backend, solver.clone())?;
        let ui = UiEngine::from_files(&config.ui_files, solver)?;
        Ok(Session::new(domain, ui))
    }

    pub fn revision(&self) -> u64 {
        self.domain.revision()
    }

    pub fn domain(&self) -> &DomainControl {
        &self.domain
    }

    pub fn domain_mut(&mut self) -> &mut DomainControl {
        &mut self.domain
    }

    /// Runs the operations in order, stopping at the first failure.
    /// Earlier operations of the sequence stay applied.
    pub fn apply(&mut self, ops: &[Operation]) -> Result<(), OperationError> {
        for op in ops {
            log::debug!("applying {op:?}");
            let d = &mut self.domain;
            match op {
                Operation::AddAssumption(a, truth) => d.add_assumption(a.clone(), *truth)?,
                Operation::RemoveAssumption(a) => d.remove_assumption(a),
                Operation::ClearAssumptions => d.clear_assumptions(),
                Operation::SetExternal(a, v) => d.set_external(a.clone(), *v)?,
                Operation::AddAtom(a) => d.add_atom(a.clone()),
                Operation::RemoveAtom(a) => d.remove_atom(a),
                Operation::NextSolution => d.next_solution()?,
                Operation::Restart => d.restart()?,
                Operation::ExportInstance(path) => {
                    d.export_instance(path.as_deref())?;
                }
            }
        }
        Ok(())
    }

    /// Parse, apply, and render the new UI.
    pub fn execute(&mut self, text: &str, ctx: &Context) -> Result<Arc<str>, OperationError> {
        let ops = parse_operations(text, ctx)?;
        self.apply(&ops)?;
        self.ui_json()
    }

    /// The UI for the current state; recomputed only after a change.
    pub fn ui_json(&mut self) -> Result<Arc<str>, OperationError> {
        let revision = self.domain.revision();
        if let Some((rev, json)) = &self.ui_cache {
            if *rev == revision {
                return Ok(json.clone());
            }
        }
        let snapshot = self.domain.compute_snapshot()?;
        let json: Arc<str> = self.ui.render(&snapshot.facts())?.into();
        self.ui_cache = Some((revision, json.clone()));
        Ok(json)
    }

    pub fn export_instance(&self) -> Result<String, OperationError> {
        Ok(self.domain.export_instance(None)?)
    }
}
