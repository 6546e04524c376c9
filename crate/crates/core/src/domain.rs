//! The domain session: domain files plus everything the user changed
//! (assumptions, externals, added atoms, browsing position), and the
//! snapshots computed from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::backend::{Backend, BackendError, ProbeResult, SnapshotContext};
use crate::program::{classify, statements, ProgramBundle, StatementKind};
use crate::solver::{
    render_diagnostics, AtomSet, Diagnostic, ExternalDefault, SolveMode, SolveRequest,
    SolveStatus, Solver, SolverError,
};
use crate::term::Term;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("grounding failed:\n{}", render_diagnostics(.0))]
    Grounding(Vec<Diagnostic>),
    #[error(transparent)]
    Solver(SolverError),
    #[error("solver stopped without a result: {0}")]
    SolverStopped(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("{atom} is already assumed {}", if *.current { "true" } else { "false" })]
    ConflictingTruth { atom: Term, current: bool },
    #[error("{0} is not a declared external atom")]
    UnknownExternal(Term),
    #[error("no solution under the current choices")]
    NoSolution,
}

impl From<SolverError> for DomainError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Grounding(d) => DomainError::Grounding(d),
            other => DomainError::Solver(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExternalValue {
    True,
    False,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotStatus {
    Sat,
    Unsat,
}

/// One consistent view of the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainStateSnapshot {
    pub status: SnapshotStatus,
    /// The focused stable model.
    pub model: AtomSet,
    pub cautious: AtomSet,
    pub brave: AtomSet,
    /// Active assumptions: the user's plus those injected by the backend.
    pub assumptions: BTreeMap<Term, bool>,
    pub browsing: bool,
    pub mus: Vec<AtomSet>,
    pub extra_facts: String,
}

impl DomainStateSnapshot {
    fn empty() -> Self {
        DomainStateSnapshot {
            status: SnapshotStatus::Unsat,
            model: AtomSet::new(),
            cautious: AtomSet::new(),
            brave: AtomSet::new(),
            assumptions: BTreeMap::new(),
            browsing: false,
            mus: Vec::new(),
            extra_facts: String::new(),
        }
    }

    pub fn is_sat(&self) -> bool {
        self.status == SnapshotStatus::Sat
    }

    /// The domain state as ASP facts for the UI encoding.
    pub fn facts(&self) -> String {
        snapshot_facts(self)
    }
}

/// Renders a snapshot: the focused model atoms as plain facts, `_all/1`
/// for cautious and `_any/1` for brave consequences, `_clinguin_assume/2`
/// per assumption, `_clinguin_browsing`, `_clinguin_unsat`, the first
/// MUS as `_clinguin_mus/1`, then the backend's extra facts.
pub fn snapshot_facts(s: &DomainStateSnapshot) -> String {
    let mut out = String::new();
    for a in &s.model {
        let _ = writeln!(out, "{a}.");
    }
    for a in &s.cautious {
        let _ = writeln!(out, "_all({a}).");
    }
    for a in &s.brave {
        let _ = writeln!(out, "_any({a}).");
    }
    for (a, truth) in &s.assumptions {
        let _ = writeln!(out, "_clinguin_assume({a},{truth}).");
    }
    if s.browsing {
        out.push_str("_clinguin_browsing.\n");
    }
    if s.status == SnapshotStatus::Unsat {
        out.push_str("_clinguin_unsat.\n");
    }
    if let Some(mus) = s.mus.first() {
        for a in mus {
            let _ = writeln!(out, "_clinguin_mus({a}).");
        }
    }
    out.push_str(&s.extra_facts);
    out
}

/// Sets recovered from domain state facts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectedFacts {
    pub model: AtomSet,
    pub cautious: AtomSet,
    pub brave: AtomSet,
    pub assumptions: BTreeMap<Term, bool>,
    pub browsing: bool,
    pub unsat: bool,
    pub mus: AtomSet,
}

/// Inverse of [`snapshot_facts`] for the reified predicates. Statements
/// that are not ground facts (such as `#defined`) are skipped.
pub fn project_facts(text: &str) -> ProjectedFacts {
    let mut p = ProjectedFacts::default();
    let Ok(stmts) = statements(text) else {
        return p;
    };
    for stmt in stmts {
        let StatementKind::Fact(atom) = classify(stmt.text(text)) else {
            continue;
        };
        let args = atom.args();
        match (atom.name().unwrap_or(""), args.len()) {
            ("_all", 1) => {
                p.cautious.insert(args[0].clone());
            }
            ("_any", 1) => {
                p.brave.insert(args[0].clone());
            }
            ("_clinguin_assume", 2) => {
                if let Some(t) = args[1].as_bool() {
                    p.assumptions.insert(args[0].clone(), t);
                }
            }
            ("_clinguin_browsing", 0) => p.browsing = true,
            ("_clinguin_unsat", 0) => p.unsat = true,
            ("_clinguin_mus", 1) => {
                p.mus.insert(args[0].clone());
            }
            _ => {
                p.model.insert(atom);
            }
        }
    }
    p
}

/// Mutable part of a session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionState {
    pub assumptions: BTreeMap<Term, bool>,
    pub externals: BTreeMap<Term, ExternalValue>,
    pub added_atoms: BTreeSet<Term>,
    pub browsing: bool,
    /// Index of the focused model in the enumeration order while browsing.
    pub browse_cursor: usize,
}

pub struct DomainControl {
    solver: Solver,
    backend: Box<dyn Backend>,
    base: ProgramBundle,
    external_defaults: BTreeMap<Term, ExternalDefault>,
    state: SessionState,
    revision: u64,
    cache: Option<(u64, Arc<DomainStateSnapshot>)>,
    last_sat: Option<Arc<DomainStateSnapshot>>,
}

impl std::fmt::Debug for DomainControl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomainControl")
            .field("backend", &self.backend.name())
            .field("state", &self.state)
            .field("revision", &self.revision)
            .finish()
    }
}

impl DomainControl {
    /// Loads domain files through the backend and computes the first
    /// snapshot.
    pub fn initialize(
        domain_files: &[PathBuf],
        backend: Box<dyn Backend>,
        solver: Solver,
    ) -> Result<Self, DomainError> {
        let mut sources = Vec::with_capacity(domain_files.len());
        for path in domain_files {
            sources.push((path.display().to_string(), read_file(path)?));
        }
        Self::from_sources(sources, backend, solver)
    }

    /// Same as [`initialize`](Self::initialize) with in-memory sources
    /// given as `(origin label, text)`.
    pub fn from_sources(
        sources: Vec<(String, String)>,
        mut backend: Box<dyn Backend>,
        solver: Solver,
    ) -> Result<Self, DomainError> {
        if sources.is_empty() {
            return Err(DomainError::InvalidConfig(
                "at least one domain file is required".into(),
            ));
        }
        let mut loaded = ProgramBundle::new();
        for (origin, text) in &sources {
            let text = backend.load_file(origin, text)?;
            loaded
                .push(origin.clone(), text)
                .map_err(|e| DomainError::InvalidConfig(e.to_string()))?;
        }
        let external_defaults = solver.declared_externals(&loaded)?;
        let mut base = ProgramBundle::new();
        for part in loaded.parts() {
            base.push(part.origin.clone(), reset_external_defaults(&part.text))
                .expect("labels already unique");
        }
        backend.on_ground();

        let mut dc = DomainControl {
            solver,
            backend,
            base,
            external_defaults,
            state: SessionState::default(),
            revision: 0,
            cache: None,
            last_sat: None,
        };
        dc.compute_snapshot()?;
        Ok(dc)
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn backend(&self) -> &dyn Backend {
        self.backend.as_ref()
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    fn touch(&mut self) {
        self.revision += 1;
        self.state.browsing = false;
        self.state.browse_cursor = 0;
    }

    pub fn add_assumption(&mut self, atom: Term, truth: bool) -> Result<(), DomainError> {
        match self.state.assumptions.get(&atom) {
            Some(&current) if current == truth => Ok(()),
            Some(&current) => Err(DomainError::ConflictingTruth { atom, current }),
            None => {
                self.state.assumptions.insert(atom, truth);
                self.touch();
                Ok(())
            }
        }
    }

    pub fn remove_assumption(&mut self, atom: &Term) {
        if self.state.assumptions.remove(atom).is_some() {
            self.touch();
        }
    }

    pub fn clear_assumptions(&mut self) {
        if !self.state.assumptions.is_empty() {
            self.state.assumptions.clear();
            self.touch();
        }
    }

    pub fn set_external(&mut self, atom: Term, value: ExternalValue) -> Result<(), DomainError> {
        if self.state.externals.get(&atom) == Some(&ExternalValue::Release) {
            return Err(DomainError::UnknownExternal(atom));
        }
        let declared = if self.external_defaults.contains_key(&atom) {
            true
        } else {
            // non-ground declarations may depend on added atoms
            let mut program = self.base.clone();
            program
                .push("<added-atoms>", self.added_atoms_text())
                .expect("unique label");
            self.solver.declared_externals(&program)?.contains_key(&atom)
        };
        if !declared {
            return Err(DomainError::UnknownExternal(atom));
        }
        if self.state.externals.insert(atom, value) != Some(value) {
            self.touch();
        }
        Ok(())
    }

    pub fn add_atom(&mut self, atom: Term) {
        if self.state.added_atoms.insert(atom) {
            self.touch();
        }
    }

    pub fn remove_atom(&mut self, atom: &Term) {
        if self.state.added_atoms.remove(atom) {
            self.touch();
        }
    }

    /// Moves the focus to the next stable model, wrapping around after the
    /// last one.
    pub fn next_solution(&mut self) -> Result<(), DomainError> {
        if !self.compute_snapshot()?.is_sat() {
            return Err(DomainError::NoSolution);
        }
        if self.state.browsing {
            self.state.browse_cursor += 1;
        } else {
            self.state.browsing = true;
            self.state.browse_cursor = 0;
        }
        self.revision += 1;
        self.compute_snapshot()?;
        Ok(())
    }

    /// Back to the state right after initialization.
    pub fn restart(&mut self) -> Result<(), DomainError> {
        self.state = SessionState::default();
        self.revision += 1;
        self.last_sat = None;
        self.compute_snapshot()?;
        Ok(())
    }

    /// Added atoms as facts, then assumptions as comments, each block
    /// sorted. Written to `destination` when given.
    pub fn export_instance(&self, destination: Option<&Path>) -> Result<String, DomainError> {
        let mut text = self.added_atoms_text();
        for (atom, truth) in &self.state.assumptions {
            let _ = writeln!(text, "% assumption: {atom} {truth}");
        }
        if let Some(path) = destination {
            std::fs::write(path, &text).map_err(|source| DomainError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        }
        Ok(text)
    }

    fn added_atoms_text(&self) -> String {
        let mut text = String::new();
        for a in &self.state.added_atoms {
            let _ = writeln!(text, "{a}.");
        }
        text
    }

    fn externals_text(&self) -> String {
        let mut values: BTreeMap<&Term, ExternalValue> = self
            .external_defaults
            .iter()
            .filter(|(_, d)| **d == ExternalDefault::True)
            .map(|(a, _)| (a, ExternalValue::True))
            .collect();
        for (a, v) in &self.state.externals {
            values.insert(a, *v);
        }
        let mut text = String::new();
        for (a, v) in values {
            match v {
                ExternalValue::True => {
                    let _ = writeln!(text, "{a}.");
                }
                ExternalValue::False | ExternalValue::Release => {
                    let _ = writeln!(text, ":- {a}.");
                }
            }
        }
        text
    }

    /// The full domain program for the current state (assumptions are
    /// passed separately).
    pub fn program(&self) -> ProgramBundle {
        let mut p = self.base.clone();
        p.push("<externals>", self.externals_text()).expect("unique label");
        p.push("<added-atoms>", self.added_atoms_text()).expect("unique label");
        p
    }

    /// Assumptions for every solve: user choices plus backend injections.
    pub fn active_assumptions(&self) -> Vec<(Term, bool)> {
        self.backend.assumption_list(&self.state.assumptions)
    }

    /// Current snapshot; solved only when the revision changed.
    pub fn compute_snapshot(&mut self) -> Result<Arc<DomainStateSnapshot>, DomainError> {
        if let Some((rev, snap)) = &self.cache {
            if *rev == self.revision {
                return Ok(snap.clone());
            }
        }
        let program = self.program();
        let assumptions = self.active_assumptions();
        let solver = self.solver.clone();
        let solve = |mode| {
            solver
                .solve(&SolveRequest::new(program.clone(), mode).assuming(assumptions.clone()))
        };

        let focus_mode = if self.state.browsing {
            SolveMode::Models(self.state.browse_cursor + 1)
        } else {
            SolveMode::Models(1)
        };
        let focus = solve(focus_mode)?;
        let snapshot = match focus.status {
            SolveStatus::Error => {
                return Err(DomainError::SolverStopped(render_diagnostics(
                    &focus.diagnostics,
                )))
            }
            SolveStatus::Sat => {
                let mut models = focus.models;
                let model = if models.len() == self.state.browse_cursor + 1 {
                    models.pop().unwrap()
                } else {
                    // fewer models than the cursor: start over
                    self.state.browse_cursor = 0;
                    models.swap_remove(0)
                };
                let cautious = consequences(solve(SolveMode::Cautious)?)?;
                let brave = consequences(solve(SolveMode::Brave)?)?;
                let contribution = self.contribute(false, &program, &assumptions, &AtomSet::new())?;
                let snap = Arc::new(DomainStateSnapshot {
                    status: SnapshotStatus::Sat,
                    model,
                    cautious,
                    brave,
                    assumptions: assumptions.iter().cloned().collect(),
                    browsing: self.state.browsing,
                    mus: contribution.mus,
                    extra_facts: contribution.facts,
                });
                self.last_sat = Some(snap.clone());
                snap
            }
            SolveStatus::Unsat => {
                let contribution = self.contribute(true, &program, &assumptions, &focus.core)?;
                let prev = self
                    .last_sat
                    .clone()
                    .unwrap_or_else(|| Arc::new(DomainStateSnapshot::empty()));
                Arc::new(DomainStateSnapshot {
                    status: SnapshotStatus::Unsat,
                    model: prev.model.clone(),
                    cautious: prev.cautious.clone(),
                    brave: prev.brave.clone(),
                    assumptions: assumptions.iter().cloned().collect(),
                    browsing: self.state.browsing,
                    mus: contribution.mus,
                    extra_facts: contribution.facts,
                })
            }
        };
        self.cache = Some((self.revision, snapshot.clone()));
        Ok(snapshot)
    }

    fn contribute(
        &self,
        unsat: bool,
        program: &ProgramBundle,
        assumptions: &[(Term, bool)],
        core: &AtomSet,
    ) -> Result<crate::backend::Contribution, DomainError> {
        let solver = &self.solver;
        let mut probe = |subset: &[(Term, bool)]| -> Result<ProbeResult, String> {
            let req = SolveRequest::new(program.clone(), SolveMode::Models(1))
                .assuming(subset.iter().cloned());
            let out = solver.solve(&req).map_err(|e| e.to_string())?;
            match out.status {
                SolveStatus::Sat => Ok(ProbeResult::Sat),
                SolveStatus::Unsat => Ok(ProbeResult::Unsat),
                SolveStatus::Error => Err(render_diagnostics(&out.diagnostics)),
            }
        };
        let mut ctx = SnapshotContext {
            unsat,
            assumptions,
            solver_core: core,
            probe: &mut probe,
        };
        Ok(self.backend.contribute(&mut ctx)?)
    }
}

fn consequences(out: crate::solver::SolveOutcome) -> Result<AtomSet, DomainError> {
    match out.status {
        SolveStatus::Sat => Ok(out.models.into_iter().next().unwrap_or_default()),
        // the focused solve just succeeded with the same input
        SolveStatus::Unsat => Err(DomainError::SolverStopped(
            "consequence computation disagrees with model search".into(),
        )),
        SolveStatus::Error => Err(DomainError::SolverStopped(render_diagnostics(
            &out.diagnostics,
        ))),
    }
}

fn read_file(path: &Path) -> Result<String, DomainError> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DomainError::FileNotFound(path.to_path_buf())
        } else {
            DomainError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Rewrites `#external ... [true]` to `[false]`; default-true externals
/// are instead asserted as facts so the session can override them.
fn reset_external_defaults(text: &str) -> String {
    let Ok(stmts) = statements(text) else {
        return text.to_string();
    };
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for stmt in stmts {
        let s = stmt.text(text);
        if s.starts_with("#external") && s.ends_with(']') {
            if let Some(open) = s.rfind('[') {
                if s[open + 1..s.len() - 1].trim() == "true" {
                    out.push_str(&text[cursor..stmt.start + open]);
                    out.push_str("[false]");
                    cursor = stmt.end;
                }
            }
        }
    }
    out.push_str(&text[cursor..]);
    out
}
