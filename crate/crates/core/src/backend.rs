//! Pluggable backends.
//!
//! A backend decides how domain files are loaded, which assumptions are
//! injected into every solve, and which extra facts are added to a domain
//! state. Two backends ship: [`ClingoBackend`] (plain solving) and
//! [`ExplanationBackend`] (fact-to-choice transformation plus minimal
//! unsatisfiable subsets of assumptions).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::program::{classify, statements, ScanError, StatementKind};
use crate::term::{match_signature, Signature, Term};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("cannot transform `{origin}`: {source}")]
    Transform {
        origin: String,
        #[source]
        source: ScanError,
    },
    #[error("invalid assumption signature `{0}`: expected `name,arity`")]
    InvalidSignature(String),
    #[error("unknown backend `{name}`; registered backends: {}", .registered.join(", "))]
    UnknownBackend {
        name: String,
        registered: Vec<String>,
    },
    #[error("probe failed: {0}")]
    Probe(String),
    #[error("candidate assumptions are satisfiable; there is no unsatisfiable subset")]
    NotUnsat,
    #[error("option `{0}` is not supported by backend `{1}`")]
    UnsupportedOption(String, String),
}

/// Result of asking whether a set of assumptions is satisfiable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeResult {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MusResult<T> {
    pub core: BTreeSet<T>,
    pub minimal: bool,
}

/// Deletion-based minimal unsatisfiable subset.
///
/// Requires `probe(candidates) == Unsat`. Candidates are tried for removal
/// in ascending order, so the result is reproducible.
pub fn compute_mus<T, F, E>(candidates: &BTreeSet<T>, probe: F) -> Result<MusResult<T>, BackendError>
where
    T: Ord + Clone,
    F: FnMut(&BTreeSet<T>) -> Result<ProbeResult, E>,
    E: fmt::Display,
{
    compute_mus_seeded(candidates, None, probe)
}

/// Like [`compute_mus`], starting from a known unsatisfiable core (for
/// example one reported by the solver). Elements of the seed outside
/// `candidates` are ignored; a seed that turns out satisfiable is discarded.
pub fn compute_mus_seeded<T, F, E>(
    candidates: &BTreeSet<T>,
    seed: Option<&BTreeSet<T>>,
    mut probe: F,
) -> Result<MusResult<T>, BackendError>
where
    T: Ord + Clone,
    F: FnMut(&BTreeSet<T>) -> Result<ProbeResult, E>,
    E: fmt::Display,
{
    let mut run = |set: &BTreeSet<T>| probe(set).map_err(|e| BackendError::Probe(e.to_string()));

    let mut current = None;
    if let Some(seed) = seed {
        let seed: BTreeSet<T> = seed.intersection(candidates).cloned().collect();
        if seed.len() < candidates.len() && run(&seed)? == ProbeResult::Unsat {
            current = Some(seed);
        }
    }
    let mut current = match current {
        Some(c) => c,
        None => {
            if run(candidates)? == ProbeResult::Sat {
                return Err(BackendError::NotUnsat);
            }
            candidates.clone()
        }
    };

    let order: Vec<T> = current.iter().cloned().collect();
    for item in order {
        current.remove(&item);
        if run(&current)? == ProbeResult::Sat {
            current.insert(item);
        }
    }
    Ok(MusResult {
        core: current,
        minimal: true,
    })
}

/// Output of [`transform_facts_to_choices`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transformed {
    pub text: String,
    pub collected: BTreeSet<Term>,
    pub warnings: Vec<String>,
}

/// Rewrites ground facts whose signature is in `sigs` into choices
/// `{atom}.`; every other byte is copied unchanged.
pub fn transform_facts_to_choices(
    origin: &str,
    source: &str,
    sigs: &[Signature],
) -> Result<Transformed, BackendError> {
    let stmts = statements(source).map_err(|source| BackendError::Transform {
        origin: origin.to_string(),
        source,
    })?;
    let mut out = Transformed::default();
    let mut cursor = 0;
    for stmt in stmts {
        let text = stmt.text(source);
        match classify(text) {
            StatementKind::Fact(atom) if sigs.iter().any(|s| match_signature(&atom, s)) => {
                out.text.push_str(&source[cursor..stmt.start]);
                out.text.push_str(&format!("{{{atom}}}."));
                out.collected.insert(atom);
                cursor = stmt.end;
            }
            StatementKind::Other { has_body: false } => {
                let head = text.trim_start_matches(['{', ' ']);
                if sigs.iter().any(|s| {
                    head.starts_with(&s.name)
                        && head[s.name.len()..].starts_with(['(', '.', ' ', ';', ':'])
                }) {
                    out.warnings.push(format!(
                        "{origin}: `{}` is not a plain ground fact and is left unchanged",
                        text.trim()
                    ));
                }
            }
            _ => {}
        }
    }
    out.text.push_str(&source[cursor..]);
    Ok(out)
}

/// Parses `name,arity`.
pub fn parse_assumption_signature(text: &str) -> Result<Signature, BackendError> {
    let invalid = || BackendError::InvalidSignature(text.to_string());
    let (name, arity) = text.split_once(',').ok_or_else(invalid)?;
    let name = name.trim();
    if !crate::term::is_identifier(name) {
        return Err(invalid());
    }
    let arity: usize = arity.trim().parse().map_err(|_| invalid())?;
    Ok(Signature::new(name, arity))
}

/// View of a snapshot under construction, handed to backend constructors.
pub struct SnapshotContext<'a> {
    pub unsat: bool,
    /// All assumptions of the failed or successful solve (user plus
    /// backend-injected).
    pub assumptions: &'a [(Term, bool)],
    /// Atoms the solver blamed for unsatisfiability.
    pub solver_core: &'a BTreeSet<Term>,
    /// Satisfiability of the domain program under a set of assumptions.
    pub probe: &'a mut dyn FnMut(&[(Term, bool)]) -> Result<ProbeResult, String>,
}

/// What a backend adds to a domain state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Contribution {
    /// ASP source text appended to the domain state facts.
    pub facts: String,
    pub mus: Vec<BTreeSet<Term>>,
}

/// The customization surface of the server.
pub trait Backend: Send {
    fn name(&self) -> &str;

    /// Applies a backend-specific command line option (`--key value`).
    fn set_option(&mut self, key: &str, value: &str) -> Result<(), BackendError> {
        let _ = value;
        Err(BackendError::UnsupportedOption(
            key.to_string(),
            self.name().to_string(),
        ))
    }

    /// Turns one domain file into the text handed to the solver.
    fn load_file(&mut self, origin: &str, source: &str) -> Result<String, BackendError> {
        let _ = origin;
        Ok(source.to_string())
    }

    /// Called once the loaded domain program grounded cleanly.
    fn on_ground(&mut self) {}

    /// Assumptions used for every domain solve.
    fn assumption_list(&self, user: &BTreeMap<Term, bool>) -> Vec<(Term, bool)> {
        user.iter().map(|(a, t)| (a.clone(), *t)).collect()
    }

    /// Extra domain state content.
    fn contribute(&self, ctx: &mut SnapshotContext<'_>) -> Result<Contribution, BackendError> {
        let _ = ctx;
        Ok(Contribution::default())
    }
}

/// Plain solving; user assumptions only.
#[derive(Debug, Default, Clone)]
pub struct ClingoBackend;

impl Backend for ClingoBackend {
    fn name(&self) -> &str {
        "ClingoBackend"
    }
}

/// Explains unsatisfiable user choices with a minimal unsatisfiable subset
/// of the active assumptions, published as `_clinguin_mus/1` facts.
#[derive(Debug, Default, Clone)]
pub struct ExplanationBackend {
    signatures: Vec<Signature>,
    collected: BTreeSet<Term>,
    warnings: Vec<String>,
}

impl ExplanationBackend {
    pub fn new(signatures: Vec<Signature>) -> Self {
        ExplanationBackend {
            signatures,
            ..Default::default()
        }
    }

    pub fn signatures(&self) -> &[Signature] {
        &self.signatures
    }

    /// Atoms turned into assumptions by the transformation.
    pub fn collected(&self) -> &BTreeSet<Term> {
        &self.collected
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The domain state constructor: a MUS over all active assumptions when
    /// unsatisfiable, and in any case the `#defined` declaration.
    pub fn explanation_constructor(
        &self,
        ctx: &mut SnapshotContext<'_>,
    ) -> Result<Contribution, BackendError> {
        let mut contribution = Contribution {
            facts: "#defined _clinguin_mus/1.\n".to_string(),
            mus: Vec::new(),
        };
        if !ctx.unsat {
            return Ok(contribution);
        }
        let truth: BTreeMap<Term, bool> = ctx.assumptions.iter().cloned().collect();
        let candidates: BTreeSet<Term> = truth.keys().cloned().collect();
        let probe = &mut *ctx.probe;
        let result = compute_mus_seeded(&candidates, Some(ctx.solver_core), |subset| {
            let assumed: Vec<(Term, bool)> =
                subset.iter().map(|a| (a.clone(), truth[a])).collect();
            probe(&assumed)
        })?;
        contribution.mus.push(result.core);
        Ok(contribution)
    }
}

impl Backend for ExplanationBackend {
    fn name(&self) -> &str {
        "ExplanationBackend"
    }

    fn set_option(&mut self, key: &str, value: &str) -> Result<(), BackendError> {
        match key {
            "assumption-signature" => {
                let sig = parse_assumption_signature(value)?;
                if !self.signatures.contains(&sig) {
                    self.signatures.push(sig);
                }
                Ok(())
            }
            _ => Err(BackendError::UnsupportedOption(
                key.to_string(),
                self.name().to_string(),
            )),
        }
    }

    fn load_file(&mut self, origin: &str, source: &str) -> Result<String, BackendError> {
        let t = transform_facts_to_choices(origin, source, &self.signatures)?;
        for w in &t.warnings {
            log::warn!("{w}");
        }
        self.warnings.extend(t.warnings);
        self.collected.extend(t.collected);
        Ok(t.text)
    }

    fn assumption_list(&self, user: &BTreeMap<Term, bool>) -> Vec<(Term, bool)> {
        let mut all: Vec<(Term, bool)> = user.iter().map(|(a, t)| (a.clone(), *t)).collect();
        all.extend(
            self.collected
                .iter()
                .filter(|a| !user.contains_key(*a))
                .map(|a| (a.clone(), true)),
        );
        all
    }

    fn contribute(&self, ctx: &mut SnapshotContext<'_>) -> Result<Contribution, BackendError> {
        self.explanation_constructor(ctx)
    }
}

pub const REGISTERED_BACKENDS: [&str; 2] = ["ClingoBackend", "ExplanationBackend"];

/// Instantiates a backend by name and applies `(key, value)` options.
pub fn create_backend(
    name: &str,
    options: &[(String, String)],
) -> Result<Box<dyn Backend>, BackendError> {
    let mut backend: Box<dyn Backend> = match name {
        "ClingoBackend" => Box::new(ClingoBackend),
        "ExplanationBackend" => Box::new(ExplanationBackend::default()),
        other => {
            return Err(BackendError::UnknownBackend {
                name: other.to_string(),
                registered: REGISTERED_BACKENDS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    for (k, v) in options {
        backend.set_option(k, v)?;
    }
    Ok(backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;
    use std::convert::Infallible;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Term> {
        items.iter().map(|s| t(s)).collect()
    }

    /// Unsat iff the subset contains every atom of some conflict.
    fn conflicts_probe(
        conflicts: Vec<BTreeSet<Term>>,
    ) -> impl FnMut(&BTreeSet<Term>) -> Result<ProbeResult, Infallible> {
        move |s| {
            Ok(if conflicts.iter().any(|c| c.is_subset(s)) {
                ProbeResult::Unsat
            } else {
                ProbeResult::Sat
            })
        }
    }

    #[test]
    fn mus_of_two_constraints() {
        // `:- a, b.  :- c.`; the minimal unsatisfiable subsets are {c} and {a,b}
        let conflicts = vec![set(&["a", "b"]), set(&["c"])];
        let r = compute_mus(&set(&["a", "b", "c"]), conflicts_probe(conflicts.clone())).unwrap();
        assert!(r.minimal);
        assert_eq!(r.core, set(&["c"]));

        let r = compute_mus(&set(&["a", "b"]), conflicts_probe(conflicts)).unwrap();
        assert_eq!(r.core, set(&["a", "b"]));
    }

    #[test]
    fn mus_empty_when_program_unsat() {
        let r = compute_mus(&set(&["a", "b"]), |_: &BTreeSet<Term>| {
            Ok::<_, Infallible>(ProbeResult::Unsat)
        })
        .unwrap();
        assert!(r.core.is_empty());
    }

    #[test]
    fn mus_single_and_errors() {
        let r = compute_mus(&set(&["x"]), conflicts_probe(vec![set(&["x"])])).unwrap();
        assert_eq!(r.core, set(&["x"]));
        assert!(matches!(
            compute_mus(&set(&["x"]), conflicts_probe(vec![set(&["y"])])),
            Err(BackendError::NotUnsat)
        ));
        let failing = compute_mus(&set(&["x"]), |_: &BTreeSet<Term>| {
            Err::<ProbeResult, _>("boom")
        });
        assert!(matches!(failing, Err(BackendError::Probe(m)) if m == "boom"));
    }

    #[test]
    fn seeded_mus_uses_seed_and_ignores_bad_seed() {
        let conflicts = vec![set(&["a", "b"]), set(&["c"])];
        let mut calls = 0;
        let r = compute_mus_seeded(&set(&["a", "b", "c"]), Some(&set(&["a", "b"])), |s| {
            calls += 1;
            conflicts_probe(conflicts.clone())(s)
        })
        .unwrap();
        assert_eq!(r.core, set(&["a", "b"]));
        assert_eq!(calls, 3);
        let r = compute_mus_seeded(
            &set(&["a", "b", "c"]),
            Some(&set(&["a"])),
            conflicts_probe(conflicts),
        )
        .unwrap();
        assert_eq!(r.core, set(&["c"]));
    }

    #[test]
    fn transforms_matching_facts() {
        let sig = vec![Signature::new("cons", 2)];
        let r = transform_facts_to_choices("x", "cons(one,\"msg\").", &sig).unwrap();
        assert_eq!(r.text, "{cons(one,\"msg\")}.");
        assert_eq!(r.collected, set(&["cons(one,\"msg\")"]));

        let r = transform_facts_to_choices("x", "person(a,cat).", &sig).unwrap();
        assert_eq!(r.text, "person(a,cat).");
        assert!(r.collected.is_empty());

        let src = ":- a, b, cons(one,M).";
        assert_eq!(transform_facts_to_choices("x", src, &sig).unwrap().text, src);
    }

    #[test]
    fn transform_preserves_surroundings() {
        let sig = vec![Signature::new("cons", 2)];
        let src = "% constraints\ncons(a, \"x.y\"). % why\n  cons(b,1).\ncons(c).\np :- cons(a,_).\n";
        let r = transform_facts_to_choices("x", src, &sig).unwrap();
        assert_eq!(
            r.text,
            "% constraints\n{cons(a,\"x.y\")}. % why\n  {cons(b,1)}.\ncons(c).\np :- cons(a,_).\n"
        );
        assert_eq!(r.collected.len(), 2);
    }

    #[test]
    fn transform_warns_on_non_ground_facts() {
        let sig = vec![Signature::new("cons", 1)];
        let r = transform_facts_to_choices("f.lp", "cons(1..3). other(1;2).", &sig).unwrap();
        assert_eq!(r.text, "cons(1..3). other(1;2).");
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("cons(1..3)"));
    }

    #[test]
    fn transform_error_on_unterminated() {
        let sig = vec![Signature::new("cons", 1)];
        assert!(matches!(
            transform_facts_to_choices("f.lp", "cons(1). cons(2)", &sig),
            Err(BackendError::Transform { .. })
        ));
    }

    #[test]
    fn assumption_signatures() {
        assert_eq!(
            parse_assumption_signature("cons,2").unwrap(),
            Signature::new("cons", 2)
        );
        assert!(parse_assumption_signature("cons").is_err());
        assert!(parse_assumption_signature("cons,-1").is_err());
        assert!(parse_assumption_signature("Cons,1").is_err());
        assert!(parse_assumption_signature("cons,x").is_err());
    }

    #[test]
    fn default_backend_is_neutral() {
        let b = ClingoBackend;
        let user: BTreeMap<Term, bool> = [(t("a"), true), (t("b"), false)].into_iter().collect();
        assert_eq!(b.assumption_list(&user), vec![(t("a"), true), (t("b"), false)]);
        let mut probe = |_: &[(Term, bool)]| Ok(ProbeResult::Sat);
        let mut ctx = SnapshotContext {
            unsat: true,
            assumptions: &[],
            solver_core: &BTreeSet::new(),
            probe: &mut probe,
        };
        assert_eq!(b.contribute(&mut ctx).unwrap(), Contribution::default());
    }

    #[test]
    fn explanation_backend_collects_and_injects() {
        let mut b =
            create_backend("ExplanationBackend", &[("assumption-signature".into(), "cons,2".into())])
                .unwrap();
        let text = b.load_file("ins.lp", "cons(one,\"m\"). person(a,cat).").unwrap();
        assert_eq!(text, "{cons(one,\"m\")}. person(a,cat).");
        let user: BTreeMap<Term, bool> = [(t("assign(a,1)"), true)].into_iter().collect();
        assert_eq!(
            b.assumption_list(&user),
            vec![(t("assign(a,1)"), true), (t("cons(one,\"m\")"), true)]
        );
    }

    #[test]
    fn explanation_constructor_sat_and_unsat() {
        let b = ExplanationBackend::new(vec![]);
        let assumptions = vec![(t("x"), true), (t("y"), false), (t("z"), true)];
        // conflict: x true together with y false
        let mut probe = |a: &[(Term, bool)]| {
            let has = |p: &(Term, bool)| a.contains(p);
            Ok(if has(&(t("x"), true)) && has(&(t("y"), false)) {
                ProbeResult::Unsat
            } else {
                ProbeResult::Sat
            })
        };
        let core = set(&["x", "y", "z"]);
        let mut ctx = SnapshotContext {
            unsat: true,
            assumptions: &assumptions,
            solver_core: &core,
            probe: &mut probe,
        };
        let c = b.explanation_constructor(&mut ctx).unwrap();
        assert_eq!(c.mus, vec![set(&["x", "y"])]);
        assert!(c.facts.contains("#defined _clinguin_mus/1."));

        ctx.unsat = false;
        let c = b.explanation_constructor(&mut ctx).unwrap();
        assert!(c.mus.is_empty());
        assert_eq!(c.facts, "#defined _clinguin_mus/1.\n");
    }

    #[test]
    fn unknown_backend_lists_registered() {
        let err = create_backend("Nope", &[]).err().unwrap();
        assert!(err.to_string().contains("ClingoBackend, ExplanationBackend"));
        assert!(matches!(
            create_backend("ClingoBackend", &[("assumption-signature".into(), "a,1".into())]),
            Err(BackendError::UnsupportedOption(..))
        ));
    }
}
