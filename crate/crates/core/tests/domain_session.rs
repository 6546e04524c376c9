mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use aspui::backend::{create_backend, ClingoBackend};
use aspui::domain::{project_facts, DomainControl, DomainError, ExternalValue};
use aspui::term::Term;

use common::{all_models, intersection, seating, seating_domain, solver, t, union};

fn seating_session() -> DomainControl {
    DomainControl::initialize(&seating_domain(), Box::new(ClingoBackend), solver()).unwrap()
}

fn from_text(text: &str) -> DomainControl {
    DomainControl::from_sources(
        vec![("d.lp".into(), text.into())],
        Box::new(ClingoBackend),
        solver(),
    )
    .unwrap()
}

#[test]
fn initialize_seating() {
    let mut dc = seating_session();
    let snap = dc.compute_snapshot().unwrap();
    assert!(snap.is_sat());
    assert!(snap.brave.iter().any(|a| a.name() == Some("assign")));
    assert!(snap.assumptions.is_empty());
    assert!(!snap.browsing);
}

#[test]
fn initialize_errors() {
    let err = DomainControl::initialize(&[], Box::new(ClingoBackend), solver()).unwrap_err();
    assert!(matches!(err, DomainError::InvalidConfig(_)));

    let err = DomainControl::initialize(&[seating("missing.lp")], Box::new(ClingoBackend), solver())
        .unwrap_err();
    assert!(matches!(err, DomainError::FileNotFound(_)));

    let err = DomainControl::from_sources(
        vec![("ok.lp".into(), "a.".into()), ("broken.lp".into(), "b :- c d.".into())],
        Box::new(ClingoBackend),
        solver(),
    )
    .unwrap_err();
    let DomainError::Grounding(diags) = &err else {
        panic!("expected a grounding error, got {err}")
    };
    assert!(diags.iter().any(|d| d.origin.as_deref() == Some("broken.lp")));
    assert!(err.to_string().contains("broken.lp"));
}

#[test]
fn forced_assignment_matches_enumeration() {
    let mut dc = seating_session();
    let assumption = (t("assign(alexander,(1,1))"), true);
    dc.add_assumption(assumption.0.clone(), true).unwrap();
    let snap = dc.compute_snapshot().unwrap();

    let models = all_models(&solver(), &dc.program(), &[assumption]);
    assert_eq!(snap.cautious, intersection(&models));
    assert_eq!(snap.brave, union(&models));
    assert!(snap.cautious.contains(&t("assign(susana,(1,2))")));
    let table2: BTreeSet<Term> = snap
        .brave
        .iter()
        .filter(|a| a.name() == Some("assign") && a.args()[1].args()[0] == Term::Number(2))
        .map(|a| a.args()[0].clone())
        .collect();
    assert_eq!(table2, [t("torsten")].into());
}

#[test]
fn assumption_bookkeeping() {
    let mut dc = seating_session();
    let a = t("assign(alexander,(1,1))");
    dc.add_assumption(a.clone(), true).unwrap();
    let rev = dc.revision();
    dc.add_assumption(a.clone(), true).unwrap();
    assert_eq!(dc.revision(), rev, "repeating an assumption is a no-op");
    assert!(matches!(
        dc.add_assumption(a.clone(), false),
        Err(DomainError::ConflictingTruth { current: true, .. })
    ));
    dc.remove_assumption(&t("assign(nobody,(9,9))"));
    assert_eq!(dc.revision(), rev);

    dc.add_assumption(t("assign(torsten,(2,1))"), true).unwrap();
    dc.clear_assumptions();
    assert!(dc.state().assumptions.is_empty());
    assert!(dc.compute_snapshot().unwrap().assumptions.is_empty());
}

#[test]
fn false_assumption_removes_from_brave() {
    let mut dc = seating_session();
    let a = t("assign(torsten,(2,1))");
    dc.add_assumption(a.clone(), false).unwrap();
    let snap = dc.compute_snapshot().unwrap();
    assert!(!snap.brave.contains(&a));
    assert_eq!(snap.assumptions.get(&a), Some(&false));
    assert!(snap.facts().contains("_clinguin_assume(assign(torsten,(2,1)),false)."));
}

#[test]
fn browsing_cycles_through_all_models() {
    let mut dc = seating_session();
    dc.add_assumption(t("assign(alexander,(1,1))"), true).unwrap();
    let expected: BTreeSet<_> = all_models(&solver(), &dc.program(), &dc.active_assumptions())
        .into_iter()
        .collect();
    assert_eq!(expected.len(), 3);

    let mut seen = Vec::new();
    for _ in 0..expected.len() {
        dc.next_solution().unwrap();
        let snap = dc.compute_snapshot().unwrap();
        assert!(snap.browsing);
        assert!(snap.facts().contains("_clinguin_browsing."));
        seen.push(snap.model.clone());
    }
    let distinct: BTreeSet<_> = seen.iter().cloned().collect();
    assert_eq!(distinct, expected);

    dc.next_solution().unwrap();
    assert_eq!(dc.compute_snapshot().unwrap().model, seen[0], "wraps to the first model");

    dc.add_atom(t("person(ana,dog)"));
    assert!(!dc.compute_snapshot().unwrap().browsing);
}

#[test]
fn next_solution_when_unsat() {
    let mut dc = seating_session();
    dc.add_assumption(t("assign(alexander,(1,1))"), true).unwrap();
    dc.add_assumption(t("assign(torsten,(1,2))"), true).unwrap();
    assert!(matches!(dc.next_solution(), Err(DomainError::NoSolution)));
}

#[test]
fn unsat_keeps_last_solution() {
    let mut dc = seating_session();
    dc.add_assumption(t("assign(alexander,(1,1))"), true).unwrap();
    let sat = dc.compute_snapshot().unwrap();
    dc.add_assumption(t("assign(torsten,(1,2))"), true).unwrap();
    let unsat = dc.compute_snapshot().unwrap();
    assert!(!unsat.is_sat());
    assert_eq!(unsat.model, sat.model);
    assert_eq!(unsat.cautious, sat.cautious);
    assert_eq!(unsat.brave, sat.brave);
    assert!(unsat.facts().contains("_clinguin_unsat."));
    dc.remove_assumption(&t("assign(torsten,(1,2))"));
    assert!(dc.compute_snapshot().unwrap().is_sat());
}

#[test]
fn externals() {
    let mut dc = from_text("#external e. #external f. [true]\n#external g(1..2).\na :- e. b :- f. c(X) :- g(X).");
    let snap = dc.compute_snapshot().unwrap();
    assert!(snap.cautious.contains(&t("b")));
    assert!(!snap.brave.contains(&t("a")));

    dc.set_external(t("e"), ExternalValue::True).unwrap();
    dc.set_external(t("f"), ExternalValue::False).unwrap();
    dc.set_external(t("g(2)"), ExternalValue::True).unwrap();
    let snap = dc.compute_snapshot().unwrap();
    assert!(snap.cautious.contains(&t("a")));
    assert!(!snap.brave.contains(&t("b")));
    assert!(snap.cautious.contains(&t("c(2)")));
    assert!(!snap.brave.contains(&t("c(1)")));

    dc.set_external(t("e"), ExternalValue::Release).unwrap();
    assert!(!dc.compute_snapshot().unwrap().brave.contains(&t("a")));
    assert!(matches!(
        dc.set_external(t("e"), ExternalValue::True),
        Err(DomainError::UnknownExternal(_))
    ));
    assert!(matches!(
        dc.set_external(t("h"), ExternalValue::True),
        Err(DomainError::UnknownExternal(_))
    ));
}

#[test]
fn added_atoms() {
    let mut dc = seating_session();
    let before = dc.compute_snapshot().unwrap();
    let ana = t("person(\"Ana\",dog)");
    dc.add_atom(ana.clone());
    let snap = dc.compute_snapshot().unwrap();
    assert!(snap
        .brave
        .iter()
        .any(|a| a.name() == Some("assign") && a.args()[0] == Term::string("Ana")));
    dc.remove_atom(&ana);
    let after = dc.compute_snapshot().unwrap();
    assert_eq!((&after.model, &after.cautious, &after.brave), (&before.model, &before.cautious, &before.brave));

    dc.add_atom(t("person(torsten,dog)"));
    let dup = dc.compute_snapshot().unwrap();
    assert_eq!((&dup.cautious, &dup.brave), (&before.cautious, &before.brave));
}

#[test]
fn export_instance() {
    let mut dc = seating_session();
    assert_eq!(dc.export_instance(None).unwrap(), "");
    dc.add_atom(t("person(zoe,cat)"));
    dc.add_atom(t("person(\"Ana\",dog)"));
    dc.add_assumption(t("assign(zoe,(1,1))"), true).unwrap();
    let text = dc.export_instance(None).unwrap();
    assert_eq!(
        text,
        "person(zoe,cat).\nperson(\"Ana\",dog).\n% assumption: assign(zoe,(1,1)) true\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("instance.lp");
    dc.export_instance(Some(&path)).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    let err = dc.export_instance(Some(&dir.path().join("no/such/dir/x.lp"))).unwrap_err();
    assert!(matches!(err, DomainError::Io { .. }));
}

#[test]
fn restart_returns_to_initial_state() {
    let mut dc = seating_session();
    let initial = dc.compute_snapshot().unwrap();
    dc.add_assumption(t("assign(alexander,(1,1))"), true).unwrap();
    dc.add_atom(t("person(ana,dog)"));
    dc.next_solution().unwrap();
    dc.restart().unwrap();
    assert_eq!(*dc.compute_snapshot().unwrap(), *initial);
    dc.restart().unwrap();
    assert_eq!(*dc.compute_snapshot().unwrap(), *initial);
}

#[test]
fn explanation_backend_snapshot() {
    let backend = create_backend("ExplanationBackend", &[("assumption-signature".into(), "cons,2".into())]).unwrap();
    let mut dc = DomainControl::initialize(&seating_domain(), backend, solver()).unwrap();
    let snap = dc.compute_snapshot().unwrap();
    assert!(snap.is_sat());
    // collected constraint atoms are active assumptions
    assert_eq!(snap.assumptions.keys().filter(|a| a.name() == Some("cons")).count(), 3);
    dc.add_assumption(t("assign(alexander,(1,1))"), true).unwrap();
    dc.add_assumption(t("assign(torsten,(1,2))"), true).unwrap();
    let snap = dc.compute_snapshot().unwrap();
    let mus = &snap.mus[0];
    assert!(mus.contains(&t("assign(alexander,(1,1))")));
    assert!(mus.contains(&t("assign(torsten,(1,2))")));
    assert!(mus.iter().any(|a| a.name() == Some("cons") && a.args()[0] == t("same_pet")));
    assert_eq!(mus.len(), 3);
}

#[derive(Debug, Clone)]
enum Op {
    Assume(usize, usize, bool),
    Forget(usize, usize),
    Next,
    Clear,
}

const PEOPLE: [&str; 3] = ["alexander", "susana", "torsten"];
const SEATS: [&str; 5] = ["(1,1)", "(1,2)", "(2,1)", "(2,2)", "(2,3)"];

fn assign(p: usize, s: usize) -> Term {
    t(&format!("assign({},{})", PEOPLE[p], SEATS[s]))
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..3usize, 0..5usize, any::<bool>()).prop_map(|(p, s, v)| Op::Assume(p, s, v)),
        1 => (0..3usize, 0..5usize).prop_map(|(p, s)| Op::Forget(p, s)),
        2 => Just(Op::Next),
        1 => Just(Op::Clear),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn snapshots_stay_consistent(ops in prop::collection::vec(op(), 1..5)) {
        let mut dc = seating_session();
        for op in ops {
            match op {
                Op::Assume(p, s, v) => { let _ = dc.add_assumption(assign(p, s), v); }
                Op::Forget(p, s) => dc.remove_assumption(&assign(p, s)),
                Op::Next => { let _ = dc.next_solution(); }
                Op::Clear => dc.clear_assumptions(),
            }
            let snap = dc.compute_snapshot().unwrap();
            let projected = project_facts(&snap.facts());
            prop_assert_eq!(&projected.model, &snap.model);
            prop_assert_eq!(&projected.cautious, &snap.cautious);
            prop_assert_eq!(&projected.brave, &snap.brave);
            prop_assert_eq!(&projected.assumptions, &snap.assumptions);
            if snap.is_sat() {
                prop_assert!(snap.cautious.is_subset(&snap.model));
                prop_assert!(snap.model.is_subset(&snap.brave));
                for (a, v) in &snap.assumptions {
                    if *v {
                        prop_assert!(snap.cautious.contains(a));
                    } else {
                        prop_assert!(!snap.brave.contains(a));
                    }
                }
            }
        }
    }
}
