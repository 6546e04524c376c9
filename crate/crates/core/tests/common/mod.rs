//! Shared test helpers: paths to the bundled instance and a naive
//! stable-model oracle for small propositional programs.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;

use aspui::program::ProgramBundle;
use aspui::solver::{AtomSet, SolveMode, SolveRequest, SolveStatus, Solver};
use aspui::term::Term;

pub fn seating(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("assets/seating")
        .join(file)
}

pub fn seating_domain() -> Vec<PathBuf> {
    vec![seating("ins.lp"), seating("enc.lp")]
}

pub fn solver() -> Solver {
    Solver::discover()
}

pub fn t(s: &str) -> Term {
    aspui::term::parse_term(s).unwrap_or_else(|e| panic!("bad term {s}: {e}"))
}

/// All stable models as reported by the solver.
pub fn all_models(solver: &Solver, program: &ProgramBundle, assumptions: &[(Term, bool)]) -> Vec<AtomSet> {
    let req = SolveRequest::new(program.clone(), SolveMode::Models(0)).assuming(assumptions.iter().cloned());
    let out = solver.solve(&req).expect("solver runs");
    match out.status {
        SolveStatus::Sat => out.models,
        SolveStatus::Unsat => Vec::new(),
        SolveStatus::Error => panic!("solver error: {:?}", out.diagnostics),
    }
}

pub fn intersection(models: &[AtomSet]) -> AtomSet {
    let mut it = models.iter();
    let first = it.next().cloned().unwrap_or_default();
    it.fold(first, |acc, m| acc.intersection(m).cloned().collect())
}

pub fn union(models: &[AtomSet]) -> AtomSet {
    models.iter().flatten().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Atom(usize),
    Choice(usize),
    Falsum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Head,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

/// A ground normal program with choice rules over atoms `x0 .. x{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Naive {
    pub atoms: usize,
    pub rules: Vec<Rule>,
}

pub fn atom_name(i: usize) -> String {
    format!("x{i}")
}

impl Naive {
    pub fn random<R: Rng>(rng: &mut R, atoms: usize, rules: usize) -> Self {
        let mut out = Vec::with_capacity(rules);
        for _ in 0..rules {
            let head = match rng.gen_range(0..10) {
                0..=3 => Head::Choice(rng.gen_range(0..atoms)),
                4..=7 => Head::Atom(rng.gen_range(0..atoms)),
                _ => Head::Falsum,
            };
            let body_len = rng.gen_range(0..=2);
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for _ in 0..body_len {
                let a = rng.gen_range(0..atoms);
                if rng.gen_bool(0.5) {
                    pos.push(a);
                } else {
                    neg.push(a);
                }
            }
            if head == Head::Falsum && pos.is_empty() && neg.is_empty() {
                pos.push(rng.gen_range(0..atoms));
            }
            out.push(Rule { head, pos, neg });
        }
        Naive { atoms, rules: out }
    }

    pub fn to_asp(&self) -> String {
        let mut text = String::new();
        for r in &self.rules {
            let head = match r.head {
                Head::Atom(a) => atom_name(a),
                Head::Choice(a) => format!("{{{}}}", atom_name(a)),
                Head::Falsum => String::new(),
            };
            let body: Vec<String> = r
                .pos
                .iter()
                .map(|&a| atom_name(a))
                .chain(r.neg.iter().map(|&a| format!("not {}", atom_name(a))))
                .collect();
            if body.is_empty() {
                text.push_str(&format!("{head}.\n"));
            } else {
                text.push_str(&format!("{head} :- {}.\n", body.join(", ")));
            }
        }
        let defined: Vec<String> = (0..self.atoms).map(|a| format!("#defined {}/0.", atom_name(a))).collect();
        text.push_str(&defined.join("\n"));
        text.push('\n');
        text
    }

    /// Least model of the reduct with respect to `m`.
    fn reduct_fixpoint(&self, m: u32) -> u32 {
        let mut lm = 0u32;
        loop {
            let mut next = lm;
            for r in &self.rules {
                let head = match r.head {
                    Head::Atom(a) => a,
                    Head::Choice(a) if m & (1 << a) != 0 => a,
                    _ => continue,
                };
                if r.neg.iter().any(|&a| m & (1 << a) != 0) {
                    continue;
                }
                if r.pos.iter().all(|&a| lm & (1 << a) != 0) {
                    next |= 1 << head;
                }
            }
            if next == lm {
                return lm;
            }
            lm = next;
        }
    }

    fn violates_constraint(&self, m: u32) -> bool {
        self.rules.iter().any(|r| {
            r.head == Head::Falsum
                && r.pos.iter().all(|&a| m & (1 << a) != 0)
                && r.neg.iter().all(|&a| m & (1 << a) == 0)
        })
    }

    /// Brute force over all interpretations.
    pub fn stable_models(&self, assumptions: &[(usize, bool)]) -> Vec<BTreeSet<usize>> {
        assert!(self.atoms <= 16);
        let mut out = Vec::new();
        for m in 0u32..(1 << self.atoms) {
            if self.violates_constraint(m) || self.reduct_fixpoint(m) != m {
                continue;
            }
            if assumptions.iter().any(|&(a, v)| (m & (1 << a) != 0) != v) {
                continue;
            }
            out.push((0..self.atoms).filter(|a| m & (1 << a) != 0).collect());
        }
        out
    }

    pub fn satisfiable(&self, assumptions: &[(usize, bool)]) -> bool {
        !self.stable_models(assumptions).is_empty()
    }
}

/// Models of the naive oracle as solver atom sets.
pub fn as_atom_sets(models: &[BTreeSet<usize>]) -> BTreeSet<AtomSet> {
    models
        .iter()
        .map(|m| m.iter().map(|&a| Term::constant(atom_name(a))).collect())
        .collect()
}

/// Every inclusion-minimal subset of `candidates` for which `unsat` holds,
/// by exhaustive search.
pub fn minimal_unsat_subsets<F: Fn(&[usize]) -> bool>(candidates: &[usize], unsat: F) -> Vec<BTreeSet<usize>> {
    let n = candidates.len();
    let mut unsat_sets: Vec<u32> = (0u32..(1 << n))
        .filter(|&mask| {
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| candidates[i]).collect();
            unsat(&subset)
        })
        .collect();
    unsat_sets.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u32> = Vec::new();
    for m in unsat_sets {
        if !minimal.iter().any(|&k| k & m == k) {
            minimal.push(m);
        }
    }
    minimal
        .into_iter()
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| candidates[i]).collect())
        .collect()
}

/// Rules that make the facts of [`random_fact_file`] matter.
pub const TRANSFORM_RULES: &str = "\
s(X) :- p(X), not q(X,X).
t :- r.
{ u(X) } :- p(X).
:- u(X), q(X,_), not r.
:- r, q(a,b), not p(c).
#defined p/1. #defined q/2. #defined r/0.
";

/// A fact file mixing plain facts, facts in forms that are not plain
/// ground facts, comments and strings.
pub fn random_fact_file<R: Rng>(rng: &mut R) -> String {
    const CONSTS: [&str; 5] = ["a", "b", "c", "1", "\"s.t. %x\""];
    let pick = |rng: &mut R| CONSTS[rng.gen_range(0..CONSTS.len())];
    let mut text = String::new();
    for _ in 0..rng.gen_range(1..8) {
        let stmt = match rng.gen_range(0..9) {
            0..=2 => format!("p({}).", pick(rng)),
            3..=4 => format!("q({},{}).", pick(rng), pick(rng)),
            5 => "r.".to_string(),
            6 => format!("p({};{}).", pick(rng), pick(rng)),
            7 => "p(1..2).".to_string(),
            _ => format!("% p({}).", pick(rng)),
        };
        text.push_str(&stmt);
        text.push(if rng.gen_bool(0.5) { '\n' } else { ' ' });
    }
    text.push('\n');
    text
}

pub fn random_signatures<R: Rng>(rng: &mut R) -> Vec<aspui::term::Signature> {
    use aspui::term::Signature;
    let all = [Signature::new("p", 1), Signature::new("q", 2), Signature::new("r", 0), Signature::new("q", 1)];
    all.into_iter().filter(|_| rng.gen_bool(0.5)).collect()
}
