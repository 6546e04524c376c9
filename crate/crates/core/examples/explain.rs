// The explanation backend: constraints become assumptions and an
// unsatisfiable choice is explained by a minimal unsatisfiable subset.

use std::path::PathBuf;

use aspui::backend::create_backend;
use aspui::domain::DomainControl;
use aspui::solver::Solver;
use aspui::term::parse_term;

pub fn run_example() -> anyhow::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/seating");
    let backend = create_backend(
        "ExplanationBackend",
        &[("assumption-signature".into(), "cons,2".into())],
    )?;
    let mut dc = DomainControl::initialize(
        &[dir.join("ins.lp"), dir.join("enc.lp")],
        backend,
        Solver::discover(),
    )?;

    // a cat owner and the dog owner at the same table
    dc.add_assumption(parse_term("assign(alexander,(1,1))")?, true)?;
    dc.add_assumption(parse_term("assign(torsten,(1,2))")?, true)?;
    let snap = dc.compute_snapshot()?;
    assert!(!snap.is_sat());
    let mus = snap.mus.first().expect("an explanation");
    println!("unsatisfiable because of:");
    for atom in mus {
        println!("  {atom}");
    }
    println!("the UI still sees the last solution ({} atoms)", snap.model.len());

    dc.remove_assumption(&parse_term("assign(torsten,(1,2))")?);
    assert!(dc.compute_snapshot()?.is_sat());
    println!("dropping one choice restores satisfiability");
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
