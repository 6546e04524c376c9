// A domain session on the bundled seating instance: assumptions,
// browsing, new atoms and instance export.

use std::path::PathBuf;

use aspui::backend::ClingoBackend;
use aspui::domain::DomainControl;
use aspui::solver::Solver;
use aspui::term::parse_term;

fn seating(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/seating").join(file)
}

pub fn run_example() -> anyhow::Result<()> {
    let files = [seating("ins.lp"), seating("enc.lp")];
    let mut dc = DomainControl::initialize(&files, Box::new(ClingoBackend), Solver::discover())?;
    let snap = dc.compute_snapshot()?;
    println!("{} possible assignments", snap.brave.len() - snap.cautious.len());

    dc.add_assumption(parse_term("assign(alexander,(1,1))")?, true)?;
    let snap = dc.compute_snapshot()?;
    let susana = parse_term("assign(susana,(1,2))")?;
    assert!(snap.cautious.contains(&susana));
    println!("with alexander at (1,1): {susana} is forced");

    let torsten = parse_term("torsten")?;
    for _ in 0..3 {
        dc.next_solution()?;
        let snap = dc.compute_snapshot()?;
        let seat: Vec<String> = snap
            .model
            .iter()
            .filter(|a| a.args().first() == Some(&torsten))
            .map(|a| a.to_string())
            .collect();
        println!("browsing: {}", seat.join(" "));
    }

    dc.add_atom(parse_term(r#"person("Ana",dog)"#)?);
    let snap = dc.compute_snapshot()?;
    let ana_seats = snap
        .brave
        .iter()
        .filter(|a| a.name() == Some("assign") && a.args()[0].as_str() == Some("Ana"))
        .count();
    println!("Ana can take {ana_seats} seats");
    print!("exported instance:\n{}", dc.export_instance(None)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
