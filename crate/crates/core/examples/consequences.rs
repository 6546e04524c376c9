// Models, cautious and brave consequences, and assumptions through the
// solver subprocess.

use aspui::program::ProgramBundle;
use aspui::solver::{SolveMode, SolveRequest, SolveStatus, Solver};
use aspui::term::parse_term;

pub fn run_example() -> anyhow::Result<()> {
    let solver = Solver::discover();
    println!("solver: {}", solver.solver_info()?);

    let program = ProgramBundle::from_text("demo.lp", "a. {b}. c :- b.");
    let show = |mode| -> anyhow::Result<()> {
        let out = solver.solve(&SolveRequest::new(program.clone(), mode))?;
        for m in &out.models {
            let atoms: Vec<String> = m.iter().map(|a| a.to_string()).collect();
            println!("{mode:?}: {{{}}}", atoms.join(", "));
        }
        Ok(())
    };
    show(SolveMode::Models(0))?;
    show(SolveMode::Cautious)?;
    show(SolveMode::Brave)?;

    // b assumed true and c assumed false cannot both hold
    let req = SolveRequest::new(program.clone(), SolveMode::Models(1))
        .assuming([(parse_term("b")?, true), (parse_term("c")?, false)]);
    let out = solver.solve(&req)?;
    assert_eq!(out.status, SolveStatus::Unsat);
    let core: Vec<String> = out.core.iter().map(|a| a.to_string()).collect();
    println!("unsat under assumptions, core {{{}}}", core.join(", "));

    let diags = solver.check_syntax(&ProgramBundle::from_text("broken.lp", "a :- b"))?;
    for d in diags {
        println!("{d}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
