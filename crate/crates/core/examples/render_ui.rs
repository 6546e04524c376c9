// Evaluating a UI encoding against the domain state and printing the
// widget tree.

use std::path::PathBuf;

use aspui::backend::ClingoBackend;
use aspui::domain::DomainControl;
use aspui::solver::Solver;
use aspui::term::parse_term;
use aspui::ui::{assemble_tree, UiEngine, UiNode};

fn outline(node: &UiNode, depth: usize) {
    let label = node
        .attribute("label")
        .or_else(|| node.attribute("selected"))
        .map(|v| format!(" {v}"))
        .unwrap_or_default();
    println!("{}{} {}{label}", "  ".repeat(depth), node.widget, node.id);
    for child in &node.children {
        outline(child, depth + 1);
    }
}

pub fn run_example() -> anyhow::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/seating");
    let solver = Solver::discover();
    let mut dc = DomainControl::initialize(
        &[dir.join("ins.lp"), dir.join("enc.lp")],
        Box::new(ClingoBackend),
        solver.clone(),
    )?;
    dc.add_assumption(parse_term("assign(alexander,(1,1))")?, true)?;
    let facts = dc.compute_snapshot()?.facts();

    let ui = UiEngine::from_files(&[dir.join("ui-tables.lp"), dir.join("ui-menu.lp")], solver)?;
    let atoms = ui.build_ui_atoms(&facts)?;
    let tree = assemble_tree(&atoms.atoms)?.tree;
    for node in &tree.children {
        outline(node, 0);
    }
    let json = ui.render(&facts)?;
    println!("{} bytes of UI JSON", json.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
