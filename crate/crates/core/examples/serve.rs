// The HTTP server on an ephemeral port, driven with plain HTTP requests
// the way the browser client does it.

use std::path::PathBuf;

use aspui::cli::fetch_ui;
use aspui::server::{serve_until, AppState, OperationRequest};
use aspui::session::{Session, SessionConfig};
use aspui::term::parse_term;
use aspui::ui::parse_tree_json;

pub fn run_example() -> anyhow::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/seating");
    let config = SessionConfig {
        domain_files: vec![dir.join("ins.lp"), dir.join("enc.lp")],
        ui_files: vec![dir.join("ui-tables.lp"), dir.join("ui-menu.lp"), dir.join("ui-people.lp")],
        backend: "ClingoBackend".into(),
        backend_options: Vec::new(),
        solver: None,
    };
    let state = AppState::new(Session::open(&config)?);

    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let base = format!("http://{}", listener.local_addr()?);
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = rt.spawn(serve_until(listener, state, async {
        let _ = stopped.await;
    }));

    let before = fetch_ui(&base)?;
    println!("GET /ui: {} bytes", before.len());

    // what the client posts after typing a name and clicking "add dog person"
    let req = OperationRequest::new("add_atom(person(_context_value(name,str),dog))")
        .with_context("name", "Ana");
    let resp = reqwest::blocking::Client::new()
        .post(format!("{base}/operation"))
        .header("content-type", "application/json")
        .body(serde_json::to_string(&req)?)
        .send()?;
    println!("POST /operation: {}", resp.status());
    let after = resp.text()?;
    let tree = parse_tree_json(&after)?;
    let ana = tree
        .find(&parse_term(r#"person_btn("Ana")"#)?)
        .expect("a button for the new person");
    println!("new element {} of type {}", ana.id, ana.widget);

    let health = reqwest::blocking::get(format!("{base}/health"))?.text()?;
    println!("GET /health: {health}");
    let export = reqwest::blocking::get(format!("{base}/export"))?.text()?;
    print!("GET /export:\n{export}");

    let _ = stop.send(());
    rt.block_on(server)??;
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
