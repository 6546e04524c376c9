mod terms_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/terms.rs"));
}

mod consequences_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/consequences.rs"));
}

mod seating_session_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/seating_session.rs"));
}

mod explain_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/explain.rs"));
}

mod render_ui_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/render_ui.rs"));
}

mod serve_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/serve.rs"));
}

#[test]
fn terms_example_runs() {
    terms_example::run_example().expect("terms example should run");
}

#[test]
fn consequences_example_runs() {
    consequences_example::run_example().expect("consequences example should run");
}

#[test]
fn seating_session_example_runs() {
    seating_session_example::run_example().expect("seating session example should run");
}

#[test]
fn explain_example_runs() {
    explain_example::run_example().expect("explain example should run");
}

#[test]
fn render_ui_example_runs() {
    render_ui_example::run_example().expect("render UI example should run");
}

#[test]
fn serve_example_runs() {
    serve_example::run_example().expect("serve example should run");
}
