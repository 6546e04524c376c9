//! Command line: `server`, `client` and `client-server`.

use std::path::PathBuf;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};

use crate::backend::parse_assumption_signature;
use crate::server::{serve, AppState};
use crate::session::{Session, SessionConfig};

pub const PORT_ENV: &str = "ASPUI_PORT";

#[derive(Debug, Parser)]
#[command(name = "aspui", version, about = "Answer-set programmed user interfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Log filter, e.g. `info` or `aspui=debug`.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the UI over HTTP.
    Server(ServerArgs),
    /// Fetch and print the UI of a running server.
    Client(Endpoint),
    /// Start a server and point a client at it.
    ClientServer(ServerArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Endpoint {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,

    #[arg(long, env = PORT_ENV, default_value_t = 8000)]
    pub port: u16,
}

impl Endpoint {
    pub fn base_url(&self) -> String {
        format!("http://{}:{}", self.host, self.port)
    }
}

fn signature_arg(s: &str) -> Result<String, String> {
    parse_assumption_signature(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ServerArgs {
    /// Domain encodings and instances.
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    pub domain_files: Vec<PathBuf>,

    /// UI encodings.
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    pub ui_files: Vec<PathBuf>,

    #[arg(long, default_value = "ClingoBackend")]
    pub backend: String,

    /// Facts of this signature become assumptions (explanation backend).
    #[arg(long = "assumption-signature", value_name = "NAME,ARITY", value_parser = signature_arg)]
    pub assumption_signatures: Vec<String>,

    #[command(flatten)]
    pub endpoint: Endpoint,

    /// Solver command line, e.g. `clingo` or `python3 -m clingo`.
    #[arg(long, env = crate::solver::SOLVER_ENV)]
    pub solver: Option<String>,
}

impl ServerArgs {
    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            domain_files: self.domain_files.clone(),
            ui_files: self.ui_files.clone(),
            backend: self.backend.clone(),
            backend_options: self
                .assumption_signatures
                .iter()
                .map(|s| ("assumption-signature".to_string(), s.clone()))
                .collect(),
            solver: self.solver.clone(),
        }
    }
}

/// GET `/ui` from a running server.
pub fn fetch_ui(base_url: &str) -> anyhow::Result<String> {
    let url = format!("{base_url}/ui");
    let resp = reqwest::blocking::get(&url).with_context(|| format!("requesting {url}"))?;
    let status = resp.status();
    let body = resp.text()?;
    anyhow::ensure!(status.is_success(), "{url} answered {status}: {body}");
    Ok(body)
}

fn print_ui(json: &str) -> anyhow::Result<()> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

async fn start_server(args: &ServerArgs) -> anyhow::Result<(tokio::net::TcpListener, AppState)> {
    let config = args.session_config();
    let session = tokio::task::spawn_blocking(move || Session::open(&config)).await??;
    let addr = (args.endpoint.host.as_str(), args.endpoint.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {}", args.endpoint.base_url()))?;
    Ok((listener, AppState::new(session)))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Client(endpoint) => print_ui(&fetch_ui(&endpoint.base_url())?),
        Command::Server(args) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let (listener, state) = start_server(&args).await?;
                serve(listener, state).await?;
                Ok(())
            })
        }
        Command::ClientServer(args) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let (listener, state) = start_server(&args).await?;
                let base = format!("http://{}", listener.local_addr()?);
                let server = tokio::spawn(serve(listener, state));
                let ui = tokio::task::spawn_blocking(move || fetch_ui(&base)).await??;
                print_ui(&ui)?;
                server.await??;
                Ok(())
            })
        }
    }
}
