pub mod program;
pub mod solver;
pub mod term;
pub mod backend;
pub mod domain;
pub mod ui;
pub mod context;
pub mod session;
pub mod server;
pub mod cli;
