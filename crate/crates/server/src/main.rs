//! `socialsim-server`: serves sessions over HTTP for the browser sandbox.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use axum::http::{header, HeaderName, HeaderValue, Method};
use clap::Parser;
use tower_http::cors::{AllowOrigin, CorsLayer};

use socialsim_server::{router, Config};

#[derive(Debug, Parser)]
#[command(name = "socialsim-server", version, about = "HTTP session service for the social simulation sandbox")]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Serve full private state at /sessions/{id}/debug/state.
    #[arg(long)]
    debug: bool,
    /// Extra `*.social` files, addressable by file stem as `scenario_id`.
    #[arg(long)]
    scenario_dir: Option<PathBuf>,
    /// Origin allowed to call the service from a browser; `*` allows any.
    #[arg(long, default_value = "http://localhost:5173")]
    cors_origin: String,
}

fn cors(origin: &str) -> Result<CorsLayer, String> {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        AllowOrigin::exact(HeaderValue::from_str(origin).map_err(|e| format!("bad --cors-origin: {e}"))?)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE, HeaderName::from_static("last-event-id")]))
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = Config::builtin();
    config.debug = args.debug;
    if let Some(dir) = &args.scenario_dir {
        if let Err(e) = config.load_dir(dir) {
            eprintln!("error: cannot load scenarios from {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    let layer = match cors(&args.cors_origin) {
        Ok(layer) => layer,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let addr: SocketAddr = match format!("{}:{}", args.host, args.port).parse() {
        Ok(addr) => addr,
        Err(e) => {
            eprintln!("error: bad address: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            return ExitCode::from(1);
        }
    };
    let bound = listener.local_addr().unwrap_or(addr);
    let ids: Vec<&String> = config.scenarios.keys().collect();
    eprintln!("listening on http://{bound} (scenarios: {ids:?}, debug: {})", args.debug);
    if let Err(e) = axum::serve(listener, router(config).layer(layer)).await {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
