use std::io::Write;

use thermowatch_server::{AppState, Store};

use crate::args::ServeArgs;
use crate::{CliError, CliResult};

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {}
        () = term => {}
    }
}

/// Replays the log, binds, prints `listening on <addr>` and serves until
/// SIGINT or SIGTERM.
pub fn serve(args: &ServeArgs) -> CliResult<()> {
    let store = Store::open(&args.log).map_err(CliError::server)?;
    let replayed = store.log().len();
    let rt = tokio::runtime::Runtime::new().map_err(CliError::failure)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.listen)
            .await
            .map_err(|e| CliError::server(format!("cannot listen on {}: {e}", args.listen)))?;
        let addr = listener.local_addr().map_err(CliError::failure)?;
        let mut out = std::io::stdout();
        let _ = writeln!(out, "listening on {addr} (log {}, {replayed} record(s) replayed)", args.log.display());
        let _ = out.flush();
        thermowatch_server::serve(listener, AppState::new(store), shutdown_signal())
            .await
            .map_err(|e| CliError::server(e.to_string()))
    })
}
