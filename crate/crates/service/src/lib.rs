//! HTTP API and command-line front end for `simtutor-core`.
//!
//! [`app::router`] builds the axum router over an [`app::AppState`];
//! [`serve`] binds it to a listener. The `simtutor` binary wraps this and
//! the population simulator behind `serve`, `run` and `compare`
//! subcommands.

pub mod api;
pub mod app;
pub mod auth;
pub mod error;

use std::future::Future;
use std::sync::Arc;

pub use app::{router, AppState};
pub use error::{ApiError, ErrorCode};

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
