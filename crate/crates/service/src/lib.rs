//! HTTP service around the registration engine: projects, slide regions,
//! tiles, asynchronous registration/translation/stitch jobs with progress
//! streams, and cell probes.

pub mod config;
pub mod error;
pub mod jobs;
pub mod routes;
pub mod state;

use std::sync::Arc;

pub use config::ServiceConfig;
pub use routes::router;
pub use state::AppState;

/// Binds `config.addr` and serves until the process ends.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let state = AppState::open(&config.data_dir, config.workers)?;
    let listener = tokio::net::TcpListener::bind(&config.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::clone(&state))).await?;
    Ok(())
}
