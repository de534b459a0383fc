//! HTTP service for running elicitation and annotation sessions and
//! exporting the collected corpus.

mod error;
pub mod http;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::ServiceError;
pub use http::{router, AppState};
pub use store::{ExportReport, JudgeProgress, ServiceConfig, Session, Store};

/// Opens the store and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), ServiceError> {
    let store = Arc::new(Store::open(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(ServiceError::storage)?;
    log::info!("listening on {}", listener.local_addr().map_err(ServiceError::storage)?);
    axum::serve(listener, router(store)).await.map_err(ServiceError::storage)
}
