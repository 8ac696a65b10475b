//! Session store, command line and HTTP API for the karyoseg pipeline.

pub mod cli;
pub mod error;
pub mod http;
pub mod render;
pub mod store;

pub use error::{ErrorBody, ServiceError, ServiceResult};
pub use http::{router, AppState};
pub use store::Session;
