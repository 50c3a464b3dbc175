pub mod config;
pub mod economics;
pub mod error;
pub mod ingest;
pub mod insolation;
pub mod pso;
pub mod pv;
pub mod report;
pub mod scenario;
pub mod solar;
pub mod synthetic;
pub mod tariff;

pub use error::{Error, Result};
