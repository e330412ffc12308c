pub mod bemd;
pub mod error;
pub mod forecasters;
pub mod interval_ts;
pub mod stats;
pub mod svr;
pub mod synthetic;

pub use error::{Error, Result};
