pub mod constellation;
pub mod covariance;
pub mod error;
pub mod mutual_info;
pub mod oracle;
pub mod optimize;
pub mod params;
pub mod rates;
pub mod report;
pub mod scissor;

pub use error::{Error, Result};
