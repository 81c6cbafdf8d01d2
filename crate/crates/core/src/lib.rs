pub mod density;
pub mod error;
pub mod exact_linalg;
pub mod group_relaxation;
pub mod ip_core;
pub mod lp_core;

pub use error::{Error, Result};
