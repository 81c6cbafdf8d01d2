//! Command-line surface for `ipdensity`: instance files, reports, commands.

pub mod app;
pub mod instance_file;
pub mod report;

pub use app::run;
