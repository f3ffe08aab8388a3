//! Scenario files and result output.

pub mod config;
pub mod csv;
pub mod vtk;

use std::path::PathBuf;

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "AXITHERM_OUTPUT_DIR";

/// Output directory after applying [`OUTPUT_DIR_ENV`].
pub fn output_directory(configured: &std::path::Path) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| configured.to_path_buf())
}
