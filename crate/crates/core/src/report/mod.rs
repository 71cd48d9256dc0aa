//! Data files (CSV/JSON) and SVG plots.

use thiserror::Error;

mod svg;
mod tables;

pub use svg::{emit_fit_plot, emit_qr_plot, FIT_SAMPLES};
pub use tables::{
    read_hull_csv, read_model_json, read_results_csv, results_from_reader, results_to_writer,
    write_features_csv, write_hull_csv, write_model_json, write_results_csv, write_sweep_csv,
    FeatureRow, RESULTS_HEADER,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T, E = ReportError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes a text artifact, creating parent directories.
pub fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}
