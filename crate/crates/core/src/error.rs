use serde::Serialize;
use thiserror::Error;

use crate::bag::BagError;
use crate::dataset::DatasetError;
use crate::depth::DepthError;
use crate::fence::FenceError;
use crate::geometry::GeometryError;
use crate::inference::InferenceError;
use crate::render::RenderError;
use crate::robust_scatter::ScatterError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Depth(#[from] DepthError),
    #[error(transparent)]
    Bag(#[from] BagError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Fence(#[from] FenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("malformed model JSON: {0}")]
    Json(String),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Dataset(_) => "dataset",
            Error::Depth(_) => "depth",
            Error::Bag(_) => "bag",
            Error::Scatter(_) => "robust_scatter",
            Error::Inference(_) => "inference",
            Error::Fence(_) => "fence",
            Error::Geometry(_) => "geometry",
            Error::Render(_) => "render",
            Error::Io { .. } | Error::Usage(_) | Error::Json(_) => "cli",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dataset(_) | Error::Io { .. } | Error::Usage(_) | Error::Json(_) => EXIT_INPUT,
            Error::Inference(InferenceError::BadLevel(_)) => EXIT_INPUT,
            _ => EXIT_NUMERIC,
        }
    }

    pub fn record(&self, input: Option<&str>) -> ErrorRecord {
        ErrorRecord {
            error: self.module(),
            message: self.to_string(),
            exit_code: self.exit_code(),
            input: input.map(str::to_owned),
        }
    }
}

/// Machine-readable failure report written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
}
