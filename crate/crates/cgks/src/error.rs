use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate reconstruction stencil for cell {cell}")]
    DegenerateStencil { cell: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("mesh format error: {0}")]
    MeshFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("solver abort at step {step}, stage {stage}, cell {cell}: {detail}")]
    SolverAbort {
        step: u64,
        stage: u8,
        cell: usize,
        detail: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
