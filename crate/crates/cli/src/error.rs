use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(#[from] qprobe::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{} invariant(s) violated", .0.len())]
    Invariant(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}
