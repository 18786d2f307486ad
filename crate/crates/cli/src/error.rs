use entperc::network::NetworkError;
use entperc::percolation::PercolationError;
use entperc::protocols::ProtocolError;
use entperc::state::StateError;

#[derive(Debug)]
pub enum CliError {
    /// Bad parameters; exit code 2.
    Invalid(String),
    /// Failure writing results; exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        })*
    };
}

invalid_from!(StateError, NetworkError, PercolationError, ProtocolError);
