use std::fmt;

/// Exit code for invalid input or configuration.
pub const EXIT_INPUT: u8 = 2;
/// Exit code for a failed computation.
pub const EXIT_COMPUTE: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<fdlab::Error> for CliError {
    fn from(e: fdlab::Error) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_COMPUTE };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: message.into() }
}
