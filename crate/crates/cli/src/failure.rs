//! Process exit contract: 0 success/pass, 2 invalid input (parse errors,
//! non-PSD or trivial parameters, bad flags or environment), 3 non-existence
//! of the requested distribution, 4 certification failure.

use wishart_cone::Error;

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NONEXISTENT: u8 = 3;
pub const EXIT_CERT_FAILED: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: String) -> Self {
        Failure {
            code: EXIT_INVALID,
            message,
        }
    }

    pub fn from_core(error: Error) -> Self {
        let code = match error {
            Error::NonExistent { .. } => EXIT_NONEXISTENT,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: error.to_string(),
        }
    }

    pub fn io(context: &str, error: std::io::Error) -> Self {
        Failure::invalid(format!("{context}: {error}"))
    }
}
