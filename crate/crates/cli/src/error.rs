use std::fmt;

/// Machine-readable failure class, also used as the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    InputError,
    NumericalError,
    NotConverged,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::InputError => "input-error",
            Category::NumericalError => "numerical-error",
            Category::NotConverged => "not-converged",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::InputError => 2,
            Category::NumericalError => 3,
            Category::NotConverged => 4,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{category}: {message}")]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            category: Category::InputError,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            category: Category::NumericalError,
            message: message.into(),
        }
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        CliError {
            category: Category::NotConverged,
            message: message.into(),
        }
    }
}

impl From<dcfunm::Error> for CliError {
    fn from(e: dcfunm::Error) -> Self {
        use dcfunm::Error as E;
        let category = match e {
            E::SpectrumOnSingularity { .. }
            | E::SingularShift { .. }
            | E::NonSymmetricWithScalarCallback
            | E::NonFinite(_) => {
                Category::NumericalError
            }
            E::IterationLimit { .. } => Category::NotConverged,
            _ => Category::InputError,
        };
        CliError {
            category,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
