use quantacode::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Internal,
    InvalidInput,
    Unachievable,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn internal(message: impl Into<String>) -> Self {
        Failure { kind: Kind::Internal, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { kind: Kind::InvalidInput, message: message.into() }
    }

    /// Exit status: 1 internal, 2 invalid input, 3 target unachievable.
    pub fn code(&self) -> u8 {
        match self.kind {
            Kind::Internal => 1,
            Kind::InvalidInput => 2,
            Kind::Unachievable => 3,
        }
    }

    pub fn reading(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::invalid(format!("cannot read {}: {e}", path.display()))
    }

    pub fn writing(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::internal(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::TargetUnachievableWithinScan { .. } => Kind::Unachievable,
            _ => Kind::InvalidInput,
        };
        Failure { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::internal(e.to_string())
    }
}
