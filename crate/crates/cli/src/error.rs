use std::fmt;

use serde::{Deserialize, Serialize};

/// Wire form of every error: `{"code": "...", "message": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    BadRequest,
    NotFound,
    Conflict,
    Internal,
}

#[derive(Debug, Clone)]
pub struct ServiceError {
    pub class: ErrorClass,
    pub body: ErrorBody,
}

impl ServiceError {
    pub fn new(class: ErrorClass, code: &str, message: impl fmt::Display) -> Self {
        ServiceError { class, body: ErrorBody { code: code.into(), message: message.to_string() } }
    }

    pub fn not_found(message: impl fmt::Display) -> Self {
        Self::new(ErrorClass::NotFound, "not-found", message)
    }

    pub fn conflict(message: impl fmt::Display) -> Self {
        Self::new(ErrorClass::Conflict, "conflict", message)
    }

    pub fn invalid(message: impl fmt::Display) -> Self {
        Self::new(ErrorClass::BadRequest, "invalid-argument", message)
    }

    pub fn code(&self) -> &str {
        &self.body.code
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.body).expect("error body serialises")
    }
}

impl fmt::Display for ServiceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.body.code, self.body.message)
    }
}

impl std::error::Error for ServiceError {}

impl From<karyoseg::Error> for ServiceError {
    fn from(e: karyoseg::Error) -> Self {
        let class = match e {
            karyoseg::Error::Io(_) | karyoseg::Error::Encode(_) => ErrorClass::Internal,
            _ => ErrorClass::BadRequest,
        };
        Self::new(class, e.code(), e)
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        karyoseg::Error::Io(e).into()
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        Self::invalid(e)
    }
}

pub type ServiceResult<T> = Result<T, ServiceError>;
