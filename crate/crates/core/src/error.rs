//! Error types shared by the field arithmetic layer.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("not a p-th power")]
    NotAPthPower,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("modulus is not irreducible over F_p")]
    ReducibleModulus,
    #[error("no built-in modulus for q = {0}; supply one")]
    NoBuiltinModulus(u64),
    #[error("parse error: {0}")]
    Parse(String),
}
