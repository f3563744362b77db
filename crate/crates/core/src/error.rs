use alloc::string::String;
use alloc::vec::Vec;

use crate::inpaint::TracePoint;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid corruption spec: {0}")]
    Spec(String),
    #[error("arity error: {0}")]
    Arity(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint load error: {0}")]
    Load(String),
    #[error("training diverged at step {step}: {what}")]
    Training { step: usize, what: String },
    #[error("optimization produced a non-finite loss at iteration {iteration}")]
    Optimization {
        iteration: usize,
        trace: Vec<TracePoint>,
    },
    #[error("embedder interface error: {0}")]
    Interface(String),
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
