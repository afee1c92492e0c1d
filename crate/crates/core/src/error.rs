use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data has the wrong shape or length.
    #[error("input error: {0}")]
    Input(String),
    /// A matrix is singular or too ill-conditioned to use.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A frame could not be mapped back to bits.
    #[error("decode error: {0}")]
    Decode(String),
    /// Too few components to estimate the requested model order.
    #[error("estimation error: {0}")]
    Estimation(String),
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
