use crate::Precision;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    /// A Levinson reflection coefficient reached the breakdown margin.
    #[error("Toeplitz system numerically singular at order {order} in {precision:?} precision (|reflection| = {reflection}){}", if *.precision == Precision::Double { "; retry with double-double precision" } else { "" })]
    NearSingular {
        order: usize,
        precision: Precision,
        reflection: f64,
    },

    #[error("measure numerically trivial: |alpha_{k}| = {magnitude} is not below 1")]
    NearTrivialMeasure { k: usize, magnitude: f64 },

    #[error("accuracy target missed ({context}); achieved {achieved:e}")]
    Accuracy { achieved: f64, context: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors rooted in floating-point limits rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
