use thiserror::Error;

/// Errors raised by the design, boundary, monitoring and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("pooled event rate is {0}; the variance of the difference is undefined")]
    UndefinedVariance(f64),

    #[error("control and treatment rates are equal ({0}); there is no effect to detect")]
    NoEffect(f64),

    #[error("degenerate re-estimation: {0}")]
    DegenerateReestimation(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("{name} = {p} is not a probability"));
    }
    Ok(())
}

pub(crate) fn check_open_probability(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("{name} = {p} must lie strictly inside (0, 1)"));
    }
    Ok(())
}
