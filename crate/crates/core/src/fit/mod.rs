//! Least-squares fitting: Lorentzian lineshapes in log-gain space and the
//! logarithmic advancement-versus-power law.

mod linalg;
mod lineshape;
mod loglaw;

pub use lineshape::{
    fit_lineshape, fit_lineshape_with, FitOptions, FitResult, LineshapeBounds, LineshapeModel,
    DEGENERATE_STRENGTH_RATIO,
};
pub use loglaw::{fit_log_law, fit_log_law_with_reference, LogLawFit};
