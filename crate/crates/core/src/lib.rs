//! Heavy-tailed loss modelling with the generalized log-Moyal gamma (GLMGA)
//! distribution: distribution functions, risk measures, likelihood fitting
//! and regression, goodness of fit and Monte Carlo estimator studies.

pub mod competitors;
pub mod data;
pub mod error;
pub mod family;
pub mod glmga;
pub mod gof;
pub mod inference;
pub mod optim;
pub mod report;
pub mod rng;
pub mod simlab;
pub mod specfun;

pub use error::{Error, Result};
