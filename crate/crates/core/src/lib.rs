//! Nonparametric estimation of bivariate survival distributions from
//! right-censored pairs.
//!
//! Observations are reduced to their minimum time, which coordinate outlives
//! it, and the later coordinate's time ([`survdata`]). Each of these pieces
//! is a one-dimensional censoring problem ([`univariate`]); a bivariate
//! Beta-process prior over them is conjugate when observations with a
//! censored minimum only enter the minimum-time risk sets ([`betaproc2d`]).
//! The Dabrowska product-limit surface serves as a comparator, with an
//! auditor for the negative rectangle masses it can produce ([`dabrowska`]).
//! [`pruittlab`] reproduces the inconsistency of the Dirichlet-process Bayes
//! estimate under Pruitt's censoring design, and [`simharness`] runs seeded
//! consistency studies.

pub mod betaproc2d;
pub mod cli;
pub mod dabrowska;
pub mod error;
pub mod exact;
pub mod exec;
pub mod pruittlab;
pub mod simharness;
pub mod survdata;
pub mod univariate;

pub use error::{Error, Result};
pub use exact::Rational;
