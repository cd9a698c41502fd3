//! Bivariate Beta-process prior on a finite grid, its update under the
//! incomplete likelihood, posterior-mean and noninformative estimators,
//! prior sampling, and exact recovery of the joint law from the law of the
//! censored observations.

mod estimate;
mod mass;
mod params;
mod sample;

pub use estimate::{noninformative_estimate, posterior_mean_mass, recover_distribution};
pub use mass::{survival_surface, BivariateMass, DefectRecord, Stratum};
pub use params::{
    decompose, prior_from_guess, update, BivariateBetaParams, Decomposition, PriorGuess,
};
pub use sample::sample_prior;
